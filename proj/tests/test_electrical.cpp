#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "arboreal/electrical.hpp"
#include "arboreal/enumerate.hpp"
#include "arboreal/forest_measure.hpp"
#include "test_util.hpp"

using namespace arboreal;

namespace {

Conductances random_conductances(Rng& rng, const Multigraph& g) {
    Conductances c = Conductances::unit(g);
    for (const auto& e : g.edges()) c.set(e.id, testutil::random_weight(rng));
    return c;
}

void check_kirchhoff_exact(const Multigraph& g, const Conductances& c, const CurrentFlow& f) {
    for (const auto& [v, r] : current_law_residuals(g, c, f)) CHECK(r.is_zero());
    for (const auto& r : cycle_law_residuals(g, f)) CHECK(r.is_zero());
    for (const auto& r : ohm_residuals(g, c, f)) CHECK(r.is_zero());
}

} // namespace

TEST_CASE("tree counts on complete graphs") {
    for (int n = 3; n <= 6; ++n) {
        auto kn = generate(GraphKind::complete, {n}, Rational(1));
        Conductances unit = Conductances::unit(kn);
        CHECK(tree_count(kn, unit) == Rational(pow_z(n, static_cast<unsigned long>(n - 2))));
        CHECK(tree_count(kn, unit, {0}) ==
              Rational(2) * Rational(pow_z(n, static_cast<unsigned long>(n - 3))));
        if (n >= 4) {
            // Edge 0 = (0,1); the edge (2,3) is disjoint from it.
            int disjoint = -1;
            for (const auto& e : kn.edges())
                if (e.u == 2 && e.v == 3) disjoint = e.id;
            CHECK(tree_count(kn, unit, {0, disjoint}) ==
                  Rational(4) * Rational(pow_z(n, static_cast<unsigned long>(n - 4))));
        }
    }
}

TEST_CASE("contracting a required edge matches the boosted-conductance pattern") {
    // Trees of K_n through a fixed edge equal the weighted count on K_{n-1}
    // where the merged vertex carries conductance 2 to everyone else.
    for (int n = 4; n <= 7; ++n) {
        auto kn = generate(GraphKind::complete, {n}, Rational(1));
        Rational via_contract = tree_count(kn, Conductances::unit(kn), {0});

        auto km = generate(GraphKind::complete, {n - 1}, Rational(1));
        Conductances c = Conductances::unit(km);
        for (const auto& e : km.edges())
            if (e.u == 0 || e.v == 0) c.set(e.id, Rational(2));
        CHECK(via_contract == tree_count(km, c));
        CHECK(via_contract == Rational(2) * Rational(pow_z(n, static_cast<unsigned long>(n - 3))));
    }
}

TEST_CASE("tree count edge cases") {
    Rational w(1);

    SUBCASE("cyclic requirement rejected") {
        auto tri = generate(GraphKind::complete, {3}, w);
        CHECK_THROWS_AS(tree_count(tri, Conductances::unit(tri), {0, 1, 2}), InvalidEventError);
    }

    SUBCASE("parallel pair requirement rejected as cyclic") {
        Multigraph g = Multigraph::with_vertices(2);
        int a = g.add_edge(0, 1, w), b = g.add_edge(0, 1, w);
        CHECK_THROWS_AS(tree_count(g, Conductances::unit(g), {a, b}), InvalidEventError);
    }

    SUBCASE("disconnection gives zero") {
        auto tri = generate(GraphKind::complete, {3}, w);
        CHECK(tree_count(tri, Conductances::unit(tri), {}, {0, 1}).is_zero());
        Multigraph two = Multigraph::with_vertices(3);
        two.add_edge(0, 1, w);
        CHECK(tree_count(two, Conductances::unit(two)).is_zero());
    }

    SUBCASE("parallel edges add conductance") {
        Multigraph g = Multigraph::with_vertices(2);
        g.add_edge(0, 1, w);
        g.add_edge(0, 1, w);
        Conductances c = Conductances::unit(g);
        c.set(1, Rational(2));
        CHECK(tree_count(g, c) == Rational(3));
    }

    SUBCASE("single vertex counts one") {
        Multigraph g = Multigraph::with_vertices(1);
        CHECK(tree_count(g, Conductances::unit(g)) == Rational(1));
    }
}

TEST_CASE("effective resistance") {
    Rational w(1);

    SUBCASE("single unit edge") {
        Multigraph g = Multigraph::with_vertices(2);
        g.add_edge(0, 1, w);
        CHECK(effective_resistance(g, Conductances::unit(g), 0, 1) == Rational(1));
    }

    SUBCASE("series law") {
        auto p3 = generate(GraphKind::path, {3}, w);
        CHECK(effective_resistance(p3, Conductances::unit(p3), 0, 2) == Rational(2));
    }

    SUBCASE("K4 adjacent pair") {
        auto k4 = generate(GraphKind::complete, {4}, w);
        CHECK(effective_resistance(k4, Conductances::unit(k4), 0, 1) == Rational(1, 2));
    }

    SUBCASE("C4 across one edge is 1 parallel 3") {
        auto c4 = generate(GraphKind::cycle, {4}, w);
        CHECK(effective_resistance(c4, Conductances::unit(c4), 0, 1) == Rational(3, 4));
    }

    SUBCASE("disconnected terminals signal infinite resistance") {
        Multigraph g = Multigraph::with_vertices(4);
        g.add_edge(0, 1, w);
        g.add_edge(2, 3, w);
        CHECK_THROWS_AS(effective_resistance(g, Conductances::unit(g), 0, 2), DisconnectedError);
    }
}

TEST_CASE("unit current flow") {
    Rational w(1);

    SUBCASE("K4 flow pattern 2/n, 1/n, 0") {
        auto k4 = generate(GraphKind::complete, {4}, w);
        Conductances c = Conductances::unit(k4);
        CurrentFlow f = unit_current_flow(k4, c, 0, 1);
        CHECK(f.flow_between(0, 1) == Rational(1, 2));
        CHECK(f.flow_between(0, 2) == Rational(1, 4));
        CHECK(f.flow_between(0, 3) == Rational(1, 4));
        CHECK(f.flow_between(2, 1) == Rational(1, 4));
        CHECK(f.flow_between(2, 3).is_zero());
        check_kirchhoff_exact(k4, c, f);
        CHECK(f.energy(k4, c) == Rational(1, 2));
    }

    SUBCASE("path end to end carries the full unit") {
        auto p3 = generate(GraphKind::path, {3}, w);
        Conductances c = Conductances::unit(p3);
        CurrentFlow f = unit_current_flow(p3, c, 0, 2);
        CHECK(f.flow_between(0, 1) == Rational(1));
        CHECK(f.flow_between(1, 2) == Rational(1));
        check_kirchhoff_exact(p3, c, f);
    }

    SUBCASE("C4 splits 3/4 and 1/4") {
        auto c4 = generate(GraphKind::cycle, {4}, w);
        Conductances c = Conductances::unit(c4);
        CurrentFlow f = unit_current_flow(c4, c, 0, 1);
        CHECK(f.flow_between(0, 1) == Rational(3, 4));
        CHECK(f.flow_between(0, 3) == Rational(1, 4));
        CHECK(f.flow_between(3, 2) == Rational(1, 4));
        CHECK(f.flow_between(2, 1) == Rational(1, 4));
        check_kirchhoff_exact(c4, c, f);
        CHECK(f.energy(c4, c) == Rational(3, 4));
    }
}

TEST_CASE("rayleigh monotonicity") {
    Rational w(1);

    SUBCASE("far-side conductance strictly lowers R_eff") {
        auto c4 = generate(GraphKind::cycle, {4}, w);
        // Terminals across edge 0 = (0,1); e0 = edge (2,3) on the far side.
        auto rep = rayleigh_check(c4, Conductances::unit(c4), 0, 1, 2,
                                  {Rational(1), Rational(2), Rational(10)});
        CHECK(rep.strictly_decreasing);
        CHECK_FALSE(rep.base_current.is_zero());
    }

    SUBCASE("pendant edge carries no current, R_eff constant") {
        auto tri = generate(GraphKind::complete, {3}, w);
        Multigraph g = tri;
        g.add_vertex(3);
        int pendant = g.add_edge(2, 3, w);
        auto rep = rayleigh_check(g, Conductances::unit(g), 0, 1, pendant,
                                  {Rational(1), Rational(5), Rational(100)});
        CHECK(rep.constant);
        CHECK(rep.base_current.is_zero());
    }

    SUBCASE("direct terminal edge strictly decreases") {
        auto c4 = generate(GraphKind::cycle, {4}, w);
        auto rep = rayleigh_check(c4, Conductances::unit(c4), 0, 1, 0,
                                  {Rational(1), Rational(2), Rational(10)});
        CHECK(rep.strictly_decreasing);
    }

    SUBCASE("bump validation") {
        auto c4 = generate(GraphKind::cycle, {4}, w);
        CHECK_THROWS_AS(rayleigh_check(c4, Conductances::unit(c4), 0, 1, 0,
                                       {Rational(2), Rational(1)}),
                        InvalidOperationError);
    }
}

TEST_CASE("shared cycle current") {
    Rational w(1);

    SUBCASE("K4 adjacent edges share a cycle and current flows") {
        auto k4 = generate(GraphKind::complete, {4}, w);
        auto res = shared_cycle_current(k4, 0, 1); // (0,1) and (0,2)
        CHECK(res.has_shared_cycle);
        CHECK_FALSE(res.current_through_e2.is_zero());
    }

    SUBCASE("bowtie cross-triangle edges are cut off at the shared vertex") {
        auto bow = generate(GraphKind::bowtie, {}, w);
        // Edge 1 = (0,2) in the left triangle, edge 3 = (2,3) in the right.
        auto res = shared_cycle_current(bow, 1, 3);
        CHECK_FALSE(res.has_shared_cycle);
        CHECK(res.current_through_e2.is_zero());
    }

    SUBCASE("triangle edges carry 1/3 magnitude") {
        auto tri = generate(GraphKind::complete, {3}, w);
        auto res = shared_cycle_current(tri, 0, 1);
        CHECK(res.has_shared_cycle);
        CHECK(res.current_through_e2.abs() == Rational(1, 3));
    }

    SUBCASE("parallel edges form a two-edge cycle") {
        Multigraph g = Multigraph::with_vertices(2);
        int a = g.add_edge(0, 1, w), b = g.add_edge(0, 1, w);
        auto res = shared_cycle_current(g, a, b);
        CHECK(res.has_shared_cycle);
        CHECK_FALSE(res.current_through_e2.is_zero());
    }

    SUBCASE("non-adjacent edges rejected") {
        auto p4 = generate(GraphKind::path, {4}, w);
        CHECK_THROWS_AS(shared_cycle_current(p4, 0, 2), InvalidOperationError);
    }
}

TEST_CASE("electrical identities on random weighted graphs") {
    Rng rng(909);
    int done = 0;
    while (done < 25) {
        auto g = testutil::random_connected_graph(rng, 2 + rng.next_below(6), rng.next_below(6),
                                                  true);
        Conductances c = random_conductances(rng, g);
        const auto& edges = g.edges();
        Rational t_all = tree_count(g, c);

        // P_UST[e] = c(e) R_eff(endpoints), and R_eff = T[e-contracted]/T.
        for (const auto& e : edges) {
            if (e.is_loop()) continue;
            Rational reff = effective_resistance(g, c, e.u, e.v);
            CHECK(ust_edge_probability(g, c, e.id) == c.at(e.id) * reff);
        }

        // Kirchhoff residuals vanish for a random terminal pair.
        int u = g.vertices()[rng.next_below(g.n_vertices())];
        int v = g.vertices()[rng.next_below(g.n_vertices())];
        if (u != v) {
            CurrentFlow f = unit_current_flow(g, c, u, v);
            check_kirchhoff_exact(g, c, f);
            CHECK(f.energy(g, c) == f.potential.at(u));
        }

        // Pairwise negative correlation of the weighted spanning-tree measure.
        for (std::size_t i = 0; i < edges.size(); ++i) {
            for (std::size_t j = i + 1; j < edges.size(); ++j) {
                if (edges[i].is_loop() || edges[j].is_loop()) continue;
                Rational ti = tree_count(g, c, {edges[i].id});
                Rational tj = tree_count(g, c, {edges[j].id});
                Rational tij = is_acyclic_subset(g, {edges[i].id, edges[j].id})
                                   ? tree_count(g, c, {edges[i].id, edges[j].id})
                                   : Rational(0);
                CHECK(ti * tj >= tij * t_all);
            }
        }
        ++done;
    }
}

TEST_CASE("contraction monotonicity of effective resistance") {
    Rng rng(1010);
    for (int t = 0; t < 20; ++t) {
        auto g = testutil::random_connected_graph(rng, 3 + rng.next_below(4), rng.next_below(4),
                                                  true);
        Conductances c = random_conductances(rng, g);
        int u = g.vertices().front();
        int v = g.vertices().back();
        Rational base = effective_resistance(g, c, u, v);
        for (const auto& e : g.edges()) {
            if (e.is_loop()) continue;
            auto [h, map] = g.contract(e.id, true);
            int keep = std::min(e.u, e.v);
            int u2 = (u == e.u || u == e.v) ? keep : u;
            int v2 = (v == e.u || v == e.v) ? keep : v;
            Rational after = u2 == v2 ? Rational(0) : effective_resistance(h, c, u2, v2);
            CHECK(after <= base);
        }
    }
}

TEST_CASE("tree count equals the top forest-polynomial coefficient") {
    for (const auto& g : small_connected_graphs(5, true)) {
        auto z = mu(g, EventSpec::none(), WeightMode::symbolic).as_polynomial();
        CHECK(z.degree() == static_cast<long>(g.n_vertices()) - 1);
        CHECK(z.leading_coeff() == tree_count(g, Conductances::unit(g)));
    }
}
