#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "arboreal/graph.hpp"
#include "arboreal/matrix.hpp"

namespace arboreal {

/// Per-edge conductances; defaults come from the graph's weights or unit.
class Conductances {
public:
    static Conductances unit(const Multigraph& g) {
        Conductances c;
        for (const auto& e : g.edges()) c.c_[e.id] = Rational(1);
        return c;
    }

    static Conductances from_weights(const Multigraph& g) {
        Conductances c;
        for (const auto& e : g.edges()) c.c_[e.id] = e.weight;
        return c;
    }

    const Rational& at(int edge_id) const {
        auto it = c_.find(edge_id);
        if (it == c_.end()) throw InvalidOperationError("no conductance for edge");
        return it->second;
    }

    void set(int edge_id, const Rational& v) {
        if (v.sign() <= 0) throw InvalidOperationError("conductances must be positive");
        c_[edge_id] = v;
    }

private:
    std::map<int, Rational> c_;
};

/// Exact unit current flow with its potentials; sink grounded at 0.
/// Sign convention: flow(a,b) > 0 means current runs a -> b, and per edge
/// i(e) = c(e) * (phi(u) - phi(v)) oriented from the edge's stored u to v.
struct CurrentFlow {
    int source = -1, sink = -1;
    std::map<int, Rational> potential;                 // per vertex
    std::map<std::pair<int, int>, Rational> pair_flow; // key (a,b) with a<b: current a->b

    Rational flow_between(int a, int b) const {
        bool swap = a > b;
        auto it = pair_flow.find({std::min(a, b), std::max(a, b)});
        if (it == pair_flow.end()) return Rational(0);
        return swap ? -it->second : it->second;
    }

    /// Signed current through one edge, oriented stored-u -> stored-v.
    Rational edge_current(const Edge& e, const Conductances& c) const {
        if (e.is_loop()) return Rational(0);
        return c.at(e.id) * (potential.at(e.u) - potential.at(e.v));
    }

    /// E(i) = sum over edges of i^2 / c; equals the effective resistance.
    Rational energy(const Multigraph& g, const Conductances& c) const {
        Rational acc(0);
        for (const auto& e : g.edges()) {
            if (e.is_loop()) continue;
            Rational i = edge_current(e, c);
            acc += i * i / c.at(e.id);
        }
        return acc;
    }
};

namespace detail {

/// Solves the grounded-Laplacian system for a unit injection at `source`,
/// returning per-vertex potentials with `sink` fixed at zero. Restricted to
/// the component containing the terminals.
inline std::map<int, Rational> grounded_potentials(const Multigraph& g, const Conductances& c,
                                                   int source, int sink) {
    if (source == sink) throw InvalidOperationError("terminals must differ");
    if (!g.has_vertex(source) || !g.has_vertex(sink))
        throw InvalidOperationError("terminal is not a vertex");
    if (!same_component(g, source, sink))
        throw DisconnectedError("terminals are in different components: infinite resistance");

    // Component vertices, sink removed, dense-indexed.
    UnionFind uf(g.vertices());
    for (const auto& e : g.edges()) uf.unite(e.u, e.v);
    int root = uf.find(source);
    std::vector<int> verts;
    for (int v : g.vertices())
        if (uf.find(v) == root && v != sink) verts.push_back(v);
    std::map<int, std::size_t> idx;
    for (std::size_t i = 0; i < verts.size(); ++i) idx[verts[i]] = i;

    std::size_t n = verts.size();
    RationalMatrix L(n, n);
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        if (uf.find(e.u) != root) continue;
        const Rational& ce = c.at(e.id);
        auto iu = idx.find(e.u);
        auto iv = idx.find(e.v);
        if (iu != idx.end()) L(iu->second, iu->second) += ce;
        if (iv != idx.end()) L(iv->second, iv->second) += ce;
        if (iu != idx.end() && iv != idx.end()) {
            L(iu->second, iv->second) -= ce;
            L(iv->second, iu->second) -= ce;
        }
    }
    std::vector<Rational> rhs(n, Rational(0));
    rhs[idx.at(source)] = Rational(1);

    std::vector<Rational> phi = solve_exact(L, rhs);
    std::map<int, Rational> out;
    out[sink] = Rational(0);
    for (std::size_t i = 0; i < n; ++i) out[verts[i]] = phi[i];
    return out;
}

} // namespace detail

/// Unit current flow from u to v; exact, satisfies all three network laws
/// with zero residual by construction of the potential solve.
inline CurrentFlow unit_current_flow(const Multigraph& g, const Conductances& c, int u, int v) {
    CurrentFlow flow;
    flow.source = u;
    flow.sink = v;
    flow.potential = detail::grounded_potentials(g, c, u, v);
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        auto pu = flow.potential.find(e.u);
        auto pv = flow.potential.find(e.v);
        if (pu == flow.potential.end() || pv == flow.potential.end()) continue;
        int a = std::min(e.u, e.v), b = std::max(e.u, e.v);
        Rational i_ab = c.at(e.id) * (flow.potential[a] - flow.potential[b]);
        flow.pair_flow[{a, b}] += i_ab;
    }
    return flow;
}

/// R_eff(u,v) = potential at u under the unit flow with v grounded.
inline Rational effective_resistance(const Multigraph& g, const Conductances& c, int u, int v) {
    auto phi = detail::grounded_potentials(g, c, u, v);
    return phi.at(u);
}

/// Weighted count of spanning trees T with S1 contained (its conductances
/// divided out, i.e. counted on g/S1) and S2 avoided. Matrix-tree on the
/// contracted/deleted graph with parallel conductances summed.
inline Rational tree_count(const Multigraph& g, const Conductances& c,
                           const std::vector<int>& require = {},
                           const std::vector<int>& forbid = {}) {
    std::set<int> s1(require.begin(), require.end());
    for (int id : forbid)
        if (s1.count(id)) throw InvalidEventError("required and forbidden edge sets overlap");
    if (!is_acyclic_subset(g, require))
        throw InvalidEventError("required set contains a cycle");

    Multigraph work = g.without_edges(forbid);
    for (int id : require) {
        auto [contracted, map] = work.contract(id, /*drop_loops=*/true);
        work = std::move(contracted);
    }

    std::size_t n = work.n_vertices();
    if (n <= 1) return Rational(1);

    std::map<int, std::size_t> idx;
    for (int v : work.vertices()) idx[v] = idx.size();
    RationalMatrix L(n, n);
    for (const auto& e : work.edges()) {
        if (e.is_loop()) continue;
        const Rational& ce = c.at(e.id);
        std::size_t iu = idx[e.u], iv = idx[e.v];
        L(iu, iu) += ce;
        L(iv, iv) += ce;
        L(iu, iv) -= ce;
        L(iv, iu) -= ce;
    }

    RationalMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 1; j < n; ++j) minor(i - 1, j - 1) = L(i, j);
    return det_fraction_free(minor);
}

/// P_UST[e in T] for the conductance-weighted spanning-tree measure.
inline Rational ust_edge_probability(const Multigraph& g, const Conductances& c, int edge_id) {
    const Edge& e = g.edge(edge_id);
    if (e.is_loop()) return Rational(0);
    return c.at(edge_id) * tree_count(g, c, {edge_id}) / tree_count(g, c);
}

struct RayleighReport {
    std::vector<std::pair<Rational, Rational>> sweep; // (conductance bump, R_eff)
    Rational base_current;                            // i(e0) before the sweep
    bool strictly_decreasing = false;
    bool constant = false;
};

/// Sweeps c(e0) through increasing bumps; R_eff must strictly decrease when
/// current flows through e0 and stay exactly constant otherwise.
inline RayleighReport rayleigh_check(const Multigraph& g, const Conductances& c, int u, int v,
                                     int e0, const std::vector<Rational>& bumps) {
    if (bumps.empty()) throw InvalidOperationError("empty bump list");
    for (std::size_t i = 0; i < bumps.size(); ++i) {
        if (bumps[i].sign() <= 0) throw InvalidOperationError("bumps must be positive");
        if (i > 0 && !(bumps[i - 1] < bumps[i]))
            throw InvalidOperationError("bumps must be increasing");
    }
    RayleighReport rep;
    CurrentFlow base = unit_current_flow(g, c, u, v);
    rep.base_current = base.edge_current(g.edge(e0), c);

    for (const auto& b : bumps) {
        Conductances cc = c;
        cc.set(e0, b);
        rep.sweep.push_back({b, effective_resistance(g, cc, u, v)});
    }
    rep.strictly_decreasing = true;
    rep.constant = true;
    for (std::size_t i = 1; i < rep.sweep.size(); ++i) {
        if (!(rep.sweep[i].second < rep.sweep[i - 1].second)) rep.strictly_decreasing = false;
        if (rep.sweep[i].second != rep.sweep[i - 1].second) rep.constant = false;
    }
    bool expect_decrease = !rep.base_current.is_zero();
    if (expect_decrease && !rep.strictly_decreasing)
        throw Error("effective resistance failed to strictly decrease under a live edge");
    if (!expect_decrease && !rep.constant)
        throw Error("effective resistance moved under a dead edge");
    return rep;
}

namespace detail {

/// Exhaustive search for a simple cycle containing both edges; desk scale.
inline bool simple_cycle_through_both(const Multigraph& g, int e1_id, int e2_id) {
    const Edge& e1 = g.edge(e1_id);
    if (e1.is_loop() || g.edge(e2_id).is_loop()) return false;
    if (g.n_vertices() > 12) throw SizeLimitError("cycle search capped at 12 vertices");

    // Paths from e1.v back to e1.u avoiding e1; the cycle is path + e1.
    std::set<int> visited{e1.v};
    bool found = false;
    std::function<void(int, bool)> dfs = [&](int at, bool used_e2) {
        if (found) return;
        for (const auto* e : g.incident(at)) {
            if (e->id == e1_id || e->is_loop()) continue;
            int nxt = e->other(at);
            bool u2 = used_e2 || e->id == e2_id;
            if (nxt == e1.u) {
                if (u2) { found = true; return; }
                continue;
            }
            if (visited.count(nxt)) continue;
            visited.insert(nxt);
            dfs(nxt, u2);
            visited.erase(nxt);
        }
    };
    dfs(e1.v, false);
    return found;
}

} // namespace detail

struct SharedCycleResult {
    bool has_shared_cycle = false;
    Rational current_through_e2;
};

/// Whether a simple cycle crosses both (adjacent, distinct) edges, and the
/// exact current through e2 under the unit flow across e1's endpoints.
/// A shared cycle forces that current to be nonzero; checked here.
inline SharedCycleResult shared_cycle_current(const Multigraph& g, int e1_id, int e2_id) {
    if (e1_id == e2_id) throw InvalidOperationError("edges must be distinct");
    const Edge& e1 = g.edge(e1_id);
    const Edge& e2 = g.edge(e2_id);
    bool adjacent = e1.u == e2.u || e1.u == e2.v || e1.v == e2.u || e1.v == e2.v;
    if (!adjacent) throw InvalidOperationError("edges must be adjacent");

    SharedCycleResult res;
    res.has_shared_cycle = detail::simple_cycle_through_both(g, e1_id, e2_id);
    Conductances c = Conductances::from_weights(g);
    CurrentFlow flow = unit_current_flow(g, c, e1.u, e1.v);
    res.current_through_e2 = flow.edge_current(e2, c);
    if (res.has_shared_cycle && res.current_through_e2.is_zero())
        throw Error("shared cycle but vanishing current: network law violation");
    return res;
}

// ---------------------------------------------------------------------------
// Exact residual checks used by tests and the acceptance suite.
// ---------------------------------------------------------------------------

/// Net out-flow at every vertex: +1 at source, -1 at sink, 0 elsewhere.
inline std::map<int, Rational> current_law_residuals(const Multigraph& g, const Conductances& c,
                                                     const CurrentFlow& flow) {
    std::map<int, Rational> net;
    for (const auto& [v, p] : flow.potential) net[v] = Rational(0);
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        if (!flow.potential.count(e.u) || !flow.potential.count(e.v)) continue;
        Rational i = flow.edge_current(e, c);
        net[e.u] += i;
        net[e.v] -= i;
    }
    net[flow.source] -= Rational(1);
    net[flow.sink] += Rational(1);
    return net;
}

/// Sum of potential differences around each fundamental cycle of a spanning
/// forest; all must vanish.
inline std::vector<Rational> cycle_law_residuals(const Multigraph& g, const CurrentFlow& flow) {
    // Spanning forest by union-find; each non-tree edge closes one cycle.
    UnionFind uf(g.vertices());
    std::map<int, std::vector<std::pair<int, int>>> tree_adj; // v -> (nbr, edge id)
    std::vector<const Edge*> non_tree;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        if (uf.unite(e.u, e.v)) {
            tree_adj[e.u].push_back({e.v, e.id});
            tree_adj[e.v].push_back({e.u, e.id});
        } else {
            non_tree.push_back(&e);
        }
    }

    auto tree_path_drop = [&](int from, int to) -> std::optional<Rational> {
        // Potential drop phi(from) - phi(to) along tree path; BFS.
        std::map<int, int> prev;
        std::vector<int> queue{from};
        prev[from] = from;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int at = queue[qi];
            if (at == to) break;
            for (auto [nb, eid] : tree_adj[at]) {
                if (prev.count(nb)) continue;
                prev[nb] = at;
                queue.push_back(nb);
            }
        }
        if (!prev.count(to)) return std::nullopt;
        if (!flow.potential.count(from) || !flow.potential.count(to)) return std::nullopt;
        return flow.potential.at(from) - flow.potential.at(to);
    };

    std::vector<Rational> residuals;
    for (const auto* e : non_tree) {
        if (!flow.potential.count(e->u) || !flow.potential.count(e->v)) continue;
        // Around the cycle e + tree path: drop across e plus drop back.
        Rational around = (flow.potential.at(e->u) - flow.potential.at(e->v));
        auto back = tree_path_drop(e->v, e->u);
        if (!back) continue;
        residuals.push_back(around + *back);
    }
    return residuals;
}

/// Edgewise Ohm residuals i(e) - c(e)*(phi(u)-phi(v)); zero by construction,
/// kept as an explicit audit of the stored pair flows.
inline std::vector<Rational> ohm_residuals(const Multigraph& g, const Conductances& c,
                                           const CurrentFlow& flow) {
    std::map<std::pair<int, int>, Rational> expect;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) continue;
        if (!flow.potential.count(e.u) || !flow.potential.count(e.v)) continue;
        int a = std::min(e.u, e.v), b = std::max(e.u, e.v);
        expect[{a, b}] += c.at(e.id) * (flow.potential.at(a) - flow.potential.at(b));
    }
    std::vector<Rational> out;
    for (const auto& [key, val] : expect) {
        auto it = flow.pair_flow.find(key);
        Rational have = it == flow.pair_flow.end() ? Rational(0) : it->second;
        out.push_back(have - val);
    }
    return out;
}

} // namespace arboreal
