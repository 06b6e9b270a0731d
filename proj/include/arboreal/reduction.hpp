#pragma once

#include <array>
#include <optional>
#include <set>
#include <vector>

#include "arboreal/correlation.hpp"
#include "arboreal/forest_measure.hpp"
#include "arboreal/graph.hpp"

namespace arboreal {

/// beta~ for a series class: prod(beta) / (prod(1+beta) - prod(beta)).
inline Rational beta_series(const std::vector<Rational>& betas) {
    if (betas.empty()) throw InvalidOperationError("beta_series needs a nonempty list");
    Rational prod(1), prod1(1);
    for (const auto& b : betas) {
        if (b.sign() <= 0) throw InvalidOperationError("beta_series entries must be positive");
        prod *= b;
        prod1 *= Rational(1) + b;
    }
    return prod / (prod1 - prod);
}

struct ReductionStep {
    enum class Kind { delete_bridge, suppress_vertex, merge_parallel };
    Kind kind;
    // delete_bridge
    int edge = -1;
    // suppress_vertex
    int vertex = -1;
    std::array<int, 2> in_edges{-1, -1};
    int out_edge = -1;
    Rational beta_tilde;
    // merge_parallel
    std::vector<int> edge_class;
    Rational beta_sum;

    std::string describe() const {
        switch (kind) {
            case Kind::delete_bridge:
                return "delete_bridge edge=" + std::to_string(edge);
            case Kind::suppress_vertex:
                return "suppress_vertex vertex=" + std::to_string(vertex) + " in=" +
                       std::to_string(in_edges[0]) + "," + std::to_string(in_edges[1]) +
                       " out=" + std::to_string(out_edge) + " beta_tilde=" + beta_tilde.to_string();
            case Kind::merge_parallel: {
                std::string ids;
                for (std::size_t i = 0; i < edge_class.size(); ++i)
                    ids += (i ? "," : "") + std::to_string(edge_class[i]);
                return "merge_parallel class=" + ids + " beta_sum=" + beta_sum.to_string();
            }
        }
        return "?";
    }
};

struct ReductionTrace {
    std::vector<ReductionStep> steps;
    std::vector<int> removed_bridges;
    EdgeMap f_map;    // first pass: bridge-free edges -> suppressed-stage edges
    EdgeMap g_map;    // first pass: suppressed-stage edges -> merged edges
    EdgeMap composed; // original edges -> final reduced edges, across all passes
    Rational pivotal_factor{1}; // prod over deleted bridges of (1 + beta)
    Rational constant_C{1};     // prod over merged series classes of prod(1+beta) - prod(beta)

    /// The reduced image of an original edge, none when the edge fell to a
    /// bridge deletion or a dropped loop.
    std::optional<int> image(int original_edge) const { return composed.image(original_edge); }

    std::string describe() const {
        std::string out;
        for (const auto& s : steps) { out += s.describe(); out += "\n"; }
        return out;
    }
};

/// Removes every pivotal edge. Removing a bridge destroys no cycle, so the
/// bridge set is removable in one pass; re-checked afterwards.
inline std::pair<Multigraph, std::vector<int>> delete_pivotal(const Multigraph& g) {
    auto piv = bridges(g);
    std::vector<int> removed(piv.begin(), piv.end());
    Multigraph out = g.without_edges(removed);
    if (!bridges(out).empty())
        throw Error("bridge deletion exposed a new bridge; single-pass assumption broken");
    return {out, removed};
}

namespace detail {

/// Lowest-id vertex with exactly two incident edge slots, both non-loop,
/// leading to two distinct neighbors (suppression must not create a loop).
inline std::optional<int> suppressible_vertex(const Multigraph& g) {
    for (int v : g.vertices()) {
        auto inc = g.incident(v);
        if (inc.size() != 2) continue;
        if (g.degree(v) != 2) continue; // a loop would make this 4
        if (inc[0]->is_loop() || inc[1]->is_loop()) continue;
        int n1 = inc[0]->other(v), n2 = inc[1]->other(v);
        if (n1 == n2) continue;
        return v;
    }
    return std::nullopt;
}

} // namespace detail

/// Degree-2 suppression (the map f): repeatedly replaces a degree-2 vertex's
/// two edges by one series edge with the beta~ weight, until none remains.
inline std::pair<Multigraph, EdgeMap> suppress_degree_two(const Multigraph& g,
                                                          ReductionTrace* trace = nullptr) {
    Multigraph cur = g;
    std::vector<int> ids;
    for (const auto& e : g.edges()) ids.push_back(e.id);
    EdgeMap fmap = EdgeMap::identity_on(ids);

    while (auto v = detail::suppressible_vertex(cur)) {
        auto inc = cur.incident(*v);
        const Edge a = *inc[0];
        const Edge b = *inc[1];
        int n1 = a.other(*v), n2 = b.other(*v);
        Rational bt = beta_series({a.weight, b.weight});

        Multigraph next = cur.without_vertex(*v);
        int out_edge = next.add_edge(n1, n2, bt);

        EdgeMap step;
        for (const auto& e : cur.edges()) {
            if (e.id == a.id || e.id == b.id) step.mapped[e.id] = out_edge;
            else step.mapped[e.id] = e.id;
        }
        fmap = fmap.then(step);
        cur = std::move(next);

        if (trace) {
            ReductionStep s;
            s.kind = ReductionStep::Kind::suppress_vertex;
            s.vertex = *v;
            s.in_edges = {a.id, b.id};
            s.out_edge = out_edge;
            s.beta_tilde = bt;
            trace->steps.push_back(std::move(s));
            trace->constant_C *= (Rational(1) + a.weight) * (Rational(1) + b.weight) -
                                 a.weight * b.weight;
        }
    }
    return {cur, fmap};
}

/// Parallel merge (the map g): one edge per adjacent vertex pair with the
/// summed weight; self-loops dropped and listed.
inline std::pair<Multigraph, EdgeMap> merge_parallel(const Multigraph& g,
                                                     ReductionTrace* trace = nullptr) {
    std::map<std::pair<int, int>, std::vector<const Edge*>> classes;
    std::vector<const Edge*> loops;
    for (const auto& e : g.edges()) {
        if (e.is_loop()) { loops.push_back(&e); continue; }
        classes[{std::min(e.u, e.v), std::max(e.u, e.v)}].push_back(&e);
    }

    EdgeMap gmap;
    std::vector<int> delete_ids;
    for (const auto* l : loops) {
        gmap.dropped.push_back(l->id);
        delete_ids.push_back(l->id);
    }
    for (auto& [key, members] : classes) {
        if (members.size() == 1) {
            gmap.mapped[members[0]->id] = members[0]->id;
        } else {
            for (const auto* e : members) delete_ids.push_back(e->id);
        }
    }

    // Keep singletons verbatim (ids stable), then allocate one fresh edge per
    // merged class.
    Multigraph result = g.without_edges(delete_ids);
    for (auto& [key, members] : classes) {
        if (members.size() <= 1) continue;
        Rational sum(0);
        std::vector<int> ids;
        for (const auto* e : members) { sum += e->weight; ids.push_back(e->id); }
        int nid = result.add_edge(key.first, key.second, sum);
        for (int id : ids) gmap.mapped[id] = nid;
        if (trace) {
            ReductionStep s;
            s.kind = ReductionStep::Kind::merge_parallel;
            s.edge_class = ids;
            s.beta_sum = sum;
            trace->steps.push_back(std::move(s));
        }
    }
    return {result, gmap};
}

struct ReductionResult {
    Multigraph reduced;                 // g(f(G-hat)), one graph
    std::vector<Multigraph> components; // reduced split into components
    ReductionTrace trace;
};

/// The Theorem-2 pipeline: delete pivotal edges, suppress degree-2 vertices
/// (f), merge parallels (g), split into components. One pass in that order
/// by default; merging parallels can re-create degree-2 vertices, and the
/// optional fixpoint mode re-runs the pass until the graph stabilizes, each
/// extra pass justified by the same per-move identities.
inline ReductionResult reduce_pipeline(const Multigraph& g, bool fixpoint = false) {
    ReductionResult res;
    {
        std::vector<int> ids;
        for (const auto& e : g.edges()) ids.push_back(e.id);
        res.trace.composed = EdgeMap::identity_on(ids);
    }

    Multigraph cur = g;
    bool first_pass = true;
    for (;;) {
        auto [hat, removed] = delete_pivotal(cur);
        for (int id : removed) {
            ReductionStep s;
            s.kind = ReductionStep::Kind::delete_bridge;
            s.edge = id;
            res.trace.steps.push_back(std::move(s));
            res.trace.pivotal_factor *= Rational(1) + cur.edge(id).weight;
            res.trace.removed_bridges.push_back(id);
        }

        auto [suppressed, fmap] = suppress_degree_two(hat, &res.trace);
        auto [merged, gmap] = merge_parallel(suppressed, &res.trace);
        if (first_pass) {
            res.trace.f_map = fmap;
            res.trace.g_map = gmap;
            first_pass = false;
        }

        EdgeMap pass;
        pass.dropped = removed;
        for (const auto& e : hat.edges()) {
            auto mid = fmap.image(e.id);
            auto img = mid ? gmap.image(*mid) : std::nullopt;
            if (img) pass.mapped[e.id] = *img;
            else pass.dropped.push_back(e.id);
        }
        res.trace.composed = res.trace.composed.then(pass);

        bool changed = merged.n_edges() != cur.n_edges() || merged.n_vertices() != cur.n_vertices();
        cur = std::move(merged);
        if (!fixpoint || !changed) break;
    }

    res.reduced = cur;
    for (const auto& comp : components(res.reduced)) {
        std::set<int> verts(comp.begin(), comp.end());
        res.components.push_back(res.reduced.induced(verts));
    }
    return res;
}

/// Exact pushforward audit: the original measure of the preimage of an event
/// on the reduced edges equals pivotal_factor * C * (reduced measure of the
/// event), both sides as unnormalized forest-weight sums.
inline std::pair<Rational, Rational> pushforward_check(const Multigraph& g, const EventSpec& ev) {
    if (g.n_edges() > kEnumerationEdgeLimit)
        throw SizeLimitError("enumeration limited to 22 edges");
    ReductionResult red = reduce_pipeline(g);
    ev.validate(red.reduced);

    // rhs: unnormalized reduced measure times the constants.
    Rational rhs = enumerate_mu(red.reduced, ev, WeightMode::numeric).as_rational();
    for (int id : ev.require) rhs *= red.reduced.edge(id).weight;
    rhs *= red.trace.pivotal_factor * red.trace.constant_C;

    // Preimage classes, as bitmasks over g's edge positions: reduced edge r is
    // present in the image of forest F iff some suppressed-stage preimage m of
    // r has its whole f-class inside F.
    const auto& edges = g.edges();
    std::map<int, std::size_t> pos;
    for (std::size_t i = 0; i < edges.size(); ++i) pos[edges[i].id] = i;

    std::map<int, std::vector<std::uint64_t>> class_masks; // reduced edge -> alternatives
    {
        std::map<int, std::uint64_t> f_class; // suppressed-stage edge -> mask of source edges
        for (const auto& [src, mid] : red.trace.f_map.mapped)
            f_class[mid] |= 1ull << pos.at(src);
        for (const auto& [mid, mask] : f_class) {
            auto r = red.trace.g_map.image(mid);
            if (r) class_masks[*r].push_back(mask);
        }
    }

    std::map<int, int> vidx;
    for (int v : g.vertices()) vidx[v] = static_cast<int>(vidx.size());

    Rational lhs(0);
    std::size_t m = edges.size();
    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
        FlatUnionFind uf(g.n_vertices());
        bool forest = true;
        Rational w(1);
        for (std::size_t i = 0; i < m && forest; ++i) {
            if (!(mask >> i & 1ull)) continue;
            const Edge& e = edges[i];
            if (e.is_loop() || !uf.unite(vidx[e.u], vidx[e.v])) { forest = false; break; }
            w *= e.weight;
        }
        if (!forest) continue;

        auto present = [&](int reduced_edge) {
            for (std::uint64_t cm : class_masks[reduced_edge])
                if ((mask & cm) == cm) return true;
            return false;
        };
        bool ok = true;
        for (int id : ev.require)
            if (!present(id)) { ok = false; break; }
        if (ok)
            for (int id : ev.forbid)
                if (present(id)) { ok = false; break; }
        if (ok) lhs += w;
    }
    return {lhs, rhs};
}

enum class ReductionReason { pivotal, different_components, same_reduced_edge, deferred };

inline const char* to_string(ReductionReason r) {
    switch (r) {
        case ReductionReason::pivotal: return "pivotal";
        case ReductionReason::different_components: return "different_components";
        case ReductionReason::same_reduced_edge: return "same_reduced_edge";
        case ReductionReason::deferred: return "deferred";
    }
    return "?";
}

struct ReductionVerdict {
    NCVerdict verdict = NCVerdict::holds;
    ReductionReason reason = ReductionReason::deferred;
    std::optional<Rational> reduced_margin; // deferred only
    std::optional<Rational> direct_margin;  // deferred only
};

/// NC for a pair via the reduction corollary when it applies; otherwise the
/// verdict defers to the reduced component with transformed weights, and the
/// deferred margin's sign is checked against the direct margin on g.
inline ReductionVerdict nc_via_reduction(const Multigraph& g, int e1, int e2,
                                         const MuOptions& opts = {}) {
    if (e1 == e2) throw InvalidOperationError("edges must be distinct");
    ReductionVerdict out;

    auto piv = bridges(g);
    if (piv.count(e1) || piv.count(e2)) {
        out.verdict = NCVerdict::holds;
        out.reason = ReductionReason::pivotal;
        return out;
    }

    ReductionResult red = reduce_pipeline(g);
    auto img1 = red.trace.image(e1);
    auto img2 = red.trace.image(e2);

    if (img1 && img2 && *img1 == *img2) {
        out.verdict = NCVerdict::holds;
        out.reason = ReductionReason::same_reduced_edge;
        return out;
    }

    if (img1 && img2) {
        const Edge& r1 = red.reduced.edge(*img1);
        const Edge& r2 = red.reduced.edge(*img2);
        if (!same_component(red.reduced, r1.u, r2.u)) {
            out.verdict = NCVerdict::holds;
            out.reason = ReductionReason::different_components;
            return out;
        }
        // Deferred: margin on the reduced component containing both images.
        for (const auto& comp : red.components) {
            if (!comp.has_edge(*img1)) continue;
            NCMargin reduced = nc_pair(comp, *img1, *img2, WeightMode::numeric, opts);
            out.reduced_margin = reduced.margin.as_rational();
            break;
        }
    }

    NCMargin direct = nc_pair(g, e1, e2, WeightMode::numeric, opts);
    out.direct_margin = direct.margin.as_rational();
    out.reason = ReductionReason::deferred;
    if (out.reduced_margin) {
        if (out.reduced_margin->sign() != out.direct_margin->sign())
            throw Error("reduced and direct margins disagree in sign");
        out.verdict = out.reduced_margin->sign() >= 0 ? NCVerdict::holds : NCVerdict::violated;
    } else {
        // An image was dropped (self-loop): mu values vanish, margin is 0.
        out.verdict = out.direct_margin->sign() >= 0 ? NCVerdict::holds : NCVerdict::violated;
    }
    return out;
}

} // namespace arboreal
