#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "arboreal/graph.hpp"
#include "arboreal/polynomial.hpp"

namespace arboreal {

/// Forest event: S1 required, S2 forbidden, disjoint.
struct EventSpec {
    std::vector<int> require;
    std::vector<int> forbid;

    static EventSpec none() { return {}; }

    void validate(const Multigraph& g) const {
        std::set<int> s1(require.begin(), require.end());
        std::set<int> s2(forbid.begin(), forbid.end());
        if (s1.size() != require.size() || s2.size() != forbid.size())
            throw InvalidEventError("edge sets contain duplicates");
        for (int id : forbid)
            if (s1.count(id)) throw InvalidEventError("required and forbidden edge sets overlap");
        for (int id : require)
            if (!g.has_edge(id)) throw InvalidEventError("required edge not in graph");
        for (int id : forbid)
            if (!g.has_edge(id)) throw InvalidEventError("forbidden edge not in graph");
    }
};

enum class WeightMode { numeric, symbolic };

/// Exact measure value: a rational under per-edge numeric weights, or a
/// polynomial in the formal uniform beta.
class MeasureValue {
public:
    static MeasureValue of(Rational r) {
        MeasureValue m;
        m.mode_ = WeightMode::numeric;
        m.rat_ = std::move(r);
        return m;
    }
    static MeasureValue of(BetaPolynomial p) {
        MeasureValue m;
        m.mode_ = WeightMode::symbolic;
        m.poly_ = std::move(p);
        return m;
    }

    WeightMode mode() const { return mode_; }

    const Rational& as_rational() const {
        if (mode_ != WeightMode::numeric) throw ModeError("value is symbolic, not rational");
        return rat_;
    }
    const BetaPolynomial& as_polynomial() const {
        if (mode_ != WeightMode::symbolic) throw ModeError("value is rational, not symbolic");
        return poly_;
    }

    bool is_zero() const {
        return mode_ == WeightMode::numeric ? rat_.is_zero() : poly_.is_zero();
    }

    std::string to_string() const {
        return mode_ == WeightMode::numeric ? rat_.to_string() : poly_.to_string();
    }

private:
    WeightMode mode_ = WeightMode::numeric;
    Rational rat_;
    BetaPolynomial poly_;
};

/// Tuning knobs for the deletion-contraction engine.
struct MuOptions {
    std::size_t memo_limit = 1u << 20; // entries; cache clears when exceeded
};

constexpr std::size_t kEnumerationEdgeLimit = 22;

namespace detail {

template <class W>
struct WeightTraits;

template <>
struct WeightTraits<Rational> {
    static Rational one() { return Rational(1); }
    static bool allows_series() { return true; }
    static std::string key(const Rational& w) { return w.to_string(); }
};

template <>
struct WeightTraits<BetaPolynomial> {
    static BetaPolynomial one() { return BetaPolynomial(1); }
    // Series suppression needs division, which leaves the polynomial ring.
    static bool allows_series() { return false; }
    static std::string key(const BetaPolynomial& w) { return w.to_string(); }
};

/// Internal working graph for the partition-function recursion.
template <class W>
struct WorkGraph {
    struct E {
        int u, v;
        W w;
    };
    std::vector<int> verts; // sorted
    std::vector<E> edges;

    std::string key() const {
        std::vector<std::string> parts;
        parts.reserve(edges.size());
        for (const auto& e : edges)
            parts.push_back(std::to_string(std::min(e.u, e.v)) + "," +
                            std::to_string(std::max(e.u, e.v)) + "," + WeightTraits<W>::key(e.w));
        std::sort(parts.begin(), parts.end());
        std::string k;
        for (const auto& p : parts) { k += p; k += ";"; }
        return k;
    }
};

/// Weighted forest generating function Z = sum over forests of the edge
/// weight product. Shortcuts: loops dropped, parallel classes merged by
/// weight sum, bridges factored as (1 + w), and (numeric mode only) series
/// pairs at degree-2 vertices merged with the w~ = ab/((1+a)(1+b)-ab)
/// transform carrying the (1+a)(1+b)-ab factor out front.
template <class W>
class ForestZ {
public:
    explicit ForestZ(const MuOptions& opts) : opts_(opts) {}

    W run(WorkGraph<W> g) {
        W factor = WeightTraits<W>::one();
        normalize(g, factor);
        return factor * compute(std::move(g));
    }

private:
    using E = typename WorkGraph<W>::E;

    W compute(WorkGraph<W> g) {
        if (g.edges.empty()) return WeightTraits<W>::one();
        std::string key = g.key();
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        // Branch on the lexicographically smallest remaining edge; after
        // normalization every edge sits on a cycle, so both branches shrink.
        std::size_t pick = 0;
        for (std::size_t i = 1; i < g.edges.size(); ++i) {
            auto lo = [&](const E& e) { return std::make_pair(std::min(e.u, e.v), std::max(e.u, e.v)); };
            if (lo(g.edges[i]) < lo(g.edges[pick])) pick = i;
        }
        E chosen = g.edges[pick];

        WorkGraph<W> del = g;
        del.edges.erase(del.edges.begin() + static_cast<long>(pick));
        W f_del = WeightTraits<W>::one();
        normalize(del, f_del);
        W z_del = f_del * compute(std::move(del));

        WorkGraph<W> con = contract_edge(g, pick);
        W f_con = WeightTraits<W>::one();
        normalize(con, f_con);
        W z_con = chosen.w * f_con * compute(std::move(con));

        W z = z_del + z_con;
        if (memo_.size() >= opts_.memo_limit) memo_.clear();
        memo_.emplace(std::move(key), z);
        return z;
    }

    static WorkGraph<W> contract_edge(const WorkGraph<W>& g, std::size_t idx) {
        const E& e = g.edges[idx];
        int keep = std::min(e.u, e.v), gone = std::max(e.u, e.v);
        WorkGraph<W> out;
        for (int v : g.verts)
            if (v != gone) out.verts.push_back(v);
        for (std::size_t i = 0; i < g.edges.size(); ++i) {
            if (i == idx) continue;
            E f = g.edges[i];
            if (f.u == gone) f.u = keep;
            if (f.v == gone) f.v = keep;
            if (f.u == f.v) continue; // new loop, no forest content
            out.edges.push_back(std::move(f));
        }
        return out;
    }

    /// Applies all multiplicative shortcuts to a fixpoint, accumulating the
    /// factored-out weight into `factor`.
    void normalize(WorkGraph<W>& g, W& factor) {
        bool changed = true;
        while (changed) {
            changed = false;

            // Loops carry no forest content.
            std::size_t before = g.edges.size();
            g.edges.erase(std::remove_if(g.edges.begin(), g.edges.end(),
                                         [](const E& e) { return e.u == e.v; }),
                          g.edges.end());
            if (g.edges.size() != before) changed = true;

            // Merge parallel classes: at most one member per forest, so the
            // class behaves as a single edge with the summed weight.
            {
                std::map<std::pair<int, int>, std::size_t> first;
                std::vector<E> merged;
                for (auto& e : g.edges) {
                    auto kp = std::make_pair(std::min(e.u, e.v), std::max(e.u, e.v));
                    auto it = first.find(kp);
                    if (it == first.end()) {
                        first[kp] = merged.size();
                        merged.push_back(e);
                    } else {
                        merged[it->second].w = merged[it->second].w + e.w;
                        changed = true;
                    }
                }
                g.edges = std::move(merged);
            }

            // Bridges factor out: Z(G) = (1 + w) * Z(G/e).
            {
                Multigraph shape = shape_of(g);
                auto piv = bridges(shape);
                if (!piv.empty()) {
                    int id = *piv.begin();
                    const E& e = g.edges[static_cast<std::size_t>(id)];
                    factor = factor * (WeightTraits<W>::one() + e.w);
                    g = contract_edge(g, static_cast<std::size_t>(id));
                    changed = true;
                    continue;
                }
            }

            // Series pairs at a degree-2 vertex (numeric weights only).
            if (WeightTraits<W>::allows_series()) {
                if (series_step(g, factor)) changed = true;
            }
        }

        // Isolated vertices contribute a factor of 1.
        std::set<int> touched;
        for (const auto& e : g.edges) { touched.insert(e.u); touched.insert(e.v); }
        std::vector<int> verts;
        for (int v : g.verts)
            if (touched.count(v)) verts.push_back(v);
        g.verts = std::move(verts);
    }

    bool series_step(WorkGraph<W>& g, W& factor);

    static Multigraph shape_of(const WorkGraph<W>& g) {
        Multigraph m;
        for (int v : g.verts) m.add_vertex(v);
        for (const auto& e : g.edges) m.add_edge(e.u, e.v, Rational(1));
        return m;
    }

    MuOptions opts_;
    std::unordered_map<std::string, W> memo_;
};

template <>
inline bool ForestZ<Rational>::series_step(WorkGraph<Rational>& g, Rational& factor) {
    std::map<int, std::vector<std::size_t>> incident;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        incident[g.edges[i].u].push_back(i);
        incident[g.edges[i].v].push_back(i);
    }
    for (int v : g.verts) {
        auto it = incident.find(v);
        if (it == incident.end() || it->second.size() != 2) continue;
        std::size_t ia = it->second[0], ib = it->second[1];
        if (ia == ib) continue; // a loop counted twice
        const auto& a = g.edges[ia];
        const auto& b = g.edges[ib];
        int n1 = a.u == v ? a.v : a.u;
        int n2 = b.u == v ? b.v : b.u;
        if (n1 == n2) continue; // suppression would create a loop
        Rational denom = (Rational(1) + a.w) * (Rational(1) + b.w) - a.w * b.w;
        Rational merged = a.w * b.w / denom;
        factor *= denom;
        WorkGraph<Rational>::E ne{std::min(n1, n2), std::max(n1, n2), merged};
        std::vector<WorkGraph<Rational>::E> edges;
        for (std::size_t i = 0; i < g.edges.size(); ++i)
            if (i != ia && i != ib) edges.push_back(g.edges[i]);
        edges.push_back(ne);
        g.edges = std::move(edges);
        g.verts.erase(std::remove(g.verts.begin(), g.verts.end(), v), g.verts.end());
        return true;
    }
    return false;
}

template <>
inline bool ForestZ<BetaPolynomial>::series_step(WorkGraph<BetaPolynomial>&, BetaPolynomial&) {
    return false;
}

template <class W, class WeightOf>
WorkGraph<W> build_work_graph(const Multigraph& g, WeightOf&& weight_of) {
    WorkGraph<W> wg;
    wg.verts = g.vertices();
    for (const auto& e : g.edges()) wg.edges.push_back({e.u, e.v, weight_of(e)});
    return wg;
}

/// Applies the event up front: requires are contracted (weights divided out
/// by the mu convention), forbids deleted. Returns nullopt when S1 is cyclic,
/// which makes the measure exactly zero.
inline std::optional<Multigraph> apply_event(const Multigraph& g, const EventSpec& ev) {
    ev.validate(g);
    if (!is_acyclic_subset(g, ev.require)) return std::nullopt;
    Multigraph work = g.without_edges(ev.forbid);
    for (int id : ev.require) {
        auto [contracted, map] = work.contract(id, /*drop_loops=*/true);
        work = std::move(contracted);
    }
    return work;
}

} // namespace detail

/// mu[S1 S2bar] by direct enumeration over edge subsets: the independent
/// oracle. Hard limit of 22 edges.
inline MeasureValue enumerate_mu(const Multigraph& g, const EventSpec& ev, WeightMode mode) {
    ev.validate(g);
    if (g.n_edges() > kEnumerationEdgeLimit)
        throw SizeLimitError("enumeration limited to 22 edges");
    if (mode == WeightMode::symbolic && !g.uniform_weights())
        throw ModeError("symbolic mode requires uniform weights");

    std::set<int> s1(ev.require.begin(), ev.require.end());
    std::set<int> s2(ev.forbid.begin(), ev.forbid.end());
    std::vector<const Edge*> free_edges;
    for (const auto& e : g.edges())
        if (!s1.count(e.id) && !s2.count(e.id)) free_edges.push_back(&e);

    bool base_ok = is_acyclic_subset(g, ev.require);

    std::vector<Rational> coeff_by_extra(free_edges.size() + 1, Rational(0)); // symbolic
    Rational total(0);                                                        // numeric

    if (base_ok) {
        std::map<int, int> vidx;
        for (int v : g.vertices()) vidx[v] = static_cast<int>(vidx.size());
        FlatUnionFind base(g.n_vertices());
        for (int id : ev.require) {
            const Edge& e = g.edge(id);
            base.unite(vidx[e.u], vidx[e.v]);
        }
        std::size_t m = free_edges.size();
        for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
            FlatUnionFind uf = base;
            bool ok = true;
            Rational w(1);
            std::size_t extra = 0;
            for (std::size_t i = 0; i < m && ok; ++i) {
                if (!(mask >> i & 1ull)) continue;
                const Edge* e = free_edges[i];
                if (e->is_loop() || !uf.unite(vidx[e->u], vidx[e->v])) { ok = false; break; }
                ++extra;
                if (mode == WeightMode::numeric) w *= e->weight;
            }
            if (!ok) continue;
            if (mode == WeightMode::numeric) total += w;
            else coeff_by_extra[extra] += Rational(1);
        }
    }

    if (mode == WeightMode::numeric) return MeasureValue::of(total);
    return MeasureValue::of(BetaPolynomial(std::move(coeff_by_extra)));
}

/// mu[S1 S2bar] by weighted deletion-contraction. Equals enumerate_mu
/// wherever both are defined; this is the production path.
inline MeasureValue mu(const Multigraph& g, const EventSpec& ev, WeightMode mode,
                       const MuOptions& opts = {}) {
    if (mode == WeightMode::symbolic && !g.uniform_weights())
        throw ModeError("symbolic mode requires uniform weights");
    auto work = detail::apply_event(g, ev);
    if (!work) {
        return mode == WeightMode::numeric ? MeasureValue::of(Rational(0))
                                           : MeasureValue::of(BetaPolynomial{});
    }
    if (mode == WeightMode::numeric) {
        auto wg = detail::build_work_graph<Rational>(*work, [](const Edge& e) { return e.weight; });
        detail::ForestZ<Rational> engine(opts);
        return MeasureValue::of(engine.run(std::move(wg)));
    }
    auto wg = detail::build_work_graph<BetaPolynomial>(
        *work, [](const Edge&) { return BetaPolynomial::beta(); });
    detail::ForestZ<BetaPolynomial> engine(opts);
    return MeasureValue::of(engine.run(std::move(wg)));
}

/// Z_beta = mu[1].
inline MeasureValue partition_function(const Multigraph& g, WeightMode mode,
                                       const MuOptions& opts = {}) {
    return mu(g, EventSpec::none(), mode, opts);
}

/// P_beta[S1 in F, S2 disjoint from F] as an exact rational.
inline Rational prob(const Multigraph& g, const EventSpec& ev, const MuOptions& opts = {}) {
    Rational num = mu(g, ev, WeightMode::numeric, opts).as_rational();
    if (num.is_zero()) return Rational(0);
    for (int id : ev.require) num *= g.edge(id).weight;
    Rational z = partition_function(g, WeightMode::numeric, opts).as_rational();
    return num / z;
}

/// P_beta[ev | S in F], directly as a mu ratio. Throws when S is cyclic.
inline Rational conditional_prob(const Multigraph& g, const EventSpec& ev,
                                 const std::vector<int>& given, const MuOptions& opts = {}) {
    if (!is_acyclic_subset(g, given))
        throw UndefinedConditioningError("conditioning set contains a cycle");
    std::set<int> s2(ev.forbid.begin(), ev.forbid.end());
    for (int id : given)
        if (s2.count(id)) return Rational(0); // required and forbidden at once

    std::set<int> s1(ev.require.begin(), ev.require.end());
    EventSpec joint = ev;
    for (int id : given)
        if (!s1.count(id)) joint.require.push_back(id);

    Rational num = mu(g, joint, WeightMode::numeric, opts).as_rational();
    if (num.is_zero()) return Rational(0);
    for (int id : ev.require)
        if (std::find(given.begin(), given.end(), id) == given.end())
            num *= g.edge(id).weight;
    Rational den = mu(g, EventSpec{given, {}}, WeightMode::numeric, opts).as_rational();
    return num / den;
}

/// Bernoulli(p_beta)-conditioned-acyclic measure of the event versus the
/// forest measure, both exact; the model says they agree.
inline std::pair<Rational, Rational> percolation_check(const Multigraph& g, const Rational& beta,
                                                       const EventSpec& ev) {
    ev.validate(g);
    if (g.n_edges() > kEnumerationEdgeLimit)
        throw SizeLimitError("enumeration limited to 22 edges");
    if (beta.sign() <= 0) throw Error("beta must be positive");

    Rational p = beta / (Rational(1) + beta);
    Rational q = Rational(1) - p;

    std::set<int> s1(ev.require.begin(), ev.require.end());
    std::set<int> s2(ev.forbid.begin(), ev.forbid.end());
    const auto& edges = g.edges();
    std::size_t m = edges.size();

    std::map<int, int> vidx;
    for (int v : g.vertices()) vidx[v] = static_cast<int>(vidx.size());

    // Bernoulli weight depends on |C| only; precompute p^k q^(m-k).
    std::vector<Rational> wt(m + 1);
    for (std::size_t k = 0; k <= m; ++k)
        wt[k] = pow_q(p, static_cast<long>(k)) * pow_q(q, static_cast<long>(m - k));

    Rational numer(0), denom(0);
    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
        FlatUnionFind uf(g.n_vertices());
        bool acyclic = true;
        std::size_t size = 0;
        bool has_s1 = true, avoids_s2 = true;
        for (std::size_t i = 0; i < m; ++i) {
            bool in = (mask >> i) & 1ull;
            const Edge& e = edges[i];
            if (in) {
                if (e.is_loop() || !uf.unite(vidx[e.u], vidx[e.v])) { acyclic = false; break; }
                ++size;
                if (s2.count(e.id)) avoids_s2 = false;
            } else {
                if (s1.count(e.id)) has_s1 = false;
            }
        }
        if (!acyclic) continue;
        denom += wt[size];
        if (has_s1 && avoids_s2) numer += wt[size];
    }

    Rational lhs = numer / denom;
    Multigraph uniform = g;
    for (const auto& e : g.edges()) uniform.set_weight(e.id, beta);
    Rational rhs = prob(uniform, ev);
    return {lhs, rhs};
}

} // namespace arboreal
