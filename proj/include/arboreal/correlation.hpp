#pragma once

#include <optional>
#include <set>
#include <vector>

#include "arboreal/electrical.hpp"
#include "arboreal/forest_measure.hpp"
#include "arboreal/roots.hpp"

namespace arboreal {

enum class NCVerdict { holds, violated, identically_zero };

inline const char* to_string(NCVerdict v) {
    switch (v) {
        case NCVerdict::holds: return "holds";
        case NCVerdict::violated: return "violated";
        case NCVerdict::identically_zero: return "identically_zero";
    }
    return "?";
}

/// Exact negative-correlation margin with its witnesses. For pairs the margin
/// is mu[e1]mu[e2] - mu[e1e2]mu[1]; nonnegative iff NC holds for the pair.
struct NCMargin {
    MeasureValue margin;
    NCVerdict verdict = NCVerdict::holds;
    MeasureValue mu_e1, mu_e2, mu_both, mu_one;
};

namespace detail {

inline NCVerdict poly_verdict(const BetaPolynomial& margin) {
    if (margin.is_zero()) return NCVerdict::identically_zero;
    bool all_nonneg = true;
    for (const auto& c : margin.coefficients())
        if (c.sign() < 0) { all_nonneg = false; break; }
    if (all_nonneg) return NCVerdict::holds;
    return nonneg_on_positive_axis(margin) ? NCVerdict::holds : NCVerdict::violated;
}

} // namespace detail

/// NC margin for a pair of distinct edges. In symbolic mode the margin is
/// also recomputed in the equivalent mu[e1 -e2]mu[-e1 e2] - mu[e1e2]mu[-e1 -e2]
/// form; the two agree identically and the agreement is asserted.
inline NCMargin nc_pair(const Multigraph& g, int e1, int e2, WeightMode mode,
                        const MuOptions& opts = {}) {
    if (e1 == e2) throw InvalidOperationError("nc_pair needs distinct edges");
    NCMargin out;
    out.mu_e1 = mu(g, EventSpec{{e1}, {}}, mode, opts);
    out.mu_e2 = mu(g, EventSpec{{e2}, {}}, mode, opts);
    out.mu_both = mu(g, EventSpec{{e1, e2}, {}}, mode, opts);
    out.mu_one = mu(g, EventSpec::none(), mode, opts);

    if (mode == WeightMode::numeric) {
        Rational m = out.mu_e1.as_rational() * out.mu_e2.as_rational() -
                     out.mu_both.as_rational() * out.mu_one.as_rational();
        out.margin = MeasureValue::of(m);
        out.verdict = m.sign() >= 0 ? NCVerdict::holds : NCVerdict::violated;
        return out;
    }

    BetaPolynomial m = out.mu_e1.as_polynomial() * out.mu_e2.as_polynomial() -
                       out.mu_both.as_polynomial() * out.mu_one.as_polynomial();
    BetaPolynomial alt = mu(g, EventSpec{{e1}, {e2}}, mode, opts).as_polynomial() *
                             mu(g, EventSpec{{e2}, {e1}}, mode, opts).as_polynomial() -
                         out.mu_both.as_polynomial() *
                             mu(g, EventSpec{{}, {e1, e2}}, mode, opts).as_polynomial();
    if (m != alt)
        throw Error("margin forms disagree: edge-decomposition identity broken");
    out.margin = MeasureValue::of(m);
    out.verdict = detail::poly_verdict(m);
    return out;
}

/// Set-level margin P[S1]P[S2] - P[S1S2], exact rational.
inline NCMargin nc_sets(const Multigraph& g, const std::vector<int>& s1,
                        const std::vector<int>& s2, const MuOptions& opts = {}) {
    std::set<int> a(s1.begin(), s1.end());
    for (int id : s2)
        if (a.count(id)) throw InvalidEventError("set pair must be disjoint");

    NCMargin out;
    out.mu_e1 = mu(g, EventSpec{s1, {}}, WeightMode::numeric, opts);
    out.mu_e2 = mu(g, EventSpec{s2, {}}, WeightMode::numeric, opts);
    std::vector<int> both = s1;
    both.insert(both.end(), s2.begin(), s2.end());
    out.mu_both = mu(g, EventSpec{both, {}}, WeightMode::numeric, opts);
    out.mu_one = mu(g, EventSpec::none(), WeightMode::numeric, opts);

    Rational p1 = prob(g, EventSpec{s1, {}}, opts);
    Rational p2 = prob(g, EventSpec{s2, {}}, opts);
    Rational p12 = prob(g, EventSpec{both, {}}, opts);
    Rational m = p1 * p2 - p12;
    out.margin = MeasureValue::of(m);
    out.verdict = m.sign() >= 0 ? NCVerdict::holds : NCVerdict::violated;
    return out;
}

// ---------------------------------------------------------------------------
// Large-beta coefficient analysis. Degrees follow the unnormalized margin
// (required-edge weights kept), whose top sits at beta^(2|V|-2) with
// coefficient T[e1]T[e2] - T[e1e2]T[1]; in the divided-out mu convention the
// same numbers appear two degrees lower.
// ---------------------------------------------------------------------------

enum class LeadInterpretation { positive_large_beta, zero_inspect_next };

struct LeadingCoeff {
    Rational lead;
    LeadInterpretation interpretation = LeadInterpretation::zero_inspect_next;
};

namespace detail {

inline Rational tree_count_or_zero(const Multigraph& g, const Conductances& c,
                                   const std::vector<int>& require) {
    if (!is_acyclic_subset(g, require)) return Rational(0);
    return tree_count(g, c, require);
}

/// Margin polynomial in the mu convention; helper shared by the analyses.
inline BetaPolynomial margin_poly(const Multigraph& g, int e1, int e2, const MuOptions& opts) {
    return nc_pair(g, e1, e2, WeightMode::symbolic, opts).margin.as_polynomial();
}

} // namespace detail

/// Leading coefficient T[e1]T[e2] - T[e1e2]T[1] from matrix-tree counts,
/// cross-checked against the top coefficient of the symbolic margin.
inline LeadingCoeff leading_coeff_analysis(const Multigraph& g, int e1, int e2,
                                           const MuOptions& opts = {}) {
    if (!is_connected(g)) throw InvalidOperationError("graph must be connected");
    Conductances unit = Conductances::unit(g);
    Rational t1 = tree_count(g, unit);
    Rational te1 = detail::tree_count_or_zero(g, unit, {e1});
    Rational te2 = detail::tree_count_or_zero(g, unit, {e2});
    Rational te12 = detail::tree_count_or_zero(g, unit, {e1, e2});
    Rational lead = te1 * te2 - te12 * t1;

    long n = static_cast<long>(g.n_vertices());
    BetaPolynomial m = detail::margin_poly(g, e1, e2, opts);
    const Rational& coeff = m.coeff(static_cast<std::size_t>(2 * n - 4));
    if (coeff != lead)
        throw Error("leading coefficient mismatch between tree counts and margin polynomial");
    if (lead.sign() < 0)
        throw Error("negative leading coefficient contradicts spanning-tree negative correlation");

    LeadingCoeff out;
    out.lead = lead;
    out.interpretation = lead.sign() > 0 ? LeadInterpretation::positive_large_beta
                                         : LeadInterpretation::zero_inspect_next;
    return out;
}

/// Coefficient of beta^(2|V|-3) of the unnormalized margin (second-highest
/// possible term), extracted from the symbolic margin polynomial.
inline Rational second_coeff(const Multigraph& g, int e1, int e2, const MuOptions& opts = {}) {
    if (!is_connected(g)) throw InvalidOperationError("graph must be connected");
    long n = static_cast<long>(g.n_vertices());
    BetaPolynomial m = detail::margin_poly(g, e1, e2, opts);
    return m.coeff(static_cast<std::size_t>(2 * n - 5));
}

/// Independent route for the same coefficient: sum over vertex bipartitions
/// {V', V\V'} of T(e1)F(e2) + T(e2)F(e1) - T(e1e2)F(1) - T(1)F(e1e2), where
/// F counts two-tree spanning forests split at the bipartition. Each
/// unordered bipartition is counted once.
inline Rational second_coeff_bipartition_route(const Multigraph& g, int e1, int e2) {
    if (!is_connected(g)) throw InvalidOperationError("graph must be connected");
    std::size_t n = g.n_vertices();
    if (n > 16) throw SizeLimitError("bipartition route capped at 16 vertices");
    const auto& verts = g.vertices();

    Conductances unit = Conductances::unit(g);
    Rational t1 = tree_count(g, unit);
    Rational te1 = detail::tree_count_or_zero(g, unit, {e1});
    Rational te2 = detail::tree_count_or_zero(g, unit, {e2});
    Rational te12 = detail::tree_count_or_zero(g, unit, {e1, e2});

    auto forest_split_count = [&](const std::set<int>& side,
                                  const std::vector<int>& require) -> Rational {
        std::set<int> other;
        for (int v : verts)
            if (!side.count(v)) other.insert(v);
        Multigraph ga = g.induced(side);
        Multigraph gb = g.induced(other);
        std::vector<int> req_a, req_b;
        for (int id : require) {
            const Edge& e = g.edge(id);
            bool in_a = side.count(e.u) && side.count(e.v);
            bool in_b = other.count(e.u) && other.count(e.v);
            if (in_a) req_a.push_back(id);
            else if (in_b) req_b.push_back(id);
            else return Rational(0); // required edge crosses the bipartition
        }
        if (!is_connected(ga) || !is_connected(gb)) return Rational(0);
        if (!is_acyclic_subset(ga, req_a) || !is_acyclic_subset(gb, req_b)) return Rational(0);
        return tree_count(ga, unit, req_a) * tree_count(gb, unit, req_b);
    };

    Rational acc(0);
    // Fix verts[0] to one side so each unordered bipartition appears once.
    std::size_t m = n - 1;
    for (std::uint64_t mask = 0; mask + 1 < (1ull << m); ++mask) {
        std::set<int> side{verts[0]};
        for (std::size_t i = 0; i < m; ++i)
            if (mask >> i & 1ull) side.insert(verts[i + 1]);
        // mask covers all proper subsets containing verts[0] except V itself.
        Rational f1 = forest_split_count(side, {});
        Rational fe1 = forest_split_count(side, {e1});
        Rational fe2 = forest_split_count(side, {e2});
        Rational fe12 = forest_split_count(side, {e1, e2});
        acc += te1 * fe2 + te2 * fe1 - te12 * f1 - t1 * fe12;
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Complete-graph closed forms (a_k, I_k) and their audits.
// ---------------------------------------------------------------------------

struct KnAnalysis {
    int n = 0;
    Rational t1, te, tee;           // n^(n-2), 2n^(n-3), 4n^(n-4)
    std::vector<Rational> a_k;      // k = 1..floor(n/2), as printed
    std::vector<Rational> i_k;      // k = 2..floor(n/2)
    Rational sum_i;
    bool sum_i_below_one = false;
    Rational second_coeff_from_cases;
};

/// a_k closed form. At k = n/2 (even n) this counts every ordered subset of
/// size n/2, i.e. each unordered bipartition twice.
inline Rational kn_a_k(int n, int k) {
    if (k == 1) {
        // 12 n^(n-3) (n-1)^(n-5); exponent n-5 may be negative for n=5,6.
        return Rational(12) * Rational(pow_z(n, static_cast<unsigned long>(n - 3))) *
               pow_q(Rational(n - 1), n - 5);
    }
    Rational binom(binomial_z(static_cast<unsigned long>(n - 4), static_cast<unsigned long>(k - 1)));
    Rational bracket(-static_cast<long>(k) * (n + 6) * (n - k) + 2L * n * n);
    Rational denom(static_cast<long>(n - k - 1) * (n - k - 2));
    return Rational(12) * Rational(pow_z(n, static_cast<unsigned long>(n - 3))) * binom *
           pow_q(Rational(k), k - 4) * pow_q(Rational(n - k), n - k - 4) * bracket / denom;
}

inline Rational kn_i_k(int n, int k) {
    Rational fact(factorial_z(static_cast<unsigned long>(n - 4)));
    Rational denf(mpz_class(factorial_z(static_cast<unsigned long>(k - 1)) *
                            factorial_z(static_cast<unsigned long>(n - k - 1))));
    Rational bracket(static_cast<long>(k) * (n + 6) * (n - k) - 2L * n * n);
    return fact / denf * pow_q(Rational(k), k - 4) * pow_q(Rational(n - k), n - k - 4) * bracket /
           pow_q(Rational(n - 1), n - 5);
}

/// Closed-form bundle for disjoint-pair analysis on K_n, n >= 5. The
/// second-coefficient total applies weight 1/2 at k = n/2 for even n, where
/// the complementary size class pairs with itself.
inline KnAnalysis kn_closed_forms(int n) {
    if (n < 5)
        throw InvalidOperationError("closed forms need n >= 5: the (n-k-1)(n-k-2) denominators degenerate");
    KnAnalysis out;
    out.n = n;
    out.t1 = Rational(pow_z(n, static_cast<unsigned long>(n - 2)));
    out.te = Rational(2) * Rational(pow_z(n, static_cast<unsigned long>(n - 3)));
    out.tee = Rational(4) * Rational(pow_z(n, static_cast<unsigned long>(n - 4)));

    int half = n / 2;
    Rational total(0);
    for (int k = 1; k <= half; ++k) {
        Rational ak = kn_a_k(n, k);
        out.a_k.push_back(ak);
        Rational w = (n % 2 == 0 && k == half) ? Rational(1, 2) : Rational(1);
        total += w * ak;
    }
    out.second_coeff_from_cases = total;

    out.sum_i = Rational(0);
    for (int k = 2; k <= half; ++k) {
        Rational ik = kn_i_k(n, k);
        out.i_k.push_back(ik);
        out.sum_i += ik;
    }
    out.sum_i_below_one = out.sum_i < Rational(1);
    return out;
}

struct IBoundScan {
    int n_lo = 5, n_hi = 0;
    std::optional<int> first_holding;    // smallest n with sum < 1
    std::optional<int> last_failing;     // largest n with sum >= 1, if any
    int threshold_n = 0;                 // smallest N0 with sum < 1 for all n in [N0, n_hi]
};

/// Exact evaluation of the I_k bound over n in [5, n_hi].
inline IBoundScan i_bound_scan(int n_hi) {
    IBoundScan out;
    out.n_hi = n_hi;
    for (int n = 5; n <= n_hi; ++n) {
        Rational s(0);
        for (int k = 2; k <= n / 2; ++k) s += kn_i_k(n, k);
        bool holds = s < Rational(1);
        if (holds && !out.first_holding) out.first_holding = n;
        if (!holds) out.last_failing = n;
    }
    out.threshold_n = out.last_failing ? *out.last_failing + 1 : 5;
    return out;
}

// ---------------------------------------------------------------------------
// Beta threshold and monotonicity probes.
// ---------------------------------------------------------------------------

enum class ThresholdSide { large_beta, all_beta, unknown };

struct BetaThreshold {
    std::optional<Rational> beta_star; // margin >= 0 for beta >= beta_star
    ThresholdSide side = ThresholdSide::unknown;
    std::optional<RootBracket> largest_root;
};

/// Locates the largest positive root of the symbolic margin by exact root
/// isolation. No positive root and a nonnegative probe means NC for all
/// beta > 0 on this pair.
inline BetaThreshold beta_threshold(const Multigraph& g, int e1, int e2,
                                    const MuOptions& opts = {}) {
    BetaPolynomial m = detail::margin_poly(g, e1, e2, opts);
    BetaThreshold out;
    if (m.is_zero()) {
        out.side = ThresholdSide::all_beta;
        return out;
    }
    auto root = largest_positive_root(m);
    if (!root) {
        out.side = m.evaluate(Rational(1)).sign() >= 0 ? ThresholdSide::all_beta
                                                       : ThresholdSide::unknown;
        return out;
    }
    out.largest_root = *root;
    if (m.leading_coeff().sign() > 0) {
        out.beta_star = root->hi;
        out.side = ThresholdSide::large_beta;
        if (m.evaluate(root->hi * Rational(2)).sign() <= 0)
            throw Error("margin not positive beyond the isolated largest root");
    } else {
        out.side = ThresholdSide::unknown;
    }
    return out;
}

/// Advisory small-beta evaluation of a margin polynomial on the grid
/// 1/10 .. 1/10^4. The small-beta regime has no constructive treatment, so
/// this only reports signs; it never upgrades a verdict.
struct SmallBetaProbe {
    std::vector<std::pair<Rational, Rational>> points; // (beta, margin value)
    bool all_nonnegative = true;
};

inline SmallBetaProbe small_beta_probe(const BetaPolynomial& margin) {
    SmallBetaProbe out;
    for (int k = 1; k <= 4; ++k) {
        Rational beta = pow_q(Rational(1, 10), k);
        Rational val = margin.evaluate(beta);
        if (val.sign() < 0) out.all_nonnegative = false;
        out.points.push_back({beta, val});
    }
    return out;
}

struct MonotonicityReport {
    std::vector<std::pair<Rational, Rational>> sweep; // (beta_e value, P[e0])
    bool non_increasing = true;
    std::optional<std::size_t> violation_index;       // first strict increase
};

/// P[e0] as beta_e sweeps the grid with all other weights fixed; a strict
/// increase anywhere is an NC-violation witness for this weight profile.
inline MonotonicityReport monotonicity_check(const Multigraph& g, int e0, int e,
                                             const std::vector<Rational>& grid,
                                             const MuOptions& opts = {}) {
    if (e0 == e) throw InvalidOperationError("edges must be distinct");
    MonotonicityReport rep;
    for (const auto& x : grid) {
        Multigraph gg = g;
        gg.set_weight(e, x);
        rep.sweep.push_back({x, prob(gg, EventSpec{{e0}, {}}, opts)});
    }
    for (std::size_t i = 1; i < rep.sweep.size(); ++i) {
        if (rep.sweep[i].second > rep.sweep[i - 1].second) {
            rep.non_increasing = false;
            if (!rep.violation_index) rep.violation_index = i;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Whole-graph margin tables via one enumeration pass; the scan path.
// ---------------------------------------------------------------------------

/// Unnormalized per-edge and per-pair forest weights, from a single subset
/// scan: Z, w[e] = sum over forests containing e, w[e1,e2] likewise.
struct PairMarginTable {
    Rational z;
    std::map<int, Rational> edge_weight;
    std::map<std::pair<int, int>, Rational> pair_weight;

    Rational prob_edge(int e) const { return edge_weight.at(e) / z; }

    /// Probability-scale margin P[e1]P[e2] - P[e1e2].
    Rational prob_margin(int e1, int e2) const {
        auto key = std::make_pair(std::min(e1, e2), std::max(e1, e2));
        Rational joint = pair_weight.count(key) ? pair_weight.at(key) : Rational(0);
        return edge_weight.at(e1) * edge_weight.at(e2) / (z * z) - joint / z;
    }
};

inline PairMarginTable pair_margin_table(const Multigraph& g) {
    if (g.n_edges() > kEnumerationEdgeLimit)
        throw SizeLimitError("enumeration limited to 22 edges");
    PairMarginTable t;
    t.z = Rational(0);
    for (const auto& e : g.edges()) t.edge_weight[e.id] = Rational(0);

    std::map<int, int> vidx;
    for (int v : g.vertices()) vidx[v] = static_cast<int>(vidx.size());
    const auto& edges = g.edges();
    std::size_t m = edges.size();

    std::vector<int> chosen;
    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
        FlatUnionFind uf(g.n_vertices());
        bool ok = true;
        Rational w(1);
        chosen.clear();
        for (std::size_t i = 0; i < m && ok; ++i) {
            if (!(mask >> i & 1ull)) continue;
            const Edge& e = edges[i];
            if (e.is_loop() || !uf.unite(vidx[e.u], vidx[e.v])) { ok = false; break; }
            w *= e.weight;
            chosen.push_back(e.id);
        }
        if (!ok) continue;
        t.z += w;
        for (std::size_t a = 0; a < chosen.size(); ++a) {
            t.edge_weight[chosen[a]] += w;
            for (std::size_t b = a + 1; b < chosen.size(); ++b) {
                auto key = std::make_pair(std::min(chosen[a], chosen[b]),
                                          std::max(chosen[a], chosen[b]));
                t.pair_weight[key] += w;
            }
        }
    }
    return t;
}

} // namespace arboreal
