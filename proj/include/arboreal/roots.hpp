#pragma once

#include <optional>
#include <vector>

#include "arboreal/polynomial.hpp"

namespace arboreal {

namespace detail {

inline BetaPolynomial poly_gcd(BetaPolynomial a, BetaPolynomial b) {
    while (!b.is_zero()) {
        auto [q, r] = a.divmod(b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.is_zero()) a = a.leading_coeff().inverse() * a; // monic
    return a;
}

inline BetaPolynomial squarefree_part(const BetaPolynomial& p) {
    if (p.degree() <= 0) return p;
    BetaPolynomial g = poly_gcd(p, p.derivative());
    if (g.degree() <= 0) return p;
    return p.divmod(g).first;
}

inline std::vector<BetaPolynomial> sturm_chain(const BetaPolynomial& p) {
    std::vector<BetaPolynomial> chain;
    BetaPolynomial p0 = squarefree_part(p);
    chain.push_back(p0);
    chain.push_back(p0.derivative());
    while (!chain.back().is_zero() && chain.back().degree() > 0) {
        auto [q, r] = chain[chain.size() - 2].divmod(chain.back());
        chain.push_back(-r);
    }
    if (chain.back().is_zero()) chain.pop_back();
    return chain;
}

inline int sign_variations_at(const std::vector<BetaPolynomial>& chain, const Rational& x) {
    int vars = 0, prev = 0;
    for (const auto& p : chain) {
        int s = p.evaluate(x).sign();
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++vars;
        prev = s;
    }
    return vars;
}

/// Number of distinct real roots in (a, b].
inline int roots_in(const std::vector<BetaPolynomial>& chain, const Rational& a, const Rational& b) {
    return sign_variations_at(chain, a) - sign_variations_at(chain, b);
}

/// A point strictly inside (a, b) that is not a root of sf. Exists because sf
/// has finitely many roots; tried denominators grow until one misses.
inline Rational non_root_split(const BetaPolynomial& sf, const Rational& a, const Rational& b) {
    for (long j = 2;; ++j) {
        Rational m = a + (b - a) / Rational(j);
        if (!sf.evaluate(m).is_zero()) return m;
    }
}

} // namespace detail

/// All roots lie within |x| <= bound.
inline Rational cauchy_root_bound(const BetaPolynomial& p) {
    if (p.degree() <= 0) return Rational(1);
    Rational m(0);
    const Rational lead = p.leading_coeff().abs();
    for (long i = 0; i < p.degree(); ++i) {
        Rational r = p.coeff(static_cast<std::size_t>(i)).abs() / lead;
        if (r > m) m = r;
    }
    return Rational(1) + m;
}

/// Isolating bracket: exactly one distinct root strictly inside (lo, hi),
/// and neither endpoint is a root.
struct RootBracket {
    Rational lo, hi;
};

/// Disjoint isolating brackets for the distinct positive real roots of p,
/// in ascending order, each refined below `width`.
inline std::vector<RootBracket> isolate_positive_roots(const BetaPolynomial& p,
                                                       const Rational& width = Rational(1, 1 << 16)) {
    std::vector<RootBracket> out;
    if (p.degree() <= 0) return out;
    auto chain = detail::sturm_chain(p);
    const BetaPolynomial& sf = chain.front();

    Rational hi = cauchy_root_bound(p);
    while (sf.evaluate(hi).is_zero()) hi += Rational(1);
    if (detail::roots_in(chain, Rational(0), hi) == 0) return out;

    std::vector<std::pair<Rational, Rational>> work{{Rational(0), hi}};
    while (!work.empty()) {
        auto [a, b] = work.back();
        work.pop_back();
        int k = detail::roots_in(chain, a, b);
        if (k == 0) continue;
        if (k == 1 && b - a <= width && !sf.evaluate(a).is_zero()) {
            out.push_back(RootBracket{a, b});
            continue;
        }
        Rational mid = detail::non_root_split(sf, a, b);
        work.push_back({a, mid});
        work.push_back({mid, b});
    }
    std::sort(out.begin(), out.end(),
              [](const RootBracket& x, const RootBracket& y) { return x.hi < y.hi; });
    return out;
}

/// Exact decision: p(x) >= 0 for every x > 0.
inline bool nonneg_on_positive_axis(const BetaPolynomial& p) {
    if (p.is_zero()) return true;
    // Strip the beta^k factor, positive on the domain.
    std::size_t k = 0;
    while (p.coeff(k).is_zero()) ++k;
    std::vector<Rational> shifted(p.coefficients().begin() + static_cast<long>(k),
                                  p.coefficients().end());
    BetaPolynomial q{std::move(shifted)};
    if (q.degree() == 0) return q.coeff(0).sign() > 0;
    if (q.leading_coeff().sign() < 0) return false;
    if (q.coeff(0).sign() < 0) return false; // sign just right of 0

    auto brackets = isolate_positive_roots(q);
    if (brackets.empty()) return q.coeff(0).sign() > 0;

    // One sample per open interval between consecutive roots, plus a point
    // beyond the last root. Bracket endpoints are certified non-roots.
    for (std::size_t i = 0; i + 1 < brackets.size(); ++i)
        if (q.evaluate(brackets[i].hi).sign() < 0) return false;
    if (q.evaluate(brackets.back().hi + Rational(1) + cauchy_root_bound(q)).sign() < 0) return false;
    return true;
}

/// Largest positive real root of p, as an isolating bracket.
inline std::optional<RootBracket> largest_positive_root(const BetaPolynomial& p) {
    auto brackets = isolate_positive_roots(p);
    if (brackets.empty()) return std::nullopt;
    return brackets.back();
}

} // namespace arboreal
