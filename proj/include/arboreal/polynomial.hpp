#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "arboreal/rational.hpp"

namespace arboreal {

/// Dense univariate polynomial in the formal activity beta, with exact
/// rational coefficients. Degrees stay small here (at most |V|-1 per measure,
/// twice that for margins), so a dense vector is the right representation.
class BetaPolynomial {
public:
    BetaPolynomial() = default;
    BetaPolynomial(const Rational& c) { if (!c.is_zero()) coeffs_.push_back(c); }
    BetaPolynomial(int c) : BetaPolynomial(Rational(c)) {}

    explicit BetaPolynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) {
        trim();
    }

    /// The monomial beta^1.
    static BetaPolynomial beta() {
        return BetaPolynomial(std::vector<Rational>{Rational(0), Rational(1)});
    }

    static BetaPolynomial monomial(const Rational& c, std::size_t degree) {
        if (c.is_zero()) return {};
        std::vector<Rational> v(degree + 1, Rational(0));
        v[degree] = c;
        return BetaPolynomial(std::move(v));
    }

    bool is_zero() const { return coeffs_.empty(); }

    /// Degree of the zero polynomial is reported as -1.
    long degree() const { return static_cast<long>(coeffs_.size()) - 1; }

    /// Coefficient of beta^i; zero beyond the stored degree.
    const Rational& coeff(std::size_t i) const {
        static const Rational zero{};
        return i < coeffs_.size() ? coeffs_[i] : zero;
    }

    const std::vector<Rational>& coefficients() const { return coeffs_; }

    const Rational& leading_coeff() const {
        static const Rational zero{};
        return coeffs_.empty() ? zero : coeffs_.back();
    }

    Rational evaluate(const Rational& x) const {
        Rational acc(0);
        for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
        return acc;
    }

    BetaPolynomial derivative() const {
        if (coeffs_.size() <= 1) return {};
        std::vector<Rational> d(coeffs_.size() - 1);
        for (std::size_t i = 1; i < coeffs_.size(); ++i)
            d[i - 1] = coeffs_[i] * Rational(static_cast<long>(i));
        return BetaPolynomial(std::move(d));
    }

    /// Multiply by beta^k.
    BetaPolynomial shifted(std::size_t k) const {
        if (is_zero() || k == 0) return *this;
        std::vector<Rational> v(coeffs_.size() + k, Rational(0));
        for (std::size_t i = 0; i < coeffs_.size(); ++i) v[i + k] = coeffs_[i];
        return BetaPolynomial(std::move(v));
    }

    BetaPolynomial& operator+=(const BetaPolynomial& o) {
        if (coeffs_.size() < o.coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        trim();
        return *this;
    }

    BetaPolynomial& operator-=(const BetaPolynomial& o) {
        if (coeffs_.size() < o.coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
        for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        trim();
        return *this;
    }

    friend BetaPolynomial operator+(BetaPolynomial a, const BetaPolynomial& b) { return a += b; }
    friend BetaPolynomial operator-(BetaPolynomial a, const BetaPolynomial& b) { return a -= b; }

    friend BetaPolynomial operator*(const BetaPolynomial& a, const BetaPolynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> r(a.coeffs_.size() + b.coeffs_.size() - 1, Rational(0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (a.coeffs_[i].is_zero()) continue;
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
                r[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
        return BetaPolynomial(std::move(r));
    }

    BetaPolynomial& operator*=(const BetaPolynomial& o) { return *this = *this * o; }

    friend BetaPolynomial operator*(const Rational& c, const BetaPolynomial& p) {
        if (c.is_zero()) return {};
        std::vector<Rational> r = p.coeffs_;
        for (auto& x : r) x *= c;
        return BetaPolynomial(std::move(r));
    }

    friend BetaPolynomial operator-(const BetaPolynomial& p) { return Rational(-1) * p; }

    friend bool operator==(const BetaPolynomial& a, const BetaPolynomial& b) {
        return a.coeffs_ == b.coeffs_;
    }
    friend bool operator!=(const BetaPolynomial& a, const BetaPolynomial& b) {
        return !(a == b);
    }

    /// Euclidean division over the rationals: *this = q*div + r, deg r < deg div.
    std::pair<BetaPolynomial, BetaPolynomial> divmod(const BetaPolynomial& div) const {
        if (div.is_zero()) throw Error("polynomial division by zero");
        BetaPolynomial rem = *this;
        std::vector<Rational> q;
        long dd = div.degree();
        if (rem.degree() >= dd) q.assign(static_cast<std::size_t>(rem.degree() - dd) + 1, Rational(0));
        while (!rem.is_zero() && rem.degree() >= dd) {
            long shift = rem.degree() - dd;
            Rational f = rem.leading_coeff() / div.leading_coeff();
            q[static_cast<std::size_t>(shift)] = f;
            rem -= monomial(f, static_cast<std::size_t>(shift)) * div;
        }
        return {BetaPolynomial(std::move(q)), rem};
    }

    std::string to_string(const std::string& var = "b") const {
        if (is_zero()) return "0";
        std::string s;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (coeffs_[i].is_zero()) continue;
            if (!s.empty()) s += " + ";
            if (i == 0) {
                s += coeffs_[i].to_string();
            } else {
                if (coeffs_[i] != Rational(1)) s += coeffs_[i].to_string() + "*";
                s += var;
                if (i > 1) s += "^" + std::to_string(i);
            }
        }
        return s;
    }

    /// Coefficient list as "p/q" strings, constant term first.
    std::vector<std::string> coeff_strings() const {
        std::vector<std::string> out;
        out.reserve(coeffs_.size());
        for (const auto& c : coeffs_) out.push_back(c.to_string());
        return out;
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
    }

    std::vector<Rational> coeffs_; // coeffs_[i] multiplies beta^i
};

enum class PolyOp { add, sub, mul };

inline BetaPolynomial poly_arith(const BetaPolynomial& a, const BetaPolynomial& b, PolyOp op) {
    switch (op) {
        case PolyOp::add: return a + b;
        case PolyOp::sub: return a - b;
        case PolyOp::mul: return a * b;
    }
    throw Error("unknown polynomial op");
}

} // namespace arboreal
