#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <ostream>
#include <string>

#include "arboreal/errors.hpp"

namespace arboreal {

/// Arbitrary-precision rational, always in lowest terms with denominator > 0.
///
/// Thin value wrapper over GMP's mpq that canonicalizes at every construction
/// site, so equality and ordering are plain mpq comparisons.
class Rational {
public:
    Rational() : v_(0) {}
    Rational(int n) : v_(n) {}
    Rational(long n) : v_(static_cast<long>(n)) {}
    Rational(const mpz_class& n) : v_(n) {}

    Rational(long num, long den) {
        if (den == 0) throw Error("rational with zero denominator");
        v_ = mpq_class(num, den);
        v_.canonicalize();
    }

    Rational(const mpz_class& num, const mpz_class& den) {
        if (den == 0) throw Error("rational with zero denominator");
        v_ = mpq_class(num, den);
        v_.canonicalize();
    }

    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    /// Parses "p/q" or a bare integer "p". Throws Error on anything else.
    static Rational from_string(const std::string& s) {
        auto bad = [&] { throw Error("malformed rational literal: '" + s + "'"); };
        if (s.empty()) bad();
        std::size_t slash = s.find('/');
        try {
            if (slash == std::string::npos) {
                check_integer_text(s, bad);
                return Rational(mpz_class(s));
            }
            std::string num = s.substr(0, slash);
            std::string den = s.substr(slash + 1);
            if (num.empty() || den.empty()) bad();
            check_integer_text(num, bad);
            check_integer_text(den, bad);
            return Rational(mpz_class(num), mpz_class(den));
        } catch (const std::invalid_argument&) {
            bad();
        }
        return Rational(); // unreachable
    }

    mpz_class numerator() const { return v_.get_num(); }
    mpz_class denominator() const { return v_.get_den(); }

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    Rational abs() const { return Rational(mpq_class(::abs(v_))); }

    Rational inverse() const {
        if (is_zero()) throw Error("inverse of zero");
        return Rational(mpq_class(1 / v_));
    }

    double to_double() const { return v_.get_d(); }

    /// "p" when the value is an integer, "p/q" otherwise.
    std::string to_string() const {
        if (is_integer()) return v_.get_num().get_str();
        return v_.get_str();
    }

    /// Always "p/q", as the graph text format requires.
    std::string to_fraction_string() const {
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw Error("division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.v_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        return os << r.to_string();
    }

    const mpq_class& raw() const { return v_; }

private:
    template <class Bad>
    static void check_integer_text(const std::string& t, Bad bad) {
        std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) bad();
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') bad();
    }

    mpq_class v_;
};

inline mpz_class pow_z(const mpz_class& base, unsigned long e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

/// base^e for integer exponents of either sign.
inline Rational pow_q(const Rational& base, long e) {
    if (e == 0) return Rational(1);
    bool neg = e < 0;
    unsigned long u = static_cast<unsigned long>(neg ? -e : e);
    Rational r(pow_z(base.numerator(), u), pow_z(base.denominator(), u));
    return neg ? r.inverse() : r;
}

inline mpz_class factorial_z(unsigned long n) {
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

inline mpz_class binomial_z(unsigned long n, unsigned long k) {
    if (k > n) return 0;
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

} // namespace arboreal
