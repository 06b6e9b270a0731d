#pragma once

#include <cstddef>
#include <vector>

#include "arboreal/rational.hpp"

namespace arboreal {

/// Rectangular matrix of exact rationals.
class RationalMatrix {
public:
    RationalMatrix() : rows_(0), cols_(0) {}
    RationalMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

    static RationalMatrix identity(std::size_t n) {
        RationalMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = Rational(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<Rational> mul(const std::vector<Rational>& x) const {
        std::vector<Rational> y(rows_, Rational(0));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                if (!(*this)(i, j).is_zero()) y[i] += (*this)(i, j) * x[j];
        return y;
    }

private:
    std::size_t rows_, cols_;
    std::vector<Rational> data_;
};

namespace detail {

/// Row-scales a rational matrix to integers. Returns the per-row multipliers'
/// product so callers can undo the scaling on the determinant.
inline mpz_class clear_denominators(const RationalMatrix& m, std::vector<std::vector<mpz_class>>& out) {
    std::size_t n = m.rows(), c = m.cols();
    out.assign(n, std::vector<mpz_class>(c));
    mpz_class total(1);
    for (std::size_t i = 0; i < n; ++i) {
        mpz_class l(1);
        for (std::size_t j = 0; j < c; ++j)
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m(i, j).denominator().get_mpz_t());
        for (std::size_t j = 0; j < c; ++j)
            out[i][j] = m(i, j).numerator() * (l / m(i, j).denominator());
        total *= l;
    }
    return total;
}

} // namespace detail

/// Exact determinant by Bareiss fraction-free elimination. Rows are first
/// scaled to integers so every interior division is an exact mpz division.
inline Rational det_fraction_free(const RationalMatrix& m) {
    if (m.rows() != m.cols())
        throw DimensionError("determinant of a non-square matrix");
    std::size_t n = m.rows();
    if (n == 0) return Rational(1);

    std::vector<std::vector<mpz_class>> a;
    mpz_class scale = detail::clear_denominators(m, a);

    int sign = 1;
    mpz_class prev(1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return Rational(0);
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                mpz_class t = a[i][j] * a[k][k] - a[i][k] * a[k][j];
                mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    mpz_class det = a[n - 1][n - 1];
    if (sign < 0) det = -det;
    return Rational(det, scale);
}

/// Exact solve of m*x = rhs by rational Gaussian elimination. Throws
/// SingularMatrixError carrying the rank when the system is singular.
/// The result is verified by substitution before it is returned.
inline std::vector<Rational> solve_exact(const RationalMatrix& m, const std::vector<Rational>& rhs) {
    if (m.rows() != m.cols())
        throw DimensionError("solve on a non-square matrix");
    std::size_t n = m.rows();
    if (rhs.size() != n)
        throw DimensionError("rhs length does not match matrix");

    // Augmented [A | b].
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
        a[i][n] = rhs[i];
    }

    std::size_t rank = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t col = 0; col < n && rank < n; ++col) {
        std::size_t p = rank;
        while (p < n && a[p][col].is_zero()) ++p;
        if (p == n) continue;
        std::swap(a[rank], a[p]);
        Rational inv = a[rank][col].inverse();
        for (std::size_t j = col; j <= n; ++j) a[rank][j] *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == rank || a[i][col].is_zero()) continue;
            Rational f = a[i][col];
            for (std::size_t j = col; j <= n; ++j) a[i][j] -= f * a[rank][j];
        }
        pivot_col.push_back(col);
        ++rank;
    }
    if (rank < n)
        throw SingularMatrixError("singular system", rank);

    std::vector<Rational> x(n);
    for (std::size_t i = 0; i < n; ++i) x[pivot_col[i]] = a[i][n];

    // Contract: zero residual, exactly.
    std::vector<Rational> back = m.mul(x);
    for (std::size_t i = 0; i < n; ++i)
        if (back[i] != rhs[i]) throw Error("solve_exact residual is nonzero");
    return x;
}

} // namespace arboreal
