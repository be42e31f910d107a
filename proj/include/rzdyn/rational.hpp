#pragma once

// Exact rational scalars and a small dense matrix over them.

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace rzdyn {

using Rational = mpq_class;
using Integer = mpz_class;

/// Exact conversion of a 64-bit integer (GMP has no long long overloads).
inline Rational rat(long long v) { return Rational(static_cast<signed long>(v)); }

inline Rational make_rational(long long num, long long den = 1) {
    Rational q{Integer{static_cast<signed long>(num)}, Integer{static_cast<signed long>(den)}};
    q.canonicalize();
    return q;
}

/// Parses "p", "-p" or "p/q". Throws ValidationError on anything else.
inline Rational parse_rational(std::string_view text) {
    std::string s;
    for (char c : text)
        if (c != ' ') s.push_back(c);
    auto valid_int = [](std::string_view t) {
        if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.remove_prefix(1);
        return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    auto slash = s.find('/');
    std::string num = s.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!valid_int(num) || !valid_int(den))
        throw ValidationError("not a rational: '" + std::string(text) + "'");
    if (num.front() == '+') num.erase(0, 1);
    if (den.front() == '+') den.erase(0, 1);
    Integer d{den};
    if (d == 0) throw ValidationError("zero denominator: '" + std::string(text) + "'");
    Rational q{Integer{num}, d};
    q.canonicalize();
    return q;
}

/// Canonical "p/q" form ("p" when q = 1).
inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Exact conversion of a finite double.
inline Rational from_double(double x) { return Rational{x}; }

inline double to_double(const Rational& q) { return q.get_d(); }

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < m.rows_; ++i) {
            if (rows[i].size() != m.cols_) throw ValidationError("ragged matrix rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw PreconditionError("matrix product shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (aik == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& x) {
        if (a.cols_ != x.size()) throw PreconditionError("matrix-vector shape mismatch");
        std::vector<T> y(a.rows_, T(0));
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j)
                if (x[j] != 0) y[i] += a(i, j) * x[j];
        return y;
    }

    std::vector<T> column(std::size_t j) const {
        std::vector<T> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using QMatrix = Matrix<Rational>;
using QVector = std::vector<Rational>;

inline Rational dot(const QVector& a, const QVector& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// x^T G y.
inline Rational bilinear(const QMatrix& g, const QVector& x, const QVector& y) {
    Rational s = 0;
    for (std::size_t i = 0; i < g.rows(); ++i) {
        if (x[i] == 0) continue;
        Rational row = 0;
        for (std::size_t j = 0; j < g.cols(); ++j)
            if (y[j] != 0) row += g(i, j) * y[j];
        s += x[i] * row;
    }
    return s;
}

/// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(QMatrix& m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && m(p, c) == 0) ++p;
        if (p == m.rows()) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
        Rational inv = 1 / m(r, c);
        for (std::size_t j = c; j < m.cols(); ++j) m(r, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || m(i, c) == 0) continue;
            Rational f = m(i, c);
            for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::size_t rank(QMatrix m) { return rref(m).size(); }

/// Basis of {x : m x = 0}, one column vector per entry.
inline std::vector<QVector> nullspace(QMatrix m) {
    auto pivots = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<QVector> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        QVector v(m.cols(), Rational(0));
        v[free] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

inline std::optional<QMatrix> inverse(const QMatrix& a) {
    if (a.rows() != a.cols()) throw PreconditionError("inverse of non-square matrix");
    const std::size_t n = a.rows();
    QMatrix aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n + i) = 1;
    }
    auto pivots = rref(aug);
    if (pivots.size() < n || pivots[n - 1] != n - 1) return std::nullopt;
    QMatrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

/// Solves a x = b for square invertible a.
inline std::optional<QVector> solve(const QMatrix& a, const QVector& b) {
    const std::size_t n = a.rows();
    QMatrix aug(n, a.cols() + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
        aug(i, a.cols()) = b[i];
    }
    auto pivots = rref(aug);
    if (pivots.size() != a.cols() || (!pivots.empty() && pivots.back() == a.cols())) return std::nullopt;
    QVector x(a.cols());
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug(r, a.cols());
    return x;
}

struct Signature {
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t zero = 0;
    bool operator==(const Signature&) const = default;
};

/// Inertia of a symmetric rational matrix by exact congruence diagonalization.
inline Signature signature(QMatrix a) {
    if (a.rows() != a.cols()) throw PreconditionError("signature of non-square matrix");
    const std::size_t n = a.rows();
    Signature sig;
    std::vector<bool> done(n, false);
    auto eliminate = [&](std::size_t p) {
        const Rational piv = a(p, p);
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || i == p || a(i, p) == 0) continue;
            Rational f = a(i, p) / piv;
            for (std::size_t j = 0; j < n; ++j) a(i, j) -= f * a(p, j);
            for (std::size_t j = 0; j < n; ++j) a(j, i) -= f * a(j, p);
        }
        done[p] = true;
        (piv > 0 ? sig.positive : sig.negative)++;
    };
    for (;;) {
        std::size_t p = n;
        for (std::size_t i = 0; i < n && p == n; ++i)
            if (!done[i] && a(i, i) != 0) p = i;
        if (p != n) {
            eliminate(p);
            continue;
        }
        // No usable diagonal entry: fold an off-diagonal one onto the diagonal.
        std::size_t fi = n, fj = n;
        for (std::size_t i = 0; i < n && fi == n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (!done[i] && !done[j] && i != j && a(i, j) != 0) {
                    fi = i;
                    fj = j;
                    break;
                }
        if (fi == n) break;
        for (std::size_t k = 0; k < n; ++k) a(fi, k) += a(fj, k);
        for (std::size_t k = 0; k < n; ++k) a(k, fi) += a(k, fj);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!done[i]) ++sig.zero;
    return sig;
}

inline std::string matrix_to_string(const QMatrix& m) {
    std::ostringstream os;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        os << '[';
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j).get_str();
        os << "]\n";
    }
    return os.str();
}

}  // namespace rzdyn
