#pragma once

// Exact feasibility for { lambda >= 0 : G lambda = b } by phase-one simplex
// over the rationals with Bland's rule.

#include <optional>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace rzdyn {

/// Nonnegative coefficients expressing b in the cone spanned by gens, if any.
inline std::optional<QVector> cone_coefficients(const std::vector<QVector>& gens, const QVector& b) {
    const std::size_t m = b.size();
    const std::size_t n = gens.size();
    for (const auto& g : gens)
        if (g.size() != m) throw PreconditionError("generator dimension mismatch");
    // Tableau columns: n structural, m artificial, 1 rhs. Row m is the phase-one objective.
    const std::size_t cols = n + m + 1;
    QMatrix t(m + 1, cols);
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        const bool neg = b[i] < 0;
        for (std::size_t j = 0; j < n; ++j) t(i, j) = neg ? Rational(-gens[j][i]) : gens[j][i];
        t(i, n + i) = 1;
        t(i, cols - 1) = neg ? Rational(-b[i]) : b[i];
        basis[i] = n + i;
    }
    // objective row: minimise the sum of artificials, expressed in nonbasic variables
    for (std::size_t j = 0; j < cols; ++j) {
        if (j >= n && j < n + m) continue;
        Rational s = 0;
        for (std::size_t i = 0; i < m; ++i) s += t(i, j);
        t(m, j) = -s;
    }
    for (;;) {
        std::size_t enter = cols;
        for (std::size_t j = 0; j + 1 < cols; ++j)
            if (t(m, j) < 0) {
                enter = j;
                break;
            }
        if (enter == cols) break;
        std::size_t leave = m;
        Rational best;
        for (std::size_t i = 0; i < m; ++i) {
            if (t(i, enter) <= 0) continue;
            Rational ratio = t(i, cols - 1) / t(i, enter);
            if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave == m) throw NumericalFailure("phase-one simplex is unbounded");
        const Rational piv = t(leave, enter);
        for (std::size_t j = 0; j < cols; ++j) t(leave, j) /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave || t(i, enter) == 0) continue;
            const Rational f = t(i, enter);
            for (std::size_t j = 0; j < cols; ++j) t(i, j) -= f * t(leave, j);
        }
        basis[leave] = enter;
    }
    if (t(m, cols - 1) != 0) return std::nullopt;
    QVector x(n, Rational(0));
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] < n) x[basis[i]] = t(i, cols - 1);
    return x;
}

inline bool in_cone(const std::vector<QVector>& gens, const QVector& b) { return cone_coefficients(gens, b).has_value(); }

}  // namespace rzdyn
