#pragma once

// Exact characteristic polynomials and real-root isolation by Sturm sequences.
// Polynomials are coefficient vectors, lowest degree first.

#include <cmath>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace rzdyn {

using QPoly = std::vector<Rational>;

inline void trim(QPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

inline Rational eval(const QPoly& p, const Rational& x) {
    Rational r = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
    return r;
}

inline QPoly derivative(const QPoly& p) {
    QPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<unsigned long>(i));
    trim(d);
    return d;
}

inline std::pair<QPoly, QPoly> divrem(QPoly a, const QPoly& b) {
    if (b.empty()) throw PreconditionError("polynomial division by zero");
    trim(a);
    if (a.size() < b.size()) return {{}, a};
    QPoly q(a.size() - b.size() + 1, Rational(0));
    for (std::size_t i = a.size(); i-- >= b.size();) {
        const Rational c = a[i] / b.back();
        q[i - b.size() + 1] = c;
        if (c == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) a[i - b.size() + 1 + j] -= c * b[j];
    }
    a.resize(b.size() - 1);
    trim(a);
    return {q, a};
}

inline QPoly gcd(QPoly a, QPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        QPoly r = divrem(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        const Rational l = a.back();
        for (auto& c : a) c /= l;
    }
    return a;
}

/// det(x I - M), monic, by the Faddeev-LeVerrier recursion.
inline QPoly charpoly(const QMatrix& m) {
    if (m.rows() != m.cols()) throw PreconditionError("characteristic polynomial of non-square matrix");
    const std::size_t n = m.rows();
    QPoly c(n + 1, Rational(0));
    c[n] = 1;
    QMatrix mk(n, n);  // M_k, with M_0 = 0
    for (std::size_t k = 1; k <= n; ++k) {
        // M_k = M M_{k-1} + c_{n-k+1} I ; c_{n-k} = -tr(M M_k) / k
        QMatrix next = m * mk;
        for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
        mk = std::move(next);
        const QMatrix am = m * mk;
        Rational tr = 0;
        for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
        c[n - k] = -tr / static_cast<unsigned long>(k);
    }
    return c;
}

class SturmSequence {
public:
    explicit SturmSequence(QPoly p) {
        trim(p);
        if (p.empty()) throw PreconditionError("Sturm sequence of the zero polynomial");
        // squarefree part, so counts are of distinct roots
        const QPoly g = gcd(p, derivative(p));
        p = divrem(p, g).first;
        seq_.push_back(p);
        seq_.push_back(derivative(p));
        while (!seq_.back().empty()) {
            QPoly r = divrem(seq_[seq_.size() - 2], seq_.back()).second;
            for (auto& c : r) c = -c;
            seq_.push_back(std::move(r));
        }
        seq_.pop_back();
    }

    const QPoly& squarefree() const { return seq_.front(); }

    int sign_changes(const Rational& x) const {
        int changes = 0, last = 0;
        for (const auto& q : seq_) {
            const int s = sgn(eval(q, x));
            if (s == 0) continue;
            if (last != 0 && s != last) ++changes;
            last = s;
        }
        return changes;
    }

    /// Number of distinct real roots in (a, b], for a not a root.
    int count(const Rational& a, const Rational& b) const { return sign_changes(a) - sign_changes(b); }

private:
    std::vector<QPoly> seq_;
};

/// Bound exceeding the modulus of every root.
inline Rational cauchy_bound(const QPoly& p) {
    Rational m = 0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        Rational r = abs(p[i] / p.back());
        if (r > m) m = r;
    }
    return m + 1;
}

struct RootInterval {
    Rational lo;
    Rational hi;
    double mid() const { return (to_double(lo) + to_double(hi)) / 2; }
    double width() const { return to_double(hi - lo); }
};

/// Interval of width <= tol containing the largest real root, or nullopt if there is none.
inline std::optional<RootInterval> largest_real_root(const QPoly& poly, const Rational& tol) {
    QPoly p = poly;
    trim(p);
    if (p.size() <= 1) return std::nullopt;
    const SturmSequence s(p);
    const QPoly& q = s.squarefree();
    Rational hi = cauchy_bound(q);
    Rational lo = -hi;
    if (s.count(lo, hi) == 0) return std::nullopt;
    while (hi - lo > tol) {
        Rational mid = (lo + hi) / 2;
        if (eval(q, mid) == 0) {
            if (s.count(mid, hi) == 0) return RootInterval{mid, mid};
            // nudge off the root; the largest root lies above
            lo = mid;
            Rational step = (hi - lo) / 1024;
            while (eval(q, lo + step) == 0 || s.count(lo + step, hi) == 0) step /= 2;
            lo += step;
            continue;
        }
        if (s.count(mid, hi) > 0)
            lo = mid;
        else
            hi = mid;
    }
    return RootInterval{lo, hi};
}

}  // namespace rzdyn
