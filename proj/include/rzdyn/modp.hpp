#pragma once

// Arithmetic in F_p for word-size primes p < 2^62 and dense univariate
// polynomials over F_p (coefficients low degree first, no trailing zeros).

#include <cstdint>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace rzdyn::modp {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mul(u64 a, u64 b, u64 p) { return static_cast<u64>(static_cast<u128>(a) * b % p); }
inline u64 add(u64 a, u64 b, u64 p) {
    u64 s = a + b;
    return s >= p ? s - p : s;
}
inline u64 sub(u64 a, u64 b, u64 p) { return a >= b ? a - b : a + p - b; }

inline u64 pow(u64 a, u64 e, u64 p) {
    u64 r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mul(r, a, p);
        a = mul(a, a, p);
        e >>= 1;
    }
    return r;
}

inline u64 inv(u64 a, u64 p) {
    if (a % p == 0) throw PreconditionError("inverse of zero modulo p");
    return pow(a, p - 2, p);
}

/// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL})
        if (n % q == 0) return n == q;
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = pow(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s && composite; ++r) {
            x = mul(x, x, n);
            if (x == n - 1) composite = false;
        }
        if (composite) return false;
    }
    return true;
}

/// The i-th prime below 2^61, counting downwards. Cached.
inline u64 large_prime(std::size_t i) {
    static thread_local std::vector<u64> cache;
    u64 next = cache.empty() ? (u64{1} << 61) - 1 : cache.back() - 2;
    while (cache.size() <= i) {
        while (!is_prime(next)) next -= 2;
        cache.push_back(next);
        next -= 2;
    }
    return cache[i];
}

using Poly = std::vector<u64>;

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline int degree(const Poly& a) { return static_cast<int>(a.size()) - 1; }

inline u64 eval(const Poly& a, u64 x, u64 p) {
    u64 r = 0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) r = add(mul(r, x, p), *it, p);
    return r;
}

inline Poly make_monic(Poly a, u64 p) {
    if (a.empty()) return a;
    const u64 c = inv(a.back(), p);
    for (auto& x : a) x = mul(x, c, p);
    return a;
}

inline Poly mul(const Poly& a, const Poly& b, u64 p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = add(c[i + j], mul(a[i], b[j], p), p);
    }
    trim(c);
    return c;
}

/// Quotient and remainder; b must be nonzero.
inline std::pair<Poly, Poly> divrem(Poly a, const Poly& b, u64 p) {
    if (b.empty()) throw PreconditionError("polynomial division by zero");
    trim(a);
    if (a.size() < b.size()) return {{}, a};
    Poly q(a.size() - b.size() + 1, 0);
    const u64 li = inv(b.back(), p);
    for (std::size_t i = a.size(); i-- >= b.size();) {
        const u64 c = mul(a[i], li, p);
        q[i - b.size() + 1] = c;
        if (!c) continue;
        for (std::size_t j = 0; j < b.size(); ++j) a[i - b.size() + 1 + j] = sub(a[i - b.size() + 1 + j], mul(c, b[j], p), p);
    }
    a.resize(b.size() - 1);
    trim(a);
    trim(q);
    return {q, a};
}

/// Monic gcd; gcd(0, 0) = 0.
inline Poly gcd(Poly a, Poly b, u64 p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = divrem(a, b, p).second;
        a = std::move(b);
        b = std::move(r);
    }
    return make_monic(a, p);
}

inline Poly derivative(const Poly& a, u64 p) {
    if (a.size() <= 1) return {};
    Poly d(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) d[i - 1] = mul(a[i], i % p, p);
    trim(d);
    return d;
}

/// Degree of the squarefree part (number of distinct roots over the algebraic closure).
inline int squarefree_degree(const Poly& a, u64 p) {
    if (a.empty()) throw PreconditionError("squarefree part of zero");
    const Poly g = gcd(a, derivative(a, p), p);
    return degree(a) - degree(g);
}

/// Resultant of a and b as polynomials of the given formal degrees.
inline u64 resultant(Poly a, Poly b, u64 p) {
    trim(a);
    trim(b);
    if (a.empty() || b.empty()) return 0;
    u64 res = 1;
    while (true) {
        const int da = degree(a), db = degree(b);
        if (db == 0) return mul(res, pow(b[0], static_cast<u64>(da), p), p);
        if (da < db) {
            if ((da & 1) && (db & 1)) res = sub(0, res, p);
            std::swap(a, b);
            continue;
        }
        Poly r = divrem(a, b, p).second;
        if (r.empty()) return 0;
        // Res(a, b) = (-1)^{da db} lc(b)^{da - dr} Res(b, r)
        const int dr = degree(r);
        if ((da & 1) && (db & 1)) res = sub(0, res, p);
        res = mul(res, pow(b.back(), static_cast<u64>(da - dr), p), p);
        a = std::move(b);
        b = std::move(r);
    }
}

/// Newton interpolation through (xs[i], ys[i]) with distinct xs.
inline Poly interpolate(const std::vector<u64>& xs, const std::vector<u64>& ys, u64 p) {
    const std::size_t n = xs.size();
    std::vector<u64> c = ys;
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = n - 1; i >= j; --i)
            c[i] = mul(sub(c[i], c[i - 1], p), inv(sub(xs[i], xs[i - j], p), p), p);
    Poly r{c[n - 1]};
    for (std::size_t k = n - 1; k-- > 0;) {
        // r = r * (x - xs[k]) + c[k]
        Poly t(r.size() + 1, 0);
        for (std::size_t i = 0; i < r.size(); ++i) {
            t[i + 1] = add(t[i + 1], r[i], p);
            t[i] = sub(t[i], mul(r[i], xs[k], p), p);
        }
        t[0] = add(t[0], c[k], p);
        r = std::move(t);
    }
    trim(r);
    return r;
}

}  // namespace rzdyn::modp
