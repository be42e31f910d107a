#pragma once

// Sparse integer polynomials in two variables, keyed by packed exponents,
// with exact division and a modular (Brown-style) gcd over Z.
//
// A key packs x^i y^j as (i << 32) | j, so descending key order is lex order
// with x > y and multiplying monomials adds keys. Homogeneous polynomials in
// X, Y, Z reuse the same representation with Z implied by the degree.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "modp.hpp"
#include "rational.hpp"

namespace rzdyn::poly {

using Key = std::uint64_t;

inline Key key(std::uint32_t i, std::uint32_t j) { return (static_cast<Key>(i) << 32) | j; }
inline std::uint32_t xdeg(Key k) { return static_cast<std::uint32_t>(k >> 32); }
inline std::uint32_t ydeg(Key k) { return static_cast<std::uint32_t>(k & 0xffffffffu); }
inline bool divides(Key a, Key b) { return xdeg(a) <= xdeg(b) && ydeg(a) <= ydeg(b); }

using Term = std::pair<Key, Integer>;

/// Terms sorted by descending key, no zero coefficients.
struct ZPoly {
    std::vector<Term> terms;

    bool empty() const { return terms.empty(); }
    std::size_t size() const { return terms.size(); }
    const Integer& lc() const { return terms.front().second; }
    Key lm() const { return terms.front().first; }
    bool is_constant() const { return terms.size() == 1 && terms.front().first == 0; }
    bool operator==(const ZPoly&) const = default;

    static ZPoly constant(const Integer& c) {
        ZPoly p;
        if (c != 0) p.terms.push_back({0, c});
        return p;
    }

    std::uint32_t total_degree() const {
        std::uint32_t d = 0;
        for (const auto& [k, c] : terms) d = std::max(d, xdeg(k) + ydeg(k));
        return d;
    }
};

inline ZPoly from_accumulator(std::unordered_map<Key, Integer>& acc) {
    ZPoly p;
    p.terms.reserve(acc.size());
    for (auto& [k, c] : acc)
        if (c != 0) p.terms.emplace_back(k, std::move(c));
    std::sort(p.terms.begin(), p.terms.end(), [](const Term& a, const Term& b) { return a.first > b.first; });
    return p;
}

inline void accumulate(std::unordered_map<Key, Integer>& acc, const ZPoly& p, const Integer& scale) {
    for (const auto& [k, c] : p.terms) acc[k] += scale * c;
}

inline ZPoly mul(const ZPoly& a, const ZPoly& b, std::size_t term_cap) {
    if (a.empty() || b.empty()) return {};
    std::unordered_map<Key, Integer> acc;
    acc.reserve(std::min(a.size() * b.size(), term_cap) + 1);
    for (const auto& [ka, ca] : a.terms)
        for (const auto& [kb, cb] : b.terms) {
            auto& slot = acc[ka + kb];
            mpz_addmul(slot.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
        }
    if (acc.size() > term_cap) throw CapacityError("polynomial product exceeds the term cap");
    return from_accumulator(acc);
}

inline Integer content(const ZPoly& a) {
    Integer g = 0;
    for (const auto& [k, c] : a.terms) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

inline ZPoly divide_scalar(ZPoly a, const Integer& s) {
    for (auto& [k, c] : a.terms) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), s.get_mpz_t());
    return a;
}

/// Primitive part with positive leading coefficient.
inline ZPoly primitive(ZPoly a) {
    if (a.empty()) return a;
    Integer c = content(a);
    if (a.lc() < 0) c = -c;
    return divide_scalar(std::move(a), c);
}

/// Exact quotient a / g when g divides a in Z[x, y].
inline std::optional<ZPoly> divide_exact(const ZPoly& a, const ZPoly& g) {
    if (g.empty()) throw PreconditionError("division by the zero polynomial");
    std::map<Key, Integer, std::greater<>> rem;
    for (const auto& [k, c] : a.terms) rem.emplace(k, c);
    ZPoly q;
    const Key lg = g.lm();
    Integer t;
    while (!rem.empty()) {
        auto it = rem.begin();
        if (!divides(lg, it->first)) return std::nullopt;
        if (!mpz_divisible_p(it->second.get_mpz_t(), g.lc().get_mpz_t())) return std::nullopt;
        const Key kq = it->first - lg;
        Integer cq;
        mpz_divexact(cq.get_mpz_t(), it->second.get_mpz_t(), g.lc().get_mpz_t());
        for (const auto& [kg, cg] : g.terms) {
            auto& slot = rem[kq + kg];
            mpz_submul(slot.get_mpz_t(), cq.get_mpz_t(), cg.get_mpz_t());
            if (slot == 0) rem.erase(kq + kg);
        }
        q.terms.emplace_back(kq, std::move(cq));
    }
    return q;
}

namespace detail {

using modp::u64;
using Dense = std::vector<modp::Poly>;  // index = x-degree, entry = polynomial in y

inline u64 reduce(const Integer& c, u64 p) {
    return static_cast<u64>(mpz_fdiv_ui(c.get_mpz_t(), static_cast<unsigned long>(p)));
}

inline Dense to_dense(const ZPoly& a, u64 p) {
    Dense d;
    for (const auto& [k, c] : a.terms) {
        const auto i = xdeg(k), j = ydeg(k);
        if (d.size() <= i) d.resize(i + 1);
        if (d[i].size() <= j) d[i].resize(j + 1, 0);
        d[i][j] = reduce(c, p);
    }
    for (auto& e : d) modp::trim(e);
    while (!d.empty() && d.back().empty()) d.pop_back();
    return d;
}

inline modp::Poly content_y(const Dense& a, u64 p) {
    modp::Poly g;
    for (const auto& e : a) {
        g = modp::gcd(g, e, p);
        if (g.size() == 1) break;
    }
    return g;
}

inline int ydegree(const Dense& a) {
    int d = -1;
    for (const auto& e : a) d = std::max(d, modp::degree(e));
    return d;
}

/// gcd in F_p[x, y] up to a scalar, or nullopt if too many evaluation points were unusable.
inline std::optional<Dense> gcd_mod(const Dense& a0, const Dense& b0, u64 p, u64 start) {
    const modp::Poly ca = content_y(a0, p), cb = content_y(b0, p);
    const modp::Poly c = modp::gcd(ca, cb, p);
    Dense a = a0, b = b0;
    for (auto& e : a) e = modp::divrem(e, ca, p).first;
    for (auto& e : b) e = modp::divrem(e, cb, p).first;
    const modp::Poly& la = a.back();
    const modp::Poly& lb = b.back();
    const modp::Poly gamma = modp::gcd(la, lb, p);
    const int bound = modp::degree(gamma) + std::min(ydegree(a), ydegree(b));

    std::vector<u64> xs;
    std::vector<modp::Poly> images;
    int best = -1;
    int skipped = 0;
    for (u64 t = start % p; static_cast<int>(xs.size()) <= bound; t = (t + 1) % p) {
        if (modp::eval(la, t, p) == 0 || modp::eval(lb, t, p) == 0) {
            if (++skipped > 4 * bound + 64) return std::nullopt;
            continue;
        }
        modp::Poly at(a.size()), bt(b.size());
        for (std::size_t i = 0; i < a.size(); ++i) at[i] = modp::eval(a[i], t, p);
        for (std::size_t i = 0; i < b.size(); ++i) bt[i] = modp::eval(b[i], t, p);
        modp::Poly g = modp::gcd(at, bt, p);
        const int dg = modp::degree(g);
        if (dg == 0) return Dense{c};
        if (best >= 0 && dg > best) {
            if (++skipped > 4 * bound + 64) return std::nullopt;
            continue;
        }
        if (best < 0 || dg < best) {
            best = dg;
            xs.clear();
            images.clear();
        }
        const u64 s = modp::eval(gamma, t, p);
        for (auto& v : g) v = modp::mul(v, s, p);
        xs.push_back(t);
        images.push_back(std::move(g));
    }
    Dense h(static_cast<std::size_t>(best) + 1);
    std::vector<u64> ys(xs.size());
    for (int i = 0; i <= best; ++i) {
        for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = images[k][static_cast<std::size_t>(i)];
        h[static_cast<std::size_t>(i)] = modp::interpolate(xs, ys, p);
    }
    const modp::Poly ch = content_y(h, p);
    for (auto& e : h) e = modp::mul(modp::divrem(e, ch, p).first, c, p);
    return h;
}

}  // namespace detail

/// Primitive gcd of a and b in Z[x, y] with positive leading coefficient.
namespace detail {

/// a(t, y) mod p as a polynomial in y (or a(x, t) in x when swap is set).
inline modp::Poly specialize(const ZPoly& a, u64 t, u64 p, bool swap) {
    std::uint32_t dv = 0, ds = 0;
    for (const auto& [k, c] : a.terms) {
        dv = std::max(dv, swap ? xdeg(k) : ydeg(k));
        ds = std::max(ds, swap ? ydeg(k) : xdeg(k));
    }
    std::vector<u64> pw(ds + 1, 1);
    for (std::uint32_t i = 1; i <= ds; ++i) pw[i] = modp::mul(pw[i - 1], t, p);
    modp::Poly r(dv + 1, 0);
    for (const auto& [k, c] : a.terms) {
        const std::uint32_t v = swap ? xdeg(k) : ydeg(k), e = swap ? ydeg(k) : xdeg(k);
        r[v] = modp::add(r[v], modp::mul(reduce(c, p), pw[e], p), p);
    }
    return r;
}

/// True when a and b provably have no common factor of positive degree in y
/// (or in x when swap is set). The specialisation must keep both leading
/// coefficients, so a gcd of degree 0 there bounds the true degree.
inline bool coprime_in(const ZPoly& a, const ZPoly& b, bool swap) {
    const u64 p = modp::large_prime(0);
    for (u64 t = 2; t < 8; ++t) {
        modp::Poly sa = specialize(a, t, p, swap), sb = specialize(b, t, p, swap);
        const std::size_t na = sa.size(), nb = sb.size();
        modp::trim(sa);
        modp::trim(sb);
        if (sa.size() != na || sb.size() != nb) continue;
        return modp::degree(modp::gcd(sa, sb, p)) == 0;
    }
    return false;
}

}  // namespace detail

inline ZPoly gcd(const ZPoly& a_in, const ZPoly& b_in) {
    if (a_in.empty()) return primitive(b_in);
    if (b_in.empty()) return primitive(a_in);
    const ZPoly a = primitive(a_in), b = primitive(b_in);
    if (a.is_constant() || b.is_constant()) return ZPoly::constant(1);
    // A common factor divides every monomial-free part; check the trivial case of a monomial first.
    if (a.size() == 1 || b.size() == 1) {
        const ZPoly& m = a.size() == 1 ? a : b;
        const ZPoly& o = a.size() == 1 ? b : a;
        std::uint32_t i = xdeg(m.lm()), j = ydeg(m.lm());
        for (const auto& [k, c] : o.terms) {
            i = std::min(i, xdeg(k));
            j = std::min(j, ydeg(k));
        }
        ZPoly r;
        r.terms.push_back({key(i, j), Integer(1)});
        return r;
    }

    if (detail::coprime_in(a, b, false) && detail::coprime_in(a, b, true)) return ZPoly::constant(1);

    Integer gam;
    mpz_gcd(gam.get_mpz_t(), a.lc().get_mpz_t(), b.lc().get_mpz_t());

    std::map<Key, Integer, std::greater<>> residues;  // CRT residues in [0, modulus)
    Integer modulus = 0;
    Key best_lm = 0;
    std::optional<ZPoly> last_lift;

    auto lift = [&]() {
        ZPoly r;
        const Integer half = modulus / 2;
        for (const auto& [k, v] : residues) {
            Integer s = v > half ? Integer(v - modulus) : v;
            if (s != 0) r.terms.emplace_back(k, std::move(s));
        }
        return r;
    };

    for (std::size_t idx = 0; idx < 400; ++idx) {
        const modp::u64 p = modp::large_prime(idx);
        const auto rp = detail::reduce(a.lc(), p), rq = detail::reduce(b.lc(), p);
        if (rp == 0 || rq == 0) continue;
        auto gp = detail::gcd_mod(detail::to_dense(a, p), detail::to_dense(b, p), p, 1 + 7919 * idx);
        if (!gp) continue;
        ZPoly img;
        {
            // collect terms, scaled so the leading coefficient is gam mod p
            std::vector<std::pair<Key, modp::u64>> t;
            for (std::size_t i = gp->size(); i-- > 0;)
                for (std::size_t j = (*gp)[i].size(); j-- > 0;)
                    if ((*gp)[i][j]) t.emplace_back(key(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)), (*gp)[i][j]);
            if (t.size() == 1 && t.front().first == 0) return ZPoly::constant(1);
            const modp::u64 s = modp::mul(detail::reduce(gam, p), modp::inv(t.front().second, p), p);
            for (auto& [k, v] : t) img.terms.emplace_back(k, Integer(static_cast<unsigned long>(modp::mul(v, s, p))));
        }
        const Key lm = img.lm();
        if (modulus == 0 || lm < best_lm) {
            residues.clear();
            for (auto& [k, v] : img.terms) residues.emplace(k, v);
            modulus = Integer(static_cast<unsigned long>(p));
            best_lm = lm;
            last_lift.reset();
            continue;
        }
        if (lm > best_lm) continue;
        // CRT: x = r + M * ((v - r) * M^{-1} mod p)
        const modp::u64 minv = modp::inv(detail::reduce(modulus, p), p);
        std::map<Key, Integer, std::greater<>> merged;
        auto combine = [&](Key k, const Integer& r, modp::u64 v) {
            const modp::u64 rr = detail::reduce(r, p);
            const modp::u64 h = modp::mul(modp::sub(v, rr, p), minv, p);
            Integer x = r + modulus * Integer(static_cast<unsigned long>(h));
            if (x != 0) merged.emplace(k, std::move(x));
        };
        std::map<Key, modp::u64, std::greater<>> vals;
        for (const auto& [k, v] : img.terms) vals.emplace(k, static_cast<modp::u64>(v.get_ui()));
        for (const auto& [k, r] : residues) combine(k, r, vals.count(k) ? vals[k] : 0);
        for (const auto& [k, v] : vals)
            if (!residues.count(k)) combine(k, Integer(0), v);
        const ZPoly before = lift();
        residues = std::move(merged);
        modulus *= static_cast<unsigned long>(p);
        const ZPoly after = lift();
        if (before == after) {
            ZPoly cand = primitive(after);
            if (!last_lift || !(*last_lift == cand)) {
                last_lift = cand;
                if (divide_exact(a, cand) && divide_exact(b, cand)) return cand;
            }
        }
    }
    throw NumericalFailure("modular gcd did not stabilise");
}

}  // namespace rzdyn::poly
