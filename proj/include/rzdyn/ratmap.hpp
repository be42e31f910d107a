#pragma once

// Rational self-maps of P^2 given by three homogeneous polynomials.
//
// Component syntax: a sum of terms separated by + or -, each term a
// *-separated product of an optional rational coefficient (7, 3/2) and
// variables X, Y, Z (any case) with optional ^exponent.
// Example: "3/2*X^2*Z - Y*Z^2 + X^3".

#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "modp.hpp"
#include "polygcd.hpp"
#include "rational.hpp"
#include "toric.hpp"

namespace rzdyn {

using Exponent = std::array<int, 3>;

class HomPoly {
public:
    HomPoly() = default;

    HomPoly(int degree, std::map<Exponent, Rational, std::greater<>> terms) : degree_(degree) {
        if (degree < 0) throw ValidationError("negative degree");
        for (auto& [e, c] : terms) {
            if (e[0] < 0 || e[1] < 0 || e[2] < 0) throw ValidationError("negative exponent");
            if (e[0] + e[1] + e[2] != degree) throw ValidationError("polynomial is not homogeneous of degree " + std::to_string(degree));
            if (c != 0) terms_.emplace(e, std::move(c));
        }
    }

    /// Parses a component string; the degree is inferred from the terms.
    static HomPoly parse(std::string_view text);

    int degree() const noexcept { return degree_; }
    const std::map<Exponent, Rational, std::greater<>>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    bool operator==(const HomPoly&) const = default;

    Rational evaluate(const Rational& x, const Rational& y, const Rational& z) const {
        Rational s = 0;
        for (const auto& [e, c] : terms_) {
            Rational t = c;
            for (int i = 0; i < e[0]; ++i) t *= x;
            for (int i = 0; i < e[1]; ++i) t *= y;
            for (int i = 0; i < e[2]; ++i) t *= z;
            s += t;
        }
        return s;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        static const char* names = "XYZ";
        for (const auto& [e, c] : terms_) {
            std::string coef = (c < 0 ? Rational(-c) : c).get_str();
            if (out.empty())
                out += c < 0 ? "-" : "";
            else
                out += c < 0 ? " - " : " + ";
            std::string mono;
            for (int v = 0; v < 3; ++v) {
                if (e[v] == 0) continue;
                if (!mono.empty()) mono += "*";
                mono += names[v];
                if (e[v] > 1) mono += "^" + std::to_string(e[v]);
            }
            if (mono.empty())
                out += coef;
            else if (coef == "1")
                out += mono;
            else
                out += coef + "*" + mono;
        }
        return out;
    }

private:
    int degree_ = 0;
    std::map<Exponent, Rational, std::greater<>> terms_;
};

inline HomPoly HomPoly::parse(std::string_view text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw ValidationError("empty polynomial");
    std::map<Exponent, Rational, std::greater<>> acc;
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) { throw ValidationError("cannot parse '" + std::string(text) + "': " + why); };
    auto read_uint = [&]() {
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected a number at position " + std::to_string(start));
        if (pos - start > 9) fail("number too long");
        return s.substr(start, pos - start);
    };
    int degree = -1;
    while (pos < s.size()) {
        int sign = 1;
        if (s[pos] == '+' || s[pos] == '-') {
            sign = s[pos] == '-' ? -1 : 1;
            ++pos;
        } else if (pos != 0) {
            fail("expected + or - at position " + std::to_string(pos));
        }
        Rational coef = sign;
        Exponent e{0, 0, 0};
        bool first = true;
        for (;;) {
            if (!first) {
                if (pos < s.size() && s[pos] == '*')
                    ++pos;
                else
                    break;
            }
            first = false;
            if (pos >= s.size()) fail("unexpected end");
            const char ch = static_cast<char>(std::toupper(static_cast<unsigned char>(s[pos])));
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                std::string num = read_uint();
                if (pos < s.size() && s[pos] == '/') {
                    ++pos;
                    num += "/" + read_uint();
                }
                coef *= parse_rational(num);
            } else if (ch == 'X' || ch == 'Y' || ch == 'Z') {
                ++pos;
                int power = 1;
                if (pos < s.size() && s[pos] == '^') {
                    ++pos;
                    power = std::stoi(read_uint());
                }
                e[static_cast<std::size_t>(ch - 'X')] += power;
            } else {
                fail(std::string("unexpected character '") + s[pos] + "'");
            }
        }
        const int d = e[0] + e[1] + e[2];
        if (degree >= 0 && d != degree) fail("terms of different degrees");
        degree = d;
        acc[e] += coef;
    }
    return HomPoly(degree, std::move(acc));
}

inline constexpr std::size_t kDefaultTermCap = 2'000'000;

namespace detail {

struct ZHom {
    int degree = 0;
    poly::ZPoly p;
};

inline ZHom to_zhom(const HomPoly& h, const Integer& scale) {
    ZHom z{h.degree(), {}};
    for (const auto& [e, c] : h.terms()) {
        Rational v = c * scale;
        if (v.get_den() != 1) throw PreconditionError("scale does not clear denominators");
        z.p.terms.emplace_back(poly::key(static_cast<std::uint32_t>(e[0]), static_cast<std::uint32_t>(e[1])), v.get_num());
    }
    std::sort(z.p.terms.begin(), z.p.terms.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    return z;
}

inline HomPoly to_hompoly(const ZHom& z) {
    std::map<Exponent, Rational, std::greater<>> t;
    for (const auto& [k, c] : z.p.terms) {
        const int i = static_cast<int>(poly::xdeg(k)), j = static_cast<int>(poly::ydeg(k));
        t.emplace(Exponent{i, j, z.degree - i - j}, Rational(c));
    }
    return HomPoly(z.degree, std::move(t));
}

}  // namespace detail

/// A rational map of P^2: three coprime integer-coefficient components of equal degree,
/// content-free and with positive leading coefficient in the first nonzero component.
class HomMap {
public:
    explicit HomMap(const std::array<HomPoly, 3>& components) {
        int d = -1;
        Integer den = 1;
        for (const auto& c : components) {
            if (c.is_zero()) continue;
            if (d >= 0 && c.degree() != d) throw ValidationError("components have different degrees");
            d = c.degree();
            for (const auto& [e, q] : c.terms()) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), q.get_den_mpz_t());
        }
        if (d < 0) throw DegeneracyError("all components are zero");
        for (std::size_t i = 0; i < 3; ++i) {
            comp_[i] = components[i].is_zero() ? detail::ZHom{d, {}} : detail::to_zhom(components[i], den);
            comp_[i].degree = d;
        }
        normalize();
    }

    static HomMap parse(const std::array<std::string, 3>& components) {
        return HomMap({HomPoly::parse(components[0]), HomPoly::parse(components[1]), HomPoly::parse(components[2])});
    }

    static HomMap identity() { return parse({"X", "Y", "Z"}); }

    /// Homogenisation of (x, y) -> (x^a y^b, x^c y^d) in the chart Z = 1.
    static HomMap from_monomial(const MonomialMatrix& A) {
        const long long ex = std::max({0LL, -A.a, -A.c});
        const long long ey = std::max({0LL, -A.b, -A.d});
        const long long ez = std::max({0LL, A.a + A.b, A.c + A.d});
        const long long deg = ex + ey + ez;
        if (deg > 1'000'000) throw CapacityError("monomial map degree too large");
        auto mono = [&](long long i, long long j) {
            std::map<Exponent, Rational, std::greater<>> t;
            t.emplace(Exponent{static_cast<int>(i), static_cast<int>(j), static_cast<int>(deg - i - j)}, Rational(1));
            return HomPoly(static_cast<int>(deg), std::move(t));
        };
        return HomMap({mono(A.a + ex, A.b + ey), mono(A.c + ex, A.d + ey), mono(ex, ey)});
    }

    int degree() const noexcept { return comp_[0].degree; }

    std::array<HomPoly, 3> components() const {
        return {detail::to_hompoly(comp_[0]), detail::to_hompoly(comp_[1]), detail::to_hompoly(comp_[2])};
    }

    HomPoly component(std::size_t i) const { return detail::to_hompoly(comp_.at(i)); }

    std::size_t term_count() const { return comp_[0].p.size() + comp_[1].p.size() + comp_[2].p.size(); }

    bool operator==(const HomMap& o) const {
        for (std::size_t i = 0; i < 3; ++i)
            if (comp_[i].degree != o.comp_[i].degree || !(comp_[i].p == o.comp_[i].p)) return false;
        return true;
    }

    std::array<std::string, 3> to_strings() const {
        return {component(0).to_string(), component(1).to_string(), component(2).to_string()};
    }

    /// f o g.
    friend HomMap compose(const HomMap& f, const HomMap& g, std::size_t term_cap);

    const std::array<detail::ZHom, 3>& raw() const noexcept { return comp_; }

private:
    HomMap() = default;

    void normalize() {
        // common monomial factor
        std::uint32_t mi = UINT32_MAX, mj = UINT32_MAX;
        int mk = INT32_MAX;
        bool any = false;
        for (const auto& c : comp_)
            for (const auto& [k, v] : c.p.terms) {
                any = true;
                mi = std::min(mi, poly::xdeg(k));
                mj = std::min(mj, poly::ydeg(k));
                mk = std::min(mk, c.degree - static_cast<int>(poly::xdeg(k) + poly::ydeg(k)));
            }
        if (!any) throw DegeneracyError("map is identically zero");
        const poly::Key shift = poly::key(mi, mj);
        const int drop = static_cast<int>(mi + mj) + mk;
        for (auto& c : comp_) {
            for (auto& [k, v] : c.p.terms) k -= shift;
            c.degree -= drop;
        }
        // common polynomial factor, computed in the affine chart Z = 1
        poly::ZPoly g;
        for (const auto& c : comp_) {
            if (c.p.empty()) continue;
            g = g.empty() ? poly::primitive(c.p) : poly::gcd(g, c.p);
            if (g.is_constant()) break;
        }
        if (!g.is_constant()) {
            const int e = static_cast<int>(g.total_degree());
            for (auto& c : comp_) {
                if (c.p.empty()) {
                    c.degree -= e;
                    continue;
                }
                auto q = poly::divide_exact(c.p, g);
                if (!q) throw NumericalFailure("common factor does not divide a component");
                c.p = std::move(*q);
                c.degree -= e;
            }
        }
        // integer content and sign
        Integer cont = 0;
        for (const auto& c : comp_) {
            const Integer ci = poly::content(c.p);
            mpz_gcd(cont.get_mpz_t(), cont.get_mpz_t(), ci.get_mpz_t());
        }
        for (const auto& c : comp_)
            if (!c.p.empty()) {
                if (c.p.lc() < 0) cont = -cont;
                break;
            }
        for (auto& c : comp_) c.p = poly::divide_scalar(std::move(c.p), cont);
    }

    std::array<detail::ZHom, 3> comp_;
};

inline HomMap compose(const HomMap& f, const HomMap& g, std::size_t term_cap = kDefaultTermCap) {
    const int df = f.degree();
    const int dg = g.degree();
    // powers[v][e] = g_v^e
    std::array<std::vector<poly::ZPoly>, 3> powers;
    int maxe[3] = {0, 0, 0};
    for (const auto& c : f.comp_)
        for (const auto& [k, v] : c.p.terms) {
            maxe[0] = std::max(maxe[0], static_cast<int>(poly::xdeg(k)));
            maxe[1] = std::max(maxe[1], static_cast<int>(poly::ydeg(k)));
            maxe[2] = std::max(maxe[2], df - static_cast<int>(poly::xdeg(k) + poly::ydeg(k)));
        }
    for (std::size_t v = 0; v < 3; ++v) {
        powers[v].push_back(poly::ZPoly::constant(1));
        for (int e = 1; e <= maxe[v]; ++e) powers[v].push_back(poly::mul(powers[v].back(), g.comp_[v].p, term_cap));
    }
    HomMap h;
    for (std::size_t m = 0; m < 3; ++m) {
        std::unordered_map<poly::Key, Integer> acc;
        for (const auto& [k, c] : f.comp_[m].p.terms) {
            const auto i = poly::xdeg(k), j = poly::ydeg(k);
            const auto l = static_cast<std::uint32_t>(df) - i - j;
            poly::ZPoly t = poly::mul(poly::mul(powers[0][i], powers[1][j], term_cap), powers[2][l], term_cap);
            poly::accumulate(acc, t, c);
            if (acc.size() > term_cap) throw CapacityError("composition exceeds the term cap");
        }
        h.comp_[m] = {df * dg, poly::from_accumulator(acc)};
    }
    if (h.comp_[0].p.empty() && h.comp_[1].p.empty() && h.comp_[2].p.empty())
        throw DegeneracyError("composition is identically zero");
    h.normalize();
    return h;
}

/// deg(f), deg(f^2), ..., deg(f^n_max) with f^{n+1} = f o f^n. A CapacityError carries the finished prefix.
inline std::vector<long long> degree_sequence(const HomMap& f, unsigned n_max, std::size_t term_cap = kDefaultTermCap) {
    std::vector<long long> out;
    if (n_max == 0) return out;
    out.push_back(f.degree());
    HomMap g = f;
    for (unsigned n = 2; n <= n_max; ++n) {
        try {
            g = compose(f, g, term_cap);
        } catch (const CapacityError& e) {
            throw CapacityError(e.what(), out);
        }
        out.push_back(g.degree());
    }
    return out;
}

struct StabilityReport {
    bool stable = true;
    std::optional<std::size_t> first_unstable;  // n with deg f^n != (deg f)^n
    bool submultiplicative = true;              // deg f^{n+m} <= 2 deg f^n deg f^m
    bool strictly_submultiplicative = true;     // same with factor 1
};

inline StabilityReport stability_report(const std::vector<long long>& degs) {
    if (degs.empty()) throw InsufficientData("empty degree sequence");
    StabilityReport r;
    Integer power = 1;
    for (std::size_t n = 1; n <= degs.size(); ++n) {
        power *= static_cast<signed long>(degs[0]);
        if (r.stable && Integer(static_cast<signed long>(degs[n - 1])) != power) {
            r.stable = false;
            r.first_unstable = n;
        }
    }
    for (std::size_t n = 1; n <= degs.size(); ++n)
        for (std::size_t m = 1; n + m <= degs.size(); ++m) {
            const Integer lhs = static_cast<signed long>(degs[n + m - 1]);
            const Integer rhs = Integer(static_cast<signed long>(degs[n - 1])) * static_cast<signed long>(degs[m - 1]);
            if (lhs > 2 * rhs) r.submultiplicative = false;
            if (lhs > rhs) r.strictly_submultiplicative = false;
        }
    return r;
}

namespace detail {

inline Integer pow_int(const Integer& b, int e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(e));
    return r;
}

/// Partial derivative of component c with respect to variable v at integer point x.
inline Integer partial_at(const ZHom& c, int v, const std::array<Integer, 3>& x) {
    Integer s = 0;
    for (const auto& [k, coef] : c.p.terms) {
        std::array<int, 3> e{static_cast<int>(poly::xdeg(k)), static_cast<int>(poly::ydeg(k)), 0};
        e[2] = c.degree - e[0] - e[1];
        if (e[static_cast<std::size_t>(v)] == 0) continue;
        Integer t = coef * e[static_cast<std::size_t>(v)];
        for (std::size_t u = 0; u < 3; ++u) t *= pow_int(x[u], e[u] - (static_cast<int>(u) == v ? 1 : 0));
        s += t;
    }
    return s;
}

}  // namespace detail

/// Generic-point Jacobian test: true if det dF/dX is nonzero at one of several seeded random points.
inline bool is_dominant(const HomMap& f, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> dist(-997, 997);
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::array<Integer, 3> x{Integer(dist(rng)), Integer(dist(rng)), Integer(dist(rng))};
        Integer j[3][3];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) j[r][c] = detail::partial_at(f.raw()[static_cast<std::size_t>(r)], c, x);
        const Integer det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
                            j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
        if (det != 0) return true;
    }
    return false;
}

inline void require_dominant(const HomMap& f, std::uint64_t seed = 1) {
    if (!is_dominant(f, seed)) throw DominanceError("Jacobian vanishes at every sampled point; map is not dominant");
}

enum class DegreeMode { MonomialExact, FiberCount, UserSupplied };

struct TopologicalDegree {
    long long value = 0;
    std::string provenance;  // "exact", "heuristic" or "user"
    std::uint64_t seed = 0;
    int attempts = 0;
};

inline TopologicalDegree topological_degree(const MonomialMatrix& A) {
    A.require_dominant();
    return {std::llabs(A.determinant()), "exact", 0, 0};
}

inline TopologicalDegree topological_degree_user(long long value) {
    if (value < 1) throw ValidationError("topological degree must be positive");
    return {value, "user", 0, 0};
}

namespace detail {

using modp::u64;
using Grid = std::vector<std::vector<u64>>;  // [x-degree][y-degree], square of side d+1

inline Grid grid_mul(const Grid& a, const Grid& b, std::size_t side, u64 p) {
    Grid c(side, std::vector<u64>(side, 0));
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; i + j < side; ++j) {
            if (!a[i][j]) continue;
            for (std::size_t k = 0; i + k < side; ++k)
                for (std::size_t l = 0; j + l < side && i + k + j + l < side; ++l)
                    if (b[k][l]) c[i + k][j + l] = modp::add(c[i + k][j + l], modp::mul(a[i][j], b[k][l], p), p);
        }
    return c;
}

/// Components of f o L dehomogenised at Z = 1, reduced mod p.
inline std::array<Grid, 3> substitute_linear(const HomMap& f, const std::array<std::array<u64, 3>, 3>& L, u64 p) {
    const std::size_t side = static_cast<std::size_t>(f.degree()) + 1;
    std::array<std::vector<Grid>, 3> pw;
    for (std::size_t v = 0; v < 3; ++v) {
        Grid one(side, std::vector<u64>(side, 0));
        one[0][0] = 1;
        Grid lin(side, std::vector<u64>(side, 0));
        if (side > 1) {
            lin[1][0] = L[v][0];
            lin[0][1] = L[v][1];
        }
        lin[0][0] = L[v][2];
        pw[v].push_back(one);
        for (std::size_t e = 1; e < side; ++e) pw[v].push_back(grid_mul(pw[v].back(), lin, side, p));
    }
    std::array<Grid, 3> out;
    for (std::size_t m = 0; m < 3; ++m) {
        Grid acc(side, std::vector<u64>(side, 0));
        for (const auto& [k, c] : f.raw()[m].p.terms) {
            const auto i = poly::xdeg(k), j = poly::ydeg(k);
            const auto l = static_cast<std::uint32_t>(f.degree()) - i - j;
            const Grid t = grid_mul(grid_mul(pw[0][i], pw[1][j], side, p), pw[2][l], side, p);
            const u64 cm = poly::detail::reduce(c, p);
            for (std::size_t a = 0; a < side; ++a)
                for (std::size_t b = 0; b < side; ++b) acc[a][b] = modp::add(acc[a][b], modp::mul(cm, t[a][b], p), p);
        }
        out[m] = std::move(acc);
    }
    return out;
}

inline Grid combine(const std::array<Grid, 3>& g, const std::array<u64, 3>& w, u64 p) {
    Grid r = g[0];
    for (std::size_t a = 0; a < r.size(); ++a)
        for (std::size_t b = 0; b < r.size(); ++b) {
            u64 s = 0;
            for (std::size_t m = 0; m < 3; ++m) s = modp::add(s, modp::mul(w[m], g[m][a][b], p), p);
            r[a][b] = s;
        }
    return r;
}

/// Res_y(g, h) as a polynomial in x, or nullopt when the y-leading coefficients vanish.
inline std::optional<modp::Poly> resultant_y(const Grid& g, const Grid& h, u64 p) {
    const std::size_t side = g.size();
    const std::size_t d = side - 1;
    if (g[0][d] == 0 || h[0][d] == 0) return std::nullopt;
    const std::size_t npts = d * d + 1;
    std::vector<u64> xs(npts), ys(npts);
    for (std::size_t t = 0; t < npts; ++t) {
        const u64 x = t + 1;
        modp::Poly gy(side, 0), hy(side, 0);
        for (std::size_t j = 0; j < side; ++j) {
            u64 sg = 0, sh = 0;
            for (std::size_t i = side; i-- > 0;) {
                sg = modp::add(modp::mul(sg, x, p), g[i][j], p);
                sh = modp::add(modp::mul(sh, x, p), h[i][j], p);
            }
            gy[j] = sg;
            hy[j] = sh;
        }
        xs[t] = x;
        ys[t] = modp::resultant(gy, hy, p);
    }
    return modp::interpolate(xs, ys, p);
}

}  // namespace detail

/// Number of preimages of a random point, counted over F_p after a random change of
/// coordinates, minus the number of base points. A generic-target heuristic.
inline TopologicalDegree topological_degree_fiber(const HomMap& f, std::uint64_t seed = 1) {
    using modp::u64;
    const u64 p = modp::large_prime(0);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<u64> dist(1, p - 1);
    auto count_once = [&]() -> std::optional<long long> {
        std::array<std::array<u64, 3>, 3> L;
        for (auto& r : L)
            for (auto& x : r) x = dist(rng);
        const auto g = detail::substitute_linear(f, L, p);
        const std::array<u64, 3> q{dist(rng), dist(rng), dist(rng)};
        // fiber equations q2 F0 - q0 F2 = 0, q2 F1 - q1 F2 = 0
        const auto g1 = detail::combine(g, {q[2], 0, p - q[0]}, p);
        const auto g2 = detail::combine(g, {0, q[2], p - q[1]}, p);
        const auto r = detail::resultant_y(g1, g2, p);
        if (!r || r->empty()) return std::nullopt;
        const int total = modp::squarefree_degree(*r, p);
        // base points: common roots of three generic combinations
        const auto h1 = detail::combine(g, {dist(rng), dist(rng), dist(rng)}, p);
        const auto h2 = detail::combine(g, {dist(rng), dist(rng), dist(rng)}, p);
        const auto h3 = detail::combine(g, {dist(rng), dist(rng), dist(rng)}, p);
        const auto r12 = detail::resultant_y(h1, h2, p);
        const auto r13 = detail::resultant_y(h1, h3, p);
        if (!r12 || !r13 || r12->empty() || r13->empty()) return std::nullopt;
        const modp::Poly b = modp::gcd(*r12, *r13, p);
        const int base = b.empty() ? 0 : modp::squarefree_degree(b, p);
        const long long e = total - base;
        if (e <= 0) return std::nullopt;
        return e;
    };
    for (int attempt = 1; attempt <= 5; ++attempt) {
        const auto a = count_once();
        const auto b = count_once();
        if (a && b && *a == *b) return {*a, "heuristic", seed, attempt};
    }
    throw HeuristicFailure("fiber count inconclusive after 5 attempts");
}

// ---------------------------------------------------------------------------
// JSON: {"components": ["...", "...", "..."]} or {"monomial": [[a, b], [c, d]]}.

struct MapSpec {
    std::string name;
    std::optional<MonomialMatrix> monomial;
    std::optional<HomMap> map;
    std::optional<long long> topological_degree;  // user-supplied
};

inline MonomialMatrix monomial_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || j[0].size() != 2 || j[1].size() != 2)
        throw ValidationError("monomial matrix must be [[a, b], [c, d]]");
    MonomialMatrix A{j[0][0].get<long long>(), j[0][1].get<long long>(), j[1][0].get<long long>(), j[1][1].get<long long>()};
    A.require_dominant();
    return A;
}

inline MapSpec map_spec_from_json(const nlohmann::json& j) {
    try {
        MapSpec s;
        s.name = j.value("name", "");
        if (j.contains("topological_degree")) s.topological_degree = j.at("topological_degree").get<long long>();
        if (j.contains("monomial")) {
            s.monomial = monomial_from_json(j.at("monomial"));
            s.map = HomMap::from_monomial(*s.monomial);
        } else if (j.contains("components")) {
            const auto& c = j.at("components");
            if (!c.is_array() || c.size() != 3) throw ValidationError("components must be an array of three strings");
            s.map = HomMap::parse({c[0].get<std::string>(), c[1].get<std::string>(), c[2].get<std::string>()});
        } else {
            throw ValidationError("map JSON needs 'components' or 'monomial'");
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad map JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const HomMap& f) {
    const auto s = f.to_strings();
    return {{"degree", f.degree()}, {"components", {s[0], s[1], s[2]}}};
}

inline nlohmann::json to_json(const StabilityReport& r) {
    nlohmann::json j{{"stable", r.stable},
                     {"submultiplicative", r.submultiplicative},
                     {"strictly_submultiplicative", r.strictly_submultiplicative}};
    j["first_unstable"] = r.first_unstable ? nlohmann::json(*r.first_unstable) : nlohmann::json(nullptr);
    return j;
}

}  // namespace rzdyn
