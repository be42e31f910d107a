#pragma once

// Smooth complete toric surfaces and monomial maps between them.
//
// A fan is a counter-clockwise cyclic list of primitive rays v_0..v_{n-1}
// with det(v_i, v_{i+1}) = 1. A torus-invariant divisor D = sum a_i D_i is
// stored by its coefficient vector; its support function phi_D is the
// function linear on each cone with phi_D(v_i) = a_i. Pullback by a toric
// morphism with lattice map A is phi_D o A.
//
// Intersection numbers: adjacent boundary divisors meet once and
// (D_i^2) = -b_i where v_{i-1} + v_{i+1} = b_i v_i. Anchors: P^2 has
// b_i = -1, so (D_i^2) = +1; a star subdivision ray has b = 1, so (E^2) = -1.
//
// Class-group coordinates: a divisor is normalised by adding div(chi^m)
// until its coefficients on rays 0 and 1 vanish; the remaining n-2
// coefficients are the class coordinates.

#include <algorithm>
#include <array>
#include <climits>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "classlat.hpp"
#include "errors.hpp"
#include "rational.hpp"

namespace rzdyn {

struct Vec2 {
    long long x = 0;
    long long y = 0;
    bool operator==(const Vec2&) const = default;
    auto operator<=>(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline long long det(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline long long dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

inline Vec2 primitive(Vec2 v) {
    long long g = std::gcd(v.x < 0 ? -v.x : v.x, v.y < 0 ? -v.y : v.y);
    if (g == 0) throw ValidationError("zero vector has no primitive direction");
    return {v.x / g, v.y / g};
}

inline std::string to_string(Vec2 v) { return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")"; }

namespace detail {

inline long long checked_mul(long long a, long long b) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r)) throw CapacityError("64-bit overflow in exponent matrix");
    return r;
}

inline long long checked_add(long long a, long long b) {
    long long r;
    if (__builtin_add_overflow(a, b, &r)) throw CapacityError("64-bit overflow in exponent matrix");
    return r;
}

}  // namespace detail

/// Exponent matrix of (x, y) -> (x^a y^b, x^c y^d); also the induced lattice map on cocharacters.
struct MonomialMatrix {
    long long a = 1, b = 0, c = 0, d = 1;

    bool operator==(const MonomialMatrix&) const = default;

    static MonomialMatrix identity() { return {}; }

    long long determinant() const { return a * d - b * c; }

    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    /// Direction of A^{-1} v, scaled to a primitive vector.
    Vec2 preimage_direction(Vec2 v) const {
        const long long s = determinant() > 0 ? 1 : -1;
        return primitive(Vec2{s * (d * v.x - b * v.y), s * (-c * v.x + a * v.y)});
    }

    friend MonomialMatrix operator*(const MonomialMatrix& l, const MonomialMatrix& r) {
        using detail::checked_add;
        using detail::checked_mul;
        return {checked_add(checked_mul(l.a, r.a), checked_mul(l.b, r.c)),
                checked_add(checked_mul(l.a, r.b), checked_mul(l.b, r.d)),
                checked_add(checked_mul(l.c, r.a), checked_mul(l.d, r.c)),
                checked_add(checked_mul(l.c, r.b), checked_mul(l.d, r.d))};
    }

    MonomialMatrix power(unsigned n) const {
        MonomialMatrix r = identity();
        for (unsigned i = 0; i < n; ++i) r = r * *this;
        return r;
    }

    void require_dominant() const {
        if (determinant() == 0) throw DominanceError("monomial matrix has zero determinant");
    }
};

class Fan {
public:
    Fan() = default;
    explicit Fan(std::vector<Vec2> rays) : rays_(std::move(rays)) {}

    const std::vector<Vec2>& rays() const noexcept { return rays_; }
    std::size_t size() const noexcept { return rays_.size(); }
    const Vec2& ray(std::size_t i) const { return rays_[i % rays_.size()]; }

    std::size_t class_rank() const { return rays_.size() - 2; }

    bool operator==(const Fan&) const = default;

    /// b_i with v_{i-1} + v_{i+1} = b_i v_i; requires smoothness.
    long long bend_coefficient(std::size_t i) const {
        const std::size_t n = rays_.size();
        Vec2 s = rays_[(i + n - 1) % n] + rays_[(i + 1) % n];
        const Vec2& v = rays_[i];
        return v.x != 0 ? s.x / v.x : s.y / v.y;
    }

    /// Index j of a cone (v_j, v_{j+1}) containing v (closed cone); the first one found.
    std::size_t cone_containing(Vec2 v) const {
        const std::size_t n = rays_.size();
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2& l = rays_[j];
            const Vec2& r = rays_[(j + 1) % n];
            if (det(l, v) >= 0 && det(v, r) >= 0) return j;
        }
        throw ValidationError("vector " + to_string(v) + " not covered by the fan");
    }

    /// Index of a ray equal to v, if any.
    std::optional<std::size_t> find_ray(Vec2 v) const {
        for (std::size_t i = 0; i < rays_.size(); ++i)
            if (rays_[i] == v) return i;
        return std::nullopt;
    }

    void insert_after(std::size_t i, Vec2 v) { rays_.insert(rays_.begin() + static_cast<long>(i + 1), v); }

private:
    std::vector<Vec2> rays_;
};

inline Fan p2_fan() { return Fan({{1, 0}, {0, 1}, {-1, -1}}); }

inline bool is_smooth_complete(const Fan& f) {
    const std::size_t n = f.size();
    if (n < 3) return false;
    int crossings = 0;
    auto upper = [](Vec2 v) { return v.y > 0 || (v.y == 0 && v.x > 0); };
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& v = f.ray(i);
        const Vec2& w = f.ray(i + 1);
        if (std::gcd(v.x < 0 ? -v.x : v.x, v.y < 0 ? -v.y : v.y) != 1) return false;
        if (det(v, w) != 1) return false;
        // steps have angle < pi, so the winding number counts passes through the positive x-axis
        if (!upper(v) && upper(w)) ++crossings;
    }
    return crossings == 1;
}

inline void require_smooth_complete(const Fan& f) {
    if (!is_smooth_complete(f)) throw ValidationError("fan is not smooth and complete");
}

inline Fan star_subdivide(const Fan& f, std::size_t i) {
    require_smooth_complete(f);
    if (i >= f.size()) throw ValidationError("wall index out of range");
    Fan g = f;
    g.insert_after(i, f.ray(i) + f.ray(i + 1));
    return g;
}

/// Boundary-divisor intersection numbers.
inline QMatrix intersection_matrix(const Fan& f) {
    require_smooth_complete(f);
    const std::size_t n = f.size();
    QMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = rat(-f.bend_coefficient(i));
        m(i, (i + 1) % n) += 1;
        m((i + 1) % n, i) += 1;
    }
    return m;
}

/// (D . D') for two divisors given by ray coefficients.
inline Rational divisor_pairing(const Fan& f, const QVector& a, const QVector& b) {
    const std::size_t n = f.size();
    Rational s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0) continue;
        Rational col = rat(-f.bend_coefficient(i)) * b[i];
        col += b[(i + n - 1) % n] + b[(i + 1) % n];
        s += a[i] * col;
    }
    return s;
}

/// Value of the support function of divisor a at an arbitrary lattice vector.
inline Rational support_value(const Fan& f, const QVector& a, Vec2 v) {
    const std::size_t j = f.cone_containing(v);
    const Vec2& l = f.ray(j);
    const Vec2& r = f.ray(j + 1);
    // v = s l + t r with det(l, r) = 1
    const long long s = det(v, r);
    const long long t = det(l, v);
    return rat(s) * a[j] + rat(t) * a[(j + 1) % f.size()];
}

inline QVector divisor_to_class(const Fan& f, const QVector& a) {
    const Vec2& v0 = f.ray(0);
    const Vec2& v1 = f.ray(1);
    // Solve <m, v0> = -a0, <m, v1> = -a1 with det(v0, v1) = 1.
    const Rational mx = (-a[0] * rat(v1.y) + a[1] * rat(v0.y));
    const Rational my = (-a[1] * rat(v0.x) + a[0] * rat(v1.x));
    QVector c;
    c.reserve(f.size() - 2);
    for (std::size_t i = 2; i < f.size(); ++i) c.push_back(a[i] + mx * rat(f.ray(i).x) + my * rat(f.ray(i).y));
    return c;
}

inline QVector class_to_divisor(const Fan& f, const QVector& c) {
    if (c.size() != f.class_rank()) throw ValidationError("class vector has wrong rank for fan");
    QVector a(f.size(), Rational(0));
    for (std::size_t i = 2; i < f.size(); ++i) a[i] = c[i - 2];
    return a;
}

/// Intersection form on class-group coordinates.
inline QMatrix class_gram(const Fan& f) {
    const QMatrix m = intersection_matrix(f);
    const std::size_t r = f.class_rank();
    QMatrix g(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) g(i, j) = m(i + 2, j + 2);
    return g;
}

inline Rational class_pairing(const Fan& f, const QVector& c, const QVector& d) {
    return divisor_pairing(f, class_to_divisor(f, c), class_to_divisor(f, d));
}

/// Class of the boundary divisor D_i.
inline QVector boundary_class(const Fan& f, std::size_t i) {
    QVector a(f.size(), Rational(0));
    a[i] = 1;
    return divisor_to_class(f, a);
}

inline QVector canonical_divisor(const Fan& f) { return QVector(f.size(), Rational(-1)); }

// ---------------------------------------------------------------------------
// Toric morphisms.

inline bool cone_contains(Vec2 l, Vec2 r, Vec2 v) { return det(l, v) >= 0 && det(v, r) >= 0; }

/// True iff A maps every cone of src into a single cone of tgt.
inline bool is_holomorphic(const MonomialMatrix& A, const Fan& src, const Fan& tgt) {
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec2 p = A.apply(src.ray(i));
        const Vec2 q = A.apply(src.ray(i + 1));
        bool ok = false;
        for (std::size_t j = 0; j < tgt.size() && !ok; ++j)
            ok = cone_contains(tgt.ray(j), tgt.ray(j + 1), p) && cone_contains(tgt.ray(j), tgt.ray(j + 1), q);
        if (!ok) return false;
    }
    return true;
}

/// Adds ray w to a smooth fan by repeated star subdivision of the cone containing it.
inline void insert_by_star_subdivision(Fan& f, Vec2 w, std::size_t ray_cap) {
    for (;;) {
        const std::size_t j = f.cone_containing(w);
        const Vec2 l = f.ray(j);
        const Vec2 r = f.ray(j + 1);
        if (l == w || r == w) return;
        if (f.size() >= ray_cap) throw CapacityError("fan refinement exceeded the ray cap");
        f.insert_after(j, l + r);
    }
}

inline constexpr std::size_t kDefaultRayCap = 200000;

/// Smooth refinement of source, by star subdivisions, on which A becomes
/// holomorphic to target. Walls are processed in the cyclic order of target rays.
inline Fan refine_for_matrix(const MonomialMatrix& A, const Fan& source, const Fan& target,
                             std::size_t ray_cap = kDefaultRayCap) {
    A.require_dominant();
    require_smooth_complete(source);
    require_smooth_complete(target);
    Fan f = source;
    for (const Vec2& u : target.rays()) insert_by_star_subdivision(f, A.preimage_direction(u), ray_cap);
    if (!is_holomorphic(A, f, target)) throw NotHolomorphic("refinement failed to resolve the map");
    return f;
}

struct ToricClassMatrix {
    Fan source;
    Fan target;
    QMatrix matrix;
};

/// Pullback of a target divisor to the source fan: coefficients phi_D(A w).
inline QVector pullback_divisor(const MonomialMatrix& A, const Fan& src, const Fan& tgt, const QVector& a) {
    QVector out;
    out.reserve(src.size());
    for (const Vec2& w : src.rays()) out.push_back(support_value(tgt, a, A.apply(w)));
    return out;
}

/// Matrix of F^*: Cl(tgt) -> Cl(src), columns indexed by target class coordinates.
inline ToricClassMatrix pullback_matrix(const MonomialMatrix& A, const Fan& src, const Fan& tgt) {
    A.require_dominant();
    require_smooth_complete(src);
    require_smooth_complete(tgt);
    if (!is_holomorphic(A, src, tgt)) throw NotHolomorphic("monomial map is not holomorphic between the fans");
    // Locate every image ray once.
    std::vector<std::size_t> cone(src.size());
    std::vector<std::pair<long long, long long>> coords(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec2 v = A.apply(src.ray(i));
        cone[i] = tgt.cone_containing(v);
        coords[i] = {det(v, tgt.ray(cone[i] + 1)), det(tgt.ray(cone[i]), v)};
    }
    QMatrix m(src.class_rank(), tgt.class_rank());
    for (std::size_t k = 0; k < tgt.class_rank(); ++k) {
        QVector a(src.size());
        const std::size_t ray = k + 2;
        for (std::size_t i = 0; i < src.size(); ++i) {
            const std::size_t j = cone[i];
            long long v = 0;
            if (j == ray) v += coords[i].first;
            if ((j + 1) % tgt.size() == ray) v += coords[i].second;
            a[i] = rat(v);
        }
        const QVector c = divisor_to_class(src, a);
        for (std::size_t r = 0; r < c.size(); ++r) m(r, k) = c[r];
    }
    return {src, tgt, std::move(m)};
}

/// Pushforward of boundary divisors: D_w goes to (|det A| / k) D_u when A w = k u
/// for a target ray u, and to 0 when A w is interior to a two-dimensional cone.
inline QVector pushforward_divisor(const MonomialMatrix& A, const Fan& src, const Fan& tgt, const QVector& a) {
    const long long e = std::llabs(A.determinant());
    QVector out(tgt.size(), Rational(0));
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (a[i] == 0) continue;
        const Vec2 v = A.apply(src.ray(i));
        for (std::size_t j = 0; j < tgt.size(); ++j) {
            const Vec2& u = tgt.ray(j);
            if (det(u, v) == 0 && dot(u, v) > 0) {
                const long long k = u.x != 0 ? v.x / u.x : v.y / u.y;
                out[j] += a[i] * rat(e) / rat(k);
                break;
            }
        }
    }
    return out;
}

/// Matrix of F_*: Cl(src) -> Cl(tgt).
inline ToricClassMatrix pushforward_matrix(const MonomialMatrix& A, const Fan& src, const Fan& tgt) {
    A.require_dominant();
    require_smooth_complete(src);
    require_smooth_complete(tgt);
    if (!is_holomorphic(A, src, tgt)) throw NotHolomorphic("monomial map is not holomorphic between the fans");
    QMatrix m(tgt.class_rank(), src.class_rank());
    for (std::size_t k = 0; k < src.class_rank(); ++k) {
        QVector a(src.size(), Rational(0));
        a[k + 2] = 1;
        const QVector c = divisor_to_class(tgt, pushforward_divisor(A, src, tgt, a));
        for (std::size_t r = 0; r < c.size(); ++r) m(r, k) = c[r];
    }
    return {src, tgt, std::move(m)};
}

// ---------------------------------------------------------------------------
// Positivity.

/// Nef iff the support function is convex across every wall, i.e. (D . D_i) >= 0.
inline bool nef_check(const Fan& f, const QVector& cls) {
    require_smooth_complete(f);
    const QVector a = class_to_divisor(f, cls);
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < n; ++i) {
        Rational bend = rat(-f.bend_coefficient(i)) * a[i];
        bend += a[(i + n - 1) % n] + a[(i + 1) % n];
        if (bend < 0) return false;
    }
    return true;
}

/// Psef iff the class is linearly equivalent to an effective boundary divisor,
/// i.e. the polygon {m : <m, v_i> >= -a_i} is nonempty. Decided by exact
/// Fourier-Motzkin elimination of the second coordinate of m.
inline bool psef_check(const Fan& f, const QVector& cls) {
    require_smooth_complete(f);
    const QVector a = class_to_divisor(f, cls);
    // constraint: x*m1 + y*m2 >= -a
    struct Row {
        long long x, y;
        Rational rhs;
    };
    std::vector<Row> lower, upper;
    std::optional<Rational> lo, hi;
    auto bound_m1 = [&](const Rational& coef, const Rational& rhs) {
        // coef * m1 >= rhs
        if (coef == 0) return rhs <= 0;
        Rational t = rhs / coef;
        if (coef > 0) {
            if (!lo || t > *lo) lo = t;
        } else {
            if (!hi || t < *hi) hi = t;
        }
        return true;
    };
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec2& v = f.ray(i);
        Row row{v.x, v.y, -a[i]};
        if (v.y > 0)
            lower.push_back(row);
        else if (v.y < 0)
            upper.push_back(row);
        else if (!bound_m1(rat(v.x), row.rhs))
            return false;
    }
    // m2 >= (rhs_l - x_l m1)/y_l  and  m2 <= (rhs_u - x_u m1)/y_u  (y_u < 0)
    for (const auto& l : lower)
        for (const auto& u : upper) {
            // (rhs_l - x_l m1)/y_l <= (rhs_u - x_u m1)/y_u; multiply by y_l*(-y_u) > 0:
            // -y_u (rhs_l - x_l m1) <= y_l (x_u m1 - rhs_u)
            const Rational coef = rat(l.y * u.x) - rat(u.y * l.x);
            const Rational rhs = rat(-u.y) * l.rhs + rat(l.y) * u.rhs;
            if (!bound_m1(coef, rhs)) return false;
        }
    return !(lo && hi && *lo > *hi);
}

// ---------------------------------------------------------------------------
// Degrees on P^2.

/// Hyperplane class of P^2 pulled back to a refinement: phi_H(v) = max(0, -x, -y).
inline QVector hyperplane_divisor(const Fan& f) {
    QVector a;
    a.reserve(f.size());
    for (const Vec2& v : f.rays()) a.push_back(rat(std::max({0LL, -v.x, -v.y})));
    return a;
}

/// deg_H(F) = (F^*H . H) for the monomial map with matrix A.
inline long long toric_degree(const MonomialMatrix& A, std::size_t ray_cap = kDefaultRayCap) {
    const Fan p2 = p2_fan();
    const Fan f = refine_for_matrix(A, p2, p2, ray_cap);
    const QVector h = hyperplane_divisor(f);
    const QVector pulled = pullback_divisor(A, f, p2, QVector{Rational(0), Rational(0), Rational(1)});
    const Rational d = divisor_pairing(f, pulled, h);
    if (d.get_den() != 1 || !d.get_num().fits_slong_p()) throw CapacityError("degree does not fit in 64 bits");
    return d.get_num().get_si();
}

/// deg_H(F^n) for n = 1..n_max. A CapacityError carries the degrees computed so far.
inline std::vector<long long> toric_degree_sequence(const MonomialMatrix& A, unsigned n_max,
                                                    std::size_t ray_cap = kDefaultRayCap) {
    A.require_dominant();
    std::vector<long long> out;
    MonomialMatrix power = MonomialMatrix::identity();
    for (unsigned n = 1; n <= n_max; ++n) {
        try {
            power = power * A;
            out.push_back(toric_degree(power, ray_cap));
        } catch (const CapacityError& e) {
            throw CapacityError(e.what(), out);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Refinements of P^2 as exceptional primes.

namespace detail {

inline const std::array<Vec2, 3>& p2_rays() {
    static const std::array<Vec2, 3> r{Vec2{1, 0}, Vec2{0, 1}, Vec2{-1, -1}};
    return r;
}

inline bool is_p2_ray(Vec2 v) {
    const auto& r = p2_rays();
    return std::find(r.begin(), r.end(), v) != r.end();
}

}  // namespace detail

inline std::string prime_id(Vec2 v) { return "E" + to_string(v); }

/// The two rays whose star subdivision first creates v, starting from P^2.
inline std::pair<Vec2, Vec2> subdivision_parents(Vec2 v) {
    const Fan p2 = p2_fan();
    const std::size_t j = p2.cone_containing(v);
    Vec2 l = p2.ray(j), r = p2.ray(j + 1);
    for (;;) {
        const Vec2 m = l + r;
        if (m == v) return {l, r};
        if (cone_contains(l, m, v))
            r = m;
        else
            l = m;
    }
}

/// Prime tree over P^2 whose primes are the non-P^2 rays of f, parents first.
/// A ray's tree parent is whichever of its two subdivision parents was created last.
inline PrimeTree toric_prime_tree(const Fan& f) {
    PrimeTree tree(BaseLattice::projective_plane());
    std::map<Vec2, int> level;
    auto add = [&](auto&& self, Vec2 v) -> int {
        if (detail::is_p2_ray(v)) return -1;
        if (auto it = level.find(v); it != level.end()) return it->second;
        auto [l, r] = subdivision_parents(v);
        const int ll = self(self, l);
        const int lr = self(self, r);
        Parent parent;
        if (ll < 0 && lr < 0) {
            auto idx = [](Vec2 u) {
                const auto& p = detail::p2_rays();
                return std::to_string(std::find(p.begin(), p.end(), u) - p.begin());
            };
            parent = BasePoint{"q" + idx(l) + idx(r)};
        } else {
            parent = PrimeParent{prime_id(ll >= lr ? l : r)};
        }
        const int lv = tree.add(prime_id(v), parent).level;
        level.emplace(v, lv);
        return lv;
    };
    for (const Vec2& v : f.rays()) add(add, v);
    return tree;
}

/// Exceptional primes appearing as rays of f.
inline PrimeSet fan_primes(const Fan& f) {
    PrimeSet s;
    for (const Vec2& v : f.rays())
        if (!detail::is_p2_ray(v)) s.insert(prime_id(v));
    return s;
}

/// Total transform alpha_E of the prime with ray v, as a divisor on f.
inline QVector total_transform_divisor(const Fan& f, Vec2 v) {
    auto [l, r] = subdivision_parents(v);
    QVector a(f.size(), Rational(0));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec2& w = f.ray(i);
        if (cone_contains(l, v, w))
            a[i] = rat(det(l, w));
        else if (cone_contains(v, r, w))
            a[i] = rat(det(w, r));
    }
    return a;
}

/// Class-group coordinates on f (a refinement of P^2) to {H, alpha_E} coordinates.
inline ClassVector toric_to_class_vector(const Fan& f, const TreePtr& tree, const QVector& cls) {
    const QVector a = class_to_divisor(f, cls);
    QVector base{divisor_pairing(f, a, hyperplane_divisor(f))};
    std::map<std::string, Rational> exc;
    for (const Vec2& v : f.rays()) {
        if (detail::is_p2_ray(v)) continue;
        Rational c = -divisor_pairing(f, a, total_transform_divisor(f, v));
        if (c != 0) exc.emplace(prime_id(v), std::move(c));
    }
    return ClassVector(tree, std::move(base), std::move(exc));
}

/// Inverse of toric_to_class_vector for classes supported on the primes of f.
inline QVector class_vector_to_toric(const Fan& f, const ClassVector& a) {
    const PrimeSet here = fan_primes(f);
    for (const auto& [id, c] : a.exc())
        if (!here.count(id)) throw InvalidModel("class has support off the toric model: " + id);
    QVector d = hyperplane_divisor(f);
    for (auto& x : d) x *= a.base()[0];
    for (const Vec2& v : f.rays()) {
        if (detail::is_p2_ray(v)) continue;
        const Rational c = a.coeff(prime_id(v));
        if (c == 0) continue;
        const QVector t = total_transform_divisor(f, v);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += c * t[i];
    }
    return divisor_to_class(f, d);
}

// ---------------------------------------------------------------------------
// Towers X_0 = P^2 <- X_1 <- ... with F : X_{k+1} -> X_k holomorphic.

struct ToricTower {
    MonomialMatrix map;
    std::vector<Fan> levels;
    std::vector<QMatrix> pullback;      // F^*   : Cl(X_k) -> Cl(X_{k+1})
    std::vector<QMatrix> pushforward;   // F_*   : Cl(X_{k+1}) -> Cl(X_k)
    std::vector<QMatrix> inclusion;     // mu^*  : Cl(X_k) -> Cl(X_{k+1})
    std::vector<QMatrix> projection;    // mu_*  : Cl(X_{k+1}) -> Cl(X_k)

    std::size_t depth() const { return pullback.size(); }

    /// Pullback-then-project operator on Cl(X_k).
    QMatrix pull_operator(std::size_t k) const { return projection.at(k) * pullback.at(k); }
    /// Adjoint of pull_operator(k): push-forward of the total transform.
    QMatrix push_operator(std::size_t k) const { return pushforward.at(k) * inclusion.at(k); }
};

/// Builds levels 0..depth+1 so that operators exist on levels 0..depth.
inline ToricTower build_tower(const MonomialMatrix& A, std::size_t depth, std::size_t ray_cap = kDefaultRayCap) {
    A.require_dominant();
    ToricTower t;
    t.map = A;
    t.levels.push_back(p2_fan());
    const MonomialMatrix id = MonomialMatrix::identity();
    for (std::size_t k = 0; k <= depth; ++k) {
        const Fan& xk = t.levels.back();
        Fan next = refine_for_matrix(A, xk, xk, ray_cap);
        t.pullback.push_back(pullback_matrix(A, next, xk).matrix);
        t.pushforward.push_back(pushforward_matrix(A, next, xk).matrix);
        t.inclusion.push_back(pullback_matrix(id, next, xk).matrix);
        t.projection.push_back(pushforward_matrix(id, next, xk).matrix);
        t.levels.push_back(std::move(next));
    }
    return t;
}

// ---------------------------------------------------------------------------
// JSON: fans as {rays: [[x,y],...]}; matrices as row-major rational strings.

inline nlohmann::json to_json(const Fan& f) {
    nlohmann::json rays = nlohmann::json::array();
    for (const Vec2& v : f.rays()) rays.push_back({v.x, v.y});
    return {{"rays", rays}};
}

inline Fan fan_from_json(const nlohmann::json& j) {
    try {
        std::vector<Vec2> rays;
        for (const auto& r : j.at("rays")) {
            if (r.size() != 2) throw ValidationError("ray must have two coordinates");
            rays.push_back({r.at(0).get<long long>(), r.at(1).get<long long>()});
        }
        Fan f(std::move(rays));
        require_smooth_complete(f);
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad fan JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const QMatrix& m) {
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) data.push_back(to_string(m(i, j)));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline QMatrix matrix_from_json(const nlohmann::json& j) {
    try {
        QMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
        const auto& data = j.at("data");
        if (data.size() != m.rows() * m.cols()) throw ValidationError("matrix data has wrong length");
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = parse_rational(data.at(i * m.cols() + k).get<std::string>());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad matrix JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const ToricClassMatrix& m) {
    return {{"source", to_json(m.source)}, {"target", to_json(m.target)}, {"matrix", to_json(m.matrix)}};
}

}  // namespace rzdyn
