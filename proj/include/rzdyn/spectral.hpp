#pragma once

// Spectral radii of cone-preserving operators, model towers for monomial
// maps, eigenclass approximants, asymptotic fits of degree sequences and
// linear-recurrence detection.
//
// Floating point appears only inside power iteration; every class-level
// identity is checked in exact rational arithmetic.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "classlat.hpp"
#include "errors.hpp"
#include "lp.hpp"
#include "rational.hpp"
#include "roots.hpp"
#include "toric.hpp"

namespace rzdyn {

// ---------------------------------------------------------------------------
// Power iteration.

struct RhoOptions {
    /// Normalising functional; defaults to the sum of coordinates.
    std::optional<QVector> normal;
    /// Linear functionals cutting out the cone (H-representation), for the Collatz-Wielandt bracket.
    std::vector<QVector> facets;
    std::size_t max_iterations = 20000;
    double tolerance = 1e-14;
    /// Cross-check against the exact characteristic polynomial up to this size.
    std::size_t exact_max_size = 6;
};

struct RhoResult {
    double rho = 0;
    std::vector<double> eigenvector;  // normalised so that normal(eigenvector) = 1
    double error = 0;
    std::size_t iterations = 0;
    bool converged = true;
    std::optional<std::pair<double, double>> bracket;
    std::optional<RootInterval> exact;
};

inline const Rational kRootTolerance = Rational(Integer(1), Integer(1) << 50);
/// Largest operator for which a stalled power iteration falls back to the exact characteristic polynomial.
inline constexpr std::size_t kExactFallbackSize = 80;

namespace detail {

inline std::vector<double> to_doubles(const QVector& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(to_double(x));
    return out;
}

inline std::vector<std::vector<double>> to_doubles(const QMatrix& m) {
    std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = to_double(m(i, j));
    return out;
}

inline double dotd(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline std::vector<double> apply(const std::vector<std::vector<double>>& m, const std::vector<double>& v, double shift) {
    std::vector<double> out(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        double s = shift * v[i];
        for (std::size_t j = 0; j < v.size(); ++j) s += m[i][j] * v[j];
        out[i] = s;
    }
    return out;
}

struct PowerOutcome {
    bool converged = false;
    double rho = 0;
    double delta = 0;
    std::size_t iterations = 0;
    std::vector<double> v;
};

inline PowerOutcome power_iterate(const std::vector<std::vector<double>>& m, std::vector<double> v,
                                  const std::vector<double>& normal, double shift, std::size_t max_it, double tol) {
    PowerOutcome out;
    double nv = dotd(normal, v);
    if (!(nv > 0)) throw PreconditionError("start vector has nonpositive normalisation");
    for (auto& x : v) x /= nv;
    double rho = 0;
    for (std::size_t it = 1; it <= max_it; ++it) {
        std::vector<double> w = apply(m, v, shift);
        const double nw = dotd(normal, w);
        if (!(nw > 0) || !std::isfinite(nw)) throw NumericalFailure("power iteration left the cone");
        for (auto& x : w) x /= nw;
        double diff = 0, scale = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            diff = std::max(diff, std::fabs(w[i] - v[i]));
            scale = std::max(scale, std::fabs(w[i]));
        }
        const double next = nw - shift;
        out.delta = std::fabs(next - rho);
        rho = next;
        v = std::move(w);
        out.iterations = it;
        if (it > 2 && diff <= tol * std::max(1.0, scale) && out.delta <= tol * std::max(1.0, std::fabs(rho))) {
            out.converged = true;
            break;
        }
    }
    out.rho = rho;
    out.v = std::move(v);
    return out;
}

}  // namespace detail

/// Power iteration from a start vector assumed to lie in an invariant cone.
inline RhoResult rho_from_start(const QMatrix& m, const QVector& start, const RhoOptions& opt) {
    const auto md = detail::to_doubles(m);
    const auto normal = detail::to_doubles(opt.normal.value_or(QVector(m.rows(), Rational(1))));
    const auto v0 = detail::to_doubles(start);
    RhoResult r;
    if (opt.exact_max_size >= m.rows()) r.exact = largest_real_root(charpoly(m), kRootTolerance);

    detail::PowerOutcome p = detail::power_iterate(md, v0, normal, 0.0, opt.max_iterations, opt.tolerance);
    if (!p.converged) {
        // a shift separates the Perron root from other eigenvalues of the same modulus
        double norm = 0;
        for (const auto& row : md) {
            double s = 0;
            for (double x : row) s += std::fabs(x);
            norm = std::max(norm, s);
        }
        p = detail::power_iterate(md, v0, normal, std::max(1.0, norm), opt.max_iterations, opt.tolerance);
    }
    if (!p.converged && !r.exact && m.rows() <= kExactFallbackSize)
        r.exact = largest_real_root(charpoly(m), kRootTolerance);
    if (!p.converged && !r.exact) throw NumericalFailure("power iteration did not converge");
    r.converged = p.converged;
    r.rho = p.rho;
    r.eigenvector = p.v;
    r.iterations = p.iterations;
    r.error = p.delta;
    if (r.exact) {
        const double x = r.exact->mid();
        const double gap = std::fabs(x - r.rho);
        if (p.converged && gap > 1e-6 * std::max(1.0, x))
            throw NumericalFailure("power iteration disagrees with the exact spectral radius");
        if (!p.converged) {
            // Slow (non-diagonalisable) case: take the exact root, and an exact eigenvector when the root is an integer.
            r.rho = x;
            const Rational guess = from_double(std::round(x));
            if (eval(charpoly(m), guess) == 0) {
                r.exact = RootInterval{guess, guess};
                r.rho = to_double(guess);
                QMatrix shifted = m;
                for (std::size_t i = 0; i < m.rows(); ++i) shifted(i, i) -= guess;
                const auto ns = nullspace(shifted);
                if (ns.size() == 1) {
                    auto v = detail::to_doubles(ns.front());
                    const double nv = detail::dotd(normal, v);
                    if (nv != 0) {
                        for (auto& c : v) c /= nv;
                        r.eigenvector = v;
                    }
                }
            }
            r.error = 0;
        }
        r.error = std::max(r.error, std::fabs(r.exact->mid() - r.rho)) + r.exact->width();
    }
    if (!opt.facets.empty()) {
        const auto tv = detail::apply(md, r.eigenvector, 0.0);
        double lo = INFINITY, hi = -INFINITY;
        bool upper_ok = true;
        for (const auto& f : opt.facets) {
            const auto fd = detail::to_doubles(f);
            const double a = detail::dotd(fd, r.eigenvector), b = detail::dotd(fd, tv);
            if (a > 1e-12 * std::max(1.0, std::fabs(b))) {
                lo = std::min(lo, b / a);
                hi = std::max(hi, b / a);
            } else if (b > 1e-12) {
                upper_ok = false;
            }
        }
        if (std::isfinite(lo)) r.bracket = std::make_pair(lo, upper_ok ? hi : INFINITY);
    }
    return r;
}

/// Spectral radius of a matrix on an invariant cone given by generators.
/// Invariance is verified exactly; a precondition error is raised otherwise.
inline RhoResult rho_cone(const QMatrix& m, const std::vector<QVector>& generators, const RhoOptions& opt = {}) {
    if (m.rows() != m.cols()) throw PreconditionError("rho_cone needs a square matrix");
    if (generators.empty()) throw PreconditionError("cone has no generators");
    for (const auto& g : generators)
        if (!in_cone(generators, m * g)) throw PreconditionError("matrix does not preserve the cone");
    QVector start(m.rows(), Rational(0));
    for (const auto& g : generators)
        for (std::size_t i = 0; i < start.size(); ++i) start[i] += g[i];
    QVector normal = opt.normal.value_or(QVector(m.rows(), Rational(1)));
    if (dot(normal, start) <= 0) {
        // fall back to a functional positive on the start vector
        normal = start;
    }
    RhoOptions o = opt;
    o.normal = normal;
    return rho_from_start(m, start, o);
}

// ---------------------------------------------------------------------------
// Towers.

struct TowerLevel {
    std::size_t rays = 0;
    double rho = 0;
    double error = 0;
    std::optional<RootInterval> exact;
    bool nef_invariant = false;
    std::vector<double> theta;        // Perron vector of the pull operator, (theta . H) = 1
    std::vector<double> theta_lower;  // Perron vector of the push operator, (theta . H) = 1
    double theta_square = 0;
};

struct SpectralData {
    MonomialMatrix map;
    std::vector<TowerLevel> levels;
    double lambda1 = 0;       // exact spectral radius of the exponent matrix
    long long lambda2 = 0;    // |det A|
    bool monotone = true;     // rho_{k+1} <= rho_k + err
    bool above_lambda1 = true;
    TreePtr tree;

    std::vector<double> rho_seq() const {
        std::vector<double> r;
        for (const auto& l : levels) r.push_back(l.rho);
        return r;
    }
};

/// Spectral radius of a 2x2 integer matrix.
inline double spectral_radius(const MonomialMatrix& A) {
    const double tr = static_cast<double>(A.a + A.d);
    const double det = static_cast<double>(A.determinant());
    const double disc = tr * tr - 4 * det;
    if (disc < 0) return std::sqrt(det);
    const double s = std::sqrt(disc);
    return std::max(std::fabs((tr + s) / 2), std::fabs((tr - s) / 2));
}

namespace detail {

inline QVector hyperplane_class(const Fan& f) { return divisor_to_class(f, hyperplane_divisor(f)); }

/// Functionals c -> (c . D_i) on class coordinates.
inline std::vector<QVector> nef_facets(const Fan& f) {
    const QMatrix g = class_gram(f);
    std::vector<QVector> out;
    for (std::size_t i = 0; i < f.size(); ++i) out.push_back(g * boundary_class(f, i));
    return out;
}

/// Exact test that op preserves the nef cone: its adjoint must preserve the effective cone.
inline bool preserves_nef(const Fan& f, const QMatrix& adjoint) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!psef_check(f, adjoint * boundary_class(f, i))) return false;
    return true;
}

}  // namespace detail

inline SpectralData rho_tower(const ToricTower& t, const RhoOptions& base = {}) {
    SpectralData s;
    s.map = t.map;
    s.lambda1 = spectral_radius(t.map);
    s.lambda2 = std::llabs(t.map.determinant());
    s.tree = std::make_shared<const PrimeTree>(toric_prime_tree(t.levels.back()));
    for (std::size_t k = 0; k < t.depth(); ++k) {
        const Fan& f = t.levels[k];
        const QMatrix T = t.pull_operator(k);
        const QMatrix S = t.push_operator(k);
        TowerLevel lv;
        lv.rays = f.size();
        lv.nef_invariant = detail::preserves_nef(f, S) && detail::preserves_nef(f, T);
        if (!lv.nef_invariant) throw PreconditionError("tower operator does not preserve the nef cone");
        const QVector h = detail::hyperplane_class(f);
        const QMatrix g = class_gram(f);
        RhoOptions o = base;
        o.normal = g * h;
        o.facets = detail::nef_facets(f);
        const RhoResult r = rho_from_start(T, h, o);
        const RhoResult rl = rho_from_start(S, h, o);
        lv.rho = r.rho;
        lv.error = r.error;
        lv.exact = r.exact;
        lv.theta = r.eigenvector;
        lv.theta_lower = rl.eigenvector;
        QVector th;
        for (double x : lv.theta) th.push_back(from_double(x));
        lv.theta_square = to_double(bilinear(g, th, th));
        s.levels.push_back(std::move(lv));
    }
    for (std::size_t k = 0; k < s.levels.size(); ++k) {
        const auto& l = s.levels[k];
        if (l.rho < s.lambda1 - l.error - 1e-9) s.above_lambda1 = false;
        if (k > 0 && l.rho > s.levels[k - 1].rho + l.error + s.levels[k - 1].error + 1e-9) s.monotone = false;
    }
    return s;
}

inline SpectralData rho_tower(const MonomialMatrix& A, std::size_t depth, const RhoOptions& opt = {}) {
    return rho_tower(build_tower(A, depth), opt);
}

/// Class from doubles, converted exactly.
inline QVector exact_vector(const std::vector<double>& v) {
    QVector out;
    out.reserve(v.size());
    for (double x : v) out.push_back(from_double(x));
    return out;
}

struct EigenResidual {
    ClassVector residual;        // F^* theta_k - rho_k theta_k, determined on level k+1
    double max_level_k = 0;      // largest coordinate of its level-k incarnation
    double max_all = 0;
};

inline EigenResidual eigenclass_residual(const ToricTower& t, const SpectralData& s, std::size_t k) {
    if (k >= s.levels.size() || k + 1 >= t.levels.size()) throw PreconditionError("tower too shallow for residual");
    const QVector theta = exact_vector(s.levels[k].theta);
    const Rational rho = from_double(s.levels[k].rho);
    QVector r = t.pullback[k] * theta;
    const QVector incl = t.inclusion[k] * theta;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rho * incl[i];
    ClassVector cv = toric_to_class_vector(t.levels[k + 1], s.tree, r);
    const ClassVector inc = incarnation(cv, fan_primes(t.levels[k]));
    EigenResidual e{cv, 0, 0};
    auto upd = [](double& m, const Rational& q) { m = std::max(m, std::fabs(to_double(q))); };
    for (const auto& x : inc.base()) upd(e.max_level_k, x);
    for (const auto& [id, c] : inc.exc()) upd(e.max_level_k, c);
    for (const auto& x : cv.base()) upd(e.max_all, x);
    for (const auto& [id, c] : cv.exc()) upd(e.max_all, c);
    return e;
}

// ---------------------------------------------------------------------------
// Degree-sequence analysis.

struct FitReport {
    double lambda1 = 0;
    double lambda2 = 0;
    bool hypothesis_ok = false;
    std::optional<double> b;
    std::vector<double> residuals;
    std::optional<double> bound_constant;
    std::vector<double> normalized;        // deg_n / lambda1^n
    std::vector<double> normalized_by_n;   // deg_n / (n lambda1^n)
    bool diverging = false;                // normalized grows without visible saturation
};

inline FitReport fit_main_theorem(const std::vector<long long>& degs, double lambda1, double lambda2, double tol = 1e-9) {
    if (degs.size() < 6) throw InsufficientData("fit needs at least 6 degrees");
    if (!(lambda1 > 0)) throw PreconditionError("lambda1 must be positive");
    FitReport r;
    r.lambda1 = lambda1;
    r.lambda2 = lambda2;
    const std::size_t N = degs.size();
    for (std::size_t n = 1; n <= N; ++n) {
        const double q = static_cast<double>(degs[n - 1]) / std::pow(lambda1, static_cast<double>(n));
        r.normalized.push_back(q);
        r.normalized_by_n.push_back(q / static_cast<double>(n));
    }
    // increasing, with increments decaying no faster than 1/n
    r.diverging = true;
    for (std::size_t i = 1; i < N; ++i)
        if (!(r.normalized[i] > r.normalized[i - 1] * (1 + 1e-12))) r.diverging = false;
    if (r.diverging) {
        const double first = r.normalized[1] - r.normalized[0];
        const double last = r.normalized[N - 1] - r.normalized[N - 2];
        if (last * static_cast<double>(2 * N) < first) r.diverging = false;
    }
    r.hypothesis_ok = lambda1 * lambda1 > lambda2 + tol;
    const std::size_t tail = std::max<std::size_t>(1, N / 3);
    double b = 0;
    for (std::size_t i = N - tail; i < N; ++i) b += r.normalized[i];
    b /= static_cast<double>(tail);
    r.b = b;
    double c = 0;
    for (std::size_t n = 1; n <= N; ++n) {
        const double res = static_cast<double>(degs[n - 1]) - b * std::pow(lambda1, static_cast<double>(n));
        r.residuals.push_back(res);
        c = std::max(c, std::fabs(res) / std::pow(lambda2, static_cast<double>(n) / 2));
    }
    r.bound_constant = c;
    return r;
}

/// Minimal linear recurrence d_n = sum_i c_i d_{n-i} (c_1 first), found by
/// Berlekamp-Massey on all but the last two terms and validated on every term.
/// The order is limited to min(max_order, (len - 2) / 2).
inline std::optional<std::vector<Rational>> detect_recurrence(const std::vector<Rational>& s, std::size_t max_order = 6) {
    if (s.size() < 4) return std::nullopt;
    const std::size_t fit_len = s.size() - 2;
    const std::size_t limit = std::min(max_order, fit_len / 2);
    std::vector<Rational> C{1}, B{1};
    std::size_t L = 0, m = 1;
    Rational b = 1;
    for (std::size_t n = 0; n < fit_len; ++n) {
        Rational d = s[n];
        for (std::size_t i = 1; i <= L && i < C.size(); ++i) d += C[i] * s[n - i];
        if (d == 0) {
            ++m;
            continue;
        }
        const Rational coef = d / b;
        std::vector<Rational> T = C;
        if (C.size() < B.size() + m) C.resize(B.size() + m, Rational(0));
        for (std::size_t i = 0; i < B.size(); ++i) C[i + m] -= coef * B[i];
        if (2 * L <= n) {
            L = n + 1 - L;
            B = std::move(T);
            b = d;
            m = 1;
        } else {
            ++m;
        }
    }
    if (L > limit) return std::nullopt;
    C.resize(L + 1, Rational(0));
    std::vector<Rational> c(L);
    for (std::size_t i = 1; i <= L; ++i) c[i - 1] = -C[i];
    for (std::size_t n = L; n < s.size(); ++n) {
        Rational p = 0;
        for (std::size_t i = 1; i <= L; ++i) p += c[i - 1] * s[n - i];
        if (p != s[n]) return std::nullopt;
    }
    return c;
}

inline std::optional<std::vector<Rational>> detect_recurrence(const std::vector<long long>& degs, std::size_t max_order = 6) {
    std::vector<Rational> s;
    for (long long d : degs) s.push_back(rat(d));
    return detect_recurrence(s, max_order);
}

inline Rational predict_next(const std::vector<Rational>& c, const std::vector<long long>& degs) {
    if (degs.size() < c.size()) throw InsufficientData("not enough terms to extend the recurrence");
    Rational p = 0;
    for (std::size_t i = 1; i <= c.size(); ++i) p += c[i - 1] * rat(degs[degs.size() - i]);
    return p;
}

/// Largest real root of x^L - c_1 x^{L-1} - ... - c_L.
inline std::optional<RootInterval> recurrence_root(const std::vector<Rational>& c) {
    if (c.empty()) return std::nullopt;
    QPoly p(c.size() + 1, Rational(0));
    p[c.size()] = 1;
    for (std::size_t i = 1; i <= c.size(); ++i) p[c.size() - i] = -c[i - 1];
    return largest_real_root(p, kRootTolerance);
}

struct Lambda1Estimate {
    double value = 0;
    std::string provenance;  // "recurrence" or "root_bound"
    std::optional<std::vector<Rational>> recurrence;
};

/// lambda1 from a degree sequence: the growth root of a detected recurrence, else min deg_n^(1/n).
inline Lambda1Estimate lambda1_from_degrees(const std::vector<long long>& degs) {
    if (degs.empty()) throw InsufficientData("empty degree sequence");
    Lambda1Estimate e;
    e.recurrence = detect_recurrence(degs);
    if (e.recurrence) {
        if (const auto root = recurrence_root(*e.recurrence)) {
            e.value = std::max(1.0, root->mid());
            e.provenance = "recurrence";
            return e;
        }
    }
    // submultiplicative sequences have lambda1 = inf_n deg_n^(1/n)
    double best = static_cast<double>(degs.front());
    for (std::size_t n = 1; n <= degs.size(); ++n)
        best = std::min(best, std::pow(static_cast<double>(degs[n - 1]), 1.0 / static_cast<double>(n)));
    e.value = std::max(1.0, best);
    e.provenance = "root_bound";
    return e;
}

// ---------------------------------------------------------------------------
// Identity checks along a tower.

struct IdentityCheck {
    std::string name;
    std::size_t level = 0;
    std::size_t cases = 0;
    bool exact = true;
    bool passed = true;
    double worst = 0;  // largest deviation for approximate checks
};

struct IdentityLedger {
    std::vector<IdentityCheck> checks;
    bool all_passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
    }
};

/// Divisor of the polygon conv(points): a_i = -min_m <m, v_i>. Always nef.
inline QVector polygon_divisor(const Fan& f, const std::vector<Vec2>& points) {
    QVector a;
    for (const Vec2& v : f.rays()) {
        long long mn = dot(points.front(), v);
        for (const Vec2& m : points) mn = std::min(mn, dot(m, v));
        a.push_back(rat(-mn));
    }
    return a;
}

inline QVector random_nef_class(const Fan& f, std::mt19937_64& rng) {
    std::uniform_int_distribution<long long> c(-4, 4);
    std::uniform_int_distribution<int> n(1, 4);
    std::vector<Vec2> pts(static_cast<std::size_t>(n(rng)));
    for (auto& p : pts) p = {c(rng), c(rng)};
    return divisor_to_class(f, polygon_divisor(f, pts));
}

inline QVector random_class(std::size_t rank, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> c(-5, 5);
    QVector v(rank);
    for (auto& x : v) x = c(rng);
    return v;
}

inline IdentityLedger spectral_identity_suite(const ToricTower& t, const SpectralData* data = nullptr,
                                              std::uint64_t seed = 1, std::size_t samples = 50) {
    IdentityLedger ledger;
    std::mt19937_64 rng(seed);
    const Rational e = rat(std::llabs(t.map.determinant()));
    for (std::size_t k = 0; k < t.depth(); ++k) {
        const Fan& lo = t.levels[k];
        const Fan& hi = t.levels[k + 1];
        const QMatrix glo = class_gram(lo), ghi = class_gram(hi);

        IdentityCheck adj{"adjointness", k, 0};
        for (std::size_t s = 0; s < samples; ++s) {
            const QVector beta = random_class(lo.class_rank(), rng);
            const QVector alpha = random_class(hi.class_rank(), rng);
            adj.passed &= bilinear(ghi, t.pullback[k] * beta, alpha) == bilinear(glo, beta, t.pushforward[k] * alpha);
            ++adj.cases;
        }
        ledger.checks.push_back(adj);

        IdentityCheck ops{"operator_adjointness", k, 0};
        for (std::size_t s = 0; s < samples; ++s) {
            const QVector x = random_class(lo.class_rank(), rng), y = random_class(lo.class_rank(), rng);
            ops.passed &= bilinear(glo, t.pull_operator(k) * x, y) == bilinear(glo, x, t.push_operator(k) * y);
            ++ops.cases;
        }
        ledger.checks.push_back(ops);

        IdentityCheck scale{"lambda2_scaling", k, 0};
        auto check_scale = [&](const QVector& beta) {
            const QVector pb = t.pullback[k] * beta;
            scale.passed &= bilinear(ghi, pb, pb) == e * bilinear(glo, beta, beta);
            ++scale.cases;
        };
        for (std::size_t i = 0; i < lo.class_rank(); ++i) {
            QVector b(lo.class_rank(), Rational(0));
            b[i] = 1;
            check_scale(b);
        }
        for (std::size_t s = 0; s < samples; ++s) check_scale(random_class(lo.class_rank(), rng));
        ledger.checks.push_back(scale);

        IdentityCheck hodge{"orthogonal_norm_scaling", k, 0};
        const QVector h = detail::hyperplane_class(lo);
        for (std::size_t s = 0; s < samples; ++s) {
            QVector v = random_class(lo.class_rank(), rng);
            const Rational c = bilinear(glo, v, h);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * h[i];
            const QVector pv = t.pullback[k] * v;
            hodge.passed &= bilinear(ghi, pv, pv) == e * bilinear(glo, v, v);
            ++hodge.cases;
        }
        ledger.checks.push_back(hodge);

        IdentityCheck nef{"nef_pullback", k, 0};
        for (std::size_t s = 0; s < samples; ++s) {
            const QVector beta = random_nef_class(lo, rng);
            nef.passed &= nef_check(lo, beta) && nef_check(hi, t.pullback[k] * beta);
            ++nef.cases;
        }
        ledger.checks.push_back(nef);

        IdentityCheck inv{"nef_cone_invariance", k, lo.size()};
        inv.passed = detail::preserves_nef(lo, t.push_operator(k)) && detail::preserves_nef(lo, t.pull_operator(k));
        ledger.checks.push_back(inv);

        if (data && k < data->levels.size()) {
            const auto& lv = data->levels[k];
            const QVector th = exact_vector(lv.theta);
            const double lhs = to_double(bilinear(glo, th, t.pull_operator(k) * th));
            const double rhs = lv.rho * to_double(bilinear(glo, th, th));
            IdentityCheck eig{"eigen_relation", k, 1, false};
            eig.worst = std::fabs(lhs - rhs);
            eig.passed = eig.worst < 1e-6;
            ledger.checks.push_back(eig);
        }
    }
    return ledger;
}

// ---------------------------------------------------------------------------
// JSON.

inline nlohmann::json to_json(const FitReport& r) {
    nlohmann::json j{{"lambda1", r.lambda1},
                     {"lambda2", r.lambda2},
                     {"hypothesis_ok", r.hypothesis_ok},
                     {"normalized", r.normalized},
                     {"normalized_by_n", r.normalized_by_n},
                     {"diverging", r.diverging}};
    if (r.b) {
        j["b"] = *r.b;
        j["residuals"] = r.residuals;
        j["bound_constant"] = *r.bound_constant;
        j["b_descriptive"] = !r.hypothesis_ok;
    }
    return j;
}

inline nlohmann::json to_json(const IdentityLedger& l) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : l.checks) {
        nlohmann::json j{{"name", c.name}, {"level", c.level}, {"cases", c.cases}, {"exact", c.exact}, {"passed", c.passed}};
        if (!c.exact) j["worst"] = c.worst;
        arr.push_back(j);
    }
    return {{"all_passed", l.all_passed()}, {"checks", arr}};
}

inline nlohmann::json to_json(const SpectralData& s) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : s.levels) {
        nlohmann::json j{{"rays", l.rays},
                         {"rho", l.rho},
                         {"error", l.error},
                         {"nef_invariant", l.nef_invariant},
                         {"theta_square", l.theta_square}};
        if (l.exact) j["rho_exact_interval"] = {to_string(l.exact->lo), to_string(l.exact->hi)};
        levels.push_back(j);
    }
    return {{"lambda1", s.lambda1}, {"lambda2", s.lambda2}, {"monotone", s.monotone},
            {"above_lambda1", s.above_lambda1}, {"rho_seq", s.rho_seq()}, {"levels", levels}};
}

inline nlohmann::json recurrence_json(const std::optional<std::vector<Rational>>& c) {
    if (!c) return nullptr;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& x : *c) arr.push_back(to_string(x));
    return arr;
}

}  // namespace rzdyn
