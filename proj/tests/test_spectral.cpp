#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <rzdyn/spectral.hpp>

using namespace rzdyn;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

QVector e(std::size_t n, std::size_t i) {
    QVector v(n, Rational(0));
    v[i] = 1;
    return v;
}

// Minimal order k for which the Hankel system H c = next has a solution that
// reproduces the whole sequence; solved exactly with Gaussian elimination.
std::optional<std::vector<Rational>> oracle_hankel(const std::vector<long long>& s, std::size_t max_order) {
    for (std::size_t k = 1; k <= max_order && 2 * k <= s.size(); ++k) {
        QMatrix h(k, k);
        QVector rhs(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) h(i, j) = rat(s[i + k - 1 - j]);
            rhs[i] = rat(s[i + k]);
        }
        const auto c = solve(h, rhs);
        if (!c) continue;
        bool ok = true;
        for (std::size_t n = k; n < s.size() && ok; ++n) {
            Rational p = 0;
            for (std::size_t j = 0; j < k; ++j) p += (*c)[j] * rat(s[n - 1 - j]);
            ok = p == rat(s[n]);
        }
        if (ok) return c;
    }
    return std::nullopt;
}

long long fib(int n) {
    long long a = 0, b = 1;
    for (int i = 0; i < n; ++i) {
        const long long t = a + b;
        a = b;
        b = t;
    }
    return a;
}

}  // namespace

TEST(Rho, ScalarOperator) {
    const RhoResult r = rho_cone(QMatrix::from_rows({{Rational(3)}}), {e(1, 0)});
    EXPECT_NEAR(r.rho, 3, 1e-12);
}

TEST(Rho, QuadraticEigenvalue) {
    const RhoResult r = rho_cone(QMatrix::from_rows({{rat(2), rat(1)}, {rat(1), rat(1)}}), {e(2, 0), e(2, 1)});
    EXPECT_NEAR(r.rho, kPhi * kPhi, 1e-10);
    ASSERT_TRUE(r.exact.has_value());
    EXPECT_LE(r.exact->lo, from_double(kPhi * kPhi) + Rational(1, 1000000000));
    EXPECT_GE(r.exact->hi, from_double(kPhi * kPhi) - Rational(1, 1000000000));
}

TEST(Rho, GoldenRatio) {
    const RhoResult r = rho_cone(QMatrix::from_rows({{rat(0), rat(1)}, {rat(1), rat(1)}}), {e(2, 0), e(2, 1)});
    EXPECT_NEAR(r.rho, kPhi, 1e-10);
}

TEST(Rho, JordanBlock) {
    const RhoResult r = rho_cone(QMatrix::from_rows({{rat(2), rat(1)}, {rat(0), rat(2)}}), {e(2, 0), e(2, 1)});
    EXPECT_NEAR(r.rho, 2, 1e-9);
}

TEST(Rho, BracketContainsRadius) {
    RhoOptions o;
    o.facets = {e(2, 0), e(2, 1)};
    const RhoResult r = rho_cone(QMatrix::from_rows({{rat(2), rat(1)}, {rat(1), rat(1)}}), {e(2, 0), e(2, 1)}, o);
    ASSERT_TRUE(r.bracket.has_value());
    EXPECT_LE(r.bracket->first, kPhi * kPhi + 1e-9);
    EXPECT_GE(r.bracket->second, kPhi * kPhi - 1e-9);
}

TEST(Roots, CharpolyAndLargestRoot) {
    const QMatrix m = QMatrix::from_rows({{rat(2), rat(1), rat(0)}, {rat(1), rat(1), rat(0)}, {rat(0), rat(0), rat(-5)}});
    const QPoly p = charpoly(m);
    // (x^2 - 3x + 1)(x + 5) = x^3 + 2x^2 - 14x + 5
    EXPECT_EQ(p, (QPoly{rat(5), rat(-14), rat(2), rat(1)}));
    const auto root = largest_real_root(p, Rational(1, 1 << 30));
    ASSERT_TRUE(root.has_value());
    EXPECT_NEAR(root->mid(), kPhi * kPhi, 1e-8);
    EXPECT_FALSE(largest_real_root(QPoly{rat(1), rat(0), rat(1)}, Rational(1, 1000)).has_value());
}

TEST(Tower, IdentityMap) {
    const SpectralData s = rho_tower(MonomialMatrix::identity(), 3);
    for (double r : s.rho_seq()) EXPECT_NEAR(r, 1, 1e-12);
    const ToricTower t = build_tower(MonomialMatrix::identity(), 2);
    const SpectralData d = rho_tower(t);
    for (std::size_t k = 0; k < d.levels.size(); ++k) EXPECT_EQ(eigenclass_residual(t, d, k).max_all, 0);
}

TEST(Tower, FibonacciMonotoneAndAboveLambda1) {
    const ToricTower t = build_tower({2, 1, 1, 1}, 4);
    const SpectralData s = rho_tower(t);
    ASSERT_EQ(s.levels.size(), 5u);
    EXPECT_NEAR(s.levels[0].rho, 3, 1e-12);
    EXPECT_TRUE(s.monotone);
    EXPECT_TRUE(s.above_lambda1);
    for (const auto& l : s.levels) EXPECT_GE(l.rho, kPhi * kPhi - 1e-9);
    EXPECT_LT(s.levels.back().rho - kPhi * kPhi, 0.2);
}

TEST(Tower, ResidualVanishesOnLevel) {
    const ToricTower t = build_tower({2, 1, 1, 1}, 3);
    const SpectralData s = rho_tower(t);
    for (std::size_t k = 0; k < s.levels.size(); ++k) EXPECT_LT(eigenclass_residual(t, s, k).max_level_k, 1e-8);
}

TEST(Tower, RhoSequenceNonincreasingForNonRealEigenvalues) {
    const SpectralData s = rho_tower(MonomialMatrix{1, 2, -1, 1}, 4);
    EXPECT_TRUE(s.monotone);
    for (const auto& l : s.levels) EXPECT_GE(l.rho, std::sqrt(3.0) - 1e-9);
}

TEST(Tower, OperatorsPreserveNefCone) {
    for (const MonomialMatrix A : {MonomialMatrix{2, 1, 1, 1}, MonomialMatrix{2, 0, 2, 2}, MonomialMatrix{-1, 0, 0, -1}}) {
        const ToricTower t = build_tower(A, 2);
        for (std::size_t k = 0; k < t.depth(); ++k) {
            const Fan& f = t.levels[k];
            const QMatrix T = t.pull_operator(k);
            std::mt19937_64 rng(k);
            for (int s = 0; s < 30; ++s) {
                const QVector nef = random_nef_class(f, rng);
                EXPECT_TRUE(nef_check(f, T * nef));
            }
        }
    }
}

TEST(Tower, NefBoundsOnDegree) {
    // For nef theta with (theta . H) = 1, the pull operator satisfies (T theta . H) <= deg F.
    const MonomialMatrix A{2, 1, 1, 1};
    const ToricTower t = build_tower(A, 3);
    for (std::size_t k = 0; k < t.depth(); ++k) {
        const Fan& f = t.levels[k];
        const QMatrix g = class_gram(f);
        const QVector h = divisor_to_class(f, hyperplane_divisor(f));
        std::mt19937_64 rng(40 + k);
        for (int s = 0; s < 30; ++s) {
            const QVector nef = random_nef_class(f, rng);
            const Rational deg = bilinear(g, nef, h);
            if (deg == 0) continue;
            EXPECT_LE(bilinear(g, t.pull_operator(k) * nef, h), 3 * deg);
        }
    }
}

TEST(Tower, IdentitySuitePasses) {
    for (const MonomialMatrix A : {MonomialMatrix{2, 1, 1, 1}, MonomialMatrix{2, 0, 2, 2}, MonomialMatrix{1, 2, -1, 1}}) {
        const ToricTower t = build_tower(A, 3);
        const SpectralData s = rho_tower(t, {});
        const IdentityLedger l = spectral_identity_suite(t, &s, 5, 20);
        EXPECT_TRUE(l.all_passed());
        EXPECT_FALSE(l.checks.empty());
    }
}

TEST(Fit, FibonacciClosedForm) {
    std::vector<long long> degs;
    for (int n = 1; n <= 8; ++n) degs.push_back(fib(2 * n + 2));
    EXPECT_EQ(degs, (std::vector<long long>{3, 8, 21, 55, 144, 377, 987, 2584}));
    const FitReport r = fit_main_theorem(degs, kPhi * kPhi, 1);
    EXPECT_TRUE(r.hypothesis_ok);
    ASSERT_TRUE(r.b.has_value());
    EXPECT_NEAR(*r.b, kPhi * kPhi / std::sqrt(5.0), 1e-3);
    for (double x : r.residuals) EXPECT_LE(std::fabs(x), 1);
    EXPECT_FALSE(r.diverging);
}

TEST(Fit, ConstantSequenceFailsHypothesis) {
    const FitReport r = fit_main_theorem({1, 1, 1, 1, 1, 1}, 1, 1);
    EXPECT_FALSE(r.hypothesis_ok);
}

TEST(Fit, DegenerateFamilyDiverges) {
    const FitReport r = fit_main_theorem({4, 12, 32, 80, 192, 448, 1024, 2304}, 2, 4);
    EXPECT_FALSE(r.hypothesis_ok);
    EXPECT_TRUE(r.diverging);
    for (std::size_t n = 2; n <= 8; ++n) {
        EXPECT_GE(r.normalized_by_n[n - 1], 1);
        EXPECT_LE(r.normalized_by_n[n - 1], 2);
    }
}

TEST(Fit, ShortWindowRejected) {
    EXPECT_THROW(fit_main_theorem({1, 2, 3}, 2, 1), InsufficientData);
}

TEST(Recurrence, Examples) {
    EXPECT_EQ(detect_recurrence(std::vector<long long>{1, 1, 1, 1, 1, 1}), (std::vector<Rational>{1}));
    const auto f = detect_recurrence(std::vector<long long>{3, 8, 21, 55, 144, 377});
    ASSERT_TRUE(f.has_value());
    EXPECT_EQ(*f, (std::vector<Rational>{3, -1}));
    EXPECT_EQ(predict_next(*f, {3, 8, 21, 55, 144, 377}), 987);
    EXPECT_EQ(detect_recurrence(std::vector<long long>{2, 1, 2, 1, 2, 1}), (std::vector<Rational>{0, 1}));
}

TEST(Recurrence, NoneForIrregularData) {
    EXPECT_FALSE(detect_recurrence(std::vector<long long>{1, 2, 4, 7, 13, 29, 31, 100, 5}).has_value());
}

TEST(Recurrence, AgreesWithHankelOracle) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<long long> c(-2, 3), init(1, 9);
    for (int t = 0; t < 60; ++t) {
        const std::size_t k = 1 + rng() % 3;
        std::vector<long long> coef(k), s;
        for (auto& x : coef) x = c(rng);
        for (std::size_t i = 0; i < k; ++i) s.push_back(init(rng));
        while (s.size() < 14) {
            long long v = 0;
            for (std::size_t j = 0; j < k; ++j) v += coef[j] * s[s.size() - 1 - j];
            s.push_back(v);
        }
        if (std::all_of(s.begin(), s.end(), [](long long x) { return std::llabs(x) < (1LL << 40); })) {
            const auto got = detect_recurrence(s);
            const auto want = oracle_hankel(s, 6);
            ASSERT_EQ(got.has_value(), want.has_value());
            if (got) {
                EXPECT_EQ(*got, *want);
            }
        }
    }
}

TEST(Recurrence, GrowthRoot) {
    const auto root = recurrence_root({rat(3), rat(-1)});
    ASSERT_TRUE(root.has_value());
    EXPECT_NEAR(root->mid(), kPhi * kPhi, 1e-12);
}

TEST(Lambda1, FromDegrees) {
    const auto fibo = lambda1_from_degrees({3, 8, 21, 55, 144, 377, 987, 2584});
    EXPECT_EQ(fibo.provenance, "recurrence");
    EXPECT_NEAR(fibo.value, kPhi * kPhi, 1e-9);
    const auto cremona = lambda1_from_degrees({2, 1, 2, 1, 2, 1, 2, 1});
    EXPECT_NEAR(cremona.value, 1, 1e-12);
    const auto irregular = lambda1_from_degrees({4, 6, 10, 15, 34, 53, 82, 185});
    EXPECT_EQ(irregular.provenance, "root_bound");
    EXPECT_GE(irregular.value, std::sqrt(3.0));
}
