#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <rzdyn/lp.hpp>
#include <rzdyn/toric.hpp>

using namespace rzdyn;

namespace {

// Independent smoothness/completeness oracle: unimodular consecutive pairs and
// counter-clockwise angles summing to one full turn.
bool oracle_smooth_complete(const Fan& f) {
    double total = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec2 a = f.ray(i), b = f.ray(i + 1);
        if (a.x * b.y - a.y * b.x != 1) return false;
        double t = std::atan2(static_cast<double>(b.y), static_cast<double>(b.x)) -
                   std::atan2(static_cast<double>(a.y), static_cast<double>(a.x));
        if (t <= 0) t += 2 * std::numbers::pi;
        total += t;
    }
    return std::fabs(total - 2 * std::numbers::pi) < 1e-9;
}

// Each source cone, mapped by A, lies inside one closed target cone.
bool oracle_holomorphic(const MonomialMatrix& A, const Fan& src, const Fan& tgt) {
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec2 l = src.ray(i), r = src.ray(i + 1);
        const Vec2 p{A.a * l.x + A.b * l.y, A.c * l.x + A.d * l.y};
        const Vec2 q{A.a * r.x + A.b * r.y, A.c * r.x + A.d * r.y};
        bool found = false;
        for (std::size_t j = 0; j < tgt.size(); ++j) {
            const Vec2 u = tgt.ray(j), w = tgt.ray(j + 1);
            auto inside = [&](Vec2 v) { return u.x * v.y - u.y * v.x >= 0 && v.x * w.y - v.y * w.x >= 0; };
            if (inside(p) && inside(q)) found = true;
        }
        if (!found) return false;
    }
    return true;
}

// Degree of the homogenisation of (x^a y^b, x^c y^d).
long long oracle_monomial_degree(const MonomialMatrix& m) {
    return std::max({0LL, m.a + m.b, m.c + m.d}) + std::max({0LL, -m.a, -m.c}) + std::max({0LL, -m.b, -m.d});
}

Fan random_tower(std::mt19937_64& rng, int steps) {
    Fan f = p2_fan();
    for (int s = 0; s < steps; ++s) f = star_subdivide(f, rng() % f.size());
    return f;
}

QVector unit(std::size_t n, std::size_t i) {
    QVector v(n, Rational(0));
    v[i] = 1;
    return v;
}

QMatrix scalar(std::size_t n, long long s) {
    QMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = rat(s);
    return m;
}

const std::vector<MonomialMatrix> kMatrices{{2, 1, 1, 1}, {1, 0, 0, 2}, {2, 0, 2, 2}, {-1, 0, 0, -1}, {1, 2, -1, 1},
                                            {3, 1, 2, 1},  {2, -1, 1, 1}, {0, 1, 1, 0}, {-2, 1, 1, -3}, {3, -2, 1, 2}};

}  // namespace

TEST(Fan, ProjectivePlane) {
    const Fan f = p2_fan();
    EXPECT_EQ(f.size(), 3u);
    EXPECT_EQ(f.class_rank(), 1u);
    EXPECT_TRUE(is_smooth_complete(f));
}

TEST(Fan, NonSmoothRejected) {
    const Fan bad({{1, 0}, {1, 2}, {-1, -1}});
    EXPECT_FALSE(is_smooth_complete(bad));
    EXPECT_THROW(star_subdivide(bad, 0), ValidationError);
    const Fan twice({{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}});
    EXPECT_FALSE(is_smooth_complete(twice));
}

TEST(Fan, SubdivisionCreatesMinusOneCurve) {
    const Fan g = star_subdivide(p2_fan(), 0);
    EXPECT_EQ(g.size(), 4u);
    EXPECT_EQ(intersection_matrix(g)(1, 1), -1);
}

TEST(Fan, SubdivideAllWalls) {
    Fan g = p2_fan();
    g = star_subdivide(g, 4 % g.size());
    g = star_subdivide(g, 2);
    g = star_subdivide(g, 0);
    EXPECT_EQ(g.size(), 6u);
    EXPECT_EQ(g.class_rank(), 4u);
    EXPECT_TRUE(oracle_smooth_complete(g));
}

TEST(Fan, SmoothnessAgreesWithOracle) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 30; ++t) {
        const Fan f = random_tower(rng, 1 + static_cast<int>(rng() % 12));
        EXPECT_TRUE(is_smooth_complete(f));
        EXPECT_TRUE(oracle_smooth_complete(f));
    }
}

TEST(Intersection, BezoutOnPlane) {
    const QMatrix m = intersection_matrix(p2_fan());
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), 1);
    EXPECT_EQ(class_gram(p2_fan()), QMatrix::from_rows({{Rational(1)}}));
}

TEST(Intersection, PrincipalDivisorsAreNumericallyTrivial) {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Fan f = random_tower(rng, 8);
        const QMatrix m = intersection_matrix(f);
        for (const Vec2 mchar : {Vec2{1, 0}, Vec2{0, 1}}) {
            QVector div;
            for (const Vec2& v : f.rays()) div.push_back(rat(dot(mchar, v)));
            for (std::size_t j = 0; j < f.size(); ++j) {
                Rational s = 0;
                for (std::size_t i = 0; i < f.size(); ++i) s += div[i] * m(i, j);
                EXPECT_EQ(s, 0);
            }
        }
    }
}

TEST(Intersection, HodgeIndexSignature) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 5; ++t) {
        const Fan f = random_tower(rng, 3 + t * 4);
        const Signature s = signature(class_gram(f));
        EXPECT_EQ(s.positive, 1u);
        EXPECT_EQ(s.negative, f.class_rank() - 1);
    }
}

TEST(Intersection, CanonicalSelfIntersection) {
    std::mt19937_64 rng(9);
    for (int steps = 0; steps < 8; ++steps) {
        Fan f = p2_fan();
        for (int s = 0; s < steps; ++s) f = star_subdivide(f, rng() % f.size());
        const QVector k = canonical_divisor(f);
        EXPECT_EQ(divisor_pairing(f, k, k), 9 - steps);
    }
}

TEST(Intersection, ClassCoordinatesRoundTrip) {
    std::mt19937_64 rng(13);
    const Fan f = random_tower(rng, 6);
    std::uniform_int_distribution<long long> c(-4, 4);
    for (int t = 0; t < 20; ++t) {
        QVector a;
        for (std::size_t i = 0; i < f.size(); ++i) a.push_back(rat(c(rng)));
        const QVector cls = divisor_to_class(f, a);
        const QVector back = class_to_divisor(f, cls);
        const QVector b = divisor_to_class(f, back);
        EXPECT_EQ(cls, b);
        const QVector a2 = divisor_to_class(f, QVector(f.size(), Rational(1)));
        EXPECT_EQ(divisor_pairing(f, a, QVector(f.size(), Rational(1))), class_pairing(f, cls, a2));
    }
}

TEST(Refine, IdentityLeavesPlaneUnchanged) {
    const Fan p2 = p2_fan();
    EXPECT_EQ(refine_for_matrix(MonomialMatrix::identity(), p2, p2), p2);
}

TEST(Refine, ResultIsHolomorphicAndSmooth) {
    const Fan p2 = p2_fan();
    for (const auto& A : kMatrices) {
        const Fan f = refine_for_matrix(A, p2, p2);
        EXPECT_TRUE(oracle_smooth_complete(f));
        EXPECT_TRUE(oracle_holomorphic(A, f, p2));
    }
}

TEST(Refine, ContainsPreimageRays) {
    const MonomialMatrix A{1, 0, 0, 2};
    const Fan f = refine_for_matrix(A, p2_fan(), p2_fan());
    EXPECT_TRUE(f.find_ray({-2, -1}).has_value());
    EXPECT_TRUE(oracle_holomorphic(A, f, p2_fan()));
}

TEST(Refine, SingularMatrixRejected) {
    EXPECT_THROW(refine_for_matrix({1, 2, 2, 4}, p2_fan(), p2_fan()), DominanceError);
}

TEST(Refine, RayCapReported) {
    EXPECT_THROW(refine_for_matrix({1, 50, 0, 1}, p2_fan(), p2_fan(), 10), CapacityError);
}

TEST(Maps, IdentityPullbackIsIdentity) {
    std::mt19937_64 rng(1);
    const Fan f = random_tower(rng, 5);
    const QMatrix m = pullback_matrix(MonomialMatrix::identity(), f, f).matrix;
    EXPECT_EQ(m, QMatrix::identity(f.class_rank()));
}

TEST(Maps, NonHolomorphicRejected) {
    EXPECT_THROW(pullback_matrix({2, 1, 1, 1}, p2_fan(), p2_fan()), NotHolomorphic);
}

TEST(Maps, ProjectionFormula) {
    // F_* F^* = e(F) on the class group, and adjointness of the two maps.
    const Fan p2 = p2_fan();
    for (const auto& A : kMatrices) {
        const Fan f = refine_for_matrix(A, p2, p2);
        const QMatrix up = pullback_matrix(A, f, p2).matrix;
        const QMatrix down = pushforward_matrix(A, f, p2).matrix;
        EXPECT_EQ(down * up, scalar(1, std::llabs(A.determinant())));
        const QMatrix gs = class_gram(f), gt = class_gram(p2);
        for (std::size_t i = 0; i < f.class_rank(); ++i)
            EXPECT_EQ(bilinear(gs, up * unit(1, 0), unit(f.class_rank(), i)),
                      bilinear(gt, unit(1, 0), down * unit(f.class_rank(), i)));
    }
}

TEST(Maps, PullbackScalesSelfIntersection) {
    const Fan p2 = p2_fan();
    for (const auto& A : kMatrices) {
        const Fan f = refine_for_matrix(A, p2, p2);
        const QVector h = pullback_matrix(A, f, p2).matrix * QVector{Rational(1)};
        EXPECT_EQ(bilinear(class_gram(f), h, h), rat(std::llabs(A.determinant())));
    }
}

TEST(Maps, PullbackCommutesWithRefinement) {
    // Pulling back through a blowup of the target then projecting agrees with the direct pullback.
    const MonomialMatrix A{2, 1, 1, 1};
    const Fan p2 = p2_fan();
    const Fan tgt = star_subdivide(p2, 1);
    const Fan src = refine_for_matrix(A, refine_for_matrix(MonomialMatrix::identity(), p2, tgt), tgt);
    const QMatrix direct = pullback_matrix(A, src, p2).matrix;
    const QMatrix via = pullback_matrix(A, src, tgt).matrix * pullback_matrix(MonomialMatrix::identity(), tgt, p2).matrix;
    EXPECT_EQ(direct, via);
}

TEST(Positivity, MultiplesOfLine) {
    const Fan p2 = p2_fan();
    EXPECT_TRUE(nef_check(p2, {Rational(2)}));
    EXPECT_TRUE(nef_check(p2, {Rational(0)}));
    EXPECT_FALSE(nef_check(p2, {Rational(-1)}));
    EXPECT_TRUE(psef_check(p2, {Rational(1)}));
    EXPECT_FALSE(psef_check(p2, {Rational(-1)}));
}

TEST(Positivity, ExceptionalCurve) {
    const Fan g = star_subdivide(p2_fan(), 0);
    const QVector e = boundary_class(g, 1);
    EXPECT_TRUE(psef_check(g, e));
    EXPECT_FALSE(nef_check(g, e));
}

TEST(Positivity, PsefAgreesWithConeMembership) {
    // The effective cone of a toric surface is spanned by the boundary classes.
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<long long> c(-3, 3);
    for (int t = 0; t < 15; ++t) {
        const Fan f = random_tower(rng, 2 + t % 6);
        std::vector<QVector> gens;
        for (std::size_t i = 0; i < f.size(); ++i) gens.push_back(boundary_class(f, i));
        for (int s = 0; s < 12; ++s) {
            QVector cls;
            for (std::size_t i = 0; i < f.class_rank(); ++i) cls.push_back(rat(c(rng)));
            EXPECT_EQ(psef_check(f, cls), in_cone(gens, cls));
        }
    }
}

TEST(Positivity, NefAgreesWithCurvePairings) {
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<long long> c(-3, 3);
    for (int t = 0; t < 15; ++t) {
        const Fan f = random_tower(rng, 2 + t % 6);
        const QMatrix g = class_gram(f);
        for (int s = 0; s < 12; ++s) {
            QVector cls;
            for (std::size_t i = 0; i < f.class_rank(); ++i) cls.push_back(rat(c(rng)));
            bool expect = true;
            for (std::size_t i = 0; i < f.size(); ++i)
                if (bilinear(g, cls, boundary_class(f, i)) < 0) expect = false;
            EXPECT_EQ(nef_check(f, cls), expect);
        }
    }
}

TEST(Positivity, NefClassesPairNonnegativelyWithPsef) {
    std::mt19937_64 rng(23);
    const Fan f = random_tower(rng, 7);
    const QMatrix g = class_gram(f);
    std::uniform_int_distribution<long long> c(-3, 3);
    for (int s = 0; s < 200; ++s) {
        QVector x, y;
        for (std::size_t i = 0; i < f.class_rank(); ++i) {
            x.push_back(rat(c(rng)));
            y.push_back(rat(c(rng)));
        }
        if (nef_check(f, x) && psef_check(f, y)) {
            EXPECT_GE(bilinear(g, x, y), 0);
        }
        if (nef_check(f, x)) {
            EXPECT_GE(bilinear(g, x, x), 0);
        }
    }
}

TEST(Degrees, IdentityIsConstant) {
    EXPECT_EQ(toric_degree_sequence(MonomialMatrix::identity(), 5), (std::vector<long long>{1, 1, 1, 1, 1}));
}

TEST(Degrees, Fibonacci) {
    EXPECT_EQ(toric_degree_sequence({2, 1, 1, 1}, 8), (std::vector<long long>{3, 8, 21, 55, 144, 377, 987, 2584}));
}

TEST(Degrees, DegenerateFamily) {
    EXPECT_EQ(toric_degree_sequence({2, 0, 2, 2}, 6), (std::vector<long long>{4, 12, 32, 80, 192, 448}));
}

TEST(Degrees, MatchHomogenisationFormula) {
    for (const auto& A : kMatrices) {
        MonomialMatrix p = MonomialMatrix::identity();
        const auto degs = toric_degree_sequence(A, 6);
        for (std::size_t n = 0; n < degs.size(); ++n) {
            p = p * A;
            EXPECT_EQ(degs[n], oracle_monomial_degree(p));
        }
    }
}

TEST(Degrees, CapacityCarriesPartialSequence) {
    try {
        toric_degree_sequence({1, 7, 0, 1}, 6, 40);
        FAIL() << "expected a capacity error";
    } catch (const CapacityError& e) {
        EXPECT_FALSE(e.partial().empty());
        EXPECT_EQ(e.partial().front(), 8);
    }
}

TEST(Bridge, PairingsAgree) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<long long> c(-3, 3);
    for (int t = 0; t < 10; ++t) {
        const Fan f = random_tower(rng, 1 + t);
        auto tree = std::make_shared<const PrimeTree>(toric_prime_tree(f));
        const QMatrix g = class_gram(f);
        for (int s = 0; s < 10; ++s) {
            QVector x, y;
            for (std::size_t i = 0; i < f.class_rank(); ++i) {
                x.push_back(rat(c(rng)));
                y.push_back(rat(c(rng)));
            }
            const ClassVector cx = toric_to_class_vector(f, tree, x);
            const ClassVector cy = toric_to_class_vector(f, tree, y);
            EXPECT_EQ(pair(cx, cy), bilinear(g, x, y));
            EXPECT_EQ(class_vector_to_toric(f, cx), x);
        }
    }
}

TEST(Bridge, CanonicalClassesAgree) {
    std::mt19937_64 rng(32);
    for (int t = 0; t < 8; ++t) {
        const Fan f = random_tower(rng, 1 + t);
        auto tree = std::make_shared<const PrimeTree>(toric_prime_tree(f));
        const QVector k = divisor_to_class(f, canonical_divisor(f));
        EXPECT_EQ(toric_to_class_vector(f, tree, k), canonical_class(tree, fan_primes(f)));
    }
}

TEST(Bridge, TreeIsParentClosed) {
    std::mt19937_64 rng(33);
    const Fan f = random_tower(rng, 12);
    const PrimeTree tree = toric_prime_tree(f);
    EXPECT_EQ(tree.size(), f.size() - 3);
    EXPECT_TRUE(tree.is_parent_closed(fan_primes(f)));
}

TEST(Json, FanRoundTrip) {
    std::mt19937_64 rng(34);
    const Fan f = random_tower(rng, 4);
    EXPECT_EQ(fan_from_json(to_json(f)), f);
    EXPECT_THROW(fan_from_json(nlohmann::json{{"rays", {{1, 0}, {1, 2}, {-1, -1}}}}), ValidationError);
}
