#include <gtest/gtest.h>

#include <random>

#include <rzdyn/classlat.hpp>

using namespace rzdyn;

namespace {

// E1 over base point p, E2 over E1, E3 over E2, F over base point q.
TreePtr chain_tree() {
    auto t = std::make_shared<PrimeTree>(BaseLattice::projective_plane());
    t->add("E1", BasePoint{"p"});
    t->add("E2", PrimeParent{"E1"});
    t->add("E3", PrimeParent{"E2"});
    t->add("F", BasePoint{"q"});
    return t;
}

ClassVector h(const TreePtr& t, long long c = 1) { return ClassVector(t, {rat(c)}); }
ClassVector e(const TreePtr& t, const std::string& id, long long c = 1) {
    return ClassVector::exceptional(t, id, rat(c));
}

}  // namespace

TEST(Pairing, LineSquaresToOne) {
    auto t = chain_tree();
    EXPECT_EQ(pair(h(t), h(t)), 1);
}

TEST(Pairing, ExceptionalSquaresToMinusOne) {
    auto t = chain_tree();
    EXPECT_EQ(pair(e(t, "E1"), e(t, "E1")), -1);
    EXPECT_EQ(pair(e(t, "E1"), e(t, "E2")), 0);
    EXPECT_EQ(pair(h(t), e(t, "F")), 0);
}

TEST(Pairing, Bilinear) {
    auto t = chain_tree();
    EXPECT_EQ(pair(h(t) + e(t, "E1", 2), h(t) - e(t, "E1")), 3);
}

TEST(Pairing, DifferentTreesRejected) {
    auto a = chain_tree(), b = chain_tree();
    EXPECT_THROW(pair(h(a), h(b)), AmbientMismatch);
}

TEST(Tree, LevelsFollowParents) {
    auto t = chain_tree();
    EXPECT_EQ(t->prime("E1").level, 0);
    EXPECT_EQ(t->prime("E3").level, 2);
    EXPECT_EQ(t->prime("F").level, 0);
}

TEST(Tree, UnknownParentAndDuplicatesRejected) {
    PrimeTree t(BaseLattice::projective_plane());
    EXPECT_THROW(t.add("E", PrimeParent{"nope"}), ValidationError);
    t.add("E", BasePoint{"p"});
    EXPECT_THROW(t.add("E", BasePoint{"p"}), ValidationError);
}

TEST(Tree, ParentClosure) {
    auto t = chain_tree();
    EXPECT_TRUE(t->is_parent_closed({}));
    EXPECT_TRUE(t->is_parent_closed({"E1", "E2"}));
    EXPECT_FALSE(t->is_parent_closed({"E2"}));
}

TEST(BaseLatticeValidation, RejectsNonMinkowski) {
    BaseLattice b;
    b.labels = {"A", "B"};
    b.gram = QMatrix::from_rows({{rat(1), rat(0)}, {rat(0), rat(1)}});
    EXPECT_THROW(PrimeTree{b}, ValidationError);
}

TEST(Incarnation, PushToBaseKillsExceptionalPart) {
    auto t = chain_tree();
    EXPECT_EQ(incarnation(h(t) + e(t, "E1", 5), {}), h(t));
}

TEST(Incarnation, Restriction) {
    auto t = chain_tree();
    EXPECT_EQ(incarnation(h(t) + e(t, "E1") + e(t, "E2"), {"E1"}), h(t) + e(t, "E1"));
}

TEST(Incarnation, FullSupportIsIdentity) {
    auto t = chain_tree();
    const ClassVector a = h(t, 2) + e(t, "E1", -3) + e(t, "F", 7);
    EXPECT_EQ(incarnation(a, t->all()), a);
}

TEST(Incarnation, NonClosedModelRejected) {
    auto t = chain_tree();
    EXPECT_THROW(incarnation(h(t), {"E3"}), InvalidModel);
}

TEST(Defect, ChainValues) {
    auto t = chain_tree();
    const ClassVector a = h(t) + e(t, "E1") + e(t, "E2") + e(t, "E3");
    const auto d = defect_sequence(a, {{}, {"E1"}, {"E1", "E2"}, {"E1", "E2", "E3"}});
    EXPECT_EQ(d, (std::vector<Rational>{1, 0, -1, -2}));
}

TEST(Defect, LineIsConstant) {
    auto t = chain_tree();
    const auto d = defect_sequence(h(t), {{}, {"E1"}, {"E1", "E2"}, t->all()});
    for (const auto& x : d) EXPECT_EQ(x, 1);
}

TEST(Defect, DistinctPointsGiveMinusN) {
    auto t = std::make_shared<PrimeTree>(BaseLattice::projective_plane());
    const int n = 6;
    ClassVector a = ClassVector::zero(t);
    std::vector<PrimeSet> chain{{}};
    for (int k = 1; k <= n; ++k) {
        const std::string id = "E" + std::to_string(k);
        t->add(id, BasePoint{"p" + std::to_string(k)});
    }
    for (int k = 1; k <= n; ++k) {
        const std::string id = "E" + std::to_string(k);
        a = a + e(t, id);
        chain.push_back(chain.back());
        chain.back().insert(id);
    }
    EXPECT_EQ(defect_sequence(a, chain).back(), -n);
}

TEST(Defect, NonIncreasingChainRejected) {
    auto t = chain_tree();
    EXPECT_THROW(defect_sequence(h(t), {{"E1"}, {}}), InvalidModel);
}

TEST(Defect, WeilClassTruncation) {
    auto t = chain_tree();
    WeilClass w{{rat(3)}, [](const ExcPrime& p) { return Rational(1, p.level + 1); }};
    const auto d = defect_sequence(t, w, {{}, {"E1"}, {"E1", "E2"}});
    EXPECT_EQ(d, (std::vector<Rational>{9, 8, Rational(31, 4)}));
}

TEST(Canonical, LineOnPlane) {
    auto t = chain_tree();
    EXPECT_EQ(canonical_pairing(h(t), {}), -3);
}

TEST(Canonical, ExceptionalPrime) {
    auto t = chain_tree();
    EXPECT_EQ(canonical_pairing(e(t, "E1"), {"E1"}), -1);
    EXPECT_EQ(canonical_pairing(ClassVector::zero(t), t->all()), 0);
}

TEST(Canonical, SelfIntersectionDropsByOnePerBlowup) {
    // K^2 = 9 - (number of blowups) on a rational surface.
    auto t = chain_tree();
    EXPECT_EQ(self_intersection(canonical_class(t, {})), 9);
    EXPECT_EQ(self_intersection(canonical_class(t, t->all())), 5);
}

TEST(Canonical, MissingConfigurationRejected) {
    BaseLattice b = BaseLattice::projective_plane();
    b.canonical.reset();
    auto t = std::make_shared<PrimeTree>(b);
    EXPECT_THROW(canonical_class(t, {}), ConfigurationError);
}

TEST(Hodge, RandomPositiveClasses) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long long> coeff(-3, 3);
    for (int trial = 0; trial < 40; ++trial) {
        auto t = std::make_shared<PrimeTree>(BaseLattice::projective_plane());
        std::vector<std::string> ids;
        for (int k = 0; k < 6; ++k) {
            const std::string id = "P" + std::to_string(k);
            if (k == 0 || rng() % 3 == 0)
                t->add(id, BasePoint{id});
            else
                t->add(id, PrimeParent{ids[rng() % ids.size()]});
            ids.push_back(id);
        }
        std::map<std::string, Rational> exc;
        for (const auto& id : ids) exc[id] = rat(coeff(rng));
        const ClassVector a(t, {rat(8)}, exc);
        ASSERT_GT(self_intersection(a), 0);
        EXPECT_TRUE(negative_definite_on_orthogonal(a, t->all()));
    }
}

TEST(Hodge, RequiresPositiveClass) {
    auto t = chain_tree();
    EXPECT_THROW(negative_definite_on_orthogonal(e(t, "E1"), {"E1"}), PreconditionError);
}

TEST(Json, RoundTrip) {
    auto t = chain_tree();
    const PrimeTree back = prime_tree_from_json(to_json(*t));
    EXPECT_EQ(back.size(), t->size());
    EXPECT_EQ(back.prime("E3").level, 2);
    const ClassVector a = h(t, 2) + e(t, "E2", -1) + Rational(1, 3) * e(t, "F");
    EXPECT_EQ(class_vector_from_json(t, to_json(a)), a);
}

TEST(Json, InconsistentLevelRejected) {
    auto j = to_json(*chain_tree());
    j["primes"][1]["level"] = 5;
    EXPECT_THROW(prime_tree_from_json(j), ValidationError);
}
