#include <asga/prox.hpp>
#include <asga/zoo.hpp>

#include <gtest/gtest.h>

using namespace asga;

namespace {

SeparableBoxL1Task random_task(Rng& rng, Index n, bool boxed) {
    SeparableBoxL1Task t;
    t.center = 2.0 * rng.normal_vector(n);
    t.linear = rng.normal_vector(n);
    t.quad_weight = rng.uniform() < 0.3 ? 0.0 : 3.0 * rng.uniform();
    t.l1_weight = rng.uniform() < 0.2 ? 0.0 : 2.0 * rng.uniform();
    if (boxed) {
        Vector lo(n), hi(n);
        for (Index j = 0; j < n; ++j) {
            lo[j] = -2.0 * rng.uniform();
            hi[j] = lo[j] + 3.0 * rng.uniform();
        }
        t.bounds = Domain::box(lo, hi);
    }
    return t;
}

} // namespace

TEST(SoftThreshold, Examples) {
    Vector y(4);
    y << 3.0, -0.5, 0.5, -2.0;
    const Vector s = soft_threshold(y, 1.0);
    EXPECT_DOUBLE_EQ(s[0], 2.0);
    EXPECT_EQ(s[1], 0.0);
    EXPECT_EQ(s[2], 0.0);
    EXPECT_DOUBLE_EQ(s[3], -1.0);
    EXPECT_EQ(soft_threshold(Vector::Constant(1, 1.0), 1.0)[0], 0.0);
    EXPECT_THROW(soft_threshold(y, -1.0), std::invalid_argument);
}

TEST(SolveSeparable, ReducesToProjection) {
    SeparableBoxL1Task t;
    t.center = Vector::LinSpaced(5, -3.0, 3.0);
    t.linear = Vector::Zero(5);
    t.bounds = Domain::uniform_box(5, -1.0, 1.0);
    EXPECT_TRUE(solve_separable(t).isApprox(project_box(t.center, t.bounds)));
}

TEST(SolveSeparable, ReducesToSoftThreshold) {
    Rng rng(4);
    SeparableBoxL1Task t;
    t.center = rng.normal_vector(10);
    t.linear = Vector::Zero(10);
    t.l1_weight = 0.4;
    EXPECT_TRUE(solve_separable(t).isApprox(soft_threshold(t.center, 0.4)));
}

TEST(SolveSeparable, ExactZeroAtThreshold) {
    SeparableBoxL1Task t;
    t.center = Vector::Constant(1, 1.5);
    t.linear = Vector::Constant(1, 0.5);
    t.l1_weight = 1.0;
    EXPECT_EQ(solve_separable(t)[0], 0.0);
}

TEST(SolveSeparable, ZeroClampedIntoBoxNotContainingOrigin) {
    SeparableBoxL1Task t;
    t.center = Vector::Constant(1, 0.1);
    t.linear = Vector::Zero(1);
    t.l1_weight = 1.0;
    t.bounds = Domain::uniform_box(1, 0.5, 2.0);
    EXPECT_EQ(solve_separable(t)[0], 0.5);
    EXPECT_TRUE(kkt_satisfied(t, solve_separable(t)));
}

TEST(SolveSeparable, MaskedThreshold) {
    SeparableBoxL1Task t;
    t.center = Vector::Constant(2, 0.5);
    t.linear = Vector::Zero(2);
    t.l1_weight = 1.0;
    t.l1_scale = Vector(2);
    t.l1_scale << 1.0, 0.0;
    const Vector x = solve_separable(t);
    EXPECT_EQ(x[0], 0.0);
    EXPECT_DOUBLE_EQ(x[1], 0.5);
}

TEST(SolveSeparable, MatchesBruteForceOnRandomTasks) {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const SeparableBoxL1Task t = random_task(rng, 1 + trial % 7, trial % 2 == 0);
        const Vector x = solve_separable(t);
        const Vector xb = brute_force_min(t, 1e-7);
        EXPECT_LE((x - xb).lpNorm<Eigen::Infinity>(), 1e-6) << "trial " << trial;
        EXPECT_TRUE(kkt_satisfied(t, x)) << "trial " << trial;
        EXPECT_LE(t.objective(x), t.objective(xb) + 1e-12);
    }
}

TEST(SolveSeparable, GridOracleAgreesInLowDimension) {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        SeparableBoxL1Task t = random_task(rng, 2, true);
        const Vector x = solve_separable(t);
        const Vector xg = brute_force_min([&](const Vector& v) { return t.objective(v); }, t.bounds, 1e-6);
        EXPECT_LE((x - xg).lpNorm<Eigen::Infinity>(), 1e-5);
    }
}

TEST(Kkt, DetectsWrongPoint) {
    Rng rng(5);
    const SeparableBoxL1Task t = random_task(rng, 4, true);
    Vector x = solve_separable(t);
    EXPECT_TRUE(kkt_satisfied(t, x));
    x[0] = 0.5 * (t.bounds.lo()[0] + t.bounds.hi()[0]) + 0.123;
    x = t.bounds.clamp(x);
    if ((x - solve_separable(t)).norm() > 1e-6) EXPECT_FALSE(kkt_satisfied(t, x));
}

TEST(BruteForce, Unsupported) {
    EXPECT_THROW(brute_force_min([](const Vector&) { return 0.0; }, Domain::whole_space(), 1e-3), Unsupported);
    EXPECT_THROW(brute_force_min([](const Vector&) { return 0.0; }, Domain::uniform_box(4, 0, 1), 1e-3), Unsupported);
}

TEST(SolveSeparable, Validation) {
    SeparableBoxL1Task t;
    t.center = Vector::Zero(2);
    t.linear = Vector::Zero(3);
    EXPECT_THROW(solve_separable(t), std::invalid_argument);
    t.linear = Vector::Zero(2);
    t.quad_weight = -1.0;
    EXPECT_THROW(solve_separable(t), std::invalid_argument);
}
