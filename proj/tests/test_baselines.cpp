#include <asga/baselines.hpp>
#include <asga/runner.hpp>
#include <asga/zoo.hpp>

#include <gtest/gtest.h>

using namespace asga;

namespace {
InstanceBundle bundle() { return gen_inverse_laplace(40, 2, 30); }
} // namespace

TEST(Nsdsg, StepSchedule) {
    EXPECT_DOUBLE_EQ(nsdsg_step(0.1, 1), 0.1);
    EXPECT_DOUBLE_EQ(nsdsg_step(0.1, 4), 0.05);
    EXPECT_DOUBLE_EQ(nsdsg_step(5e-11, 100), 5e-12);
}

TEST(Nsdsg, IterateIsProxStep) {
    const CompositeProblem p = build_l1_least_squares(bundle(), 0.3);
    Rng rng(1);
    const Vector x = rng.normal_vector(p.dim());
    OracleCounter c;
    const BaselineStep st = nsdsg_iterate(p, x, 9, 0.3, c);
    Vector g(p.dim());
    p.f().value_grad(x, g);
    const Vector expect = soft_threshold(x - 0.1 * g, 0.1 * 0.3);
    EXPECT_TRUE(st.x_next.isApprox(expect, 1e-14));
    EXPECT_EQ(c.calls(), 1);
    EXPECT_THROW(nsdsg_iterate(p, x, 0, 0.1, c), std::invalid_argument);
}

TEST(Pga, MonotoneDescent) {
    const CompositeProblem p = build_elastic_net(bundle(), 1e-3, 1e-2);
    Vector x = Vector::Zero(p.dim());
    OracleCounter c;
    double prev = p.objective(x);
    for (int k = 0; k < 200; ++k) {
        x = pga_iterate(p, x, {}, c).x_next;
        const double h = p.objective(x);
        EXPECT_LE(h, prev + 1e-12 * std::abs(prev));
        prev = h;
    }
}

TEST(Fista, TSequence) {
    double t = 1.0;
    for (int k = 0; k < 50; ++k) {
        const double tn = fista_next_t(t);
        EXPECT_NEAR(tn * tn - tn, t * t, 1e-9 * t * t);
        EXPECT_GE(tn, 0.5 * (k + 2));
        t = tn;
    }
}

TEST(Fista, ConvergesFasterThanPga) {
    const CompositeProblem p = build_l1_least_squares(bundle(), 1e-3);
    FistaState fs = fista_init(Vector::Zero(p.dim()));
    Vector xp = Vector::Zero(p.dim());
    OracleCounter c;
    for (int k = 0; k < 300; ++k) {
        fista_iterate(p, fs, {}, c);
        xp = pga_iterate(p, xp, {}, c).x_next;
    }
    EXPECT_LE(p.objective(fs.x), p.objective(xp));
}

TEST(Baselines, ConstrainedNeedsOptIn) {
    const InstanceBundle b = bundle();
    const CompositeProblem p = build_elastic_net(b, 1e-3, 1e-2, Domain::uniform_box(b.A->cols(), -1.0, 1.0));
    OracleCounter c;
    const Vector x = Vector::Zero(p.dim());
    EXPECT_THROW(pga_iterate(p, x, {}, c), ConfigError);
    FistaState fs = fista_init(x);
    EXPECT_THROW(fista_iterate(p, fs, {}, c), ConfigError);
    BaselineConfig cfg;
    cfg.allow_constrained = true;
    EXPECT_NO_THROW(fista_iterate(p, fs, cfg, c));
    EXPECT_TRUE(p.domain().contains(fs.x));
    EXPECT_TRUE(p.domain().contains(pga_iterate(p, x, cfg, c).x_next));
}

TEST(Baselines, NeedLipschitzConstant) {
    const CompositeProblem p = build_svm(gen_synthetic_svm(10, 4, 1), 0.1, SvmReg::L1);
    OracleCounter c;
    EXPECT_THROW(pga_iterate(p, Vector::Zero(p.dim()), {}, c), ConfigError);
    BaselineConfig cfg;
    cfg.L = 100.0;
    EXPECT_NO_THROW(pga_iterate(p, Vector::Zero(p.dim()), cfg, c));
}

TEST(Nesun, PresetParameters) {
    const AsgaParams prm = nesun_preset(1e-4, 2.0);
    EXPECT_EQ(prm.mu.value(), 0.0);
    EXPECT_EQ(prm.gamma1, 2.0);
    EXPECT_EQ(prm.gamma2, 0.5);
    EXPECT_EQ(prm.eps, 1e-4);
    EXPECT_EQ(prm.L0, 2.0);
}

TEST(Baselines, HugeLambdaDrivesIterateToZero) {
    const InstanceBundle b = bundle();
    const double lam = 1.01 * (b.A->transpose() * b.y).lpNorm<Eigen::Infinity>();
    const CompositeProblem p = build_l1_least_squares(b, lam);
    for (Method m : kAllMethods) {
        SolverConfig cfg;
        cfg.stop.max_iterations = 2000;
        cfg.x0 = Vector::Constant(p.dim(), 0.5);
        const RunResult r = run_solver(p, m, cfg);
        ASSERT_TRUE(r.ok()) << to_string(m) << ": " << r.error.value_or("");
        EXPECT_LE(r.x_best.lpNorm<Eigen::Infinity>(), m == Method::NSDSG ? 5e-2 : 1e-3) << to_string(m);
    }
}
