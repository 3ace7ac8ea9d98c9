#include <asga/baselines.hpp>
#include <asga/runner.hpp>
#include <asga/solvers.hpp>
#include <asga/zoo.hpp>

#include <gtest/gtest.h>

#include <functional>

using namespace asga;

namespace {

/// 0.5 a ||x - 1||^2 with the gradient sign flipped: no backtracking constant can satisfy the test.
class LyingQuadratic final : public SmoothFunction {
public:
    LyingQuadratic(Index n, double a) : n_(n), a_(a) {}
    Index dim() const override { return n_; }
    double value(const Vector& x) const override { return 0.5 * a_ * (x.array() - 1.0).matrix().squaredNorm(); }
    double value_grad(const Vector& x, Vector& g) const override {
        g = -a_ * (x.array() - 1.0).matrix();
        return value(x);
    }

private:
    Index n_;
    double a_;
};

using IterFn = std::function<void(const CompositeProblem&, const AsgaParams&, AsgaState&, OracleCounter&)>;

const std::vector<std::pair<std::string, IterFn>>& all_iterates() {
    static const std::vector<std::pair<std::string, IterFn>> v = {
        {"ASGA-1", asga1_iterate}, {"ASGA-2", asga2_iterate}, {"ASGA-3", asga3_iterate}, {"ASGA-4", asga4_iterate}};
    return v;
}

const Vector& reported(const std::string& name, const AsgaState& st) {
    return (name == "ASGA-1" || name == "ASGA-2") ? st.it.x : st.it.y;
}

InstanceBundle small_bundle() { return gen_inverse_laplace(30, 5, 20); }

} // namespace

TEST(Asga, OracleCountsOfKnownConstantVariants) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    AsgaParams prm;
    AsgaState s1 = init_asga_state(p, Vector::Zero(p.dim()), prm);
    AsgaState s3 = s1;
    OracleCounter c1, c3;
    for (int k = 1; k <= 50; ++k) {
        asga1_iterate(p, prm, s1, c1);
        asga3_iterate(p, prm, s3, c3);
        ASSERT_EQ(c1.calls(), k);
        ASSERT_EQ(c3.calls(), 2 * k);
        ASSERT_EQ(s1.ls.oracle_calls, k);
        ASSERT_EQ(s3.ls.oracle_calls, 2 * k);
    }
}

TEST(Asga, ScalingInvariantEveryStep) {
    const CompositeProblem p = build_elastic_net(small_bundle(), 1e-2, 1e-3);
    for (const auto& [name, step] : all_iterates()) {
        AsgaParams prm;
        AsgaState st = init_asga_state(p, Vector::Zero(p.dim()), prm);
        OracleCounter c;
        for (int k = 0; k < 60; ++k) {
            step(p, prm, st, c);
            const ScalingState& ls = st.last_step;
            const double res = step_size_residual(ls.S, p.mu(), ls.L_hat, ls.s_next);
            ASSERT_LE(std::abs(res), 1e-10 * std::max(1.0, ls.s_next * ls.s_next * ls.L_hat)) << name;
            ASSERT_DOUBLE_EQ(st.S, ls.S + ls.s_next) << name;
            ASSERT_NEAR(ls.alpha, ls.s_next / st.S, 1e-15) << name;
        }
    }
}

TEST(Asga, CertificateOnBoxConstrainedElasticNet) {
    const InstanceBundle b = small_bundle();
    const CompositeProblem p = build_elastic_net(b, 1e-2, 1e-2, Domain::uniform_box(b.A->cols(), -1.0, 1.0));
    for (const auto& [name, step] : all_iterates()) {
        AsgaParams prm;
        prm.eps = 1e-3;
        AsgaState st = init_asga_state(p, Vector::Zero(p.dim()), prm);
        OracleCounter c;
        for (int k = 0; k < 200; ++k) {
            step(p, prm, st, c);
            const Vector& x = reported(name, st);
            ASSERT_TRUE(p.domain().contains(x, 1e-14)) << name;
            ASSERT_TRUE(p.domain().contains(st.it.aux, 0.0)) << name;
            const double lhs = st.S * (p.objective(x) - 0.5 * prm.eps);
            ASSERT_LE(lhs, st.est.phi_star + 1e-8 * std::max(1.0, std::abs(st.est.phi_star))) << name << " k=" << k;
        }
    }
}

TEST(Asga, EstimationMinimumMatchesDirectEvaluation) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-1);
    AsgaParams prm;
    AsgaState st = init_asga_state(p, Vector::Zero(p.dim()), prm);
    OracleCounter c;
    for (int k = 0; k < 20; ++k) asga1_iterate(p, prm, st, c);
    // phi is strongly convex: the minimizer beats nearby points.
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const Vector x = st.est.minimizer + 1e-3 * rng.normal_vector(p.dim());
        EXPECT_GE(st.est.value(x, p.psi()), st.est.phi_star);
    }
    EXPECT_TRUE(kkt_satisfied(st.est.task(p), st.est.minimizer));
}

TEST(Asga, LineSearchAcceptsOnlyAboveTrueConstantByGamma) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    const double L = p.smoothness()->L_nu;
    for (auto step : {IterFn(asga2_iterate), IterFn(asga4_iterate)}) {
        AsgaParams prm;
        prm.L0 = 1e-6;
        AsgaState st = init_asga_state(p, Vector::Zero(p.dim()), prm);
        OracleCounter c;
        for (int k = 0; k < 100; ++k) {
            step(p, prm, st, c);
            EXPECT_LE(st.last_step.L_hat, prm.gamma1 * L * (1 + 1e-12));
        }
    }
}

TEST(Asga, MissingSmoothnessIsConfigError) {
    const InstanceBundle b = small_bundle();
    const CompositeProblem p(std::make_shared<LeastSquares>(b.A, b.y), SimplePart::l1(0.1), Domain::whole_space(), 0.0);
    AsgaParams prm;
    AsgaState st = init_asga_state(p, Vector::Zero(p.dim()), prm);
    OracleCounter c;
    EXPECT_THROW(asga1_iterate(p, prm, st, c), ConfigError);
    EXPECT_THROW(asga3_iterate(p, prm, st, c), ConfigError);
    EXPECT_NO_THROW(asga2_iterate(p, prm, st, c));
}

TEST(Asga, InitValidation) {
    const CompositeProblem p = build_elastic_net(small_bundle(), 1e-2, 1e-2, Domain::uniform_box(30, -1.0, 1.0));
    AsgaParams prm;
    EXPECT_THROW(init_asga_state(p, Vector::Constant(30, 2.0), prm), std::invalid_argument);
    prm.gamma1 = 1.0;
    EXPECT_THROW(init_asga_state(p, Vector::Zero(30), prm), std::invalid_argument);
    prm = AsgaParams{};
    prm.eps = 0.0;
    AsgaState st = init_asga_state(p, Vector::Zero(30), prm);
    OracleCounter c;
    EXPECT_THROW(asga1_iterate(p, prm, st, c), std::invalid_argument);
}

TEST(Asga, BudgetInterruptionLeavesStateUntouched) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    for (const auto& [name, step] : all_iterates()) {
        AsgaParams prm;
        AsgaState st = init_asga_state(p, Vector::Zero(p.dim()), prm);
        OracleCounter c;
        for (int k = 0; k < 5; ++k) step(p, prm, st, c);
        const AsgaState before = st;
        // one call left: ASGA-1 needs exactly one, the others need two
        c.set_limit(c.calls() + (name == "ASGA-1" ? 0 : 1));
        EXPECT_THROW(step(p, prm, st, c), BudgetExhausted) << name;
        EXPECT_EQ(st.k, before.k);
        EXPECT_EQ(st.S, before.S);
        EXPECT_TRUE(st.it.x == before.it.x);
        EXPECT_TRUE(st.it.y == before.it.y);
        EXPECT_TRUE(st.est.lin == before.est.lin);
    }
}

TEST(Asga, StallOnInconsistentOracle) {
    const CompositeProblem p(std::make_shared<LyingQuadratic>(4, 1e22), SimplePart::zero(), Domain::whole_space(), 0.0);
    for (auto step : {IterFn(asga2_iterate), IterFn(asga4_iterate)}) {
        AsgaParams prm;
        prm.eps = 1e-12;
        AsgaState st = init_asga_state(p, Vector::Zero(4), prm);
        OracleCounter c;
        try {
            step(p, prm, st, c);
            FAIL() << "expected LineSearchStall";
        } catch (const LineSearchStall& e) {
            EXPECT_EQ(e.trials(), 60);
            EXPECT_EQ(e.iteration(), 0);
        }
        EXPECT_EQ(c.calls(), 120);
        EXPECT_EQ(st.k, 0);
    }
}

TEST(Asga, StrongConvexityHelpsOnElasticNet) {
    const InstanceBundle b = gen_inverse_laplace(50, 9);
    const CompositeProblem p = build_elastic_net(b, 1e-1, 1e-3);
    // reference optimum from a long FISTA run
    FistaState fs = fista_init(Vector::Zero(50));
    OracleCounter ref;
    for (int k = 0; k < 20000; ++k) fista_iterate(p, fs, {}, ref);
    const double h_star = p.objective(fs.x);

    auto calls_to_gap = [&](std::optional<double> mu) {
        AsgaParams prm;
        prm.eps = 1e-8;
        prm.mu = mu;
        AsgaState st = init_asga_state(p, Vector::Zero(50), prm);
        OracleCounter c;
        for (int k = 0; k < 20000; ++k) {
            asga1_iterate(p, prm, st, c);
            if (p.objective(st.it.x) - h_star <= 1e-6) return c.calls();
        }
        return std::int64_t{-1};
    };
    const auto with_mu = calls_to_gap(std::nullopt);
    const auto without_mu = calls_to_gap(0.0);
    ASSERT_GT(with_mu, 0);
    EXPECT_TRUE(without_mu < 0 || with_mu < without_mu) << with_mu << " vs " << without_mu;
}

TEST(Asga, ForcingMuZeroDropsModelCurvature) {
    const CompositeProblem p = build_elastic_net(small_bundle(), 0.5, 1e-2);
    AsgaParams prm;
    prm.mu = 0.0;
    AsgaState st = init_asga_state(p, Vector::Zero(p.dim()), prm);
    OracleCounter c;
    asga1_iterate(p, prm, st, c);
    EXPECT_EQ(st.est.quad, 0.0);
    prm.mu.reset();
    AsgaState st2 = init_asga_state(p, Vector::Zero(p.dim()), prm);
    asga1_iterate(p, prm, st2, c);
    EXPECT_GT(st2.est.quad, 0.0);
}

// ---------------------------------------------------------------------------
// run_solver

TEST(Runner, ZeroBudgetGivesEmptyTrace) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    SolverConfig cfg;
    cfg.stop.max_oracle_calls = 0;
    const RunResult r = run_solver(p, Method::ASGA2, cfg);
    EXPECT_TRUE(r.trace.empty());
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.oracle_calls, 0);
    EXPECT_TRUE(r.x == Vector::Zero(p.dim()));
    EXPECT_EQ(r.stop_reason, "oracle_budget");
}

TEST(Runner, BudgetContractAndTraceInvariants) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    for (Method m : kAllMethods) {
        SolverConfig cfg;
        cfg.stop.max_oracle_calls = 101;
        cfg.R = 10.0;
        const RunResult r = run_solver(p, m, cfg);
        ASSERT_TRUE(r.ok()) << to_string(m) << ": " << r.error.value_or("");
        ASSERT_FALSE(r.trace.empty());
        EXPECT_LE(r.oracle_calls, 101);
        // calls spent on an interrupted iteration are counted but never reported
        EXPECT_LE(r.trace.back().N_f, r.oracle_calls);
        double best = kInf;
        for (std::size_t i = 0; i < r.trace.size(); ++i) {
            const RunRecord& rec = r.trace[i];
            best = std::min(best, rec.h);
            EXPECT_EQ(rec.k, static_cast<std::int64_t>(i + 1));
            if (i > 0) {
                EXPECT_GE(rec.N_f, r.trace[i - 1].N_f);
                EXPECT_GE(rec.wall_s, r.trace[i - 1].wall_s);
            }
            EXPECT_EQ(rec.cert_bound.has_value(), is_asga_family(m));
        }
        EXPECT_EQ(best, r.best_h);
        EXPECT_NEAR(r.trace.back().h, p.objective(r.x), 1e-12 * std::max(1.0, std::abs(r.trace.back().h)));
    }
}

TEST(Runner, CertificateStopRule) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    SolverConfig cfg;
    cfg.eps = 1e-2;
    cfg.R = 1.0;
    cfg.stop.certificate = true;
    cfg.stop.max_iterations = 100000;
    const RunResult r = run_solver(p, Method::ASGA1, cfg);
    EXPECT_EQ(r.stop_reason, "certificate");
    ASSERT_FALSE(r.trace.empty());
    EXPECT_LE(r.trace.back().cert_bound.value(), cfg.eps * (1 + 1e-12));
    EXPECT_GT(r.trace[r.trace.size() - 2].cert_bound.value(), cfg.eps);
    cfg.R.reset();
    EXPECT_THROW(run_solver(p, Method::ASGA1, cfg), ConfigError);
}

TEST(Runner, TimeBudgetStops) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    SolverConfig cfg;
    cfg.stop.seconds = 0.05;
    const RunResult r = run_solver(p, Method::ASGA4, cfg);
    EXPECT_EQ(r.stop_reason, "time");
    ASSERT_GE(r.trace.size(), 2u);
    EXPECT_LT(r.trace[r.trace.size() - 2].wall_s, 0.05);
}

TEST(Runner, FailureKeepsPartialTrace) {
    const CompositeProblem p(std::make_shared<LyingQuadratic>(4, 1e22), SimplePart::zero(), Domain::whole_space(), 0.0);
    SolverConfig cfg;
    cfg.eps = 1e-12;
    cfg.stop.max_iterations = 10;
    const RunResult r = run_solver(p, Method::ASGA4, cfg);
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.stop_reason, "error");
    EXPECT_THROW(r.rethrow_if_failed(), LineSearchStall);
}

TEST(Runner, NoStopRuleIsConfigError) {
    const CompositeProblem p = build_l1_least_squares(small_bundle(), 1e-2);
    EXPECT_THROW(run_solver(p, Method::ASGA1, SolverConfig{}), ConfigError);
}

TEST(Runner, MethodNames) {
    for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
    EXPECT_EQ(parse_method("asga3"), Method::ASGA3);
    EXPECT_EQ(parse_method("Nesun"), Method::NESUN);
    EXPECT_THROW(parse_method("newton"), std::invalid_argument);
}
