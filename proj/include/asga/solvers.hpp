#pragma once

// The four accelerated (sub)gradient schemes.
//
//  ASGA-1  single subproblem, known (nu, L_nu)           reports x_k, N(k) = k
//  ASGA-2  single subproblem, backtracking on L           reports x_k
//  ASGA-3  double subproblem, known (nu, L_nu)            reports y_k, N(k) = 2k
//  ASGA-4  double subproblem, backtracking on L           reports y_k
//
// Every *_iterate function is transactional: all work happens on locals and the
// state is committed only after the last oracle call succeeds, so a budget
// interruption leaves the previous iterate intact.

#include <asga/errors.hpp>
#include <asga/estimation.hpp>
#include <asga/problem.hpp>
#include <asga/prox.hpp>
#include <asga/scaling.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

namespace asga {

struct AsgaParams {
    double eps = 1e-2;
    /// Strong-convexity modulus used in the scaling sequence; defaults to problem.mu().
    std::optional<double> mu;
    double L0 = 1.0;
    double gamma1 = 4.0;
    double gamma2 = 0.9;
    int max_trials = 60;
};

struct IterateState {
    Vector x;
    Vector y;
    Vector aux; ///< z_k (ASGA-1/2) or v_k (ASGA-3/4)
    Vector u;   ///< u_k (ASGA-3/4 only)
};

struct LineSearchState {
    double L = 1.0;
    double gamma1 = 4.0;
    double gamma2 = 0.9;
    int p = 0;                     ///< exponent accepted in the last inner cycle
    std::int64_t oracle_calls = 0; ///< N(k) spent by the scheme itself
};

struct AsgaState {
    std::int64_t k = 0;
    double S = 0.0;         ///< S_k
    ScalingState last_step; ///< (S_{k-1}, s_k, alpha_{k-1}, L) of the step that produced S_k
    EstimationState est;
    IterateState it;
    LineSearchState ls;
    double L_tilde = 0.0; ///< L~ of the last step (ASGA-1/3)
    std::optional<double> reported_f;
};

namespace detail {

inline double scaling_mu(const CompositeProblem& p, const AsgaParams& prm) {
    const double mu = prm.mu.value_or(p.mu());
    if (!(mu >= 0.0)) throw std::invalid_argument("ASGA: mu must be >= 0");
    return mu;
}

/// mu_f entering the lower models; never exceeds the scaling mu, so forcing mu = 0 drops it.
inline double model_mu_f(const CompositeProblem& p, const AsgaParams& prm) {
    return std::min(p.mu_f(), scaling_mu(p, prm));
}

inline const Smoothness& require_smoothness(const CompositeProblem& p, const char* who) {
    if (!p.smoothness()) throw ConfigError(std::string(who) + " needs the smoothness parameters (nu, L_nu)");
    return *p.smoothness();
}

inline void check_eps(const AsgaParams& prm) {
    if (!(prm.eps > 0.0)) throw std::invalid_argument("ASGA: eps must be positive");
}

/// Floor for the backtracked L. When the test passes with d = 0 (iterates sitting at an exact
/// minimizer) L would otherwise halve forever and the step size overflow.
inline constexpr double kMinLipschitz = 1e-100;

inline Vector blend(double alpha, const Vector& to, const Vector& from) { return alpha * to + (1.0 - alpha) * from; }

/// Task for u_{k+1} = argmin (w/2)||x - v||^2 + s(<g,x> + (mu_f/2)||x - pt||^2 + psi(x)) over C,
/// w = 1 + S_k mu (the strong-convexity modulus of phi_k; w = 1 when mu = 0). Divided through by w.
inline SeparableBoxL1Task inner_task(const CompositeProblem& p, const Vector& v, double s, const Vector& g,
                                     const Vector& pt, double mu_f, double w = 1.0) {
    const double r = s / w;
    SeparableBoxL1Task t;
    t.quad_weight = r * mu_f;
    t.linear = r * (g - mu_f * pt);
    t.l1_weight = r * p.psi().lambda();
    t.l1_scale = p.psi().scale();
    t.bounds = p.domain();
    t.center = v;
    return t;
}

} // namespace detail

inline AsgaState init_asga_state(const CompositeProblem& p, const Vector& x0, const AsgaParams& prm) {
    require_same_dim(p.dim(), x0.size(), "init_asga_state");
    if (!p.domain().contains(x0)) throw std::invalid_argument("init_asga_state: x0 must lie in C");
    if (!(prm.L0 > 0.0)) throw std::invalid_argument("init_asga_state: L0 must be positive");
    if (!(prm.gamma1 > 1.0) || !(prm.gamma2 < 1.0) || !(prm.gamma2 > 0.0)) {
        throw std::invalid_argument("init_asga_state: need gamma1 > 1 and 0 < gamma2 < 1");
    }
    AsgaState st;
    st.est = EstimationState::initial(x0);
    st.it.x = x0;
    st.it.y = x0;
    st.it.aux = x0;
    st.it.u = x0;
    st.ls.L = prm.L0;
    st.ls.gamma1 = prm.gamma1;
    st.ls.gamma2 = prm.gamma2;
    return st;
}

inline void asga1_iterate(const CompositeProblem& p, const AsgaParams& prm, AsgaState& st, OracleCounter& counter) {
    detail::check_eps(prm);
    const Smoothness& sm = detail::require_smoothness(p, "ASGA-1");
    const double mu = detail::scaling_mu(p, prm);
    const double S = st.S;

    const LhatSolution lh = solve_lhat_detailed(S, mu, sm.nu, sm.L_nu, prm.eps);
    const double s = next_step_size(S, mu, lh.value);
    const double S_next = S + s;
    const double alpha = s / S_next;

    Vector y = detail::blend(alpha, st.it.aux, st.it.x);
    const FirstOrder fo = first_order(p, y, counter);

    EstimationState est = st.est;
    est.accumulate(s, fo.f, fo.g, y, detail::model_mu_f(p, prm));
    est.refresh(p);
    Vector x_next = detail::blend(alpha, est.minimizer, st.it.x);

    st.last_step = {S, s, alpha, lh.value};
    st.S = S_next;
    st.L_tilde = lh.L_tilde;
    st.it.y = std::move(y);
    st.it.x = std::move(x_next);
    st.it.aux = est.minimizer;
    st.est = std::move(est);
    st.ls.oracle_calls += 1;
    st.reported_f.reset();
    ++st.k;
}

inline void asga2_iterate(const CompositeProblem& p, const AsgaParams& prm, AsgaState& st, OracleCounter& counter) {
    detail::check_eps(prm);
    const double mu = detail::scaling_mu(p, prm);
    const double mu_f = detail::model_mu_f(p, prm);
    const double S = st.S;

    for (int trial = 0; trial < prm.max_trials; ++trial) {
        const double L_bar = st.ls.L * std::pow(prm.gamma1, trial);
        const double s = next_step_size(S, mu, L_bar);
        const double S_next = S + s;
        const double alpha = s / S_next;

        Vector y = detail::blend(alpha, st.it.aux, st.it.x);
        const FirstOrder fo = first_order(p, y, counter);
        EstimationState est = st.est;
        est.accumulate(s, fo.f, fo.g, y, mu_f);
        est.refresh(p);
        Vector x_hat = detail::blend(alpha, est.minimizer, st.it.x);
        const double f_hat = value_f(p, x_hat, counter);

        const Vector d = x_hat - y;
        if (f_hat <= fo.f + fo.g.dot(d) + 0.5 * L_bar * d.squaredNorm() + 0.5 * alpha * prm.eps) {
            st.last_step = {S, s, alpha, L_bar};
            st.S = S_next;
            st.it.y = std::move(y);
            st.it.x = std::move(x_hat);
            st.it.aux = est.minimizer;
            st.est = std::move(est);
            st.ls.L = std::max(prm.gamma2 * L_bar, detail::kMinLipschitz);
            st.ls.p = trial;
            st.ls.oracle_calls += 2 * (trial + 1);
            st.reported_f = f_hat;
            ++st.k;
            return;
        }
    }
    throw LineSearchStall(st.k, prm.max_trials, st.ls.L * std::pow(prm.gamma1, prm.max_trials - 1));
}

inline void asga3_iterate(const CompositeProblem& p, const AsgaParams& prm, AsgaState& st, OracleCounter& counter) {
    detail::check_eps(prm);
    const Smoothness& sm = detail::require_smoothness(p, "ASGA-3");
    const double mu = detail::scaling_mu(p, prm);
    const double mu_f = detail::model_mu_f(p, prm);
    const double S = st.S;

    const LhatSolution lh = solve_lhat_detailed(S, mu, sm.nu, sm.L_nu, prm.eps);
    const double s = next_step_size(S, mu, lh.value);
    const double S_next = S + s;
    const double alpha = s / S_next;

    Vector x = detail::blend(alpha, st.it.aux, st.it.y);
    const FirstOrder fo = first_order(p, x, counter);
    Vector u = solve_separable(detail::inner_task(p, st.it.aux, s, fo.g, x, mu_f, 1.0 + S * mu));
    Vector y = detail::blend(alpha, u, st.it.y);
    const double f_y = value_f(p, y, counter);

    EstimationState est = st.est;
    est.accumulate(s, fo.f, fo.g, x, mu_f);
    est.refresh(p);

    st.last_step = {S, s, alpha, lh.value};
    st.S = S_next;
    st.L_tilde = lh.L_tilde;
    st.it.x = std::move(x);
    st.it.u = std::move(u);
    st.it.y = std::move(y);
    st.it.aux = est.minimizer;
    st.est = std::move(est);
    st.ls.oracle_calls += 2;
    st.reported_f = f_y;
    ++st.k;
}

inline void asga4_iterate(const CompositeProblem& p, const AsgaParams& prm, AsgaState& st, OracleCounter& counter) {
    detail::check_eps(prm);
    const double mu = detail::scaling_mu(p, prm);
    const double mu_f = detail::model_mu_f(p, prm);
    const double S = st.S;

    for (int trial = 0; trial < prm.max_trials; ++trial) {
        const double L_bar = st.ls.L * std::pow(prm.gamma1, trial);
        const double s = next_step_size(S, mu, L_bar);
        const double S_next = S + s;
        const double alpha = s / S_next;

        Vector x_hat = detail::blend(alpha, st.it.aux, st.it.y);
        const FirstOrder fo = first_order(p, x_hat, counter);
        Vector u = solve_separable(detail::inner_task(p, st.it.aux, s, fo.g, x_hat, mu_f, 1.0 + S * mu));
        Vector y_hat = detail::blend(alpha, u, st.it.y);
        const double f_hat = value_f(p, y_hat, counter);

        const Vector d = y_hat - x_hat;
        if (f_hat <= fo.f + fo.g.dot(d) + 0.5 * L_bar * d.squaredNorm() + 0.5 * alpha * prm.eps) {
            EstimationState est = st.est;
            est.accumulate(s, fo.f, fo.g, x_hat, mu_f);
            est.refresh(p);

            st.last_step = {S, s, alpha, L_bar};
            st.S = S_next;
            st.it.x = std::move(x_hat);
            st.it.u = std::move(u);
            st.it.y = std::move(y_hat);
            st.it.aux = est.minimizer;
            st.est = std::move(est);
            st.ls.L = std::max(prm.gamma2 * L_bar, detail::kMinLipschitz);
            st.ls.p = trial;
            st.ls.oracle_calls += 2 * (trial + 1);
            st.reported_f = f_hat;
            ++st.k;
            return;
        }
    }
    throw LineSearchStall(st.k, prm.max_trials, st.ls.L * std::pow(prm.gamma1, prm.max_trials - 1));
}

} // namespace asga
