#pragma once

// Reference methods: diminishing-step subgradient (NSDSG), proximal gradient (PGA),
// FISTA, and the NESUN preset of ASGA-4.

#include <asga/errors.hpp>
#include <asga/problem.hpp>
#include <asga/prox.hpp>
#include <asga/solvers.hpp>

#include <cmath>
#include <optional>

namespace asga {

struct BaselineConfig {
    double alpha0 = 1e-1;    ///< NSDSG initial step
    std::optional<double> L; ///< PGA/FISTA constant; defaults to L_nu of a nu = 1 problem
    bool allow_constrained = false;
};

namespace detail {

/// argmin_{x in C} 0.5||x - (c - step*g)||^2 + step*psi(x)
inline Vector prox_step(const CompositeProblem& p, const Vector& c, const Vector& g, double step) {
    SeparableBoxL1Task t;
    t.linear = step * g;
    t.l1_weight = step * p.psi().lambda();
    t.l1_scale = p.psi().scale();
    t.bounds = p.domain();
    t.center = c;
    return solve_separable(t);
}

inline double lipschitz_for(const CompositeProblem& p, const BaselineConfig& cfg, const char* who) {
    if (cfg.L) {
        if (!(*cfg.L > 0.0)) throw ConfigError(std::string(who) + ": L must be positive");
        return *cfg.L;
    }
    if (!p.smoothness() || p.smoothness()->nu != 1.0) {
        throw ConfigError(std::string(who) + " needs a Lipschitz constant (nu = 1 problems only)");
    }
    return p.smoothness()->L_nu;
}

inline void check_unconstrained(const CompositeProblem& p, const BaselineConfig& cfg, const char* who) {
    if (p.domain().is_box() && !cfg.allow_constrained) {
        throw ConfigError(std::string(who) +
                          " is disabled on constrained problems (set allow_constrained to fold the box into the prox)");
    }
}

} // namespace detail

struct BaselineStep {
    Vector x_next;
    double f_current = 0.0; ///< f at the point where the oracle was queried
};

inline double nsdsg_step(double alpha0, std::int64_t k) { return alpha0 / std::sqrt(static_cast<double>(k)); }

/// x_{k+1} = prox_{a_k psi}^C(x_k - a_k g(x_k)),  a_k = alpha0 / sqrt(k),  k >= 1.
inline BaselineStep nsdsg_iterate(const CompositeProblem& p, const Vector& x, std::int64_t k, double alpha0,
                                  OracleCounter& counter) {
    if (k < 1) throw std::invalid_argument("nsdsg_iterate: k must be >= 1");
    if (!(alpha0 > 0.0)) throw std::invalid_argument("nsdsg_iterate: alpha0 must be positive");
    const double step = nsdsg_step(alpha0, k);
    const FirstOrder fo = first_order(p, x, counter);
    return {detail::prox_step(p, x, fo.g, step), fo.f};
}

/// x_{k+1} = prox_{psi/L}(x_k - g(x_k)/L).
inline BaselineStep pga_iterate(const CompositeProblem& p, const Vector& x, const BaselineConfig& cfg,
                                OracleCounter& counter) {
    detail::check_unconstrained(p, cfg, "PGA");
    const double L = detail::lipschitz_for(p, cfg, "PGA");
    const FirstOrder fo = first_order(p, x, counter);
    return {detail::prox_step(p, x, fo.g, 1.0 / L), fo.f};
}

struct FistaState {
    Vector x;
    Vector y;
    double t = 1.0;
    std::int64_t k = 0;
};

inline FistaState fista_init(const Vector& x0) { return {x0, x0, 1.0, 0}; }

inline double fista_next_t(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

inline void fista_iterate(const CompositeProblem& p, FistaState& st, const BaselineConfig& cfg,
                          OracleCounter& counter) {
    detail::check_unconstrained(p, cfg, "FISTA");
    const double L = detail::lipschitz_for(p, cfg, "FISTA");
    const FirstOrder fo = first_order(p, st.y, counter);
    Vector x_next = detail::prox_step(p, st.y, fo.g, 1.0 / L);
    const double t_next = fista_next_t(st.t);
    st.y = x_next + ((st.t - 1.0) / t_next) * (x_next - st.x);
    st.x = std::move(x_next);
    st.t = t_next;
    ++st.k;
}

/// ASGA-4 with mu = 0 and (gamma1, gamma2) = (2, 0.5).
inline AsgaParams nesun_preset(double eps = 1e-2, double L0 = 1.0, int max_trials = 60) {
    AsgaParams prm;
    prm.eps = eps;
    prm.mu = 0.0;
    prm.gamma1 = 2.0;
    prm.gamma2 = 0.5;
    prm.L0 = L0;
    prm.max_trials = max_trials;
    return prm;
}

} // namespace asga
