#pragma once

// Scaling-sequence arithmetic shared by the four ASGA schemes, the zeta-equation
// for the effective Lipschitz estimate, and the runtime-checkable complexity bounds.

#include <asga/errors.hpp>
#include <asga/root_finding.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace asga {

struct ScalingState {
    double S = 0.0;      ///< S_k = s_1 + ... + s_k
    double s_next = 0.0; ///< s_{k+1}
    double alpha = 1.0;  ///< s_{k+1} / S_{k+1}
    double L_hat = 0.0;  ///< constant used to produce s_{k+1}
};

/// Positive root s of  s^2 L = (1 + S mu)(S + s).
inline double next_step_size(double S, double mu, double L) {
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("next_step_size: L must be positive");
    if (!(S >= 0.0)) throw std::invalid_argument("next_step_size: S must be >= 0");
    if (!(mu >= 0.0)) throw std::invalid_argument("next_step_size: mu must be >= 0");
    const double A = 1.0 + S * mu;
    return (A + std::sqrt(A * A + 4.0 * L * S * A)) / (2.0 * L);
}

/// Residual of the defining quadratic, for invariant checks.
inline double step_size_residual(double S, double mu, double L, double s) {
    return s * s * L - (1.0 + S * mu) * (S + s);
}

/// Advance the scaling sequence with a given constant L.
inline ScalingState advance_scaling(double S, double mu, double L) {
    ScalingState st;
    st.L_hat = L;
    st.s_next = next_step_size(S, mu, L);
    st.S = S;
    st.alpha = st.s_next / (S + st.s_next);
    return st;
}

// ---------------------------------------------------------------------------
// Effective Lipschitz estimate when (nu, L_nu) are known.

/// L~_{k+1} = ((1-nu) / (2 (1+S mu) eps (1+nu)))^((1-nu)/(1+nu)) * L_nu^(2/(1+nu)).
inline double lhat_base(double S, double mu, double nu, double L_nu, double eps) {
    if (nu == 1.0) return L_nu;
    const double A = 1.0 + S * mu;
    const double expo = (1.0 - nu) / (1.0 + nu);
    return std::pow((1.0 - nu) / (2.0 * A * eps * (1.0 + nu)), expo) * std::pow(L_nu, 2.0 / (1.0 + nu));
}

/// zeta(theta) = theta - (1 + S mu + sqrt((1+S mu)^2 + 4 theta S (1+S mu)))^((1-nu)/(1+nu)) * L~.
inline double zeta(double theta, double S, double mu, double nu, double L_tilde) {
    const double A = 1.0 + S * mu;
    const double expo = (1.0 - nu) / (1.0 + nu);
    const double c = A + std::sqrt(A * A + 4.0 * theta * S * A);
    return theta - (expo == 0.0 ? 1.0 : std::pow(c, expo)) * L_tilde;
}

struct LhatSolution {
    double value = 0.0;
    double residual = 0.0;
    double L_tilde = 0.0;
    int iterations = 0; ///< root-finder iterations (0 when nu = 1)
    int doublings = 0;  ///< bracket expansions
};

inline constexpr double kZetaTolerance = 1e-10;

/// Solve zeta(L^) = 0: bracket [0, b] with zeta(0) < 0, double b until zeta(b) > 0,
/// then secant-bisection. zeta is convex in theta, so the root is unique.
inline LhatSolution solve_lhat_detailed(double S, double mu, double nu, double L_nu, double eps) {
    if (!(S >= 0.0) || !(mu >= 0.0)) throw std::invalid_argument("solve_lhat: S and mu must be >= 0");
    if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("solve_lhat: nu must lie in [0,1]");
    if (!(L_nu > 0.0)) throw std::invalid_argument("solve_lhat: L_nu must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("solve_lhat: eps must be positive");

    LhatSolution out;
    out.L_tilde = lhat_base(S, mu, nu, L_nu, eps);
    if (nu == 1.0) {
        out.value = L_nu;
        return out;
    }
    auto z = [&](double t) { return zeta(t, S, mu, nu, out.L_tilde); };
    const double f0 = z(0.0);
    double b = std::max(-f0, 1e-300);
    double fb = z(b);
    while (!(fb > 0.0)) {
        if (++out.doublings > 200 || !std::isfinite(b)) {
            throw NumericError("solve_lhat: no sign change after 200 bracket doublings");
        }
        b *= 2.0;
        fb = z(b);
    }
    auto accept = [](double t, double ft) { return std::abs(ft) <= 0.1 * kZetaTolerance * std::max(1.0, t); };
    const RootResult r = bisection_secant(z, 0.0, b, f0, fb, accept, 500);
    if (!(std::abs(r.residual) <= kZetaTolerance * std::max(1.0, r.root))) {
        throw NumericError("solve_lhat: root residual above tolerance");
    }
    out.value = r.root;
    out.residual = r.residual;
    out.iterations = r.iterations;
    return out;
}

inline double solve_lhat(double S, double mu, double nu, double L_nu, double eps) {
    return solve_lhat_detailed(S, mu, nu, L_nu, eps).value;
}

// ---------------------------------------------------------------------------
// Certificate and complexity bounds.

struct Certificate {
    double R = 0.0;   ///< upper estimate of B(x*, x0)
    double eps = 0.0; ///< target accuracy
};

/// R/S + eps/2, an upper bound on h(x_k) - h* whenever R >= B(x*, x0).
inline double certificate_bound(const Certificate& cert, double S) {
    if (!(S > 0.0)) throw std::invalid_argument("certificate_bound: S must be positive");
    return cert.R / S + 0.5 * cert.eps;
}

/// Upper bound on the oracle calls of ASGA-2/ASGA-4 after k iterations:
///   2 (1 - ln g2 / ln g1)(k+1) + (2 / ln g1) ln(g1 g2 L~ / L0).
inline double oracle_call_bound(double k, double gamma1, double gamma2, double L_tilde, double L0) {
    const double l1 = std::log(gamma1);
    return 2.0 * (1.0 - std::log(gamma2) / l1) * (k + 1.0) + (2.0 / l1) * std::log(gamma1 * gamma2 * L_tilde / L0);
}

/// First effective constant  ((1-nu)/(eps(1+nu)))^((1-nu)/(1+nu)) L_nu^(2/(1+nu)).
inline double first_lhat(double nu, double L_nu, double eps) {
    if (nu == 1.0) return L_nu;
    const double expo = (1.0 - nu) / (1.0 + nu);
    return std::pow((1.0 - nu) / (eps * (1.0 + nu)), expo) * std::pow(L_nu, 2.0 / (1.0 + nu));
}

/// mu = 0 rate: (gamma * 2^((1+3nu)/(1+nu)) L^(2/(1+nu)) / (eps^((1-nu)/(1+nu)) k^((1+3nu)/(1+nu)))) B + eps/2.
/// gamma = 1 for ASGA-1/3, gamma = gamma1 for the line-search variants.
inline double sublinear_rate_bound(double k, double nu, double L_nu, double eps, double B, double gamma = 1.0) {
    const double p = (1.0 + 3.0 * nu) / (1.0 + nu);
    const double num = gamma * std::pow(2.0, p) * std::pow(L_nu, 2.0 / (1.0 + nu));
    const double den = std::pow(eps, (1.0 - nu) / (1.0 + nu)) * std::pow(k, p);
    return num / den * B + 0.5 * eps;
}

/// mu > 0 rate: L1 (1 + mu^((1+nu)/(1+3nu)) eps^((1-nu)/(1+3nu)) / (2 g L^(2/(1+3nu))))^(-(1+3nu)/(1+nu)(k-1)) B + eps/2,
/// with g = 1 and L1 = first_lhat for ASGA-1/3, g = gamma1^((1+nu)/(1+3nu)) for the line-search variants.
inline double linear_rate_bound(double k, double nu, double L_nu, double mu, double eps, double B, double L1,
                                double gamma = 1.0) {
    const double q = 1.0 + 3.0 * nu;
    const double ratio = std::pow(mu, (1.0 + nu) / q) * std::pow(eps, (1.0 - nu) / q) /
                         (2.0 * std::pow(gamma, (1.0 + nu) / q) * std::pow(L_nu, 2.0 / q));
    const double expo = -(q / (1.0 + nu)) * (k - 1.0);
    return L1 * std::exp(expo * std::log1p(ratio)) * B + 0.5 * eps;
}

} // namespace asga
