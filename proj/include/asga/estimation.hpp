#pragma once

#include <asga/problem.hpp>
#include <asga/prox.hpp>

namespace asga {

/// Estimation function kept in closed form:
///
///   phi(x) = 0.5*||x - x0||^2 + <lin, x> + (quad/2)*||x||^2 + constant + psi_scale * psi(x)
///
/// Each update adds s*[f(p) + <g, x - p> + (mu_f/2)*||x - p||^2 + psi(x)], i.e.
///   lin += s*(g - mu_f*p),  quad += s*mu_f,  constant += s*(f - <g,p> + (mu_f/2)*||p||^2),  psi_scale += s.
struct EstimationState {
    Vector center;
    Vector lin;
    double quad = 0.0;
    double constant = 0.0;
    double psi_scale = 0.0;
    Vector minimizer;
    double phi_star = 0.0;

    /// phi_0 = B(., x0): minimizer x0, minimum value 0.
    static EstimationState initial(const Vector& x0) {
        EstimationState st;
        st.center = x0;
        st.lin = Vector::Zero(x0.size());
        st.minimizer = x0;
        return st;
    }

    void accumulate(double s, double f_val, const Vector& g, const Vector& point, double mu_f) {
        lin.noalias() += s * (g - mu_f * point);
        quad += s * mu_f;
        constant += s * (f_val - g.dot(point) + 0.5 * mu_f * point.squaredNorm());
        psi_scale += s;
    }

    SeparableBoxL1Task task(const CompositeProblem& p) const {
        SeparableBoxL1Task t;
        t.quad_weight = quad;
        t.linear = lin;
        t.l1_weight = psi_scale * p.psi().lambda();
        t.l1_scale = p.psi().scale();
        t.bounds = p.domain();
        t.center = center;
        return t;
    }

    double value(const Vector& x, const SimplePart& psi) const {
        return 0.5 * (x - center).squaredNorm() + lin.dot(x) + 0.5 * quad * x.squaredNorm() + constant +
               psi_scale * psi(x);
    }

    /// Recompute the minimizer over C and phi* from the stored coefficients.
    void refresh(const CompositeProblem& p) {
        minimizer = solve_separable(task(p));
        phi_star = value(minimizer, p.psi());
    }
};

} // namespace asga
