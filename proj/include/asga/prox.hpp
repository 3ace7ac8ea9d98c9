#pragma once

// Closed-form solutions of the auxiliary problems.
//
// Every subproblem the solvers meet has the separable form
//
//   min_{x in [lo,hi]}  0.5*||x - x0||^2 + <a, x> + (q/2)*||x||^2 + sum_j r_j |x_j|
//
// whose optimality condition 0 in (1+q)x - (x0 - a) + r*d|x| + N_box(x) is solved
// per component by "shrink, scale, clamp". Projection, soft thresholding and the
// box+l1 case are all instances of this one rule.

#include <asga/problem.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

namespace asga {

inline Vector project_box(const Vector& y, const Domain& d) { return d.clamp(y); }

inline Vector soft_threshold(const Vector& y, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("soft_threshold: threshold must be >= 0");
    Vector out(y.size());
    for (Index j = 0; j < y.size(); ++j) {
        const double mag = std::abs(y[j]) - r;
        out[j] = mag > 0.0 ? std::copysign(mag, y[j]) : 0.0;
    }
    return out;
}

struct SeparableBoxL1Task {
    double quad_weight = 0.0; ///< q >= 0
    Vector linear;            ///< a
    double l1_weight = 0.0;   ///< r >= 0
    Vector l1_scale;          ///< optional per-coordinate factor on r (empty: all ones)
    Domain bounds;
    Vector center; ///< x0

    Index dim() const { return center.size(); }

    double threshold(Index j) const { return l1_scale.size() == 0 ? l1_weight : l1_weight * l1_scale[j]; }

    void validate() const {
        require_same_dim(center.size(), linear.size(), "SeparableBoxL1Task");
        if (l1_scale.size() > 0) require_same_dim(center.size(), l1_scale.size(), "SeparableBoxL1Task scale");
        if (bounds.is_box()) require_same_dim(center.size(), bounds.lo().size(), "SeparableBoxL1Task bounds");
        if (!(quad_weight >= 0.0)) throw std::invalid_argument("SeparableBoxL1Task: quad_weight must be >= 0");
        if (!(l1_weight >= 0.0)) throw std::invalid_argument("SeparableBoxL1Task: l1_weight must be >= 0");
    }

    /// Contribution of coordinate j at value t.
    double coordinate_objective(Index j, double t) const {
        const double d = t - center[j];
        return 0.5 * d * d + linear[j] * t + 0.5 * quad_weight * t * t + threshold(j) * std::abs(t);
    }

    double objective(const Vector& x) const {
        double total = 0.0;
        for (Index j = 0; j < x.size(); ++j) total += coordinate_objective(j, x[j]);
        return total;
    }
};

/// Unique minimizer of the task. Components with |x0_j - a_j| <= r_j and 0 in [lo_j, hi_j] are exactly 0.
inline Vector solve_separable(const SeparableBoxL1Task& task) {
    task.validate();
    const Index n = task.dim();
    const double scale = 1.0 / (1.0 + task.quad_weight);
    Vector x(n);
    for (Index j = 0; j < n; ++j) {
        const double m = task.center[j] - task.linear[j];
        const double mag = std::abs(m) - task.threshold(j);
        double v = mag > 0.0 ? std::copysign(mag * scale, m) : 0.0;
        if (task.bounds.is_box()) {
            const double lo = task.bounds.lo()[j];
            const double hi = task.bounds.hi()[j];
            if (v < lo) v = lo;
            else if (v > hi) v = hi;
        }
        x[j] = v;
    }
    return x;
}

/// Componentwise check of 0 in (1+q)x - (x0-a) + r*d|x| + N_box(x), by interval membership.
inline bool kkt_satisfied(const SeparableBoxL1Task& task, const Vector& x, double slack = 1e-10) {
    task.validate();
    require_same_dim(task.dim(), x.size(), "kkt_satisfied");
    for (Index j = 0; j < x.size(); ++j) {
        const double m = task.center[j] - task.linear[j];
        const double r = task.threshold(j);
        const double rho = (1.0 + task.quad_weight) * x[j] - m;
        // Interval [lo_s, hi_s] of r*d|x_j|.
        double lo_s = -r, hi_s = r;
        if (x[j] > 0.0) lo_s = hi_s = r;
        else if (x[j] < 0.0) lo_s = hi_s = -r;
        // Normal cone of [lo, hi] at x_j.
        const double blo = task.bounds.lo(j);
        const double bhi = task.bounds.hi(j);
        double lo_n = 0.0, hi_n = 0.0;
        if (x[j] <= blo) lo_n = -kInf;
        if (x[j] >= bhi) hi_n = kInf;
        if (x[j] < blo || x[j] > bhi) return false;
        const double tol = slack * std::max({1.0, std::abs(m), r, (1.0 + task.quad_weight) * std::abs(x[j])});
        // Need -rho in [lo_s + lo_n, hi_s + hi_n].
        if (-rho < lo_s + lo_n - tol || -rho > hi_s + hi_n + tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Brute-force minimizers used as independent test oracles.

namespace detail {

/// Golden-section search for a unimodal function on [a, b].
inline double golden_section(const std::function<double(double)>& fn, double a, double b, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = fn(c), fd = fn(d);
    for (int it = 0; it < 400 && (b - a) > tol; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fn(d);
        }
    }
    // Endpoints are candidates too (minimizer on the boundary).
    double best = 0.5 * (a + b);
    double fbest = fn(best);
    for (double t : {a, b}) {
        const double ft = fn(t);
        if (ft < fbest) {
            fbest = ft;
            best = t;
        }
    }
    return best;
}

/// Widen [lo, hi] to a finite bracket containing the minimizer of a strictly convex 1-D function.
inline std::pair<double, double> bracket_convex(const std::function<double(double)>& fn, double lo, double hi) {
    const double anchor = std::clamp(0.0, lo, hi);
    const double f0 = fn(anchor);
    double a = lo, b = hi;
    if (!std::isfinite(b)) {
        double step = 1.0;
        while (!(fn(anchor + step) > f0)) {
            step *= 2.0;
            if (step > 1e300) throw NumericError("bracket_convex: objective not coercive");
        }
        b = anchor + step;
    }
    if (!std::isfinite(a)) {
        double step = 1.0;
        while (!(fn(anchor - step) > f0)) {
            step *= 2.0;
            if (step > 1e300) throw NumericError("bracket_convex: objective not coercive");
        }
        a = anchor - step;
    }
    return {a, b};
}

} // namespace detail

/// Per-coordinate minimization of a separable strictly convex objective sum_j phi_j(x_j) over a box
/// (or the whole space). Golden-section search, interval width well below `resolution`.
inline Vector brute_force_min_separable(const std::function<double(Index, double)>& coord_obj, Index n,
                                        const Domain& d, double resolution) {
    if (!(resolution > 0.0)) throw std::invalid_argument("brute_force_min: resolution must be positive");
    Vector x(n);
    for (Index j = 0; j < n; ++j) {
        std::function<double(double)> fn = [&](double t) { return coord_obj(j, t); };
        auto [a, b] = detail::bracket_convex(fn, d.lo(j), d.hi(j));
        x[j] = detail::golden_section(fn, a, b, 1e-3 * resolution);
    }
    return x;
}

/// Grid search with successive zooming for dimension <= 3 over a bounded box.
inline Vector brute_force_min(const std::function<double(const Vector&)>& objective, const Domain& d,
                              double resolution) {
    if (!(resolution > 0.0)) throw std::invalid_argument("brute_force_min: resolution must be positive");
    if (!d.bounded()) {
        throw Unsupported("brute_force_min: grid mode needs a bounded box; use the separable mode instead");
    }
    const Index n = d.lo().size();
    if (n < 1 || n > 3) throw Unsupported("brute_force_min: grid mode supports dimension 1..3");

    constexpr int kPoints = 41;
    Vector lo = d.lo(), hi = d.hi();
    Vector best = 0.5 * (lo + hi);
    for (int round = 0; round < 200; ++round) {
        Vector h = (hi - lo) / (kPoints - 1);
        double fbest = kInf;
        Vector cand(n);
        const int total = static_cast<int>(std::pow(kPoints, n));
        for (int idx = 0; idx < total; ++idx) {
            int rem = idx;
            for (Index j = 0; j < n; ++j) {
                cand[j] = lo[j] + h[j] * (rem % kPoints);
                rem /= kPoints;
            }
            const double v = objective(cand);
            if (v < fbest) {
                fbest = v;
                best = cand;
            }
        }
        if (h.maxCoeff() <= 1e-2 * resolution) break;
        // Zoom to two cells around the incumbent, staying inside the box.
        lo = (best - 2.0 * h).cwiseMax(d.lo());
        hi = (best + 2.0 * h).cwiseMin(d.hi());
    }
    return best;
}

/// Independent oracle for solve_separable.
inline Vector brute_force_min(const SeparableBoxL1Task& task, double resolution) {
    task.validate();
    return brute_force_min_separable([&](Index j, double t) { return task.coordinate_objective(j, t); }, task.dim(),
                                     task.bounds, resolution);
}

} // namespace asga
