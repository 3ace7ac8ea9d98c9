#pragma once

#include <asga/errors.hpp>

#include <cmath>
#include <utility>

namespace asga {

struct RootResult {
    double root = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Secant steps safeguarded by bisection on a sign-changing bracket [a, b].
/// `accept(x, fx)` decides convergence; the bracket is kept with f(a) < 0 < f(b)
/// (or the opposite orientation, handled transparently).
template <class F, class Accept>
RootResult bisection_secant(F&& f, double a, double b, double fa, double fb, Accept&& accept, int max_iter = 200) {
    if (fa == 0.0) return {a, 0.0, 0, true};
    if (fb == 0.0) return {b, 0.0, 0, true};
    if ((fa < 0.0) == (fb < 0.0)) throw NumericError("bisection_secant: endpoints do not bracket a root");

    // Last two iterates for the secant step; start from the bracket ends.
    double x0 = a, f0 = fa, x1 = b, f1 = fb;
    double width_before = std::abs(b - a);
    RootResult best{std::abs(fa) < std::abs(fb) ? a : b, std::abs(fa) < std::abs(fb) ? fa : fb, 0, false};

    for (int it = 1; it <= max_iter; ++it) {
        double x = x1 - f1 * (x1 - x0) / (f1 - f0);
        const double lo = std::min(a, b), hi = std::max(a, b);
        // Bisect when the secant leaves the bracket or the bracket is not shrinking fast enough.
        if (!std::isfinite(x) || x <= lo || x >= hi || (it % 3 == 0 && std::abs(b - a) > 0.5 * width_before)) {
            x = 0.5 * (a + b);
            width_before = std::abs(b - a);
        }
        const double fx = f(x);
        if (std::abs(fx) < std::abs(best.residual)) best = {x, fx, it, false};
        if (accept(x, fx)) return {x, fx, it, true};

        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        x0 = x1;
        f0 = f1;
        x1 = x;
        f1 = fx;
        if (a == b || std::nextafter(std::min(a, b), std::max(a, b)) == std::max(a, b)) {
            best.iterations = it;
            best.converged = accept(best.root, best.residual);
            return best;
        }
    }
    best.iterations = max_iter;
    return best;
}

} // namespace asga
