#pragma once

// Composite problem  min_{x in C} h(x) = f(x) + psi(x)  and its first-order oracle.
//
// The norm is Euclidean throughout; the prox-function is w(x) = 0.5*||x - x0||^2,
// so the Bregman distance reduces to 0.5*||x - y||^2.

#include <asga/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace asga {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline void require_same_dim(Index expected, Index got, const char* what) {
    if (expected != got) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " + std::to_string(expected) +
                                    ", got " + std::to_string(got) + ")");
    }
}

// ---------------------------------------------------------------------------
// Domain C

class Domain {
public:
    enum class Kind { WholeSpace, Box };

    static Domain whole_space() { return Domain{}; }

    /// Componentwise box [lo, hi]; entries may be +-infinity.
    static Domain box(Vector lo, Vector hi) {
        require_same_dim(lo.size(), hi.size(), "Domain::box");
        for (Index j = 0; j < lo.size(); ++j) {
            if (std::isnan(lo[j]) || std::isnan(hi[j]) || lo[j] > hi[j]) {
                throw std::invalid_argument("Domain::box: need lo <= hi componentwise (index " + std::to_string(j) +
                                            ")");
            }
        }
        Domain d;
        d.kind_ = Kind::Box;
        d.lo_ = std::move(lo);
        d.hi_ = std::move(hi);
        return d;
    }

    static Domain uniform_box(Index n, double lo, double hi) {
        return box(Vector::Constant(n, lo), Vector::Constant(n, hi));
    }

    Kind kind() const noexcept { return kind_; }
    bool is_box() const noexcept { return kind_ == Kind::Box; }
    const Vector& lo() const noexcept { return lo_; }
    const Vector& hi() const noexcept { return hi_; }

    double lo(Index j) const { return is_box() ? lo_[j] : -kInf; }
    double hi(Index j) const { return is_box() ? hi_[j] : kInf; }

    /// True when every coordinate bound is finite.
    bool bounded() const { return is_box() && lo_.allFinite() && hi_.allFinite(); }

    bool contains(const Vector& x, double tol = 0.0) const {
        if (!is_box()) return true;
        require_same_dim(lo_.size(), x.size(), "Domain::contains");
        for (Index j = 0; j < x.size(); ++j) {
            const double slack = tol * (1.0 + std::abs(x[j]));
            if (x[j] < lo_[j] - slack || x[j] > hi_[j] + slack) return false;
        }
        return true;
    }

    Vector clamp(const Vector& y) const {
        if (!is_box()) return y;
        require_same_dim(lo_.size(), y.size(), "Domain::clamp");
        return y.cwiseMax(lo_).cwiseMin(hi_);
    }

private:
    Kind kind_ = Kind::WholeSpace;
    Vector lo_;
    Vector hi_;
};

// ---------------------------------------------------------------------------
// Simple part psi

/// psi(x) = 0 or psi(x) = lambda * sum_j c_j |x_j| with per-coordinate factors c_j in {0, 1}
/// (an empty factor vector means c_j = 1). The factors exist so an SVM bias term can stay unpenalized.
class SimplePart {
public:
    enum class Kind { Zero, L1 };

    static SimplePart zero() { return SimplePart{}; }

    static SimplePart l1(double lambda) { return l1_masked(lambda, Vector{}); }

    static SimplePart l1_masked(double lambda, Vector scale) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw std::invalid_argument("SimplePart::l1: lambda must be finite and >= 0");
        }
        if (scale.size() > 0 && (scale.array() < 0.0).any()) {
            throw std::invalid_argument("SimplePart::l1: negative coordinate factor");
        }
        SimplePart p;
        p.kind_ = Kind::L1;
        p.lambda_ = lambda;
        p.scale_ = std::move(scale);
        return p;
    }

    Kind kind() const noexcept { return kind_; }
    double lambda() const noexcept { return kind_ == Kind::L1 ? lambda_ : 0.0; }
    const Vector& scale() const noexcept { return scale_; }

    /// Weight of |x_j| in psi.
    double weight(Index j) const {
        if (kind_ == Kind::Zero) return 0.0;
        return scale_.size() == 0 ? lambda_ : lambda_ * scale_[j];
    }

    double operator()(const Vector& x) const {
        if (kind_ == Kind::Zero) return 0.0;
        if (scale_.size() == 0) return lambda_ * x.lpNorm<1>();
        require_same_dim(scale_.size(), x.size(), "SimplePart");
        return lambda_ * scale_.cwiseProduct(x.cwiseAbs()).sum();
    }

    /// psi is not strongly convex for either kind.
    double strong_convexity() const noexcept { return 0.0; }

private:
    Kind kind_ = Kind::Zero;
    double lambda_ = 0.0;
    Vector scale_;
};

// ---------------------------------------------------------------------------
// Smooth (or nonsmooth) part f

class SmoothFunction {
public:
    virtual ~SmoothFunction() = default;

    virtual Index dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    /// Returns f(x) and writes one element of the subdifferential into g.
    virtual double value_grad(const Vector& x, Vector& g) const = 0;
};

struct Smoothness {
    double nu = 1.0;
    double L_nu = 1.0;
};

// ---------------------------------------------------------------------------

/// Immutable after construction; safe to share between concurrent runs.
/// Oracle counters are per-run (OracleCounter), never stored here.
class CompositeProblem {
public:
    CompositeProblem(std::shared_ptr<const SmoothFunction> f, SimplePart psi, Domain domain, double mu_f,
                     std::optional<Smoothness> smoothness = std::nullopt, std::string name = "problem",
                     bool oracle_restricted_to_domain = false)
        : f_(std::move(f)), psi_(std::move(psi)), domain_(std::move(domain)), mu_f_(mu_f),
          smoothness_(smoothness), name_(std::move(name)), restricted_(oracle_restricted_to_domain) {
        if (!f_) throw std::invalid_argument("CompositeProblem: null smooth part");
        if (!(mu_f_ >= 0.0) || !std::isfinite(mu_f_)) throw std::invalid_argument("CompositeProblem: mu_f must be >= 0");
        if (domain_.is_box()) require_same_dim(f_->dim(), domain_.lo().size(), "CompositeProblem domain");
        if (psi_.scale().size() > 0) require_same_dim(f_->dim(), psi_.scale().size(), "CompositeProblem psi");
        if (smoothness_) {
            if (!(smoothness_->nu >= 0.0 && smoothness_->nu <= 1.0)) {
                throw std::invalid_argument("CompositeProblem: nu must lie in [0,1]");
            }
            if (!(smoothness_->L_nu > 0.0) || !std::isfinite(smoothness_->L_nu)) {
                throw std::invalid_argument("CompositeProblem: L_nu must be positive");
            }
        }
    }

    Index dim() const { return f_->dim(); }
    const SmoothFunction& f() const noexcept { return *f_; }
    std::shared_ptr<const SmoothFunction> f_ptr() const noexcept { return f_; }
    const SimplePart& psi() const noexcept { return psi_; }
    const Domain& domain() const noexcept { return domain_; }
    double mu_f() const noexcept { return mu_f_; }
    double mu_p() const noexcept { return psi_.strong_convexity(); }
    double mu() const noexcept { return mu_f_ + mu_p(); }
    const std::optional<Smoothness>& smoothness() const noexcept { return smoothness_; }
    const std::string& name() const noexcept { return name_; }
    bool oracle_restricted_to_domain() const noexcept { return restricted_; }

    /// h(x) without touching any counter (telemetry, tests).
    double objective(const Vector& x) const { return f_->value(x) + psi_(x); }

    CompositeProblem with_name(std::string name) const {
        CompositeProblem p = *this;
        p.name_ = std::move(name);
        return p;
    }

    CompositeProblem with_mu_f(double mu_f) const {
        return CompositeProblem(f_, psi_, domain_, mu_f, smoothness_, name_, restricted_);
    }

private:
    std::shared_ptr<const SmoothFunction> f_;
    SimplePart psi_;
    Domain domain_;
    double mu_f_;
    std::optional<Smoothness> smoothness_;
    std::string name_;
    bool restricted_;
};

// ---------------------------------------------------------------------------
// Oracle accounting: one call = one (value, subgradient) pair or one value-only evaluation.

class OracleCounter {
public:
    OracleCounter() = default;
    explicit OracleCounter(std::int64_t limit) : limit_(limit) {}

    void charge() {
        if (calls_ >= limit_) throw BudgetExhausted{};
        ++calls_;
    }

    std::int64_t calls() const noexcept { return calls_; }
    std::int64_t limit() const noexcept { return limit_; }
    void set_limit(std::int64_t limit) noexcept { limit_ = limit; }

private:
    std::int64_t calls_ = 0;
    std::int64_t limit_ = std::numeric_limits<std::int64_t>::max();
};

struct FirstOrder {
    double f = 0.0;
    Vector g;
};

namespace detail {

inline void check_point(const CompositeProblem& p, const Vector& x, const char* what) {
    require_same_dim(p.dim(), x.size(), what);
    if (!x.allFinite()) throw NumericError(std::string(what) + ": non-finite query point");
    if (p.oracle_restricted_to_domain() && !p.domain().contains(x, 1e-12)) {
        throw DomainViolation(std::string(what) + ": query point outside the feasible set");
    }
}

inline double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite oracle value");
    return v;
}

} // namespace detail

/// f(x) and a subgradient; one oracle call.
inline FirstOrder first_order(const CompositeProblem& p, const Vector& x, OracleCounter& counter) {
    detail::check_point(p, x, "first_order");
    counter.charge();
    FirstOrder out;
    out.g.resize(p.dim());
    out.f = detail::checked(p.f().value_grad(x, out.g), "first_order");
    if (!out.g.allFinite()) throw NumericError("first_order: non-finite subgradient");
    return out;
}

/// f(x) only; one oracle call.
inline double value_f(const CompositeProblem& p, const Vector& x, OracleCounter& counter) {
    detail::check_point(p, x, "value_f");
    counter.charge();
    return detail::checked(p.f().value(x), "value_f");
}

/// h(x) = f(x) + psi(x); one oracle call.
inline double eval_h(const CompositeProblem& p, const Vector& x, OracleCounter& counter) {
    detail::check_point(p, x, "eval_h");
    counter.charge();
    return detail::checked(p.f().value(x) + p.psi()(x), "eval_h");
}

/// One element of the subdifferential of f; one oracle call.
inline Vector subgrad_f(const CompositeProblem& p, const Vector& x, OracleCounter& counter) {
    return first_order(p, x, counter).g;
}

// ---------------------------------------------------------------------------

/// Inexact quadratic majorant constant for a Hoelder-continuous gradient:
///   L~ = ((1-nu)/(delta(1+nu)))^((1-nu)/(1+nu)) * L_nu^(2/(1+nu)),   with 0^0 := 1 at nu = 1.
inline double holder_majorant(double nu, double L_nu, double delta) {
    if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("holder_majorant: nu must lie in [0,1]");
    if (!(L_nu > 0.0)) throw std::invalid_argument("holder_majorant: L_nu must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("holder_majorant: delta must be positive");
    if (nu == 1.0) return L_nu;
    const double expo = (1.0 - nu) / (1.0 + nu);
    return std::pow((1.0 - nu) / (delta * (1.0 + nu)), expo) * std::pow(L_nu, 2.0 / (1.0 + nu));
}

/// Euclidean prox-function w(x) = 0.5*||x - x0||^2.
class ProxModel {
public:
    explicit ProxModel(Vector center) : center_(std::move(center)) {}

    const Vector& center() const noexcept { return center_; }

    double omega(const Vector& x) const {
        require_same_dim(center_.size(), x.size(), "ProxModel::omega");
        return 0.5 * (x - center_).squaredNorm();
    }

    /// B(x, y) = w(x) - w(y) - <grad w(y), x - y> = 0.5*||x - y||^2.
    double distance(const Vector& x, const Vector& y) const {
        require_same_dim(center_.size(), x.size(), "ProxModel::distance");
        require_same_dim(center_.size(), y.size(), "ProxModel::distance");
        return 0.5 * (x - y).squaredNorm();
    }

private:
    Vector center_;
};

inline double bregman(const ProxModel& model, const Vector& x, const Vector& y) { return model.distance(x, y); }

} // namespace asga
