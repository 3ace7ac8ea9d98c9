#pragma once

// Test-problem families: l1 least squares and elastic net on an ill-posed
// inverse-Laplace system, linear SVMs with hinge loss, and plain quadratics.

#include <asga/errors.hpp>
#include <asga/problem.hpp>

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace asga {

// ---------------------------------------------------------------------------
// Portable seeded randomness (the std distributions differ across standard libraries).

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(th);
        return r * std::cos(th);
    }

    Vector uniform_vector(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = uniform();
        return v;
    }

    Vector normal_vector(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

private:
    std::mt19937_64 eng_;
    std::optional<double> spare_;
};

// ---------------------------------------------------------------------------

/// Largest eigenvalue of A^T A (= ||A||_2^2) by power iteration.
struct PowerResult {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline PowerResult power_norm_sq(const Matrix& A, std::uint64_t seed = 7, int max_iter = 1000, double rtol = 1e-8) {
    if (A.size() == 0) throw std::invalid_argument("power_norm_sq: empty matrix");
    Rng rng(seed);
    Vector v = rng.normal_vector(A.cols());
    v.normalize();
    PowerResult out;
    double prev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Vector w = A.transpose() * (A * v);
        const double lam = v.dot(w);
        const double nw = w.norm();
        out.iterations = it;
        out.value = lam;
        if (nw == 0.0) {
            out.converged = true;
            break;
        }
        v = w / nw;
        if (it > 1 && std::abs(lam - prev) <= rtol * std::abs(lam)) {
            out.converged = true;
            break;
        }
        prev = lam;
    }
    return out;
}

/// Power estimate of ||A||_2^2 nudged upward by 1e-6 relative, so it can serve as a Lipschitz constant.
inline double lipschitz_ls(const Matrix& A, std::uint64_t seed = 7) {
    return power_norm_sq(A, seed).value * (1.0 + 1e-6);
}

// ---------------------------------------------------------------------------
// Smooth parts

/// f(x) = 0.5||y - Ax||^2 + 0.5*ridge*||x||^2
class LeastSquares final : public SmoothFunction {
public:
    LeastSquares(std::shared_ptr<const Matrix> A, Vector y, double ridge = 0.0)
        : A_(std::move(A)), y_(std::move(y)), ridge_(ridge) {
        if (!A_) throw std::invalid_argument("LeastSquares: null matrix");
        require_same_dim(A_->rows(), y_.size(), "LeastSquares");
        if (!(ridge_ >= 0.0)) throw std::invalid_argument("LeastSquares: ridge must be >= 0");
    }

    Index dim() const override { return A_->cols(); }

    double value(const Vector& x) const override {
        const Vector r = (*A_) * x - y_;
        return 0.5 * r.squaredNorm() + 0.5 * ridge_ * x.squaredNorm();
    }

    double value_grad(const Vector& x, Vector& g) const override {
        const Vector r = (*A_) * x - y_;
        g.noalias() = A_->transpose() * r;
        if (ridge_ != 0.0) g += ridge_ * x;
        return 0.5 * r.squaredNorm() + 0.5 * ridge_ * x.squaredNorm();
    }

    const Matrix& A() const { return *A_; }
    const Vector& y() const { return y_; }
    double ridge() const { return ridge_; }

private:
    std::shared_ptr<const Matrix> A_;
    Vector y_;
    double ridge_;
};

/// f(w~) = sum_i [1 - A_i w~]_+ + 0.5*ridge*||w||^2, where w is the first `ridge_dims` entries of w~.
/// Subgradient -A^T delta with delta_i = 1 iff A_i w~ < 1 (a margin of exactly 1 contributes 0).
class Hinge final : public SmoothFunction {
public:
    Hinge(std::shared_ptr<const Matrix> A, double ridge = 0.0, Index ridge_dims = 0)
        : A_(std::move(A)), ridge_(ridge), ridge_dims_(ridge_dims) {
        if (!A_) throw std::invalid_argument("Hinge: null matrix");
        if (!(ridge_ >= 0.0)) throw std::invalid_argument("Hinge: ridge must be >= 0");
        if (ridge_dims_ < 0 || ridge_dims_ > A_->cols()) throw std::invalid_argument("Hinge: bad ridge block");
    }

    Index dim() const override { return A_->cols(); }

    double value(const Vector& x) const override {
        const Vector m = (*A_) * x;
        return (1.0 - m.array()).max(0.0).sum() + ridge_term(x);
    }

    double value_grad(const Vector& x, Vector& g) const override {
        const Vector m = (*A_) * x;
        const Vector delta = active(m);
        g.noalias() = -(A_->transpose() * delta);
        if (ridge_ != 0.0) g.head(ridge_dims_) += ridge_ * x.head(ridge_dims_);
        return (1.0 - m.array()).max(0.0).sum() + ridge_term(x);
    }

    /// delta_i = 1 iff margin_i < 1.
    static Vector active(const Vector& margins) { return (margins.array() < 1.0).cast<double>(); }

    const Matrix& A() const { return *A_; }

private:
    double ridge_term(const Vector& x) const {
        return ridge_ == 0.0 ? 0.0 : 0.5 * ridge_ * x.head(ridge_dims_).squaredNorm();
    }

    std::shared_ptr<const Matrix> A_;
    double ridge_;
    Index ridge_dims_;
};

/// f(x) = 0.5 (x - c)^T Q (x - c) + offset
class Quadratic final : public SmoothFunction {
public:
    Quadratic(Matrix Q, Vector c, double offset = 0.0) : Q_(std::move(Q)), c_(std::move(c)), offset_(offset) {
        if (Q_.rows() != Q_.cols()) throw std::invalid_argument("Quadratic: Q must be square");
        require_same_dim(Q_.rows(), c_.size(), "Quadratic");
    }

    Index dim() const override { return c_.size(); }

    double value(const Vector& x) const override {
        const Vector d = x - c_;
        return 0.5 * d.dot(Q_ * d) + offset_;
    }

    double value_grad(const Vector& x, Vector& g) const override {
        const Vector d = x - c_;
        g.noalias() = Q_ * d;
        return 0.5 * d.dot(g) + offset_;
    }

    const Matrix& Q() const { return Q_; }
    const Vector& center() const { return c_; }
    double offset() const { return offset_; }

private:
    Matrix Q_;
    Vector c_;
    double offset_;
};

// ---------------------------------------------------------------------------
// Instances

struct InstanceBundle {
    std::shared_ptr<const Matrix> A;
    Vector y;
    std::optional<Vector> x_true;
    std::map<std::string, std::string> meta;
};

/// n-point Gauss-Laguerre rule for the weight e^{-t} on [0, inf): nodes from the Jacobi matrix,
/// weights w_j = t_j / ((n+1)^2 L_{n+1}(t_j)^2) returned as log w_j (they underflow for large t_j).
inline void gauss_laguerre(Index n, Vector& nodes, Vector& log_weights) {
    if (n < 1) throw std::invalid_argument("gauss_laguerre: n must be >= 1");
    Vector d(n), e(std::max<Index>(n - 1, 0));
    for (Index k = 0; k < n; ++k) d[k] = 2.0 * static_cast<double>(k) + 1.0;
    for (Index k = 0; k + 1 < n; ++k) e[k] = -(static_cast<double>(k) + 1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    nodes = es.eigenvalues();
    log_weights.resize(n);
    for (Index j = 0; j < n; ++j) {
        const double x = nodes[j];
        // Laguerre recurrence with running rescale
        double p0 = 1.0, p1 = 1.0 - x, lscale = 0.0;
        for (Index k = 1; k <= n; ++k) {
            const double kk = static_cast<double>(k);
            const double p2 = ((2.0 * kk + 1.0 - x) * p1 - kk * p0) / (kk + 1.0);
            p0 = p1;
            p1 = p2;
            const double mag = std::max(std::abs(p0), std::abs(p1));
            if (mag > 1e100 || (mag > 0.0 && mag < 1e-100)) {
                p0 /= mag;
                p1 /= mag;
                lscale += std::log(mag);
            }
        }
        log_weights[j] = std::log(x) - 2.0 * std::log(static_cast<double>(n) + 1.0) -
                         2.0 * (std::log(std::abs(p1)) + lscale);
    }
}

/// Inverse Laplace transform  int_0^inf e^{-st} x(t) dt = z(s)  on Gauss-Laguerre nodes t_j:
/// A_ij = w_j e^{t_j} e^{-s_i t_j}, s_i = 10 i / m, x_true(t) = exp(-t/2) (so z(s) = 1/(s + 1/2)),
/// y = A x_true + 0.1 u with u_i ~ U(0,1). m defaults to n.
inline InstanceBundle gen_inverse_laplace(Index n, std::uint64_t seed, std::optional<Index> rows = std::nullopt) {
    if (n < 8) throw std::invalid_argument("gen_inverse_laplace: n must be >= 8");
    const Index m = rows.value_or(n);
    if (m < 1) throw std::invalid_argument("gen_inverse_laplace: need at least one row");
    Vector t, logw;
    gauss_laguerre(n, t, logw);
    auto A = std::make_shared<Matrix>(m, n);
    for (Index i = 0; i < m; ++i) {
        const double s = 10.0 * static_cast<double>(i + 1) / static_cast<double>(m);
        for (Index j = 0; j < n; ++j) (*A)(i, j) = std::exp(logw[j] + (1.0 - s) * t[j]);
    }
    Vector x_true = (-0.5 * t.array()).exp().matrix();
    Rng rng(seed);
    InstanceBundle b;
    b.y = (*A) * x_true + 0.1 * rng.uniform_vector(m);
    b.A = std::move(A);
    b.x_true = std::move(x_true);
    b.meta = {{"generator", "inverse_laplace"},
              {"m", std::to_string(m)},
              {"n", std::to_string(n)},
              {"seed", std::to_string(seed)}};
    return b;
}

inline CompositeProblem build_l1_least_squares(const InstanceBundle& b, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("build_l1_least_squares: lambda must be > 0");
    auto f = std::make_shared<LeastSquares>(b.A, b.y);
    return CompositeProblem(f, SimplePart::l1(lambda), Domain::whole_space(), 0.0, Smoothness{1.0, lipschitz_ls(*b.A)},
                            "l1ls");
}

inline CompositeProblem build_elastic_net(const InstanceBundle& b, double lambda1, double lambda2,
                                          std::optional<Domain> box = std::nullopt) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
        throw std::invalid_argument("build_elastic_net: lambda1 and lambda2 must be > 0");
    }
    auto f = std::make_shared<LeastSquares>(b.A, b.y, lambda1);
    Domain dom = box ? *box : Domain::whole_space();
    const bool boxed = dom.is_box();
    return CompositeProblem(f, SimplePart::l1(lambda2), std::move(dom), lambda1,
                            Smoothness{1.0, lipschitz_ls(*b.A) + lambda1}, boxed ? "elastic_net_box" : "elastic_net");
}

// ---------------------------------------------------------------------------
// SVM

struct SvmData {
    Matrix X;      ///< m x n features
    Vector labels; ///< +-1

    Index samples() const { return X.rows(); }
    Index features() const { return X.cols(); }

    /// A = (diag(labels) X, labels), m x (n+1).
    Matrix augmented() const {
        Matrix A(X.rows(), X.cols() + 1);
        A.leftCols(X.cols()) = labels.asDiagonal() * X;
        A.col(X.cols()) = labels;
        return A;
    }
};

inline void validate_labels(const Vector& labels) {
    for (Index i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1.0 && labels[i] != -1.0) {
            throw std::invalid_argument("SVM labels must be +-1 (row " + std::to_string(i) + ")");
        }
    }
}

enum class SvmReg { L1, L22, L22L1 };

inline std::string to_string(SvmReg r) {
    switch (r) {
    case SvmReg::L1: return "svm_l1";
    case SvmReg::L22: return "svm_l22";
    case SvmReg::L22L1: return "svm_l22l1";
    }
    return "svm";
}

/// block_mu: expose mu_f = lambda for the L22 variants (strong convexity holds only on the w block,
/// so the default keeps mu_f = 0).
inline CompositeProblem build_svm(const SvmData& data, double lambda, SvmReg reg, bool block_mu = false) {
    if (!(lambda > 0.0)) throw std::invalid_argument("build_svm: lambda must be > 0");
    require_same_dim(data.X.rows(), data.labels.size(), "build_svm");
    validate_labels(data.labels);
    const Index n = data.features();
    auto A = std::make_shared<const Matrix>(data.augmented());
    const double L0 = std::sqrt(static_cast<double>(A->rows())) * std::sqrt(lipschitz_ls(*A));

    Vector mask = Vector::Ones(n + 1);
    mask[n] = 0.0; // bias unpenalized
    const bool ridge = reg != SvmReg::L1;
    auto f = std::make_shared<Hinge>(A, ridge ? lambda : 0.0, n);
    SimplePart psi = reg == SvmReg::L22 ? SimplePart::zero() : SimplePart::l1_masked(lambda, mask);
    const double mu_f = (ridge && block_mu) ? lambda : 0.0;
    return CompositeProblem(f, std::move(psi), Domain::whole_space(), mu_f, Smoothness{0.0, L0}, to_string(reg));
}

/// Two Gaussian clouds in n dimensions; the first `informative` features carry the class signal.
inline SvmData gen_synthetic_svm(Index m, Index n, std::uint64_t seed, Index informative = 5, double shift = 1.0) {
    if (m < 2 || n < 1) throw std::invalid_argument("gen_synthetic_svm: need m >= 2 and n >= 1");
    Rng rng(seed);
    SvmData d;
    d.X.resize(m, n);
    d.labels.resize(m);
    for (Index i = 0; i < m; ++i) {
        d.labels[i] = (i % 2 == 0) ? 1.0 : -1.0;
        for (Index j = 0; j < n; ++j) {
            d.X(i, j) = rng.normal() + (j < informative ? shift * d.labels[i] : 0.0);
        }
    }
    return d;
}

/// One sample per line: label, then features, comma separated. No header.
inline SvmData load_labeled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_labeled_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            std::string_view field = rest.substr(0, comma);
            while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
            while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
            if (!field.empty() && field.front() == '+') field.remove_prefix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
                throw FormatError(lineno, "bad numeric field '" + std::string(field) + "'");
            }
            row.push_back(v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (row.size() < 2) throw FormatError(lineno, "need a label and at least one feature");
        if (row[0] != 1.0 && row[0] != -1.0) throw FormatError(lineno, "label must be +1 or -1");
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw FormatError(lineno, "expected " + std::to_string(width - 1) + " features, got " +
                                          std::to_string(row.size() - 1));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("load_labeled_csv: no samples in " + path);
    SvmData d;
    d.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
    d.labels.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.labels[static_cast<Index>(i)] = rows[i][0];
        for (std::size_t j = 1; j < width; ++j) d.X(static_cast<Index>(i), static_cast<Index>(j - 1)) = rows[i][j];
    }
    return d;
}

inline void write_labeled_csv(const std::string& path, const SvmData& d) {
    std::ofstream out(path);
    if (!out) throw IoError("write_labeled_csv: cannot open " + path);
    char buf[64];
    for (Index i = 0; i < d.samples(); ++i) {
        out << (d.labels[i] > 0 ? "1" : "-1");
        for (Index j = 0; j < d.features(); ++j) {
            const auto r = std::to_chars(buf, buf + sizeof buf, d.X(i, j));
            out << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf));
        }
        out << '\n';
    }
    if (!out) throw IoError("write_labeled_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Quadratics with known solution

struct QuadraticInstance {
    CompositeProblem problem;
    Vector x_star;
    double h_star = 0.0;
};

/// 0.5 (x - x*)^T Q (x - x*) + offset with Q = V diag(eigs) V^T for a random orthogonal V.
inline QuadraticInstance build_quadratic(const Vector& eigs, std::uint64_t seed, double offset = 0.0,
                                         std::string name = "quadratic") {
    if (eigs.size() == 0 || (eigs.array() < 0.0).any()) {
        throw std::invalid_argument("build_quadratic: eigenvalues must be >= 0");
    }
    const Index n = eigs.size();
    Rng rng(seed);
    Matrix G(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) G(i, j) = rng.normal();
    }
    const Eigen::HouseholderQR<Matrix> qr(G);
    const Matrix V = qr.householderQ();
    Matrix Q = V * eigs.asDiagonal() * V.transpose();
    Q = 0.5 * (Q + Q.transpose());
    Vector x_star = rng.normal_vector(n);
    const double L = eigs.maxCoeff();
    const double mu = eigs.minCoeff();
    auto f = std::make_shared<Quadratic>(std::move(Q), x_star, offset);
    return {CompositeProblem(f, SimplePart::zero(), Domain::whole_space(), mu, Smoothness{1.0, L}, std::move(name)),
            x_star, offset};
}

/// Eigenvalues spread geometrically from mu to L.
inline Vector geometric_spectrum(Index n, double mu, double L) {
    if (n < 1 || !(L >= mu) || !(mu >= 0.0)) throw std::invalid_argument("geometric_spectrum: need n >= 1, 0 <= mu <= L");
    Vector e(n);
    if (n == 1) {
        e[0] = L;
        return e;
    }
    for (Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        e[i] = mu > 0.0 ? mu * std::pow(L / mu, t) : L * t;
    }
    return e;
}

} // namespace asga
