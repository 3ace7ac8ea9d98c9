#pragma once

#include <asga/baselines.hpp>
#include <asga/errors.hpp>
#include <asga/problem.hpp>
#include <asga/solvers.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asga {

enum class Method { ASGA1, ASGA2, ASGA3, ASGA4, NESUN, NSDSG, PGA, FISTA };

inline constexpr std::array<Method, 8> kAllMethods = {Method::ASGA1, Method::ASGA2, Method::ASGA3, Method::ASGA4,
                                                      Method::NESUN, Method::NSDSG, Method::PGA,   Method::FISTA};

inline std::string to_string(Method m) {
    switch (m) {
    case Method::ASGA1: return "ASGA-1";
    case Method::ASGA2: return "ASGA-2";
    case Method::ASGA3: return "ASGA-3";
    case Method::ASGA4: return "ASGA-4";
    case Method::NESUN: return "NESUN";
    case Method::NSDSG: return "NSDSG";
    case Method::PGA: return "PGA";
    case Method::FISTA: return "FISTA";
    }
    return "?";
}

/// Accepts "ASGA-1", "asga1", "nesun", ... (case and dashes ignored).
inline Method parse_method(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (c == '-' || c == '_' || c == ' ') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (Method m : kAllMethods) {
        std::string canon;
        for (char c : to_string(m)) {
            if (c != '-') canon.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        if (canon == key) return m;
    }
    throw std::invalid_argument("unknown solver: " + std::string(name));
}

inline bool is_asga_family(Method m) {
    return m == Method::ASGA1 || m == Method::ASGA2 || m == Method::ASGA3 || m == Method::ASGA4 ||
           m == Method::NESUN;
}

struct StopRule {
    std::optional<double> seconds;
    std::optional<std::int64_t> max_oracle_calls;
    std::optional<std::int64_t> max_iterations;
    bool certificate = false; ///< stop at the first k with R/S_k <= eps/2 (needs R)
};

struct SolverConfig {
    double eps = 1e-2;
    std::optional<double> R;
    StopRule stop;
    std::optional<double> mu; ///< overrides problem.mu() for ASGA-1..4
    double L0 = 1.0;
    std::optional<double> gamma1;
    std::optional<double> gamma2;
    int max_trials = 60;
    BaselineConfig baseline;
    std::optional<Vector> x0; ///< defaults to the projection of 0 onto C
    std::string params;       ///< free-form label copied into every record
};

struct RunRecord {
    std::string solver;
    std::string problem;
    std::string params;
    std::int64_t k = 0;
    double wall_s = 0.0;
    double h = 0.0;
    std::int64_t N_f = 0;
    double S = 0.0;
    std::optional<double> cert_bound;

    bool operator==(const RunRecord&) const = default;
};

struct RunResult {
    std::vector<RunRecord> trace;
    Vector x;     ///< last reported iterate
    Vector x_best;
    double best_h = std::numeric_limits<double>::infinity();
    std::int64_t oracle_calls = 0;
    std::string stop_reason;
    std::optional<std::string> error;
    std::exception_ptr failure;

    bool ok() const { return !error.has_value(); }
    void rethrow_if_failed() const {
        if (failure) std::rethrow_exception(failure);
    }
};

/// Parameters an ASGA-family method actually runs with.
inline AsgaParams asga_params_for(Method m, const SolverConfig& cfg) {
    if (m == Method::NESUN) return nesun_preset(cfg.eps, cfg.L0, cfg.max_trials);
    AsgaParams prm;
    prm.eps = cfg.eps;
    prm.mu = cfg.mu;
    prm.L0 = cfg.L0;
    prm.gamma1 = cfg.gamma1.value_or(4.0);
    prm.gamma2 = cfg.gamma2.value_or(0.9);
    prm.max_trials = cfg.max_trials;
    return prm;
}

inline Vector default_start(const CompositeProblem& p) { return p.domain().clamp(Vector::Zero(p.dim())); }

/// Runs `method` until the first satisfied stop rule, one RunRecord per outer iteration.
/// Failures inside an iteration end the run; the partial trace is kept and the error recorded.
inline RunResult run_solver(const CompositeProblem& problem, Method method, const SolverConfig& cfg) {
    using clock = std::chrono::steady_clock;
    RunResult out;
    const Vector x0 = cfg.x0 ? *cfg.x0 : default_start(problem);
    out.x = x0;
    out.x_best = x0;

    if (cfg.stop.certificate && !cfg.R) throw ConfigError("certificate stop rule needs R");
    if (!cfg.stop.seconds && !cfg.stop.max_oracle_calls && !cfg.stop.max_iterations && !cfg.stop.certificate) {
        throw ConfigError("run_solver: no stop rule configured");
    }

    OracleCounter counter(cfg.stop.max_oracle_calls.value_or(std::numeric_limits<std::int64_t>::max()));
    const auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    const bool asga = is_asga_family(method);
    const AsgaParams prm = asga ? asga_params_for(method, cfg) : AsgaParams{};
    AsgaState ast;
    FistaState fst;
    Vector xb = x0; // NSDSG / PGA iterate
    std::int64_t k = 0;

    try {
        if (asga) ast = init_asga_state(problem, x0, prm);
        else {
            require_same_dim(problem.dim(), x0.size(), "run_solver");
            fst = fista_init(x0);
        }

        while (true) {
            if (cfg.stop.seconds && elapsed() >= *cfg.stop.seconds) {
                out.stop_reason = "time";
                break;
            }
            if (cfg.stop.max_iterations && k >= *cfg.stop.max_iterations) {
                out.stop_reason = "iterations";
                break;
            }
            if (cfg.stop.certificate && asga && ast.S > 0.0 && *cfg.R / ast.S <= 0.5 * cfg.eps) {
                out.stop_reason = "certificate";
                break;
            }

            const Vector* reported = nullptr;
            std::optional<double> reported_f;
            switch (method) {
            case Method::ASGA1: asga1_iterate(problem, prm, ast, counter); break;
            case Method::ASGA2: asga2_iterate(problem, prm, ast, counter); break;
            case Method::ASGA3: asga3_iterate(problem, prm, ast, counter); break;
            case Method::ASGA4:
            case Method::NESUN: asga4_iterate(problem, prm, ast, counter); break;
            case Method::NSDSG: xb = nsdsg_iterate(problem, xb, k + 1, cfg.baseline.alpha0, counter).x_next; break;
            case Method::PGA: xb = pga_iterate(problem, xb, cfg.baseline, counter).x_next; break;
            case Method::FISTA: fista_iterate(problem, fst, cfg.baseline, counter); break;
            }
            ++k;
            if (asga) {
                const bool single = method == Method::ASGA1 || method == Method::ASGA2;
                reported = single ? &ast.it.x : &ast.it.y;
                reported_f = ast.reported_f;
            } else if (method == Method::FISTA) {
                reported = &fst.x;
            } else {
                reported = &xb;
            }

            const double h = reported_f ? *reported_f + problem.psi()(*reported) : problem.objective(*reported);
            if (!std::isfinite(h)) throw NumericError("run_solver: non-finite objective at iteration " + std::to_string(k));

            RunRecord rec;
            rec.solver = to_string(method);
            rec.problem = problem.name();
            rec.params = cfg.params;
            rec.k = k;
            rec.wall_s = elapsed();
            rec.h = h;
            rec.N_f = counter.calls();
            rec.S = asga ? ast.S : 0.0;
            if (asga && cfg.R) rec.cert_bound = certificate_bound({*cfg.R, cfg.eps}, ast.S);
            out.trace.push_back(std::move(rec));

            out.x = *reported;
            if (h < out.best_h) {
                out.best_h = h;
                out.x_best = *reported;
            }
        }
    } catch (const BudgetExhausted&) {
        out.stop_reason = "oracle_budget";
    } catch (const std::exception& e) {
        out.stop_reason = "error";
        out.error = e.what();
        out.failure = std::current_exception();
    }
    out.oracle_calls = counter.calls();
    return out;
}

} // namespace asga
