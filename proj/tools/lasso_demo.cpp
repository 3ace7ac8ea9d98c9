// Runs ASGA-2 and FISTA on a small l1-regularized least-squares instance and prints the gap.
#include <asga/asga.hpp>

#include <cstdio>

int main() {
    using namespace asga;
    const InstanceBundle data = gen_inverse_laplace(100, 42);
    const CompositeProblem p = build_l1_least_squares(data, 1e-2);

    SolverConfig cfg;
    cfg.stop.max_iterations = 2000;
    const RunResult ref = run_solver(p, Method::FISTA, cfg);

    cfg.stop.max_iterations = 300;
    for (Method m : {Method::ASGA1, Method::ASGA2, Method::ASGA4, Method::NSDSG}) {
        const RunResult r = run_solver(p, m, cfg);
        r.rethrow_if_failed();
        std::printf("%-7s k=%-4lld N_f=%-5lld h=%.6f  (FISTA@2000: %.6f)\n", to_string(m).c_str(),
                    static_cast<long long>(r.trace.back().k), static_cast<long long>(r.oracle_calls), r.best_h,
                    ref.best_h);
    }
}
