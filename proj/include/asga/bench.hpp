#pragma once

// Grid experiments: build a problem per grid point, race the solvers under a
// budget, persist one trace per cell plus a summary table.

#include <asga/errors.hpp>
#include <asga/runner.hpp>
#include <asga/zoo.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace asga {

namespace fs = std::filesystem;

struct GridPoint {
    std::optional<double> lambda;
    std::optional<double> lambda1;
    std::optional<double> lambda2;

    bool operator==(const GridPoint&) const = default;
};

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ConfigError("unknown output format: " + s);
}

inline std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

struct ExperimentConfig {
    /// l1ls | elastic_net | elastic_net_box | svm_l1 | svm_l22 | svm_l22l1 | quadratic
    std::string problem = "l1ls";
    Index n = 100;           ///< dimension (features for SVM)
    Index m = 50;            ///< SVM samples (synthetic data)
    std::string data;        ///< labeled CSV for SVM families; synthetic when empty
    double box_radius = 1.0; ///< elastic_net_box: C = [-r, r]^n
    std::vector<GridPoint> grid;
    std::vector<Method> solvers;
    double eps = 1e-2;
    std::optional<double> budget_seconds;
    std::optional<std::int64_t> budget_oracle;
    std::uint64_t seed = 1;
    std::string out = "out";
    OutputFormat format = OutputFormat::Csv;
    int jobs = 1;
    double L0 = 1.0;
    std::optional<double> nsdsg_alpha0; ///< defaults to 0.1, or 5e-11 for SVM families
    bool allow_constrained = false;

    void validate() const {
        if (grid.empty()) throw ConfigError("experiment: parameter grid is empty");
        if (solvers.empty()) throw ConfigError("experiment: solver list is empty");
        if (!budget_seconds && !budget_oracle) throw ConfigError("experiment: no budget given");
        if (budget_seconds && !(*budget_seconds > 0.0)) throw ConfigError("experiment: budget_seconds must be > 0");
        if (budget_oracle && *budget_oracle <= 0) throw ConfigError("experiment: budget_oracle must be > 0");
        if (!(eps > 0.0)) throw ConfigError("experiment: eps must be > 0");
        if (jobs < 1) throw ConfigError("experiment: jobs must be >= 1");
        if (out.empty()) throw ConfigError("experiment: output directory is empty");
    }
};

inline bool is_svm_family(const std::string& p) { return p.rfind("svm_", 0) == 0; }

// ---------------------------------------------------------------------------
// JSON config

inline void to_json(nlohmann::json& j, const GridPoint& g) {
    j = nlohmann::json::object();
    if (g.lambda) j["lambda"] = *g.lambda;
    if (g.lambda1) j["lambda1"] = *g.lambda1;
    if (g.lambda2) j["lambda2"] = *g.lambda2;
}

inline void from_json(const nlohmann::json& j, GridPoint& g) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "lambda") g.lambda = it.value().get<double>();
        else if (it.key() == "lambda1") g.lambda1 = it.value().get<double>();
        else if (it.key() == "lambda2") g.lambda2 = it.value().get<double>();
        else throw ConfigError("grid point: unknown key '" + it.key() + "'");
    }
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const auto& v = it.value();
            if (k == "problem") c.problem = v.get<std::string>();
            else if (k == "n") c.n = v.get<Index>();
            else if (k == "m") c.m = v.get<Index>();
            else if (k == "data") c.data = v.get<std::string>();
            else if (k == "box_radius") c.box_radius = v.get<double>();
            else if (k == "grid") c.grid = v.get<std::vector<GridPoint>>();
            else if (k == "solvers") {
                c.solvers.clear();
                for (const auto& s : v) c.solvers.push_back(parse_method(s.get<std::string>()));
            } else if (k == "eps") c.eps = v.get<double>();
            else if (k == "budget_seconds") c.budget_seconds = v.get<double>();
            else if (k == "budget_oracle") c.budget_oracle = v.get<std::int64_t>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else if (k == "out") c.out = v.get<std::string>();
            else if (k == "format") c.format = parse_format(v.get<std::string>());
            else if (k == "jobs") c.jobs = v.get<int>();
            else if (k == "L0") c.L0 = v.get<double>();
            else if (k == "nsdsg_alpha0") c.nsdsg_alpha0 = v.get<double>();
            else if (k == "allow_constrained") c.allow_constrained = v.get<bool>();
            else throw ConfigError("config: unknown key '" + k + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline nlohmann::json experiment_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["problem"] = c.problem;
    j["n"] = c.n;
    j["m"] = c.m;
    if (!c.data.empty()) j["data"] = c.data;
    j["box_radius"] = c.box_radius;
    j["grid"] = c.grid;
    auto& s = j["solvers"] = nlohmann::json::array();
    for (Method m : c.solvers) s.push_back(to_string(m));
    j["eps"] = c.eps;
    if (c.budget_seconds) j["budget_seconds"] = *c.budget_seconds;
    if (c.budget_oracle) j["budget_oracle"] = *c.budget_oracle;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["format"] = to_string(c.format);
    j["jobs"] = c.jobs;
    j["L0"] = c.L0;
    if (c.nsdsg_alpha0) j["nsdsg_alpha0"] = *c.nsdsg_alpha0;
    j["allow_constrained"] = c.allow_constrained;
    return j;
}

inline ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return experiment_from_json(j);
}

// ---------------------------------------------------------------------------
// Number formatting: shortest round-trip, '.' decimal, independent of the locale.

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

// ---------------------------------------------------------------------------
// Trace (de)serialization

inline constexpr const char* kTraceHeader = "solver,problem,params,k,wall_s,h,N_f,S,cert_bound";

inline std::string trace_to_csv(const std::vector<RunRecord>& trace) {
    std::string s = kTraceHeader;
    s += '\n';
    for (const RunRecord& r : trace) {
        s += csv_field(r.solver) + ',' + csv_field(r.problem) + ',' + csv_field(r.params) + ',' + std::to_string(r.k) +
             ',' + fmt_double(r.wall_s) + ',' + fmt_double(r.h) + ',' + std::to_string(r.N_f) + ',' + fmt_double(r.S) +
             ',' + (r.cert_bound ? fmt_double(*r.cert_bound) : std::string()) + '\n';
    }
    return s;
}

inline std::vector<RunRecord> trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) throw FormatError(1, "bad trace header");
    std::vector<RunRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 9) throw FormatError(lineno, "expected 9 fields");
        try {
            RunRecord r;
            r.solver = f[0];
            r.problem = f[1];
            r.params = f[2];
            r.k = std::stoll(f[3]);
            r.wall_s = parse_double(f[4]);
            r.h = parse_double(f[5]);
            r.N_f = std::stoll(f[6]);
            r.S = parse_double(f[7]);
            if (!f[8].empty()) r.cert_bound = parse_double(f[8]);
            out.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw FormatError(lineno, e.what());
        }
    }
    return out;
}

inline nlohmann::json record_to_json(const RunRecord& r) {
    nlohmann::json j;
    j["solver"] = r.solver;
    j["problem"] = r.problem;
    j["params"] = r.params;
    j["k"] = r.k;
    j["wall_s"] = r.wall_s;
    j["h"] = r.h;
    j["N_f"] = r.N_f;
    j["S"] = r.S;
    j["cert_bound"] = r.cert_bound ? nlohmann::json(*r.cert_bound) : nlohmann::json(nullptr);
    return j;
}

inline std::string trace_to_json(const std::vector<RunRecord>& trace) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RunRecord& r : trace) arr.push_back(record_to_json(r));
    return arr.dump(1) + '\n';
}

inline std::vector<RunRecord> trace_from_json(const std::string& text) {
    std::vector<RunRecord> out;
    try {
        for (const auto& j : nlohmann::json::parse(text)) {
            RunRecord r;
            r.solver = j.at("solver").get<std::string>();
            r.problem = j.at("problem").get<std::string>();
            r.params = j.at("params").get<std::string>();
            r.k = j.at("k").get<std::int64_t>();
            r.wall_s = j.at("wall_s").get<double>();
            r.h = j.at("h").get<double>();
            r.N_f = j.at("N_f").get<std::int64_t>();
            r.S = j.at("S").get<double>();
            if (!j.at("cert_bound").is_null()) r.cert_bound = j.at("cert_bound").get<double>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(0, e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment

struct CellResult {
    std::size_t index = 0;
    Method solver = Method::ASGA1;
    std::string problem;
    std::string params;
    RunResult run;

    double f_b() const { return run.best_h; }
};

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<std::string> files;

    bool all_ok() const {
        return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.run.ok(); });
    }
};

inline std::string params_label(const GridPoint& g) {
    std::string s;
    auto add = [&](const char* k, const std::optional<double>& v) {
        if (!v) return;
        if (!s.empty()) s += ';';
        s += std::string(k) + '=' + fmt_double(*v);
    };
    add("lambda", g.lambda);
    add("lambda1", g.lambda1);
    add("lambda2", g.lambda2);
    return s;
}

namespace detail {

inline double need(const std::optional<double>& v, const char* name, const std::string& family) {
    if (!v) throw ConfigError("problem " + family + " needs '" + name + "' in every grid point");
    return *v;
}

/// Shared data for every grid point (generated once).
struct ExperimentData {
    std::optional<InstanceBundle> bundle;
    std::optional<SvmData> svm;
};

inline ExperimentData make_data(const ExperimentConfig& c) {
    ExperimentData d;
    if (c.problem == "l1ls" || c.problem == "elastic_net" || c.problem == "elastic_net_box") {
        d.bundle = gen_inverse_laplace(c.n, c.seed);
    } else if (is_svm_family(c.problem)) {
        d.svm = c.data.empty() ? gen_synthetic_svm(c.m, c.n, c.seed) : load_labeled_csv(c.data);
    } else if (c.problem != "quadratic") {
        throw ConfigError("unknown problem family: " + c.problem);
    }
    return d;
}

inline CompositeProblem make_problem(const ExperimentConfig& c, const ExperimentData& d, const GridPoint& g) {
    const std::string& fam = c.problem;
    if (fam == "l1ls") return build_l1_least_squares(*d.bundle, need(g.lambda, "lambda", fam));
    if (fam == "elastic_net" || fam == "elastic_net_box") {
        std::optional<Domain> box;
        if (fam == "elastic_net_box") box = Domain::uniform_box(c.n, -c.box_radius, c.box_radius);
        return build_elastic_net(*d.bundle, need(g.lambda1, "lambda1", fam), need(g.lambda2, "lambda2", fam), box);
    }
    if (fam == "svm_l1") return build_svm(*d.svm, need(g.lambda, "lambda", fam), SvmReg::L1);
    if (fam == "svm_l22") return build_svm(*d.svm, need(g.lambda, "lambda", fam), SvmReg::L22);
    if (fam == "svm_l22l1") return build_svm(*d.svm, need(g.lambda, "lambda", fam), SvmReg::L22L1);
    if (fam == "quadratic") return build_quadratic(geometric_spectrum(c.n, 0.0, 1.0), c.seed).problem;
    throw ConfigError("unknown problem family: " + fam);
}

inline SolverConfig solver_config(const ExperimentConfig& c, const std::string& params) {
    SolverConfig s;
    s.eps = c.eps;
    s.stop.seconds = c.budget_seconds;
    s.stop.max_oracle_calls = c.budget_oracle;
    s.L0 = c.L0;
    s.baseline.alpha0 = c.nsdsg_alpha0.value_or(is_svm_family(c.problem) ? 5e-11 : 0.1);
    s.baseline.allow_constrained = c.allow_constrained;
    s.params = params;
    return s;
}

inline std::string sanitize(std::string s) {
    for (char& ch : s) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-' && ch != '_') ch = '_';
    }
    return s;
}

inline void write_file(const fs::path& p, const std::string& text, std::vector<std::string>& done) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (out) out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (out) out.flush();
    if (!out) throw IoError("failed writing " + p.string(), done);
    done.push_back(p.string());
}

} // namespace detail

/// Creates `dir` if needed and proves it writable with a probe file.
inline void ensure_writable_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("output directory not usable: " + dir);
    const fs::path probe = fs::path(dir) / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok") || !out.flush()) throw IoError("output directory not writable: " + dir);
    }
    fs::remove(probe, ec);
}

inline std::string cell_stem(const CellResult& c) {
    return "cell" + std::to_string(c.index) + "_" + detail::sanitize(to_string(c.solver)) + "_" +
           detail::sanitize(c.problem) + (c.params.empty() ? "" : "_" + detail::sanitize(c.params));
}

/// summary.csv: one row per cell with f_b = min h over the trace and the final N_f.
inline std::string summary_csv(const std::vector<CellResult>& cells) {
    std::string s = "solver,problem,params,f_b,N_f,k,stop,error\n";
    for (const CellResult& c : cells) {
        const std::int64_t k = c.run.trace.empty() ? 0 : c.run.trace.back().k;
        s += csv_field(to_string(c.solver)) + ',' + csv_field(c.problem) + ',' + csv_field(c.params) + ',' +
             fmt_double(c.f_b()) + ',' + std::to_string(c.run.oracle_calls) + ',' + std::to_string(k) + ',' +
             c.run.stop_reason + ',' + csv_field(c.run.error.value_or("")) + '\n';
    }
    return s;
}

/// Writes per-cell traces, convergence curves, the summary and (if any cell failed) errors.json.
/// Returns the list of written files. Throws IoError with the completed files on a failed write.
inline std::vector<std::string> emit_outputs(const std::vector<CellResult>& cells, OutputFormat format,
                                             const std::string& dir) {
    if (cells.empty()) throw std::invalid_argument("emit_outputs: no traces to write");
    std::vector<std::string> done;
    const fs::path base(dir);
    for (const CellResult& c : cells) {
        const std::string stem = cell_stem(c);
        if (format == OutputFormat::Csv) detail::write_file(base / (stem + ".csv"), trace_to_csv(c.run.trace), done);
        else detail::write_file(base / (stem + ".json"), trace_to_json(c.run.trace), done);

        std::string curve = "# k N_f wall_s h best_h\n";
        double best = kInf;
        for (const RunRecord& r : c.run.trace) {
            best = std::min(best, r.h);
            curve += std::to_string(r.k) + ' ' + std::to_string(r.N_f) + ' ' + fmt_double(r.wall_s) + ' ' +
                     fmt_double(r.h) + ' ' + fmt_double(best) + '\n';
        }
        detail::write_file(base / (stem + ".curve.dat"), curve, done);
    }
    detail::write_file(base / "summary.csv", summary_csv(cells), done);

    nlohmann::json errs = nlohmann::json::array();
    for (const CellResult& c : cells) {
        if (c.run.ok()) continue;
        errs.push_back({{"cell", c.index},
                        {"solver", to_string(c.solver)},
                        {"problem", c.problem},
                        {"params", c.params},
                        {"error", *c.run.error},
                        {"iterations_completed", c.run.trace.size()}});
    }
    if (!errs.empty()) detail::write_file(base / "errors.json", errs.dump(1) + '\n', done);
    return done;
}

/// Runs every (grid point, solver) cell. Cells share the immutable problem; with jobs > 1 they run on a
/// small thread pool. Output is written after all cells finish.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_writable_dir(cfg.out);

    const detail::ExperimentData data = detail::make_data(cfg);
    std::vector<CompositeProblem> problems;
    problems.reserve(cfg.grid.size());
    for (const GridPoint& g : cfg.grid) problems.push_back(detail::make_problem(cfg, data, g));

    ExperimentResult res;
    for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
        for (Method m : cfg.solvers) {
            CellResult c;
            c.index = res.cells.size();
            c.solver = m;
            c.problem = problems[gi].name();
            c.params = params_label(cfg.grid[gi]);
            res.cells.push_back(std::move(c));
        }
    }

    auto run_cell = [&](CellResult& c) {
        const std::size_t gi = c.index / cfg.solvers.size();
        try {
            c.run = run_solver(problems[gi], c.solver, detail::solver_config(cfg, c.params));
        } catch (const std::exception& e) {
            c.run.stop_reason = "error";
            c.run.error = e.what();
        }
    };

    if (cfg.jobs == 1) {
        for (CellResult& c : res.cells) run_cell(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int nthreads = std::min<int>(cfg.jobs, static_cast<int>(res.cells.size()));
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < res.cells.size(); i = next++) run_cell(res.cells[i]);
            });
        }
        for (auto& th : pool) th.join();
    }

    res.files = emit_outputs(res.cells, cfg.format, cfg.out);
    return res;
}

} // namespace asga
