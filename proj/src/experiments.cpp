#include "mgbeam/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace mgbeam {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Beampattern: return "beampattern";
        case ExperimentKind::AngularSweep: return "angular_sweep";
        case ExperimentKind::AntennaSweep: return "antenna_sweep";
        case ExperimentKind::ConvergenceTrace: return "convergence_trace";
    }
    return "unknown";
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Sdr: return "sdr";
        case Method::FppSca: return "fpp_sca";
        case Method::RelaxedBound: return "relaxed_bound";
    }
    return "unknown";
}

std::vector<double> SweepGrid::values() const {
    std::vector<double> out;
    if (step <= 0.0) throw std::invalid_argument("SweepGrid: step must be positive");
    for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
    return out;
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "beampattern") return ExperimentKind::Beampattern;
    if (s == "angular_sweep") return ExperimentKind::AngularSweep;
    if (s == "antenna_sweep") return ExperimentKind::AntennaSweep;
    if (s == "convergence_trace") return ExperimentKind::ConvergenceTrace;
    throw std::invalid_argument("ExperimentSpec: unknown kind '" + s + "'");
}

Method method_from_string(const std::string& s) {
    if (s == "sdr") return Method::Sdr;
    if (s == "fpp_sca") return Method::FppSca;
    if (s == "relaxed_bound") return Method::RelaxedBound;
    throw std::invalid_argument("ExperimentSpec: unknown method '" + s + "'");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class CsvFile {
  public:
    CsvFile(const fs::path& path, const std::string& schema, const std::string& header)
        : path_(path.string()), out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path_ + " for writing");
        out_ << "# schema=" << schema << "\n" << header << "\n";
    }
    void row(const std::string& line) { out_ << line << "\n"; }
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
};

double wall_ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string join_ranks(const std::vector<int>& ranks) {
    std::string s;
    for (size_t i = 0; i < ranks.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(ranks[i]);
    }
    return s;
}

// one result line of a sweep point
struct MethodRow {
    std::string status = "ok";
    double t_star = std::nan("");    // relaxed bound (sdr/bound) or SCA bisection value
    double achieved = std::nan("");  // min_i SINR_i / gamma_i of the emitted precoder
    double min_sinr = std::nan("");
    double min_rate = std::nan("");
    double slack_max = std::nan("");
    std::string ranks;
    int iterations = 0;
    double wall_ms = 0.0;
};

struct PointResult {
    std::vector<std::pair<std::string, MethodRow>> rows;  // (method_seed key not needed)
    std::vector<std::uint64_t> row_seeds;
    std::vector<std::string> row_methods;
    int failures = 0;
};

bool has_method(const ExperimentSpec& spec, Method m) {
    for (Method x : spec.methods)
        if (x == m) return true;
    return false;
}

// SDR + relaxed bound + SCA rows for one scenario; shared by the sweeps
PointResult solve_point(const ExperimentSpec& spec, const Scenario& sc) {
    PointResult pr;
    auto push = [&](const std::string& method, std::uint64_t seed, const MethodRow& row) {
        pr.rows.push_back({method, row});
        pr.row_methods.push_back(method);
        pr.row_seeds.push_back(seed);
    };

    const bool want_sdr = has_method(spec, Method::Sdr);
    const bool want_bound = has_method(spec, Method::RelaxedBound);
    const bool want_sca = has_method(spec, Method::FppSca);

    if (want_sdr || want_bound) {
        try {
            const auto t0 = std::chrono::steady_clock::now();
            SdrOptions opt;
            opt.epsilon = spec.epsilon;
            opt.n_rand = spec.n_rand;
            opt.solver.tol = spec.solver_tol;
            opt.solver.max_iter = spec.solver_max_iter;
            opt.seed = spec.seeds.empty() ? 1 : spec.seeds.front();
            SdrFairnessResult first = sdr_max_min_fair(sc, opt);
            const double bisect_ms = wall_ms_since(t0);

            if (want_bound) {
                MethodRow row;
                row.t_star = first.bisection.t_star;
                row.min_sinr = first.bisection.t_star;  // equal weights
                row.min_rate = std::log2(1.0 + row.min_sinr);
                row.iterations = first.bisection.iterations;
                row.wall_ms = bisect_ms;
                push("relaxed_bound", 0, row);
            }
            if (want_sdr) {
                for (std::uint64_t seed : spec.seeds) {
                    const auto t1 = std::chrono::steady_clock::now();
                    PrecoderSet ps =
                        gaussian_randomization(first.relaxed, sc, spec.n_rand, seed);
                    MethodRow row;
                    const MetricsReport m = evaluate(ps, sc);
                    row.t_star = first.bisection.t_star;
                    row.achieved = m.min_sinr_over_target;
                    row.min_sinr = m.min_sinr;
                    row.min_rate = m.min_rate;
                    row.ranks = join_ranks(first.ranks);
                    row.iterations = first.bisection.iterations;
                    row.wall_ms = bisect_ms + wall_ms_since(t1);
                    push("sdr", seed, row);
                }
            }
        } catch (const std::exception& e) {
            MethodRow row;
            row.status = std::string("error: ") + e.what();
            ++pr.failures;
            if (want_bound) push("relaxed_bound", 0, row);
            if (want_sdr)
                for (std::uint64_t seed : spec.seeds) push("sdr", seed, row);
        }
    }

    if (want_sca) {
        try {
            const auto t0 = std::chrono::steady_clock::now();
            ScaOptions opt;
            opt.epsilon = spec.epsilon;
            opt.loop.lambda = spec.lambda;
            opt.loop.solver.tol = spec.solver_tol;
            opt.loop.solver.max_iter = spec.solver_max_iter;
            BisectionResult<PrecoderSet> res = sca_fairness(sc, opt);
            MethodRow row;
            row.t_star = res.t_star;
            row.iterations = res.iterations;
            row.wall_ms = wall_ms_since(t0);
            if (res.solution) {
                const MetricsReport m = evaluate(*res.solution, sc);
                row.achieved = m.min_sinr_over_target;
                row.min_sinr = m.min_sinr;
                row.min_rate = m.min_rate;
            } else {
                row.achieved = 0.0;
                row.min_sinr = 0.0;
                row.min_rate = 0.0;
            }
            push("fpp_sca", 0, row);
        } catch (const std::exception& e) {
            MethodRow row;
            row.status = std::string("error: ") + e.what();
            ++pr.failures;
            push("fpp_sca", 0, row);
        }
    }
    return pr;
}

// bounded worker pool over sweep points, deterministic merge by index
std::vector<PointResult> run_points(const ExperimentSpec& spec,
                                    const std::vector<Scenario>& scenarios) {
    std::vector<PointResult> results(scenarios.size());
    const int jobs = std::max(1, std::min<int>(spec.jobs, static_cast<int>(scenarios.size())));
    if (jobs == 1) {
        for (size_t i = 0; i < scenarios.size(); ++i) results[i] = solve_point(spec, scenarios[i]);
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < scenarios.size(); i = next.fetch_add(1))
                results[i] = solve_point(spec, scenarios[i]);
        });
    for (auto& th : pool) th.join();
    return results;
}

}  // namespace

ScenarioConfig sweep_scenario_config(const ExperimentSpec& spec, double theta_a_deg, int n_t) {
    ScenarioConfig cfg;
    cfg.n_t = n_t;
    cfg.total_power_dbw = spec.total_power_dbw;
    cfg.noise_w = {spec.noise_w};
    cfg.gamma = {spec.gamma};
    const int per = spec.users_per_group;
    for (size_t b = 0; b < spec.group_centers_deg.size(); ++b) {
        const double c = spec.group_centers_deg[b];
        for (int u = 0; u < per; ++u) {
            const double frac = per > 1 ? static_cast<double>(u) / (per - 1) : 0.5;
            cfg.angles_deg.push_back(c - theta_a_deg / 2.0 + frac * theta_a_deg);
            cfg.groups.push_back(static_cast<int>(b) + 1);
        }
    }
    return cfg;
}

void ExperimentSpec::validate() const {
    if (methods.empty()) throw std::invalid_argument("ExperimentSpec: methods must be nonempty");
    if (seeds.empty() && has_method(*this, Method::Sdr))
        throw std::invalid_argument("ExperimentSpec: seeds must be nonempty for randomized methods");
    if (group_centers_deg.empty() || users_per_group < 1)
        throw std::invalid_argument("ExperimentSpec: bad group geometry");
    if (n_rand < 1 || epsilon <= 0.0 || lambda <= 0.0)
        throw std::invalid_argument("ExperimentSpec: bad solver parameters");
}

std::string ExperimentSpec::canonical_json() const {
    json j;
    j["schema"] = "mgbeam.experiment/1";
    j["kind"] = to_string(kind);
    j["n_t"] = n_t;
    j["total_power_dbw"] = total_power_dbw;
    j["noise_w"] = noise_w;
    j["gamma"] = gamma;
    j["group_centers_deg"] = group_centers_deg;
    j["users_per_group"] = users_per_group;
    j["theta_a_deg"] = theta_a_deg;
    j["theta_grid"] = {{"start", theta_grid.start}, {"stop", theta_grid.stop},
                       {"step", theta_grid.step}};
    j["n_t_grid"] = n_t_grid;
    j["trace_target_fraction"] = trace_target_fraction;
    if (trace_target_t) j["trace_target_t"] = *trace_target_t;
    std::vector<std::string> ms;
    for (Method m : methods) ms.push_back(to_string(m));
    j["methods"] = ms;
    j["seeds"] = seeds;
    j["epsilon"] = epsilon;
    j["lambda"] = lambda;
    j["n_rand"] = n_rand;
    j["solver_tol"] = solver_tol;
    j["solver_max_iter"] = solver_max_iter;
    return j.dump();
}

std::uint64_t ExperimentSpec::config_hash() const {
    const std::string s = canonical_json();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.contains("schema") && j["schema"] != "mgbeam.experiment/1")
        throw std::invalid_argument("ExperimentSpec: unsupported schema");
    ExperimentSpec s;
    if (j.contains("kind")) s.kind = kind_from_string(j["kind"].get<std::string>());
    if (j.contains("n_t")) s.n_t = j["n_t"].get<int>();
    if (j.contains("total_power_dbw")) s.total_power_dbw = j["total_power_dbw"].get<double>();
    if (j.contains("noise_w")) s.noise_w = j["noise_w"].get<double>();
    if (j.contains("gamma")) s.gamma = j["gamma"].get<double>();
    if (j.contains("group_centers_deg"))
        s.group_centers_deg = j["group_centers_deg"].get<std::vector<double>>();
    if (j.contains("users_per_group")) s.users_per_group = j["users_per_group"].get<int>();
    if (j.contains("theta_a_deg")) s.theta_a_deg = j["theta_a_deg"].get<double>();
    if (j.contains("theta_grid")) {
        s.theta_grid.start = j["theta_grid"].value("start", 0.0);
        s.theta_grid.stop = j["theta_grid"].value("stop", 90.0);
        s.theta_grid.step = j["theta_grid"].value("step", 5.0);
    }
    if (j.contains("n_t_grid")) s.n_t_grid = j["n_t_grid"].get<std::vector<int>>();
    if (j.contains("trace_target_fraction"))
        s.trace_target_fraction = j["trace_target_fraction"].get<double>();
    if (j.contains("trace_target_t")) s.trace_target_t = j["trace_target_t"].get<double>();
    if (j.contains("methods")) {
        s.methods.clear();
        for (const auto& m : j["methods"]) s.methods.push_back(method_from_string(m));
    }
    if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("output_dir")) s.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("epsilon")) s.epsilon = j["epsilon"].get<double>();
    if (j.contains("lambda")) s.lambda = j["lambda"].get<double>();
    if (j.contains("n_rand")) s.n_rand = j["n_rand"].get<int>();
    if (j.contains("jobs")) s.jobs = j["jobs"].get<int>();
    if (j.contains("solver_tol")) s.solver_tol = j["solver_tol"].get<double>();
    if (j.contains("solver_max_iter")) s.solver_max_iter = j["solver_max_iter"].get<int>();
    return s;
}

ExperimentReport run_angular_sweep(const ExperimentSpec& spec) {
    spec.validate();
    fs::create_directories(spec.output_dir);
    const std::vector<double> grid = spec.theta_grid.values();
    std::vector<Scenario> scenarios;
    scenarios.reserve(grid.size());
    for (double th : grid) scenarios.push_back(build_scenario(sweep_scenario_config(spec, th, spec.n_t)));

    const std::vector<PointResult> results = run_points(spec, scenarios);

    const std::string hash = std::to_string(spec.config_hash());
    CsvFile out(fs::path(spec.output_dir) / "angular_sweep.csv", "mgbeam.angular_sweep/1",
                "sweep_index,theta_a_deg,method,seed,config_hash,status,t_star,achieved,"
                "min_sinr,min_rate_bps_hz,slack_max,ranks,iterations");
    CsvFile timing(fs::path(spec.output_dir) / "angular_sweep_timing.csv",
                   "mgbeam.angular_sweep_timing/1",
                   "sweep_index,theta_a_deg,method,seed,wall_ms,wall_norm_sdr");

    ExperimentReport rep;
    for (size_t i = 0; i < results.size(); ++i) {
        const PointResult& pr = results[i];
        rep.failures += pr.failures;
        double sdr_wall = std::nan("");
        for (size_t r = 0; r < pr.rows.size(); ++r)
            if (pr.row_methods[r] == "sdr" && pr.rows[r].second.status == "ok") {
                sdr_wall = pr.rows[r].second.wall_ms;
                break;
            }
        for (size_t r = 0; r < pr.rows.size(); ++r) {
            const MethodRow& row = pr.rows[r].second;
            out.row(std::to_string(i) + "," + fmt(grid[i]) + "," + pr.row_methods[r] + "," +
                    std::to_string(pr.row_seeds[r]) + "," + hash + "," + row.status + "," +
                    fmt(row.t_star) + "," + fmt(row.achieved) + "," + fmt(row.min_sinr) + "," +
                    fmt(row.min_rate) + "," + fmt(row.slack_max) + "," +
                    (row.ranks.empty() ? "-" : row.ranks) + "," + std::to_string(row.iterations));
            timing.row(std::to_string(i) + "," + fmt(grid[i]) + "," + pr.row_methods[r] + "," +
                       std::to_string(pr.row_seeds[r]) + "," + fmt(row.wall_ms) + "," +
                       fmt(row.wall_ms / sdr_wall));
        }
    }
    rep.files = {out.path(), timing.path()};
    return rep;
}

ExperimentReport run_antenna_sweep(const ExperimentSpec& spec) {
    spec.validate();
    fs::create_directories(spec.output_dir);
    std::vector<Scenario> scenarios;
    scenarios.reserve(spec.n_t_grid.size());
    for (int nt : spec.n_t_grid)
        scenarios.push_back(build_scenario(sweep_scenario_config(spec, spec.theta_a_deg, nt)));

    const std::vector<PointResult> results = run_points(spec, scenarios);

    const std::string hash = std::to_string(spec.config_hash());
    CsvFile out(fs::path(spec.output_dir) / "antenna_sweep.csv", "mgbeam.antenna_sweep/1",
                "sweep_index,n_t,method,seed,config_hash,status,t_star,achieved,min_sinr,"
                "min_rate_bps_hz,rate_over_bound,slack_max,ranks,iterations");
    CsvFile timing(fs::path(spec.output_dir) / "antenna_sweep_timing.csv",
                   "mgbeam.antenna_sweep_timing/1",
                   "sweep_index,n_t,method,seed,wall_ms,wall_norm_sdr");

    ExperimentReport rep;
    for (size_t i = 0; i < results.size(); ++i) {
        const PointResult& pr = results[i];
        rep.failures += pr.failures;
        double sdr_wall = std::nan(""), bound_rate = std::nan("");
        for (size_t r = 0; r < pr.rows.size(); ++r) {
            if (pr.row_methods[r] == "sdr" && pr.rows[r].second.status == "ok" &&
                std::isnan(sdr_wall))
                sdr_wall = pr.rows[r].second.wall_ms;
            if (pr.row_methods[r] == "relaxed_bound" && pr.rows[r].second.status == "ok")
                bound_rate = pr.rows[r].second.min_rate;
        }
        for (size_t r = 0; r < pr.rows.size(); ++r) {
            const MethodRow& row = pr.rows[r].second;
            out.row(std::to_string(i) + "," + std::to_string(spec.n_t_grid[i]) + "," +
                    pr.row_methods[r] + "," + std::to_string(pr.row_seeds[r]) + "," + hash + "," +
                    row.status + "," + fmt(row.t_star) + "," + fmt(row.achieved) + "," +
                    fmt(row.min_sinr) + "," + fmt(row.min_rate) + "," +
                    fmt(row.min_rate / bound_rate) + "," + fmt(row.slack_max) + "," +
                    (row.ranks.empty() ? "-" : row.ranks) + "," + std::to_string(row.iterations));
            timing.row(std::to_string(i) + "," + std::to_string(spec.n_t_grid[i]) + "," +
                       pr.row_methods[r] + "," + std::to_string(pr.row_seeds[r]) + "," +
                       fmt(row.wall_ms) + "," + fmt(row.wall_ms / sdr_wall));
        }
    }
    rep.files = {out.path(), timing.path()};
    return rep;
}

ExperimentReport run_beampattern(const ExperimentSpec& spec) {
    spec.validate();
    fs::create_directories(spec.output_dir);
    const Scenario sc = build_scenario(sweep_scenario_config(spec, spec.theta_a_deg, spec.n_t));
    const std::string hash = std::to_string(spec.config_hash());

    Eigen::VectorXd grid(361);
    for (int i = 0; i <= 360; ++i) grid[i] = deg_to_rad(-90.0 + 0.5 * i);

    ExperimentReport rep;
    CsvFile summary(fs::path(spec.output_dir) / "beampattern_summary.csv",
                    "mgbeam.beampattern_summary/1",
                    "method,seed,config_hash,status,t_star,achieved,min_sinr,min_rate_bps_hz");
    rep.files.push_back(summary.path());

    auto emit_patterns = [&](const std::string& method, const PrecoderSet& ps) {
        const Eigen::MatrixXd bp = beampattern(ps, grid);
        for (int k = 0; k < ps.n_groups(); ++k) {
            const fs::path f = fs::path(spec.output_dir) /
                               ("beampattern_" + method + "_group" + std::to_string(k + 1) + ".csv");
            CsvFile pat(f, "mgbeam.beampattern/1", "theta_deg,power_db");
            for (Eigen::Index j = 0; j < grid.size(); ++j)
                pat.row(fmt(-90.0 + 0.5 * static_cast<double>(j)) + "," + fmt(bp(k, j)));
            rep.files.push_back(pat.path());
        }
    };

    if (has_method(spec, Method::Sdr)) {
        try {
            SdrOptions opt;
            opt.epsilon = spec.epsilon;
            opt.n_rand = spec.n_rand;
            opt.seed = spec.seeds.empty() ? 1 : spec.seeds.front();
            opt.solver.tol = spec.solver_tol;
            opt.solver.max_iter = spec.solver_max_iter;
            SdrFairnessResult res = sdr_max_min_fair(sc, opt);
            const MetricsReport m = evaluate(res.precoders, sc);
            emit_patterns("sdr", res.precoders);
            summary.row(std::string("sdr,") + std::to_string(opt.seed) + "," + hash + ",ok," +
                        fmt(res.bisection.t_star) + "," + fmt(m.min_sinr_over_target) + "," +
                        fmt(m.min_sinr) + "," + fmt(m.min_rate));
        } catch (const std::exception& e) {
            ++rep.failures;
            summary.row(std::string("sdr,0,") + hash + ",error: " + e.what() + ",nan,nan,nan,nan");
        }
    }
    if (has_method(spec, Method::FppSca)) {
        try {
            ScaOptions opt;
            opt.epsilon = spec.epsilon;
            opt.loop.lambda = spec.lambda;
            opt.loop.solver.tol = spec.solver_tol;
            opt.loop.solver.max_iter = spec.solver_max_iter;
            BisectionResult<PrecoderSet> res = sca_fairness(sc, opt);
            const PrecoderSet ps =
                res.solution ? *res.solution : PrecoderSet::zero(sc.n_t, sc.n_groups);
            const MetricsReport m = evaluate(ps, sc);
            emit_patterns("fpp_sca", ps);
            summary.row(std::string("fpp_sca,0,") + hash + ",ok," + fmt(res.t_star) + "," +
                        fmt(m.min_sinr_over_target) + "," + fmt(m.min_sinr) + "," +
                        fmt(m.min_rate));
        } catch (const std::exception& e) {
            ++rep.failures;
            summary.row(std::string("fpp_sca,0,") + hash + ",error: " + e.what() +
                        ",nan,nan,nan,nan");
        }
    }
    return rep;
}

ExperimentReport run_convergence_trace(const ExperimentSpec& spec) {
    spec.validate();
    fs::create_directories(spec.output_dir);
    const Scenario sc = build_scenario(sweep_scenario_config(spec, spec.theta_a_deg, spec.n_t));
    const std::string hash = std::to_string(spec.config_hash());

    ExperimentReport rep;
    double t = 0.0;
    if (spec.trace_target_t) {
        t = *spec.trace_target_t;
    } else {
        SdrOptions opt;
        opt.epsilon = spec.epsilon;
        opt.n_rand = 1;
        opt.solver.tol = spec.solver_tol;
        opt.solver.max_iter = spec.solver_max_iter;
        t = spec.trace_target_fraction * sdr_max_min_fair(sc, opt).bisection.t_star;
    }

    ScaLoopOptions loop;
    loop.lambda = spec.lambda;
    loop.solver.tol = spec.solver_tol;
    loop.solver.max_iter = spec.solver_max_iter;
    const Eigen::VectorXcd z0 = init_point(InitStrategy::Matched, sc);
    const ScaQosResult res = sca_qos(sc, sc.scaled_targets(t), z0, loop);

    CsvFile out(fs::path(spec.output_dir) / "convergence_trace.csv", "mgbeam.convergence_trace/1",
                "iteration,target_t,config_hash,r,slack_norm,objective");
    CsvFile timing(fs::path(spec.output_dir) / "convergence_trace_timing.csv",
                   "mgbeam.convergence_trace_timing/1", "iteration,wall_ms_cumulative");
    for (const ScaState& st : res.trace) {
        out.row(std::to_string(st.iteration) + "," + fmt(t) + "," + hash + "," + fmt(st.r) + "," +
                fmt(st.slacks.norm()) + "," + fmt(st.objective));
        timing.row(std::to_string(st.iteration) + "," + fmt(st.wall_ms));
    }
    rep.files = {out.path(), timing.path()};
    return rep;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    switch (spec.kind) {
        case ExperimentKind::Beampattern: return run_beampattern(spec);
        case ExperimentKind::AngularSweep: return run_angular_sweep(spec);
        case ExperimentKind::AntennaSweep: return run_antenna_sweep(spec);
        case ExperimentKind::ConvergenceTrace: return run_convergence_trace(spec);
    }
    throw std::invalid_argument("run_experiment: unknown kind");
}

}  // namespace mgbeam
