#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgbeam/sca.hpp"
#include "mgbeam/scenario.hpp"
#include "mgbeam/sdr.hpp"

// Desk-scale reproduction of the ULA experiments. Each runner emits
// diff-able CSV artifacts into spec.output_dir: a deterministic results
// file (byte-identical across re-runs with the same spec and seeds) and
// a *_timing.csv companion holding the machine-dependent wall-clock
// columns.

namespace mgbeam {

enum class ExperimentKind { Beampattern, AngularSweep, AntennaSweep, ConvergenceTrace };
enum class Method { Sdr, FppSca, RelaxedBound };

const char* to_string(ExperimentKind k);
const char* to_string(Method m);

struct SweepGrid {
    double start = 0.0, stop = 90.0, step = 5.0;
    std::vector<double> values() const;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::AngularSweep;

    // Two-group ULA scenario family. Group b's users sit on
    // [center_b - theta_a/2, center_b + theta_a/2]; with centers
    // {0, 45} the cross-group pair collides at theta_a = 45 and group
    // 2's users reach exact channel orthogonality (broadside/endfire)
    // at theta_a = 90. The noise level puts the sweep in the low-SNR
    // regime where the 90-degree splitting penalty dominates the
    // 45-degree collision cap. See README for the geometry notes.
    int n_t = 8;
    double total_power_dbw = -3.0;
    double noise_w = 10.0;
    double gamma = 1.0;
    std::vector<double> group_centers_deg = {0.0, 45.0};
    int users_per_group = 2;

    double theta_a_deg = 35.0;  // beampattern / antenna sweep / trace separation
    SweepGrid theta_grid;       // angular sweep
    std::vector<int> n_t_grid = {4, 6, 8, 10, 12, 16, 24, 32};

    // convergence trace: targets t*g with t = fraction of the relaxed
    // bound, unless an explicit t is given
    double trace_target_fraction = 0.8;
    std::optional<double> trace_target_t;

    std::vector<Method> methods = {Method::Sdr, Method::FppSca, Method::RelaxedBound};
    std::vector<std::uint64_t> seeds = {1};
    std::string output_dir = "out";

    double epsilon = 1e-3;
    double lambda = 25.0;
    int n_rand = 100;
    int jobs = 1;
    double solver_tol = 1e-6;
    int solver_max_iter = 50000;

    static ExperimentSpec from_json(const std::string& text);
    std::string canonical_json() const;
    std::uint64_t config_hash() const;  // FNV-1a64 of canonical_json()

    void validate() const;
};

// Sweep geometry: users of group b evenly spaced on
// [center_b - theta_a/2, center_b + theta_a/2].
ScenarioConfig sweep_scenario_config(const ExperimentSpec& spec, double theta_a_deg, int n_t);

struct ExperimentReport {
    int failures = 0;
    std::vector<std::string> files;
};

ExperimentReport run_beampattern(const ExperimentSpec& spec);
ExperimentReport run_angular_sweep(const ExperimentSpec& spec);
ExperimentReport run_antenna_sweep(const ExperimentSpec& spec);
ExperimentReport run_convergence_trace(const ExperimentSpec& spec);
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace mgbeam
