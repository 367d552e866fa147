#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mgbeam/conic.hpp"
#include "mgbeam/metrics.hpp"
#include "mgbeam/scenario.hpp"

// Semidefinite-relaxation pipeline: relaxed per-antenna QoS power
// minimization, bisection over the fairness level, and Gaussian
// randomization with per-antenna rescaling.

namespace mgbeam {

struct RelaxedSolution {
    std::vector<Eigen::MatrixXcd> X;  // G Hermitian PSD matrices, order N_t
    double r = 0.0;
    std::vector<int> ranks;  // numerical ranks, filled by rank_profile
};

struct QosResult {
    SolveStatus status = SolveStatus::MaxIterations;
    RelaxedSolution solution;  // meaningful unless status == Infeasible
    Residuals residuals;
    int iterations = 0;
    ConicSolution raw;  // for warm-starting the next probe
};

// Relaxed QoS problem: block k in [0, G) is the embedded X_k (PSD of
// order 2*N_t), block G is the nonnegative antenna-utilization slack r.
// A finite r_cap adds the row r <= r_cap: near-degenerate scenarios can
// need astronomically large r at targets far beyond reach, where the
// uncapped problem sits on the boundary between feasibility and
// infeasibility and no certificate forms. Callers that only test
// r* < 1 (bisection) cap r to keep every probe strictly decidable.
ConicProblem build_qr(const Scenario& scenario, const Eigen::VectorXd& targets,
                      double r_cap = std::numeric_limits<double>::infinity());

QosResult solve_qos_relaxed(const Scenario& scenario, const Eigen::VectorXd& targets,
                            const SolveOptions& options = {},
                            double r_cap = std::numeric_limits<double>::infinity());

// Interference-free matched-filter bound: max_i P_tot ||h_i||^2 / sigma_i^2.
double sinr_upper_bound(const Scenario& scenario);

// ---- bisection over a QoS feasibility oracle ---------------------------

struct BisectionStep {
    double lower, upper, r_star;
};

template <class Sol>
struct ProbeOutcome {
    double r_star = std::numeric_limits<double>::infinity();
    bool acceptable = true;  // extra feasibility conditions beyond r* < 1
    std::optional<Sol> solution;
};

template <class Sol>
struct BisectionResult {
    double t_star = 0.0;
    int iterations = 0;
    std::vector<BisectionStep> history;
    std::optional<Sol> solution;  // from the last feasible probe
    double lower = 0.0, upper = 0.0;
};

// Halving search on [l0, u0]; a probe at t is feasible iff r*(t) < 1
// (and the oracle raised no extra objection). l0 itself is never probed:
// t = 0 targets are trivially reachable by the zero precoder.
template <class Sol>
BisectionResult<Sol> bisect(const std::function<ProbeOutcome<Sol>(double)>& qos, double l0,
                            double u0, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("bisect: epsilon must be positive");
    if (!(u0 > l0) || l0 < 0.0) throw std::invalid_argument("bisect: need 0 <= L0 < U0");
    BisectionResult<Sol> out;
    double lower = l0, upper = u0;
    while (upper - lower > epsilon) {
        const double t = 0.5 * (lower + upper);
        ProbeOutcome<Sol> probe = qos(t);
        ++out.iterations;
        out.history.push_back({lower, upper, probe.r_star});
        if (probe.r_star < 1.0 && probe.acceptable) {
            lower = t;
            if (probe.solution) out.solution = std::move(probe.solution);
        } else {
            upper = t;
        }
    }
    out.lower = lower;
    out.upper = upper;
    out.t_star = 0.5 * (lower + upper);
    return out;
}

// number of probes bisect() performs
int bisection_iterations(double l0, double u0, double epsilon);

// ---- randomization ------------------------------------------------------

// Single common scale putting the most-loaded antenna exactly at its
// limit; a zero candidate is returned unchanged.
PrecoderSet rescale_to_pac(const PrecoderSet& candidate, const Eigen::VectorXd& pac);

// Draws n_rand candidate sets w_k ~ CN(0, X_k), rescales each to PAC
// feasibility and returns the one maximizing min_i SINR_i / gamma_i.
PrecoderSet gaussian_randomization(const RelaxedSolution& relaxed, const Scenario& scenario,
                                   int n_rand, std::uint64_t rng_seed);

// Numerical rank of each X_k: eigenvalues above tol_rel * lambda_max.
std::vector<int> rank_profile(const RelaxedSolution& relaxed, double tol_rel = 1e-3);

// ---- composed pipeline ---------------------------------------------------

struct SdrOptions {
    double epsilon = 1e-3;
    int n_rand = 100;
    std::uint64_t seed = 1;
    double rank_tol = 1e-3;
    SolveOptions solver;
};

struct SdrFairnessResult {
    BisectionResult<RelaxedSolution> bisection;  // t_star is the relaxed bound
    RelaxedSolution relaxed;                     // solution at the last feasible probe
    PrecoderSet precoders;                       // randomized, PAC-feasible
    double achieved = 0.0;                       // min_i SINR_i / gamma_i of `precoders`
    std::vector<int> ranks;
};

SdrFairnessResult sdr_max_min_fair(const Scenario& scenario, const SdrOptions& options = {});

}  // namespace mgbeam
