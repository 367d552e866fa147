#pragma once

#include <cstdint>
#include <vector>

#include "mgbeam/conic.hpp"
#include "mgbeam/metrics.hpp"
#include "mgbeam/scenario.hpp"
#include "mgbeam/sdr.hpp"

// Feasible point pursuit / successive convex approximation pipeline:
// quadratic-form split, linearization of the concave part, the
// slack-penalized convex subproblem, the SCA loop and the outer
// fairness bisection.

namespace mgbeam {

// Per user i in group k, over the stacked precoder w_tot (length G*N_t):
//   A_i = A_plus + A_minus,
//   A_plus  =  gamma_i (I_G - diag{e_k}) (x) h_i h_i^H   (PSD),
//   A_minus = -diag{e_k} (x) h_i h_i^H                    (NSD),
// and SINR_i >= gamma_i  <=>  w^H A_i w <= rhs_i = -gamma_i sigma_i^2.
struct QuadraticSplit {
    std::vector<Eigen::MatrixXcd> a_plus;
    std::vector<Eigen::MatrixXcd> a_minus;
    Eigen::VectorXd rhs;
};

QuadraticSplit build_quadratics(const Scenario& scenario, const Eigen::VectorXd& targets);

// Affine majorant of w^H A_minus w around z:
//   2 Re{coeff^H w} + constant,  coeff = A_minus z, constant = -z^H A_minus z.
struct AffineForm {
    Eigen::VectorXcd coeff;
    double constant = 0.0;
    double value(const Eigen::VectorXcd& w) const {
        return 2.0 * coeff.dot(w).real() + constant;
    }
};

AffineForm linearize(const Eigen::MatrixXcd& a_minus, const Eigen::VectorXcd& z);

struct QscaResult {
    Eigen::VectorXcd w_tot;
    double r = 0.0;
    Eigen::VectorXd slacks;   // length N_u + 1, componentwise >= 0
    double objective = 0.0;   // r + lambda ||s||
    SolveStatus status = SolveStatus::MaxIterations;
    Residuals residuals;
    ConicSolution raw;
};

// One convex subproblem around linearization point z. Always feasible:
// the slacks absorb any violation.
QscaResult solve_qsca(const Scenario& scenario, const Eigen::VectorXd& targets,
                      const Eigen::VectorXcd& z, double lambda, const SolveOptions& options = {},
                      const ConicSolution* warm = nullptr);

struct ScaState {
    Eigen::VectorXcd z;      // linearization point after the iteration
    double lambda = 25.0;
    Eigen::VectorXd slacks;  // length N_u + 1
    double r = 0.0;
    double objective = 0.0;  // r + lambda ||s||
    int iteration = 0;
    double wall_ms = 0.0;    // cumulative
};

struct ScaQosResult {
    Eigen::VectorXcd w_tot;
    double r_star = 0.0;
    Eigen::VectorXd slacks;
    double slack_max = 0.0;
    bool slack_feasible = true;  // max slack <= slack_tol
    std::vector<ScaState> trace;
    ConicSolution raw;  // last accepted subproblem solution
};

struct ScaLoopOptions {
    double lambda = 25.0;
    double conv_tol = 1e-4;  // relative objective change
    int max_outer = 50;
    double slack_tol = 1e-5;
    SolveOptions solver;
};

// Iterates z <- w until the objective r + lambda ||s|| settles. An
// iterate is accepted only if it does not increase the objective, so
// the recorded trace is non-increasing by construction.
ScaQosResult sca_qos(const Scenario& scenario, const Eigen::VectorXd& targets,
                     const Eigen::VectorXcd& z0, const ScaLoopOptions& options = {});

enum class InitStrategy { Zero, Randomized, Matched };

Eigen::VectorXcd init_point(InitStrategy strategy, const Scenario& scenario,
                            std::uint64_t seed = 1);

struct ScaOptions {
    double epsilon = 1e-3;
    InitStrategy z0_strategy = InitStrategy::Matched;
    std::uint64_t seed = 1;
    ScaLoopOptions loop;
};

// Outer bisection on the fairness level; each probe runs sca_qos with
// targets t * g, warm-started from the previous probe's solution.
BisectionResult<PrecoderSet> sca_fairness(const Scenario& scenario, const ScaOptions& options = {});

}  // namespace mgbeam
