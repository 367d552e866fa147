#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mgbeam/scenario.hpp"

// Ground-truth metrics and independent oracles. Everything here is a
// straight evaluation of the defining formulas; the pipelines are
// checked against these, never the other way around.

namespace mgbeam {

struct PrecoderSet {
    std::vector<Eigen::VectorXcd> w;  // one length-N_t vector per group

    int n_groups() const { return static_cast<int>(w.size()); }
    int n_t() const { return w.empty() ? 0 : static_cast<int>(w[0].size()); }

    Eigen::VectorXcd stacked() const;
    static PrecoderSet from_stacked(const Eigen::VectorXcd& w_tot, int n_t, int n_groups);

    static PrecoderSet zero(int n_t, int n_groups);
    bool is_zero(double tol = 0.0) const;
};

struct MetricsReport {
    Eigen::VectorXd sinr;               // per user, linear
    double min_sinr = 0.0;              // min_i sinr_i / gamma_i * gamma_i (equal weights: min sinr)
    double min_sinr_over_target = 0.0;  // min_i sinr_i / gamma_i
    double min_rate = 0.0;              // log2(1 + min sinr) [bits/s/Hz]
    Eigen::VectorXd per_antenna_power;  // [W]
    Eigen::VectorXd pac_margin;         // P_n - power_n
    double wall_ms = 0.0;

    std::string csv_row() const;
    static std::string csv_header();
};

// SINR_i = |w_k^H h_i|^2 / (sum_{l != k} |w_l^H h_i|^2 + sigma_i^2), i in G_k
Eigen::VectorXd sinr(const PrecoderSet& precoders, const Scenario& scenario);

// P_n = sum_k |w_k[n]|^2
Eigen::VectorXd per_antenna_power(const PrecoderSet& precoders);

// |w_k^H a(theta)|^2 in dB over the grid, one row per group
Eigen::MatrixXd beampattern(const PrecoderSet& precoders, const Eigen::VectorXd& theta_grid_rad);

MetricsReport evaluate(const PrecoderSet& precoders, const Scenario& scenario);

// Exhaustive amplitude/phase grid oracle for tiny instances
// (G*N_t <= 4). Returns max over PAC-feasible grid points of
// min_i SINR_i / gamma_i; refine_rounds shrinks the grid around the
// incumbent (the incumbent is always kept, so refining never lowers the
// value). Throws std::invalid_argument when the grid would exceed
// max_points.
double brute_force_fairness(const Scenario& scenario, int phase_steps, int amp_steps,
                            int refine_rounds = 0, std::uint64_t max_points = 200000000ull);

}  // namespace mgbeam
