#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mgbeam/linalg.hpp"

// Scenario generation: uniform linear array channels, user-to-group
// assignments, noise powers and per-antenna power budgets.

namespace mgbeam {

struct UserChannel {
    Eigen::VectorXcd h;   // channel coefficients, length N_t
    double sigma2 = 1.0;  // noise power [W]
    int group_id = 1;     // 1-based
    double gamma = 1.0;   // SINR target weight, linear scale
};

struct Scenario {
    std::vector<UserChannel> users;
    std::vector<std::vector<int>> groups;  // 0-based user indices per group
    Eigen::VectorXd pac;                   // per-antenna power limits [W]
    int n_t = 0;
    int n_u = 0;
    int n_groups = 0;

    double total_power() const { return pac.sum(); }
    // targets vector gamma_i * t
    Eigen::VectorXd scaled_targets(double t) const;
};

struct ScenarioConfig {
    int n_t = 8;
    double total_power_dbw = -3.0;
    std::vector<double> angles_deg;  // one per user
    std::vector<int> groups;         // 1-based group id per user
    std::vector<double> noise_w{1.0};  // shared scalar or one per user
    std::vector<double> gamma{1.0};    // shared scalar or one per user
    std::string pac_mode = "equal_split";  // "equal_split" | "explicit"
    std::vector<double> pac_w;             // used when pac_mode == "explicit"

    // JSON document, schema "mgbeam.scenario/1"
    static ScenarioConfig from_json(const std::string& text);
    std::string to_json() const;
};

inline double dbw_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double deg_to_rad(double deg) { return deg * 0.017453292519943295; }

// Half-wavelength ULA steering vector: v[n] = exp(j*pi*n*sin(theta)),
// theta measured from broadside in [-pi/2, pi/2].
Eigen::VectorXcd ula_steering(double theta, int n_t);

Scenario build_scenario(const ScenarioConfig& config);

void validate(const Scenario& s);

}  // namespace mgbeam
