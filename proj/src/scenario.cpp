#include "mgbeam/scenario.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace mgbeam {

using nlohmann::json;

Eigen::VectorXd Scenario::scaled_targets(double t) const {
    Eigen::VectorXd g(n_u);
    for (int i = 0; i < n_u; ++i) g[i] = users[i].gamma * t;
    return g;
}

Eigen::VectorXcd ula_steering(double theta, int n_t) {
    if (n_t < 1) throw std::invalid_argument("ula_steering: need at least one antenna");
    constexpr double half_pi = 1.5707963267948966;
    if (theta < -half_pi - 1e-12 || theta > half_pi + 1e-12)
        throw std::invalid_argument("ula_steering: angle outside [-pi/2, pi/2]");
    const double step = M_PI * std::sin(theta);
    Eigen::VectorXcd v(n_t);
    for (int n = 0; n < n_t; ++n) v[n] = std::polar(1.0, step * n);
    return v;
}

namespace {

std::vector<double> broadcast(const std::vector<double>& in, int n, const char* what) {
    if (static_cast<int>(in.size()) == n) return in;
    if (in.size() == 1) return std::vector<double>(n, in[0]);
    throw std::invalid_argument(std::string("ScenarioConfig: ") + what +
                                " must have one entry or one per user");
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config) {
    const int n_u = static_cast<int>(config.angles_deg.size());
    if (n_u < 1) throw std::invalid_argument("ScenarioConfig: no users given");
    if (static_cast<int>(config.groups.size()) != n_u)
        throw std::invalid_argument("ScenarioConfig: groups must list one group id per user");
    if (config.n_t < 1) throw std::invalid_argument("ScenarioConfig: n_t must be >= 1");

    int n_groups = 0;
    for (int g : config.groups) {
        if (g < 1) throw std::invalid_argument("ScenarioConfig: group ids are 1-based");
        n_groups = std::max(n_groups, g);
    }
    std::vector<std::vector<int>> groups(n_groups);
    for (int i = 0; i < n_u; ++i) groups[config.groups[i] - 1].push_back(i);
    for (int k = 0; k < n_groups; ++k)
        if (groups[k].empty())
            throw std::invalid_argument("ScenarioConfig: group map is not a partition (group " +
                                        std::to_string(k + 1) + " is empty)");

    const auto noise = broadcast(config.noise_w, n_u, "noise_w");
    const auto gamma = broadcast(config.gamma, n_u, "gamma");

    Scenario s;
    s.n_t = config.n_t;
    s.n_u = n_u;
    s.n_groups = n_groups;
    s.groups = std::move(groups);
    s.users.resize(n_u);
    for (int i = 0; i < n_u; ++i) {
        auto& u = s.users[i];
        u.h = ula_steering(deg_to_rad(config.angles_deg[i]), config.n_t);
        u.sigma2 = noise[i];
        u.group_id = config.groups[i];
        u.gamma = gamma[i];
    }

    const double p_tot = dbw_to_watt(config.total_power_dbw);
    if (config.pac_mode == "equal_split") {
        s.pac = Eigen::VectorXd::Constant(config.n_t, p_tot / config.n_t);
    } else if (config.pac_mode == "explicit") {
        if (static_cast<int>(config.pac_w.size()) != config.n_t)
            throw std::invalid_argument("ScenarioConfig: pac_w must have n_t entries");
        s.pac = Eigen::Map<const Eigen::VectorXd>(config.pac_w.data(), config.n_t);
    } else {
        throw std::invalid_argument("ScenarioConfig: unknown pac_mode '" + config.pac_mode + "'");
    }

    validate(s);
    return s;
}

void validate(const Scenario& s) {
    if (s.n_u != static_cast<int>(s.users.size()))
        throw std::invalid_argument("Scenario: user count mismatch");
    if (s.pac.size() != s.n_t || (s.pac.array() <= 0.0).any())
        throw std::invalid_argument("Scenario: per-antenna limits must be positive, length n_t");
    if (s.n_groups < 1 || s.n_groups > s.n_u)
        throw std::invalid_argument("Scenario: need 1 <= G <= N_u");
    std::set<int> seen;
    for (int k = 0; k < s.n_groups; ++k) {
        if (s.groups[k].empty()) throw std::invalid_argument("Scenario: empty group");
        for (int i : s.groups[k]) {
            if (i < 0 || i >= s.n_u || !seen.insert(i).second)
                throw std::invalid_argument("Scenario: groups do not partition the users");
            if (s.users[i].group_id != k + 1)
                throw std::invalid_argument("Scenario: group_id inconsistent with partition");
        }
    }
    if (static_cast<int>(seen.size()) != s.n_u)
        throw std::invalid_argument("Scenario: groups do not cover all users");
    for (const auto& u : s.users) {
        if (u.h.size() != s.n_t) throw std::invalid_argument("Scenario: channel length != n_t");
        if (!(u.sigma2 > 0.0)) throw std::invalid_argument("Scenario: sigma2 must be positive");
        if (!(u.gamma > 0.0)) throw std::invalid_argument("Scenario: gamma must be positive");
    }
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    ScenarioConfig c;
    if (j.contains("schema") && j["schema"] != "mgbeam.scenario/1")
        throw std::invalid_argument("ScenarioConfig: unsupported schema " +
                                    j["schema"].get<std::string>());
    c.n_t = j.at("n_t").get<int>();
    c.total_power_dbw = j.at("total_power_dbw").get<double>();
    c.angles_deg = j.at("angles_deg").get<std::vector<double>>();
    c.groups = j.at("groups").get<std::vector<int>>();
    auto scalar_or_list = [&](const char* key, std::vector<double>& out) {
        if (!j.contains(key)) return;
        if (j[key].is_number())
            out = {j[key].get<double>()};
        else
            out = j[key].get<std::vector<double>>();
    };
    scalar_or_list("noise_w", c.noise_w);
    scalar_or_list("gamma", c.gamma);
    if (j.contains("pac_mode")) c.pac_mode = j["pac_mode"].get<std::string>();
    if (j.contains("pac_w")) c.pac_w = j["pac_w"].get<std::vector<double>>();
    return c;
}

std::string ScenarioConfig::to_json() const {
    json j;
    j["schema"] = "mgbeam.scenario/1";
    j["n_t"] = n_t;
    j["total_power_dbw"] = total_power_dbw;
    j["angles_deg"] = angles_deg;
    j["groups"] = groups;
    j["noise_w"] = noise_w.size() == 1 ? json(noise_w[0]) : json(noise_w);
    j["gamma"] = gamma.size() == 1 ? json(gamma[0]) : json(gamma);
    j["pac_mode"] = pac_mode;
    if (!pac_w.empty()) j["pac_w"] = pac_w;
    return j.dump();
}

}  // namespace mgbeam
