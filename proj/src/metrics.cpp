#include "mgbeam/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mgbeam {

Eigen::VectorXcd PrecoderSet::stacked() const {
    Eigen::VectorXcd out(static_cast<Eigen::Index>(n_groups()) * n_t());
    for (int k = 0; k < n_groups(); ++k) out.segment(k * n_t(), n_t()) = w[k];
    return out;
}

PrecoderSet PrecoderSet::from_stacked(const Eigen::VectorXcd& w_tot, int n_t, int n_groups) {
    if (w_tot.size() != static_cast<Eigen::Index>(n_t) * n_groups)
        throw std::invalid_argument("PrecoderSet: stacked length != G * N_t");
    PrecoderSet p;
    p.w.resize(n_groups);
    for (int k = 0; k < n_groups; ++k) p.w[k] = w_tot.segment(k * n_t, n_t);
    return p;
}

PrecoderSet PrecoderSet::zero(int n_t, int n_groups) {
    PrecoderSet p;
    p.w.assign(n_groups, Eigen::VectorXcd::Zero(n_t));
    return p;
}

bool PrecoderSet::is_zero(double tol) const {
    for (const auto& wk : w)
        if (wk.cwiseAbs().maxCoeff() > tol) return false;
    return true;
}

Eigen::VectorXd sinr(const PrecoderSet& precoders, const Scenario& scenario) {
    if (precoders.n_groups() != scenario.n_groups || precoders.n_t() != scenario.n_t)
        throw std::invalid_argument("sinr: precoder dimensions do not match scenario");
    Eigen::VectorXd out(scenario.n_u);
    for (int i = 0; i < scenario.n_u; ++i) {
        const auto& u = scenario.users[i];
        const int k = u.group_id - 1;
        double signal = 0.0, interference = 0.0;
        for (int l = 0; l < scenario.n_groups; ++l) {
            const double p = std::norm(precoders.w[l].dot(u.h));  // |w_l^H h_i|^2
            if (l == k)
                signal = p;
            else
                interference += p;
        }
        out[i] = signal / (interference + u.sigma2);
    }
    return out;
}

Eigen::VectorXd per_antenna_power(const PrecoderSet& precoders) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(precoders.n_t());
    for (const auto& wk : precoders.w) p += wk.cwiseAbs2();
    return p;
}

Eigen::MatrixXd beampattern(const PrecoderSet& precoders, const Eigen::VectorXd& theta_grid_rad) {
    const int g = precoders.n_groups();
    Eigen::MatrixXd out(g, theta_grid_rad.size());
    for (Eigen::Index j = 0; j < theta_grid_rad.size(); ++j) {
        const Eigen::VectorXcd a = ula_steering(theta_grid_rad[j], precoders.n_t());
        for (int k = 0; k < g; ++k) {
            const double p = std::norm(precoders.w[k].dot(a));
            out(k, j) = 10.0 * std::log10(std::max(p, 1e-30));
        }
    }
    return out;
}

MetricsReport evaluate(const PrecoderSet& precoders, const Scenario& scenario) {
    MetricsReport r;
    r.sinr = sinr(precoders, scenario);
    r.min_sinr = r.sinr.minCoeff();
    r.min_sinr_over_target = (r.sinr.array() /
                              Eigen::VectorXd::NullaryExpr(scenario.n_u, [&](Eigen::Index i) {
                                  return scenario.users[i].gamma;
                              }).array())
                                 .minCoeff();
    r.min_rate = std::log2(1.0 + r.min_sinr);
    r.per_antenna_power = per_antenna_power(precoders);
    r.pac_margin = scenario.pac - r.per_antenna_power;
    return r;
}

std::string MetricsReport::csv_header() {
    return "min_sinr,min_sinr_over_target,min_rate_bps_hz,max_pac_violation_w,wall_ms";
}

std::string MetricsReport::csv_row() const {
    char buf[256];
    const double viol = pac_margin.size() ? std::max(0.0, -pac_margin.minCoeff()) : 0.0;
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.6g", min_sinr,
                  min_sinr_over_target, min_rate, viol, wall_ms);
    return buf;
}

// ---------------------------------------------------------------------------
// grid oracle
// ---------------------------------------------------------------------------

namespace {

struct GridPoint {
    std::vector<double> amp;    // per coefficient
    std::vector<double> phase;  // per coefficient (first of each group pinned to 0)
};

double eval_min_sinr_over_target(const GridPoint& pt, const Scenario& sc) {
    const int n_t = sc.n_t, g = sc.n_groups;
    // PAC check
    for (int n = 0; n < n_t; ++n) {
        double pw = 0.0;
        for (int k = 0; k < g; ++k) {
            const double a = pt.amp[k * n_t + n];
            pw += a * a;
        }
        if (pw > sc.pac[n] * (1.0 + 1e-12)) return -1.0;
    }
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sc.n_u; ++i) {
        const auto& u = sc.users[i];
        double signal = 0.0, interference = 0.0;
        for (int l = 0; l < g; ++l) {
            cxd acc = 0.0;
            for (int n = 0; n < n_t; ++n) {
                const int c = l * n_t + n;
                acc += std::polar(pt.amp[c], -pt.phase[c]) * u.h[n];  // conj(w) * h
            }
            const double p = std::norm(acc);
            if (l == u.group_id - 1)
                signal = p;
            else
                interference += p;
        }
        worst = std::min(worst, signal / (interference + u.sigma2) / u.gamma);
    }
    return worst;
}

}  // namespace

double brute_force_fairness(const Scenario& sc, int phase_steps, int amp_steps, int refine_rounds,
                            std::uint64_t max_points) {
    const int n_t = sc.n_t, g = sc.n_groups;
    const int n_coef = n_t * g;
    if (n_coef > 4)
        throw std::invalid_argument("brute_force_fairness: G*N_t must be <= 4 for the grid");
    if (phase_steps < 1 || amp_steps < 1)
        throw std::invalid_argument("brute_force_fairness: need positive step counts");

    // coefficient c drives antenna c % n_t of group c / n_t; the first
    // coefficient of each group has its phase pinned (common group phase
    // leaves every SINR unchanged)
    std::vector<bool> phase_free(n_coef);
    std::vector<double> amp_max(n_coef);
    std::uint64_t points = 1;
    for (int c = 0; c < n_coef; ++c) {
        phase_free[c] = (c % n_t) != 0;
        amp_max[c] = std::sqrt(sc.pac[c % n_t]);
        points *= static_cast<std::uint64_t>(amp_steps + 1) * (phase_free[c] ? phase_steps : 1);
        if (points > max_points)
            throw std::invalid_argument(
                "brute_force_fairness: grid needs more than " + std::to_string(max_points) +
                " points; reduce phase_steps/amp_steps");
    }

    GridPoint pt;
    pt.amp.assign(n_coef, 0.0);
    pt.phase.assign(n_coef, 0.0);
    GridPoint best = pt;
    double best_val = eval_min_sinr_over_target(pt, sc);

    // exhaustive pass
    std::vector<int> ai(n_coef, 0), pi(n_coef, 0);
    const double two_pi = 6.283185307179586;
    while (true) {
        for (int c = 0; c < n_coef; ++c) {
            pt.amp[c] = amp_max[c] * ai[c] / amp_steps;
            pt.phase[c] = phase_free[c] ? two_pi * pi[c] / phase_steps : 0.0;
        }
        const double val = eval_min_sinr_over_target(pt, sc);
        if (val > best_val) {
            best_val = val;
            best = pt;
        }
        // odometer
        int c = 0;
        for (; c < n_coef; ++c) {
            if (++ai[c] <= amp_steps) break;
            ai[c] = 0;
            if (phase_free[c] && ++pi[c] < phase_steps) break;
            pi[c] = 0;
        }
        if (c == n_coef) break;
    }

    // local refinement around the incumbent; the incumbent itself stays
    // in every candidate set, so the result is non-decreasing
    double amp_span = amp_max[0] / amp_steps;
    double phase_span = two_pi / phase_steps;
    static constexpr double offsets[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (int round = 0; round < refine_rounds; ++round) {
        std::vector<int> oa(n_coef, 0), op(n_coef, 0);
        GridPoint center = best;
        while (true) {
            for (int c = 0; c < n_coef; ++c) {
                pt.amp[c] = std::clamp(center.amp[c] + offsets[oa[c]] * amp_span, 0.0, amp_max[c]);
                pt.phase[c] = phase_free[c] ? center.phase[c] + offsets[op[c]] * phase_span : 0.0;
            }
            const double val = eval_min_sinr_over_target(pt, sc);
            if (val > best_val) {
                best_val = val;
                best = pt;
            }
            int c = 0;
            for (; c < n_coef; ++c) {
                if (++oa[c] < 5) break;
                oa[c] = 0;
                if (phase_free[c] && ++op[c] < 5) break;
                op[c] = 0;
            }
            if (c == n_coef) break;
        }
        amp_span *= 0.5;
        phase_span *= 0.5;
    }
    return best_val;
}

}  // namespace mgbeam
