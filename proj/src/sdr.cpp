#include "mgbeam/sdr.hpp"

#include <cmath>

#include "mgbeam/random.hpp"

namespace mgbeam {

namespace {
// Probes only need the sign of r* - 1; capping r turns out-of-reach
// targets into strictly infeasible problems with fast certificates.
constexpr double kProbeRCap = 1e3;
}  // namespace

ConicProblem build_qr(const Scenario& sc, const Eigen::VectorXd& targets, double r_cap) {
    if (targets.size() != sc.n_u || (targets.array() <= 0.0).any())
        throw std::invalid_argument("build_qr: targets must be positive, one per user");

    const int g = sc.n_groups;
    const int p = 2 * sc.n_t;  // embedded order

    ConicProblem prob;
    for (int k = 0; k < g; ++k) prob.add_psd_block(p);
    const int r_block = prob.add_nonneg(1);
    prob.add_objective(r_block, 0, 1.0);

    // SINR rows:  -<H_i, E_k> + gamma_i sum_{l != k} <H_i, E_l> <= -2 gamma_i sigma_i^2
    // (embedding doubles traces, hence the 2 on the right-hand side)
    for (int i = 0; i < sc.n_u; ++i) {
        const auto& u = sc.users[i];
        const Eigen::VectorXd hsv = svec(embed_complex((u.h * u.h.adjoint()).eval()));
        const double gi = targets[i];
        Affine row;
        for (int l = 0; l < g; ++l)
            row.add_packed(l, hsv, l == u.group_id - 1 ? -1.0 : gi);
        prob.add_constraint(Rel::Le, std::move(row), -2.0 * gi * u.sigma2);
    }

    // power rows:  (1 / 2 P_n) sum_k (E_k[n,n] + E_k[n+N,n+N]) - r <= 0
    for (int n = 0; n < sc.n_t; ++n) {
        const double c = 0.5 / sc.pac[n];
        Affine row;
        for (int k = 0; k < g; ++k) {
            row.add(k, svec_index(n, n), c);
            row.add(k, svec_index(n + sc.n_t, n + sc.n_t), c);
        }
        row.add(r_block, 0, -1.0);
        prob.add_constraint(Rel::Le, std::move(row), 0.0);
    }
    if (std::isfinite(r_cap)) prob.add_constraint(Rel::Le, Affine(r_block, 0, 1.0), r_cap);
    return prob;
}

QosResult solve_qos_relaxed(const Scenario& sc, const Eigen::VectorXd& targets,
                            const SolveOptions& options, double r_cap) {
    ConicProblem prob = build_qr(sc, targets, r_cap);
    QosResult out;
    out.raw = solve(prob, options);
    out.status = out.raw.status;
    out.residuals = out.raw.residuals;
    out.iterations = out.raw.iterations;
    if (out.status == SolveStatus::Infeasible || out.raw.blocks.empty() ||
        out.raw.blocks[0].size() == 0)
        return out;

    out.solution.X.reserve(sc.n_groups);
    for (int k = 0; k < sc.n_groups; ++k)
        out.solution.X.push_back(extract_hermitian(out.raw.psd_matrix(prob, k)));
    out.solution.r = out.raw.blocks[sc.n_groups][0];
    return out;
}

double sinr_upper_bound(const Scenario& sc) {
    const double p_tot = sc.total_power();
    double u = 0.0;
    for (const auto& user : sc.users)
        u = std::max(u, p_tot * user.h.squaredNorm() / user.sigma2);
    return u;
}

int bisection_iterations(double l0, double u0, double epsilon) {
    return static_cast<int>(std::ceil(std::log2((u0 - l0) / epsilon)));
}

PrecoderSet rescale_to_pac(const PrecoderSet& candidate, const Eigen::VectorXd& pac) {
    const Eigen::VectorXd pw = per_antenna_power(candidate);
    double alpha2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < pw.size(); ++n)
        if (pw[n] > 0.0) alpha2 = std::min(alpha2, pac[n] / pw[n]);
    if (!std::isfinite(alpha2)) return candidate;  // zero candidate
    PrecoderSet out = candidate;
    const double alpha = std::sqrt(alpha2);
    for (auto& wk : out.w) wk *= alpha;
    return out;
}

PrecoderSet gaussian_randomization(const RelaxedSolution& relaxed, const Scenario& sc, int n_rand,
                                   std::uint64_t rng_seed) {
    if (n_rand < 1) throw std::invalid_argument("gaussian_randomization: n_rand must be >= 1");
    const int g = sc.n_groups;

    // X_k = F_k F_k^H with eigenvalues clipped at zero (the relaxed
    // solution is PSD only up to solver tolerance)
    std::vector<Eigen::MatrixXcd> factors(g);
    for (int k = 0; k < g; ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(relaxed.X[k]);
        const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
        factors[k] = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
    }

    Rng rng(rng_seed);
    PrecoderSet best = PrecoderSet::zero(sc.n_t, g);
    double best_val = -1.0;
    for (int cand = 0; cand < n_rand; ++cand) {
        PrecoderSet ps;
        ps.w.resize(g);
        for (int k = 0; k < g; ++k) ps.w[k] = factors[k] * rng.cnormal_vector(sc.n_t);
        ps = rescale_to_pac(ps, sc.pac);
        const Eigen::VectorXd s = sinr(ps, sc);
        double val = std::numeric_limits<double>::infinity();
        for (int i = 0; i < sc.n_u; ++i) val = std::min(val, s[i] / sc.users[i].gamma);
        if (val > best_val) {
            best_val = val;
            best = std::move(ps);
        }
    }
    return best;
}

std::vector<int> rank_profile(const RelaxedSolution& relaxed, double tol_rel) {
    if (!(tol_rel > 0.0 && tol_rel < 1.0))
        throw std::invalid_argument("rank_profile: tol_rel must lie in (0, 1)");
    std::vector<int> ranks;
    ranks.reserve(relaxed.X.size());
    for (const auto& x : relaxed.X) ranks.push_back(numerical_rank(x, tol_rel));
    return ranks;
}

SdrFairnessResult sdr_max_min_fair(const Scenario& sc, const SdrOptions& options) {
    SdrFairnessResult out;

    ConicSolution warm;
    bool have_warm = false;
    std::function<ProbeOutcome<RelaxedSolution>(double)> oracle = [&](double t) {
        SolveOptions sopt = options.solver;
        if (have_warm) sopt.warm_start = &warm;
        QosResult qos = solve_qos_relaxed(sc, sc.scaled_targets(t), sopt, kProbeRCap);
        ProbeOutcome<RelaxedSolution> probe;
        if (qos.status == SolveStatus::Infeasible) {
            probe.r_star = std::numeric_limits<double>::infinity();
            return probe;
        }
        if (qos.status == SolveStatus::MaxIterations && qos.residuals.max() > 1e-4)
            throw std::runtime_error("sdr_max_min_fair: relaxed QoS solve stalled (residual " +
                                     std::to_string(qos.residuals.max()) + ")");
        warm = qos.raw;
        have_warm = true;
        probe.r_star = qos.solution.r;
        probe.solution = std::move(qos.solution);
        return probe;
    };

    out.bisection = bisect<RelaxedSolution>(oracle, 0.0, sinr_upper_bound(sc), options.epsilon);
    if (out.bisection.solution) {
        out.relaxed = *out.bisection.solution;
    } else {
        // no feasible probe: fall back to the degenerate zero solution
        out.relaxed.X.assign(sc.n_groups, Eigen::MatrixXcd::Zero(sc.n_t, sc.n_t));
        out.relaxed.r = 0.0;
    }
    out.ranks = rank_profile(out.relaxed, options.rank_tol);
    out.relaxed.ranks = out.ranks;
    out.precoders = gaussian_randomization(out.relaxed, sc, options.n_rand, options.seed);
    const Eigen::VectorXd s = sinr(out.precoders, sc);
    out.achieved = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sc.n_u; ++i)
        out.achieved = std::min(out.achieved, s[i] / sc.users[i].gamma);
    return out;
}

}  // namespace mgbeam
