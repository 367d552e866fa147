#include "mgbeam/sca.hpp"

#include <chrono>
#include <cmath>

#include "mgbeam/random.hpp"

namespace mgbeam {

QuadraticSplit build_quadratics(const Scenario& sc, const Eigen::VectorXd& targets) {
    if (targets.size() != sc.n_u || (targets.array() <= 0.0).any())
        throw std::invalid_argument("build_quadratics: targets must be positive, one per user");
    const int g = sc.n_groups;
    const int dim = g * sc.n_t;

    QuadraticSplit qs;
    qs.a_plus.reserve(sc.n_u);
    qs.a_minus.reserve(sc.n_u);
    qs.rhs.resize(sc.n_u);
    for (int i = 0; i < sc.n_u; ++i) {
        const auto& u = sc.users[i];
        const Eigen::MatrixXcd hh = u.h * u.h.adjoint();
        Eigen::MatrixXcd ap = Eigen::MatrixXcd::Zero(dim, dim);
        Eigen::MatrixXcd am = Eigen::MatrixXcd::Zero(dim, dim);
        for (int l = 0; l < g; ++l) {
            auto blk = [&](Eigen::MatrixXcd& m) -> decltype(auto) {
                return m.block(l * sc.n_t, l * sc.n_t, sc.n_t, sc.n_t);
            };
            if (l == u.group_id - 1)
                blk(am) = -hh;
            else
                blk(ap) = targets[i] * hh;
        }
        qs.a_plus.push_back(std::move(ap));
        qs.a_minus.push_back(std::move(am));
        qs.rhs[i] = -targets[i] * u.sigma2;
    }
    return qs;
}

AffineForm linearize(const Eigen::MatrixXcd& a_minus, const Eigen::VectorXcd& z) {
    AffineForm f;
    f.coeff = a_minus * z;
    f.constant = -z.dot(f.coeff).real();  // -z^H A z
    return f;
}

namespace {

// real row pair for the complex functional f^H w over u = [Re w; Im w]
void add_complex_rows(std::vector<Affine>& rows, int w_block, int dim,
                      const Eigen::VectorXcd& f, double scale) {
    Affine re, im;
    for (int j = 0; j < dim; ++j) {
        const double fr = f[j].real(), fi = f[j].imag();
        if (fr != 0.0) {
            re.add(w_block, j, scale * fr);
            im.add(w_block, dim + j, scale * fr);
        }
        if (fi != 0.0) {
            re.add(w_block, dim + j, scale * fi);
            im.add(w_block, j, -scale * fi);
        }
    }
    rows.push_back(std::move(re));
    rows.push_back(std::move(im));
}

}  // namespace

QscaResult solve_qsca(const Scenario& sc, const Eigen::VectorXd& targets,
                      const Eigen::VectorXcd& z, double lambda, const SolveOptions& options,
                      const ConicSolution* warm) {
    if (!(lambda > 0.0)) throw std::invalid_argument("solve_qsca: lambda must be positive");
    const int g = sc.n_groups;
    const int dim = g * sc.n_t;
    if (z.size() != dim) throw std::invalid_argument("solve_qsca: z must have length G*N_t");
    const int n_s = sc.n_u + 1;

    const QuadraticSplit qs = build_quadratics(sc, targets);

    ConicProblem prob;
    const int w_block = prob.add_free(2 * dim);  // [Re w_tot; Im w_tot]
    const int r_block = prob.add_nonneg(1);
    const int s_block = prob.add_nonneg(n_s);
    const int q_block = prob.add_free(1);  // epigraph of ||s||

    prob.add_objective(r_block, 0, 1.0);
    prob.add_objective(q_block, 0, lambda);

    {  // ||s|| <= q
        std::vector<Affine> v;
        for (int i = 0; i < n_s; ++i) v.emplace_back(s_block, i, 1.0);
        prob.add_soc_constraint(Affine(q_block, 0, 1.0), std::move(v));
    }

    // SINR constraints: ||F_i w||^2 <= aff_i,
    //   aff_i = rhs_i + s_i - 2 Re{(A- z)^H w} + z^H A- z
    // as SOC: ||[2 F_i w; aff_i - 1]|| <= aff_i + 1
    for (int i = 0; i < sc.n_u; ++i) {
        const Eigen::MatrixXcd f = soc_factor(qs.a_plus[i]);
        const AffineForm lin = linearize(qs.a_minus[i], z);

        Affine aff;
        aff.add(s_block, i, 1.0);
        for (int j = 0; j < dim; ++j) {
            const double cr = lin.coeff[j].real(), ci = lin.coeff[j].imag();
            // -2 Re{coeff^H w} = -2 (Re c . Re w + Im c . Im w)
            if (cr != 0.0) aff.add(w_block, j, -2.0 * cr);
            if (ci != 0.0) aff.add(w_block, dim + j, -2.0 * ci);
        }
        aff.shift(qs.rhs[i] - lin.constant);

        std::vector<Affine> v;
        for (int row = 0; row < f.rows(); ++row)
            add_complex_rows(v, w_block, dim, f.row(row).conjugate(), 2.0);
        Affine last = aff;
        last.shift(-1.0);
        v.push_back(std::move(last));
        Affine t = aff;
        t.shift(1.0);
        prob.add_soc_constraint(std::move(t), std::move(v));
    }

    // power rows: sum_k |w_k[n]|^2 <= P_n (r + s_{N_u}),
    // as SOC: ||[2 w_coeffs; t - 1]|| <= t + 1 with t = P_n (r + s)
    for (int n = 0; n < sc.n_t; ++n) {
        Affine t;
        t.add(r_block, 0, sc.pac[n]).add(s_block, n_s - 1, sc.pac[n]);
        std::vector<Affine> v;
        for (int k = 0; k < g; ++k) {
            const int j = k * sc.n_t + n;
            v.emplace_back(w_block, j, 2.0);
            v.emplace_back(w_block, dim + j, 2.0);
        }
        Affine last = t;
        last.shift(-1.0);
        v.push_back(std::move(last));
        t.shift(1.0);
        prob.add_soc_constraint(std::move(t), std::move(v));
    }

    SolveOptions sopt = options;
    sopt.warm_start = warm;
    QscaResult out;
    out.raw = solve(prob, sopt);
    out.status = out.raw.status;
    out.residuals = out.raw.residuals;
    if (out.raw.blocks.empty() || out.raw.blocks[w_block].size() == 0) {
        out.w_tot = Eigen::VectorXcd::Zero(dim);
        out.slacks = Eigen::VectorXd::Zero(n_s);
        return out;
    }
    out.w_tot.resize(dim);
    const Eigen::VectorXd& u = out.raw.blocks[w_block];
    for (int j = 0; j < dim; ++j) out.w_tot[j] = cxd(u[j], u[dim + j]);
    out.r = out.raw.blocks[r_block][0];
    out.slacks = out.raw.blocks[s_block].cwiseMax(0.0);
    out.objective = out.r + lambda * out.slacks.norm();
    return out;
}

ScaQosResult sca_qos(const Scenario& sc, const Eigen::VectorXd& targets,
                     const Eigen::VectorXcd& z0, const ScaLoopOptions& options) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed_ms = [&] {
        return std::chrono::duration<double, std::milli>(clock::now() - start).count();
    };

    ScaQosResult out;
    Eigen::VectorXcd z = z0;
    double prev_obj = std::numeric_limits<double>::infinity();
    const ConicSolution* warm = nullptr;

    for (int j = 1; j <= options.max_outer; ++j) {
        QscaResult sub = solve_qsca(sc, targets, z, options.lambda, options.solver, warm);
        if (sub.status == SolveStatus::Infeasible || sub.status == SolveStatus::Unbounded)
            throw std::runtime_error("sca_qos: convex subproblem reported " +
                                     std::string(to_string(sub.status)));
        if (sub.status == SolveStatus::MaxIterations && sub.residuals.max() > 1e-4)
            throw std::runtime_error("sca_qos: subproblem solve stalled (residual " +
                                     std::to_string(sub.residuals.max()) + ")");

        // keep the previous iterate if solver noise pushed the objective up
        if (sub.objective > prev_obj + 1e-9 * std::max(1.0, std::abs(prev_obj))) break;

        out.w_tot = sub.w_tot;
        out.r_star = sub.r;
        out.slacks = sub.slacks;
        out.raw = std::move(sub.raw);
        warm = &out.raw;
        z = out.w_tot;

        ScaState st;
        st.z = z;
        st.lambda = options.lambda;
        st.slacks = out.slacks;
        st.r = sub.r;
        st.objective = sub.objective;
        st.iteration = j;
        st.wall_ms = elapsed_ms();
        out.trace.push_back(std::move(st));

        const bool converged =
            std::isfinite(prev_obj) &&
            std::abs(prev_obj - sub.objective) <=
                options.conv_tol * std::max(1.0, std::abs(prev_obj));
        prev_obj = sub.objective;
        if (converged) break;
    }

    if (out.trace.empty()) {
        // first subproblem already worse than nothing; keep z0 as output
        out.w_tot = z0;
        out.r_star = std::numeric_limits<double>::infinity();
        out.slacks = Eigen::VectorXd::Zero(sc.n_u + 1);
    }
    out.slack_max = out.slacks.size() ? out.slacks.maxCoeff() : 0.0;
    out.slack_feasible = out.slack_max <= options.slack_tol;
    return out;
}

Eigen::VectorXcd init_point(InitStrategy strategy, const Scenario& sc, std::uint64_t seed) {
    const int dim = sc.n_groups * sc.n_t;
    switch (strategy) {
        case InitStrategy::Zero:
            return Eigen::VectorXcd::Zero(dim);
        case InitStrategy::Randomized: {
            Rng rng(seed);
            PrecoderSet ps = PrecoderSet::from_stacked(rng.cnormal_vector(dim), sc.n_t, sc.n_groups);
            return rescale_to_pac(ps, sc.pac).stacked();
        }
        case InitStrategy::Matched: {
            PrecoderSet ps;
            ps.w.resize(sc.n_groups);
            for (int k = 0; k < sc.n_groups; ++k) {
                Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(sc.n_t);
                for (int i : sc.groups[k]) mean += sc.users[i].h;
                mean /= static_cast<double>(sc.groups[k].size());
                if (mean.norm() < 1e-9)  // cancelling co-group channels
                    mean = sc.users[sc.groups[k].front()].h;
                ps.w[k] = mean;
            }
            return rescale_to_pac(ps, sc.pac).stacked();
        }
    }
    throw std::invalid_argument("init_point: unknown strategy");
}

BisectionResult<PrecoderSet> sca_fairness(const Scenario& sc, const ScaOptions& options) {
    Eigen::VectorXcd z = init_point(options.z0_strategy, sc, options.seed);

    std::function<ProbeOutcome<PrecoderSet>(double)> oracle = [&](double t) {
        ScaQosResult res = sca_qos(sc, sc.scaled_targets(t), z, options.loop);
        ProbeOutcome<PrecoderSet> probe;
        probe.r_star = res.r_star;
        probe.acceptable = res.slack_feasible;
        if (res.w_tot.size() && res.w_tot.cwiseAbs().maxCoeff() > 0.0)
            z = res.w_tot;  // warm start for the next probe
        probe.solution = PrecoderSet::from_stacked(res.w_tot, sc.n_t, sc.n_groups);
        return probe;
    };

    return bisect<PrecoderSet>(oracle, 0.0, sinr_upper_bound(sc), options.epsilon);
}

}  // namespace mgbeam
