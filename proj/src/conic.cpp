#include "mgbeam/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mgbeam {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

double Residuals::max() const { return std::max({primal, dual, gap}); }

Affine& Affine::add_packed(int block, const Eigen::VectorXd& coeffs, double scale) {
    for (int i = 0; i < coeffs.size(); ++i) {
        const double c = scale * coeffs[i];
        if (c != 0.0) terms.push_back({block, i, c});
    }
    return *this;
}

int ConicProblem::add_block(Cone cone, int size, int order) {
    if (size <= 0) throw std::invalid_argument("ConicProblem: block size must be positive");
    blocks_.push_back({cone, size, order, nvars_});
    nvars_ += size;
    return static_cast<int>(blocks_.size()) - 1;
}

int ConicProblem::add_free(int n) { return add_block(Cone::Free, n, 0); }
int ConicProblem::add_nonneg(int n) { return add_block(Cone::NonNeg, n, 0); }

int ConicProblem::add_soc_block(int dim) {
    if (dim < 2) throw std::invalid_argument("ConicProblem: SOC block needs dimension >= 2");
    return add_block(Cone::Soc, dim, 0);
}

int ConicProblem::add_psd_block(int order) {
    if (order < 1) throw std::invalid_argument("ConicProblem: PSD order must be >= 1");
    return add_block(Cone::Psd, svec_dim(order), order);
}

void ConicProblem::add_objective(int block, int index, double coeff) {
    objective_.push_back({block, index, coeff});
}

void ConicProblem::add_objective(int block, const Eigen::VectorXd& packed, double scale) {
    for (int i = 0; i < packed.size(); ++i)
        if (packed[i] != 0.0) objective_.push_back({block, i, scale * packed[i]});
}

void ConicProblem::add_constraint(Rel rel, Affine lhs, double rhs) {
    lins_.push_back({rel, std::move(lhs), rhs});
}

void ConicProblem::add_soc_constraint(Affine t, std::vector<Affine> v) {
    if (v.empty()) throw std::invalid_argument("ConicProblem: empty SOC constraint");
    socs_.push_back({std::move(t), std::move(v)});
}

int ConicProblem::num_eq_rows() const {
    return static_cast<int>(std::count_if(lins_.begin(), lins_.end(),
                                          [](const LinConstraint& c) { return c.rel == Rel::Eq; }));
}

int ConicProblem::num_le_rows() const { return static_cast<int>(lins_.size()) - num_eq_rows(); }
int ConicProblem::num_affine_rows() const { return static_cast<int>(lins_.size()); }

void ConicProblem::dump(std::ostream& os) const {
    os << "ConicProblem: " << nvars_ << " variables in " << blocks_.size() << " blocks\n";
    for (size_t i = 0; i < blocks_.size(); ++i) {
        const auto& b = blocks_[i];
        os << "  block " << i << ": ";
        switch (b.cone) {
            case Cone::Free: os << "free[" << b.size << "]"; break;
            case Cone::NonNeg: os << "nonneg[" << b.size << "]"; break;
            case Cone::Soc: os << "soc[" << b.size << "]"; break;
            case Cone::Psd: os << "psd(order " << b.order << ", packed " << b.size << ")"; break;
        }
        os << " @" << b.offset << "\n";
    }
    os << "  affine rows: " << num_eq_rows() << " eq, " << num_le_rows() << " le\n";
    os << "  soc constraints: " << socs_.size() << "\n";
    os << "  objective terms: " << objective_.size() << "\n";
}

// ---------------------------------------------------------------------------
// lowering to  min c'x  s.t.  Ax + s = b,  s in K
// ---------------------------------------------------------------------------

struct RowGroup {
    int start;
    int len;
    bool uniform;  // SOC/PSD groups must share one scaling factor
};

struct Compiled {
    int n = 0;
    int m = 0;
    Eigen::SparseMatrix<double> A;  // m x n, column major
    Eigen::VectorXd b, c;

    int zero_rows = 0;
    int nonneg_rows = 0;
    std::vector<int> soc_dims;
    std::vector<int> psd_orders;

    std::vector<RowGroup> groups;
};

struct Compiler {
    static Compiled run(const ConicProblem& p) {
        Compiled out;
        out.n = p.nvars_;

        int m = 0;
        for (const auto& lc : p.lins_)
            if (lc.rel == Rel::Eq) ++m;
        out.zero_rows = m;
        for (const auto& lc : p.lins_)
            if (lc.rel == Rel::Le) ++m;
        for (const auto& blk : p.blocks_)
            if (blk.cone == Cone::NonNeg) m += blk.size;
        out.nonneg_rows = m - out.zero_rows;
        for (const auto& sc : p.socs_) {
            out.soc_dims.push_back(static_cast<int>(sc.v.size()) + 1);
            m += static_cast<int>(sc.v.size()) + 1;
        }
        for (const auto& blk : p.blocks_)
            if (blk.cone == Cone::Soc) {
                out.soc_dims.push_back(blk.size);
                m += blk.size;
            }
        for (const auto& blk : p.blocks_)
            if (blk.cone == Cone::Psd) {
                out.psd_orders.push_back(blk.order);
                m += blk.size;
            }
        out.m = m;

        std::vector<Eigen::Triplet<double>> trip;
        out.b = Eigen::VectorXd::Zero(m);
        out.c = Eigen::VectorXd::Zero(out.n);
        for (const auto& t : p.objective_) out.c[p.blocks_.at(t.block).offset + t.index] += t.coeff;

        int row = 0;
        auto put_affine = [&](const Affine& a, double rhs) {
            for (const auto& t : a.terms) {
                const auto& blk = p.blocks_.at(t.block);
                if (t.index < 0 || t.index >= blk.size)
                    throw std::invalid_argument("ConicProblem: term index out of block range");
                trip.emplace_back(row, blk.offset + t.index, t.coeff);
            }
            out.b[row] = rhs - a.constant;
            ++row;
        };

        // zero cone: equalities
        for (const auto& lc : p.lins_)
            if (lc.rel == Rel::Eq) {
                out.groups.push_back({row, 1, false});
                put_affine(lc.lhs, lc.rhs);
            }
        // nonnegative cone: inequalities, then memberships
        for (const auto& lc : p.lins_)
            if (lc.rel == Rel::Le) {
                out.groups.push_back({row, 1, false});
                put_affine(lc.lhs, lc.rhs);
            }
        for (const auto& blk : p.blocks_)
            if (blk.cone == Cone::NonNeg)
                for (int i = 0; i < blk.size; ++i) {
                    out.groups.push_back({row, 1, false});
                    trip.emplace_back(row, blk.offset + i, -1.0);
                    ++row;
                }
        // second-order cones: explicit constraints, then memberships
        for (const auto& sc : p.socs_) {
            out.groups.push_back({row, static_cast<int>(sc.v.size()) + 1, true});
            // s_0 = t(x), s_i = v_i(x): rows  -t(x) + s = const
            Affine tneg;
            tneg.constant = -sc.t.constant;
            for (const auto& t : sc.t.terms) tneg.terms.push_back({t.block, t.index, -t.coeff});
            put_affine(tneg, 0.0);
            for (const auto& vi : sc.v) {
                Affine vneg;
                vneg.constant = -vi.constant;
                for (const auto& t : vi.terms) vneg.terms.push_back({t.block, t.index, -t.coeff});
                put_affine(vneg, 0.0);
            }
        }
        for (const auto& blk : p.blocks_)
            if (blk.cone == Cone::Soc) {
                out.groups.push_back({row, blk.size, true});
                for (int i = 0; i < blk.size; ++i) {
                    trip.emplace_back(row, blk.offset + i, -1.0);
                    ++row;
                }
            }
        // PSD memberships
        for (const auto& blk : p.blocks_)
            if (blk.cone == Cone::Psd) {
                out.groups.push_back({row, blk.size, true});
                for (int i = 0; i < blk.size; ++i) {
                    trip.emplace_back(row, blk.offset + i, -1.0);
                    ++row;
                }
            }

        out.A.resize(m, out.n);
        out.A.setFromTriplets(trip.begin(), trip.end());
        out.A.makeCompressed();
        return out;
    }
};

namespace {

// Projection onto the cone product (dual = true projects y onto K*,
// which only differs on the zero cone: its dual is free).
void project_cone(Eigen::Ref<Eigen::VectorXd> s, const Compiled& cp, bool dual) {
    int at = 0;
    if (!dual)
        s.segment(0, cp.zero_rows).setZero();
    at += cp.zero_rows;
    s.segment(at, cp.nonneg_rows) = s.segment(at, cp.nonneg_rows).cwiseMax(0.0);
    at += cp.nonneg_rows;
    for (int d : cp.soc_dims) {
        const double t = s[at];
        const double vn = s.segment(at + 1, d - 1).norm();
        if (vn <= t) {
            // inside
        } else if (vn <= -t) {
            s.segment(at, d).setZero();
        } else {
            const double beta = 0.5 * (t + vn);
            s[at] = beta;
            s.segment(at + 1, d - 1) *= beta / vn;
        }
        at += d;
    }
    for (int p : cp.psd_orders) {
        const int len = svec_dim(p);
        project_psd_svec(s.segment(at, len), p);
        at += len;
    }
}

struct Scaling {
    Eigen::VectorXd dr, dc;  // row / column scalings
    double sb = 1.0, sc = 1.0;
};

// Ruiz equilibration with one shared factor per SOC/PSD block so cone
// membership survives the row scaling.
Scaling equilibrate(Compiled& cp, int iters) {
    Scaling sc;
    sc.dr = Eigen::VectorXd::Ones(cp.m);
    sc.dc = Eigen::VectorXd::Ones(cp.n);

    Eigen::VectorXd rn(cp.m), cn(cp.n);
    for (int it = 0; it < iters; ++it) {
        rn.setZero();
        cn.setZero();
        for (int k = 0; k < cp.A.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator v(cp.A, k); v; ++v) {
                const double a = std::abs(v.value());
                rn[v.row()] = std::max(rn[v.row()], a);
                cn[v.col()] = std::max(cn[v.col()], a);
            }
        for (const auto& g : cp.groups)
            if (g.uniform) {
                const double mx = rn.segment(g.start, g.len).maxCoeff();
                rn.segment(g.start, g.len).setConstant(mx);
            }
        Eigen::VectorXd er(cp.m), ec(cp.n);
        for (int i = 0; i < cp.m; ++i)
            er[i] = rn[i] > 1e-12 ? 1.0 / std::sqrt(rn[i]) : 1.0;
        for (int j = 0; j < cp.n; ++j)
            ec[j] = cn[j] > 1e-12 ? 1.0 / std::sqrt(cn[j]) : 1.0;
        cp.A = er.asDiagonal() * cp.A * ec.asDiagonal();
        sc.dr = sc.dr.cwiseProduct(er);
        sc.dc = sc.dc.cwiseProduct(ec);
    }

    cp.b = sc.dr.cwiseProduct(cp.b);
    cp.c = sc.dc.cwiseProduct(cp.c);
    const double nb = cp.b.norm();
    const double nc = cp.c.norm();
    sc.sb = nb > 1e-10 ? 1.0 / nb : 1.0;
    sc.sc = nc > 1e-10 ? 1.0 / nc : 1.0;
    cp.b *= sc.sb;
    cp.c *= sc.sc;
    return sc;
}

// Solves (I + Q) u = w where Q is the skew HSDE operator. Reduces to an
// SPD system in x via  M = [[I, A'], [-A, I]]; the Gram matrix I + A'A
// splits into a diagonal (rows with one nonzero: cone memberships) plus
// a low-rank part from the general rows, handled by Woodbury. A dense
// Cholesky of I + A'A is the fallback when the general part is not low
// rank.
class KktSolver {
  public:
    KktSolver(const Compiled& cp) : A_(cp.A), n_(cp.n), m_(cp.m) {
        Eigen::VectorXd diag = Eigen::VectorXd::Ones(n_);
        std::vector<int> row_nnz(m_, 0);
        for (int k = 0; k < A_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator v(A_, k); v; ++v) ++row_nnz[v.row()];

        std::vector<int> gen_rows;
        for (int i = 0; i < m_; ++i)
            if (row_nnz[i] > 1) gen_rows.push_back(i);
        const int j = static_cast<int>(gen_rows.size());

        use_woodbury_ = j <= std::max(64, n_ / 2) && j <= 4000;
        if (use_woodbury_) {
            Eigen::SparseMatrix<double, Eigen::RowMajor> Ar(A_);
            U_.resize(j, n_);
            U_.setZero();
            std::vector<int> gen_mark(m_, -1);
            for (int r = 0; r < j; ++r) gen_mark[gen_rows[r]] = r;
            for (int k = 0; k < Ar.outerSize(); ++k)
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator v(Ar, k); v; ++v) {
                    if (gen_mark[v.row()] >= 0)
                        U_(gen_mark[v.row()], v.col()) = v.value();
                    else
                        diag[v.col()] += v.value() * v.value();
                }
            dinv_ = diag.cwiseInverse();
            if (j > 0) {
                Eigen::MatrixXd g = U_ * dinv_.asDiagonal() * U_.transpose();
                g.diagonal().array() += 1.0;
                gram_ = g.llt();
                if (gram_.info() != Eigen::Success)
                    throw std::runtime_error("conic solve: Gram factorization failed");
            }
        } else {
            Eigen::MatrixXd gram = Eigen::MatrixXd(A_.transpose() * A_);
            gram.diagonal().array() += 1.0;
            dense_ = gram.llt();
            if (dense_.info() != Eigen::Success)
                throw std::runtime_error("conic solve: KKT factorization failed");
        }
    }

    // (I + A'A) z = r
    Eigen::VectorXd solve_gram(const Eigen::VectorXd& r) const {
        if (!use_woodbury_) return dense_.solve(r);
        Eigen::VectorXd t = dinv_.cwiseProduct(r);
        if (U_.rows() == 0) return t;
        Eigen::VectorXd w = gram_.solve(U_ * t);
        return t - dinv_.cwiseProduct(U_.transpose() * w);
    }

    // M (zx, zy) = (dx, dy) with M = [[I, A'], [-A, I]]
    void solve_m(const Eigen::VectorXd& dx, const Eigen::VectorXd& dy, Eigen::VectorXd& zx,
                 Eigen::VectorXd& zy) const {
        zx = solve_gram(dx - A_.transpose() * dy);
        zy.noalias() = A_ * zx;
        zy += dy;
    }

  private:
    const Eigen::SparseMatrix<double>& A_;
    int n_, m_;
    bool use_woodbury_ = false;
    Eigen::VectorXd dinv_;
    Eigen::MatrixXd U_;
    Eigen::LLT<Eigen::MatrixXd> gram_;
    Eigen::LLT<Eigen::MatrixXd> dense_;
};

struct Candidate {
    Residuals res;
    double pobj = std::numeric_limits<double>::quiet_NaN();
    double dobj = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd x, y, s;  // unscaled
    bool valid = false;       // tau was positive
    // certificate measures
    double pinf_res = std::numeric_limits<double>::infinity();
    double dinf_res = std::numeric_limits<double>::infinity();
    Eigen::VectorXd y_cert, x_cert, s_cert;
};

}  // namespace

ConicSolution solve(const ConicProblem& problem, const SolveOptions& options) {
    Compiled cp = Compiler::run(problem);
    const Eigen::VectorXd b_orig = cp.b;
    const Eigen::VectorXd c_orig = cp.c;
    const double nb_orig = b_orig.norm();
    const double nc_orig = c_orig.norm();

    Scaling sc;
    if (options.equilibrate) {
        sc = equilibrate(cp, options.ruiz_iters);
    } else {
        sc.dr = Eigen::VectorXd::Ones(cp.m);
        sc.dc = Eigen::VectorXd::Ones(cp.n);
    }

    const int n = cp.n, m = cp.m;
    KktSolver kkt(cp);

    // g = M^{-1} (c, b), cached
    Eigen::VectorXd gx, gy;
    kkt.solve_m(cp.c, cp.b, gx, gy);
    const double denom = 1.0 + cp.c.dot(gx) + cp.b.dot(gy);

    Eigen::VectorXd ux = Eigen::VectorXd::Zero(n), uy = Eigen::VectorXd::Zero(m);
    double utau = 1.0;
    Eigen::VectorXd vs = Eigen::VectorXd::Zero(m);
    double vkappa = 1.0;

    if (options.warm_start && options.warm_start->raw_x.size() == n &&
        options.warm_start->raw_y.size() == m && options.warm_start->raw_s.size() == m) {
        ux = sc.sb * sc.dc.cwiseInverse().cwiseProduct(options.warm_start->raw_x);
        uy = sc.sc * sc.dr.cwiseInverse().cwiseProduct(options.warm_start->raw_y);
        vs = sc.sb * sc.dr.cwiseProduct(options.warm_start->raw_s);
        utau = 1.0;
        vkappa = 0.0;
    }

    Eigen::VectorXd tx(n), ty(m), wx(n), wy(m), px(n), py(m);
    double ttau = 0.0, wtau = 0.0;

    auto evaluate = [&](Candidate& cand) {
        cand = Candidate{};
        // products reused by both the optimality and certificate tests
        Eigen::VectorXd Aux = cp.A * ux;           // scaled A * u_x
        Eigen::VectorXd Atuy = cp.A.transpose() * uy;  // scaled A' * u_y
        const double ctux = cp.c.dot(ux);
        const double btuy = cp.b.dot(uy);

        if (utau > 1e-12) {
            cand.valid = true;
            cand.x = sc.dc.cwiseProduct(ux) / (utau * sc.sb);
            cand.y = sc.dr.cwiseProduct(uy) / (utau * sc.sc);
            cand.s = sc.dr.cwiseInverse().cwiseProduct(vs) / (utau * sc.sb);
            Eigen::VectorXd pvec =
                sc.dr.cwiseInverse().cwiseProduct(Aux + vs - cp.b * utau) / (utau * sc.sb);
            Eigen::VectorXd dvec =
                sc.dc.cwiseInverse().cwiseProduct(Atuy + cp.c * utau) / (utau * sc.sc);
            cand.res.primal = pvec.norm() / (1.0 + nb_orig);
            cand.res.dual = dvec.norm() / (1.0 + nc_orig);
            cand.pobj = ctux / (utau * sc.sb * sc.sc);
            cand.dobj = -btuy / (utau * sc.sb * sc.sc);
            cand.res.gap =
                std::abs(cand.pobj - cand.dobj) / (1.0 + std::abs(cand.pobj) + std::abs(cand.dobj));
        }

        // primal infeasibility: y with A'y = 0, b'y < 0
        const double bty_u = btuy / (sc.sb * sc.sc);  // b'(unscaled y dir), common positive factor
        if (bty_u < -1e-12) {
            Eigen::VectorXd aty = sc.dc.cwiseInverse().cwiseProduct(Atuy) / sc.sc;
            cand.y_cert = sc.dr.cwiseProduct(uy) / (sc.sc * (-bty_u));
            cand.pinf_res = aty.norm() * nb_orig / (-bty_u);
        }
        // dual infeasibility: x, s with Ax + s = 0, c'x < 0
        const double ctx_u = ctux / (sc.sb * sc.sc);
        if (ctx_u < -1e-12) {
            Eigen::VectorXd axs = sc.dr.cwiseInverse().cwiseProduct(Aux + vs) / sc.sb;
            cand.x_cert = sc.dc.cwiseProduct(ux) / (sc.sb * (-ctx_u));
            cand.s_cert = sc.dr.cwiseInverse().cwiseProduct(vs) / (sc.sb * (-ctx_u));
            cand.dinf_res = axs.norm() * nc_orig / (-ctx_u);
        }
    };

    ConicSolution out;
    Candidate cand, best;
    double best_score = std::numeric_limits<double>::infinity();
    int iter = 0;
    SolveStatus status = SolveStatus::MaxIterations;

    for (iter = 1; iter <= options.max_iter; ++iter) {
        // linear step: (I + Q) t = u + v
        wx = ux;  // u + v (v_x is identically zero)
        wy = uy + vs;
        wtau = utau + vkappa;
        kkt.solve_m(wx, wy, px, py);
        ttau = (wtau + cp.c.dot(px) + cp.b.dot(py)) / denom;
        tx = px - ttau * gx;
        ty = py - ttau * gy;

        // over-relaxed combination, then cone projection
        const double a = options.alpha;
        wx = a * tx + (1.0 - a) * ux;
        wy = a * ty + (1.0 - a) * uy - vs;
        wtau = a * ttau + (1.0 - a) * utau - vkappa;

        ux = wx;  // free block
        uy = wy;
        project_cone(uy, cp, /*dual=*/true);
        const double new_tau = std::max(wtau, 0.0);

        vs = uy - wy;
        vkappa = new_tau - wtau;
        utau = new_tau;

        if (iter % options.check_interval == 0 || iter == options.max_iter) {
            evaluate(cand);
            if (cand.valid) {
                const double score = cand.res.max();
                if (score < best_score) {
                    best_score = score;
                    best = cand;
                }
                if (cand.res.primal <= options.tol && cand.res.dual <= options.tol &&
                    cand.res.gap <= options.tol) {
                    status = SolveStatus::Optimal;
                    best = cand;
                    break;
                }
            }
            // homogeneous certificates only once tau is dominated by kappa
            if (vkappa > utau) {
                if (cand.pinf_res <= options.tol) {
                    status = SolveStatus::Infeasible;
                    best = cand;
                    break;
                }
                if (cand.dinf_res <= options.tol) {
                    status = SolveStatus::Unbounded;
                    best = cand;
                    break;
                }
            }
            if (options.verbose && (iter % (options.check_interval * 40) == 0)) {
                std::fprintf(stderr, "  conic iter %6d  pres %.2e dres %.2e gap %.2e tau %.2e\n",
                             iter, cand.res.primal, cand.res.dual, cand.res.gap, utau);
            }
        }
    }

    out.status = status;
    out.iterations = std::min(iter, options.max_iter);

    const Candidate& fin = best.valid || !cand.valid ? best : cand;
    if (status == SolveStatus::Infeasible) {
        out.residuals.primal = fin.pinf_res;
        out.raw_y = fin.y_cert;
        out.blocks.assign(problem.num_blocks(), Eigen::VectorXd());
        return out;
    }
    if (status == SolveStatus::Unbounded) {
        out.residuals.primal = fin.dinf_res;
        out.raw_x = fin.x_cert;
        out.raw_s = fin.s_cert;
        out.blocks.assign(problem.num_blocks(), Eigen::VectorXd());
        return out;
    }

    if (fin.valid) {
        out.objective = fin.pobj;
        out.dual_objective = fin.dobj;
        out.residuals = fin.res;
        out.raw_x = fin.x;
        out.raw_y = fin.y;
        out.raw_s = fin.s;
        out.blocks.clear();
        out.blocks.reserve(problem.num_blocks());
        for (int i = 0; i < problem.num_blocks(); ++i) {
            const auto& blk = problem.block(i);
            out.blocks.push_back(fin.x.segment(blk.offset, blk.size));
        }
    } else {
        out.blocks.assign(problem.num_blocks(), Eigen::VectorXd());
    }
    return out;
}

ConicSolution solve(const ConicProblem& problem, double tol, int max_iter) {
    SolveOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return solve(problem, opt);
}

Eigen::MatrixXd ConicSolution::psd_matrix(const ConicProblem& p, int block_id) const {
    const auto& blk = p.block(block_id);
    if (blk.cone != Cone::Psd) throw std::invalid_argument("psd_matrix: block is not PSD");
    return unsvec(blocks.at(block_id), blk.order);
}

}  // namespace mgbeam
