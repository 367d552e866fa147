#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <limits>
#include <vector>

#include "mgbeam/linalg.hpp"

// Self-contained convex cone solver for the two problem shapes the
// pipelines produce: semidefinite programs (relaxed QoS minimization)
// and second-order cone programs (the convexified subproblems).
//
// Problems are stated over typed variable blocks (free / nonnegative /
// second-order / PSD) with real affine equality and inequality
// constraints plus explicit ||v(x)|| <= t(x) cones. Internally the
// problem is lowered to  min c'x  s.t.  Ax + s = b, s in K  and solved
// with a first-order operator-splitting iteration on the homogeneous
// self-dual embedding: one quasi-definite linear solve alternating with
// projections onto the cone product. PSD blocks are real symmetric in
// packed svec storage; complex data must be embedded with
// embed_complex() before it gets here.

namespace mgbeam {

enum class Cone { Free, NonNeg, Soc, Psd };
enum class Rel { Eq, Le };

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations };

const char* to_string(SolveStatus s);

struct VarBlock {
    Cone cone;
    int size;    // packed length in x (svec_dim(order) for PSD)
    int order;   // matrix order for PSD blocks, 0 otherwise
    int offset;  // position in the stacked variable vector
};

struct Term {
    int block;
    int index;
    double coeff;
};

// Sparse affine functional over variable blocks plus a constant.
class Affine {
  public:
    Affine() = default;
    Affine(int block, int index, double coeff) { add(block, index, coeff); }

    Affine& add(int block, int index, double coeff) {
        terms.push_back({block, index, coeff});
        return *this;
    }
    // one term per packed entry of `block`, scaled
    Affine& add_packed(int block, const Eigen::VectorXd& coeffs, double scale = 1.0);
    Affine& shift(double c) {
        constant += c;
        return *this;
    }

    std::vector<Term> terms;
    double constant = 0.0;
};

class ConicProblem {
  public:
    int add_free(int n);
    int add_nonneg(int n = 1);
    int add_soc_block(int dim);    // (t, v) with t >= ||v||, t first
    int add_psd_block(int order);  // real symmetric PSD, svec packed

    void add_objective(int block, int index, double coeff);
    void add_objective(int block, const Eigen::VectorXd& packed, double scale = 1.0);

    // lhs (+ its constant) REL rhs
    void add_constraint(Rel rel, Affine lhs, double rhs);
    // ||v(x)|| <= t(x)
    void add_soc_constraint(Affine t, std::vector<Affine> v);

    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    const VarBlock& block(int id) const { return blocks_.at(id); }
    int num_vars() const { return nvars_; }
    int num_affine_rows() const;  // equality + inequality rows only
    int num_eq_rows() const;
    int num_le_rows() const;
    int num_soc_constraints() const { return static_cast<int>(socs_.size()); }

    void dump(std::ostream& os) const;

  private:
    friend struct Compiler;

    struct LinConstraint {
        Rel rel;
        Affine lhs;
        double rhs;
    };
    struct SocConstraint {
        Affine t;
        std::vector<Affine> v;
    };

    int add_block(Cone cone, int size, int order);

    std::vector<VarBlock> blocks_;
    std::vector<Term> objective_;
    std::vector<LinConstraint> lins_;
    std::vector<SocConstraint> socs_;
    int nvars_ = 0;
};

struct Residuals {
    double primal = std::numeric_limits<double>::quiet_NaN();
    double dual = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    double max() const;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::MaxIterations;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    Residuals residuals;  // on Infeasible/Unbounded: certificate residual in `primal`
    int iterations = 0;
    std::vector<Eigen::VectorXd> blocks;  // packed primal value per block

    // full-space iterates for warm starts and certificates
    Eigen::VectorXd raw_x, raw_y, raw_s;

    // unpacked PSD block value
    Eigen::MatrixXd psd_matrix(const ConicProblem& p, int block_id) const;
};

struct SolveOptions {
    double tol = 1e-6;
    int max_iter = 50000;
    double alpha = 1.5;  // over-relaxation
    bool equilibrate = true;
    int ruiz_iters = 10;
    int check_interval = 25;
    bool verbose = false;
    const ConicSolution* warm_start = nullptr;
};

ConicSolution solve(const ConicProblem& problem, const SolveOptions& options = {});
ConicSolution solve(const ConicProblem& problem, double tol, int max_iter);

}  // namespace mgbeam
