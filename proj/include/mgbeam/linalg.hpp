#pragma once

#include <Eigen/Dense>
#include <complex>

// Dense linear-algebra helpers shared by the cone solver and both
// beamforming pipelines. All complex data crosses into the real world
// through embed_complex(); the factor-of-2 trace/rank bookkeeping that
// comes with the embedding is kept here and nowhere else.

namespace mgbeam {

using cxd = std::complex<double>;

// ---- packed symmetric storage (svec) ----------------------------------
//
// A real symmetric matrix of order p is packed column-major, upper
// triangle, with off-diagonal entries scaled by sqrt(2) so that
// svec(A).dot(svec(B)) == <A, B>_F.

inline int svec_dim(int order) { return order * (order + 1) / 2; }

// packed position of entry (i, j), i <= j
inline int svec_index(int i, int j) { return j * (j + 1) / 2 + i; }

Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd unsvec(const Eigen::VectorXd& v, int order);

// ---- symmetry / hermitian checks --------------------------------------

double symmetry_error(const Eigen::MatrixXd& m);
double hermitian_error(const Eigen::MatrixXcd& m);

// ---- complex <-> real embedding ----------------------------------------

// [[Re H, -Im H], [Im H, Re H]] for Hermitian H (checked to 1e-10).
// H >= 0 iff the embedding >= 0; traces double; eigenvalues pair up.
Eigen::MatrixXd embed_complex(const Eigen::MatrixXcd& h);

// Same block map without the Hermitian check; ring homomorphism on all
// of C^{m x m}. Used internally and by tests.
Eigen::MatrixXd embed_any(const Eigen::MatrixXcd& m);

// Inverse of embed_complex for a (possibly only approximately)
// structured symmetric matrix: averages the two real blocks and
// antisymmetrizes the imaginary part, so arbitrary symmetric input maps
// to the nearest Hermitian matrix with the same structured part.
Eigen::MatrixXcd extract_hermitian(const Eigen::MatrixXd& e);

// ---- PSD cone ----------------------------------------------------------

// Nearest (Frobenius) PSD matrix: eigendecompose, clip negative
// eigenvalues at zero. Throws std::invalid_argument if the input is not
// symmetric to 1e-10.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m);

// In-place projection in svec coordinates (no symmetry check; the
// packing is symmetric by construction). Hot path of the cone solver.
void project_psd_svec(Eigen::Ref<Eigen::VectorXd> v, int order);

// Factor F of a Hermitian PSD matrix A with A = F^H F, rows of F are
// sqrt(lambda_i) v_i^H for eigenvalues above tol_rel * lambda_max.
// Negative eigenvalues within tolerance are clipped. Returns a matrix
// with rank(A) rows (possibly 0 x n).
Eigen::MatrixXcd soc_factor(const Eigen::MatrixXcd& a, double tol_rel = 1e-12);

// Eigenvalue count above tol_rel * lambda_max; 0 for matrices with no
// positive eigenvalue.
int numerical_rank(const Eigen::MatrixXcd& hermitian, double tol_rel);

}  // namespace mgbeam
