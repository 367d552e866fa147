#include "mgbeam/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace mgbeam {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSymTol = 1e-10;
}  // namespace

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
    const int p = static_cast<int>(m.rows());
    Eigen::VectorXd v(svec_dim(p));
    int k = 0;
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < j; ++i) v[k++] = kSqrt2 * m(i, j);
        v[k++] = m(j, j);
    }
    return v;
}

Eigen::MatrixXd unsvec(const Eigen::VectorXd& v, int order) {
    if (v.size() != svec_dim(order))
        throw std::invalid_argument("unsvec: packed length does not match order");
    Eigen::MatrixXd m(order, order);
    int k = 0;
    for (int j = 0; j < order; ++j) {
        for (int i = 0; i < j; ++i) {
            const double x = v[k++] / kSqrt2;
            m(i, j) = x;
            m(j, i) = x;
        }
        m(j, j) = v[k++];
    }
    return m;
}

double symmetry_error(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double hermitian_error(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd embed_any(const Eigen::MatrixXcd& m) {
    const auto r = m.rows();
    const auto c = m.cols();
    Eigen::MatrixXd e(2 * r, 2 * c);
    e.topLeftCorner(r, c) = m.real();
    e.topRightCorner(r, c) = -m.imag();
    e.bottomLeftCorner(r, c) = m.imag();
    e.bottomRightCorner(r, c) = m.real();
    return e;
}

Eigen::MatrixXd embed_complex(const Eigen::MatrixXcd& h) {
    if (h.rows() != h.cols())
        throw std::invalid_argument("embed_complex: matrix must be square");
    if (hermitian_error(h) > kSymTol)
        throw std::invalid_argument("embed_complex: matrix is not Hermitian");
    return embed_any(h);
}

Eigen::MatrixXcd extract_hermitian(const Eigen::MatrixXd& e) {
    if (e.rows() != e.cols() || e.rows() % 2 != 0)
        throw std::invalid_argument("extract_hermitian: expected even-order square matrix");
    const auto m = e.rows() / 2;
    Eigen::MatrixXd re = 0.5 * (e.topLeftCorner(m, m) + e.bottomRightCorner(m, m));
    re = 0.5 * (re + re.transpose()).eval();
    Eigen::MatrixXd im = 0.5 * (e.bottomLeftCorner(m, m) - e.topRightCorner(m, m));
    im = 0.5 * (im - im.transpose()).eval();
    Eigen::MatrixXcd h(m, m);
    h.real() = re;
    h.imag() = im;
    return h;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("project_psd: matrix must be square");
    if (symmetry_error(m) > kSymTol)
        throw std::invalid_argument("project_psd: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

void project_psd_svec(Eigen::Ref<Eigen::VectorXd> v, int order) {
    Eigen::MatrixXd m = unsvec(v, order);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.eigenvalues()[0] >= 0.0) return;  // already PSD
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    m.noalias() = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    v = svec(m);
}

Eigen::MatrixXcd soc_factor(const Eigen::MatrixXcd& a, double tol_rel) {
    if (hermitian_error(a) > kSymTol)
        throw std::invalid_argument("soc_factor: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lmax = lam.size() ? lam[lam.size() - 1] : 0.0;
    const double cut = std::max(lmax, 0.0) * tol_rel;
    int rank = 0;
    for (int i = 0; i < lam.size(); ++i)
        if (lam[i] > cut) ++rank;
    Eigen::MatrixXcd f(rank, a.cols());
    int r = 0;
    for (int i = 0; i < lam.size(); ++i) {
        if (lam[i] > cut)
            f.row(r++) = std::sqrt(lam[i]) * es.eigenvectors().col(i).adjoint();
    }
    return f;
}

int numerical_rank(const Eigen::MatrixXcd& hermitian, double tol_rel) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lmax = lam.size() ? lam[lam.size() - 1] : 0.0;
    if (lmax <= 0.0) return 0;
    int rank = 0;
    for (int i = 0; i < lam.size(); ++i)
        if (lam[i] > tol_rel * lmax) ++rank;
    return rank;
}

}  // namespace mgbeam
