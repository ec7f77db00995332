#include "gkdiff/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>

namespace gkdiff::linalg {

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = A.rows();

  // A = U T U^*, Y = U^* X U turns the equation into T Y + Y T^* = F.
  Eigen::ComplexSchur<CMatrix> schur(A.cast<std::complex<double>>());
  const CMatrix& T = schur.matrixT();
  const CMatrix& U = schur.matrixU();
  const CMatrix F = -(U.adjoint() * Q.cast<std::complex<double>>() * U);

  CMatrix Y = CMatrix::Zero(n, n);
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = F.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) {
      rhs -= std::conj(T(j, k)) * Y.col(k);
    }
    CMatrix shifted = T;
    shifted.diagonal().array() += std::conj(T(j, j));
    Y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }

  Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
  return 0.5 * (X + X.transpose());
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& P) {
  Eigen::LLT<Eigen::MatrixXd> llt(P);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

double inf_norm(const Eigen::MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace gkdiff::linalg
