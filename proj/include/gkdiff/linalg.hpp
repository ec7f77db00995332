#pragma once

#include <Eigen/Dense>

namespace gkdiff::linalg {

/// Solves A X + X A^T + Q = 0 for X by complex-Schur Bartels-Stewart.
/// A must have no pair of eigenvalues summing to zero (Hurwitz suffices).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Symmetric square root factor L with L L^T = P for a symmetric PSD P.
/// Uses Cholesky when possible and falls back to an eigendecomposition.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& P);

/// Max absolute row sum.
double inf_norm(const Eigen::MatrixXd& A);

}  // namespace gkdiff::linalg
