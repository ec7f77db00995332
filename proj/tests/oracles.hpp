#pragma once

// Independent reference computations used by the unit tests. Nothing here
// calls into the library's assembly or solver code.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

/// Gauss-Hermite rule for the standard normal weight (Golub-Welsch).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline Quadrature gauss_hermite(int n) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) T(k, k - 1) = T(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  Quadrature q;
  for (int k = 0; k < n; ++k) {
    q.nodes.push_back(es.eigenvalues()(k));
    const double v = es.eigenvectors()(0, k);
    q.weights.push_back(v * v);
  }
  return q;
}

/// He_n(x) and its first two derivatives by the three-term recurrence.
struct HermiteValue {
  double value;
  double d1;
  double d2;
};

inline double hermite(int n, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

inline HermiteValue hermite_all(int n, double x) {
  // He_n' = n He_{n-1}
  const double d1 = n >= 1 ? n * hermite(n - 1, x) : 0.0;
  const double d2 = n >= 2 ? n * (n - 1) * hermite(n - 2, x) : 0.0;
  return {hermite(n, x), d1, d2};
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

/// Solves A X + X A^T + Q = 0 through the n^2 x n^2 Kronecker system.
inline Eigen::MatrixXd lyapunov_kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  // vec(A X) = (I kron A) vec X, vec(X A^T) = (A kron I) vec X
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * A;
      K.block(i * n, j * n, n, n) += A(i, j) * I;
    }
  }
  const Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  const Eigen::VectorXd x = K.fullPivLu().solve(-q);
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
}

inline Eigen::MatrixXd random_skew(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd J(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) J(i, j) = u(rng);
  }
  return J - J.transpose();
}

inline Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd e(n);
  for (int i = 0; i < n; ++i) e(i) = g(rng);
  return e.normalized();
}

}  // namespace oracle
