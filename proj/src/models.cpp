#include "gkdiff/models.hpp"

#include "gkdiff/errors.hpp"
#include "gkdiff/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <type_traits>
#include <utility>

namespace gkdiff {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(const char* field, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(field, "must be a positive finite number");
  }
}

void require_finite(const char* field, double value) {
  if (!std::isfinite(value)) {
    throw ParameterError(field, "must be finite");
  }
}

}  // namespace

LinearGaussianModel::LinearGaussianModel(std::string label, ModelParams params, Matrix drift,
                                         Matrix noise, double inv_temp, Matrix observable)
    : label_(std::move(label)),
      params_(std::move(params)),
      drift_(std::move(drift)),
      noise_(std::move(noise)),
      inv_temp_(inv_temp),
      observable_(std::move(observable)) {
  const Eigen::Index n = drift_.rows();
  if (n < 1 || drift_.cols() != n) {
    throw DimensionError("drift must be a non-empty square matrix");
  }
  if (noise_.rows() != n || noise_.cols() != n) {
    throw DimensionError("noise must be state_dim x state_dim");
  }
  if (observable_.rows() < 1 || observable_.cols() != n) {
    throw DimensionError("observable must be obs_dim x state_dim with obs_dim >= 1");
  }
  require_positive("beta", inv_temp_);
  if (!drift_.allFinite() || !noise_.allFinite() || !observable_.allFinite()) {
    throw ParameterError("matrices", "entries must be finite");
  }
  if (!is_hurwitz(drift_)) {
    throw ErgodicityError("drift is not Hurwitz: the linear SDE has no invariant measure");
  }
}

GaussianMeasure::GaussianMeasure(Matrix covariance) : covariance_(std::move(covariance)) {
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() == 0) {
    throw DimensionError("covariance must be a non-empty square matrix");
  }
  const double scale = covariance_.cwiseAbs().maxCoeff();
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DomainError("covariance is not positive definite");
  }
}

bool is_hurwitz(const Matrix& drift) {
  Eigen::EigenSolver<Matrix> eig(drift, false);
  return (eig.eigenvalues().real().array() < 0.0).all();
}

LinearGaussianModel build_ou(double gamma, double beta) {
  require_positive("gamma", gamma);
  require_positive("beta", beta);
  Matrix drift(1, 1);
  drift << -gamma;
  Matrix noise(1, 1);
  noise << std::sqrt(2.0 * gamma / beta);
  return {"ou", OuParams{gamma, beta}, drift, noise, beta, Matrix::Identity(1, 1)};
}

LinearGaussianModel build_magnetic(double omega, double nu, double beta) {
  require_finite("omega", omega);
  require_positive("nu", nu);
  require_positive("beta", beta);
  Matrix rotation = Matrix::Zero(3, 3);
  rotation(0, 1) = 1.0;
  rotation(1, 0) = -1.0;
  Matrix drift = omega * rotation - nu * Matrix::Identity(3, 3);
  Matrix noise = std::sqrt(2.0 * nu / beta) * Matrix::Identity(3, 3);
  return {"magnetic", MagneticParams{omega, nu, beta}, drift, noise, beta,
          Matrix::Identity(3, 3)};
}

LinearGaussianModel build_gle(const std::vector<double>& lambdas, const std::vector<double>& alphas,
                              double beta) {
  if (lambdas.empty()) {
    throw ParameterError("lambdas", "at least one auxiliary mode is required");
  }
  if (lambdas.size() != alphas.size()) {
    throw ParameterError("alphas", "must have the same length as lambdas");
  }
  require_positive("beta", beta);
  double kernel_integral = 0.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    require_positive("alphas", alphas[j]);
    require_finite("lambdas", lambdas[j]);
    kernel_integral += lambdas[j] * lambdas[j] / alphas[j];
  }
  if (!(kernel_integral > 0.0)) {
    throw ParameterError("lambdas", "all zero: the momentum is undamped");
  }

  const auto n_aux = static_cast<Eigen::Index>(lambdas.size());
  const Eigen::Index n = n_aux + 1;
  Matrix drift = Matrix::Zero(n, n);
  Matrix noise = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n_aux; ++j) {
    const double lambda = lambdas[static_cast<std::size_t>(j)];
    const double alpha = alphas[static_cast<std::size_t>(j)];
    drift(0, j + 1) = lambda;
    drift(j + 1, 0) = -lambda;
    drift(j + 1, j + 1) = -alpha;
    noise(j + 1, j + 1) = std::sqrt(2.0 * alpha / beta);
  }
  Matrix observable = Matrix::Zero(1, n);
  observable(0, 0) = 1.0;
  return {"gle", GleParams{lambdas, alphas, beta}, drift, noise, beta, observable};
}

LinearGaussianModel build_genou(const Matrix& J, double alpha, double gamma, double beta) {
  if (J.rows() < 1 || J.rows() != J.cols()) {
    throw ParameterError("J", "must be a non-empty square matrix");
  }
  if (!J.allFinite()) {
    throw ParameterError("J", "entries must be finite");
  }
  if ((J + J.transpose()).cwiseAbs().maxCoeff() > kSkewTolerance) {
    throw ParameterError("J", "must be skew-symmetric (J + J^T = 0)");
  }
  require_finite("alpha", alpha);
  require_positive("gamma", gamma);
  require_positive("beta", beta);
  const Eigen::Index d = J.rows();
  Matrix drift = alpha * J - gamma * Matrix::Identity(d, d);
  Matrix noise = std::sqrt(2.0 * gamma / beta) * Matrix::Identity(d, d);
  return {"genou", GenouParams{J, alpha, gamma, beta}, drift, noise, beta, Matrix::Identity(d, d)};
}

LinearGaussianModel build_model(const ModelParams& params) {
  return std::visit(
      Overloaded{
          [](const OuParams& p) { return build_ou(p.gamma, p.beta); },
          [](const MagneticParams& p) { return build_magnetic(p.omega, p.nu, p.beta); },
          [](const GleParams& p) { return build_gle(p.lambdas, p.alphas, p.beta); },
          [](const GenouParams& p) { return build_genou(p.J, p.alpha, p.gamma, p.beta); },
      },
      params);
}

Matrix reference_skew_matrix() {
  Matrix J(3, 3);
  J << 0, 1, 1, -1, 0, 1, -1, -1, 0;
  return J;
}

Vector reference_null_direction() {
  Vector xi(3);
  xi << 1, -1, 1;
  return xi;
}

GaussianMeasure stationary_covariance(const LinearGaussianModel& model) {
  if (!is_hurwitz(model.drift())) {
    throw ErgodicityError("drift is not Hurwitz");
  }
  const Matrix Q = model.diffusion();
  Matrix sigma = linalg::solve_lyapunov(model.drift(), Q);
  const Matrix residual = model.drift() * sigma + sigma * model.drift().transpose() + Q;
  const double scale =
      2.0 * linalg::inf_norm(model.drift()) * linalg::inf_norm(sigma) + linalg::inf_norm(Q);
  if (linalg::inf_norm(residual) > 1e-10 * scale) {
    throw Error("Lyapunov solve did not reach the residual tolerance");
  }
  return GaussianMeasure(std::move(sigma));
}

double friction(const LinearGaussianModel& model) {
  return std::visit(Overloaded{
                        [](const OuParams& p) { return p.gamma; },
                        [](const MagneticParams& p) { return p.nu; },
                        [](const GleParams& p) {
                          double total = 0.0;
                          for (std::size_t j = 0; j < p.alphas.size(); ++j) {
                            total += p.lambdas[j] * p.lambdas[j] / p.alphas[j];
                          }
                          return total;
                        },
                        [](const GenouParams& p) { return p.gamma; },
                    },
                    model.params());
}

LinearGaussianModel with_friction(const LinearGaussianModel& model, double value) {
  require_positive("gamma", value);
  return std::visit(Overloaded{
                        [&](OuParams p) {
                          p.gamma = value;
                          return build_model(p);
                        },
                        [&](MagneticParams p) {
                          p.nu = value;
                          return build_model(p);
                        },
                        [&](GleParams p) {
                          const double scale = std::sqrt(value / friction(model));
                          for (double& lambda : p.lambdas) lambda *= scale;
                          return build_model(p);
                        },
                        [&](GenouParams p) {
                          p.gamma = value;
                          return build_model(p);
                        },
                    },
                    model.params());
}

double dissipation_scale(const LinearGaussianModel& model) {
  return std::visit(Overloaded{
                        [](const OuParams& p) { return p.gamma; },
                        [](const MagneticParams& p) { return p.nu; },
                        [](const GleParams&) { return 1.0; },
                        [](const GenouParams& p) { return p.gamma; },
                    },
                    model.params());
}

const std::vector<std::string>& catalog_labels() {
  static const std::vector<std::string> labels{"ou", "magnetic", "gle", "genou"};
  return labels;
}

}  // namespace gkdiff
