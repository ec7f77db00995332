#pragma once

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

namespace gkdiff {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance on J + J^T when validating a skew-symmetric generator.
inline constexpr double kSkewTolerance = 1e-12;

struct OuParams {
  double gamma = 1.0;
  double beta = 1.0;
};

struct MagneticParams {
  double omega = 1.0;
  double nu = 1.0;
  double beta = 1.0;
};

/// Markovian embedding of a generalized Langevin equation with memory kernel
/// sum_j lambda_j^2 exp(-alpha_j |t|).
struct GleParams {
  std::vector<double> lambdas;
  std::vector<double> alphas;
  double beta = 1.0;
};

struct GenouParams {
  Matrix J;
  double alpha = 1.0;
  double gamma = 1.0;
  double beta = 1.0;
};

using ModelParams = std::variant<OuParams, MagneticParams, GleParams, GenouParams>;

/// Linear SDE dz = B z dt + sigma dW with a linear observable V(z) = M z.
///
/// Instances are validated on construction (shapes, beta > 0, Hurwitz drift,
/// sigma sigma^T PSD) and immutable afterwards.
class LinearGaussianModel {
 public:
  LinearGaussianModel(std::string label, ModelParams params, Matrix drift, Matrix noise,
                      double inv_temp, Matrix observable);

  const std::string& label() const noexcept { return label_; }
  const ModelParams& params() const noexcept { return params_; }
  Eigen::Index state_dim() const noexcept { return drift_.rows(); }
  Eigen::Index obs_dim() const noexcept { return observable_.rows(); }
  const Matrix& drift() const noexcept { return drift_; }
  const Matrix& noise() const noexcept { return noise_; }
  double inv_temp() const noexcept { return inv_temp_; }
  const Matrix& observable() const noexcept { return observable_; }

  /// sigma sigma^T
  Matrix diffusion() const { return noise_ * noise_.transpose(); }

 private:
  std::string label_;
  ModelParams params_;
  Matrix drift_;
  Matrix noise_;
  double inv_temp_;
  Matrix observable_;
};

/// Zero-mean Gaussian with a symmetric positive-definite covariance.
class GaussianMeasure {
 public:
  explicit GaussianMeasure(Matrix covariance);
  const Matrix& covariance() const noexcept { return covariance_; }

 private:
  Matrix covariance_;
};

LinearGaussianModel build_ou(double gamma, double beta);
LinearGaussianModel build_magnetic(double omega, double nu, double beta);
LinearGaussianModel build_gle(const std::vector<double>& lambdas, const std::vector<double>& alphas,
                              double beta);
LinearGaussianModel build_genou(const Matrix& J, double alpha, double gamma, double beta);
LinearGaussianModel build_model(const ModelParams& params);

/// The 3x3 skew matrix with rows (0,1,1), (-1,0,1), (-1,-1,0); its kernel is
/// spanned by (1,-1,1).
Matrix reference_skew_matrix();
Vector reference_null_direction();

/// Solves B S + S B^T + sigma sigma^T = 0 for the invariant covariance.
/// Throws ErgodicityError when the drift is not Hurwitz.
GaussianMeasure stationary_covariance(const LinearGaussianModel& model);

/// True when every eigenvalue of `drift` has strictly negative real part.
bool is_hurwitz(const Matrix& drift);

/// Strength of the dissipative part used by gamma sweeps: gamma for ou and
/// genou, nu for magnetic, and the integrated memory kernel
/// sum_j lambda_j^2 / alpha_j for gle.
double friction(const LinearGaussianModel& model);

/// Rebuilds the model with its friction set to `value`. For gle the kernel
/// shape is kept and every lambda_j is scaled by a common factor.
LinearGaussianModel with_friction(const LinearGaussianModel& model, double value);

/// Scale factored out of the symmetric part of the generator, so that
/// S = scale * S_unit: gamma for ou/genou, nu for magnetic, 1 for gle.
double dissipation_scale(const LinearGaussianModel& model);

/// Catalog labels accepted by the CLI.
const std::vector<std::string>& catalog_labels();

}  // namespace gkdiff
