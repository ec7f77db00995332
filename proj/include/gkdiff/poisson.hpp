#pragma once

#include "gkdiff/hermite.hpp"
#include "gkdiff/models.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gkdiff {

/// Index convention shared by every route: D_ij = int_0^inf E[V_i(z(t)) V_j(z(0))] dt.
inline constexpr const char* kDiffusionConvention = "D_ij = int_0^inf E[V_i(t) V_j(0)] dt";

enum class Route { poisson, green_kubo_mc, green_kubo_analytic, stieltjes };

std::string to_string(Route route);
Route route_from_string(const std::string& name);

/// Diffusion tensor tagged with the route that produced it. Monte Carlo
/// estimates additionally carry entrywise standard errors.
class DiffusionTensor {
 public:
  DiffusionTensor(Matrix D, Route route, std::optional<Matrix> stderr_matrix = std::nullopt);

  const Matrix& matrix() const noexcept { return D_; }
  Route route() const noexcept { return route_; }
  const std::optional<Matrix>& standard_error() const noexcept { return stderr_; }
  Eigen::Index dim() const noexcept { return D_.rows(); }

  Matrix symmetric_part() const { return 0.5 * (D_ + D_.transpose()); }
  Matrix antisymmetric_part() const { return 0.5 * (D_ - D_.transpose()); }
  /// e^T D e for a unit direction (normalized internally).
  double directional(const Vector& e) const;

 private:
  Matrix D_;
  Route route_;
  std::optional<Matrix> stderr_;
};

enum class SolutionKind { linear_ansatz, galerkin };

/// Mean-zero solution of -L phi = V.
///
/// linear_ansatz: phi_i(z) = (C z)_i. galerkin: phi_i has Hermite
/// coefficients coeffs[i] and the right-hand side is rhs[i]; the constant
/// coefficient of every component is zero.
struct PoissonSolution {
  SolutionKind kind = SolutionKind::linear_ansatz;
  Matrix C;
  std::vector<Vector> coeffs;
  std::vector<Vector> rhs;
  BasisPtr basis;
  double residual = 0.0;
};

/// Threshold on the 2-norm condition number of the truncated -L.
inline constexpr double kMaxCondition = 1e12;

/// C = M (-B)^{-1}: for linear V the Poisson solution stays linear.
PoissonSolution solve_linear_ansatz(const LinearGaussianModel& model);

/// Hermite-Galerkin solve on the mean-zero subspace for arbitrary observable
/// coefficient vectors. Throws DomainError when some V has a constant
/// component and IllPosedError when cond(-L) exceeds kMaxCondition.
PoissonSolution solve_galerkin(const LinearGaussianModel& model, BasisPtr basis,
                               const std::vector<Vector>& V_coeffs);

/// D_ij = int phi_i V_j dmu, evaluated by Gaussian moments (linear ansatz,
/// D = C Sigma M^T) or by the orthonormal pairing (Galerkin).
DiffusionTensor diffusion_tensor(const LinearGaussianModel& model, const PoissonSolution& phi);

/// Convenience: Poisson route with the linear ansatz.
DiffusionTensor poisson_diffusion(const LinearGaussianModel& model);

/// D^e from a scalar solve of -L phi^e = e.V, independent of the full tensor.
double directional_diffusion(const LinearGaussianModel& model, const Vector& e);

struct SubdiffusionPoint {
  int n_modes;
  double D;
};

/// D_N for the gle with modes 1..N generated by the rules (k is 1-based).
std::vector<SubdiffusionPoint> gle_subdiffusion_sweep(const std::function<double(int)>& lambda_rule,
                                                      const std::function<double(int)>& alpha_rule,
                                                      int n_max, double beta);

}  // namespace gkdiff
