#include "gkdiff/poisson.hpp"

#include "gkdiff/errors.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace gkdiff {

std::string to_string(Route route) {
  switch (route) {
    case Route::poisson:
      return "poisson";
    case Route::green_kubo_mc:
      return "green_kubo_mc";
    case Route::green_kubo_analytic:
      return "green_kubo_analytic";
    case Route::stieltjes:
      return "stieltjes";
  }
  return "unknown";
}

Route route_from_string(const std::string& name) {
  for (Route r : {Route::poisson, Route::green_kubo_mc, Route::green_kubo_analytic,
                  Route::stieltjes}) {
    if (to_string(r) == name) return r;
  }
  throw ParameterError("route", "unknown route '" + name + "'");
}

DiffusionTensor::DiffusionTensor(Matrix D, Route route, std::optional<Matrix> stderr_matrix)
    : D_(std::move(D)), route_(route), stderr_(std::move(stderr_matrix)) {
  if (D_.rows() != D_.cols() || D_.rows() == 0) {
    throw DimensionError("diffusion tensor must be square and non-empty");
  }
  if (stderr_ && (stderr_->rows() != D_.rows() || stderr_->cols() != D_.cols())) {
    throw DimensionError("standard-error matrix must match the tensor shape");
  }
}

double DiffusionTensor::directional(const Vector& e) const {
  if (e.size() != D_.rows()) throw DimensionError("direction length differs from tensor size");
  const double norm = e.norm();
  if (!(norm > 0.0)) throw ParameterError("e", "direction must be nonzero");
  const Vector unit = e / norm;
  return unit.dot(D_ * unit);
}

PoissonSolution solve_linear_ansatz(const LinearGaussianModel& model) {
  const Matrix minus_B = -model.drift();
  Eigen::FullPivLU<Matrix> lu(minus_B.transpose());
  if (!lu.isInvertible()) {
    throw ErgodicityError("-B is singular: the Poisson equation has no mean-zero solution");
  }
  PoissonSolution sol;
  sol.kind = SolutionKind::linear_ansatz;
  // C (-B) = M  <=>  (-B)^T C^T = M^T
  sol.C = lu.solve(model.observable().transpose()).transpose();

  // L(c.z) = (B^T c).z, so the residual of component i is (B^T c_i + m_i).z.
  const Matrix sigma = stationary_covariance(model).covariance();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < sol.C.rows(); ++i) {
    const Vector r = model.drift().transpose() * sol.C.row(i).transpose() +
                     model.observable().row(i).transpose();
    worst = std::max(worst, std::sqrt(std::max(0.0, r.dot(sigma * r))));
  }
  sol.residual = worst;
  return sol;
}

PoissonSolution solve_galerkin(const LinearGaussianModel& model, BasisPtr basis,
                               const std::vector<Vector>& V_coeffs) {
  if (V_coeffs.empty()) throw DimensionError("at least one observable component is required");
  const OperatorMatrix L = assemble_generator(model, basis);
  const Eigen::Index n = basis->size();
  if (n < 2) throw DomainError("basis has no mean-zero functions (max_degree = 0)");
  for (const Vector& v : V_coeffs) {
    if (v.size() != n) throw DimensionError("observable coefficients must match the basis size");
    if (std::abs(v(0)) > 1e-14 * std::max(1.0, v.norm())) {
      throw DomainError("observable is not mean-zero (constant coefficient is nonzero)");
    }
  }

  const Matrix minus_L = -L.entries().bottomRightCorner(n - 1, n - 1);
  Eigen::JacobiSVD<Matrix> svd(minus_L);
  const auto& s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1)
                                            : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) {
    throw IllPosedError("truncated generator has condition number " + std::to_string(cond) +
                        "; increase max_degree or change the parameters");
  }

  Eigen::PartialPivLU<Matrix> lu(minus_L);
  PoissonSolution sol;
  sol.kind = SolutionKind::galerkin;
  sol.basis = basis;
  sol.rhs = V_coeffs;
  for (const Vector& v : V_coeffs) {
    Vector c = Vector::Zero(n);
    c.tail(n - 1) = lu.solve(v.tail(n - 1));
    sol.residual = std::max(sol.residual, (L.entries() * c + v).norm());
    sol.coeffs.push_back(std::move(c));
  }
  return sol;
}

DiffusionTensor diffusion_tensor(const LinearGaussianModel& model, const PoissonSolution& phi) {
  if (phi.kind == SolutionKind::linear_ansatz) {
    if (phi.C.rows() != model.obs_dim() || phi.C.cols() != model.state_dim()) {
      throw DimensionError("linear-ansatz coefficients do not match the model");
    }
    const Matrix sigma = stationary_covariance(model).covariance();
    return {phi.C * sigma * model.observable().transpose(), Route::poisson};
  }
  const auto m = static_cast<Eigen::Index>(phi.coeffs.size());
  Matrix D(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      D(i, j) = phi.coeffs[static_cast<std::size_t>(i)].dot(phi.rhs[static_cast<std::size_t>(j)]);
    }
  }
  return {std::move(D), Route::poisson};
}

DiffusionTensor poisson_diffusion(const LinearGaussianModel& model) {
  return diffusion_tensor(model, solve_linear_ansatz(model));
}

double directional_diffusion(const LinearGaussianModel& model, const Vector& e) {
  if (e.size() != model.obs_dim()) throw DimensionError("direction length differs from obs_dim");
  const double norm = e.norm();
  if (!(norm > 0.0)) throw ParameterError("e", "direction must be nonzero");
  const Vector unit = e / norm;
  // -L (c.z) = (-B^T c).z = (M^T e).z
  const Vector m_e = model.observable().transpose() * unit;
  const Vector c = (-model.drift().transpose()).fullPivLu().solve(m_e);
  const Matrix sigma = stationary_covariance(model).covariance();
  return c.dot(sigma * m_e);
}

std::vector<SubdiffusionPoint> gle_subdiffusion_sweep(const std::function<double(int)>& lambda_rule,
                                                      const std::function<double(int)>& alpha_rule,
                                                      int n_max, double beta) {
  if (n_max < 1) throw ParameterError("n_max", "must be >= 1");
  std::vector<SubdiffusionPoint> out;
  std::vector<double> lambdas;
  std::vector<double> alphas;
  for (int k = 1; k <= n_max; ++k) {
    lambdas.push_back(lambda_rule(k));
    alphas.push_back(alpha_rule(k));
    const LinearGaussianModel model = build_gle(lambdas, alphas, beta);
    out.push_back({k, poisson_diffusion(model).matrix()(0, 0)});
  }
  return out;
}

}  // namespace gkdiff
