#pragma once

#include "gkdiff/models.hpp"
#include "gkdiff/poisson.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace gkdiff {

/// Exact one-step transition of the linear SDE over dt:
/// z(t+dt) = step_matrix z(t) + xi, xi ~ N(0, step_covariance).
struct PropagatorPair {
  Matrix step_matrix;
  Matrix step_covariance;
  double dt = 0.0;
};

/// step_matrix = e^{B dt} (scaling and squaring); step_covariance from the
/// Van Loan block exponential of [[B, Q], [0, -B^T]] dt.
PropagatorPair propagator(const LinearGaussianModel& model, double dt);

struct SimulationConfig {
  double dt = 0.1;
  std::size_t n_steps = 1000;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  /// Refuse stores larger than this many doubles.
  std::size_t max_doubles = std::size_t{1} << 25;
};

/// In-memory trajectories, path-major: state(p, n) is z_n on path p for
/// n = 0..n_steps. The observable matrix is recorded so VACF estimation needs
/// nothing else.
class TrajectoryStore {
 public:
  TrajectoryStore(std::size_t n_paths, std::size_t n_steps, Eigen::Index state_dim,
                  Matrix observable, double dt, std::uint64_t seed);

  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  Eigen::Index state_dim() const noexcept { return state_dim_; }
  const Matrix& observable() const noexcept { return observable_; }
  double dt() const noexcept { return dt_; }
  std::uint64_t seed() const noexcept { return seed_; }

  Eigen::Map<const Vector> state(std::size_t path, std::size_t step) const;
  double* path_data(std::size_t path);
  const double* path_data(std::size_t path) const;

 private:
  std::size_t n_paths_;
  std::size_t n_steps_;
  Eigen::Index state_dim_;
  Matrix observable_;
  double dt_;
  std::uint64_t seed_;
  std::vector<double> data_;
};

/// Initial states are drawn from the stationary Gaussian. Path p uses its own
/// generator seeded from (seed, p), so output does not depend on scheduling.
TrajectoryStore simulate(const LinearGaussianModel& model, const SimulationConfig& config);

/// Velocity autocorrelation estimate at lags 0..max_lag.
///
/// mean[l](i,j) averages V_i(z_{n+l}) V_j(z_n) over time origins
/// n = 0..n_steps-max_lag and over paths; standard errors come from the
/// spread of per-path means. Per-path trapezoid integrals and final-lag
/// values are kept so integrated tensors get honest error bars.
struct VacfEstimate {
  double dt = 0.0;
  std::size_t max_lag = 0;
  std::vector<Matrix> mean;
  std::vector<Matrix> std_error;
  std::vector<Matrix> path_trapezoid;
  std::vector<Matrix> path_final_lag;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  Eigen::Index obs_dim() const noexcept { return mean.empty() ? 0 : mean.front().rows(); }
};

VacfEstimate estimate_vacf(const TrajectoryStore& store, std::size_t max_lag);

enum class Execution { serial, parallel };

/// Fused simulate + estimate_vacf that never materializes the trajectory
/// store. Both execution modes produce bit-identical results, and match
/// estimate_vacf(simulate(...)) exactly.
VacfEstimate simulate_vacf(const LinearGaussianModel& model, const SimulationConfig& config,
                           std::size_t max_lag, Execution execution = Execution::parallel);

/// C(t) = M e^{B t} Sigma M^T.
Matrix analytic_vacf(const LinearGaussianModel& model, double t);

/// int_0^inf C(t) dt = M (-B)^{-1} Sigma M^T.
DiffusionTensor green_kubo_analytic(const LinearGaussianModel& model);

enum class TailMode { truncate, exp_fit };

struct IntegratedVacf {
  DiffusionTensor tensor;
  TailMode tail_used;
  double fitted_rate = 0.0;  ///< exp_fit only
  std::vector<std::string> warnings;
};

/// Trapezoid rule over the recorded lags plus tail completion. A truncate
/// request is promoted to exp_fit when the VACF has not decayed to within
/// 5 standard errors at the final lag. Throws FitError when the envelope does
/// not decay.
IntegratedVacf integrate_vacf(const VacfEstimate& vacf, TailMode tail = TailMode::truncate);

/// Defaults for the Green-Kubo route: dt resolves the fastest mode
/// (0.1 / max|eig B|), lags cover 10 slowest decay times, n_steps = 2 max_lag.
struct McControls {
  SimulationConfig sim;
  std::size_t max_lag = 0;
};

McControls default_mc_controls(const LinearGaussianModel& model, std::size_t n_paths = 10000,
                               std::uint64_t seed = 1);

std::string vacf_to_csv(const VacfEstimate& vacf);

}  // namespace gkdiff
