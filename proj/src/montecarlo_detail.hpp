#pragma once

// Per-path building blocks shared by the store-based and fused estimators.
// Both paths must go through these functions so their results agree bit for bit.

#include "gkdiff/montecarlo.hpp"

#include <cstdint>
#include <vector>

namespace gkdiff::detail {

class PathSampler {
 public:
  PathSampler(const LinearGaussianModel& model, double dt);

  Eigen::Index state_dim() const noexcept { return n_; }

  /// Writes z_0..z_{n_steps} (row-major, state_dim per step) for path `path`.
  void run(std::uint64_t seed, std::size_t path, std::size_t n_steps, double* out) const;

 private:
  Eigen::Index n_;
  Matrix step_matrix_;
  Matrix step_factor_;
  Matrix stationary_factor_;
};

/// obs[n*m + i] = sum_s M(i,s) z_n[s]
void project(const double* states, std::size_t n_states, const Matrix& observable, double* obs);

/// Layout of one path's contribution: (max_lag+1) lag blocks of m*m
/// correlations, then the m*m trapezoid integral.
std::size_t path_record_size(std::size_t max_lag, Eigen::Index m);

/// Fills `record` with this path's origin-averaged correlations.
void correlate_path(const double* obs, std::size_t n_steps, Eigen::Index m, std::size_t max_lag,
                    double dt, double* record);

/// Running reduction over path records, applied strictly in path order.
class VacfAccumulator {
 public:
  VacfAccumulator(std::size_t max_lag, Eigen::Index m, std::size_t n_paths);
  void add(const double* record);
  VacfEstimate finish(double dt, std::size_t n_steps, std::uint64_t seed) const;

 private:
  std::size_t max_lag_;
  Eigen::Index m_;
  std::size_t count_ = 0;
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
  std::vector<Matrix> trapezoid_;
  std::vector<Matrix> final_lag_;
};

}  // namespace gkdiff::detail
