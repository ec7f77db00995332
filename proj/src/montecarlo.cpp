#include "gkdiff/montecarlo.hpp"

#include "gkdiff/errors.hpp"
#include "gkdiff/format.hpp"
#include "gkdiff/linalg.hpp"
#include "montecarlo_detail.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace gkdiff {

namespace detail {

PathSampler::PathSampler(const LinearGaussianModel& model, double dt) : n_(model.state_dim()) {
  const PropagatorPair prop = propagator(model, dt);
  step_matrix_ = prop.step_matrix;
  step_factor_ = linalg::psd_factor(prop.step_covariance);
  stationary_factor_ = linalg::psd_factor(stationary_covariance(model).covariance());
}

void PathSampler::run(std::uint64_t seed, std::size_t path, std::size_t n_steps,
                      double* out) const {
  const auto p = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto n = static_cast<std::size_t>(n_);
  std::vector<double> xi(n);
  auto draw = [&] {
    for (auto& x : xi) x = normal(rng);
  };
  auto apply = [&](const Matrix& A, const double* v, double* dst, bool accumulate) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = accumulate ? dst[i] : 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * v[k];
      dst[i] = acc;
    }
  };
  draw();
  apply(stationary_factor_, xi.data(), out, false);
  for (std::size_t s = 1; s <= n_steps; ++s) {
    draw();
    double* cur = out + s * n;
    apply(step_matrix_, cur - n, cur, false);
    apply(step_factor_, xi.data(), cur, true);
  }
}

void project(const double* states, std::size_t n_states, const Matrix& observable, double* obs) {
  const Eigen::Index n = observable.cols();
  const Eigen::Index m = observable.rows();
  Eigen::Map<const Matrix> Z(states, n, static_cast<Eigen::Index>(n_states));
  Eigen::Map<Matrix> Y(obs, m, static_cast<Eigen::Index>(n_states));
  Y.noalias() = observable * Z;
}

std::size_t path_record_size(std::size_t max_lag, Eigen::Index m) {
  const auto mm = static_cast<std::size_t>(m * m);
  return (max_lag + 2) * mm;
}

void correlate_path(const double* obs, std::size_t n_steps, Eigen::Index m, std::size_t max_lag,
                    double dt, double* record) {
  const auto mu = static_cast<std::size_t>(m);
  const std::size_t mm = mu * mu;
  const std::size_t n_origins = n_steps - max_lag + 1;
  const double inv = 1.0 / static_cast<double>(n_origins);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double* block = record + lag * mm;
    for (std::size_t i = 0; i < mu; ++i) {
      for (std::size_t j = 0; j < mu; ++j) {
        const double* later = obs + lag * mu + i;
        const double* origin = obs + j;
        double acc = 0.0;
        for (std::size_t n = 0; n < n_origins; ++n) acc += later[n * mu] * origin[n * mu];
        block[i * mu + j] = acc * inv;
      }
    }
  }
  double* trap = record + (max_lag + 1) * mm;
  for (std::size_t k = 0; k < mm; ++k) {
    if (max_lag == 0) {
      trap[k] = 0.0;
      continue;
    }
    double acc = 0.5 * (record[k] + record[max_lag * mm + k]);
    for (std::size_t lag = 1; lag < max_lag; ++lag) acc += record[lag * mm + k];
    trap[k] = dt * acc;
  }
}

VacfAccumulator::VacfAccumulator(std::size_t max_lag, Eigen::Index m, std::size_t n_paths)
    : max_lag_(max_lag),
      m_(m),
      sum_((max_lag + 1) * static_cast<std::size_t>(m * m), 0.0),
      sum_sq_(sum_.size(), 0.0) {
  trapezoid_.reserve(n_paths);
  final_lag_.reserve(n_paths);
}

// Welford update, so long runs do not lose the variance to cancellation.
void VacfAccumulator::add(const double* record) {
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t k = 0; k < sum_.size(); ++k) {
    const double delta = record[k] - sum_[k];
    sum_[k] += delta * inv;
    sum_sq_[k] += delta * (record[k] - sum_[k]);
  }
  const auto mm = static_cast<std::size_t>(m_ * m_);
  Matrix trap(m_, m_);
  Matrix last(m_, m_);
  for (Eigen::Index i = 0; i < m_; ++i) {
    for (Eigen::Index j = 0; j < m_; ++j) {
      const auto k = static_cast<std::size_t>(i * m_ + j);
      trap(i, j) = record[(max_lag_ + 1) * mm + k];
      last(i, j) = record[max_lag_ * mm + k];
    }
  }
  trapezoid_.push_back(std::move(trap));
  final_lag_.push_back(std::move(last));
}

VacfEstimate VacfAccumulator::finish(double dt, std::size_t n_steps, std::uint64_t seed) const {
  VacfEstimate out;
  out.dt = dt;
  out.max_lag = max_lag_;
  out.n_paths = count_;
  out.n_steps = n_steps;
  out.seed = seed;
  out.path_trapezoid = trapezoid_;
  out.path_final_lag = final_lag_;
  const auto mm = static_cast<std::size_t>(m_ * m_);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t lag = 0; lag <= max_lag_; ++lag) {
    Matrix mean(m_, m_);
    Matrix err(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (Eigen::Index j = 0; j < m_; ++j) {
        const std::size_t k = lag * mm + static_cast<std::size_t>(i * m_ + j);
        mean(i, j) = sum_[k];
        err(i, j) = count_ < 2 ? nan
                               : std::sqrt(sum_sq_[k] / static_cast<double>(count_ - 1) /
                                           static_cast<double>(count_));
      }
    }
    out.mean.push_back(std::move(mean));
    out.std_error.push_back(std::move(err));
  }

  if (count_ < 2) out.warnings.emplace_back("fewer than 2 paths: standard errors are undefined");
  const std::size_t n_origins = n_steps - max_lag_ + 1;
  if (n_origins < max_lag_ / 2) {
    out.warnings.emplace_back("only " + std::to_string(n_origins) +
                              " time origins per lag; increase n_steps");
  }
  if (count_ >= 2) {
    const Matrix& last = out.mean.back();
    const Matrix& last_err = out.std_error.back();
    if (((last.array().abs() - 5.0 * last_err.array()) > 0.0).any()) {
      out.warnings.emplace_back("VACF has not decayed at the final lag; increase max_lag");
    }
  }
  return out;
}

}  // namespace detail

PropagatorPair propagator(const LinearGaussianModel& model, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt", "must be positive and finite");
  const Matrix& B = model.drift();
  const Eigen::Index n = B.rows();
  const Matrix Q = model.diffusion();

  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = B;
  block.topRightCorner(n, n) = Q;
  block.bottomRightCorner(n, n) = -B.transpose();
  const Matrix E = (block * dt).exp();

  PropagatorPair out;
  out.dt = dt;
  out.step_matrix = E.topLeftCorner(n, n);
  const Matrix cov = E.topRightCorner(n, n) * out.step_matrix.transpose();
  out.step_covariance = 0.5 * (cov + cov.transpose());
  return out;
}

TrajectoryStore::TrajectoryStore(std::size_t n_paths, std::size_t n_steps, Eigen::Index state_dim,
                                 Matrix observable, double dt, std::uint64_t seed)
    : n_paths_(n_paths),
      n_steps_(n_steps),
      state_dim_(state_dim),
      observable_(std::move(observable)),
      dt_(dt),
      seed_(seed),
      data_(n_paths * (n_steps + 1) * static_cast<std::size_t>(state_dim), 0.0) {
  if (observable_.cols() != state_dim) {
    throw DimensionError("observable columns must equal state_dim");
  }
}

Eigen::Map<const Vector> TrajectoryStore::state(std::size_t path, std::size_t step) const {
  if (path >= n_paths_ || step > n_steps_) throw DimensionError("trajectory index out of range");
  return {path_data(path) + step * static_cast<std::size_t>(state_dim_), state_dim_};
}

double* TrajectoryStore::path_data(std::size_t path) {
  return data_.data() + path * (n_steps_ + 1) * static_cast<std::size_t>(state_dim_);
}

const double* TrajectoryStore::path_data(std::size_t path) const {
  return data_.data() + path * (n_steps_ + 1) * static_cast<std::size_t>(state_dim_);
}

namespace {

void validate_config(const SimulationConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    throw ParameterError("dt", "must be positive and finite");
  }
  if (config.n_steps < 1) throw ParameterError("n_steps", "must be >= 1");
  if (config.n_paths < 1) throw ParameterError("n_paths", "must be >= 1");
}

void validate_lag(std::size_t max_lag, std::size_t n_steps) {
  if (max_lag >= n_steps) {
    throw ParameterError("max_lag", "must be smaller than n_steps");
  }
}

constexpr std::size_t kChunkPaths = 256;

}  // namespace

TrajectoryStore simulate(const LinearGaussianModel& model, const SimulationConfig& config) {
  validate_config(config);
  const auto n = static_cast<std::size_t>(model.state_dim());
  const double total = static_cast<double>(config.n_paths) *
                       static_cast<double>(config.n_steps + 1) * static_cast<double>(n);
  if (total > static_cast<double>(config.max_doubles)) {
    throw ResourceError("trajectory store would hold " + format_double(total) +
                        " doubles (limit " + std::to_string(config.max_doubles) +
                        "); use simulate_vacf instead");
  }
  const detail::PathSampler sampler(model, config.dt);
  TrajectoryStore store(config.n_paths, config.n_steps, model.state_dim(), model.observable(),
                        config.dt, config.seed);
  const auto n_paths = static_cast<std::ptrdiff_t>(config.n_paths);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n_paths; ++p) {
    sampler.run(config.seed, static_cast<std::size_t>(p), config.n_steps,
                store.path_data(static_cast<std::size_t>(p)));
  }
  return store;
}

VacfEstimate estimate_vacf(const TrajectoryStore& store, std::size_t max_lag) {
  validate_lag(max_lag, store.n_steps());
  const Eigen::Index m = store.observable().rows();
  const std::size_t n_states = store.n_steps() + 1;
  std::vector<double> obs(n_states * static_cast<std::size_t>(m));
  std::vector<double> record(detail::path_record_size(max_lag, m));
  detail::VacfAccumulator acc(max_lag, m, store.n_paths());
  for (std::size_t p = 0; p < store.n_paths(); ++p) {
    detail::project(store.path_data(p), n_states, store.observable(), obs.data());
    detail::correlate_path(obs.data(), store.n_steps(), m, max_lag, store.dt(), record.data());
    acc.add(record.data());
  }
  return acc.finish(store.dt(), store.n_steps(), store.seed());
}

VacfEstimate simulate_vacf(const LinearGaussianModel& model, const SimulationConfig& config,
                           std::size_t max_lag, Execution execution) {
  validate_config(config);
  validate_lag(max_lag, config.n_steps);
  const detail::PathSampler sampler(model, config.dt);
  const Matrix& M = model.observable();
  const Eigen::Index m = M.rows();
  const std::size_t n_states = config.n_steps + 1;
  const std::size_t state_len = n_states * static_cast<std::size_t>(model.state_dim());
  const std::size_t obs_len = n_states * static_cast<std::size_t>(m);
  const std::size_t rec_len = detail::path_record_size(max_lag, m);
  detail::VacfAccumulator acc(max_lag, m, config.n_paths);

  if (execution == Execution::serial) {
    std::vector<double> states(state_len);
    std::vector<double> obs(obs_len);
    std::vector<double> record(rec_len);
    for (std::size_t p = 0; p < config.n_paths; ++p) {
      sampler.run(config.seed, p, config.n_steps, states.data());
      detail::project(states.data(), n_states, M, obs.data());
      detail::correlate_path(obs.data(), config.n_steps, m, max_lag, config.dt, record.data());
      acc.add(record.data());
    }
    return acc.finish(config.dt, config.n_steps, config.seed);
  }

  std::vector<double> records(kChunkPaths * rec_len);
  for (std::size_t start = 0; start < config.n_paths; start += kChunkPaths) {
    const std::size_t count = std::min(kChunkPaths, config.n_paths - start);
#pragma omp parallel
    {
      std::vector<double> states(state_len);
      std::vector<double> obs(obs_len);
#pragma omp for schedule(static)
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(count); ++k) {
        const auto slot = static_cast<std::size_t>(k);
        sampler.run(config.seed, start + slot, config.n_steps, states.data());
        detail::project(states.data(), n_states, M, obs.data());
        detail::correlate_path(obs.data(), config.n_steps, m, max_lag, config.dt,
                               records.data() + slot * rec_len);
      }
    }
    for (std::size_t slot = 0; slot < count; ++slot) acc.add(records.data() + slot * rec_len);
  }
  return acc.finish(config.dt, config.n_steps, config.seed);
}

Matrix analytic_vacf(const LinearGaussianModel& model, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("t", "must be non-negative");
  const Matrix sigma = stationary_covariance(model).covariance();
  const Matrix F = (model.drift() * t).exp();
  return model.observable() * F * sigma * model.observable().transpose();
}

DiffusionTensor green_kubo_analytic(const LinearGaussianModel& model) {
  const Matrix sigma = stationary_covariance(model).covariance();
  const Matrix X = (-model.drift()).partialPivLu().solve(sigma);
  return {model.observable() * X * model.observable().transpose(), Route::green_kubo_analytic};
}

namespace {

// Least-squares slope of log ||C(l)||_F over the last half of the lags.
double fit_decay_rate(const VacfEstimate& vacf) {
  const std::size_t first = vacf.max_lag / 2;
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  double count = 0.0;
  for (std::size_t lag = first; lag <= vacf.max_lag; ++lag) {
    const double norm = vacf.mean[lag].norm();
    if (!(norm > 0.0)) continue;
    const double x = static_cast<double>(lag) * vacf.dt;
    const double y = std::log(norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    count += 1.0;
  }
  const double denom = count * sxx - sx * sx;
  if (count < 2.0 || !(denom > 0.0)) {
    throw FitError("too few nonzero lags to fit an exponential tail");
  }
  return -(count * sxy - sx * sy) / denom;
}

}  // namespace

IntegratedVacf integrate_vacf(const VacfEstimate& vacf, TailMode tail) {
  if (vacf.mean.size() != vacf.max_lag + 1 || vacf.path_trapezoid.empty()) {
    throw DimensionError("VACF estimate is incomplete");
  }
  const Eigen::Index m = vacf.obs_dim();
  IntegratedVacf out{DiffusionTensor(Matrix::Zero(m, m), Route::green_kubo_mc), tail, 0.0,
                     vacf.warnings};

  if (tail == TailMode::truncate && vacf.n_paths >= 2) {
    const Matrix& last = vacf.mean.back();
    const Matrix& err = vacf.std_error.back();
    if (((last.array().abs() - 5.0 * err.array()) > 0.0).any()) {
      out.tail_used = TailMode::exp_fit;
      out.warnings.emplace_back("truncation promoted to exp_fit: VACF not decayed at final lag");
    }
  }

  double inv_rate = 0.0;
  if (out.tail_used == TailMode::exp_fit) {
    const double rate = fit_decay_rate(vacf);
    if (!(rate > 0.0)) {
      throw FitError("fitted VACF envelope does not decay (rate " + format_double(rate) + ")");
    }
    out.fitted_rate = rate;
    inv_rate = 1.0 / rate;
  }

  const std::size_t P = vacf.path_trapezoid.size();
  Matrix mean = Matrix::Zero(m, m);
  Matrix m2 = Matrix::Zero(m, m);
  for (std::size_t p = 0; p < P; ++p) {
    const Matrix d = vacf.path_trapezoid[p] + inv_rate * vacf.path_final_lag[p];
    const Matrix delta = d - mean;
    mean += delta / static_cast<double>(p + 1);
    m2.array() += delta.array() * (d - mean).array();
  }
  Matrix err = P < 2 ? Matrix::Constant(m, m, std::numeric_limits<double>::quiet_NaN())
                     : Matrix((m2 / static_cast<double>((P - 1) * P)).array().sqrt());
  out.tensor = DiffusionTensor(std::move(mean), Route::green_kubo_mc, std::move(err));
  return out;
}

McControls default_mc_controls(const LinearGaussianModel& model, std::size_t n_paths,
                               std::uint64_t seed) {
  if (n_paths < 1) throw ParameterError("n_paths", "must be >= 1");
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Matrix>(model.drift(), false).eigenvalues();
  double fastest = 0.0;
  double slowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    fastest = std::max(fastest, std::abs(eig(k)));
    slowest = std::min(slowest, std::abs(eig(k).real()));
  }
  McControls out;
  out.sim.dt = 0.1 / fastest;
  out.sim.n_paths = n_paths;
  out.sim.seed = seed;
  out.max_lag = static_cast<std::size_t>(std::ceil(10.0 / (slowest * out.sim.dt)));
  out.sim.n_steps = 2 * out.max_lag;
  return out;
}

std::string vacf_to_csv(const VacfEstimate& vacf) {
  const Eigen::Index m = vacf.obs_dim();
  std::ostringstream os;
  os << "# gkdiff vacf v1 dt=" << format_double(vacf.dt) << " n_paths=" << vacf.n_paths
     << " n_steps=" << vacf.n_steps << " seed=" << vacf.seed << "\n";
  os << "lag_time";
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) os << ",C_" << i + 1 << j + 1;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) os << ",stderr_" << i + 1 << j + 1;
  }
  os << "\n";
  for (std::size_t lag = 0; lag <= vacf.max_lag; ++lag) {
    os << format_double(static_cast<double>(lag) * vacf.dt);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) os << "," << format_double(vacf.mean[lag](i, j));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) os << "," << format_double(vacf.std_error[lag](i, j));
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace gkdiff
