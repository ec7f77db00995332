#include "gkdiff/errors.hpp"
#include "gkdiff/montecarlo.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <random>

using namespace gkdiff;

namespace {

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

void expect_identical(const VacfEstimate& a, const VacfEstimate& b) {
  ASSERT_EQ(a.mean.size(), b.mean.size());
  for (std::size_t l = 0; l < a.mean.size(); ++l) {
    EXPECT_TRUE(bit_equal(a.mean[l], b.mean[l])) << "lag " << l;
    EXPECT_TRUE(bit_equal(a.std_error[l], b.std_error[l])) << "lag " << l;
  }
  ASSERT_EQ(a.path_trapezoid.size(), b.path_trapezoid.size());
  for (std::size_t p = 0; p < a.path_trapezoid.size(); ++p) {
    EXPECT_TRUE(bit_equal(a.path_trapezoid[p], b.path_trapezoid[p]));
    EXPECT_TRUE(bit_equal(a.path_final_lag[p], b.path_final_lag[p]));
  }
}

}  // namespace

TEST(Propagator, OrnsteinUhlenbeckClosedForm) {
  const double gamma = 1.3;
  const double beta = 0.8;
  const double dt = 0.37;
  const PropagatorPair p = propagator(build_ou(gamma, beta), dt);
  EXPECT_NEAR(p.step_matrix(0, 0), std::exp(-gamma * dt), 1e-15);
  EXPECT_NEAR(p.step_covariance(0, 0), (1.0 - std::exp(-2.0 * gamma * dt)) / beta, 1e-14);
}

TEST(Propagator, PreservesStationaryCovariance) {
  std::mt19937_64 rng(31);
  const std::vector<LinearGaussianModel> models{
      build_magnetic(2.0, 0.3, 1.4), build_gle({1.0, 0.5}, {0.7, 2.0}, 1.0),
      build_genou(oracle::random_skew(3, rng), 1.0, 0.5, 2.0)};
  for (const auto& m : models) {
    const Matrix sigma = stationary_covariance(m).covariance();
    for (double dt : {0.01, 0.5, 3.0}) {
      const PropagatorPair p = propagator(m, dt);
      const Matrix pushed = p.step_matrix * sigma * p.step_matrix.transpose() + p.step_covariance;
      EXPECT_LT((pushed - sigma).cwiseAbs().maxCoeff(), 1e-12) << m.label();
    }
  }
  EXPECT_THROW(propagator(build_ou(1, 1), 0.0), ParameterError);
}

TEST(AnalyticVacf, OrnsteinUhlenbeckExponential) {
  const LinearGaussianModel m = build_ou(2.0, 0.5);
  for (double t : {0.0, 0.1, 1.0, 4.0}) {
    EXPECT_NEAR(analytic_vacf(m, t)(0, 0), 2.0 * std::exp(-2.0 * t), 1e-14);
  }
  EXPECT_THROW(analytic_vacf(m, -1.0), ParameterError);
}

TEST(AnalyticVacf, QuadratureMatchesClosedFormIntegral) {
  const LinearGaussianModel m = build_magnetic(1.0, 1.0, 1.0);
  // Composite Simpson on [0, 40]; C decays like e^{-t}.
  const int n = 4000;
  const double h = 40.0 / n;
  Matrix integral = analytic_vacf(m, 0.0) + analytic_vacf(m, 40.0);
  for (int k = 1; k < n; ++k) integral += (k % 2 ? 4.0 : 2.0) * analytic_vacf(m, k * h);
  integral *= h / 3.0;
  EXPECT_LT((integral - green_kubo_analytic(m).matrix()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((analytic_vacf(m, 0.0) - Matrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(Simulation, SerialAndParallelAreBitIdentical) {
  const LinearGaussianModel m = build_genou(reference_skew_matrix(), 1.0, 1.0, 1.0);
  SimulationConfig cfg;
  cfg.dt = 0.1;
  cfg.n_steps = 60;
  cfg.n_paths = 700;  // spans several chunks, last one partial
  cfg.seed = 99;
  const VacfEstimate serial = simulate_vacf(m, cfg, 20, Execution::serial);
  const VacfEstimate parallel = simulate_vacf(m, cfg, 20, Execution::parallel);
  expect_identical(serial, parallel);
}

TEST(Simulation, FusedMatchesStoreBasedEstimate) {
  const LinearGaussianModel m = build_magnetic(1.0, 0.5, 1.0);
  SimulationConfig cfg;
  cfg.dt = 0.2;
  cfg.n_steps = 50;
  cfg.n_paths = 300;
  cfg.seed = 5;
  const TrajectoryStore store = simulate(m, cfg);
  EXPECT_EQ(store.n_paths(), 300u);
  EXPECT_EQ(store.state(0, 0).size(), 3);
  expect_identical(estimate_vacf(store, 10), simulate_vacf(m, cfg, 10, Execution::parallel));
}

TEST(Simulation, SeedControlsStreams) {
  const LinearGaussianModel m = build_ou(1.0, 1.0);
  SimulationConfig cfg;
  cfg.n_steps = 10;
  cfg.n_paths = 4;
  const TrajectoryStore a = simulate(m, cfg);
  const TrajectoryStore b = simulate(m, cfg);
  cfg.seed = 2;
  const TrajectoryStore c = simulate(m, cfg);
  EXPECT_EQ(a.state(3, 10)(0), b.state(3, 10)(0));
  EXPECT_NE(a.state(3, 10)(0), c.state(3, 10)(0));
  EXPECT_NE(a.state(0, 5)(0), a.state(1, 5)(0));
}

TEST(Simulation, ExactSamplerIsUnbiasedAtAnyStep) {
  // Single-time second moments match Sigma for coarse and fine dt alike.
  const LinearGaussianModel m = build_magnetic(3.0, 0.5, 2.0);
  for (double dt : {0.01, 2.0}) {
    SimulationConfig cfg;
    cfg.dt = dt;
    cfg.n_steps = 20;
    cfg.n_paths = 20000;
    cfg.seed = 3;
    const TrajectoryStore store = simulate(m, cfg);
    Matrix second = Matrix::Zero(3, 3);
    for (std::size_t p = 0; p < store.n_paths(); ++p) {
      const Vector z = store.state(p, 20);
      second += z * z.transpose();
    }
    second /= static_cast<double>(store.n_paths());
    // Each entry has standard deviation about sqrt(2/n) / beta ~ 0.005.
    EXPECT_LT((second - Matrix::Identity(3, 3) / 2.0).cwiseAbs().maxCoeff(), 0.03) << dt;
  }
}

TEST(Simulation, GuardsAndValidation) {
  const LinearGaussianModel m = build_ou(1.0, 1.0);
  SimulationConfig cfg;
  cfg.n_paths = 1000;
  cfg.n_steps = 1000;
  cfg.max_doubles = 1000;
  EXPECT_THROW(simulate(m, cfg), ResourceError);
  cfg.max_doubles = std::size_t{1} << 30;
  cfg.dt = -1.0;
  EXPECT_THROW(simulate(m, cfg), ParameterError);
  cfg.dt = 0.1;
  EXPECT_THROW(simulate_vacf(m, cfg, 1000), ParameterError);
  cfg.n_paths = 0;
  EXPECT_THROW(simulate_vacf(m, cfg, 10), ParameterError);
}

TEST(Vacf, OrnsteinUhlenbeckWithinErrorBars) {
  const LinearGaussianModel m = build_ou(1.0, 1.0);
  const McControls c = default_mc_controls(m, 4000, 7);
  const VacfEstimate v = simulate_vacf(m, c.sim, c.max_lag);
  int outside = 0;
  for (std::size_t l = 0; l <= v.max_lag; l += 5) {
    const double expected = std::exp(-static_cast<double>(l) * v.dt);
    if (std::abs(v.mean[l](0, 0) - expected) > 3.0 * v.std_error[l](0, 0)) ++outside;
  }
  EXPECT_LE(outside, 2);
  const IntegratedVacf d = integrate_vacf(v);
  EXPECT_EQ(d.tensor.route(), Route::green_kubo_mc);
  EXPECT_NEAR(d.tensor.matrix()(0, 0), 1.0, 3.0 * (*d.tensor.standard_error())(0, 0));
}

TEST(Vacf, MagneticCrossCorrelationChangesSign) {
  const LinearGaussianModel m = build_magnetic(1.0, 1.0, 1.0);
  const McControls c = default_mc_controls(m, 4000, 11);
  const VacfEstimate v = simulate_vacf(m, c.sim, c.max_lag);
  bool positive = false;
  bool negative = false;
  int outside = 0;
  int checked = 0;
  for (std::size_t l = 0; l <= v.max_lag; l += 4) {
    const double exact = analytic_vacf(m, static_cast<double>(l) * v.dt)(0, 1);
    positive |= exact > 0.01;
    negative |= exact < -0.001;
    if (std::abs(v.mean[l](0, 1) - exact) > 3.0 * v.std_error[l](0, 1)) ++outside;
    ++checked;
  }
  EXPECT_TRUE(positive && negative);
  EXPECT_LE(outside, checked / 20 + 1);
}

TEST(Vacf, GenouAntisymmetricPartSurvives) {
  const LinearGaussianModel m = build_genou(reference_skew_matrix(), 1.0, 1.0, 1.0);
  const McControls c = default_mc_controls(m, 4000, 13);
  const IntegratedVacf d = integrate_vacf(simulate_vacf(m, c.sim, c.max_lag));
  const Matrix A = d.tensor.antisymmetric_part();
  const Matrix& err = *d.tensor.standard_error();
  // alpha / (3 alpha^2 + gamma^2) = 1/4; the stderr of A12 is at most the mean of two entries.
  EXPECT_NEAR(std::abs(A(0, 1)), 0.25, 3.0 * 0.5 * (err(0, 1) + err(1, 0)));
  EXPECT_GT(std::abs(A(0, 1)), 0.1);
}

TEST(Vacf, TruncateIsPromotedWhenNotDecayed) {
  const LinearGaussianModel m = build_ou(0.2, 1.0);
  SimulationConfig cfg;
  cfg.dt = 0.1;
  cfg.n_steps = 40;
  cfg.n_paths = 2000;
  const VacfEstimate v = simulate_vacf(m, cfg, 20);
  EXPECT_FALSE(v.warnings.empty());
  const IntegratedVacf d = integrate_vacf(v, TailMode::truncate);
  EXPECT_EQ(d.tail_used, TailMode::exp_fit);
  EXPECT_NEAR(d.fitted_rate, 0.2, 0.1);
}

TEST(Vacf, ExpFitRejectsGrowingEnvelope) {
  VacfEstimate v;
  v.dt = 1.0;
  v.max_lag = 4;
  for (int l = 0; l <= 4; ++l) {
    v.mean.push_back(Matrix::Constant(1, 1, std::exp(0.5 * l)));
    v.std_error.push_back(Matrix::Constant(1, 1, 0.01));
  }
  v.path_trapezoid = {Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  v.path_final_lag = {Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  v.n_paths = 2;
  EXPECT_THROW(integrate_vacf(v, TailMode::exp_fit), FitError);
}

TEST(Vacf, SinglePathHasUndefinedErrors) {
  SimulationConfig cfg;
  cfg.n_paths = 1;
  cfg.n_steps = 30;
  const VacfEstimate v = simulate_vacf(build_ou(1.0, 1.0), cfg, 10);
  EXPECT_TRUE(std::isnan(v.std_error[0](0, 0)));
  EXPECT_FALSE(v.warnings.empty());
}

TEST(Vacf, CsvLayout) {
  SimulationConfig cfg;
  cfg.n_paths = 3;
  cfg.n_steps = 6;
  const std::string csv = vacf_to_csv(simulate_vacf(build_magnetic(1, 1, 1), cfg, 2));
  std::istringstream in(csv);
  std::string first;
  std::string header;
  std::getline(in, first);
  std::getline(in, header);
  EXPECT_EQ(first.rfind("# gkdiff vacf v1", 0), 0u);
  EXPECT_EQ(header.substr(0, 22), "lag_time,C_11,C_12,C_1");
  EXPECT_NE(header.find("stderr_33"), std::string::npos);
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Controls, DefaultsResolveFastAndSlowScales) {
  const McControls c = default_mc_controls(build_magnetic(1.0, 1.0, 1.0));
  EXPECT_NEAR(c.sim.dt, 0.1 / std::sqrt(2.0), 1e-15);
  EXPECT_GE(static_cast<double>(c.max_lag) * c.sim.dt, 10.0);
  EXPECT_EQ(c.sim.n_steps, 2 * c.max_lag);
  EXPECT_EQ(c.sim.n_paths, 10000u);
}
