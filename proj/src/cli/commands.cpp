#include "gkdiff/cli.hpp"

#include "gkdiff/errors.hpp"
#include "gkdiff/format.hpp"
#include "gkdiff/io.hpp"
#include "gkdiff/montecarlo.hpp"
#include "gkdiff/operator_analysis.hpp"
#include "gkdiff/poisson.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace gkdiff::cli {

using io::json;

std::vector<double> GammaGrid::values() const {
  if (!(min > 0.0) || !(max >= min) || count < 1) {
    throw ParameterError("gamma-grid", "needs 0 < min <= max and count >= 1");
  }
  if (count == 1) return {min};
  std::vector<double> out;
  const double lo = std::log(min);
  const double step = (std::log(max) - lo) / (count - 1);
  for (int k = 0; k < count; ++k) out.push_back(std::exp(lo + step * k));
  out.front() = min;
  out.back() = max;
  return out;
}

GammaGrid parse_gamma_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3) throw ParameterError("gamma-grid", "expected min:max:count");
  GammaGrid grid;
  try {
    grid.min = std::stod(parts[0]);
    grid.max = std::stod(parts[1]);
    grid.count = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw ParameterError("gamma-grid", "could not parse '" + text + "'");
  }
  grid.values();
  return grid;
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ParameterError(field, "could not parse '" + part + "' as a number");
    }
  }
  if (out.empty()) throw ParameterError(field, "list is empty");
  return out;
}

ModelParams RunConfig::params() const {
  const double b = beta.value_or(1.0);
  if (model == "ou") return OuParams{gamma.value_or(1.0), b};
  if (model == "magnetic") return MagneticParams{omega.value_or(1.0), nu.value_or(1.0), b};
  if (model == "gle") {
    return GleParams{lambdas.value_or(std::vector<double>{1.0}),
                     alphas.value_or(std::vector<double>{1.0}), b};
  }
  if (model == "genou") {
    return GenouParams{J.value_or(reference_skew_matrix()), alpha.value_or(1.0),
                       gamma.value_or(1.0), b};
  }
  throw ParameterError("model", "unknown model '" + model + "'");
}

LinearGaussianModel RunConfig::build() const { return build_model(params()); }

Vector RunConfig::direction(Eigen::Index dim) const {
  if (!e) return Vector::Unit(dim, 0);
  if (e->size() != dim) {
    throw ParameterError("e", "expected " + std::to_string(dim) + " components, got " +
                                  std::to_string(e->size()));
  }
  const double norm = e->norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ParameterError("e", "must be a nonzero vector");
  return *e / norm;
}

void apply_json(RunConfig& config, const json& j) {
  if (!j.is_object()) throw ParameterError("config", "must be a JSON object");
  auto num = [&](const char* key, std::optional<double>& slot) {
    if (j.contains(key)) slot = j.at(key).get<double>();
  };
  auto list = [&](const char* key, std::optional<std::vector<double>>& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::vector<double>>();
  };
  try {
    if (j.contains("model")) config.model = j.at("model").get<std::string>();
    num("beta", config.beta);
    num("gamma", config.gamma);
    num("omega", config.omega);
    num("nu", config.nu);
    num("alpha", config.alpha);
    list("lambdas", config.lambdas);
    list("alphas", config.alphas);
    if (j.contains("J")) config.J = io::matrix_from_json(j.at("J"));
    if (j.contains("e")) {
      const auto v = j.at("e").get<std::vector<double>>();
      config.e = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (j.contains("gamma_grid")) {
      const json& g = j.at("gamma_grid");
      config.gamma_grid = {g.at("min").get<double>(), g.at("max").get<double>(),
                           g.at("count").get<int>()};
    }
    if (j.contains("degree")) config.degree = j.at("degree").get<int>();
    if (j.contains("K")) config.K = j.at("K").get<int>();
    num("dt", config.dt);
    if (j.contains("steps")) config.steps = j.at("steps").get<std::size_t>();
    if (j.contains("paths")) config.paths = j.at("paths").get<std::size_t>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) config.out = j.at("out").get<std::string>();
    if (j.contains("format")) {
      const auto f = j.at("format").get<std::string>();
      if (f == "csv") {
        config.format = Format::csv;
      } else if (f == "json") {
        config.format = Format::json;
      } else {
        throw ParameterError("format", "must be csv or json");
      }
    }
  } catch (const json::exception& ex) {
    throw ParameterError("config", ex.what());
  }
}

namespace {

Format resolve(Format requested, Format fallback) {
  return requested == Format::automatic ? fallback : requested;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string vector_text(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ";";
    out += format_double(v(i));
  }
  return out;
}

void matrix_rows(std::ostringstream& os, const std::string& quantity, const Matrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      os << quantity << "," << i + 1 << "," << j + 1 << "," << format_double(A(i, j)) << "\n";
    }
  }
}

/// MC controls: defaults from the model, then --dt / --steps / --paths / --seed.
McControls mc_controls(const LinearGaussianModel& model, const RunConfig& config) {
  if (config.paths < 1) throw ParameterError("paths", "must be >= 1");
  McControls c = default_mc_controls(model, config.paths, config.seed);
  const double horizon = static_cast<double>(c.max_lag) * c.sim.dt;
  if (config.dt) {
    if (!(*config.dt > 0.0)) throw ParameterError("dt", "must be positive");
    c.sim.dt = *config.dt;
    c.max_lag = static_cast<std::size_t>(std::ceil(horizon / c.sim.dt));
    c.sim.n_steps = 2 * c.max_lag;
  }
  if (config.steps) {
    if (*config.steps < 2) throw ParameterError("steps", "must be >= 2");
    c.sim.n_steps = *config.steps;
    c.max_lag = std::min(c.max_lag, c.sim.n_steps / 2);
  }
  c.sim.max_doubles = std::numeric_limits<std::size_t>::max();
  return c;
}

}  // namespace

CommandResult cmd_solve(const RunConfig& config) {
  const LinearGaussianModel model = config.build();
  const PoissonSolution phi = solve_linear_ansatz(model);
  const DiffusionTensor D = diffusion_tensor(model, phi);
  if (resolve(config.format, Format::csv) == Format::json) {
    json out{{"schema", "gkdiff.solve.v1"},
             {"model", io::model_to_json(model)},
             {"tensor", io::tensor_to_json(D)},
             {"symmetric", io::matrix_to_json(D.symmetric_part())},
             {"antisymmetric", io::matrix_to_json(D.antisymmetric_part())},
             {"phi", {{"kind", "linear"}, {"C", io::matrix_to_json(phi.C)},
                      {"residual", phi.residual}}}};
    return {0, dump(out)};
  }
  std::ostringstream os;
  os << "# gkdiff solve v1 model=" << model.label() << " route=poisson\n";
  os << "# " << kDiffusionConvention << "; phi_i(z) = sum_k C_ik z_k\n";
  os << "quantity,i,j,value\n";
  matrix_rows(os, "D", D.matrix());
  matrix_rows(os, "D_sym", D.symmetric_part());
  matrix_rows(os, "D_antisym", D.antisymmetric_part());
  matrix_rows(os, "phi_C", phi.C);
  return {0, os.str()};
}

CommandResult cmd_compare(const RunConfig& config) {
  const LinearGaussianModel model = config.build();
  const Matrix Dp = poisson_diffusion(model).matrix();
  const Matrix Da = green_kubo_analytic(model).matrix();
  const McControls c = mc_controls(model, config);
  const IntegratedVacf mc = integrate_vacf(simulate_vacf(model, c.sim, c.max_lag));
  const Matrix& Dm = mc.tensor.matrix();
  const Matrix& err = *mc.tensor.standard_error();

  const Eigen::Index m = Dp.rows();
  double max_z = 0.0;
  bool analytic_ok = true;
  json entries = json::array();
  std::ostringstream rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double diff = std::abs(Dm(i, j) - Dp(i, j));
      const double analytic_diff = std::abs(Da(i, j) - Dp(i, j));
      double z = 0.0;
      if (err(i, j) > 0.0) {
        z = diff / err(i, j);
      } else if (diff > 0.0 || std::isnan(err(i, j))) {
        z = std::numeric_limits<double>::infinity();
      }
      max_z = std::max(max_z, z);
      if (analytic_diff > 1e-8 * std::max(1.0, std::abs(Dp(i, j)))) analytic_ok = false;
      rows << i + 1 << "," << j + 1 << "," << format_double(Dp(i, j)) << ","
           << format_double(Da(i, j)) << "," << format_double(Dm(i, j)) << ","
           << format_double(err(i, j)) << "," << format_double(diff) << ","
           << format_double(z) << "," << format_double(analytic_diff) << "\n";
      entries.push_back(json{{"i", i + 1},
                             {"j", j + 1},
                             {"poisson", Dp(i, j)},
                             {"green_kubo_analytic", Da(i, j)},
                             {"green_kubo_mc", Dm(i, j)},
                             {"stderr", err(i, j)},
                             {"abs_diff_mc", diff},
                             {"z", std::isfinite(z) ? json(z) : json(nullptr)},
                             {"abs_diff_analytic", analytic_diff}});
    }
  }
  const bool pass = analytic_ok && max_z <= 4.0;
  const std::string tail = mc.tail_used == TailMode::exp_fit ? "exp_fit" : "truncate";

  if (resolve(config.format, Format::csv) == Format::json) {
    json warnings = mc.warnings;
    json out{{"schema", "gkdiff.compare.v1"},
             {"model", io::model_to_json(model)},
             {"controls",
              {{"dt", c.sim.dt},
               {"n_steps", c.sim.n_steps},
               {"n_paths", c.sim.n_paths},
               {"max_lag", c.max_lag},
               {"seed", c.sim.seed},
               {"tail", tail}}},
             {"entries", std::move(entries)},
             {"max_z", std::isfinite(max_z) ? json(max_z) : json(nullptr)},
             {"pass", pass},
             {"warnings", std::move(warnings)}};
    return {pass ? 0 : 1, dump(out)};
  }
  std::ostringstream os;
  os << "# gkdiff compare v1 model=" << model.label() << " paths=" << c.sim.n_paths
     << " seed=" << c.sim.seed << " dt=" << format_double(c.sim.dt)
     << " n_steps=" << c.sim.n_steps << " max_lag=" << c.max_lag << " tail=" << tail << "\n";
  for (const std::string& w : mc.warnings) os << "# warning: " << w << "\n";
  os << "i,j,poisson,green_kubo_analytic,green_kubo_mc,stderr,abs_diff_mc,z,abs_diff_analytic\n";
  os << rows.str();
  os << "# max_z=" << format_double(max_z) << " status=" << (pass ? "PASS" : "FAIL") << "\n";
  return {pass ? 0 : 1, os.str()};
}

namespace {

struct Limits {
  double small = std::numeric_limits<double>::quiet_NaN();
  double large = std::numeric_limits<double>::quiet_NaN();
};

// Predicted limits of gamma * D^e. gle has no V-hat (its velocity lies in
// ker S), so both stay NaN there.
Limits predicted_limits(const LinearGaussianModel& model, const Vector& e, int degree) {
  Limits out;
  if (model.label() == "gle") return out;
  const ModelAnalysis an = analyze_model(model, degree);
  const VHat vh = directional_vhat(an.op, an.observable, e);
  out.small = small_gamma_limit(an.op, vh).limit_of_gamma_D;
  out.large = an.op.inner(vh.full.front(), vh.full.front());
  return out;
}

}  // namespace

CommandResult cmd_sweep(const RunConfig& config) {
  const LinearGaussianModel model = config.build();
  const Vector e = config.direction(model.obs_dim());
  const std::vector<double> grid = config.gamma_grid.values();
  const Limits limits = predicted_limits(model, e, config.degree);

  std::vector<std::array<double, 5>> rows;
  for (double g : grid) {
    const double De = directional_diffusion(with_friction(model, g), e);
    rows.push_back({g, De, g * De, limits.small, limits.large});
  }

  if (resolve(config.format, Format::csv) == Format::json) {
    json data = json::array();
    for (const auto& r : rows) {
      data.push_back(json{{"gamma", r[0]},
                          {"D_e", r[1]},
                          {"gamma_D_e", r[2]},
                          {"small_gamma_limit", std::isnan(r[3]) ? json(nullptr) : json(r[3])},
                          {"large_gamma_limit", std::isnan(r[4]) ? json(nullptr) : json(r[4])}});
    }
    json out{{"schema", "gkdiff.sweep.v1"},
             {"model", io::model_to_json(model)},
             {"e", std::vector<double>(e.data(), e.data() + e.size())},
             {"rows", std::move(data)}};
    return {0, dump(out)};
  }
  std::ostringstream os;
  os << "# gkdiff sweep v1 model=" << model.label() << " e=" << vector_text(e) << "\n";
  os << "# limits are predictions for gamma*D_e as gamma -> 0 and gamma -> inf\n";
  os << "gamma,D_e,gamma_D_e,small_gamma_limit,large_gamma_limit\n";
  for (const auto& r : rows) {
    os << format_double(r[0]) << "," << format_double(r[1]) << "," << format_double(r[2]) << ","
       << format_double(r[3]) << "," << format_double(r[4]) << "\n";
  }
  return {0, os.str()};
}

CommandResult cmd_spectrum(const RunConfig& config) {
  if (resolve(config.format, Format::json) != Format::json) {
    throw ParameterError("format", "spectrum output is JSON only");
  }
  const LinearGaussianModel model = config.build();
  const ModelAnalysis an = analyze_model(model, config.degree);
  const VHat vh = vhat_and_projections(an.op, an.observable);
  const SpectralMeasure measure = spectral_measure(an.op, vh);

  json recon = json::array();
  double worst = 0.0;
  for (double g : config.gamma_grid.values()) {
    const Matrix D = poisson_diffusion(with_friction(model, g)).matrix();
    const Matrix R = stieltjes_symmetric_tensor(measure, g) + stieltjes_antisymmetric(measure, g);
    const double error = (R - D).cwiseAbs().maxCoeff() / std::max(1.0, D.cwiseAbs().maxCoeff());
    worst = std::max(worst, error);
    recon.push_back(json{{"gamma", g},
                         {"D", io::matrix_to_json(D)},
                         {"D_reconstructed", io::matrix_to_json(R)},
                         {"error", error}});
  }
  json warnings = vh.warnings;
  json out{{"schema", "gkdiff.spectrum.v1"},
           {"model", io::model_to_json(model)},
           {"degree", config.degree},
           {"operator_norm", an.op.norm},
           {"symmetric_factor", kSymmetricFactor},
           {"antisymmetric_factor",
            {{"re", kAntisymmetricFactor.real()}, {"im", kAntisymmetricFactor.imag()}}},
           {"measure", io::spectral_measure_to_json(measure)},
           {"reconstruction", std::move(recon)},
           {"max_reconstruction_error", worst},
           {"warnings", std::move(warnings)}};
  return {0, dump(out)};
}

CommandResult cmd_expand(const RunConfig& config) {
  const LinearGaussianModel model = config.build();
  const Vector e = config.direction(model.obs_dim());
  const ModelAnalysis an = analyze_model(model, config.degree);
  const VHat vh = directional_vhat(an.op, an.observable, e);
  const double gamma = dissipation_scale(model);
  const int K = std::max(1, config.K);
  const LargeGammaSeries series = large_gamma_series(an.op, vh.full.front(), gamma, K);
  const double exact = directional_diffusion(model, e);

  // Rows stop once G^k V-hat vanishes: every later term is exactly zero.
  std::size_t n_rows = series.terms.size();
  for (std::size_t k = 0; k + 1 < series.power_norms.size() && k < series.terms.size(); ++k) {
    if (series.power_norms[k + 1] == 0.0) {
      n_rows = k + 1;
      break;
    }
  }

  if (resolve(config.format, Format::csv) == Format::json) {
    json data = json::array();
    for (std::size_t k = 0; k < n_rows; ++k) {
      data.push_back(json{{"k", k},
                          {"term", series.terms[k]},
                          {"partial_sum", series.partial_sums[k]},
                          {"exact", exact},
                          {"error", std::abs(series.partial_sums[k] - exact)}});
    }
    json out{{"schema", "gkdiff.expand.v1"},
             {"model", io::model_to_json(model)},
             {"e", std::vector<double>(e.data(), e.data() + e.size())},
             {"gamma", gamma},
             {"operator_norm", an.op.norm},
             {"rows", std::move(data)}};
    return {0, dump(out)};
  }
  std::ostringstream os;
  os << "# gkdiff expand v1 model=" << model.label() << " e=" << vector_text(e)
     << " gamma=" << format_double(gamma) << " norm_G=" << format_double(an.op.norm) << "\n";
  os << "k,term,partial_sum,exact,error\n";
  for (std::size_t k = 0; k < n_rows; ++k) {
    os << k << "," << format_double(series.terms[k]) << ","
       << format_double(series.partial_sums[k]) << "," << format_double(exact) << ","
       << format_double(std::abs(series.partial_sums[k] - exact)) << "\n";
  }
  return {0, os.str()};
}

CommandResult cmd_model_list(const RunConfig& config) {
  struct Entry {
    const char* label;
    const char* params;
    const char* observable;
  };
  static const Entry entries[] = {
      {"ou", "gamma beta", "p"},
      {"magnetic", "omega nu beta", "p (3 components)"},
      {"gle", "lambdas alphas beta", "p"},
      {"genou", "J alpha gamma beta", "z (3 components)"},
  };
  if (resolve(config.format, Format::csv) == Format::json) {
    json out = json::array();
    for (const Entry& e : entries) {
      out.push_back(json{{"label", e.label}, {"params", e.params}, {"observable", e.observable}});
    }
    return {0, dump(json{{"schema", "gkdiff.models.v1"}, {"models", std::move(out)}})};
  }
  std::ostringstream os;
  os << "label,params,observable\n";
  for (const Entry& e : entries) os << e.label << "," << e.params << "," << e.observable << "\n";
  return {0, os.str()};
}

}  // namespace gkdiff::cli
