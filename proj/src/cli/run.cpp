#include "gkdiff/cli.hpp"

#include "gkdiff/errors.hpp"
#include "gkdiff/io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <ostream>

namespace gkdiff::cli {

namespace {

struct RawFlags {
  std::string config_path;
  std::string model;
  double beta = 0.0;
  double gamma = 0.0;
  double omega = 0.0;
  double nu = 0.0;
  double alpha = 0.0;
  std::string lambdas;
  std::string alphas;
  std::string J_path;
  std::string e;
  std::string gamma_grid;
  int degree = 1;
  int K = 6;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
};

io::json read_json_file(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ParameterError(field, "cannot open '" + path + "'");
  try {
    return io::json::parse(in);
  } catch (const io::json::exception& ex) {
    throw ParameterError(field, std::string("invalid JSON: ") + ex.what());
  }
}

void add_common(CLI::App* sub, RawFlags& f) {
  sub->add_option("--config", f.config_path, "JSON config file; explicit flags override it");
  sub->add_option("--model", f.model, "ou | magnetic | gle | genou");
  sub->add_option("--beta", f.beta, "inverse temperature");
  sub->add_option("--gamma", f.gamma, "friction (ou, genou)");
  sub->add_option("--omega", f.omega, "cyclotron frequency (magnetic)");
  sub->add_option("--nu", f.nu, "friction (magnetic)");
  sub->add_option("--alpha", f.alpha, "coupling strength (genou)");
  sub->add_option("--lambdas", f.lambdas, "kernel amplitudes, comma separated (gle)");
  sub->add_option("--alphas", f.alphas, "kernel rates, comma separated (gle)");
  sub->add_option("--J", f.J_path, "path to a JSON skew matrix (genou)");
  sub->add_option("--e", f.e, "direction, comma separated");
  sub->add_option("--gamma-grid", f.gamma_grid, "log grid min:max:count");
  sub->add_option("--degree", f.degree, "Hermite basis degree");
  sub->add_option("--K", f.K, "number of series terms (expand)");
  sub->add_option("--dt", f.dt, "Monte Carlo time step");
  sub->add_option("--steps", f.steps, "Monte Carlo steps per path");
  sub->add_option("--paths", f.paths, "Monte Carlo paths");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--out", f.out, "write output to this file");
  sub->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
}

RunConfig to_config(const CLI::App* sub, const RawFlags& f) {
  RunConfig c;
  auto set = [&](const char* name) { return sub->count(name) > 0; };
  if (set("--config")) apply_json(c, read_json_file(f.config_path, "config"));
  if (set("--model")) c.model = f.model;
  if (set("--beta")) c.beta = f.beta;
  if (set("--gamma")) c.gamma = f.gamma;
  if (set("--omega")) c.omega = f.omega;
  if (set("--nu")) c.nu = f.nu;
  if (set("--alpha")) c.alpha = f.alpha;
  if (set("--lambdas")) c.lambdas = parse_list(f.lambdas, "lambdas");
  if (set("--alphas")) c.alphas = parse_list(f.alphas, "alphas");
  if (set("--J")) c.J = io::matrix_from_json(read_json_file(f.J_path, "J"));
  if (set("--e")) {
    const auto v = parse_list(f.e, "e");
    c.e = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (set("--gamma-grid")) c.gamma_grid = parse_gamma_grid(f.gamma_grid);
  if (set("--degree")) c.degree = f.degree;
  if (set("--K")) c.K = f.K;
  if (set("--dt")) c.dt = f.dt;
  if (set("--steps")) c.steps = f.steps;
  if (set("--paths")) c.paths = f.paths;
  if (set("--seed")) c.seed = f.seed;
  if (set("--out")) c.out = f.out;
  if (set("--format")) c.format = f.format == "json" ? Format::json : Format::csv;
  return c;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion tensors of linear-Gaussian models by Poisson and Green-Kubo routes",
               "gkdiff"};
  app.require_subcommand(1);
  RawFlags flags;

  using Command = CommandResult (*)(const RunConfig&);
  std::vector<std::pair<CLI::App*, Command>> commands;
  auto add = [&](CLI::App* parent, const char* name, const char* help, Command fn) {
    CLI::App* sub = parent->add_subcommand(name, help);
    add_common(sub, flags);
    commands.emplace_back(sub, fn);
  };
  add(&app, "solve", "Poisson-route tensor and corrector coefficients", cmd_solve);
  add(&app, "compare", "Poisson vs analytic and Monte Carlo Green-Kubo", cmd_compare);
  add(&app, "sweep", "directional coefficient over a friction grid", cmd_sweep);
  add(&app, "spectrum", "spectral measure and Stieltjes reconstruction", cmd_spectrum);
  add(&app, "expand", "large-friction series against the exact value", cmd_expand);
  CLI::App* model = app.add_subcommand("model", "model catalog");
  model->require_subcommand(1);
  add(model, "list", "list catalog models", cmd_model_list);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, fn] : commands) {
      if (!sub->parsed()) continue;
      const RunConfig config = to_config(sub, flags);
      const CommandResult result = fn(config);
      if (config.out.empty()) {
        out << result.output;
      } else {
        std::ofstream file(config.out);
        if (!file) throw ParameterError("out", "cannot write '" + config.out + "'");
        file << result.output;
      }
      return result.exit_code;
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace gkdiff::cli
