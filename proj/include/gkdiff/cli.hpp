#pragma once

#include "gkdiff/models.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gkdiff::cli {

/// Log-spaced grid of `count` points from min to max inclusive.
struct GammaGrid {
  double min = 1e-2;
  double max = 1e2;
  int count = 50;

  std::vector<double> values() const;
};

/// "min:max:count"
GammaGrid parse_gamma_grid(const std::string& text);

/// "1,2,3"
std::vector<double> parse_list(const std::string& text, const std::string& field);

enum class Format { automatic, csv, json };

struct RunConfig {
  std::string model = "ou";
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<double> omega;
  std::optional<double> nu;
  std::optional<double> alpha;
  std::optional<std::vector<double>> lambdas;
  std::optional<std::vector<double>> alphas;
  std::optional<Matrix> J;

  std::optional<Vector> e;
  GammaGrid gamma_grid;
  int degree = 1;
  int K = 6;

  std::optional<double> dt;
  std::optional<std::size_t> steps;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;

  std::string out;
  Format format = Format::automatic;

  /// Parameter record for `model`, unset fields at their defaults
  /// (1 for scalars, the reference J for genou, a single unit mode for gle).
  ModelParams params() const;
  LinearGaussianModel build() const;
  /// Unit direction; defaults to the first coordinate axis.
  Vector direction(Eigen::Index dim) const;
};

/// Overlays the keys present in a JSON config object onto `config`.
void apply_json(RunConfig& config, const nlohmann::ordered_json& j);

struct CommandResult {
  int exit_code = 0;
  std::string output;
};

CommandResult cmd_solve(const RunConfig& config);
CommandResult cmd_compare(const RunConfig& config);
CommandResult cmd_sweep(const RunConfig& config);
CommandResult cmd_spectrum(const RunConfig& config);
CommandResult cmd_expand(const RunConfig& config);
CommandResult cmd_model_list(const RunConfig& config);

/// Full command-line entry point. Returns the process exit status: 0 on
/// success, 1 when compare finds a z-score above 4, 2 on any error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gkdiff::cli
