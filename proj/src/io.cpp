#include "gkdiff/io.hpp"

#include "gkdiff/errors.hpp"

#include <cmath>

namespace gkdiff::io {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ParameterError(key, "must be a number");
  return j.at(key).get<double>();
}

std::vector<double> number_list(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ParameterError(key, "must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ParameterError(key, "entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void check_close(const Matrix& stored, const Matrix& rebuilt, const char* field) {
  if (stored.rows() != rebuilt.rows() || stored.cols() != rebuilt.cols()) {
    throw DimensionError(std::string(field) + " shape does not match the model parameters");
  }
  const double scale = std::max(1.0, rebuilt.cwiseAbs().maxCoeff());
  if ((stored - rebuilt).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ParameterError(field, "stored matrix disagrees with the model parameters");
  }
}

}  // namespace

json matrix_to_json(const Matrix& A) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DimensionError("matrix must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j.front().is_array() || j.front().empty()) {
    throw DimensionError("matrix rows must be non-empty arrays");
  }
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix A(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DimensionError("matrix rows have unequal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number()) throw DimensionError("matrix entries must be numbers");
      A(r, c) = v.get<double>();
    }
  }
  return A;
}

json params_to_json(const ModelParams& params) {
  return std::visit(
      Overloaded{
          [](const OuParams& p) { return json{{"gamma", p.gamma}, {"beta", p.beta}}; },
          [](const MagneticParams& p) {
            return json{{"omega", p.omega}, {"nu", p.nu}, {"beta", p.beta}};
          },
          [](const GleParams& p) {
            return json{{"lambdas", p.lambdas}, {"alphas", p.alphas}, {"beta", p.beta}};
          },
          [](const GenouParams& p) {
            return json{{"J", matrix_to_json(p.J)},
                        {"alpha", p.alpha},
                        {"gamma", p.gamma},
                        {"beta", p.beta}};
          },
      },
      params);
}

ModelParams params_from_json(const std::string& label, const json& j) {
  if (!j.is_object()) throw ParameterError("params", "must be an object");
  if (label == "ou") return OuParams{number(j, "gamma", 1.0), number(j, "beta", 1.0)};
  if (label == "magnetic") {
    return MagneticParams{number(j, "omega", 1.0), number(j, "nu", 1.0), number(j, "beta", 1.0)};
  }
  if (label == "gle") {
    return GleParams{number_list(j, "lambdas"), number_list(j, "alphas"), number(j, "beta", 1.0)};
  }
  if (label == "genou") {
    Matrix J = j.contains("J") ? matrix_from_json(j.at("J")) : reference_skew_matrix();
    return GenouParams{std::move(J), number(j, "alpha", 1.0), number(j, "gamma", 1.0),
                       number(j, "beta", 1.0)};
  }
  throw ParameterError("model", "unknown model '" + label + "'");
}

json model_to_json(const LinearGaussianModel& model) {
  return json{{"label", model.label()},
              {"params", params_to_json(model.params())},
              {"state_dim", model.state_dim()},
              {"obs_dim", model.obs_dim()},
              {"drift", matrix_to_json(model.drift())},
              {"noise", matrix_to_json(model.noise())},
              {"beta", model.inv_temp()},
              {"observable", matrix_to_json(model.observable())}};
}

LinearGaussianModel model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("label") || !j.at("label").is_string()) {
    throw ParameterError("label", "model JSON needs a string label");
  }
  const std::string label = j.at("label").get<std::string>();
  const json params = j.value("params", json::object());
  LinearGaussianModel model = build_model(params_from_json(label, params));
  if (j.contains("drift")) check_close(matrix_from_json(j.at("drift")), model.drift(), "drift");
  if (j.contains("noise")) check_close(matrix_from_json(j.at("noise")), model.noise(), "noise");
  if (j.contains("observable")) {
    check_close(matrix_from_json(j.at("observable")), model.observable(), "observable");
  }
  if (j.contains("beta") && std::abs(j.at("beta").get<double>() - model.inv_temp()) > 0.0) {
    throw ParameterError("beta", "top-level beta disagrees with params.beta");
  }
  return model;
}

json tensor_to_json(const DiffusionTensor& D) {
  json out{{"route", to_string(D.route())},
           {"convention", kDiffusionConvention},
           {"d", D.dim()},
           {"entries", matrix_to_json(D.matrix())}};
  if (D.standard_error()) out["stderr"] = matrix_to_json(*D.standard_error());
  return out;
}

json spectral_measure_to_json(const SpectralMeasure& measure) {
  json atoms = json::array();
  for (const SpectralAtom& atom : measure.atoms) {
    atoms.push_back(json{{"lambda", atom.lambda},
                         {"weight_re", matrix_to_json(atom.weight.real())},
                         {"weight_im", matrix_to_json(atom.weight.imag())}});
  }
  return json{{"null_mass", matrix_to_json(measure.null_mass)},
              {"total_mass", matrix_to_json(measure.total_mass)},
              {"atoms", std::move(atoms)}};
}

}  // namespace gkdiff::io
