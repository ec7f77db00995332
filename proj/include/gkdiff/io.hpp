#pragma once

#include "gkdiff/models.hpp"
#include "gkdiff/operator_analysis.hpp"
#include "gkdiff/poisson.hpp"

#include "json.hpp"

namespace gkdiff::io {

using json = nlohmann::ordered_json;

/// Row-major nested arrays.
json matrix_to_json(const Matrix& A);
Matrix matrix_from_json(const json& j);

json params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& label, const json& j);

/// {label, params, state_dim, obs_dim, drift, noise, beta, observable}
json model_to_json(const LinearGaussianModel& model);

/// Rebuilds the model from label + params and checks the stored matrices
/// against the rebuilt ones.
LinearGaussianModel model_from_json(const json& j);

/// {route, convention, d, entries, stderr?}
json tensor_to_json(const DiffusionTensor& D);

/// {null_mass, total_mass, atoms: [{lambda, weight_re, weight_im}]}
json spectral_measure_to_json(const SpectralMeasure& measure);

}  // namespace gkdiff::io
