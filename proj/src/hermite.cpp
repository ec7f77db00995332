#include "gkdiff/hermite.hpp"

#include "gkdiff/errors.hpp"
#include "gkdiff/format.hpp"
#include "gkdiff/linalg.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace gkdiff {

namespace {

// All multi-indices of `dim` components with total degree `degree`, first
// component largest first.
void enumerate_degree(int dim, int degree, MultiIndex& prefix, std::vector<MultiIndex>& out) {
  const int used = std::accumulate(prefix.begin(), prefix.end(), 0);
  const int remaining = degree - used;
  if (static_cast<int>(prefix.size()) == dim - 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    prefix.push_back(k);
    enumerate_degree(dim, degree, prefix, out);
    prefix.pop_back();
  }
}

// beta^{-1} I solves the Lyapunov equation. For a Hurwitz drift the solution
// is unique, and the residual test stays accurate when the drift is nearly
// singular, unlike comparing against a computed covariance.
bool stationary_is_isotropic(const LinearGaussianModel& model) {
  if (!is_hurwitz(model.drift())) throw ErgodicityError("drift is not Hurwitz");
  const Matrix& B = model.drift();
  const Matrix Q = model.diffusion();
  const double s = 1.0 / model.inv_temp();
  const Matrix residual = s * (B + B.transpose()) + Q;
  const double scale = 2.0 * s * linalg::inf_norm(B) + linalg::inf_norm(Q);
  return linalg::inf_norm(residual) <= 1e-12 * scale;
}

}  // namespace

HermiteBasis::HermiteBasis(int dim, int max_degree, double beta)
    : dim_(dim), max_degree_(max_degree), beta_(beta) {
  if (dim < 1) throw ParameterError("dim", "must be >= 1");
  if (max_degree < 0) throw ParameterError("max_degree", "must be >= 0");
  if (!(beta > 0.0)) throw ParameterError("beta", "must be positive");
  for (int n = 0; n <= max_degree; ++n) {
    MultiIndex prefix;
    enumerate_degree(dim, n, prefix, indices_);
  }
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    lookup_.emplace(indices_[i], static_cast<Eigen::Index>(i));
  }
}

Eigen::Index HermiteBasis::position(const MultiIndex& k) const {
  auto it = lookup_.find(k);
  return it == lookup_.end() ? -1 : it->second;
}

Eigen::Index HermiteBasis::linear_position(int i) const {
  if (max_degree_ < 1) throw DomainError("basis has no degree-one functions");
  // Degree-one block follows the constant: (1,0,..), (0,1,..), ...
  return 1 + i;
}

int HermiteBasis::total_degree(const MultiIndex& k) {
  return std::accumulate(k.begin(), k.end(), 0);
}

BasisPtr build_basis(int dim, int max_degree, double beta) {
  return std::make_shared<const HermiteBasis>(dim, max_degree, beta);
}

OperatorMatrix::OperatorMatrix(BasisPtr basis, Matrix entries, SymmetryTag tag)
    : basis_(std::move(basis)), entries_(std::move(entries)), tag_(tag) {
  if (!basis_) throw DimensionError("operator matrix needs a basis");
  if (entries_.rows() != basis_->size() || entries_.cols() != basis_->size()) {
    throw DimensionError("operator matrix must be basis size x basis size");
  }
  const double scale = entries_.size() ? entries_.cwiseAbs().maxCoeff() : 0.0;
  if (tag_ == SymmetryTag::symmetric &&
      (entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("operator tagged symmetric is not symmetric");
  }
  if (tag_ == SymmetryTag::antisymmetric &&
      (entries_ + entries_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("operator tagged antisymmetric is not antisymmetric");
  }
}

OperatorMatrix OperatorMatrix::scaled(double factor) const {
  return {basis_, factor * entries_, tag_};
}

OperatorMatrix assemble_generator(const LinearGaussianModel& model, BasisPtr basis) {
  if (!basis) throw DimensionError("null basis");
  if (basis->dim() != model.state_dim()) {
    throw DimensionError("basis dimension differs from the model state dimension");
  }
  if (basis->beta() != model.inv_temp()) {
    throw DimensionError("basis was built for a different beta");
  }
  if (!stationary_is_isotropic(model)) {
    throw DomainError("invariant covariance is not beta^{-1} I; the Hermite basis is not orthonormal");
  }

  const Matrix& B = model.drift();
  const Matrix Q = model.diffusion();
  const double beta = model.inv_temp();
  const int d = basis->dim();
  const Eigen::Index size = basis->size();
  Matrix L = Matrix::Zero(size, size);

  for (Eigen::Index col = 0; col < size; ++col) {
    const MultiIndex& k = basis->index(col);

    // Drift: sum_ij B_ij x_j d/dx_i, with d/dx_i h_n = sqrt(n) h_{n-1} and
    // x h_n = sqrt(n+1) h_{n+1} + sqrt(n) h_{n-1}.
    for (int i = 0; i < d; ++i) {
      if (k[i] == 0) continue;
      MultiIndex lowered = k;
      lowered[i] -= 1;
      const double d_factor = std::sqrt(static_cast<double>(k[i]));
      for (int j = 0; j < d; ++j) {
        const double b = B(i, j);
        if (b == 0.0) continue;
        MultiIndex up = lowered;
        up[j] += 1;
        L(basis->position(up), col) += b * d_factor * std::sqrt(static_cast<double>(up[j]));
        if (lowered[j] > 0) {
          MultiIndex down = lowered;
          down[j] -= 1;
          L(basis->position(down), col) +=
              b * d_factor * std::sqrt(static_cast<double>(lowered[j]));
        }
      }
    }

    // Diffusion: (beta/2) sum_ij Q_ij d^2/dx_i dx_j.
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double q = Q(i, j);
        if (q == 0.0) continue;
        MultiIndex target = k;
        double factor = 0.0;
        if (i == j) {
          if (k[i] < 2) continue;
          factor = std::sqrt(static_cast<double>(k[i]) * (k[i] - 1));
          target[i] -= 2;
        } else {
          if (k[i] == 0 || k[j] == 0) continue;
          factor = std::sqrt(static_cast<double>(k[i]) * k[j]);
          target[i] -= 1;
          target[j] -= 1;
        }
        L(basis->position(target), col) += 0.5 * beta * q * factor;
      }
    }
  }
  return {std::move(basis), std::move(L), SymmetryTag::general};
}

std::pair<OperatorMatrix, OperatorMatrix> split_sym_antisym(const OperatorMatrix& L) {
  const Matrix& E = L.entries();
  return {OperatorMatrix(L.basis_ptr(), 0.5 * (E + E.transpose()), SymmetryTag::symmetric),
          OperatorMatrix(L.basis_ptr(), 0.5 * (E - E.transpose()), SymmetryTag::antisymmetric)};
}

GeneratorSplit decompose_generator(const LinearGaussianModel& model, BasisPtr basis) {
  auto [S, A] = split_sym_antisym(assemble_generator(model, std::move(basis)));
  const double scale = dissipation_scale(model);
  return {S.scaled(1.0 / scale), std::move(A), scale};
}

double h_inner(const Vector& f, const Vector& g, const OperatorMatrix& S) {
  const Eigen::Index n = S.basis().size();
  if (f.size() != n || g.size() != n) {
    throw DimensionError("coefficient vectors must match the basis size");
  }
  const double tol = 1e-14;
  if (std::abs(f(0)) > tol * std::max(1.0, f.norm()) ||
      std::abs(g(0)) > tol * std::max(1.0, g.norm())) {
    throw DomainError("h_inner is defined on mean-zero functions only");
  }
  return -f.dot(S.entries() * g);
}

std::vector<Vector> linear_observable_coefficients(const LinearGaussianModel& model,
                                                   const HermiteBasis& basis) {
  if (basis.dim() != model.state_dim()) {
    throw DimensionError("basis dimension differs from the model state dimension");
  }
  const double scale = 1.0 / std::sqrt(basis.beta());
  std::vector<Vector> out;
  for (Eigen::Index r = 0; r < model.obs_dim(); ++r) {
    Vector v = Vector::Zero(basis.size());
    for (int i = 0; i < basis.dim(); ++i) {
      v(basis.linear_position(i)) = scale * model.observable()(r, i);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string multi_index_label(const MultiIndex& k) {
  std::string label = "(";
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) label += ';';
    label += std::to_string(k[i]);
  }
  return label + ")";
}

std::string operator_to_csv(const OperatorMatrix& op) {
  const HermiteBasis& basis = op.basis();
  std::ostringstream out;
  out << "row";
  for (const auto& k : basis.indices()) out << ',' << multi_index_label(k);
  out << '\n';
  for (Eigen::Index r = 0; r < basis.size(); ++r) {
    out << multi_index_label(basis.index(r));
    for (Eigen::Index c = 0; c < basis.size(); ++c) out << ',' << format_double(op.entries()(r, c));
    out << '\n';
  }
  return out.str();
}

}  // namespace gkdiff
