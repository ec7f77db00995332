#pragma once

#include "gkdiff/models.hpp"

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace gkdiff {

using MultiIndex = std::vector<int>;

/// Truncated orthonormal Hermite basis of L^2(N(0, beta^{-1} I)).
///
/// Basis functions are psi_k(z) = prod_i He_{k_i}(sqrt(beta) z_i) / sqrt(k_i!)
/// with |k| <= max_degree. Ordering is degree-major and, within a degree,
/// descending lexicographic, so (1,0) precedes (0,1). The zero index is
/// always first.
class HermiteBasis {
 public:
  HermiteBasis(int dim, int max_degree, double beta);

  int dim() const noexcept { return dim_; }
  int max_degree() const noexcept { return max_degree_; }
  double beta() const noexcept { return beta_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  const MultiIndex& index(Eigen::Index i) const { return indices_.at(static_cast<std::size_t>(i)); }

  /// Position of a multi-index, or -1 when it is not in the basis.
  Eigen::Index position(const MultiIndex& k) const;

  /// Position of the degree-one function sqrt(beta) z_i.
  Eigen::Index linear_position(int i) const;

  static int total_degree(const MultiIndex& k);

 private:
  int dim_;
  int max_degree_;
  double beta_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, Eigen::Index> lookup_;
};

using BasisPtr = std::shared_ptr<const HermiteBasis>;

BasisPtr build_basis(int dim, int max_degree, double beta);

enum class SymmetryTag { symmetric, antisymmetric, general };

/// Dense matrix of an operator in an orthonormal Hermite basis, with
/// entries(m, k) = (psi_m, Op psi_k)_mu. Since the basis is orthonormal the
/// mu-adjoint is the transpose; the constructor enforces the symmetry tag.
class OperatorMatrix {
 public:
  OperatorMatrix(BasisPtr basis, Matrix entries, SymmetryTag tag);

  const HermiteBasis& basis() const noexcept { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  const Matrix& entries() const noexcept { return entries_; }
  SymmetryTag tag() const noexcept { return tag_; }

  OperatorMatrix scaled(double factor) const;

 private:
  BasisPtr basis_;
  Matrix entries_;
  SymmetryTag tag_;
};

/// Exact matrix of the generator (B z).grad + 1/2 sigma sigma^T : Hess on the
/// basis, built from the raising/lowering recurrences of normalized Hermite
/// polynomials. Requires the model's invariant covariance to be beta^{-1} I
/// (true for the whole catalog), otherwise the basis is not mu-orthonormal.
OperatorMatrix assemble_generator(const LinearGaussianModel& model, BasisPtr basis);

/// (S, A) with S = (L + L^T)/2 and A = (L - L^T)/2, so S + A = L.
/// S still carries the dissipation scale; see GeneratorSplit.
std::pair<OperatorMatrix, OperatorMatrix> split_sym_antisym(const OperatorMatrix& L);

/// Generator split with the dissipation scale factored out:
/// L = antisymmetric + scale * symmetric_unit.
struct GeneratorSplit {
  OperatorMatrix symmetric_unit;
  OperatorMatrix antisymmetric;
  double scale;
};

GeneratorSplit decompose_generator(const LinearGaussianModel& model, BasisPtr basis);

/// <f, g> = f^T (-S) g on mean-zero coefficient vectors.
/// Throws DomainError when either vector has a constant component.
double h_inner(const Vector& f, const Vector& g, const OperatorMatrix& S);

/// Hermite coefficients of each component of the linear observable M z.
std::vector<Vector> linear_observable_coefficients(const LinearGaussianModel& model,
                                                   const HermiteBasis& basis);

/// Label such as "(1;0;2)" used in CSV headers.
std::string multi_index_label(const MultiIndex& k);

/// CSV export: header "row,<labels...>", then one row per basis function.
std::string operator_to_csv(const OperatorMatrix& op);

}  // namespace gkdiff
