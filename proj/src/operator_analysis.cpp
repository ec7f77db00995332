#include "gkdiff/operator_analysis.hpp"

#include "gkdiff/errors.hpp"
#include "gkdiff/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gkdiff {

namespace {

constexpr double kKernelTolerance = 1e-10;

Vector mean_zero_part(const HSpaceOperator& op, const Vector& v) {
  const Eigen::Index n = op.modes() + 1;
  if (v.size() != n) throw DimensionError("coefficient vector does not match the basis size");
  if (std::abs(v(0)) > 1e-14 * std::max(1.0, v.norm())) {
    throw DomainError("observable is not mean-zero (constant coefficient is nonzero)");
  }
  return v.tail(n - 1);
}

// Orthonormal basis (columns) of ker K, from the right singular vectors.
Matrix null_basis(const Matrix& K, double tol, double& gap) {
  gap = std::numeric_limits<double>::infinity();
  if (K.rows() == 0) return Matrix(0, 0);
  Eigen::JacobiSVD<Matrix> svd(K, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = tol * s(0);
  std::vector<Eigen::Index> null_cols;
  double smallest_kept = std::numeric_limits<double>::infinity();
  double largest_dropped = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) <= cutoff) {
      null_cols.push_back(i);
      largest_dropped = std::max(largest_dropped, s(i));
    } else {
      smallest_kept = std::min(smallest_kept, s(i));
    }
  }
  if (!null_cols.empty() && std::isfinite(smallest_kept)) {
    gap = largest_dropped > 0.0 ? smallest_kept / largest_dropped
                                : std::numeric_limits<double>::infinity();
  }
  Matrix N(K.rows(), static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t c = 0; c < null_cols.size(); ++c) {
    N.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(null_cols[c]);
  }
  return N;
}

}  // namespace

HSpaceOperator build_G(const OperatorMatrix& S_unit, const OperatorMatrix& A) {
  if (S_unit.basis_ptr() != A.basis_ptr() && S_unit.basis().size() != A.basis().size()) {
    throw DimensionError("S and A live on different bases");
  }
  const Eigen::Index n = S_unit.basis().size();
  if (n < 2) throw DomainError("basis has no mean-zero modes");
  const Eigen::Index m = n - 1;

  HSpaceOperator op;
  op.basis = S_unit.basis_ptr();
  op.gram = -S_unit.entries().bottomRightCorner(m, m);
  op.gram = 0.5 * (op.gram + op.gram.transpose());
  const Matrix A_modes = A.entries().bottomRightCorner(m, m);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(op.gram);
  const Vector& d = eig.eigenvalues();
  const double d_max = d.maxCoeff();
  if (!(d_max > 0.0)) throw DomainError("-S vanishes on the mean-zero modes");
  if (d.minCoeff() < -kKernelTolerance * d_max) {
    throw DomainError("-S is not positive semidefinite");
  }

  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (d(i) > kKernelTolerance * d_max) kept.push_back(i);
  }
  const auto r = static_cast<Eigen::Index>(kept.size());
  op.degenerate = r < m;

  Matrix U_r(m, r);
  Vector root(r);
  for (Eigen::Index c = 0; c < r; ++c) {
    U_r.col(c) = eig.eigenvectors().col(kept[static_cast<std::size_t>(c)]);
    root(c) = std::sqrt(d(kept[static_cast<std::size_t>(c)]));
  }
  const Vector inv_root = root.cwiseInverse();

  op.range_projector = U_r * U_r.transpose();
  op.whitening = root.asDiagonal() * U_r.transpose();
  op.whitening_inverse = U_r * inv_root.asDiagonal();
  const Matrix pinv = op.whitening_inverse * op.whitening_inverse.transpose();
  op.G = pinv * A_modes * op.range_projector;

  Matrix K = inv_root.asDiagonal() * (U_r.transpose() * A_modes * U_r) * inv_root.asDiagonal();
  op.skew = 0.5 * (K - K.transpose());
  op.norm = r > 0 ? Eigen::JacobiSVD<Matrix>(op.skew).singularValues()(0) : 0.0;
  return op;
}

double antisymmetry_residual(const HSpaceOperator& op) {
  const Matrix X = op.gram * op.G;
  const double scale = linalg::inf_norm(X);
  if (scale == 0.0) return 0.0;
  return linalg::inf_norm(X + X.transpose()) / scale;
}

VHat vhat_and_projections(const HSpaceOperator& op, const std::vector<Vector>& V, double tol) {
  if (!(tol > 0.0)) throw ParameterError("tol", "must be positive");
  VHat out;
  double gap = 0.0;
  const Matrix N = null_basis(op.skew, tol, gap);
  out.spectral_gap = gap;
  if (N.cols() > 0 && N.cols() < op.skew.rows() && gap < 1e4) {
    std::ostringstream msg;
    msg << "null space of G is poorly separated: singular-value gap " << gap;
    out.warnings.push_back(msg.str());
  }

  for (const Vector& v : V) {
    const Vector vm = mean_zero_part(op, v);
    const Vector outside = vm - op.range_projector * vm;
    if (outside.norm() > 1e-10 * std::max(vm.norm(), std::numeric_limits<double>::min())) {
      throw DomainError(
          "observable has a component in ker(-S); (-S)^{-1} V does not exist for this model");
    }
    const Vector f = op.whitening_inverse.transpose() * vm;  // = W vhat
    const Vector vhat = op.whitening_inverse * f;
    const Vector f_null = N.cols() > 0 ? Vector(N * (N.transpose() * f)) : Vector::Zero(f.size());
    const Vector vhat_null = op.whitening_inverse * f_null;
    out.full.push_back(vhat);
    out.null_part.push_back(vhat_null);
    out.perp_part.push_back(vhat - vhat_null);
  }
  return out;
}

VHat directional_vhat(const HSpaceOperator& op, const std::vector<Vector>& V, const Vector& e,
                      double tol) {
  if (static_cast<std::size_t>(e.size()) != V.size()) {
    throw DimensionError("direction length differs from the number of observable components");
  }
  const double norm = e.norm();
  if (!(norm > 0.0)) throw ParameterError("e", "direction must be nonzero");
  Vector combined = Vector::Zero(V.front().size());
  for (std::size_t i = 0; i < V.size(); ++i) {
    combined += (e(static_cast<Eigen::Index>(i)) / norm) * V[i];
  }
  return vhat_and_projections(op, {combined}, tol);
}

LargeGammaSeries large_gamma_series(const HSpaceOperator& op, const Vector& vhat, double gamma,
                                    int K) {
  if (K < 0) throw ParameterError("K", "must be >= 0");
  if (!(gamma > op.norm)) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " is not above ||G|| = " << op.norm
        << "; the large-gamma series does not converge";
    throw ConvergenceError(msg.str());
  }
  if (vhat.size() != op.modes()) throw DimensionError("vhat does not match the operator size");

  std::vector<Vector> powers{vhat};
  for (int j = 1; j <= 2 * K; ++j) powers.push_back(op.G * powers.back());

  LargeGammaSeries series;
  series.gamma = gamma;
  series.operator_norm = op.norm;
  double sum = 0.0;
  double positive_sum = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double moment = op.inner(powers[static_cast<std::size_t>(2 * k)], vhat);
    const double term = moment / std::pow(gamma, 2 * k + 1);
    sum += term;
    positive_sum += std::abs(term);
    series.terms.push_back(term);
    series.partial_sums.push_back(sum);
    series.positive_partial_sums.push_back(positive_sum);
    const Vector& pk = powers[static_cast<std::size_t>(k)];
    series.power_norms.push_back(op.inner(pk, pk));
    if (k < K) {
      series.odd_moments.push_back(op.inner(powers[static_cast<std::size_t>(2 * k + 1)], vhat));
    }
  }
  return series;
}

SmallGammaLimit small_gamma_limit(const HSpaceOperator& op, const VHat& vhat) {
  if (vhat.full.size() != 1) {
    throw DimensionError("small_gamma_limit expects a single (directional) V-hat");
  }
  SmallGammaLimit out;
  const Vector& null_part = vhat.null_part.front();
  const Vector& perp = vhat.perp_part.front();
  out.limit_of_gamma_D = op.inner(null_part, null_part);
  const double total = op.inner(vhat.full.front(), vhat.full.front());
  out.vanishes = out.limit_of_gamma_D <= 1e-12 * std::max(total, std::numeric_limits<double>::min());

  const Vector f_perp = op.whitening * perp;
  if (f_perp.size() == 0 || f_perp.norm() <= 1e-12 * std::sqrt(total)) {
    out.solvable = true;
    out.range_residual = 0.0;
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(op.skew);
    const Vector q = cod.solve(-f_perp);
    out.range_residual = (op.skew * q + f_perp).norm() / f_perp.norm();
    out.solvable = out.range_residual <= 1e-8;
  }
  if (!out.solvable) {
    out.note = "V-hat_perp is not in the range of G; the reported limit is not guaranteed";
  } else if (out.vanishes) {
    out.note = "V-hat_N = 0: D^e = o(1/gamma) as gamma -> 0";
  } else {
    out.note = "gamma D^e -> ||V-hat_N||^2 as gamma -> 0";
  }
  return out;
}

SpectralMeasure spectral_measure(const HSpaceOperator& op, const VHat& vhat, double tol) {
  const auto m = static_cast<Eigen::Index>(vhat.full.size());
  if (m == 0) throw DimensionError("spectral_measure needs at least one V-hat component");

  SpectralMeasure out;
  out.null_mass.resize(m, m);
  out.total_mass.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto si = static_cast<std::size_t>(i);
      const auto sj = static_cast<std::size_t>(j);
      out.null_mass(i, j) = op.inner(vhat.null_part[si], vhat.null_part[sj]);
      out.total_mass(i, j) = op.inner(vhat.full[si], vhat.full[sj]);
    }
  }

  const Eigen::Index r = op.skew.rows();
  if (r == 0) return out;

  // Gamma = -i G is Hermitian; in whitened coordinates it is -i K.
  const Eigen::MatrixXcd hermitian = std::complex<double>(0.0, -1.0) * op.skew.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hermitian);
  const Vector& lambdas = eig.eigenvalues();
  const double lambda_max = lambdas.cwiseAbs().maxCoeff();
  if (lambda_max == 0.0) return out;
  const double cutoff = tol * lambda_max;

  Eigen::MatrixXcd F(r, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    F.col(i) = (op.whitening * vhat.perp_part[static_cast<std::size_t>(i)]).cast<std::complex<double>>();
  }
  const double scale = std::max(out.total_mass.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

  const double merge = 1e-9 * std::max(1.0, lambda_max);
  for (Eigen::Index k = 0; k < r; ++k) {
    const double lambda = lambdas(k);
    if (std::abs(lambda) <= cutoff) continue;
    // a_i = u^* f_i; weight_ij = a_i conj(a_j)
    const Eigen::VectorXcd a = (eig.eigenvectors().col(k).adjoint() * F).transpose();
    Eigen::MatrixXcd w = a * a.adjoint();
    if (!out.atoms.empty() && std::abs(out.atoms.back().lambda - lambda) <= merge) {
      out.atoms.back().weight += w;
    } else {
      out.atoms.push_back({lambda, std::move(w)});
    }
  }
  std::erase_if(out.atoms, [&](const SpectralAtom& atom) {
    return atom.weight.cwiseAbs().maxCoeff() <= 1e-13 * scale;
  });
  return out;
}

double symmetric_half_line_sum(const SpectralMeasure& measure, double gamma, const Vector& e) {
  const Vector unit = e / e.norm();
  double sum = 0.0;
  for (const auto& atom : measure.atoms) {
    if (atom.lambda <= 0.0) continue;
    const double mu_e = (unit.transpose().cast<std::complex<double>>() * atom.weight *
                         unit.cast<std::complex<double>>())(0, 0)
                            .real();
    sum += mu_e / (gamma * gamma + atom.lambda * atom.lambda);
  }
  return sum;
}

double stieltjes_symmetric(const SpectralMeasure& measure, double gamma, const Vector& e) {
  if (!(gamma > 0.0)) throw ParameterError("gamma", "must be positive");
  if (e.size() != measure.obs_dim()) throw DimensionError("direction length differs from obs_dim");
  if (!(e.norm() > 0.0)) throw ParameterError("e", "direction must be nonzero");
  const Vector unit = e / e.norm();
  const double null_term = unit.dot(measure.null_mass * unit) / gamma;
  return null_term + kSymmetricFactor * gamma * symmetric_half_line_sum(measure, gamma, unit);
}

Matrix stieltjes_symmetric_tensor(const SpectralMeasure& measure, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("gamma", "must be positive");
  Matrix D = measure.null_mass / gamma;
  for (const auto& atom : measure.atoms) {
    if (atom.lambda <= 0.0) continue;
    D += (kSymmetricFactor * gamma / (gamma * gamma + atom.lambda * atom.lambda)) *
         atom.weight.real();
  }
  return 0.5 * (D + D.transpose());
}

Eigen::MatrixXcd antisymmetric_kernel_sum(const SpectralMeasure& measure, double gamma) {
  const Eigen::Index m = measure.obs_dim();
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(m, m);
  for (const auto& atom : measure.atoms) {
    sum += (atom.lambda / (atom.lambda * atom.lambda + gamma * gamma)) * atom.weight;
  }
  return sum;
}

Matrix stieltjes_antisymmetric(const SpectralMeasure& measure, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("gamma", "must be positive");
  const Matrix A = (kAntisymmetricFactor * antisymmetric_kernel_sum(measure, gamma)).real();
  return 0.5 * (A - A.transpose());
}

StieltjesCalibration calibrate_stieltjes(const SpectralMeasure& measure, const Matrix& D,
                                         double gamma) {
  const Eigen::Index m = measure.obs_dim();
  if (D.rows() != m || D.cols() != m) throw DimensionError("tensor size differs from obs_dim");

  StieltjesCalibration cal;
  double best = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector e = Vector::Unit(m, i);
    const double half = symmetric_half_line_sum(measure, gamma, e);
    if (std::abs(half) > best) {
      best = std::abs(half);
      const double null_term = measure.null_mass(i, i) / gamma;
      cal.symmetric_factor = (D(i, i) - null_term) / (gamma * half);
    }
  }
  if (best == 0.0) throw DomainError("measure has no atoms to calibrate against");

  const Eigen::MatrixXcd kernel = antisymmetric_kernel_sum(measure, gamma);
  const Matrix A = 0.5 * (D - D.transpose());
  Eigen::Index bi = 0;
  Eigen::Index bj = 0;
  if (kernel.cwiseAbs().maxCoeff(&bi, &bj) == 0.0) {
    throw DomainError("measure carries no antisymmetric information");
  }
  cal.antisymmetric_factor = A(bi, bj) / kernel(bi, bj);
  return cal;
}

ModelAnalysis analyze_model(const LinearGaussianModel& model, int max_degree) {
  if (max_degree < 1) throw ParameterError("degree", "must be >= 1");
  BasisPtr basis = build_basis(static_cast<int>(model.state_dim()), max_degree, model.inv_temp());
  GeneratorSplit split = decompose_generator(model, basis);
  HSpaceOperator op = build_G(split.symmetric_unit, split.antisymmetric);
  return {std::move(split), std::move(op), linear_observable_coefficients(model, *basis)};
}

}  // namespace gkdiff
