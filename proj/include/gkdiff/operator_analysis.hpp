#pragma once

#include "gkdiff/hermite.hpp"

#include <complex>
#include <string>
#include <vector>

namespace gkdiff {

/// Discrete proxy of G = (-S)^{-1} A acting on the space H with inner
/// product <f,h> = (f, (-S) h)_mu, restricted to mean-zero Hermite modes.
///
/// When -S is singular on the mean-zero modes (the gle, whose dissipation
/// acts on the auxiliary variables only) H is the quotient by ker(-S); G is
/// then the compression (-S)^+ A P with P the projector onto range(-S), and
/// `degenerate` is set.
struct HSpaceOperator {
  BasisPtr basis;
  Matrix G;                  ///< on mean-zero modes, (n-1) x (n-1)
  Matrix gram;               ///< -S on mean-zero modes
  Matrix range_projector;    ///< orthogonal projector onto range(-S)
  Matrix whitening;          ///< W (r x (n-1)): <f,h> = (W f).(W h)
  Matrix whitening_inverse;  ///< W^+ ((n-1) x r)
  Matrix skew;               ///< K = W G W^+, Euclidean skew-symmetric
  double norm = 0.0;         ///< ||G||_{H->H} = max |eigenvalue of i G|
  bool degenerate = false;

  Eigen::Index modes() const noexcept { return G.rows(); }
  double inner(const Vector& f, const Vector& h) const { return f.dot(gram * h); }
};

/// Builds G from the unit-normalized symmetric part and the antisymmetric
/// part of the generator.
HSpaceOperator build_G(const OperatorMatrix& S_unit, const OperatorMatrix& A);

/// ||(-S) G + G^T (-S)||_inf / ||(-S) G||_inf (0 when G = 0).
double antisymmetry_residual(const HSpaceOperator& op);

/// V-hat = (-S)^{-1} V split into its component in N = ker G and the
/// H-orthogonal remainder. Vectors live on the mean-zero modes.
struct VHat {
  std::vector<Vector> full;
  std::vector<Vector> null_part;
  std::vector<Vector> perp_part;
  double spectral_gap = 0.0;  ///< smallest kept / largest discarded singular value
  std::vector<std::string> warnings;
};

/// Relative singular-value cutoff that defines ker G.
inline constexpr double kNullTolerance = 1e-8;

/// `V` are full-basis coefficient vectors (constant mode first). Throws
/// DomainError when some V has a constant component or a component in
/// ker(-S), where V-hat does not exist.
VHat vhat_and_projections(const HSpaceOperator& op, const std::vector<Vector>& V,
                          double tol = kNullTolerance);

/// Directional V-hat for V^e = sum_i e_i V_i (e normalized internally).
VHat directional_vhat(const HSpaceOperator& op, const std::vector<Vector>& V, const Vector& e,
                      double tol = kNullTolerance);

/// Large-gamma expansion of D^e = (1/gamma) <(I - G/gamma)^{-1} V, V>.
///
/// term[k] = gamma^{-(2k+1)} <G^{2k} V, V>, which by antisymmetry equals
/// (-1)^k gamma^{-(2k+1)} ||G^k V||^2: the series alternates.
struct LargeGammaSeries {
  std::vector<double> terms;
  std::vector<double> partial_sums;
  std::vector<double> positive_partial_sums;  ///< sum of |term[k]|
  std::vector<double> odd_moments;            ///< <G^{2k+1} V, V>, k = 0..K-1
  std::vector<double> power_norms;            ///< ||G^k V||^2, k = 0..K
  double gamma = 0.0;
  double operator_norm = 0.0;
};

/// Throws ConvergenceError unless gamma > ||G||.
LargeGammaSeries large_gamma_series(const HSpaceOperator& op, const Vector& vhat, double gamma,
                                    int K);

struct SmallGammaLimit {
  double limit_of_gamma_D = 0.0;  ///< ||V-hat_N||^2
  bool solvable = false;          ///< -G p = V-hat_perp has a solution
  bool vanishes = false;          ///< V-hat_N = 0, so D^e = o(1/gamma)
  double range_residual = 0.0;
  std::string note;
};

SmallGammaLimit small_gamma_limit(const HSpaceOperator& op, const VHat& vhat);

/// Point mass of the spectral measure of Gamma (G = i Gamma) at lambda, with
/// weight(i,j) = <P_lambda V-hat_i, V-hat_j>.
struct SpectralAtom {
  double lambda = 0.0;
  Eigen::MatrixXcd weight;
};

struct SpectralMeasure {
  std::vector<SpectralAtom> atoms;  ///< sorted by lambda, null space excluded
  Matrix null_mass;                 ///< <V-hat_N,i, V-hat_N,j>
  Matrix total_mass;                ///< <V-hat_i, V-hat_j>

  Eigen::Index obs_dim() const noexcept { return null_mass.rows(); }
};

SpectralMeasure spectral_measure(const HSpaceOperator& op, const VHat& vhat,
                                 double tol = kNullTolerance);

/// Normalizations of the Stieltjes formulas, fixed by matching the Poisson
/// route once on the genou model (see calibrate_stieltjes):
///   D^e   = (1/gamma) mu_e(0) + kSymmetricFactor * gamma * sum_{lambda>0} mu_e / (gamma^2 + lambda^2)
///   A_ij  = Re( kAntisymmetricFactor * sum_lambda lambda mu_ij / (lambda^2 + gamma^2) )
inline constexpr double kSymmetricFactor = 2.0;
inline const std::complex<double> kAntisymmetricFactor{0.0, 1.0};

/// D^e from the measure for a unit direction e.
double stieltjes_symmetric(const SpectralMeasure& measure, double gamma, const Vector& e);

/// Full symmetric part (D + D^T)/2 from the measure.
Matrix stieltjes_symmetric_tensor(const SpectralMeasure& measure, double gamma);

/// Antisymmetric part (D - D^T)/2 from the measure; never touches null_mass.
Matrix stieltjes_antisymmetric(const SpectralMeasure& measure, double gamma);

/// Raw kernel sums before normalization, used for calibration.
double symmetric_half_line_sum(const SpectralMeasure& measure, double gamma, const Vector& e);
Eigen::MatrixXcd antisymmetric_kernel_sum(const SpectralMeasure& measure, double gamma);

struct StieltjesCalibration {
  double symmetric_factor = 0.0;
  std::complex<double> antisymmetric_factor{0.0, 0.0};
};

/// Recovers both normalizations from a Poisson-route tensor D at `gamma`.
StieltjesCalibration calibrate_stieltjes(const SpectralMeasure& measure, const Matrix& D,
                                         double gamma);

/// Everything the analysis needs for one model, at a given basis degree.
struct ModelAnalysis {
  GeneratorSplit split;
  HSpaceOperator op;
  std::vector<Vector> observable;  ///< full-basis coefficients of V
};

ModelAnalysis analyze_model(const LinearGaussianModel& model, int max_degree);

}  // namespace gkdiff
