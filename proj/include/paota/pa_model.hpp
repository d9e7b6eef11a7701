#pragma once

// Quasi-memoryless polynomial PA model f(s) = sum_l beta_l s |s|^(l-1),
// design-matrix construction, basis changes and the Rapp reference amplifier.

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace paota {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Matrices whose 2-norm condition number reaches this value are treated as
/// rank deficient.
inline constexpr double kConditionLimit = 1e12;

/// Polynomial PA of order L = coefficients.size().
class PaPolynomial {
 public:
  explicit PaPolynomial(ComplexVector coefficients);

  int order() const { return static_cast<int>(coefficients_.size()); }
  const ComplexVector& coefficients() const { return coefficients_; }

 private:
  ComplexVector coefficients_;
};

/// Training symbols with a per-symbol amplitude cap (sqrt of P_max).
class PilotSequence {
 public:
  PilotSequence(ComplexVector symbols, double max_amplitude);

  int size() const { return static_cast<int>(symbols_.size()); }
  const ComplexVector& symbols() const { return symbols_; }
  double max_amplitude() const { return max_amplitude_; }
  RealVector amplitudes() const { return symbols_.cwiseAbs(); }

  /// Same amplitudes, phases replaced by `phases` (radians).
  PilotSequence with_phases(std::span<const double> phases) const;

 private:
  ComplexVector symbols_;
  double max_amplitude_;
};

Complex eval_polynomial(const PaPolynomial& model, Complex s);

/// N x L matrix with entry (n, l) = s_n |s_n|^l (zero-based l).
ComplexMatrix build_design_matrix(const ComplexVector& symbols, int order);
ComplexMatrix build_design_matrix(const PilotSequence& pilots, int order);

/// (s, s|s|, ..., s|s|^(L-1)); one row of the design matrix.
ComplexVector build_prediction_vector(Complex s, int order);

/// 2-norm condition number; infinite when the smallest singular value is 0
/// or the matrix has more columns than rows.
double condition_number(const ComplexMatrix& m);

/// Full-rank L x L change of basis U with Psi = Phi U. Coefficients in the
/// new basis satisfy Psi alpha = Phi beta, so alpha = U^-1 beta and a prior
/// covariance maps to U^-1 C U^-H.
class BasisTransform {
 public:
  /// Throws InvalidBasis when U is not square or cond(U) >= kConditionLimit.
  explicit BasisTransform(ComplexMatrix matrix);

  static BasisTransform identity(int order);

  int order() const { return static_cast<int>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }

  ComplexMatrix apply_to_design(const ComplexMatrix& design) const;
  ComplexVector map_coefficients(const ComplexVector& beta) const;
  ComplexMatrix map_covariance(const ComplexMatrix& covariance) const;

 private:
  ComplexMatrix matrix_;
  ComplexMatrix inverse_;
};

ComplexMatrix change_basis(const ComplexMatrix& design, const BasisTransform& basis);

struct RappParameters {
  double gain = 1.0;
  double v_sat = 1.0;
  double smoothness = 2.0;

  /// Throws InvalidArgument unless all three are strictly positive.
  void validate() const;
};

/// AM/AM response G s / (1 + (G s / V_sat)^(2S))^(1/(2S)) for amplitude s >= 0.
double rapp_response(const RappParameters& params, double amplitude);

/// No AM/PM: the input phase passes through unchanged.
Complex rapp_response(const RappParameters& params, Complex s);

}  // namespace paota
