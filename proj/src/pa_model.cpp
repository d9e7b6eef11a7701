#include "paota/pa_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "paota/error.hpp"

namespace paota {

PaPolynomial::PaPolynomial(ComplexVector coefficients) : coefficients_(std::move(coefficients)) {
  if (coefficients_.size() < 1) {
    throw InvalidArgument("PaPolynomial: order must be at least 1");
  }
}

PilotSequence::PilotSequence(ComplexVector symbols, double max_amplitude)
    : symbols_(std::move(symbols)), max_amplitude_(max_amplitude) {
  if (!(max_amplitude_ > 0.0)) {
    throw InvalidArgument("PilotSequence: max_amplitude must be positive");
  }
  for (Eigen::Index n = 0; n < symbols_.size(); ++n) {
    if (std::abs(symbols_[n]) > max_amplitude_ + 1e-12) {
      throw InvalidArgument("PilotSequence: pilot " + std::to_string(n) +
                            " exceeds the amplitude cap");
    }
  }
}

PilotSequence PilotSequence::with_phases(std::span<const double> phases) const {
  if (static_cast<Eigen::Index>(phases.size()) != symbols_.size()) {
    throw DimensionMismatch("PilotSequence::with_phases: one phase per pilot required");
  }
  ComplexVector rotated(symbols_.size());
  for (Eigen::Index n = 0; n < symbols_.size(); ++n) {
    rotated[n] = std::polar(std::abs(symbols_[n]), phases[static_cast<std::size_t>(n)]);
  }
  return PilotSequence(std::move(rotated), max_amplitude_);
}

Complex eval_polynomial(const PaPolynomial& model, Complex s) {
  const double amplitude = std::abs(s);
  Complex acc = 0.0;
  Complex basis = s;
  for (int l = 0; l < model.order(); ++l) {
    acc += model.coefficients()[l] * basis;
    basis *= amplitude;
  }
  return acc;
}

ComplexMatrix build_design_matrix(const ComplexVector& symbols, int order) {
  if (order < 1) {
    throw InvalidArgument("build_design_matrix: order must be at least 1");
  }
  ComplexMatrix design(symbols.size(), order);
  for (Eigen::Index n = 0; n < symbols.size(); ++n) {
    const double amplitude = std::abs(symbols[n]);
    Complex entry = symbols[n];
    for (int l = 0; l < order; ++l) {
      design(n, l) = entry;
      entry *= amplitude;
    }
  }
  return design;
}

ComplexMatrix build_design_matrix(const PilotSequence& pilots, int order) {
  return build_design_matrix(pilots.symbols(), order);
}

ComplexVector build_prediction_vector(Complex s, int order) {
  ComplexVector symbol(1);
  symbol[0] = s;
  return build_design_matrix(symbol, order).row(0).transpose();
}

double condition_number(const ComplexMatrix& m) {
  if (m.size() == 0 || m.cols() > m.rows()) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  if (smallest <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return sv[0] / smallest;
}

BasisTransform::BasisTransform(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw InvalidBasis("BasisTransform: matrix must be square and nonempty");
  }
  if (!(condition_number(matrix_) < kConditionLimit)) {
    throw InvalidBasis("BasisTransform: matrix is singular or ill-conditioned");
  }
  inverse_ = matrix_.partialPivLu().solve(ComplexMatrix::Identity(matrix_.rows(), matrix_.cols()));
}

BasisTransform BasisTransform::identity(int order) {
  return BasisTransform(ComplexMatrix::Identity(order, order));
}

ComplexMatrix BasisTransform::apply_to_design(const ComplexMatrix& design) const {
  if (design.cols() != matrix_.rows()) {
    throw DimensionMismatch("BasisTransform: design has wrong number of columns");
  }
  return design * matrix_;
}

ComplexVector BasisTransform::map_coefficients(const ComplexVector& beta) const {
  if (beta.size() != matrix_.cols()) {
    throw DimensionMismatch("BasisTransform: coefficient vector has wrong length");
  }
  return inverse_ * beta;
}

ComplexMatrix BasisTransform::map_covariance(const ComplexMatrix& covariance) const {
  if (covariance.rows() != matrix_.cols() || covariance.cols() != matrix_.cols()) {
    throw DimensionMismatch("BasisTransform: covariance has wrong shape");
  }
  return inverse_ * covariance * inverse_.adjoint();
}

ComplexMatrix change_basis(const ComplexMatrix& design, const BasisTransform& basis) {
  return basis.apply_to_design(design);
}

void RappParameters::validate() const {
  if (!(gain > 0.0) || !(v_sat > 0.0) || !(smoothness > 0.0)) {
    throw InvalidArgument("RappParameters: gain, v_sat and smoothness must be positive");
  }
}

double rapp_response(const RappParameters& params, double amplitude) {
  const double linear = params.gain * amplitude;
  const double two_s = 2.0 * params.smoothness;
  return linear / std::pow(1.0 + std::pow(linear / params.v_sat, two_s), 1.0 / two_s);
}

Complex rapp_response(const RappParameters& params, Complex s) {
  const double amplitude = std::abs(s);
  if (amplitude == 0.0) {
    return 0.0;
  }
  return s * (rapp_response(params, amplitude) / amplitude);
}

}  // namespace paota
