#include "paota/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "paota/error.hpp"

namespace paota {
namespace {

constexpr int kMaxSearchGrid = 2001;
constexpr double kRefineResolution = 1e-10;

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

void check_noise_variance(double noise_variance) {
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw InvalidArgument("noise variance must be positive and finite");
  }
}

void check_prior_shape(const ComplexMatrix& design, const PriorStatistics& prior) {
  const auto order = design.cols();
  if (prior.mean.size() != order || prior.covariance.rows() != order ||
      prior.covariance.cols() != order) {
    throw DimensionMismatch("prior order " + std::to_string(prior.mean.size()) +
                            " does not match design order " + std::to_string(order));
  }
}

void check_full_rank(const ComplexMatrix& design) {
  if (design.rows() < design.cols()) {
    throw RankDeficient("LS requires at least L pilots with distinct magnitudes (N=" +
                        std::to_string(design.rows()) + ", L=" +
                        std::to_string(design.cols()) + ")");
  }
  if (!(condition_number(design) < kConditionLimit)) {
    throw RankDeficient("design matrix is rank deficient (fewer than L distinct pilot magnitudes)");
  }
}

// Square-root factor P R^-1 of (Phi^H Phi)^-1 for Phi P = Q R.
ComplexMatrix inverse_gram_factor(const Eigen::ColPivHouseholderQR<ComplexMatrix>& qr) {
  const auto order = qr.cols();
  const ComplexMatrix r = qr.matrixR().topLeftCorner(order, order).triangularView<Eigen::Upper>();
  const ComplexMatrix r_inv =
      r.triangularView<Eigen::Upper>().solve(ComplexMatrix::Identity(order, order));
  return qr.colsPermutation() * r_inv;
}

// F with F F^H equal to the PSD part of a Hermitian matrix.
ComplexMatrix psd_factor(const ComplexMatrix& covariance) {
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(covariance));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

ComplexMatrix gram(const ComplexMatrix& factor) {
  return hermitian_part(factor * factor.adjoint());
}

// Stacks [Phi; sigma L^-1] with C = L L^H so that B^H B = Phi^H Phi + sigma^2 C^-1.
ComplexMatrix regularized_stack(const ComplexMatrix& design, double noise_variance,
                                const ComplexMatrix& covariance) {
  const auto order = design.cols();
  const Eigen::LLT<ComplexMatrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("prior covariance is not positive definite");
  }
  const ComplexMatrix l_inv =
      llt.matrixL().solve(ComplexMatrix::Identity(order, order));
  ComplexMatrix stacked(design.rows() + order, order);
  stacked.topRows(design.rows()) = design;
  stacked.bottomRows(order) = std::sqrt(noise_variance) * l_inv;
  return stacked;
}

struct ObservationSpaceGain {
  ComplexMatrix gain;        // C Phi^H S^-1
  ComplexMatrix covariance;  // C - K Phi C
};

ObservationSpaceGain observation_space(const ComplexMatrix& design, double noise_variance,
                                       const ComplexMatrix& covariance) {
  const auto n = design.rows();
  const ComplexMatrix cross = covariance * design.adjoint();  // C Phi^H
  const ComplexMatrix innovation =
      hermitian_part(design * cross) + noise_variance * ComplexMatrix::Identity(n, n);
  const Eigen::LDLT<ComplexMatrix> ldlt(innovation);
  // K = C Phi^H S^-1 = (S^-1 Phi C)^H
  const ComplexMatrix gain = ldlt.solve(cross.adjoint()).adjoint();
  return {gain, hermitian_part(covariance - gain * cross.adjoint())};
}

double golden_section_max(const PredictionMse& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f.at_amplitude(c);
  double fd = f.at_amplitude(d);
  while (b - a > kRefineResolution) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f.at_amplitude(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f.at_amplitude(d);
    }
  }
  return std::max({fc, fd, f.at_amplitude(0.5 * (a + b))});
}

}  // namespace

void PriorStatistics::validate() const {
  const auto order = mean.size();
  if (order < 1 || covariance.rows() != order || covariance.cols() != order) {
    throw DimensionMismatch("PriorStatistics: mean and covariance sizes disagree");
  }
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("PriorStatistics: covariance is not Hermitian");
  }
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(covariance),
                                                         Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw InvalidArgument("PriorStatistics: covariance is not positive semidefinite");
  }
}

bool prior_is_near_singular(const ComplexMatrix& covariance) {
  const auto order = covariance.rows();
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(covariance),
                                                         Eigen::EigenvaluesOnly);
  const double trace = covariance.trace().real();
  return eig.eigenvalues().minCoeff() <= 1e-12 * trace / static_cast<double>(order);
}

ComplexMatrix ls_error_factor(const ComplexMatrix& design, double noise_variance) {
  check_full_rank(design);
  const Eigen::ColPivHouseholderQR<ComplexMatrix> qr(design);
  return std::sqrt(noise_variance) * inverse_gram_factor(qr);
}

ComplexMatrix lmmse_error_factor(const ComplexMatrix& design, double noise_variance,
                                 const PriorStatistics& prior) {
  check_noise_variance(noise_variance);
  check_prior_shape(design, prior);
  if (design.rows() == 0) {
    return psd_factor(prior.covariance);
  }
  if (prior_is_near_singular(prior.covariance)) {
    return psd_factor(observation_space(design, noise_variance, prior.covariance).covariance);
  }
  const Eigen::ColPivHouseholderQR<ComplexMatrix> qr(
      regularized_stack(design, noise_variance, prior.covariance));
  return std::sqrt(noise_variance) * inverse_gram_factor(qr);
}

ComplexMatrix ls_error_covariance(const ComplexMatrix& design, double noise_variance) {
  return gram(ls_error_factor(design, noise_variance));
}

ComplexMatrix lmmse_error_covariance(const ComplexMatrix& design, double noise_variance,
                                     const PriorStatistics& prior) {
  check_noise_variance(noise_variance);
  check_prior_shape(design, prior);
  if (design.rows() == 0) {
    return hermitian_part(prior.covariance);
  }
  if (prior_is_near_singular(prior.covariance)) {
    return observation_space(design, noise_variance, prior.covariance).covariance;
  }
  return gram(lmmse_error_factor(design, noise_variance, prior));
}

EstimationResult ls_estimate(const ComplexMatrix& design, const ComplexVector& observations,
                             double noise_variance) {
  if (observations.size() != design.rows()) {
    throw DimensionMismatch("ls_estimate: " + std::to_string(observations.size()) +
                            " observations for " + std::to_string(design.rows()) + " pilots");
  }
  if (!(noise_variance >= 0.0)) {
    throw InvalidArgument("ls_estimate: noise variance must be nonnegative");
  }
  check_full_rank(design);
  const Eigen::ColPivHouseholderQR<ComplexMatrix> qr(design);
  return {qr.solve(observations), noise_variance * gram(inverse_gram_factor(qr))};
}

EstimationResult lmmse_estimate(const ComplexMatrix& design, const ComplexVector& observations,
                                double noise_variance, const PriorStatistics& prior) {
  check_noise_variance(noise_variance);
  check_prior_shape(design, prior);
  if (observations.size() != design.rows()) {
    throw DimensionMismatch("lmmse_estimate: " + std::to_string(observations.size()) +
                            " observations for " + std::to_string(design.rows()) + " pilots");
  }
  if (design.rows() == 0) {
    return {prior.mean, hermitian_part(prior.covariance)};
  }
  const ComplexVector innovation = observations - design * prior.mean;
  if (prior_is_near_singular(prior.covariance)) {
    const auto obs = observation_space(design, noise_variance, prior.covariance);
    return {prior.mean + obs.gain * innovation, obs.covariance};
  }
  const auto order = design.cols();
  const Eigen::ColPivHouseholderQR<ComplexMatrix> qr(
      regularized_stack(design, noise_variance, prior.covariance));
  ComplexVector rhs = ComplexVector::Zero(design.rows() + order);
  rhs.head(design.rows()) = innovation;
  return {prior.mean + qr.solve(rhs), noise_variance * gram(inverse_gram_factor(qr))};
}

ComplexMatrix prediction_covariance(const ComplexMatrix& design,
                                    const ComplexMatrix& prediction_design, double noise_variance,
                                    const std::optional<PriorStatistics>& prior) {
  if (prediction_design.cols() != design.cols()) {
    throw DimensionMismatch("prediction design must have L columns");
  }
  const ComplexMatrix factor = prior ? lmmse_error_factor(design, noise_variance, *prior)
                                    : ls_error_factor(design, noise_variance);
  return gram(prediction_design * factor);
}

PredictionMse::PredictionMse(const ComplexMatrix& coefficient_covariance) {
  if (coefficient_covariance.rows() != coefficient_covariance.cols()) {
    throw DimensionMismatch("PredictionMse: covariance must be square");
  }
  factor_adjoint_ = psd_factor(coefficient_covariance).adjoint();
}

PredictionMse PredictionMse::from_factor(const ComplexMatrix& factor) {
  if (factor.rows() != factor.cols()) {
    throw DimensionMismatch("PredictionMse: factor must be square");
  }
  PredictionMse mse;
  mse.factor_adjoint_ = factor.adjoint();
  return mse;
}

PredictionMse PredictionMse::build(const ComplexMatrix& design, double noise_variance,
                                   const std::optional<PriorStatistics>& prior) {
  return from_factor(prior ? lmmse_error_factor(design, noise_variance, *prior)
                           : ls_error_factor(design, noise_variance));
}

double PredictionMse::at_amplitude(double amplitude) const {
  // phi(s) = s (1, |s|, ..., |s|^(L-1)) and the phase drops out of |F^H phi|^2.
  const auto order = factor_adjoint_.cols();
  RealVector powers(order);
  double p = amplitude;
  for (Eigen::Index l = 0; l < order; ++l) {
    powers[l] = p;
    p *= amplitude;
  }
  return (factor_adjoint_ * powers.cast<Complex>()).squaredNorm();
}

double PredictionMse::maximum(double max_amplitude) const {
  if (!(max_amplitude > 0.0)) {
    throw InvalidArgument("max_prediction_mse: max amplitude must be positive");
  }
  const double step = max_amplitude / (kMaxSearchGrid - 1);
  std::vector<double> values(kMaxSearchGrid);
  for (int i = 0; i < kMaxSearchGrid; ++i) {
    values[static_cast<std::size_t>(i)] = at_amplitude(i == kMaxSearchGrid - 1 ? max_amplitude : i * step);
  }
  double best = *std::max_element(values.begin(), values.end());
  for (int i = 0; i < kMaxSearchGrid; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const bool left_ok = i == 0 || values[idx] >= values[idx - 1];
    const bool right_ok = i == kMaxSearchGrid - 1 || values[idx] >= values[idx + 1];
    if (!(left_ok && right_ok)) {
      continue;
    }
    const double lo = std::max(0.0, (i - 1) * step);
    const double hi = std::min(max_amplitude, (i + 1) * step);
    best = std::max(best, golden_section_max(*this, lo, hi));
  }
  return best;
}

double PredictionMse::maximum_on_grid(double max_amplitude, int points) const {
  if (!(max_amplitude > 0.0) || points < 2) {
    throw InvalidArgument("maximum_on_grid: need a positive amplitude and at least two points");
  }
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double a = i == points - 1 ? max_amplitude : max_amplitude * i / (points - 1);
    best = std::max(best, at_amplitude(a));
  }
  return best;
}

double prediction_mse(const ComplexMatrix& design, Complex s, double noise_variance,
                      const std::optional<PriorStatistics>& prior) {
  return PredictionMse::build(design, noise_variance, prior)(s);
}

double max_prediction_mse(const ComplexMatrix& design, double noise_variance,
                          const std::optional<PriorStatistics>& prior, double max_amplitude) {
  return PredictionMse::build(design, noise_variance, prior).maximum(max_amplitude);
}

MseCurve sample_mse_curve(const PredictionMse& mse, double max_amplitude, int samples) {
  if (samples < 2) {
    throw InvalidArgument("sample_mse_curve: need at least two samples");
  }
  MseCurve curve;
  curve.amplitudes.reserve(static_cast<std::size_t>(samples));
  curve.mse_values.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double a = i == samples - 1 ? max_amplitude : max_amplitude * i / (samples - 1);
    curve.amplitudes.push_back(a);
    curve.mse_values.push_back(mse.at_amplitude(a));
  }
  return curve;
}

ComplexVector generate_noisy_observations(const PaPolynomial& model, const PilotSequence& pilots,
                                          double noise_variance, Rng& rng) {
  if (!(noise_variance >= 0.0)) {
    throw InvalidArgument("noise variance must be nonnegative");
  }
  std::normal_distribution<double> quadrature(0.0, std::sqrt(noise_variance / 2.0));
  ComplexVector r(pilots.size());
  for (int n = 0; n < pilots.size(); ++n) {
    const double re = quadrature(rng);
    const double im = quadrature(rng);
    r[n] = eval_polynomial(model, pilots.symbols()[n]) + Complex(re, im);
  }
  return r;
}

ComplexVector generate_noisy_observations(const PaPolynomial& model, const PilotSequence& pilots,
                                          const NoiseModel& noise) {
  Rng rng(noise.seed);
  return generate_noisy_observations(model, pilots, noise.variance, rng);
}

}  // namespace paota
