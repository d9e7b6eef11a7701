#pragma once

// Complex LS and LMMSE estimation of the PA coefficients, analytic error
// covariances and the prediction MSE over the PA input range.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "paota/pa_model.hpp"

namespace paota {

/// Generator type used for every seeded draw in the library.
using Rng = std::mt19937_64;

/// Per-trial seed so concurrent trials never share a generator.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return base_seed ^ index;
}

/// Circular complex Gaussian noise; variance is the total over both quadratures.
struct NoiseModel {
  double variance = 1.0;
  std::uint64_t seed = 0;
};

struct PriorStatistics {
  ComplexVector mean;
  ComplexMatrix covariance;

  int order() const { return static_cast<int>(mean.size()); }

  /// Hermitian within 1e-12 and no eigenvalue below -1e-10.
  void validate() const;
};

struct EstimationResult {
  ComplexVector estimate;
  ComplexMatrix error_covariance;
};

/// sigma^2 (Phi^H Phi)^-1, formed from the QR factor of Phi.
ComplexMatrix ls_error_covariance(const ComplexMatrix& design, double noise_variance);

/// sigma^2 (Phi^H Phi + sigma^2 C^-1)^-1; switches to the observation-space
/// form C - C Phi^H (Phi C Phi^H + sigma^2 I)^-1 Phi C when C is near singular.
ComplexMatrix lmmse_error_covariance(const ComplexMatrix& design, double noise_variance,
                                     const PriorStatistics& prior);

/// Least squares via column-pivoted QR. Throws RankDeficient when N < L or
/// cond(Phi) >= kConditionLimit.
EstimationResult ls_estimate(const ComplexMatrix& design, const ComplexVector& observations,
                             double noise_variance);

/// Linear MMSE estimate; valid for any N including N = 0.
EstimationResult lmmse_estimate(const ComplexMatrix& design, const ComplexVector& observations,
                                double noise_variance, const PriorStatistics& prior);

/// True when the prior covariance is too close to singular for the
/// information form (smallest eigenvalue <= 1e-12 trace / L).
bool prior_is_near_singular(const ComplexMatrix& covariance);

/// Error covariance of the predicted response at the rows of `prediction_design`.
/// Without a prior this is the LS covariance.
ComplexMatrix prediction_covariance(const ComplexMatrix& design,
                                    const ComplexMatrix& prediction_design, double noise_variance,
                                    const std::optional<PriorStatistics>& prior);

/// Square-root factors F with F F^H equal to the LS / LMMSE error covariance.
/// Prediction quantities are formed from F to avoid the cancellation of
/// phi^H C phi in the monomial basis.
ComplexMatrix ls_error_factor(const ComplexMatrix& design, double noise_variance);
ComplexMatrix lmmse_error_factor(const ComplexMatrix& design, double noise_variance,
                                 const PriorStatistics& prior);

/// Prediction MSE phi(s)^H C phi(s) = |F^H phi(s)|^2 as a function of the
/// input amplitude.
class PredictionMse {
 public:
  explicit PredictionMse(const ComplexMatrix& coefficient_covariance);
  static PredictionMse from_factor(const ComplexMatrix& factor);

  static PredictionMse build(const ComplexMatrix& design, double noise_variance,
                             const std::optional<PriorStatistics>& prior);

  double at_amplitude(double amplitude) const;
  double operator()(Complex s) const { return at_amplitude(std::abs(s)); }

  /// Maximum over amplitudes in [0, max_amplitude]: 2001-point grid, then
  /// golden-section refinement of every grid-local maximum to 1e-10.
  double maximum(double max_amplitude) const;

  /// Maximum over `points` equally spaced amplitudes from 0 to max_amplitude
  /// inclusive, without refinement.
  double maximum_on_grid(double max_amplitude, int points) const;

 private:
  PredictionMse() = default;
  ComplexMatrix factor_adjoint_;
};

double prediction_mse(const ComplexMatrix& design, Complex s, double noise_variance,
                      const std::optional<PriorStatistics>& prior);

double max_prediction_mse(const ComplexMatrix& design, double noise_variance,
                          const std::optional<PriorStatistics>& prior, double max_amplitude);

struct MseCurve {
  std::vector<double> amplitudes;
  std::vector<double> mse_values;
};

/// `samples` equally spaced amplitudes from 0 to max_amplitude inclusive.
MseCurve sample_mse_curve(const PredictionMse& mse, double max_amplitude, int samples);

/// r_n = f(s_n) + w_n, drawing w from `rng` (advanced in place).
ComplexVector generate_noisy_observations(const PaPolynomial& model, const PilotSequence& pilots,
                                          double noise_variance, Rng& rng);

/// Convenience overload seeding a fresh generator from noise.seed.
ComplexVector generate_noisy_observations(const PaPolynomial& model, const PilotSequence& pilots,
                                          const NoiseModel& noise);

}  // namespace paota
