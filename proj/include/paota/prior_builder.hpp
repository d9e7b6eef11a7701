#pragma once

// LMMSE prior statistics from Monte-Carlo draws of random Rapp amplifiers,
// each fitted with an order-L polynomial.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "paota/estimators.hpp"
#include "paota/pa_model.hpp"

namespace paota {

/// Independent Gaussian laws for the Rapp parameters. A zero variance gives
/// a degenerate (deterministic) parameter.
struct RappDistribution {
  double gain_mean = 1.0;
  double gain_variance = 0.01;
  double v_sat_mean = 1.0;
  double v_sat_variance = 0.01;
  double smoothness_mean = 2.0;
  double smoothness_variance = 0.1;

  void validate() const;
  RappParameters nominal() const { return {gain_mean, v_sat_mean, smoothness_mean}; }
};

enum class PriorMode { kCoherent, kNoncoherent };

/// 0, 0.0625, ..., 1.5 (25 points).
std::vector<double> default_fit_grid();

/// Uniform grid from 0 to max_amplitude with the given step (inclusive).
std::vector<double> make_fit_grid(double max_amplitude, double step);

struct PriorConfig {
  int realizations = 100;
  int fit_order = 7;
  std::vector<double> fit_grid = default_fit_grid();
  PriorMode mode = PriorMode::kCoherent;
  std::uint64_t seed = 1;

  void validate() const;
};

/// One independent draw per parameter; nonpositive draws are redrawn.
RappParameters draw_rapp_params(const RappDistribution& dist, Rng& rng);

/// Unweighted LS fit of the order-L polynomial to the Rapp AM/AM curve on
/// the real amplitude grid. Coefficients are real-valued.
PaPolynomial fit_polynomial_to_curve(const RappParameters& params, int order,
                                     const std::vector<double>& grid);

/// Draws config.realizations Rapp amplifiers (realization m uses its own
/// generator seeded with derive_seed(config.seed, m)).
std::vector<RappParameters> draw_realizations(const PriorConfig& config,
                                              const RappDistribution& dist);

/// Fitted coefficient vectors beta_m, one per realization.
std::vector<ComplexVector> fit_realizations(const PriorConfig& config,
                                            const RappDistribution& dist);

/// Coherent: sample mean and centered covariance (1/M) sum b b^H - mean mean^H.
/// Noncoherent: zero mean and raw second moment (1/M) sum b b^H.
PriorStatistics prior_from_samples(const std::vector<ComplexVector>& samples, PriorMode mode);

PriorStatistics build_prior(const PriorConfig& config, const RappDistribution& dist);

/// Mean file: header `index,re,im`. Covariance file: one row per matrix row,
/// header `row,re_0,im_0,...,re_{L-1},im_{L-1}`. Full double precision.
void write_prior_csv(const PriorStatistics& prior, const std::filesystem::path& mean_path,
                     const std::filesystem::path& covariance_path);

PriorStatistics read_prior_csv(const std::filesystem::path& mean_path,
                               const std::filesystem::path& covariance_path);

}  // namespace paota
