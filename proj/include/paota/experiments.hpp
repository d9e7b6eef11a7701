#pragma once

// Deterministic experiment drivers that reproduce the MSE, gain, Rapp-band
// and SNR-sweep tables, plus the batch design/estimate entry points behind
// the command-line tool.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "paota/csv.hpp"
#include "paota/estimators.hpp"
#include "paota/prior_builder.hpp"
#include "paota/training_design.hpp"

namespace paota {

/// kPerSymbol: sigma^2 = P_max / SNR. kTotal: sigma^2 = P_max / (N SNR).
enum class SnrConvention { kPerSymbol, kTotal };
enum class Allocation { kUniform, kOptimal };
enum class EstimatorKind { kLs, kLmmseCoherent, kLmmseNoncoherent };

double noise_variance_for_snr(double snr_db, double p_max, int num_pilots,
                              SnrConvention convention);

/// 0, 20/3, ..., 60 dB (ten points).
std::vector<double> default_snr_sweep_db();

PilotSequence make_pilots(Allocation allocation, int order, int num_pilots, double max_amplitude);

struct PriorSetup {
  int realizations = 100;
  std::uint64_t seed = 1;
  std::vector<double> fit_grid = default_fit_grid();
  RappDistribution distribution{};
};

struct Fig1Result {
  CsvTable curves;  // amplitude, mse_uniform, mse_optimal
  CsvTable pilots;  // index, uniform_amp, optimal_amp
};

Fig1Result run_fig1(int order = 5, int num_pilots = 5, double noise_variance = 1.0,
                    int samples = 501);

/// Maximal MSE d(Phi) as used by the figure drivers: the refined continuous
/// search when sample_points is 0, otherwise the largest value on
/// sample_points equally spaced amplitudes.
double figure_max_mse(const ComplexMatrix& design, double noise_variance,
                      const std::optional<PriorStatistics>& prior, double max_amplitude,
                      int sample_points);

/// Columns L, gain_ratio with N = L and unit noise variance.
CsvTable run_fig2(int max_order = 8, int sample_points = 0);

/// Columns amplitude, nominal_rapp, poly_fit, mean, lower_band, upper_band.
/// Band is the empirical mean +/- 2 standard deviations of the Rapp output
/// amplitude across realizations.
CsvTable run_fig3(int order = 7, const PriorSetup& setup = {});

struct Fig4Config {
  int order = 7;
  int num_pilots = 7;
  double p_max = 1.0;
  std::vector<double> snr_db = default_snr_sweep_db();
  SnrConvention convention = SnrConvention::kPerSymbol;
  PriorSetup prior{};
  int sample_points = 0;  // see figure_max_mse
};

inline constexpr std::string_view kFig4Columns[] = {
    "unif_ls", "unif_lmmse_coh", "unif_lmmse_noncoh",
    "opt_ls",  "opt_lmmse_coh",  "opt_lmmse_noncoh"};

/// Columns snr_db followed by kFig4Columns: maximal prediction MSE for each
/// allocation x estimator. Both priors come from the same realizations.
CsvTable run_fig4(const Fig4Config& config);

/// One allocation x estimator at either a fixed noise variance or an SNR sweep.
struct ExperimentConfig {
  int order = 7;
  int num_pilots = 7;
  double p_max = 1.0;
  std::optional<double> noise_variance;
  std::vector<double> snr_db;
  SnrConvention convention = SnrConvention::kPerSymbol;
  Allocation allocation = Allocation::kOptimal;
  EstimatorKind estimator = EstimatorKind::kLs;
  PriorSetup prior{};

  /// Exactly one of noise_variance / snr_db must be set.
  void validate() const;
};

/// Columns snr_db, sigma2, d (sweep) or sigma2, d (fixed noise variance).
CsvTable run_sweep(const ExperimentConfig& config);

/// Columns index, amp, phase for the optimal allocation.
CsvTable design_table(int order, int num_pilots, double max_amplitude,
                      PhasePolicy phases = PhasePolicy::zero());

/// Pilot table `index,amp,phase` -> pilot sequence.
PilotSequence pilots_from_table(const CsvTable& table);
/// Observation table `index,re,im` -> complex vector.
ComplexVector observations_from_table(const CsvTable& table);

/// Columns index, re, im, then re_c/im_c of covariance row `index` for each
/// column c. Runs LMMSE when a prior is given, LS otherwise.
CsvTable estimate_table(const PilotSequence& pilots, const ComplexVector& observations, int order,
                        double noise_variance, const std::optional<PriorStatistics>& prior);

std::string_view to_string(SnrConvention convention);
std::string_view to_string(Allocation allocation);
std::string_view to_string(EstimatorKind estimator);

}  // namespace paota
