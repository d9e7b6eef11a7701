#include "paota/experiments.hpp"

#include <cmath>
#include <string>

#include "paota/error.hpp"

namespace paota {
namespace {

PriorConfig prior_config(const PriorSetup& setup, int order, PriorMode mode) {
  PriorConfig config;
  config.realizations = setup.realizations;
  config.fit_order = order;
  config.fit_grid = setup.fit_grid;
  config.mode = mode;
  config.seed = setup.seed;
  return config;
}

std::optional<PriorStatistics> prior_for(EstimatorKind estimator,
                                         const std::vector<ComplexVector>& samples) {
  switch (estimator) {
    case EstimatorKind::kLs:
      return std::nullopt;
    case EstimatorKind::kLmmseCoherent:
      return prior_from_samples(samples, PriorMode::kCoherent);
    case EstimatorKind::kLmmseNoncoherent:
      return prior_from_samples(samples, PriorMode::kNoncoherent);
  }
  return std::nullopt;
}

}  // namespace

double noise_variance_for_snr(double snr_db, double p_max, int num_pilots,
                              SnrConvention convention) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return convention == SnrConvention::kPerSymbol ? p_max / snr : p_max / (num_pilots * snr);
}

std::vector<double> default_snr_sweep_db() {
  std::vector<double> sweep;
  for (int k = 0; k <= 9; ++k) {
    sweep.push_back(20.0 * k / 3.0);
  }
  return sweep;
}

PilotSequence make_pilots(Allocation allocation, int order, int num_pilots, double max_amplitude) {
  return allocation == Allocation::kUniform ? uniform_pilots(num_pilots, max_amplitude)
                                            : allocate_pilots(order, num_pilots, max_amplitude);
}

Fig1Result run_fig1(int order, int num_pilots, double noise_variance, int samples) {
  const PilotSequence uniform = uniform_pilots(num_pilots, 1.0);
  const PilotSequence optimal = allocate_pilots(order, num_pilots, 1.0);
  const auto mse_uniform =
      PredictionMse::build(build_design_matrix(uniform, order), noise_variance, std::nullopt);
  const auto mse_optimal =
      PredictionMse::build(build_design_matrix(optimal, order), noise_variance, std::nullopt);
  const MseCurve u = sample_mse_curve(mse_uniform, 1.0, samples);
  const MseCurve o = sample_mse_curve(mse_optimal, 1.0, samples);

  Fig1Result result{CsvTable({"amplitude", "mse_uniform", "mse_optimal"}),
                    CsvTable({"index", "uniform_amp", "optimal_amp"})};
  for (std::size_t i = 0; i < u.amplitudes.size(); ++i) {
    result.curves.add_row({u.amplitudes[i], u.mse_values[i], o.mse_values[i]});
  }
  for (int n = 0; n < num_pilots; ++n) {
    result.pilots.add_row({static_cast<double>(n), std::abs(uniform.symbols()[n]),
                           std::abs(optimal.symbols()[n])});
  }
  return result;
}

double figure_max_mse(const ComplexMatrix& design, double noise_variance,
                      const std::optional<PriorStatistics>& prior, double max_amplitude,
                      int sample_points) {
  if (sample_points < 0) {
    throw InvalidArgument("sample_points must be nonnegative");
  }
  const PredictionMse mse = PredictionMse::build(design, noise_variance, prior);
  return sample_points == 0 ? mse.maximum(max_amplitude)
                            : mse.maximum_on_grid(max_amplitude, sample_points);
}

CsvTable run_fig2(int max_order, int sample_points) {
  CsvTable table({"L", "gain_ratio"});
  for (int order = 1; order <= max_order; ++order) {
    const double d_uniform = figure_max_mse(build_design_matrix(uniform_pilots(order, 1.0), order),
                                            1.0, std::nullopt, 1.0, sample_points);
    const double d_optimal =
        figure_max_mse(build_design_matrix(allocate_pilots(order, order, 1.0), order), 1.0,
                       std::nullopt, 1.0, sample_points);
    table.add_row({static_cast<double>(order), d_uniform / d_optimal});
  }
  return table;
}

CsvTable run_fig3(int order, const PriorSetup& setup) {
  const PriorConfig config = prior_config(setup, order, PriorMode::kCoherent);
  const std::vector<RappParameters> draws = draw_realizations(config, setup.distribution);
  const RappParameters nominal = setup.distribution.nominal();
  const PaPolynomial fit = fit_polynomial_to_curve(nominal, order, setup.fit_grid);

  CsvTable table({"amplitude", "nominal_rapp", "poly_fit", "mean", "lower_band", "upper_band"});
  const double count = static_cast<double>(draws.size());
  for (double a : setup.fit_grid) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& p : draws) {
      const double y = rapp_response(p, a);
      sum += y;
      sum_sq += y * y;
    }
    const double mean = sum / count;
    const double stddev = std::sqrt(std::max(0.0, sum_sq / count - mean * mean));
    table.add_row({a, rapp_response(nominal, a), std::abs(eval_polynomial(fit, a)), mean,
                   mean - 2.0 * stddev, mean + 2.0 * stddev});
  }
  return table;
}

CsvTable run_fig4(const Fig4Config& config) {
  const double max_amplitude = std::sqrt(config.p_max);
  const std::vector<ComplexVector> samples = fit_realizations(
      prior_config(config.prior, config.order, PriorMode::kCoherent), config.prior.distribution);
  const std::optional<PriorStatistics> priors[] = {
      std::nullopt, prior_from_samples(samples, PriorMode::kCoherent),
      prior_from_samples(samples, PriorMode::kNoncoherent)};
  const ComplexMatrix designs[] = {
      build_design_matrix(make_pilots(Allocation::kUniform, config.order, config.num_pilots,
                                      max_amplitude),
                          config.order),
      build_design_matrix(make_pilots(Allocation::kOptimal, config.order, config.num_pilots,
                                      max_amplitude),
                          config.order)};

  std::vector<std::string> header{"snr_db"};
  for (auto name : kFig4Columns) {
    header.emplace_back(name);
  }
  CsvTable table(header);
  for (double snr_db : config.snr_db) {
    const double sigma2 =
        noise_variance_for_snr(snr_db, config.p_max, config.num_pilots, config.convention);
    std::vector<double> row{snr_db};
    for (const auto& design : designs) {
      for (const auto& prior : priors) {
        row.push_back(
            figure_max_mse(design, sigma2, prior, max_amplitude, config.sample_points));
      }
    }
    table.add_row(std::move(row));
  }
  return table;
}

void ExperimentConfig::validate() const {
  if (noise_variance.has_value() == !snr_db.empty()) {
    throw InvalidArgument("specify exactly one of a noise variance or an SNR sweep");
  }
  if (noise_variance && !(*noise_variance > 0.0)) {
    throw InvalidArgument("noise variance must be positive");
  }
  if (!(p_max > 0.0)) {
    throw InvalidArgument("P_max must be positive");
  }
}

CsvTable run_sweep(const ExperimentConfig& config) {
  config.validate();
  const double max_amplitude = std::sqrt(config.p_max);
  const ComplexMatrix design = build_design_matrix(
      make_pilots(config.allocation, config.order, config.num_pilots, max_amplitude),
      config.order);
  std::vector<ComplexVector> samples;
  if (config.estimator != EstimatorKind::kLs) {
    samples = fit_realizations(prior_config(config.prior, config.order, PriorMode::kCoherent),
                               config.prior.distribution);
  }
  const std::optional<PriorStatistics> prior = prior_for(config.estimator, samples);

  if (config.noise_variance) {
    CsvTable table({"sigma2", "d"});
    table.add_row({*config.noise_variance,
                   max_prediction_mse(design, *config.noise_variance, prior, max_amplitude)});
    return table;
  }
  CsvTable table({"snr_db", "sigma2", "d"});
  for (double snr_db : config.snr_db) {
    const double sigma2 =
        noise_variance_for_snr(snr_db, config.p_max, config.num_pilots, config.convention);
    table.add_row({snr_db, sigma2, max_prediction_mse(design, sigma2, prior, max_amplitude)});
  }
  return table;
}

CsvTable design_table(int order, int num_pilots, double max_amplitude, PhasePolicy phases) {
  const PilotSequence pilots = allocate_pilots(order, num_pilots, max_amplitude, phases);
  CsvTable table({"index", "amp", "phase"});
  for (int n = 0; n < pilots.size(); ++n) {
    const Complex s = pilots.symbols()[n];
    table.add_row({static_cast<double>(n), std::abs(s), std::arg(s)});
  }
  return table;
}

PilotSequence pilots_from_table(const CsvTable& table) {
  const std::size_t amp = table.column_index("amp");
  const std::size_t phase = table.column_index("phase");
  ComplexVector symbols(static_cast<Eigen::Index>(table.num_rows()));
  double max_amplitude = 0.0;
  for (std::size_t n = 0; n < table.num_rows(); ++n) {
    const auto& row = table.rows()[n];
    if (row[amp] < 0.0) {
      throw InvalidArgument("pilot " + std::to_string(n) + " has negative amplitude");
    }
    symbols[static_cast<Eigen::Index>(n)] = std::polar(row[amp], row[phase]);
    max_amplitude = std::max(max_amplitude, row[amp]);
  }
  return PilotSequence(std::move(symbols), max_amplitude > 0.0 ? max_amplitude : 1.0);
}

ComplexVector observations_from_table(const CsvTable& table) {
  const std::size_t re = table.column_index("re");
  const std::size_t im = table.column_index("im");
  ComplexVector r(static_cast<Eigen::Index>(table.num_rows()));
  for (std::size_t n = 0; n < table.num_rows(); ++n) {
    r[static_cast<Eigen::Index>(n)] = Complex(table.rows()[n][re], table.rows()[n][im]);
  }
  return r;
}

CsvTable estimate_table(const PilotSequence& pilots, const ComplexVector& observations, int order,
                        double noise_variance, const std::optional<PriorStatistics>& prior) {
  const ComplexMatrix design = build_design_matrix(pilots, order);
  const EstimationResult result = prior
                                      ? lmmse_estimate(design, observations, noise_variance, *prior)
                                      : ls_estimate(design, observations, noise_variance);
  std::vector<std::string> header{"index", "re", "im"};
  for (int c = 0; c < order; ++c) {
    header.push_back("cov_re_" + std::to_string(c));
    header.push_back("cov_im_" + std::to_string(c));
  }
  CsvTable table(header, 17);
  for (int l = 0; l < order; ++l) {
    std::vector<double> row{static_cast<double>(l), result.estimate[l].real(),
                            result.estimate[l].imag()};
    for (int c = 0; c < order; ++c) {
      row.push_back(result.error_covariance(l, c).real());
      row.push_back(result.error_covariance(l, c).imag());
    }
    table.add_row(std::move(row));
  }
  return table;
}

std::string_view to_string(SnrConvention convention) {
  return convention == SnrConvention::kPerSymbol ? "per-symbol" : "total";
}

std::string_view to_string(Allocation allocation) {
  return allocation == Allocation::kUniform ? "uniform" : "optimal";
}

std::string_view to_string(EstimatorKind estimator) {
  switch (estimator) {
    case EstimatorKind::kLs:
      return "ls";
    case EstimatorKind::kLmmseCoherent:
      return "lmmse-coh";
    case EstimatorKind::kLmmseNoncoherent:
      return "lmmse-noncoh";
  }
  return "ls";
}

}  // namespace paota
