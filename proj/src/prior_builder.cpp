#include "paota/prior_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "paota/csv.hpp"
#include "paota/error.hpp"

namespace paota {
namespace {

constexpr int kPriorCsvDigits = std::numeric_limits<double>::max_digits10;

double draw_positive(double mean, double variance, Rng& rng) {
  if (variance == 0.0) {
    return mean;
  }
  std::normal_distribution<double> law(mean, std::sqrt(variance));
  for (;;) {
    const double x = law(rng);
    if (x > 0.0) {
      return x;
    }
  }
}

}  // namespace

void RappDistribution::validate() const {
  if (!(gain_variance >= 0.0) || !(v_sat_variance >= 0.0) || !(smoothness_variance >= 0.0)) {
    throw InvalidArgument("RappDistribution: variances must be nonnegative");
  }
  if (!(gain_mean > 0.0) || !(v_sat_mean > 0.0) || !(smoothness_mean > 0.0)) {
    throw InvalidArgument("RappDistribution: means must be positive");
  }
}

std::vector<double> make_fit_grid(double max_amplitude, double step) {
  if (!(max_amplitude > 0.0) || !(step > 0.0)) {
    throw InvalidArgument("fit grid: max amplitude and step must be positive");
  }
  const auto count = static_cast<int>(std::floor(max_amplitude / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count) + 1);
  for (int k = 0; k <= count; ++k) {
    grid.push_back(k * step);
  }
  return grid;
}

std::vector<double> default_fit_grid() { return make_fit_grid(1.5, 0.0625); }

void PriorConfig::validate() const {
  if (realizations < 1) {
    throw InvalidArgument("PriorConfig: need at least one realization");
  }
  if (fit_order < 1) {
    throw InvalidArgument("PriorConfig: fit order must be at least 1");
  }
  std::set<double> distinct;
  for (double g : fit_grid) {
    if (g > 0.0) {
      distinct.insert(g);
    }
  }
  if (static_cast<int>(distinct.size()) < fit_order) {
    throw InvalidArgument("PriorConfig: fit grid needs at least L distinct positive points");
  }
}

RappParameters draw_rapp_params(const RappDistribution& dist, Rng& rng) {
  RappParameters p;
  p.gain = draw_positive(dist.gain_mean, dist.gain_variance, rng);
  p.v_sat = draw_positive(dist.v_sat_mean, dist.v_sat_variance, rng);
  p.smoothness = draw_positive(dist.smoothness_mean, dist.smoothness_variance, rng);
  return p;
}

PaPolynomial fit_polynomial_to_curve(const RappParameters& params, int order,
                                     const std::vector<double>& grid) {
  params.validate();
  if (order < 1) {
    throw InvalidArgument("fit_polynomial_to_curve: order must be at least 1");
  }
  std::set<double> distinct;
  for (double g : grid) {
    if (g < 0.0) {
      throw InvalidArgument("fit_polynomial_to_curve: grid amplitudes must be nonnegative");
    }
    if (g > 0.0) {
      distinct.insert(g);
    }
  }
  if (static_cast<int>(distinct.size()) < order) {
    throw RankDeficient("fit_polynomial_to_curve: grid has " + std::to_string(distinct.size()) +
                        " distinct positive points, need " + std::to_string(order));
  }
  const auto rows = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd basis(rows, order);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double g = grid[static_cast<std::size_t>(i)];
    double p = g;
    for (int l = 0; l < order; ++l) {
      basis(i, l) = p;
      p *= g;
    }
    target[i] = rapp_response(params, g);
  }
  const Eigen::VectorXd beta = basis.colPivHouseholderQr().solve(target);
  return PaPolynomial(beta.cast<Complex>());
}

std::vector<RappParameters> draw_realizations(const PriorConfig& config,
                                              const RappDistribution& dist) {
  config.validate();
  dist.validate();
  std::vector<RappParameters> draws;
  draws.reserve(static_cast<std::size_t>(config.realizations));
  for (int m = 0; m < config.realizations; ++m) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(m)));
    draws.push_back(draw_rapp_params(dist, rng));
  }
  return draws;
}

std::vector<ComplexVector> fit_realizations(const PriorConfig& config,
                                            const RappDistribution& dist) {
  std::vector<ComplexVector> samples;
  for (const auto& params : draw_realizations(config, dist)) {
    samples.push_back(fit_polynomial_to_curve(params, config.fit_order, config.fit_grid).coefficients());
  }
  return samples;
}

PriorStatistics prior_from_samples(const std::vector<ComplexVector>& samples, PriorMode mode) {
  if (samples.empty()) {
    throw InvalidArgument("prior_from_samples: no samples");
  }
  const auto order = samples.front().size();
  const double count = static_cast<double>(samples.size());
  ComplexVector mean = ComplexVector::Zero(order);
  ComplexMatrix second_moment = ComplexMatrix::Zero(order, order);
  for (const auto& b : samples) {
    if (b.size() != order) {
      throw DimensionMismatch("prior_from_samples: samples have different orders");
    }
    mean += b;
    second_moment.noalias() += b * b.adjoint();
  }
  mean /= count;
  second_moment /= count;
  second_moment = 0.5 * (second_moment + second_moment.adjoint()).eval();
  if (mode == PriorMode::kNoncoherent) {
    return {ComplexVector::Zero(order), second_moment};
  }
  ComplexMatrix centered = second_moment - mean * mean.adjoint();
  centered = 0.5 * (centered + centered.adjoint()).eval();
  return {mean, centered};
}

PriorStatistics build_prior(const PriorConfig& config, const RappDistribution& dist) {
  return prior_from_samples(fit_realizations(config, dist), config.mode);
}

void write_prior_csv(const PriorStatistics& prior, const std::filesystem::path& mean_path,
                     const std::filesystem::path& covariance_path) {
  const auto order = prior.mean.size();
  CsvTable mean({"index", "re", "im"}, kPriorCsvDigits);
  for (Eigen::Index l = 0; l < order; ++l) {
    mean.add_row({static_cast<double>(l), prior.mean[l].real(), prior.mean[l].imag()});
  }
  std::vector<std::string> header{"row"};
  for (Eigen::Index l = 0; l < order; ++l) {
    header.push_back("re_" + std::to_string(l));
    header.push_back("im_" + std::to_string(l));
  }
  CsvTable cov(header, kPriorCsvDigits);
  for (Eigen::Index r = 0; r < order; ++r) {
    std::vector<double> row{static_cast<double>(r)};
    for (Eigen::Index c = 0; c < order; ++c) {
      row.push_back(prior.covariance(r, c).real());
      row.push_back(prior.covariance(r, c).imag());
    }
    cov.add_row(std::move(row));
  }
  mean.write(mean_path);
  cov.write(covariance_path);
}

PriorStatistics read_prior_csv(const std::filesystem::path& mean_path,
                               const std::filesystem::path& covariance_path) {
  const CsvTable mean = CsvTable::read(mean_path);
  const CsvTable cov = CsvTable::read(covariance_path);
  if (mean.num_cols() != 3) {
    throw IoError("prior mean file must have columns index,re,im");
  }
  const auto order = static_cast<Eigen::Index>(mean.num_rows());
  if (order < 1) {
    throw IoError("prior mean file has no rows");
  }
  if (static_cast<Eigen::Index>(cov.num_rows()) != order ||
      static_cast<Eigen::Index>(cov.num_cols()) != 1 + 2 * order) {
    throw DimensionMismatch("prior covariance file is not " + std::to_string(order) + "x" +
                            std::to_string(order));
  }
  PriorStatistics prior{ComplexVector(order), ComplexMatrix(order, order)};
  for (Eigen::Index l = 0; l < order; ++l) {
    const auto& row = mean.rows()[static_cast<std::size_t>(l)];
    prior.mean[l] = Complex(row[1], row[2]);
  }
  for (Eigen::Index r = 0; r < order; ++r) {
    const auto& row = cov.rows()[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < order; ++c) {
      prior.covariance(r, c) = Complex(row[static_cast<std::size_t>(1 + 2 * c)],
                                       row[static_cast<std::size_t>(2 + 2 * c)]);
    }
  }
  prior.validate();
  return prior;
}

}  // namespace paota
