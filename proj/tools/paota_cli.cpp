// paota: pilot design and PA estimation experiments from the command line.
//
// Exit codes: 0 success, 2 usage error, 3 numerical error, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "paota/error.hpp"
#include "paota/experiments.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

void emit(const paota::CsvTable& table, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << table.to_string();
  } else {
    table.write(out);
  }
}

struct PriorFlags {
  int realizations = 100;
  std::uint64_t seed = 1;
  double fit_max = 1.5;
  double fit_step = 0.0625;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--realizations", realizations, "Random Rapp realizations for the prior")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Base seed for the prior draws");
    cmd->add_option("--fit-max", fit_max, "Upper end of the polynomial fit grid")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--fit-step", fit_step, "Spacing of the polynomial fit grid")
        ->check(CLI::PositiveNumber);
  }

  paota::PriorSetup setup() const {
    paota::PriorSetup s;
    s.realizations = realizations;
    s.seed = seed;
    s.fit_grid = paota::make_fit_grid(fit_max, fit_step);
    return s;
  }
};

const std::map<std::string, paota::SnrConvention> kConventions{
    {"per-symbol", paota::SnrConvention::kPerSymbol}, {"total", paota::SnrConvention::kTotal}};
const std::map<std::string, paota::Allocation> kAllocations{
    {"uniform", paota::Allocation::kUniform}, {"optimal", paota::Allocation::kOptimal}};
const std::map<std::string, paota::EstimatorKind> kEstimators{
    {"ls", paota::EstimatorKind::kLs},
    {"lmmse-coh", paota::EstimatorKind::kLmmseCoherent},
    {"lmmse-noncoh", paota::EstimatorKind::kLmmseNoncoherent}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air PA estimation: optimal pilot design, LS/LMMSE estimators, experiments"};
  app.require_subcommand(1);

  std::string out;
  int order = 7;
  int pilots = 7;
  double sigma2 = 1.0;
  std::vector<double> snr_db_list;
  std::string convention_name = "per-symbol";
  std::string allocation_name = "optimal";
  std::string estimator_name = "ls";
  double p_max = 1.0;
  PriorFlags prior_flags;

  // fig1
  auto* fig1 = app.add_subcommand("fig1", "LS prediction MSE curves, uniform vs optimal pilots");
  int fig1_samples = 501;
  std::string fig1_pilots_out;
  int fig1_order = 5;
  int fig1_pilots = 5;
  double fig1_sigma2 = 1.0;
  fig1->add_option("--order", fig1_order, "Polynomial order L")->capture_default_str();
  fig1->add_option("--pilots", fig1_pilots, "Number of pilots N")->capture_default_str();
  fig1->add_option("--sigma2", fig1_sigma2, "Noise variance")->capture_default_str();
  fig1->add_option("--samples", fig1_samples, "Amplitude samples in [0, 1]")->default_val(501);
  fig1->add_option("--pilots-out", fig1_pilots_out, "Write pilot amplitudes to this CSV");
  fig1->add_option("--out", out, "Output CSV (default stdout)");

  // fig2
  auto* fig2 = app.add_subcommand("fig2", "Maximal-MSE gain of optimal over uniform pilots");
  int fig2_max_order = 8;
  fig2->add_option("--max-order", fig2_max_order, "Largest L")->default_val(8)->check(
      CLI::PositiveNumber);
  int sample_points = 0;
  fig2->add_option("--sample-points", sample_points,
                   "Maximize over this many equally spaced amplitudes (0: refined search)")
      ->check(CLI::NonNegativeNumber);
  fig2->add_option("--out", out, "Output CSV (default stdout)");

  // fig3
  auto* fig3 = app.add_subcommand("fig3", "Random Rapp responses, nominal fit and 2-sigma band");
  fig3->add_option("--order", order, "Fit order L")->capture_default_str();
  prior_flags.add_to(fig3);
  fig3->add_option("--out", out, "Output CSV (default stdout)");

  // fig4
  auto* fig4 = app.add_subcommand("fig4", "Maximal prediction MSE vs SNR for LS/LMMSE");
  fig4->add_option("--order", order, "Polynomial order L")->capture_default_str();
  fig4->add_option("--pilots", pilots, "Number of pilots N")->capture_default_str();
  fig4->add_option("--snr-db-list", snr_db_list, "Comma-separated SNR points in dB")
      ->delimiter(',');
  fig4->add_option("--snr-convention", convention_name, "SNR to noise-variance mapping")
      ->check(CLI::IsMember(kConventions));
  fig4->add_option("--p-max", p_max, "Peak pilot power")->check(CLI::PositiveNumber);
  fig4->add_option("--sample-points", sample_points,
                   "Maximize over this many equally spaced amplitudes (0: refined search)")
      ->check(CLI::NonNegativeNumber);
  prior_flags.add_to(fig4);
  fig4->add_option("--out", out, "Output CSV (default stdout)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Maximal prediction MSE for one allocation/estimator");
  sweep->add_option("--order", order, "Polynomial order L")->capture_default_str();
  sweep->add_option("--pilots", pilots, "Number of pilots N")->capture_default_str();
  auto* sweep_sigma2 = sweep->add_option("--sigma2", sigma2, "Fixed noise variance");
  auto* sweep_snr =
      sweep->add_option("--snr-db-list", snr_db_list, "Comma-separated SNR points in dB")
          ->delimiter(',');
  sweep_sigma2->excludes(sweep_snr);
  sweep->add_option("--snr-convention", convention_name, "SNR to noise-variance mapping")
      ->check(CLI::IsMember(kConventions));
  sweep->add_option("--allocation", allocation_name, "Pilot allocation")
      ->check(CLI::IsMember(kAllocations));
  sweep->add_option("--estimator", estimator_name, "Estimator")
      ->check(CLI::IsMember(kEstimators));
  sweep->add_option("--p-max", p_max, "Peak pilot power")->check(CLI::PositiveNumber);
  prior_flags.add_to(sweep);
  sweep->add_option("--out", out, "Output CSV (default stdout)");

  // design
  auto* design = app.add_subcommand("design", "Emit the D-optimal pilot sequence");
  double max_amplitude = 1.0;
  std::optional<std::uint64_t> phase_seed;
  design->add_option("--order", order, "Polynomial order L")->required();
  design->add_option("--pilots", pilots, "Number of pilots N (multiple of L)")->required();
  design->add_option("--max-amplitude", max_amplitude, "Amplitude cap sqrt(P_max)")
      ->default_val(1.0);
  design->add_option("--random-phase-seed", phase_seed, "Draw uniform random phases");
  design->add_option("--out", out, "Output CSV (default stdout)");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "LS/LMMSE estimate from pilot and observation CSVs");
  std::string pilot_file;
  std::string obs_file;
  std::string prior_mean_file;
  std::string prior_cov_file;
  estimate->add_option("--pilot-file", pilot_file, "CSV with header index,amp,phase")->required();
  estimate->add_option("--obs-file", obs_file, "CSV with header index,re,im")->required();
  estimate->add_option("--order", order, "Polynomial order L")->required();
  estimate->add_option("--sigma2", sigma2, "Noise variance")->required();
  auto* mean_opt = estimate->add_option("--prior-mean", prior_mean_file, "Prior mean CSV");
  auto* cov_opt = estimate->add_option("--prior-cov", prior_cov_file, "Prior covariance CSV");
  mean_opt->needs(cov_opt);
  cov_opt->needs(mean_opt);
  estimate->add_option("--estimator", estimator_name,
                       "ls, or lmmse-coh/lmmse-noncoh with a Rapp-model prior")
      ->check(CLI::IsMember(kEstimators));
  prior_flags.add_to(estimate);
  estimate->add_option("--out", out, "Output CSV (default stdout)");

  // prior
  auto* prior_cmd = app.add_subcommand("prior", "Build and export an LMMSE prior");
  std::string mean_out;
  std::string cov_out;
  std::string mode_name = "coherent";
  prior_cmd->add_option("--order", order, "Fit order L")->capture_default_str();
  prior_cmd->add_option("--mode", mode_name, "coherent or noncoherent")
      ->check(CLI::IsMember({"coherent", "noncoherent"}));
  prior_flags.add_to(prior_cmd);
  prior_cmd->add_option("--mean-out", mean_out, "Mean CSV path")->required();
  prior_cmd->add_option("--cov-out", cov_out, "Covariance CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  const paota::SnrConvention convention = kConventions.at(convention_name);
  const paota::Allocation allocation = kAllocations.at(allocation_name);
  const paota::EstimatorKind estimator = kEstimators.at(estimator_name);

  try {
    if (*fig1) {
      const auto result = paota::run_fig1(fig1_order, fig1_pilots, fig1_sigma2, fig1_samples);
      emit(result.curves, out);
      if (!fig1_pilots_out.empty()) {
        result.pilots.write(fig1_pilots_out);
      }
    } else if (*fig2) {
      emit(paota::run_fig2(fig2_max_order, sample_points), out);
    } else if (*fig3) {
      emit(paota::run_fig3(order, prior_flags.setup()), out);
    } else if (*fig4) {
      paota::Fig4Config config;
      config.order = order;
      config.num_pilots = pilots;
      config.p_max = p_max;
      if (!snr_db_list.empty()) {
        config.snr_db = snr_db_list;
      }
      config.convention = convention;
      config.prior = prior_flags.setup();
      config.sample_points = sample_points;
      emit(paota::run_fig4(config), out);
    } else if (*sweep) {
      paota::ExperimentConfig config;
      config.order = order;
      config.num_pilots = pilots;
      config.p_max = p_max;
      if (sweep_sigma2->count() > 0) {
        config.noise_variance = sigma2;
      } else {
        config.snr_db = snr_db_list.empty() ? paota::default_snr_sweep_db() : snr_db_list;
      }
      config.convention = convention;
      config.allocation = allocation;
      config.estimator = estimator;
      config.prior = prior_flags.setup();
      emit(paota::run_sweep(config), out);
    } else if (*design) {
      const auto phases = phase_seed ? paota::PhasePolicy::uniform_random(*phase_seed)
                                     : paota::PhasePolicy::zero();
      emit(paota::design_table(order, pilots, max_amplitude, phases), out);
    } else if (*estimate) {
      const auto pilot_seq = paota::pilots_from_table(paota::CsvTable::read(pilot_file));
      const auto observations = paota::observations_from_table(paota::CsvTable::read(obs_file));
      std::optional<paota::PriorStatistics> prior;
      if (!prior_mean_file.empty()) {
        prior = paota::read_prior_csv(prior_mean_file, prior_cov_file);
      } else if (estimator != paota::EstimatorKind::kLs) {
        paota::PriorConfig config;
        const auto setup = prior_flags.setup();
        config.realizations = setup.realizations;
        config.seed = setup.seed;
        config.fit_grid = setup.fit_grid;
        config.fit_order = order;
        config.mode = estimator == paota::EstimatorKind::kLmmseCoherent
                          ? paota::PriorMode::kCoherent
                          : paota::PriorMode::kNoncoherent;
        prior = paota::build_prior(config, setup.distribution);
      }
      emit(paota::estimate_table(pilot_seq, observations, order, sigma2, prior), out);
    } else if (*prior_cmd) {
      paota::PriorConfig config;
      const auto setup = prior_flags.setup();
      config.realizations = setup.realizations;
      config.seed = setup.seed;
      config.fit_grid = setup.fit_grid;
      config.fit_order = order;
      config.mode = mode_name == "coherent" ? paota::PriorMode::kCoherent
                                            : paota::PriorMode::kNoncoherent;
      paota::write_prior_csv(paota::build_prior(config, setup.distribution), mean_out, cov_out);
    }
  } catch (const paota::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const paota::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const paota::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
