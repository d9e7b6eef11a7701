#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "paota/error.hpp"
#include "paota/estimators.hpp"
#include "paota/prior_builder.hpp"
#include "paota/training_design.hpp"
#include "test_util.hpp"

using namespace paota;
using paota::testing::min_eigenvalue;
using paota::testing::normal_equation_solve;
using paota::testing::random_complex;
using paota::testing::random_complex_vector;
using paota::testing::random_hpd;
using paota::testing::random_pilots;
using paota::testing::rel_frobenius;

namespace {

ComplexVector real_vec(std::initializer_list<double> values) {
  ComplexVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("ls_estimate scalar example") {
  const ComplexMatrix phi = build_design_matrix(real_vec({1.0}), 1);
  const auto result = ls_estimate(phi, real_vec({2.0}), 0.7);
  CHECK(std::abs(result.estimate[0] - Complex(2.0)) < 1e-15);
  CHECK(std::abs(result.error_covariance(0, 0) - Complex(0.7)) < 1e-15);
}

TEST_CASE("ls_estimate noiseless recovery and normal-equation oracle") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const int order = 1 + trial % 5;
    const int n = order + 2 + trial % 5;
    const ComplexMatrix phi = build_design_matrix(random_pilots(n, rng), order);
    const ComplexVector beta = random_complex_vector(order, rng);
    const auto exact = ls_estimate(phi, phi * beta, 1.0);
    CHECK((exact.estimate - beta).norm() <= 1e-10 * std::max(1.0, beta.norm()));

    const ComplexVector r = phi * beta + 0.1 * random_complex_vector(n, rng);
    const ComplexVector oracle = normal_equation_solve(phi, r);
    const auto noisy = ls_estimate(phi, r, 1.0);
    CHECK((noisy.estimate - oracle).norm() <= 1e-8 * oracle.norm());
  }
}

TEST_CASE("ls error covariance for pilots {0.5, 1}") {
  // Phi^H Phi = [[1.25, 1.125], [1.125, 1.0625]], det 1/16, inverse [[17,-18],[-18,20]].
  const ComplexMatrix phi = build_design_matrix(real_vec({0.5, 1.0}), 2);
  const auto result = ls_estimate(phi, real_vec({0.0, 0.0}), 1.0);
  const ComplexMatrix& c = result.error_covariance;
  CHECK(std::abs(c.determinant() - Complex(16.0)) < 1e-10);
  CHECK(std::abs(c(0, 0) - Complex(17.0)) < 1e-11);
  CHECK(std::abs(c(0, 1) - Complex(-18.0)) < 1e-11);
  CHECK(std::abs(c(1, 1) - Complex(20.0)) < 1e-11);
}

TEST_CASE("ls_estimate rank and dimension errors") {
  // Same magnitude, different phase: columns are proportional.
  const ComplexVector same_mag = real_vec({0.5, 0.0});
  ComplexVector pilots = same_mag;
  pilots[1] = Complex(0.0, 0.5);
  CHECK_THROWS_AS(ls_estimate(build_design_matrix(pilots, 2), real_vec({1.0, 1.0}), 1.0),
                  RankDeficient);
  CHECK_THROWS_AS(ls_estimate(build_design_matrix(real_vec({0.5, 1.0}), 3), real_vec({1.0, 1.0}), 1.0),
                  RankDeficient);
  CHECK_THROWS_AS(ls_estimate(build_design_matrix(real_vec({0.5, 1.0}), 2), real_vec({1.0}), 1.0),
                  DimensionMismatch);
}

TEST_CASE("lmmse_estimate examples") {
  SUBCASE("no pilots returns the prior") {
    Rng rng(7);
    const PriorStatistics prior{random_complex_vector(4, rng), random_hpd(4, rng)};
    const auto result = lmmse_estimate(ComplexMatrix(0, 4), ComplexVector(0), 0.5, prior);
    CHECK((result.estimate - prior.mean).norm() == 0.0);
    CHECK(rel_frobenius(result.error_covariance, prior.covariance) < 1e-15);
  }
  SUBCASE("scalar case") {
    const PriorStatistics prior{real_vec({0.0}), ComplexMatrix::Identity(1, 1)};
    const auto result =
        lmmse_estimate(build_design_matrix(real_vec({1.0}), 1), real_vec({1.0}), 1.0, prior);
    CHECK(std::abs(result.estimate[0] - Complex(0.5)) < 1e-15);
    CHECK(std::abs(result.error_covariance(0, 0) - Complex(0.5)) < 1e-15);
  }
  SUBCASE("vanishing noise approaches LS") {
    Rng rng(8);
    const int order = 5;
    const ComplexMatrix phi = build_design_matrix(allocate_pilots(order, 10, 1.0), order);
    const ComplexVector r = random_complex_vector(10, rng);
    const PriorStatistics prior{random_complex_vector(order, rng), random_hpd(order, rng)};
    const auto lmmse = lmmse_estimate(phi, r, 1e-12, prior);
    const auto ls = ls_estimate(phi, r, 1e-12);
    CHECK((lmmse.estimate - ls.estimate).norm() <= 1e-6 * ls.estimate.norm());
  }
  SUBCASE("invalid noise") {
    const PriorStatistics prior{real_vec({0.0}), ComplexMatrix::Identity(1, 1)};
    const ComplexMatrix phi = build_design_matrix(real_vec({1.0}), 1);
    CHECK_THROWS_AS(lmmse_estimate(phi, real_vec({1.0}), 0.0, prior), InvalidArgument);
    CHECK_THROWS_AS(lmmse_estimate(phi, real_vec({1.0}), -1.0, prior), InvalidArgument);
  }
  SUBCASE("prior order mismatch") {
    const PriorStatistics prior{real_vec({0.0, 0.0}), ComplexMatrix::Identity(2, 2)};
    CHECK_THROWS_AS(
        lmmse_estimate(build_design_matrix(real_vec({1.0}), 1), real_vec({1.0}), 1.0, prior),
        DimensionMismatch);
  }
}

TEST_CASE("lmmse matches the textbook formulas in both prior regimes") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int order = 2 + trial % 6;
    const int n = 1 + trial % 9;  // includes N < L
    const ComplexMatrix phi = build_design_matrix(random_pilots(n, rng), order);
    const ComplexVector r = random_complex_vector(n, rng);
    const double sigma2 = 0.05 + 0.1 * (trial % 4);

    // Well-conditioned prior: information form oracle.
    const PriorStatistics full{random_complex_vector(order, rng), random_hpd(order, rng, 0.5)};
    CHECK_FALSE(prior_is_near_singular(full.covariance));
    const ComplexMatrix a = phi.adjoint() * phi + sigma2 * full.covariance.inverse();
    const ComplexVector oracle = full.mean + a.inverse() * phi.adjoint() * (r - phi * full.mean);
    const auto est = lmmse_estimate(phi, r, sigma2, full);
    CHECK((est.estimate - oracle).norm() <= 1e-9 * oracle.norm());
    CHECK(rel_frobenius(est.error_covariance, sigma2 * a.inverse()) < 1e-9);

    // Rank-one prior: observation-space oracle.
    const ComplexVector u = random_complex_vector(order, rng);
    const PriorStatistics thin{random_complex_vector(order, rng), u * u.adjoint()};
    CHECK(prior_is_near_singular(thin.covariance));
    const ComplexMatrix s =
        phi * thin.covariance * phi.adjoint() + sigma2 * ComplexMatrix::Identity(n, n);
    const ComplexMatrix k = thin.covariance * phi.adjoint() * s.inverse();
    const auto est_thin = lmmse_estimate(phi, r, sigma2, thin);
    const ComplexVector oracle_thin = thin.mean + k * (r - phi * thin.mean);
    CHECK((est_thin.estimate - oracle_thin).norm() <= 1e-9 * oracle_thin.norm());
    const ComplexMatrix cov_thin = thin.covariance - k * phi * thin.covariance;
    CHECK((est_thin.error_covariance - cov_thin).norm() <= 1e-9 * thin.covariance.norm());
    CHECK(min_eigenvalue(est_thin.error_covariance) >= -1e-10);
  }
}

TEST_CASE("lmmse with fewer pilots than coefficients") {
  Rng rng(33);
  const ComplexMatrix phi = build_design_matrix(random_pilots(3, rng), 7);
  const PriorStatistics prior{random_complex_vector(7, rng), random_hpd(7, rng, 0.2)};
  const auto result = lmmse_estimate(phi, random_complex_vector(3, rng), 0.1, prior);
  CHECK(min_eigenvalue(result.error_covariance) >= -1e-10);
  CHECK(result.error_covariance.trace().real() < prior.covariance.trace().real());
}

TEST_CASE("PriorStatistics validation") {
  const PriorStatistics ok{real_vec({1.0, 0.0}), ComplexMatrix::Identity(2, 2)};
  CHECK_NOTHROW(ok.validate());
  ComplexMatrix not_hermitian = ComplexMatrix::Identity(2, 2);
  not_hermitian(0, 1) = Complex(0.0, 0.5);
  CHECK_THROWS_AS((PriorStatistics{real_vec({1.0, 0.0}), not_hermitian}.validate()),
                  InvalidArgument);
  ComplexMatrix indefinite = ComplexMatrix::Identity(2, 2);
  indefinite(1, 1) = -1e-3;
  CHECK_THROWS_AS((PriorStatistics{real_vec({1.0, 0.0}), indefinite}.validate()), InvalidArgument);
  CHECK_THROWS_AS((PriorStatistics{real_vec({1.0}), ComplexMatrix::Identity(2, 2)}.validate()),
                  DimensionMismatch);
}

TEST_CASE("prediction_covariance examples") {
  Rng rng(41);
  SUBCASE("N = L projector trace") {
    for (int order = 1; order <= 8; ++order) {
      const ComplexMatrix phi = build_design_matrix(random_pilots(order, rng), order);
      const ComplexMatrix c = prediction_covariance(phi, phi, 0.3, std::nullopt);
      CHECK(std::abs(c.trace().real() - 0.3 * order) < 1e-6 * order);
    }
  }
  SUBCASE("optimal design support points give sigma^2") {
    for (int order = 2; order <= 7; ++order) {
      const ComplexMatrix phi = build_design_matrix(allocate_pilots(order, order, 1.0), order);
      for (double t : optimal_support_points(order)) {
        const ComplexMatrix row = build_prediction_vector(t, order).transpose();
        const ComplexMatrix c = prediction_covariance(phi, row, 1.0, std::nullopt);
        CHECK(c(0, 0).real() == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
  }
  SUBCASE("prior never increases the covariance") {
    for (int trial = 0; trial < 20; ++trial) {
      const int order = 2 + trial % 6;
      const ComplexMatrix phi = build_design_matrix(random_pilots(order + 2, rng), order);
      const ComplexMatrix phi_t = build_design_matrix(random_pilots(6, rng), order);
      const PriorStatistics prior{random_complex_vector(order, rng), random_hpd(order, rng)};
      const ComplexMatrix diff = prediction_covariance(phi, phi_t, 0.5, std::nullopt) -
                                 prediction_covariance(phi, phi_t, 0.5, prior);
      CHECK(min_eigenvalue(diff) >= -1e-10);
    }
  }
  CHECK_THROWS_AS(prediction_covariance(build_design_matrix(random_pilots(3, rng), 3),
                                        build_design_matrix(random_pilots(3, rng), 2), 1.0,
                                        std::nullopt),
                  DimensionMismatch);
}

TEST_CASE("prediction_mse examples") {
  const ComplexMatrix phi = build_design_matrix(real_vec({0.5, 1.0}), 2);
  CHECK(prediction_mse(phi, 0.0, 1.0, std::nullopt) == 0.0);
  CHECK(prediction_mse(phi, 1.0, 1.0, std::nullopt) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prediction_mse(phi, 0.5, 1.0, std::nullopt) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("prediction MSE depends only on the amplitude") {
  Rng rng(55);
  std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    const int order = 1 + trial % 5;
    const ComplexMatrix phi = build_design_matrix(random_pilots(order + 2, rng), order);
    const PredictionMse mse = PredictionMse::build(phi, 1.0, std::nullopt);
    const double a = 0.05 * (trial + 1);
    const double base = mse(Complex(a, 0.0));
    for (int k = 0; k < 10; ++k) {
      // |a e^{j theta}| may differ from a in the last bit.
      CHECK(mse(std::polar(a, theta(rng))) == doctest::Approx(base).epsilon(1e-12));
    }
    // Agrees with phi^H (Phi^H Phi)^-1 phi evaluated in long double.
    const ComplexMatrix v = build_prediction_vector(std::polar(a, 0.3), order).transpose();
    const double oracle = paota::testing::ls_prediction_oracle(phi, v, 1.0)(0, 0).real();
    CHECK(base == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("max_prediction_mse examples") {
  const double opt5 = max_prediction_mse(build_design_matrix(allocate_pilots(5, 5, 1.0), 5), 1.0,
                                         std::nullopt, 1.0);
  CHECK(std::abs(opt5 - 1.0) < 1e-6);
  const double unif5 =
      max_prediction_mse(build_design_matrix(uniform_pilots(5, 1.0), 5), 1.0, std::nullopt, 1.0);
  CHECK(unif5 == doctest::Approx(2.54201632831145).epsilon(1e-3));
  const double unif7 =
      max_prediction_mse(build_design_matrix(uniform_pilots(7, 1.0), 7), 1.0, std::nullopt, 1.0);
  CHECK(unif7 == doctest::Approx(9.10700131015958).epsilon(1e-3));
}

TEST_CASE("minimax bound sigma^2 L / N for the optimal design") {
  for (int order = 1; order <= 10; ++order) {
    for (int k : {1, 2}) {
      const int n = k * order;
      const ComplexMatrix phi = build_design_matrix(allocate_pilots(order, n, 1.0), order);
      const double d = max_prediction_mse(phi, 1.0, std::nullopt, 1.0);
      CHECK(d == doctest::Approx(static_cast<double>(order) / n).epsilon(1e-6));
    }
  }
}

TEST_CASE("phase rotations leave the Gram matrix unchanged") {
  Rng rng(61);
  std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
  const PilotSequence base = allocate_pilots(6, 12, 1.0);
  const ComplexMatrix phi = build_design_matrix(base, 6);
  const ComplexMatrix gram = phi.adjoint() * phi;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> phases(12);
    for (double& p : phases) p = theta(rng);
    const ComplexMatrix rotated = build_design_matrix(base.with_phases(phases), 6);
    CHECK((rotated.adjoint() * rotated - gram).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("generate_noisy_observations") {
  const PaPolynomial model(real_vec({1.0, -0.2, 0.05}));
  const PilotSequence pilots = allocate_pilots(3, 6, 1.0);
  const ComplexMatrix phi = build_design_matrix(pilots, 3);

  SUBCASE("tiny variance reproduces the noiseless response") {
    const ComplexVector r = generate_noisy_observations(model, pilots, NoiseModel{1e-30, 5});
    CHECK((r - phi * model.coefficients()).norm() < 1e-10);
  }
  SUBCASE("fixed seed is deterministic") {
    const NoiseModel noise{0.5, 1234};
    const ComplexVector a = generate_noisy_observations(model, pilots, noise);
    const ComplexVector b = generate_noisy_observations(model, pilots, noise);
    CHECK((a - b).norm() == 0.0);
    const ComplexVector c = generate_noisy_observations(model, pilots, NoiseModel{0.5, 1235});
    CHECK((a - c).norm() > 0.0);
  }
  SUBCASE("empirical noise moments") {
    // 10^5 complex samples: variance of |w|^2 mean has relative sd 1/sqrt(1e5) ~ 0.3%.
    const double sigma2 = 0.8;
    const PaPolynomial zero(real_vec({0.0}));
    const PilotSequence many(ComplexVector::Ones(100000), 1.0);
    Rng rng(99);
    const ComplexVector w = generate_noisy_observations(zero, many, sigma2, rng);
    const double total = w.squaredNorm() / static_cast<double>(w.size());
    const double real_part = w.real().squaredNorm() / static_cast<double>(w.size());
    CHECK(std::abs(total - sigma2) < 0.02 * sigma2);
    CHECK(std::abs(real_part - sigma2 / 2) < 0.02 * sigma2 / 2);
    CHECK(std::abs(w.mean()) < 0.02);
  }
}

TEST_CASE("LS is unbiased over 10^4 trials") {
  const int order = 4;
  const PilotSequence pilots = allocate_pilots(order, 8, 1.0);
  const ComplexMatrix phi = build_design_matrix(pilots, order);
  const PaPolynomial model(real_vec({1.0, 0.1, -0.3, 0.05}));
  const double sigma2 = 0.01;
  constexpr int kTrials = 10000;
  ComplexVector bias = ComplexVector::Zero(order);
  for (int t = 0; t < kTrials; ++t) {
    Rng rng(derive_seed(777, static_cast<std::uint64_t>(t)));
    const ComplexVector r = generate_noisy_observations(model, pilots, sigma2, rng);
    bias += ls_estimate(phi, r, sigma2).estimate - model.coefficients();
  }
  bias /= kTrials;
  const double trace_inv = (phi.adjoint() * phi).inverse().trace().real();
  CHECK(bias.norm() <= 5.0 * std::sqrt(sigma2) * std::sqrt(trace_inv / kTrials));
}

TEST_CASE("LMMSE converges to LS at high SNR with the Rapp prior") {
  PriorConfig config;
  config.seed = 1;
  const PriorStatistics prior = build_prior(config, RappDistribution{});
  const PilotSequence pilots = allocate_pilots(7, 7, 1.0);
  const ComplexMatrix phi = build_design_matrix(pilots, 7);
  const PaPolynomial truth = fit_polynomial_to_curve(RappParameters{1.05, 0.95, 2.1}, 7,
                                                     default_fit_grid());
  // The gap shrinks roughly in proportion to sigma^2. The prior has
  // eigenvalues near 1e-9, so it only drops below 1e-4 around 1e-14.
  double previous = std::numeric_limits<double>::infinity();
  for (double sigma2 : {1e-8, 1e-10, 1e-12, 1e-14, 1e-16}) {
    const ComplexVector r = generate_noisy_observations(truth, pilots, NoiseModel{sigma2, 3});
    const auto ls = ls_estimate(phi, r, sigma2);
    const auto lmmse = lmmse_estimate(phi, r, sigma2, prior);
    const double gap = (lmmse.estimate - ls.estimate).norm() / ls.estimate.norm();
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous <= 1e-4);
}

TEST_CASE("covariance ordering on random configurations") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int order = 1 + trial % 8;
    const ComplexMatrix phi = build_design_matrix(random_pilots(order + trial % 4, rng), order);
    const double sigma2 = std::pow(10.0, -3.0 + (trial % 6));
    ComplexMatrix c = random_hpd(order, rng, 0.0);
    if (trial % 3 == 0) {
      const ComplexVector u = random_complex_vector(order, rng);
      c = u * u.adjoint();
    }
    const PriorStatistics prior{ComplexVector::Zero(order), c};
    const ComplexMatrix diff =
        ls_error_covariance(phi, sigma2) - lmmse_error_covariance(phi, sigma2, prior);
    CHECK(min_eigenvalue(diff) >= -1e-10 * std::max(1.0, ls_error_covariance(phi, sigma2).norm()));
  }
}
