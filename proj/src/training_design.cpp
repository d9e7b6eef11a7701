#include "paota/training_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "paota/error.hpp"
#include "paota/estimators.hpp"

namespace paota {
namespace {

constexpr double kBisectionTolerance = 1e-8;
constexpr double kNewtonTolerance = 1e-15;
constexpr int kMaxNewtonSteps = 50;

// Second derivative from the Legendre ODE (1 - x^2) P'' = 2x P' - L(L+1) P.
double legendre_second_derivative(int degree, double x, const LegendreValue& v) {
  return (2.0 * x * v.derivative - degree * (degree + 1.0) * v.value) / (1.0 - x * x);
}

// Bisection on a sign-changing bracket down to kBisectionTolerance, then
// Newton polish kept inside the bracket.
template <typename F, typename DF>
double bracketed_root(double lo, double hi, F&& f, DF&& df) {
  double f_lo = f(lo);
  while (hi - lo > kBisectionTolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) {
      return mid;
    }
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < kMaxNewtonSteps; ++i) {
    const double slope = df(x);
    if (slope == 0.0) {
      break;
    }
    const double step = f(x) / slope;
    const double next = x - step;
    if (next <= lo || next >= hi) {
      break;
    }
    x = next;
    if (std::abs(step) < kNewtonTolerance) {
      break;
    }
  }
  return x;
}

// Mirrors a sorted root set so that r[i] == -r[n-1-i] holds bitwise.
void symmetrize(std::vector<double>& roots) {
  const std::size_t n = roots.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double magnitude = 0.5 * (roots[n - 1 - i] - roots[i]);
    roots[i] = -magnitude;
    roots[n - 1 - i] = magnitude;
  }
  if (n % 2 == 1) {
    roots[n / 2] = 0.0;
  }
}

// Roots of P_n built up through the interlacing of P_{n-1} and P_n roots.
std::vector<double> legendre_roots(int degree) {
  std::vector<double> roots;
  for (int n = 1; n <= degree; ++n) {
    std::vector<double> edges;
    edges.reserve(roots.size() + 2);
    edges.push_back(-1.0);
    edges.insert(edges.end(), roots.begin(), roots.end());
    edges.push_back(1.0);
    std::vector<double> next;
    next.reserve(static_cast<std::size_t>(n));
    const auto value = [n](double x) { return legendre_eval(n, x).value; };
    const auto slope = [n](double x) { return legendre_eval(n, x).derivative; };
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      next.push_back(bracketed_root(edges[i], edges[i + 1], value, slope));
    }
    symmetrize(next);
    roots = std::move(next);
  }
  return roots;
}

PilotSequence real_pilots(const std::vector<double>& amplitudes, double max_amplitude) {
  ComplexVector symbols(static_cast<Eigen::Index>(amplitudes.size()));
  for (std::size_t n = 0; n < amplitudes.size(); ++n) {
    symbols[static_cast<Eigen::Index>(n)] = amplitudes[n];
  }
  return PilotSequence(std::move(symbols), max_amplitude);
}

// Real Gram-matrix form of the D-criterion used by the exchange search:
// -log det(sum_n v(a_n) v(a_n)^T) with v(a) = (a, ..., a^L). This route is
// deliberately separate from d_criterion (QR of the complex design).
class GramCriterion {
 public:
  explicit GramCriterion(int order) : order_(order) {}

  Eigen::VectorXd powers(double amplitude) const {
    Eigen::VectorXd v(order_);
    double p = amplitude;
    for (int l = 0; l < order_; ++l) {
      v[l] = p;
      p *= amplitude;
    }
    return v;
  }

  Eigen::MatrixXd gram(const std::vector<double>& amplitudes) const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(order_, order_);
    for (double a : amplitudes) {
      const Eigen::VectorXd v = powers(a);
      g.noalias() += v * v.transpose();
    }
    return g;
  }

  double neg_log_det(const Eigen::MatrixXd& gram) const {
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      return std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
    if ((diag.array() <= 0.0).any()) {
      return std::numeric_limits<double>::infinity();
    }
    return -2.0 * diag.array().log().sum();
  }

 private:
  int order_;
};

}  // namespace

LegendreValue legendre_eval(int degree, double x) {
  if (degree < 0) {
    throw InvalidArgument("legendre_eval: degree must be nonnegative");
  }
  if (degree == 0) {
    return {1.0, 0.0};
  }
  double previous = 1.0;  // P_{n-1}
  double current = x;     // P_n
  for (int n = 1; n < degree; ++n) {
    const double next = ((2.0 * n + 1.0) * x * current - n * previous) / (n + 1.0);
    previous = current;
    current = next;
  }
  double derivative = 0.0;
  if (x == 1.0 || x == -1.0) {
    const double endpoint = 0.5 * degree * (degree + 1.0);
    derivative = (x > 0.0 || degree % 2 == 1) ? endpoint : -endpoint;
  } else {
    derivative = degree * (x * current - previous) / (x * x - 1.0);
  }
  return {current, derivative};
}

std::vector<double> legendre_derivative_roots(int degree) {
  if (degree < 1) {
    throw InvalidArgument("legendre_derivative_roots: degree must be at least 1");
  }
  const std::vector<double> roots = legendre_roots(degree);
  const auto slope = [degree](double x) { return legendre_eval(degree, x).derivative; };
  const auto curvature = [degree](double x) {
    return legendre_second_derivative(degree, x, legendre_eval(degree, x));
  };
  // Rolle: one derivative root between consecutive roots of P_L. Only the
  // brackets on the nonnegative side are searched; the rest is mirrored.
  std::vector<double> positive;
  for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
    if (roots[i] >= 0.0) {
      positive.push_back(bracketed_root(roots[i], roots[i + 1], slope, curvature));
    }
  }
  std::vector<double> result;
  result.reserve(static_cast<std::size_t>(degree - 1));
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    result.push_back(-*it);
  }
  if (degree % 2 == 0) {
    result.push_back(0.0);
  }
  result.insert(result.end(), positive.begin(), positive.end());
  return result;
}

std::vector<double> optimal_support_points(int order) {
  if (order < 1) {
    throw InvalidArgument("optimal_support_points: order must be at least 1");
  }
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(order));
  for (double x : legendre_derivative_roots(order)) {
    points.push_back(0.5 * (x + 1.0));
  }
  points.push_back(1.0);
  return points;
}

OptimalDesign make_optimal_design(int order, int num_pilots) {
  if (order < 1) {
    throw InvalidArgument("optimal design: order must be at least 1");
  }
  if (num_pilots < 1 || num_pilots % order != 0) {
    throw InvalidArgument("optimal design: N=" + std::to_string(num_pilots) +
                          " is not a positive multiple of L=" + std::to_string(order) +
                          " (unsupported multiplicity)");
  }
  return {order, optimal_support_points(order), num_pilots / order};
}

PilotSequence allocate_pilots(int order, int num_pilots, double max_amplitude,
                              PhasePolicy phases) {
  if (!(max_amplitude > 0.0)) {
    throw InvalidArgument("allocate_pilots: max amplitude must be positive");
  }
  const OptimalDesign design = make_optimal_design(order, num_pilots);
  ComplexVector symbols(num_pilots);
  Rng rng(phases.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  Eigen::Index n = 0;
  for (double t : design.support_points) {
    for (int k = 0; k < design.multiplicity; ++k) {
      const double amplitude = t * max_amplitude;
      symbols[n++] = phases.kind == PhasePolicy::Kind::kZero
                         ? Complex(amplitude, 0.0)
                         : std::polar(amplitude, angle(rng));
    }
  }
  return PilotSequence(std::move(symbols), max_amplitude);
}

PilotSequence uniform_pilots(int num_pilots, double max_amplitude) {
  if (num_pilots < 1) {
    throw InvalidArgument("uniform_pilots: need at least one pilot");
  }
  std::vector<double> amplitudes(static_cast<std::size_t>(num_pilots));
  for (int n = 0; n < num_pilots; ++n) {
    amplitudes[static_cast<std::size_t>(n)] =
        (1.0 / num_pilots + static_cast<double>(n) / num_pilots) * max_amplitude;
  }
  amplitudes.back() = max_amplitude;
  return real_pilots(amplitudes, max_amplitude);
}

bool DesignCriterionValue::finite() const { return std::isfinite(log_value); }

DesignCriterionValue d_criterion(const ComplexMatrix& design, double noise_variance) {
  if (!(noise_variance > 0.0)) {
    throw InvalidArgument("d_criterion: noise variance must be positive");
  }
  const auto order = design.cols();
  if (design.rows() < order || !(condition_number(design) < kConditionLimit)) {
    return {std::numeric_limits<double>::infinity(), CriterionKind::kD};
  }
  const Eigen::ColPivHouseholderQR<ComplexMatrix> qr(design);
  double log_det_gram = 0.0;
  for (Eigen::Index l = 0; l < order; ++l) {
    log_det_gram += 2.0 * std::log(std::abs(qr.matrixR()(l, l)));
  }
  return {static_cast<double>(order) * std::log(noise_variance) - log_det_gram,
          CriterionKind::kD};
}

DesignCriterionValue minimax_criterion(const ComplexMatrix& design, double noise_variance,
                                       double max_amplitude) {
  if (design.rows() < design.cols() || !(condition_number(design) < kConditionLimit)) {
    return {std::numeric_limits<double>::infinity(), CriterionKind::kMinimax};
  }
  return {std::log(max_prediction_mse(design, noise_variance, std::nullopt, max_amplitude)),
          CriterionKind::kMinimax};
}

ExchangeResult exchange_search_verify(int order, int num_pilots, int grid_resolution,
                                      std::uint64_t seed) {
  make_optimal_design(order, num_pilots);  // validates the multiplicity
  if (grid_resolution < 100) {
    throw InvalidArgument("exchange_search_verify: grid resolution must be at least 100");
  }
  std::vector<double> grid(static_cast<std::size_t>(grid_resolution));
  for (int k = 1; k <= grid_resolution; ++k) {
    grid[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) / grid_resolution;
  }

  const GramCriterion criterion(order);
  std::vector<double> amplitudes(static_cast<std::size_t>(num_pilots));
  const PilotSequence start = uniform_pilots(num_pilots, 1.0);
  for (int n = 0; n < num_pilots; ++n) {
    amplitudes[static_cast<std::size_t>(n)] = start.symbols()[n].real();
  }
  Eigen::MatrixXd gram = criterion.gram(amplitudes);
  double current = criterion.neg_log_det(gram);

  Rng rng(seed);
  std::vector<std::size_t> visit(amplitudes.size());
  std::iota(visit.begin(), visit.end(), 0);

  constexpr int kMaxPasses = 10000;
  int passes = 0;
  bool moved = true;
  while (moved && passes < kMaxPasses) {
    moved = false;
    ++passes;
    std::shuffle(visit.begin(), visit.end(), rng);
    for (std::size_t n : visit) {
      const Eigen::VectorXd old_v = criterion.powers(amplitudes[n]);
      const Eigen::MatrixXd without = gram - old_v * old_v.transpose();
      double best_value = current;
      double best_amp = amplitudes[n];
      for (double g : grid) {
        const Eigen::VectorXd v = criterion.powers(g);
        const double value = criterion.neg_log_det(without + v * v.transpose());
        if (value < best_value - 1e-12) {
          best_value = value;
          best_amp = g;
        }
      }
      if (best_amp != amplitudes[n]) {
        amplitudes[n] = best_amp;
        // Rebuild rather than update to avoid drift in the running sum.
        gram = criterion.gram(amplitudes);
        current = criterion.neg_log_det(gram);
        moved = true;
      }
    }
  }

  std::sort(amplitudes.begin(), amplitudes.end());
  PilotSequence pilots = real_pilots(amplitudes, 1.0);
  const DesignCriterionValue value = d_criterion(build_design_matrix(pilots, order), 1.0);
  return {std::move(pilots), value, passes};
}

}  // namespace paota
