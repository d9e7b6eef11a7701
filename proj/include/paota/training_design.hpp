#pragma once

// D-optimal pilot design for the no-intercept polynomial PA model on [0, 1].
//
// The optimal design puts N/L pilots at each of the L amplitudes t solving
// (1 - t) P_L'(2t - 1) = 0, where P_L is the Legendre polynomial of degree L.
// The same design is minimax for the prediction MSE and attains
// max |MSE| = sigma^2 L / N over the input range.

#include <cstdint>
#include <vector>

#include "paota/pa_model.hpp"

namespace paota {

struct LegendreValue {
  double value;
  double derivative;
};

/// P_L(x) and P_L'(x) from the three-term recurrence.
LegendreValue legendre_eval(int degree, double x);

/// The L-1 roots of P_L' in (-1, 1), sorted increasing. Exactly symmetric
/// about zero; zero itself is a root for even L.
std::vector<double> legendre_derivative_roots(int degree);

/// The L support amplitudes of the D-optimal design on [0, 1], sorted
/// increasing, last entry exactly 1.
std::vector<double> optimal_support_points(int order);

struct OptimalDesign {
  int order;
  std::vector<double> support_points;
  int multiplicity;  // pilots per support point
};

/// Throws InvalidArgument unless num_pilots is a positive multiple of order.
OptimalDesign make_optimal_design(int order, int num_pilots);

struct PhasePolicy {
  enum class Kind { kZero, kUniformRandom };
  Kind kind = Kind::kZero;
  std::uint64_t seed = 0;

  static PhasePolicy zero() { return {}; }
  static PhasePolicy uniform_random(std::uint64_t seed) { return {Kind::kUniformRandom, seed}; }
};

/// N/L pilots per support point, grouped by support point in increasing
/// amplitude, scaled by max_amplitude.
PilotSequence allocate_pilots(int order, int num_pilots, double max_amplitude,
                              PhasePolicy phases = PhasePolicy::zero());

/// Amplitudes (n + 1)/N * max_amplitude for n = 0..N-1, zero phase.
PilotSequence uniform_pilots(int num_pilots, double max_amplitude);

enum class CriterionKind { kD, kMinimax };

struct DesignCriterionValue {
  /// D: log det C_LS = L log sigma^2 - log det(Phi^H Phi).
  /// Minimax: log of the maximal prediction MSE.
  /// +infinity for rank-deficient designs.
  double log_value;
  CriterionKind kind;

  bool finite() const;
};

DesignCriterionValue d_criterion(const ComplexMatrix& design, double noise_variance);

DesignCriterionValue minimax_criterion(const ComplexMatrix& design, double noise_variance,
                                       double max_amplitude);

struct ExchangeResult {
  PilotSequence pilots;
  DesignCriterionValue criterion;
  int passes;
};

/// Coordinate-exchange search for a D-optimal design on the grid
/// {k / grid_resolution : k = 1..grid_resolution}. Starts from uniform
/// pilots and moves one pilot at a time to its best grid amplitude until a
/// full pass changes nothing. The seed only shuffles the visiting order.
/// Independent of the Legendre characterization; used to cross-check it.
ExchangeResult exchange_search_verify(int order, int num_pilots, int grid_resolution,
                                      std::uint64_t seed);

}  // namespace paota
