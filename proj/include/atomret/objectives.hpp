#pragma once

#include <optional>
#include <utility>

#include "atomret/atoms.hpp"
#include "atomret/linops.hpp"

namespace atomret {

/// Smooth loss f on the residual r = b - Mx. Only f(r) = 0.5 ||r||^2 ships;
/// new losses add an enumerator and the four members below.
struct Loss {
  enum class Kind { HalfSqNorm };
  Kind kind = Kind::HalfSqNorm;

  double value(const Mat& r) const;
  Mat gradient(const Mat& r) const;
  double conjugate(const Mat& y) const;
  /// Lipschitz constant of the gradient.
  double smoothness() const { return 1.0; }
  /// beta * (f*(y / beta) + alpha), the perspective term of the level-set dual.
  double perspective(const Mat& y, double beta, double alpha) const;
  /// argmin over beta > 0 of perspective(y, beta, alpha); 0 when the
  /// infimum is approached as beta -> 0 (alpha = 0 or y = 0).
  double best_beta(const Mat& y, double alpha) const;
};

enum class Formulation { P1, P2, P3 };

const char* to_string(Formulation f);

/// A fully specified instance: loss, operator, data, atomic set, the
/// gauge-regularized formulation to dualize, and the retrieval target.
struct ProblemSpec {
  Loss loss;
  LinOpPtr M;
  Mat b;
  AtomicSet set = AtomicSet::signed_canonical(1);
  Formulation formulation = Formulation::P3;
  double lambda = 0.0;  // P1 penalty
  double tau = 0.0;     // P2 gauge radius
  double alpha = 0.0;   // P3 misfit level; also the termination target for P1/P2
  Index k = 1;          // cardinality budget (left operand for weighted sums)
  std::optional<Index> k_right;  // right operand budget for weighted sums
  double eps_tol = 0.0;

  /// Throws ConfigError (parameters) or DimensionError (shapes).
  void validate() const;
  Index budget_right() const { return k_right.value_or(k); }
};

/// Dual iterate. For D3 the bracket holds bounds on the perspective variable
/// beta* of d3 and `beta` (when set) is the perspective value to evaluate at.
struct DualState {
  Mat y;
  std::optional<std::pair<double, double>> beta_bracket;
  std::optional<double> beta;
  double d_value = 0.0;
  std::optional<double> gap_bound;
  /// Cached M* y, empty when not computed. Must match y.
  Mat Mty;
};

/// d1(y) = f*(y) - <b, y>
/// d2(y) = f*(y) - <b, y> + tau sigma(M* y)
/// d3(y, beta) = beta (f*(y / beta) + alpha) - <b, y>
/// For D3 without an explicit state.beta the minimizing beta is used.
double dual_objective(const ProblemSpec& spec, const DualState& state);
double dual_objective_d3(const ProblemSpec& spec, const Mat& y, double beta);

/// sigma(M* y) <= lambda (D1) or <= 1 (D3), with tolerance 1e-9. D2 is
/// unconstrained.
bool dual_feasible(const ProblemSpec& spec, const DualState& state);

/// sigma(M* y), from the cache when present.
double dual_support(const ProblemSpec& spec, const DualState& state);

/// Identification radius eps_i with (d_i(y) - d_star_lower) standing in for
/// the unknown gap; clamps negative gaps to zero. D3 needs a bracket
/// (StateError otherwise). `opnorm` is ||M||_A.
double epsilon_bound(const ProblemSpec& spec, const DualState& state, double d_star_lower, double opnorm);
double epsilon_bound(const ProblemSpec& spec, const DualState& state, double d_star_lower);

/// Multiplier bounds sigma(M* grad f(b - M x_j)) at the two level-set
/// endpoints, returned as (min, max).
std::pair<double, double> beta_bracket(const ProblemSpec& spec, const Mat& x_lo, const Mat& x_hi);

/// Converts multiplier bounds [l_lo, l_hi] into bounds on the perspective
/// variable of d3, which is the reciprocal of the multiplier.
std::pair<double, double> perspective_bracket(std::pair<double, double> multiplier_bracket);

/// Gauge used by the solvers and the primal objectives. Equal to
/// gauge_value except on the nonnegative orthant, where it is sum(x) on the
/// cone (the gauge polar to the ranking support value).
ExtendedReal solver_gauge(const AtomicSet& set, const Mat& x);

/// p1(x) = f(b - Mx) + lambda gamma(x); p2(x) = f(b - Mx) if gamma(x) <= tau;
/// p3(x) = gamma(x) if f(b - Mx) <= alpha. Infeasible points give infinity.
ExtendedReal primal_objective(const ProblemSpec& spec, const Mat& x);

}  // namespace atomret
