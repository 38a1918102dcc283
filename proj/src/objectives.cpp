#include "atomret/objectives.hpp"

#include <algorithm>
#include <cmath>

namespace atomret {

double Loss::value(const Mat& r) const { return 0.5 * r.squaredNorm(); }

Mat Loss::gradient(const Mat& r) const { return r; }

double Loss::conjugate(const Mat& y) const { return 0.5 * y.squaredNorm(); }

double Loss::perspective(const Mat& y, double beta, double alpha) const {
  if (!(beta > 0.0)) throw ArgumentError("perspective: beta must be positive");
  return y.squaredNorm() / (2.0 * beta) + beta * alpha;
}

double Loss::best_beta(const Mat& y, double alpha) const {
  if (alpha <= 0.0) return 0.0;
  return y.norm() / std::sqrt(2.0 * alpha);
}

const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::P1: return "P1";
    case Formulation::P2: return "P2";
    case Formulation::P3: return "P3";
  }
  return "?";
}

void ProblemSpec::validate() const {
  if (!M) throw ConfigError("ProblemSpec: missing operator");
  if (shape_of(b) != M->out_shape())
    throw DimensionError("ProblemSpec: b has shape " + to_string(shape_of(b)) + ", operator range is " +
                         to_string(M->out_shape()));
  if (set.shape() != M->in_shape())
    throw DimensionError("ProblemSpec: atomic set shape " + to_string(set.shape()) + " does not match operator domain " +
                         to_string(M->in_shape()));
  if (formulation == Formulation::P1 && !(lambda > 0.0)) throw ConfigError("ProblemSpec: P1 needs lambda > 0");
  if (formulation == Formulation::P2 && !(tau > 0.0)) throw ConfigError("ProblemSpec: P2 needs tau > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("ProblemSpec: alpha must be finite and >= 0");
  if (k < 1) throw ConfigError("ProblemSpec: k must be >= 1");
  if (k_right && *k_right < 1) throw ConfigError("ProblemSpec: k_right must be >= 1");
  if (k_right && set.kind() != AtomicSet::Kind::WeightedSum)
    throw ConfigError("ProblemSpec: k_right only applies to weighted sums");
  if (!(eps_tol >= 0.0)) throw ConfigError("ProblemSpec: eps_tol must be >= 0");
  if (!b.allFinite()) throw ConfigError("ProblemSpec: b is not finite");
}

namespace {

Mat adjoint_of(const ProblemSpec& spec, const DualState& s) {
  if (s.Mty.size() != 0) return s.Mty;
  return spec.M->adjoint(s.y);
}

}  // namespace

double dual_support(const ProblemSpec& spec, const DualState& state) {
  return support_value(spec.set, adjoint_of(spec, state));
}

double dual_objective_d3(const ProblemSpec& spec, const Mat& y, double beta) {
  require_shape(y, shape_of(spec.b), "dual_objective");
  if (!(beta > 0.0)) throw ArgumentError("dual_objective: D3 needs beta > 0");
  return spec.loss.perspective(y, beta, spec.alpha) - inner(spec.b, y);
}

double dual_objective(const ProblemSpec& spec, const DualState& state) {
  require_shape(state.y, shape_of(spec.b), "dual_objective");
  const Mat& y = state.y;
  switch (spec.formulation) {
    case Formulation::P1:
      return spec.loss.conjugate(y) - inner(spec.b, y);
    case Formulation::P2:
      return spec.loss.conjugate(y) - inner(spec.b, y) + spec.tau * dual_support(spec, state);
    case Formulation::P3: {
      if (state.beta) return dual_objective_d3(spec, y, *state.beta);
      const double beta = spec.loss.best_beta(y, spec.alpha);
      // minimized perspective is sqrt(2 alpha) ||y||, also as beta -> 0 when alpha = 0
      if (beta <= 0.0) return std::sqrt(2.0 * spec.alpha) * y.norm() - inner(spec.b, y);
      return dual_objective_d3(spec, y, beta);
    }
  }
  return 0.0;
}

bool dual_feasible(const ProblemSpec& spec, const DualState& state) {
  switch (spec.formulation) {
    case Formulation::P1:
      return dual_support(spec, state) <= spec.lambda + Tolerances::feasibility;
    case Formulation::P2:
      return true;
    case Formulation::P3:
      return dual_support(spec, state) <= 1.0 + Tolerances::feasibility;
  }
  return false;
}

double epsilon_bound(const ProblemSpec& spec, const DualState& state, double d_star_lower, double opnorm) {
  const double L = spec.loss.smoothness();
  switch (spec.formulation) {
    case Formulation::P1: {
      const double g = std::max(dual_objective(spec, state) - d_star_lower, 0.0);
      return opnorm * std::sqrt(2.0 * L * g);
    }
    case Formulation::P2: {
      const double g = std::max(dual_objective(spec, state) - d_star_lower, 0.0);
      return 2.0 * opnorm * std::sqrt(2.0 * L * g);
    }
    case Formulation::P3: {
      if (!state.beta_bracket) throw StateError("epsilon_bound: D3 needs a beta bracket");
      const auto [lo, hi] = *state.beta_bracket;
      if (!(lo > 0.0) || hi < lo) throw StateError("epsilon_bound: invalid beta bracket");
      const double top = std::max(dual_objective_d3(spec, state.y, lo), dual_objective_d3(spec, state.y, hi));
      const double g = std::max(top - d_star_lower, 0.0);
      return 2.0 * opnorm * std::sqrt(2.0 * hi * L * g);
    }
  }
  return 0.0;
}

double epsilon_bound(const ProblemSpec& spec, const DualState& state, double d_star_lower) {
  return epsilon_bound(spec, state, d_star_lower, atomic_opnorm(spec.set, *spec.M, 50));
}

std::pair<double, double> beta_bracket(const ProblemSpec& spec, const Mat& x_lo, const Mat& x_hi) {
  auto multiplier = [&](const Mat& x) {
    const Mat g = spec.loss.gradient(spec.b - spec.M->forward(x));
    if (!g.allFinite()) throw NumericalError("beta_bracket: non-finite gradient");
    return support_value(spec.set, spec.M->adjoint(g));
  };
  const double a = multiplier(x_lo);
  const double c = multiplier(x_hi);
  return {std::min(a, c), std::max(a, c)};
}

std::pair<double, double> perspective_bracket(std::pair<double, double> m) {
  if (!(m.first > 0.0) || m.second < m.first) throw ArgumentError("perspective_bracket: need 0 < lo <= hi");
  return {1.0 / m.second, 1.0 / m.first};
}

ExtendedReal solver_gauge(const AtomicSet& set, const Mat& x) {
  if (set.kind() == AtomicSet::Kind::NonnegCanonical) {
    require_shape(x, set.shape(), "solver_gauge");
    if (x.minCoeff() < 0.0) return ExtendedReal::infinite();
    return x.sum();
  }
  return gauge_value(set, x);
}

ExtendedReal primal_objective(const ProblemSpec& spec, const Mat& x) {
  const ExtendedReal g = solver_gauge(spec.set, x);
  if (g.is_infinite()) return ExtendedReal::infinite();
  const double fit = spec.loss.value(spec.b - spec.M->forward(x));
  switch (spec.formulation) {
    case Formulation::P1:
      return fit + spec.lambda * g.value();
    case Formulation::P2:
      if (g.value() > spec.tau * (1.0 + Tolerances::feasibility) + Tolerances::feasibility)
        return ExtendedReal::infinite();
      return fit;
    case Formulation::P3:
      if (fit > spec.alpha + Tolerances::feasibility) return ExtendedReal::infinite();
      return g.value();
  }
  return ExtendedReal::infinite();
}

}  // namespace atomret
