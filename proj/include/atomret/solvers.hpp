#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "atomret/atoms.hpp"
#include "atomret/objectives.hpp"

namespace atomret {

struct OracleOptions {
  /// Dual gradient step for the proximal oracle; 1 is the inverse
  /// Lipschitz constant of grad f* for the shipped loss.
  double step = 1.0;
  /// Inner accelerated iterations per proximal oracle call.
  int inner_iters = 5;
  /// Frank-Wolfe steps per level-set oracle call.
  int cg_steps = 1;
  /// Level-set bracket stopping rule: (tau_hi - tau_lo) / max(1, tau_hi).
  double level_tol = 1e-6;
  /// Atomic operator norm of M, when the caller already has it. The level-set
  /// oracle computes it otherwise.
  std::optional<double> atomic_opnorm;
};

/// Level-set bookkeeping for D3.
struct LevelSet {
  double tau = 0.0;
  double tau_lo = 0.0;
  double tau_hi = std::numeric_limits<double>::infinity();
  /// Certified bounds on the optimal multiplier: lambda_hi <= lambda* <= lambda_lo.
  /// Each is the iterate's sigma(M* r) widened by |M|_A sqrt(2 L gap), which
  /// covers the distance to the exact subproblem residual.
  std::optional<double> lambda_lo;
  std::optional<double> lambda_hi;
  /// atomic operator norm used for the widening
  double opnorm = 0.0;
  /// gauge of the best P3-feasible iterate seen (weak-duality bound -gamma)
  std::optional<double> feasible_gauge;
  int updates = 0;
  bool converged = false;
};

/// State threaded through successive oracle calls.
struct OracleState {
  Formulation formulation = Formulation::P3;
  DualState dual;
  int iteration = 0;
  /// Best weak-duality lower bound on the optimal dual value.
  double d_lower = -std::numeric_limits<double>::infinity();
  /// Squared operator-norm estimate used for inner step sizes.
  double lipschitz = 1.0;
  /// Calls whose candidate did not decrease d and was discarded.
  int rejected = 0;

  // proximal oracle: inner primal iterate and momentum
  Mat w, w_prev, Mw, Mw_prev;
  double momentum = 1.0;

  // level-set oracle: primal Frank-Wolfe iterate (x = xl + xs for weighted sums)
  LevelSet level;
  Mat x, xl, xs, Mx;
  /// last atom selected by the linear minimization oracle
  std::optional<Atom> last_atom;
  /// last primal residual r = b - Mx, its adjoint M* r, and M* b
  Mat r, Mtr, Mtb;
  /// Frank-Wolfe duality gap of the current level subproblem
  double fw_gap = std::numeric_limits<double>::infinity();
};

/// y0 = 0 and the operator-norm estimate. Uses (and counts) operator
/// applications; callers reset the counter afterwards when setup should not
/// be charged.
OracleState initial_oracle_state(const ProblemSpec& spec, const OracleOptions& opts = {});

/// One dual step for D1 or D2 with f = 0.5||.||^2:
///   D1: y+ = proj{sigma(M* y) <= lambda}(y - t (y - b))
///   D2: y+ = prox_{t tau sigma(M* .)}(y - t (y - b))
/// Both are evaluated as v - M w with w from a warm-started inner solve
/// (lasso for D1, gauge-ball constrained least squares for D2). D1 output is
/// rescaled into the feasible set. A candidate that does not decrease d is
/// discarded (state.rejected counts them).
OracleState dual_step_prox(const ProblemSpec& spec, const OracleState& state, const OracleOptions& opts = {});

/// Level-set method for P3 with Frank-Wolfe on min f(b - Mx) s.t. gamma(x) <= tau.
/// Emits y = r / sigma(M* r), which satisfies sigma(M* y) = 1, and keeps the
/// best (lowest d3) dual seen.
OracleState dual_step_levelset_cg(const ProblemSpec& spec, const OracleState& state, const OracleOptions& opts = {});

/// Dispatches on the formulation: P1/P2 -> prox, P3 -> level-set.
OracleState dual_step(const ProblemSpec& spec, const OracleState& state, const OracleOptions& opts = {});

// ------------------------------------------------------------- reduced

struct ReducedOptions {
  double tol = 1e-12;
  int max_iter = 5000;
  /// Optional bound gamma(x) <= radius on the retrieved point (single block only).
  std::optional<double> radius;
};

struct ReducedSolution {
  Vec coefficients;
  double f_k = 0.0;
  int iterations = 0;
  bool unconverged = false;
  Mat x;   // reconstructed ambient point
  Mat Mx;  // its image
};

/// Accelerated projected gradient over the model's coefficient domain,
/// warm-started at the unconstrained least-squares solution. Projections:
/// clip (nonnegative), none (free), symmetrize then clip eigenvalues (PSD).
ReducedSolution solve_reduced(const ProblemSpec& spec, const ReducedModel& model, const ReducedOptions& opts = {});

/// The images M(basis_j) as columns (column j is coefficient j).
Mat reduced_design(const LinOp& M, const ReducedModel& model);

/// Projection of a coefficient vector onto the model domain.
Vec project_coefficients(const ReducedModel& model, const Vec& c, std::optional<double> radius = std::nullopt);

}  // namespace atomret
