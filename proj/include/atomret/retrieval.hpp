#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomret/solvers.hpp"
#include "atomret/spectral.hpp"

namespace atomret {

enum class RetrievalStatus { FeasibleFound, MaxIter, OracleFailed };

const char* to_string(RetrievalStatus s);

/// One row of the per-iteration trace.
struct IterationRow {
  int t = 0;
  double d_value = 0.0;
  std::optional<double> eps_bound;  // unavailable before a certified lower bound / bracket exists
  std::optional<double> f_reduced;  // only on iterations that ran the reduced solve
  bool feasible = false;
  std::int64_t nmat = 0;
};

/// Read-only view handed to an observer after every outer iteration.
struct IterationView {
  int t = 0;
  const OracleState* oracle = nullptr;
  const ReducedModel* model = nullptr;       // null when the reduced solve was skipped
  const ReducedSolution* reduced = nullptr;  // null when the reduced solve was skipped
  const IterationRow* row = nullptr;
};

struct RetrievalLimits {
  int max_iter = 500;
  /// Reduced-solve cadence; 0 picks 1 for polyhedral sets and 5 otherwise.
  int cadence = 0;
  OracleOptions oracle;
  ReducedOptions reduced;
  /// Trials for the atomic operator norm of spectral sets.
  int opnorm_trials = 50;
  /// Skip the atomic operator norm (eps_bound is then never reported).
  bool skip_opnorm = false;
  std::function<void(const IterationView&)> observer;
};

/// Atom with its (positive) coefficient in the retrieved point.
struct WeightedAtom {
  Atom atom;
  double coefficient = 0.0;
};

struct RetrievalReport {
  RetrievalStatus status = RetrievalStatus::MaxIter;
  std::string message;
  std::vector<IterationRow> rows;
  Mat x;
  std::vector<WeightedAtom> atoms;
  /// Atom count of x in the decomposition above; for weighted sums the
  /// per-operand counts are in card_left / card_right.
  Index card = 0;
  Index card_left = 0;
  Index card_right = 0;
  double f_final = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double wall_seconds = 0.0;
  std::int64_t setup_nmat = 0;
  std::int64_t nmat = 0;
  double opnorm = std::numeric_limits<double>::quiet_NaN();

  nlohmann::json to_json() const;
  /// Columns t,d_value,eps_bound,f_reduced,feasible,nMat; %.17g numbers,
  /// "nan" for unavailable values.
  std::string to_csv() const;
};

/// Algorithm 1: dual step, essential model from M* y, reduced solve,
/// termination on f_k <= alpha + eps_tol. Spectral sets require eps_tol > 0
/// (ConfigError otherwise).
RetrievalReport run_retrieval(const ProblemSpec& spec, const RetrievalLimits& limits = {});

/// Decomposes a reduced solution into positively weighted atoms (SVD of C
/// for low-rank blocks, eigendecomposition for PSD blocks).
std::vector<WeightedAtom> summarize(const ReducedModel& model, const Vec& coefficients, double rel_tol = 1e-12);

// --------------------------------------------------------- diagnostics

/// sqrt(2 min{eps / (s_1 - s_{k+1}), 1}); sqrt(2) when the gap is degenerate.
double hausdorff_bound(const TruncatedSvd& svd, double eps);

/// True when s_1 <= s_{k+1} (the bound above degenerates to sqrt(2)).
bool hausdorff_degenerate(const TruncatedSvd& svd);

/// delta = sigma(M* y) - max over atoms outside `support` of <a, M* y>.
/// Finite sets only; +infinity when every atom is in the support.
double nondegeneracy_margin(const AtomicSet& set, const LinOp& M, const Mat& y_star, const std::vector<Atom>& support);

/// sqrt(2 L alpha) ||M|| D sqrt(s) ||X*|| + (L ||M||^2 / 2) D^2 s ||X*||^2
double hausdorff_recovery_bound(double D, Index support_size, double x_star_norm, double M_norm, double L, double alpha);
double hausdorff_recovery_bound(const TruncatedSvd& svd, double eps, Index support_size, double x_star_norm,
                                double M_norm, double L, double alpha);

}  // namespace atomret
