#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "atomret/retrieval.hpp"

namespace atomret {

enum class ExperimentKind { Bpdn, MatrixCompletion, Rpca, Custom };

struct BpdnParams {
  /// sgnspike | blocksig | cosspike | gcosspike | spiketrn
  std::string problem = "sgnspike";
  Index m = 0;         // 0: the problem's default shape
  Index n = 0;
  Index sparsity = 0;  // 0: the problem's default
  double noise = 0.0;  // std of additive Gaussian noise on b
  Index kernel_length = 16;  // spiketrn only
};

struct CompletionParams {
  Index rows = 60;
  Index cols = 40;
  Index rank = 5;
  double fraction = 0.5;
  double noise = 0.0;
};

struct RpcaParams {
  Index rows = 40;
  Index cols = 40;
  Index rank = 2;
  double sparse_fraction = 0.05;
  std::optional<double> lambda;  // default 1 / sqrt(max(rows, cols))
  double sparse_magnitude = 1.0;   // sparse entries are +/- U[0.5, 1] * magnitude * rms(L)
  double noise = 0.0;
};

struct CustomParams {
  Mat A;
  Mat b;
  std::string set = "signed";  // signed | nonneg
};

struct SolverParams {
  int max_iter = 500;
  int cadence = 0;
  int inner_iters = 5;
  int cg_steps = 1;
  double step = 1.0;
  double reduced_tol = 1e-12;
  int reduced_max_iter = 5000;
  bool skip_opnorm = false;
};

/// JSON experiment description (schema in configs/README.md).
struct ExperimentConfig {
  int version = 1;
  ExperimentKind kind = ExperimentKind::Bpdn;
  std::uint64_t seed = 1;
  Formulation formulation = Formulation::P3;
  std::optional<double> lambda;
  std::optional<double> tau;
  std::optional<double> alpha;  // absolute misfit level (overrides alpha_rel)
  double alpha_rel = 1e-3;      // ||b - Mx|| <= alpha_rel ||b||, i.e. alpha = 0.5 (alpha_rel ||b||)^2
  std::optional<double> eps_tol;
  std::optional<Index> k;
  std::optional<Index> k_right;
  BpdnParams bpdn;
  CompletionParams completion;
  RpcaParams rpca;
  CustomParams custom;
  SolverParams solver;
  std::string out_dir = ".";
  std::string report_name = "report.json";
  std::string trace_name = "trace.csv";

  /// Throws ConfigError on unknown kinds, bad types or inconsistent values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

/// A generated instance with its planted ground truth.
struct GeneratedProblem {
  ProblemSpec spec;
  Mat x_true;  // planted point (L + S for RPCA)
  Mat L_true;  // RPCA only
  Mat S_true;  // RPCA only
  double b_norm = 0.0;
  std::string description;
};

GeneratedProblem generate_bpdn(const ExperimentConfig& cfg);
GeneratedProblem generate_matrix_completion(const ExperimentConfig& cfg);
GeneratedProblem generate_rpca(const ExperimentConfig& cfg);
GeneratedProblem generate_custom(const ExperimentConfig& cfg);
GeneratedProblem generate(const ExperimentConfig& cfg);

RetrievalLimits limits_from(const ExperimentConfig& cfg);

/// Generates, runs retrieval, writes the JSON report and CSV trace into
/// cfg.out_dir. Returns 0 when status is feasible_found and 1 otherwise.
/// Config-level problems surface as ConfigError.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log, bool quiet);

}  // namespace atomret
