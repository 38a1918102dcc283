#include "atomret/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

namespace atomret {

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: field '") + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_or<T>(j, key, T{});
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw ConfigError("config: unknown field '" + item.key() + "' in " + where);
}

Mat matrix_from_json(const json& j, const char* what) {
  try {
    if (j.is_array() && !j.empty() && j.front().is_array()) {
      const Index rows = static_cast<Index>(j.size());
      const Index cols = static_cast<Index>(j.front().size());
      Mat A(rows, cols);
      for (Index i = 0; i < rows; ++i) {
        if (static_cast<Index>(j[i].size()) != cols) throw ConfigError(std::string("config: ragged matrix ") + what);
        for (Index c = 0; c < cols; ++c) A(i, c) = j[i][c].get<double>();
      }
      return A;
    }
    const auto v = j.get<std::vector<double>>();
    Mat b(static_cast<Index>(v.size()), 1);
    for (size_t i = 0; i < v.size(); ++i) b(static_cast<Index>(i), 0) = v[i];
    return b;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + what + ": " + e.what());
  }
}

// Independent generator streams derived from the run seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), id};
  return std::mt19937_64(seq);
}

std::vector<Index> sample_without_replacement(Index n, Index count, std::mt19937_64& rng) {
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  // partial Fisher-Yates with an explicit uniform draw, stable across standard libraries
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(pick(rng))]);
  }
  idx.resize(static_cast<size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Mat gaussian(Index rows, Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Mat A(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) A(i, j) = normal(rng);
  return A;
}

double default_alpha(const ExperimentConfig& cfg, double b_norm) {
  if (cfg.alpha) return *cfg.alpha;
  const double r = cfg.alpha_rel * b_norm;
  return 0.5 * r * r;
}

void apply_formulation(const ExperimentConfig& cfg, ProblemSpec& spec, double default_tau) {
  spec.formulation = cfg.formulation;
  if (cfg.formulation == Formulation::P1) {
    if (!cfg.lambda) throw ConfigError("config: formulation P1 needs 'lambda'");
    spec.lambda = *cfg.lambda;
  }
  if (cfg.formulation == Formulation::P2) spec.tau = cfg.tau.value_or(default_tau);
}

struct BpdnShape {
  Index m, n, k;
};

BpdnShape bpdn_defaults(const std::string& p) {
  if (p == "sgnspike") return {600, 2560, 20};
  if (p == "blocksig") return {1024, 1024, 71};
  if (p == "cosspike") return {1024, 2048, 113};
  if (p == "gcosspike") return {300, 2048, 113};
  if (p == "spiketrn") return {1024, 1024, 35};
  throw ConfigError("config: unknown bpdn problem '" + p + "'");
}

}  // namespace

// ------------------------------------------------------------- config

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"version", "kind", "seed", "formulation", "lambda", "tau", "alpha", "alpha_rel", "eps_tol", "k",
                  "k_right", "bpdn", "matrix_completion", "rpca", "custom", "solver", "output", "description"},
                 "top level");
  ExperimentConfig c;
  if (!j.contains("version")) throw ConfigError("config: missing 'version'");
  c.version = get_or<int>(j, "version", 0);
  if (c.version != 1) throw ConfigError("config: unsupported version " + std::to_string(c.version));
  const auto kind = get_or<std::string>(j, "kind", "");
  if (kind == "bpdn")
    c.kind = ExperimentKind::Bpdn;
  else if (kind == "matrix_completion")
    c.kind = ExperimentKind::MatrixCompletion;
  else if (kind == "rpca")
    c.kind = ExperimentKind::Rpca;
  else if (kind == "custom")
    c.kind = ExperimentKind::Custom;
  else
    throw ConfigError("config: unknown kind '" + kind + "'");
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  const auto form = get_or<std::string>(j, "formulation", "P3");
  if (form == "P1")
    c.formulation = Formulation::P1;
  else if (form == "P2")
    c.formulation = Formulation::P2;
  else if (form == "P3")
    c.formulation = Formulation::P3;
  else
    throw ConfigError("config: unknown formulation '" + form + "'");
  c.lambda = get_opt<double>(j, "lambda");
  c.tau = get_opt<double>(j, "tau");
  c.alpha = get_opt<double>(j, "alpha");
  c.alpha_rel = get_or<double>(j, "alpha_rel", c.alpha_rel);
  c.eps_tol = get_opt<double>(j, "eps_tol");
  c.k = get_opt<Index>(j, "k");
  c.k_right = get_opt<Index>(j, "k_right");
  if (c.alpha && *c.alpha < 0) throw ConfigError("config: alpha must be >= 0");
  if (c.alpha_rel < 0) throw ConfigError("config: alpha_rel must be >= 0");
  if (c.eps_tol && *c.eps_tol < 0) throw ConfigError("config: eps_tol must be >= 0");
  if (c.k && *c.k < 1) throw ConfigError("config: k must be >= 1");
  if (c.lambda && *c.lambda <= 0) throw ConfigError("config: lambda must be > 0");
  if (c.tau && *c.tau <= 0) throw ConfigError("config: tau must be > 0");

  if (j.contains("bpdn")) {
    const json& b = j.at("bpdn");
    reject_unknown(b, {"problem", "m", "n", "sparsity", "noise", "kernel_length"}, "bpdn");
    c.bpdn.problem = get_or<std::string>(b, "problem", c.bpdn.problem);
    c.bpdn.m = get_or<Index>(b, "m", 0);
    c.bpdn.n = get_or<Index>(b, "n", 0);
    c.bpdn.sparsity = get_or<Index>(b, "sparsity", 0);
    c.bpdn.noise = get_or<double>(b, "noise", 0.0);
    c.bpdn.kernel_length = get_or<Index>(b, "kernel_length", c.bpdn.kernel_length);
  }
  if (j.contains("matrix_completion")) {
    const json& m = j.at("matrix_completion");
    reject_unknown(m, {"rows", "cols", "rank", "fraction", "noise"}, "matrix_completion");
    c.completion.rows = get_or<Index>(m, "rows", c.completion.rows);
    c.completion.cols = get_or<Index>(m, "cols", c.completion.cols);
    c.completion.rank = get_or<Index>(m, "rank", c.completion.rank);
    c.completion.fraction = get_or<double>(m, "fraction", c.completion.fraction);
    c.completion.noise = get_or<double>(m, "noise", c.completion.noise);
    if (!(c.completion.fraction > 0.0 && c.completion.fraction <= 1.0))
      throw ConfigError("config: matrix_completion.fraction must lie in (0, 1]");
  }
  if (j.contains("rpca")) {
    const json& r = j.at("rpca");
    reject_unknown(r, {"rows", "cols", "rank", "sparse_fraction", "lambda", "sparse_magnitude", "noise"}, "rpca");
    c.rpca.rows = get_or<Index>(r, "rows", c.rpca.rows);
    c.rpca.cols = get_or<Index>(r, "cols", c.rpca.cols);
    c.rpca.rank = get_or<Index>(r, "rank", c.rpca.rank);
    c.rpca.sparse_fraction = get_or<double>(r, "sparse_fraction", c.rpca.sparse_fraction);
    c.rpca.lambda = get_opt<double>(r, "lambda");
    c.rpca.sparse_magnitude = get_or<double>(r, "sparse_magnitude", c.rpca.sparse_magnitude);
    c.rpca.noise = get_or<double>(r, "noise", c.rpca.noise);
    if (!(c.rpca.sparse_fraction >= 0.0 && c.rpca.sparse_fraction < 1.0))
      throw ConfigError("config: rpca.sparse_fraction must lie in [0, 1)");
  }
  if (j.contains("custom")) {
    const json& cu = j.at("custom");
    reject_unknown(cu, {"A", "b", "set"}, "custom");
    if (!cu.contains("A") || !cu.contains("b")) throw ConfigError("config: custom needs 'A' and 'b'");
    c.custom.A = matrix_from_json(cu.at("A"), "custom.A");
    c.custom.b = matrix_from_json(cu.at("b"), "custom.b");
    if (c.custom.A.cols() == 1 && c.custom.b.rows() == 1 && c.custom.A.rows() != 1)
      throw ConfigError("config: custom.A must be a matrix (list of rows)");
    c.custom.set = get_or<std::string>(cu, "set", c.custom.set);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    reject_unknown(s,
                   {"max_iter", "cadence", "inner_iters", "cg_steps", "step", "reduced_tol", "reduced_max_iter",
                    "skip_opnorm"},
                   "solver");
    c.solver.max_iter = get_or<int>(s, "max_iter", c.solver.max_iter);
    c.solver.cadence = get_or<int>(s, "cadence", c.solver.cadence);
    c.solver.inner_iters = get_or<int>(s, "inner_iters", c.solver.inner_iters);
    c.solver.cg_steps = get_or<int>(s, "cg_steps", c.solver.cg_steps);
    c.solver.step = get_or<double>(s, "step", c.solver.step);
    c.solver.reduced_tol = get_or<double>(s, "reduced_tol", c.solver.reduced_tol);
    c.solver.reduced_max_iter = get_or<int>(s, "reduced_max_iter", c.solver.reduced_max_iter);
    c.solver.skip_opnorm = get_or<bool>(s, "skip_opnorm", c.solver.skip_opnorm);
    if (c.solver.max_iter < 1 || c.solver.cadence < 0 || c.solver.inner_iters < 1 || c.solver.cg_steps < 1 ||
        !(c.solver.step > 0.0 && c.solver.step <= 1.0) || c.solver.reduced_max_iter < 1)
      throw ConfigError("config: solver limits out of range");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, {"dir", "report", "trace"}, "output");
    c.out_dir = get_or<std::string>(o, "dir", c.out_dir);
    c.report_name = get_or<std::string>(o, "report", c.report_name);
    c.trace_name = get_or<std::string>(o, "trace", c.trace_name);
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: parse error in '" + path + "': " + e.what());
  }
  return from_json(j);
}

// ---------------------------------------------------------- generators

GeneratedProblem generate_bpdn(const ExperimentConfig& cfg) {
  const BpdnParams& p = cfg.bpdn;
  const BpdnShape d = bpdn_defaults(p.problem);
  const Index m = p.m > 0 ? p.m : d.m;
  const Index n = p.n > 0 ? p.n : d.n;
  const Index k = p.sparsity > 0 ? p.sparsity : d.k;
  if (m <= 0 || n <= 0 || k < 1 || k > n) throw ConfigError("bpdn: invalid dimensions or sparsity");
  const std::uint64_t op_seed = stream(cfg.seed, 1)();
  auto sig = stream(cfg.seed, 2);
  auto noise_rng = stream(cfg.seed, 3);

  LinOpPtr M;
  if (p.problem == "sgnspike") {
    M = std::make_shared<GaussianEnsembleOp>(m, n, op_seed);
  } else if (p.problem == "blocksig") {
    if (m != n) throw ConfigError("bpdn: blocksig needs m = n");
    M = std::make_shared<HaarOp>(n);
  } else if (p.problem == "cosspike") {
    if (n != 2 * m) throw ConfigError("bpdn: cosspike needs n = 2m");
    M = std::make_shared<HStackOp>(std::vector<LinOpPtr>{std::make_shared<DctOp>(m), std::make_shared<IdentityOp>(m)});
  } else if (p.problem == "gcosspike") {
    if (n % 2 != 0) throw ConfigError("bpdn: gcosspike needs even n");
    const Index h = n / 2;
    auto stack = std::make_shared<HStackOp>(std::vector<LinOpPtr>{std::make_shared<DctOp>(h), std::make_shared<IdentityOp>(h)});
    M = std::make_shared<ComposeOp>(std::make_shared<GaussianEnsembleOp>(m, h, op_seed), stack);
  } else {  // spiketrn
    if (m != n) throw ConfigError("bpdn: spiketrn needs m = n");
    const Index L = std::clamp<Index>(p.kernel_length, 1, n);
    Vec kernel(L);
    const double width = std::max(1.0, static_cast<double>(L) / 6.0);
    for (Index j = 0; j < L; ++j) {
      const double u = (static_cast<double>(j) - 0.5 * static_cast<double>(L - 1)) / width;
      kernel[j] = std::exp(-0.5 * u * u);
    }
    kernel /= kernel.norm();
    M = std::make_shared<Conv1dOp>(kernel, n);
  }

  Mat x = Mat::Zero(n, 1);
  std::bernoulli_distribution coin(0.5);
  for (Index i : sample_without_replacement(n, k, sig)) x(i, 0) = coin(sig) ? 1.0 : -1.0;
  Mat b = M->forward(x);
  if (p.noise > 0.0) b += gaussian(b.rows(), b.cols(), noise_rng, p.noise);

  GeneratedProblem g;
  g.x_true = x;
  g.b_norm = b.norm();
  g.spec.M = M;
  g.spec.b = b;
  g.spec.set = AtomicSet::signed_canonical(n);
  g.spec.alpha = default_alpha(cfg, g.b_norm);
  g.spec.k = cfg.k.value_or(k);
  g.spec.eps_tol = cfg.eps_tol.value_or(0.0);
  apply_formulation(cfg, g.spec, x.cwiseAbs().sum());
  g.description = p.problem + " analogue: m=" + std::to_string(m) + ", n=" + std::to_string(n) +
                  ", nnz=" + std::to_string(k) + ", operator=" + M->kind();
  return g;
}

GeneratedProblem generate_matrix_completion(const ExperimentConfig& cfg) {
  const CompletionParams& p = cfg.completion;
  if (p.rows <= 0 || p.cols <= 0 || p.rank < 1 || p.rank > std::min(p.rows, p.cols))
    throw ConfigError("matrix_completion: invalid shape or rank");
  auto fac = stream(cfg.seed, 11);
  auto pick = stream(cfg.seed, 12);
  auto noise_rng = stream(cfg.seed, 13);
  const Mat A = gaussian(p.rows, p.rank, fac);
  const Mat B = gaussian(p.cols, p.rank, fac);
  const Mat X = A * B.transpose();

  const Index total = p.rows * p.cols;
  const Index count = std::max<Index>(1, static_cast<Index>(std::llround(p.fraction * static_cast<double>(total))));
  std::vector<std::pair<Index, Index>> omega;
  for (Index lin : sample_without_replacement(total, count, pick)) omega.emplace_back(lin % p.rows, lin / p.rows);
  auto M = std::make_shared<EntryMaskOp>(omega, Shape{p.rows, p.cols});
  Mat observed = X;
  if (p.noise > 0.0) observed += gaussian(p.rows, p.cols, noise_rng, p.noise);
  const Mat b = M->raw_forward(observed);

  GeneratedProblem g;
  g.x_true = X;
  g.b_norm = b.norm();
  g.spec.M = M;
  g.spec.b = b;
  g.spec.set = AtomicSet::spectral_asym(p.rows, p.cols);
  g.spec.alpha = default_alpha(cfg, g.b_norm);
  g.spec.k = cfg.k.value_or(p.rank);
  g.spec.eps_tol = cfg.eps_tol.value_or(g.spec.alpha > 0.0 ? g.spec.alpha : 1e-12 * 0.5 * g.b_norm * g.b_norm);
  apply_formulation(cfg, g.spec, Eigen::JacobiSVD<Mat>(X).singularValues().sum());
  g.description = "matrix completion: " + std::to_string(p.rows) + "x" + std::to_string(p.cols) + ", rank " +
                  std::to_string(p.rank) + ", " + std::to_string(count) + " observed entries";
  return g;
}

GeneratedProblem generate_rpca(const ExperimentConfig& cfg) {
  const RpcaParams& p = cfg.rpca;
  if (p.rows <= 0 || p.cols <= 0 || p.rank < 0 || p.rank > std::min(p.rows, p.cols))
    throw ConfigError("rpca: invalid shape or rank");
  auto fac = stream(cfg.seed, 21);
  auto pick = stream(cfg.seed, 22);
  auto noise_rng = stream(cfg.seed, 23);
  Mat L = Mat::Zero(p.rows, p.cols);
  if (p.rank > 0) L = gaussian(p.rows, p.rank, fac) * gaussian(p.cols, p.rank, fac).transpose();
  const double rms = p.rank > 0 ? L.norm() / std::sqrt(static_cast<double>(L.size())) : 1.0;

  const Index total = p.rows * p.cols;
  const Index count = static_cast<Index>(std::llround(p.sparse_fraction * static_cast<double>(total)));
  Mat S = Mat::Zero(p.rows, p.cols);
  std::uniform_real_distribution<double> mag(0.5, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (Index lin : sample_without_replacement(total, count, pick))
    S.data()[lin] = (coin(pick) ? 1.0 : -1.0) * mag(pick) * p.sparse_magnitude * rms;
  Mat b = L + S;
  if (p.noise > 0.0) b += gaussian(p.rows, p.cols, noise_rng, p.noise);

  const double lambda = p.lambda.value_or(1.0 / std::sqrt(static_cast<double>(std::max(p.rows, p.cols))));
  if (!(lambda > 0.0)) throw ConfigError("rpca: lambda must be > 0");
  GeneratedProblem g;
  g.L_true = L;
  g.S_true = S;
  g.x_true = L + S;
  g.b_norm = b.norm();
  g.spec.M = std::make_shared<IdentityOp>(Shape{p.rows, p.cols});
  g.spec.b = b;
  g.spec.set = AtomicSet::weighted_sum(lambda, AtomicSet::spectral_asym(p.rows, p.cols),
                                       AtomicSet::signed_canonical(Shape{p.rows, p.cols}));
  g.spec.alpha = default_alpha(cfg, g.b_norm);
  g.spec.k = cfg.k.value_or(std::max<Index>(p.rank, 1));
  g.spec.k_right = cfg.k_right.value_or(std::max<Index>(count, 1));
  g.spec.eps_tol = cfg.eps_tol.value_or(g.spec.alpha > 0.0 ? g.spec.alpha : 1e-12 * 0.5 * g.b_norm * g.b_norm);
  if (cfg.formulation != Formulation::P3) throw ConfigError("rpca: only the P3 formulation is supported");
  g.spec.formulation = Formulation::P3;
  g.description = "rpca: " + std::to_string(p.rows) + "x" + std::to_string(p.cols) + ", rank " +
                  std::to_string(p.rank) + ", " + std::to_string(count) + " sparse entries";
  return g;
}

GeneratedProblem generate_custom(const ExperimentConfig& cfg) {
  const CustomParams& p = cfg.custom;
  if (p.A.size() == 0) throw ConfigError("custom: missing matrix A");
  if (p.b.rows() != p.A.rows() || p.b.cols() != 1) throw ConfigError("custom: b must have A.rows() entries");
  GeneratedProblem g;
  g.spec.M = std::make_shared<DenseOp>(p.A);
  g.spec.b = p.b;
  if (p.set == "signed")
    g.spec.set = AtomicSet::signed_canonical(p.A.cols());
  else if (p.set == "nonneg")
    g.spec.set = AtomicSet::nonneg_canonical(p.A.cols());
  else
    throw ConfigError("custom: set must be 'signed' or 'nonneg'");
  g.b_norm = p.b.norm();
  g.spec.alpha = default_alpha(cfg, g.b_norm);
  if (!cfg.k) throw ConfigError("custom: 'k' is required");
  g.spec.k = *cfg.k;
  g.spec.eps_tol = cfg.eps_tol.value_or(0.0);
  apply_formulation(cfg, g.spec, 1.0);
  g.x_true = Mat::Zero(p.A.cols(), 1);
  g.description = "custom dense instance " + std::to_string(p.A.rows()) + "x" + std::to_string(p.A.cols());
  return g;
}

GeneratedProblem generate(const ExperimentConfig& cfg) {
  // operator constructors and shape checks report invalid dimensions; at this
  // level they are configuration problems
  try {
    GeneratedProblem g;
    switch (cfg.kind) {
      case ExperimentKind::Bpdn: g = generate_bpdn(cfg); break;
      case ExperimentKind::MatrixCompletion: g = generate_matrix_completion(cfg); break;
      case ExperimentKind::Rpca: g = generate_rpca(cfg); break;
      case ExperimentKind::Custom: g = generate_custom(cfg); break;
    }
    g.spec.validate();
    return g;
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

RetrievalLimits limits_from(const ExperimentConfig& cfg) {
  RetrievalLimits l;
  l.max_iter = cfg.solver.max_iter;
  l.cadence = cfg.solver.cadence;
  l.oracle.inner_iters = cfg.solver.inner_iters;
  l.oracle.cg_steps = cfg.solver.cg_steps;
  l.oracle.step = cfg.solver.step;
  l.reduced.tol = cfg.solver.reduced_tol;
  l.reduced.max_iter = cfg.solver.reduced_max_iter;
  l.skip_opnorm = cfg.solver.skip_opnorm;
  return l;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log, bool quiet) {
  const GeneratedProblem g = generate(cfg);
  const RetrievalReport rep = run_retrieval(g.spec, limits_from(cfg));

  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output: cannot create '" + dir.string() + "': " + ec.message());

  json report = rep.to_json();
  report["problem"] = {{"description", g.description},
                       {"b_norm", g.b_norm},
                       {"alpha", g.spec.alpha},
                       {"eps_tol", g.spec.eps_tol},
                       {"k", g.spec.k},
                       {"formulation", to_string(g.spec.formulation)},
                       {"atomic_set", g.spec.set.name()},
                       {"seed", cfg.seed}};
  if (g.x_true.size() && g.x_true.norm() > 0.0 && rep.x.size() == g.x_true.size())
    report["relative_error"] = (rep.x - g.x_true).norm() / g.x_true.norm();

  {
    std::ofstream out(dir / cfg.report_name);
    if (!out) throw ConfigError("output: cannot write report");
    out << report.dump(2) << '\n';
  }
  {
    std::ofstream out(dir / cfg.trace_name, std::ios::binary);
    if (!out) throw ConfigError("output: cannot write trace");
    out << rep.to_csv();
  }
  if (!quiet) {
    log << g.description << "\n"
        << "status " << to_string(rep.status) << " after " << rep.iterations << " iterations, f = " << rep.f_final
        << " (alpha " << g.spec.alpha << "), card " << rep.card << ", nMat " << rep.nmat << " (+" << rep.setup_nmat
        << " setup)\n";
    if (report.contains("relative_error")) log << "relative error " << report["relative_error"].get<double>() << "\n";
    if (!rep.message.empty()) log << rep.message << "\n";
  }
  return rep.status == RetrievalStatus::FeasibleFound ? 0 : 1;
}

}  // namespace atomret
