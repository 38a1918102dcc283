// atomret run --config <path> [--out <dir>] [--seed <u64>] [--max-iter <n>] [--quiet]
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "atomret/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Atomic-sparse primal retrieval runs"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Generate an instance from a JSON config and run retrieval");
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int max_iter = 0;
  bool quiet = false;
  run->add_option("--config", config, "JSON experiment config")->required();
  auto* out_opt = run->add_option("--out", out, "Output directory (overrides output.dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Generator seed (overrides seed)");
  auto* iter_opt = run->add_option("--max-iter", max_iter, "Outer iteration limit")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", quiet, "Suppress the summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto cfg = atomret::ExperimentConfig::from_file(config);
    if (*out_opt) cfg.out_dir = out;
    if (*seed_opt) cfg.seed = seed;
    if (*iter_opt) cfg.solver.max_iter = max_iter;
    return atomret::run_experiment(cfg, std::cout, quiet);
  } catch (const atomret::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  }
}
