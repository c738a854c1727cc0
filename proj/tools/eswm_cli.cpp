#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "eswm/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Run a batch experiment and write its CSV"};

  std::string config_path;
  eswm::ConfigOverrides overrides;
  std::string experiment, out;
  std::uint64_t seed = 0;
  std::size_t runs = 0;
  bool print_config = false;

  app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  auto* exp_opt = app.add_option(
      "--experiment", experiment, "single_auction, reselection, beta_sweep or oracle_compare");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* out_opt = app.add_option("--out", out, "output directory");
  auto* runs_opt = app.add_option("--runs", runs, "number of runs")->check(CLI::PositiveNumber);
  app.add_flag("--print-config", print_config, "print the resolved config and exit");
  CLI11_PARSE(app, argc, argv);

  if (*exp_opt) overrides.experiment = experiment;
  if (*seed_opt) overrides.master_seed = seed;
  if (*out_opt) overrides.output_dir = out;
  if (*runs_opt) overrides.n_runs = runs;

  eswm::ExperimentConfig config;
  try {
    config = config_path.empty() ? eswm::parse_config("", overrides)
                                 : eswm::load_config(config_path, overrides);
  } catch (const eswm::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  }

  if (print_config) {
    std::cout << eswm::serialize_config(config);
    return 0;
  }

  try {
    eswm::run_experiment(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
