#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eswm/market.hpp"
#include "eswm/report.hpp"

namespace eswm {

enum class ExperimentKind { single_auction, reselection, beta_sweep, oracle_compare };

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

/// Batch experiment description. Every field has a default for its family,
/// so an empty document reproduces the reference setting of that family.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::single_auction;
  std::size_t n_requesters = 1000;
  std::size_t n_workers = 2000;
  std::vector<std::size_t> capacity_grid;
  std::vector<double> beta_alpha_grid{0.5};
  std::vector<double> beta_lambda_grid{0.5};
  std::size_t n_runs = 200;
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  std::size_t rounds = 2;  // reselection only
  // oracle_compare only; workers scale with n_workers / n_requesters
  std::vector<std::size_t> requester_grid;
  bool benchmark_effective_pricing = true;
  PopulationDistributions distributions;
  PunctualityLearning learning;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Thrown for malformed configs; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

ExperimentConfig default_config(ExperimentKind kind);

/// Command-line values that replace the matching document keys.
struct ConfigOverrides {
  std::optional<std::string> experiment;
  std::optional<std::uint64_t> master_seed;
  std::optional<std::string> output_dir;
  std::optional<std::size_t> n_runs;
};

/// Parses a JSON document (blank text counts as {}). Missing keys take the
/// defaults of the document's experiment family; unknown keys and bad values
/// throw ConfigError.
ExperimentConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const ConfigOverrides& overrides = {});
std::string serialize_config(const ExperimentConfig& config);

/// Throws ConfigError on the first invalid field.
void validate(const ExperimentConfig& config);

/// One greedy-versus-optimal comparison on a single instance.
struct OracleRecord {
  std::size_t n_requesters = 0;
  std::size_t n_workers = 0;
  std::size_t capacity = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double esw_greedy = 0.0;
  double esw_hungarian = 0.0;
  double esw_top_k = 0.0;
  std::size_t matches_greedy = 0;
  std::size_t matches_hungarian = 0;
  std::size_t greedy_comparisons = 0;
  // wall-clock seconds; kept out of the CSV so reruns stay byte-identical
  double greedy_seconds = 0.0;
  double hungarian_seconds = 0.0;
};

std::string oracle_csv_header();
std::string to_csv(std::span<const OracleRecord> records);

struct ExperimentResult {
  std::vector<MetricsRecord> records;  // every family except oracle_compare
  std::vector<OracleRecord> oracle;    // oracle_compare
};

/// Seed of run `run`; everything random inside the run derives from it.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run);

/// Runs every run of the experiment in run-index order.
ExperimentResult run_records(const ExperimentConfig& config);

/// run_records, then writes <output_dir>/<experiment>_<seed>.csv and prints
/// per-group means with 95% confidence intervals to `summary`. Returns the
/// path written.
std::filesystem::path run_experiment(const ExperimentConfig& config, std::ostream& summary);

}  // namespace eswm
