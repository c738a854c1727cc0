#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "eswm/mechanism.hpp"

namespace eswm {

/// Welfare and utility summary of one auction. The trailing label fields
/// (mechanism .. n_workers) identify where a record came from in a batch.
struct MetricsRecord {
  double nsw = 0.0;
  double esw = 0.0;
  double platform_utility_pre = 0.0;
  double platform_utility_post = 0.0;
  double avg_requester_utility = 0.0;
  double avg_worker_utility = 0.0;
  std::size_t n_matches = 0;
  bool revoked = false;
  std::size_t capacity = 0;
  double beta_alpha = 0.0;
  double beta_lambda = 0.0;
  std::uint64_t seed = 0;

  std::string mechanism;
  std::size_t run = 0;
  std::size_t round = 0;
  std::size_t n_requesters = 0;
  std::size_t n_workers = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// Metrics for a priced outcome. `roster_w` carries the workers' true
/// punctuality; expected welfare is evaluated with it, not with whatever
/// estimate the platform used for selection. Averages divide by the full
/// roster sizes.
MetricsRecord compute_metrics(const AuctionOutcome& outcome,
                              std::span<const RequesterProfile> roster_r,
                              std::span<const WorkerProfile> roster_w);

/// Sum over matches of v_j(t_sub) - c_i.
double realized_welfare(const AuctionOutcome& outcome);

struct AgentUtilities {
  double requesters = 0.0;  // total over winners
  double workers = 0.0;
};
AgentUtilities realized_utilities(const AuctionOutcome& outcome);

std::string csv_header();
std::string to_csv_row(const MetricsRecord& r);
std::string to_csv(std::span<const MetricsRecord> records);
/// Writes header plus one row per record. Throws std::runtime_error when the
/// file cannot be written.
void emit_csv(std::span<const MetricsRecord> records, const std::filesystem::path& path);
std::vector<MetricsRecord> parse_csv(const std::filesystem::path& path);
std::vector<MetricsRecord> parse_csv_text(const std::string& text);

/// "%.6g" formatting used for every float column.
std::string format_number(double x);

}  // namespace eswm
