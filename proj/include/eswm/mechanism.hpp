#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "eswm/model.hpp"

namespace eswm {

struct MechanismParams {
  std::size_t capacity = 1;  // K
  double beta_alpha = 0.5;   // exponent on alpha in requester ratios and fees
  double beta_lambda = 0.5;  // exponent on lambda in worker ratios and payments
  // Scale temporary prices by the realized valuation ratio at submission.
  // Always on for ESWM; the benchmark honors the flag.
  bool effective_pricing = true;
};

/// v_max / (alpha^beta * |task|), alpha floored at kRatioFloor.
double requester_ratio(const RequesterProfile& r, double beta_alpha);
/// c / lambda^beta.
double worker_ratio(const WorkerProfile& w, double beta_lambda);

struct RequesterSelection {
  std::vector<RequesterProfile> winners;  // descending ratio, ties by id
  std::optional<RequesterProfile> threshold;
  std::size_t comparisons = 0;
};

struct WorkerSelection {
  std::vector<WorkerProfile> winners;  // ascending ratio, ties by id
  std::optional<WorkerProfile> threshold;
  std::size_t comparisons = 0;
};

/// Greedy requester selection: repeatedly take the best ratio until K + 1
/// are held (or the roster runs out), then drop the worst as the threshold.
RequesterSelection wrsa(std::span<const RequesterProfile> roster, const MechanismParams& params);
WorkerSelection wwsa(std::span<const WorkerProfile> roster, const MechanismParams& params);

struct Trimmed {
  std::vector<RequesterProfile> winners_r;
  std::vector<WorkerProfile> winners_w;
  std::optional<RequesterProfile> threshold_r;
  std::optional<WorkerProfile> threshold_w;
  std::vector<double> fees;      // q_j, aligned with winners_r
  std::vector<double> payments;  // p_i, aligned with winners_w
};

/// Equalizes both winner lists (promoting the first cut agent to threshold)
/// and computes critical-value temporary fees and payments.
Trimmed trim(RequesterSelection requesters, WorkerSelection workers,
             const MechanismParams& params);

struct Match {
  AgentId requester;
  AgentId worker;
  double fee = 0.0;      // q_j
  double payment = 0.0;  // p_i
  std::optional<double> submission;
  double effective_fee = 0.0;      // q'_j
  double effective_payment = 0.0;  // p'_i
};

/// Result of one double auction. winners_r[k] and winners_w[k] form matches[k].
struct AuctionOutcome {
  std::vector<RequesterProfile> winners_r;
  std::vector<WorkerProfile> winners_w;
  std::optional<RequesterProfile> threshold_r;
  std::optional<WorkerProfile> threshold_w;
  std::vector<Match> matches;
  bool revoked = false;
  bool priced = false;
  std::size_t comparisons = 0;  // winner-selection work, both sides

  double total_fees() const;
  double total_payments() const;
  double total_effective_fees() const;
  double total_effective_payments() const;
};

/// Trims, checks budget balance (revoking when payments exceed fees) and
/// pairs the k-th best requester with the k-th best worker.
AuctionOutcome match(RequesterSelection requesters, WorkerSelection workers,
                     const MechanismParams& params);

using SubmissionTimes = std::unordered_map<AgentId, double>;
/// Produces a submission time for a matched (requester, worker) pair.
using SubmissionSampler = std::function<double(const RequesterProfile&, const WorkerProfile&)>;

/// Fills submission times and effective prices. Throws std::invalid_argument
/// when a matched worker has no submission time.
void price(AuctionOutcome& outcome, const SubmissionTimes& submissions);
void price(AuctionOutcome& outcome, const SubmissionSampler& sampler);

/// Pre-submission part of the pipeline: selection, trimming, matching.
AuctionOutcome allocate(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params);

AuctionOutcome run_eswm(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params,
                        const SubmissionTimes& submissions);
AuctionOutcome run_eswm(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params,
                        const SubmissionSampler& sampler);
/// Samples each matched worker's submission from its own profile.
AuctionOutcome run_eswm(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params,
                        Rng& rng);

/// Benchmark parameters: the same capacity with both exponents at zero, so
/// ratios reduce to v / |task| and c.
MechanismParams benchmark_params(const MechanismParams& params);

AuctionOutcome run_benchmark(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, const SubmissionTimes& submissions);
AuctionOutcome run_benchmark(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, const SubmissionSampler& sampler);
AuctionOutcome run_benchmark(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, Rng& rng);

enum class MechanismKind { eswm, benchmark };

const char* to_string(MechanismKind kind);

AuctionOutcome run_mechanism(MechanismKind kind, std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, const SubmissionSampler& sampler);

}  // namespace eswm
