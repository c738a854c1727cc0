#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

#include "eswm/random.hpp"

namespace eswm {

struct AgentId {
  std::uint64_t value = 0;

  friend auto operator<=>(const AgentId&, const AgentId&) = default;
  friend std::ostream& operator<<(std::ostream& os, AgentId id) { return os << id.value; }
};

/// A requester's reported type: one task with a deadline, an expiry and a
/// maximum valuation that decays quadratically after the deadline.
struct RequesterProfile {
  AgentId id;
  double task_size = 1.0;      // |task|, >= 1
  double deadline = 1.0;       // > 0
  double expiry = 1.0;         // >= deadline
  double max_valuation = 1.0;  // > 0
  double alpha = 0.0;          // depreciation speed, >= 0
};

/// A worker's type: ask cost plus the punctuality summary the platform holds.
/// `lambda` is always 1 / mu; `sigma` defaults to 2 mu.
struct WorkerProfile {
  AgentId id;
  double cost = 1.0;
  double mu = 1.0;
  double sigma = 2.0;
  double lambda = 1.0;
};

/// Floor applied to alpha and mu wherever they enter a ratio or a power, so
/// that alpha = 0 and vanishing punctuality estimates keep prices finite.
inline constexpr double kRatioFloor = 1e-9;

/// Throws std::invalid_argument when a profile breaks its invariants.
void validate(const RequesterProfile& r);
void validate(const WorkerProfile& w);

WorkerProfile make_worker(AgentId id, double cost, double mu);
WorkerProfile make_worker(AgentId id, double cost, double mu, double sigma);

/// Worker seen through a different punctuality estimate (sigma keeps the 2 mu rule).
WorkerProfile with_punctuality(const WorkerProfile& w, double mu);

/// Realized task value at time t: flat until the deadline, quadratic decay
/// afterwards, and zero past the expiry.
double task_valuation(const RequesterProfile& r, double t);

/// Time after the deadline at which the quadratic decay reaches zero
/// (infinity when alpha == 0).
double valuation_root(const RequesterProfile& r);

/// Normal(mu * t_d, sigma) truncated to [0, t_ex].
class SubmissionDistribution {
 public:
  SubmissionDistribution(const WorkerProfile& w, double deadline, double expiry);

  double location() const { return location_; }
  double scale() const { return scale_; }
  double upper() const { return upper_; }

  double pdf(double t) const;
  double cdf(double t) const;
  /// Probability mass on [lo, hi] intersected with the support.
  double mass(double lo, double hi) const;
  /// Inverse CDF; u in (0, 1).
  double quantile(double u) const;

 private:
  double location_;
  double scale_;
  double upper_;
  double std_lower_;  // (0 - location) / scale
  double std_upper_;  // (upper - location) / scale
  double cdf_lower_;  // Phi(std_lower_)
  double normalizer_;
};

double submission_pdf(const WorkerProfile& w, double t, double deadline, double expiry);
double submission_cdf(const WorkerProfile& w, double t, double deadline, double expiry);

double submission_time_from_uniform(const WorkerProfile& w, double deadline, double expiry,
                                    double u);
double sample_submission_time(const WorkerProfile& w, double deadline, double expiry, Rng& rng);

/// E[v_j(t)] when the task of `r` is executed by `w`.
double expected_valuation(const RequesterProfile& r, const WorkerProfile& w);

}  // namespace eswm

template <>
struct std::hash<eswm::AgentId> {
  std::size_t operator()(eswm::AgentId id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};
