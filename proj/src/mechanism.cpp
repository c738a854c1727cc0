#include "eswm/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace eswm {

namespace {

template <typename Profile>
struct Ranked {
  Profile profile;
  double ratio;
};

// Requesters rank by descending ratio, workers by ascending ratio; equal
// ratios fall back to the smaller id so every run is reproducible.
bool requester_before(const Ranked<RequesterProfile>& a, const Ranked<RequesterProfile>& b) {
  if (a.ratio != b.ratio) return a.ratio > b.ratio;
  return a.profile.id < b.profile.id;
}

bool worker_before(const Ranked<WorkerProfile>& a, const Ranked<WorkerProfile>& b) {
  if (a.ratio != b.ratio) return a.ratio < b.ratio;
  return a.profile.id < b.profile.id;
}

template <typename Profile, typename RatioFn, typename Before>
std::pair<std::vector<Profile>, std::optional<Profile>> greedy_select(
    std::span<const Profile> roster, std::size_t capacity, RatioFn ratio, Before before,
    std::size_t& comparisons) {
  std::vector<Ranked<Profile>> pool;
  pool.reserve(roster.size());
  for (const auto& p : roster) pool.push_back({p, ratio(p)});

  std::vector<Ranked<Profile>> selected;
  const std::size_t target = capacity + 1;
  while (selected.size() != target && !pool.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < pool.size(); ++k) {
      ++comparisons;
      if (before(pool[k], pool[best])) best = k;
    }
    selected.push_back(pool[best]);
    pool[best] = pool.back();
    pool.pop_back();
  }

  std::optional<Profile> threshold;
  if (!selected.empty()) {
    std::size_t worst = 0;
    for (std::size_t k = 1; k < selected.size(); ++k) {
      ++comparisons;
      if (before(selected[worst], selected[k])) worst = k;
    }
    threshold = selected[worst].profile;
    selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(worst));
  }

  std::vector<Profile> winners;
  winners.reserve(selected.size());
  for (auto& s : selected) winners.push_back(std::move(s.profile));
  return {std::move(winners), std::move(threshold)};
}

double floored_alpha(const RequesterProfile& r) { return std::max(r.alpha, kRatioFloor); }

}  // namespace

double requester_ratio(const RequesterProfile& r, double beta_alpha) {
  return r.max_valuation / (std::pow(floored_alpha(r), beta_alpha) * r.task_size);
}

double worker_ratio(const WorkerProfile& w, double beta_lambda) {
  return w.cost / std::pow(w.lambda, beta_lambda);
}

RequesterSelection wrsa(std::span<const RequesterProfile> roster, const MechanismParams& params) {
  RequesterSelection out;
  auto [winners, threshold] = greedy_select<RequesterProfile>(
      roster, params.capacity,
      [&](const RequesterProfile& r) { return requester_ratio(r, params.beta_alpha); },
      requester_before, out.comparisons);
  out.winners = std::move(winners);
  out.threshold = std::move(threshold);
  return out;
}

WorkerSelection wwsa(std::span<const WorkerProfile> roster, const MechanismParams& params) {
  WorkerSelection out;
  auto [winners, threshold] = greedy_select<WorkerProfile>(
      roster, params.capacity,
      [&](const WorkerProfile& w) { return worker_ratio(w, params.beta_lambda); }, worker_before,
      out.comparisons);
  out.winners = std::move(winners);
  out.threshold = std::move(threshold);
  return out;
}

Trimmed trim(RequesterSelection requesters, WorkerSelection workers,
             const MechanismParams& params) {
  Trimmed t;
  t.winners_r = std::move(requesters.winners);
  t.winners_w = std::move(workers.winners);
  t.threshold_r = std::move(requesters.threshold);
  t.threshold_w = std::move(workers.threshold);

  const std::size_t nr = t.winners_r.size();
  const std::size_t nw = t.winners_w.size();
  if (nr < nw) {
    t.threshold_w = t.winners_w[nr];
    t.winners_w.resize(nr);
  } else if (nr > nw) {
    t.threshold_r = t.winners_r[nw];
    t.winners_r.resize(nw);
  }
  if (t.winners_r.empty()) return t;

  const RequesterProfile& rth = *t.threshold_r;
  const WorkerProfile& wth = *t.threshold_w;
  const double alpha_th = std::pow(floored_alpha(rth), params.beta_alpha);
  const double unit_value_th = rth.max_valuation / rth.task_size;
  const double payment_rate_th = wth.cost / std::pow(wth.lambda, params.beta_lambda);

  t.fees.reserve(t.winners_r.size());
  for (const auto& r : t.winners_r) {
    const double alpha_j = std::pow(floored_alpha(r), params.beta_alpha);
    t.fees.push_back(alpha_j / alpha_th * unit_value_th * r.task_size);
  }
  t.payments.reserve(t.winners_w.size());
  for (const auto& w : t.winners_w) {
    t.payments.push_back(payment_rate_th * std::pow(w.lambda, params.beta_lambda));
  }
  return t;
}

double AuctionOutcome::total_fees() const {
  return std::accumulate(matches.begin(), matches.end(), 0.0,
                         [](double s, const Match& m) { return s + m.fee; });
}

double AuctionOutcome::total_payments() const {
  return std::accumulate(matches.begin(), matches.end(), 0.0,
                         [](double s, const Match& m) { return s + m.payment; });
}

double AuctionOutcome::total_effective_fees() const {
  return std::accumulate(matches.begin(), matches.end(), 0.0,
                         [](double s, const Match& m) { return s + m.effective_fee; });
}

double AuctionOutcome::total_effective_payments() const {
  return std::accumulate(matches.begin(), matches.end(), 0.0,
                         [](double s, const Match& m) { return s + m.effective_payment; });
}

AuctionOutcome match(RequesterSelection requesters, WorkerSelection workers,
                     const MechanismParams& params) {
  AuctionOutcome out;
  out.comparisons = requesters.comparisons + workers.comparisons;
  Trimmed t = trim(std::move(requesters), std::move(workers), params);
  out.threshold_r = std::move(t.threshold_r);
  out.threshold_w = std::move(t.threshold_w);

  const double sum_q = std::accumulate(t.fees.begin(), t.fees.end(), 0.0);
  const double sum_p = std::accumulate(t.payments.begin(), t.payments.end(), 0.0);
  if (sum_p > sum_q) {
    out.revoked = true;
    return out;
  }

  out.winners_r = std::move(t.winners_r);
  out.winners_w = std::move(t.winners_w);
  out.matches.reserve(out.winners_r.size());
  for (std::size_t k = 0; k < out.winners_r.size(); ++k) {
    Match m;
    m.requester = out.winners_r[k].id;
    m.worker = out.winners_w[k].id;
    m.fee = t.fees[k];
    m.payment = t.payments[k];
    out.matches.push_back(m);
  }
  return out;
}

namespace {

void apply_pricing(AuctionOutcome& outcome, std::size_t k, double t_sub) {
  Match& m = outcome.matches[k];
  const RequesterProfile& r = outcome.winners_r[k];
  m.submission = t_sub;
  const double achieved = task_valuation(r, t_sub) / r.max_valuation;
  m.effective_fee = achieved * m.fee;
  m.effective_payment = achieved * m.payment;
}

}  // namespace

void price(AuctionOutcome& outcome, const SubmissionTimes& submissions) {
  for (std::size_t k = 0; k < outcome.matches.size(); ++k) {
    const auto it = submissions.find(outcome.matches[k].worker);
    if (it == submissions.end()) {
      throw std::invalid_argument("no submission time for matched worker " +
                                  std::to_string(outcome.matches[k].worker.value));
    }
    apply_pricing(outcome, k, it->second);
  }
  outcome.priced = true;
}

void price(AuctionOutcome& outcome, const SubmissionSampler& sampler) {
  for (std::size_t k = 0; k < outcome.matches.size(); ++k) {
    apply_pricing(outcome, k, sampler(outcome.winners_r[k], outcome.winners_w[k]));
  }
  outcome.priced = true;
}

AuctionOutcome allocate(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params) {
  if (params.capacity < 1) throw std::invalid_argument("capacity must be >= 1");
  return match(wrsa(requesters, params), wwsa(workers, params), params);
}

namespace {

SubmissionSampler own_profile_sampler(Rng& rng) {
  return [&rng](const RequesterProfile& r, const WorkerProfile& w) {
    return sample_submission_time(w, r.deadline, r.expiry, rng);
  };
}

// Fixed-price variant: effective prices equal the temporary ones, but the
// realized submission is still recorded.
void freeze_prices(AuctionOutcome& outcome) {
  for (auto& m : outcome.matches) {
    m.effective_fee = m.fee;
    m.effective_payment = m.payment;
  }
}

}  // namespace

AuctionOutcome run_eswm(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params,
                        const SubmissionTimes& submissions) {
  AuctionOutcome out = allocate(requesters, workers, params);
  price(out, submissions);
  return out;
}

AuctionOutcome run_eswm(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params,
                        const SubmissionSampler& sampler) {
  AuctionOutcome out = allocate(requesters, workers, params);
  price(out, sampler);
  return out;
}

AuctionOutcome run_eswm(std::span<const RequesterProfile> requesters,
                        std::span<const WorkerProfile> workers, const MechanismParams& params,
                        Rng& rng) {
  return run_eswm(requesters, workers, params, own_profile_sampler(rng));
}

MechanismParams benchmark_params(const MechanismParams& params) {
  MechanismParams b = params;
  b.beta_alpha = 0.0;
  b.beta_lambda = 0.0;
  return b;
}

AuctionOutcome run_benchmark(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, const SubmissionTimes& submissions) {
  AuctionOutcome out = allocate(requesters, workers, benchmark_params(params));
  price(out, submissions);
  if (!params.effective_pricing) freeze_prices(out);
  return out;
}

AuctionOutcome run_benchmark(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, const SubmissionSampler& sampler) {
  AuctionOutcome out = allocate(requesters, workers, benchmark_params(params));
  price(out, sampler);
  if (!params.effective_pricing) freeze_prices(out);
  return out;
}

AuctionOutcome run_benchmark(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, Rng& rng) {
  return run_benchmark(requesters, workers, params, own_profile_sampler(rng));
}

const char* to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::eswm:
      return "eswm";
    case MechanismKind::benchmark:
      return "benchmark";
  }
  return "unknown";
}

AuctionOutcome run_mechanism(MechanismKind kind, std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers,
                             const MechanismParams& params, const SubmissionSampler& sampler) {
  if (kind == MechanismKind::benchmark) {
    return run_benchmark(requesters, workers, params, sampler);
  }
  return run_eswm(requesters, workers, params, sampler);
}

}  // namespace eswm
