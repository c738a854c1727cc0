#include "eswm/market.hpp"

#include <cmath>
#include <stdexcept>

namespace eswm {

namespace {

enum : std::uint64_t { kStreamPopulation = 1, kStreamAssignment = 2, kStreamSubmission = 3 };

double draw(const Range& r, Rng& rng) { return uniform(rng, r.lo, r.hi); }

}  // namespace

Population draw_population(const PopulationDistributions& dist, std::size_t n_requesters,
                           std::size_t n_workers, Rng& rng) {
  Population pop;
  pop.requesters.reserve(n_requesters);
  for (std::size_t j = 0; j < n_requesters; ++j) {
    RequesterProfile r;
    r.id = AgentId{j};
    r.max_valuation = draw(dist.max_valuation, rng);
    r.task_size = draw(dist.task_size, rng);
    r.deadline = draw(dist.deadline, rng);
    r.expiry = r.deadline * draw(dist.expiry_factor, rng);
    r.alpha = draw(dist.alpha, rng);
    validate(r);
    pop.requesters.push_back(r);
  }
  pop.workers.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) {
    const double cost = draw(dist.cost, rng);
    const double mu = draw(dist.mu, rng);
    pop.workers.push_back(make_worker(AgentId{i}, cost, mu, dist.sigma_factor * mu));
  }
  return pop;
}

std::pair<double, double> participation_probabilities(double u_a, double u_b) {
  if (!(u_a >= 0.0) || !(u_b >= 0.0)) {
    throw std::invalid_argument("participation utilities must be non-negative");
  }
  const double a = std::sqrt(u_a);
  const double b = std::sqrt(u_b);
  if (a + b == 0.0) return {0.5, 0.5};
  const double pa = a / (a + b);
  return {pa, 1.0 - pa};
}

double PunctualityEstimates::estimate(AgentId worker) const {
  const auto it = tracks_.find(worker);
  return it == tracks_.end() ? 1.0 : it->second.value;
}

std::size_t PunctualityEstimates::observations(AgentId worker) const {
  const auto it = tracks_.find(worker);
  return it == tracks_.end() ? 0 : it->second.count;
}

double PunctualityEstimates::observe(AgentId worker, double ratio) {
  Track& t = tracks_[worker];
  ++t.count;
  switch (learning_.mode) {
    case PunctualityLearning::Mode::running_mean:
      t.value = t.count == 1 ? ratio : t.value + (ratio - t.value) / static_cast<double>(t.count);
      break;
    case PunctualityLearning::Mode::window: {
      t.recent.push_back(ratio);
      while (t.recent.size() > std::max<std::size_t>(learning_.window, 1)) t.recent.pop_front();
      double sum = 0.0;
      for (double x : t.recent) sum += x;
      t.value = sum / static_cast<double>(t.recent.size());
      break;
    }
    case PunctualityLearning::Mode::exponential:
      t.value = t.count == 1 ? ratio : (1.0 - learning_.smoothing) * t.value + learning_.smoothing * ratio;
      break;
  }
  return t.value;
}

double observe_punctuality(PunctualityEstimates& estimates, AgentId worker, double t_sub,
                           double deadline) {
  return estimates.observe(worker, t_sub / deadline);
}

MarketState make_market(const CompetitionConfig& config) {
  MarketState state{
      .population = {},
      .roster_r = {},
      .roster_w = {},
      .avg_utils = {},
      .estimates = {PunctualityEstimates(config.learning), PunctualityEstimates(config.learning)},
      .round = 0,
      .assignment_rng = make_rng(config.seed, kStreamAssignment),
      .seed = config.seed};
  Rng pop_rng = make_rng(config.seed, kStreamPopulation);
  state.population =
      draw_population(config.distributions, config.n_requesters, config.n_workers, pop_rng);
  return state;
}

void reselect(MarketState& state, Rng& rng, bool single_platform) {
  std::pair<double, double> pr{0.5, 0.5}, pp{0.5, 0.5};
  if (single_platform) {
    pr = pp = {1.0, 0.0};
  } else if (state.round > 0) {
    // Tardy workers can drive an average below zero; such a platform attracts
    // nobody on that side.
    const auto& [ua, va] = state.avg_utils[kPlatformA];
    const auto& [ub, vb] = state.avg_utils[kPlatformB];
    pr = participation_probabilities(std::max(ua, 0.0), std::max(ub, 0.0));
    pp = participation_probabilities(std::max(va, 0.0), std::max(vb, 0.0));
  }
  for (auto& r : state.roster_r) r.clear();
  for (auto& w : state.roster_w) w.clear();
  for (std::size_t j = 0; j < state.population.requesters.size(); ++j) {
    state.roster_r[uniform01(rng) < pr.first ? kPlatformA : kPlatformB].push_back(j);
  }
  for (std::size_t i = 0; i < state.population.workers.size(); ++i) {
    state.roster_w[uniform01(rng) < pp.first ? kPlatformA : kPlatformB].push_back(i);
  }
}

RoundResult run_round(MarketState& state, const std::array<PlatformSpec, 2>& platforms) {
  RoundResult result;
  const auto& truth = state.population.workers;
  for (std::size_t p = 0; p < 2; ++p) {
    std::vector<RequesterProfile> requesters;
    requesters.reserve(state.roster_r[p].size());
    for (std::size_t j : state.roster_r[p]) requesters.push_back(state.population.requesters[j]);

    std::vector<WorkerProfile> seen, real;
    seen.reserve(state.roster_w[p].size());
    real.reserve(state.roster_w[p].size());
    for (std::size_t i : state.roster_w[p]) {
      real.push_back(truth[i]);
      seen.push_back(with_punctuality(truth[i], state.estimates[p].estimate(truth[i].id)));
    }

    Rng sub_rng = make_rng(state.seed, kStreamSubmission, 2 * state.round + p);
    SubmissionSampler sampler = [&](const RequesterProfile& r, const WorkerProfile& w) {
      return sample_submission_time(truth.at(w.id.value), r.deadline, r.expiry, sub_rng);
    };
    AuctionOutcome outcome =
        run_mechanism(platforms[p].kind, requesters, seen, platforms[p].params, sampler);

    MetricsRecord rec = compute_metrics(outcome, requesters, real);
    rec.capacity = platforms[p].params.capacity;
    if (platforms[p].kind == MechanismKind::eswm) {
      rec.beta_alpha = platforms[p].params.beta_alpha;
      rec.beta_lambda = platforms[p].params.beta_lambda;
    }
    rec.seed = state.seed;
    rec.mechanism = to_string(platforms[p].kind);
    rec.round = state.round + 1;

    for (std::size_t k = 0; k < outcome.matches.size(); ++k) {
      observe_punctuality(state.estimates[p], outcome.matches[k].worker,
                          *outcome.matches[k].submission, outcome.winners_r[k].deadline);
    }
    state.avg_utils[p] = {rec.avg_requester_utility, rec.avg_worker_utility};
    result.metrics[p] = std::move(rec);
    result.outcomes[p] = std::move(outcome);
  }
  ++state.round;
  return result;
}

CompetitionResult run_competition(const CompetitionConfig& config) {
  CompetitionResult out;
  MarketState state = make_market(config);
  for (std::size_t k = 0; k < config.rounds; ++k) {
    reselect(state, state.assignment_rng, config.single_platform);
    out.rounds.push_back(run_round(state, config.platforms));
  }
  return out;
}

}  // namespace eswm
