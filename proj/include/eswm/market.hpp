#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eswm/mechanism.hpp"
#include "eswm/model.hpp"
#include "eswm/report.hpp"

namespace eswm {

/// Closed interval used for uniform draws; open lower bounds such as (0, 100]
/// are represented as [kOpenLowerBound, 100].
struct Range {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const Range&, const Range&) = default;
};

inline constexpr double kOpenLowerBound = 1e-9;

struct PopulationDistributions {
  Range max_valuation{kOpenLowerBound, 100.0};
  Range task_size{1.0, 10.0};
  Range deadline{kOpenLowerBound, 100.0};
  Range expiry_factor{1.0, 1.5};  // expiry = factor * deadline
  Range alpha{kOpenLowerBound, 100.0};
  Range cost{kOpenLowerBound, 10.0};
  Range mu{kOpenLowerBound, 1.5};
  double sigma_factor = 2.0;  // sigma = factor * mu
  friend bool operator==(const PopulationDistributions&, const PopulationDistributions&) = default;
};

struct Population {
  std::vector<RequesterProfile> requesters;
  std::vector<WorkerProfile> workers;  // true punctuality
};

/// Requester ids 0..n_r-1 and worker ids 0..n_w-1, every field uniform over its range.
Population draw_population(const PopulationDistributions& dist, std::size_t n_requesters,
                           std::size_t n_workers, Rng& rng);

/// Probability of joining each platform, proportional to the square root of
/// the average utility it paid out. Both zero gives an even split; negative
/// inputs throw std::invalid_argument.
std::pair<double, double> participation_probabilities(double u_a, double u_b);

struct PunctualityLearning {
  enum class Mode { running_mean, window, exponential };
  Mode mode = Mode::running_mean;
  std::size_t window = 10;  // observations kept in window mode
  double smoothing = 0.3;   // weight of the newest observation in exponential mode
  friend bool operator==(const PunctualityLearning&, const PunctualityLearning&) = default;
};

/// One platform's view of worker punctuality, learned from t_sub / t_d.
class PunctualityEstimates {
 public:
  explicit PunctualityEstimates(PunctualityLearning learning = {}) : learning_(learning) {}

  /// Current mu estimate; 1 for workers never observed.
  double estimate(AgentId worker) const;
  std::size_t observations(AgentId worker) const;
  std::size_t size() const { return tracks_.size(); }

  double observe(AgentId worker, double ratio);

 private:
  struct Track {
    std::size_t count = 0;
    double value = 1.0;
    std::deque<double> recent;
  };
  PunctualityLearning learning_;
  std::unordered_map<AgentId, Track> tracks_;
};

/// Records t_sub / t_d for `worker` and returns the platform's new mu estimate.
double observe_punctuality(PunctualityEstimates& estimates, AgentId worker, double t_sub,
                           double deadline);

struct PlatformSpec {
  MechanismKind kind = MechanismKind::eswm;
  MechanismParams params;
};

struct CompetitionConfig {
  std::size_t n_requesters = 2000;
  std::size_t n_workers = 4000;
  std::size_t rounds = 2;
  std::array<PlatformSpec, 2> platforms{
      PlatformSpec{MechanismKind::eswm, {}},
      PlatformSpec{MechanismKind::benchmark, {}}};
  bool single_platform = false;  // everyone joins platform A every round
  PopulationDistributions distributions;
  PunctualityLearning learning;
  std::uint64_t seed = 0;
};

enum Platform : std::size_t { kPlatformA = 0, kPlatformB = 1 };

struct MarketState {
  Population population;
  std::array<std::vector<std::size_t>, 2> roster_r;  // indices into population.requesters
  std::array<std::vector<std::size_t>, 2> roster_w;
  // (average requester utility, average worker utility) of the latest round
  std::array<std::pair<double, double>, 2> avg_utils{};
  std::array<PunctualityEstimates, 2> estimates;
  std::size_t round = 0;
  Rng assignment_rng;
  std::uint64_t seed = 0;
};

MarketState make_market(const CompetitionConfig& config);

/// Each participant joins A independently with the probability its side's
/// average utilities imply (an even split before any history exists).
void reselect(MarketState& state, Rng& rng, bool single_platform = false);

struct RoundResult {
  std::array<MetricsRecord, 2> metrics;
  std::array<AuctionOutcome, 2> outcomes;
};

/// Runs both platforms on their current rosters. Platforms select with their
/// own punctuality estimates; submissions are sampled from true profiles.
RoundResult run_round(MarketState& state, const std::array<PlatformSpec, 2>& platforms);

struct CompetitionResult {
  std::vector<RoundResult> rounds;
};

/// reselect followed by run_round, `config.rounds` times.
CompetitionResult run_competition(const CompetitionConfig& config);

}  // namespace eswm
