#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eswm/mechanism.hpp"
#include "eswm/model.hpp"

namespace eswm {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// (j, i) -> E_i(v_j) - c_i for every requester row j and worker column i.
MatrixX<double> score_matrix(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers);

/// A set of (row, column) pairs with at most one pair per row and column.
struct Selection {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double welfare = 0.0;

  /// Binary matrix form; row and column sums are at most one.
  MatrixX<int> to_matrix(std::size_t rows, std::size_t cols) const;
};

/// Minimum-cost perfect assignment on a square matrix (Kuhn-Munkres with
/// dual potentials, O(n^3)). Returns the column assigned to each row.
std::vector<std::size_t> solve_square_assignment(const MatrixX<double>& cost);

/// Welfare-optimal selection of at most `capacity` pairs, negative pairs
/// never chosen. Hungarian-style successive shortest augmenting paths: each
/// augmentation yields the best selection of one more pair, and the search
/// stops at `capacity` or when the next augmentation no longer adds welfare.
Selection hungarian_optimal(const MatrixX<double>& scores, std::size_t capacity);
Selection hungarian_optimal(std::span<const RequesterProfile> requesters,
                            std::span<const WorkerProfile> workers, std::size_t capacity);

/// Full assignment on the zero-padded square matrix, then the `capacity`
/// best positive pairs of that assignment. Not optimal when capacity binds.
Selection hungarian_top_k(const MatrixX<double>& scores, std::size_t capacity);

/// Brute-force optimum over every feasible selection; both dimensions must
/// be at most kExhaustiveLimit.
inline constexpr std::size_t kExhaustiveLimit = 8;
Selection exhaustive_optimal(const MatrixX<double>& scores, std::size_t capacity);
Selection exhaustive_optimal(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers, std::size_t capacity);

/// E[v_j(t)] of an outcome's matched pairs under the workers' true profiles.
double outcome_expected_welfare(const AuctionOutcome& outcome,
                                std::span<const WorkerProfile> true_workers);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

/// Sample mean of v_j(t) with t drawn from the worker's submission
/// distribution. Requires n_samples >= 1000.
MonteCarloEstimate mc_expected_valuation(const RequesterProfile& r, const WorkerProfile& w,
                                         std::size_t n_samples, Rng& rng);

enum class Side { requester, worker };

struct ProbeInstance {
  std::vector<RequesterProfile> requesters;
  std::vector<WorkerProfile> workers;
  MechanismParams params;
  MechanismKind kind = MechanismKind::eswm;
};

struct ProbePoint {
  double report = 0.0;
  bool wins = false;
  double price = 0.0;    // temporary fee or payment when winning
  double utility = 0.0;  // pre-submission utility at the true type
  double delta = 0.0;    // utility minus truthful utility
};

struct ProbeReport {
  Side side = Side::requester;
  AgentId agent;
  double true_value = 0.0;  // v_max or c
  bool truthful_wins = false;
  double truthful_price = 0.0;
  double truthful_utility = 0.0;
  std::vector<ProbePoint> points;
  std::size_t utility_violations = 0;         // misreport strictly better than truth
  std::size_t monotonicity_violations = 0;    // winner loses with a better report
  std::size_t critical_value_violations = 0;  // winner keeps winning past its price
};

/// Reruns the pre-submission mechanism once per misreported v_max (requester)
/// or cost (worker) and compares utilities at the agent's true type.
ProbeReport truthfulness_probe(const ProbeInstance& instance, Side side, AgentId agent,
                               std::span<const double> misreport_grid, double tolerance = 1e-9);

}  // namespace eswm
