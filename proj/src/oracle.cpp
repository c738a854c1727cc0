#include "eswm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace eswm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double selection_welfare(const MatrixX<double>& scores,
                         const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  double total = 0.0;
  for (const auto& [j, i] : pairs) total += scores(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  return total;
}

}  // namespace

MatrixX<double> score_matrix(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers) {
  MatrixX<double> s(static_cast<Eigen::Index>(requesters.size()),
                    static_cast<Eigen::Index>(workers.size()));
  for (Eigen::Index j = 0; j < s.rows(); ++j) {
    for (Eigen::Index i = 0; i < s.cols(); ++i) {
      const auto& r = requesters[static_cast<std::size_t>(j)];
      const auto& w = workers[static_cast<std::size_t>(i)];
      s(j, i) = expected_valuation(r, w) - w.cost;
    }
  }
  return s;
}

MatrixX<int> Selection::to_matrix(std::size_t rows, std::size_t cols) const {
  MatrixX<int> l = MatrixX<int>::Zero(static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(cols));
  for (const auto& [j, i] : pairs) l(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1;
  return l;
}

std::vector<std::size_t> solve_square_assignment(const MatrixX<double>& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("assignment matrix must be square");
  const std::size_t n = static_cast<std::size_t>(cost.rows());
  // 1-based potentials; column 0 is the virtual start of each augmenting search.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    p[0] = row;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

Selection hungarian_optimal(const MatrixX<double>& scores, std::size_t capacity) {
  Selection out;
  const std::size_t n = static_cast<std::size_t>(scores.rows());
  const std::size_t m = static_cast<std::size_t>(scores.cols());
  if (n == 0 || m == 0 || capacity == 0) return out;

  // Min-cost flow on source -> requester -> worker -> sink with costs
  // shift - score >= 0. Every augmentation adds exactly one pair, so the
  // constant shift does not change which k-pair selection is cheapest.
  const double shift = scores.maxCoeff();
  auto shifted = [&](std::size_t j, std::size_t i) {
    return shift - scores(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  };
  const std::size_t source = 0, sink = n + m + 1, nodes = n + m + 2;
  auto req_node = [](std::size_t j) { return 1 + j; };
  auto wrk_node = [n](std::size_t i) { return 1 + n + i; };

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> partner_r(n, kNone), partner_w(m, kNone);
  std::vector<double> potential(nodes, 0.0), dist(nodes);
  std::vector<std::size_t> parent(nodes);
  std::vector<char> done(nodes);

  for (std::size_t round = 0; round < capacity; ++round) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    dist[source] = 0.0;

    // Finalized nodes stay put: rounding can leave tiny negative reduced
    // costs, and relaxing them would let the parent chain form a cycle.
    auto relax = [&](std::size_t from, std::size_t to, double cost) {
      if (done[to]) return;
      const double nd = dist[from] + cost + potential[from] - potential[to];
      if (nd < dist[to]) {
        dist[to] = nd;
        parent[to] = from;
      }
    };

    while (true) {
      std::size_t u = kNone;
      double best = kInf;
      for (std::size_t x = 0; x < nodes; ++x) {
        if (!done[x] && dist[x] < best) {
          best = dist[x];
          u = x;
        }
      }
      if (u == kNone || u == sink) break;
      done[u] = 1;
      if (u == source) {
        for (std::size_t j = 0; j < n; ++j) {
          if (partner_r[j] == kNone) relax(source, req_node(j), 0.0);
        }
      } else if (u <= n) {
        const std::size_t j = u - 1;
        for (std::size_t i = 0; i < m; ++i) {
          if (partner_r[j] != i) relax(u, wrk_node(i), shifted(j, i));
        }
      } else {
        const std::size_t i = u - 1 - n;
        if (partner_w[i] == kNone) {
          relax(u, sink, 0.0);
        } else {
          relax(u, req_node(partner_w[i]), -shifted(partner_w[i], i));
        }
      }
    }
    if (dist[sink] == kInf) break;

    const double path_cost = dist[sink] + potential[sink] - potential[source];
    if (shift - path_cost <= 0.0) break;

    for (std::size_t x = 0; x < nodes; ++x) potential[x] += std::min(dist[x], dist[sink]);

    for (std::size_t x = sink; x != source;) {
      const std::size_t from = parent[x];
      if (from >= 1 && from <= n && x > n && x != sink) {
        const std::size_t j = from - 1, i = x - 1 - n;
        partner_r[j] = i;
        partner_w[i] = j;
      }
      x = from;
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    if (partner_r[j] != kNone) out.pairs.emplace_back(j, partner_r[j]);
  }
  out.welfare = selection_welfare(scores, out.pairs);
  return out;
}

Selection hungarian_optimal(std::span<const RequesterProfile> requesters,
                            std::span<const WorkerProfile> workers, std::size_t capacity) {
  return hungarian_optimal(score_matrix(requesters, workers), capacity);
}

Selection hungarian_top_k(const MatrixX<double>& scores, std::size_t capacity) {
  Selection out;
  const Eigen::Index rows = scores.rows(), cols = scores.cols();
  if (rows == 0 || cols == 0 || capacity == 0) return out;
  const Eigen::Index n = std::max(rows, cols);
  MatrixX<double> cost = MatrixX<double>::Zero(n, n);
  cost.topLeftCorner(rows, cols) = -scores;
  const auto assignment = solve_square_assignment(cost);

  std::vector<std::pair<std::size_t, std::size_t>> real;
  for (std::size_t j = 0; j < static_cast<std::size_t>(rows); ++j) {
    if (assignment[j] < static_cast<std::size_t>(cols)) real.emplace_back(j, assignment[j]);
  }
  std::stable_sort(real.begin(), real.end(), [&](const auto& a, const auto& b) {
    return scores(static_cast<Eigen::Index>(a.first), static_cast<Eigen::Index>(a.second)) >
           scores(static_cast<Eigen::Index>(b.first), static_cast<Eigen::Index>(b.second));
  });
  for (const auto& pr : real) {
    if (out.pairs.size() == capacity) break;
    if (scores(static_cast<Eigen::Index>(pr.first), static_cast<Eigen::Index>(pr.second)) <= 0.0) break;
    out.pairs.push_back(pr);
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  out.welfare = selection_welfare(scores, out.pairs);
  return out;
}

namespace {

struct ExhaustiveSearch {
  const MatrixX<double>& scores;
  std::size_t capacity;
  std::vector<std::pair<std::size_t, std::size_t>> current;
  std::vector<std::pair<std::size_t, std::size_t>> best;
  double best_welfare = 0.0;
  unsigned used_cols = 0;

  void run(std::size_t row, double welfare) {
    if (welfare > best_welfare) {
      best_welfare = welfare;
      best = current;
    }
    if (row == static_cast<std::size_t>(scores.rows()) || current.size() == capacity) return;
    run(row + 1, welfare);
    for (std::size_t i = 0; i < static_cast<std::size_t>(scores.cols()); ++i) {
      if (used_cols & (1u << i)) continue;
      used_cols |= 1u << i;
      current.emplace_back(row, i);
      run(row + 1, welfare + scores(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)));
      current.pop_back();
      used_cols &= ~(1u << i);
    }
  }
};

}  // namespace

Selection exhaustive_optimal(const MatrixX<double>& scores, std::size_t capacity) {
  if (static_cast<std::size_t>(scores.rows()) > kExhaustiveLimit ||
      static_cast<std::size_t>(scores.cols()) > kExhaustiveLimit) {
    throw std::invalid_argument("exhaustive_optimal supports at most 8x8 instances");
  }
  ExhaustiveSearch search{scores, capacity, {}, {}, 0.0, 0u};
  search.run(0, 0.0);
  Selection out;
  out.pairs = std::move(search.best);
  out.welfare = selection_welfare(scores, out.pairs);
  return out;
}

Selection exhaustive_optimal(std::span<const RequesterProfile> requesters,
                             std::span<const WorkerProfile> workers, std::size_t capacity) {
  return exhaustive_optimal(score_matrix(requesters, workers), capacity);
}

double outcome_expected_welfare(const AuctionOutcome& outcome,
                                std::span<const WorkerProfile> true_workers) {
  std::unordered_map<AgentId, const WorkerProfile*> truth;
  for (const auto& w : true_workers) truth.emplace(w.id, &w);
  double total = 0.0;
  for (std::size_t k = 0; k < outcome.matches.size(); ++k) {
    const auto it = truth.find(outcome.winners_w[k].id);
    const WorkerProfile& w = it != truth.end() ? *it->second : outcome.winners_w[k];
    total += expected_valuation(outcome.winners_r[k], w) - w.cost;
  }
  return total;
}

MonteCarloEstimate mc_expected_valuation(const RequesterProfile& r, const WorkerProfile& w,
                                         std::size_t n_samples, Rng& rng) {
  if (n_samples < 1000) throw std::invalid_argument("mc_expected_valuation needs >= 1000 samples");
  const SubmissionDistribution dist(w, r.deadline, r.expiry);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 1; k <= n_samples; ++k) {
    const double x = task_valuation(r, dist.quantile(uniform01(rng)));
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  const double n = static_cast<double>(n_samples);
  return {mean, std::sqrt(m2 / (n - 1.0) / n)};
}

namespace {

struct AgentResult {
  bool wins = false;
  double price = 0.0;
};

AgentResult find_agent(const AuctionOutcome& out, Side side, AgentId agent) {
  for (const auto& m : out.matches) {
    if (side == Side::requester && m.requester == agent) return {true, m.fee};
    if (side == Side::worker && m.worker == agent) return {true, m.payment};
  }
  return {};
}

AuctionOutcome allocate_for(const ProbeInstance& inst, std::span<const RequesterProfile> rs,
                            std::span<const WorkerProfile> ws) {
  const MechanismParams params =
      inst.kind == MechanismKind::benchmark ? benchmark_params(inst.params) : inst.params;
  return allocate(rs, ws, params);
}

}  // namespace

ProbeReport truthfulness_probe(const ProbeInstance& instance, Side side, AgentId agent,
                               std::span<const double> misreport_grid, double tolerance) {
  ProbeReport rep;
  rep.side = side;
  rep.agent = agent;

  std::vector<RequesterProfile> rs = instance.requesters;
  std::vector<WorkerProfile> ws = instance.workers;
  double* reported = nullptr;
  if (side == Side::requester) {
    auto it = std::find_if(rs.begin(), rs.end(), [&](const auto& r) { return r.id == agent; });
    if (it == rs.end()) throw std::invalid_argument("probe agent not among requesters");
    reported = &it->max_valuation;
  } else {
    auto it = std::find_if(ws.begin(), ws.end(), [&](const auto& w) { return w.id == agent; });
    if (it == ws.end()) throw std::invalid_argument("probe agent not among workers");
    reported = &it->cost;
  }
  rep.true_value = *reported;

  auto utility = [&](const AgentResult& res) {
    if (!res.wins) return 0.0;
    return side == Side::requester ? rep.true_value - res.price : res.price - rep.true_value;
  };

  const AgentResult truthful = find_agent(allocate_for(instance, rs, ws), side, agent);
  rep.truthful_wins = truthful.wins;
  rep.truthful_price = truthful.price;
  rep.truthful_utility = utility(truthful);

  for (double report : misreport_grid) {
    *reported = report;
    const AgentResult res = find_agent(allocate_for(instance, rs, ws), side, agent);
    ProbePoint pt{report, res.wins, res.price, utility(res), 0.0};
    pt.delta = pt.utility - rep.truthful_utility;
    if (pt.delta > tolerance) ++rep.utility_violations;

    if (rep.truthful_wins) {
      const bool better = side == Side::requester ? report >= rep.true_value
                                                  : report <= rep.true_value;
      if (better && !res.wins) ++rep.monotonicity_violations;
      const double margin = tolerance * std::max(1.0, rep.truthful_price);
      const bool past_price = side == Side::requester ? report < rep.truthful_price - margin
                                                      : report > rep.truthful_price + margin;
      if (past_price && res.wins) ++rep.critical_value_violations;
    }
    rep.points.push_back(pt);
  }
  return rep;
}

}  // namespace eswm
