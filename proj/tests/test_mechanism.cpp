#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "eswm/market.hpp"
#include "eswm/mechanism.hpp"
#include "eswm/report.hpp"

using namespace eswm;

namespace {

RequesterProfile req(std::uint64_t id, double v, double alpha, double size = 1.0,
                     double td = 10.0, double tex = 15.0) {
  return RequesterProfile{AgentId{id}, size, td, tex, v, alpha};
}

WorkerProfile wrk(std::uint64_t id, double cost, double mu = 1.0) {
  return make_worker(AgentId{id}, cost, mu);
}

std::vector<RequesterProfile> running_requesters() {
  return {req(1, 100, 1), req(2, 90, 10), req(3, 50, 1)};
}

std::vector<WorkerProfile> running_workers() { return {wrk(1, 1), wrk(2, 4), wrk(3, 2)}; }

MechanismParams params(std::size_t k, double ba = 1.0, double bl = 1.0) {
  MechanismParams p;
  p.capacity = k;
  p.beta_alpha = ba;
  p.beta_lambda = bl;
  return p;
}

std::vector<std::uint64_t> ids(const auto& profiles) {
  std::vector<std::uint64_t> out;
  for (const auto& p : profiles) out.push_back(p.id.value);
  return out;
}

}  // namespace

TEST_CASE("wrsa on the running example") {
  const auto rs = running_requesters();
  const auto sel = wrsa(rs, params(1));
  CHECK(ids(sel.winners) == std::vector<std::uint64_t>{1});
  REQUIRE(sel.threshold);
  CHECK(sel.threshold->id.value == 3);
  CHECK(requester_ratio(rs[1], 1.0) == doctest::Approx(9.0));

  SUBCASE("roster exhausted before K + 1") {
    const auto all = wrsa(rs, params(10));
    CHECK(ids(all.winners) == std::vector<std::uint64_t>{1, 3});
    CHECK(all.threshold->id.value == 2);
  }
  SUBCASE("beta zero ignores alpha") {
    const auto flat = wrsa(rs, params(1, 0.0));
    CHECK(ids(flat.winners) == std::vector<std::uint64_t>{1});
    CHECK(flat.threshold->id.value == 2);
  }
  SUBCASE("single requester cannot be priced") {
    const std::vector<RequesterProfile> one{req(9, 10, 1)};
    const auto s = wrsa(one, params(3));
    CHECK(s.winners.empty());
    CHECK(s.threshold->id.value == 9);
  }
}

TEST_CASE("wwsa on the running example") {
  const auto ws = running_workers();
  const auto sel = wwsa(ws, params(1));
  CHECK(ids(sel.winners) == std::vector<std::uint64_t>{1});
  CHECK(sel.threshold->id.value == 3);

  SUBCASE("equal costs rank by punctuality") {
    const std::vector<WorkerProfile> eq{wrk(1, 2, 1.2), wrk(2, 2, 0.5), wrk(3, 2, 0.9),
                                        wrk(4, 2, 1.4)};
    const auto s = wwsa(eq, params(3));
    CHECK(ids(s.winners) == std::vector<std::uint64_t>{2, 3, 1});
    CHECK(s.threshold->id.value == 4);
  }
  SUBCASE("beta zero ranks by cost only") {
    const std::vector<WorkerProfile> mixed{wrk(1, 3, 0.1), wrk(2, 1, 1.5), wrk(3, 2, 0.7)};
    const auto s = wwsa(mixed, params(2, 1.0, 0.0));
    CHECK(ids(s.winners) == std::vector<std::uint64_t>{2, 3});
    CHECK(s.threshold->id.value == 1);
  }
}

TEST_CASE("trim prices winners at the threshold ratios") {
  const auto rs = running_requesters();
  const auto ws = running_workers();
  const auto t = trim(wrsa(rs, params(1)), wwsa(ws, params(1)), params(1));
  REQUIRE(t.fees.size() == 1);
  CHECK(t.fees[0] == doctest::Approx(50.0));
  CHECK(t.payments[0] == doctest::Approx(2.0));
  CHECK(t.threshold_r->id.value == 3);
  CHECK(t.threshold_w->id.value == 3);

  SUBCASE("shorter requester side promotes a worker threshold") {
    const std::vector<RequesterProfile> few{req(1, 100, 1), req(2, 80, 1), req(3, 60, 1)};
    std::vector<WorkerProfile> many;
    for (std::uint64_t i = 0; i < 10; ++i) many.push_back(wrk(i, 1.0 + static_cast<double>(i)));
    const auto tt = trim(wrsa(few, params(5)), wwsa(many, params(5)), params(5));
    CHECK(ids(tt.winners_r) == std::vector<std::uint64_t>{1, 2});
    CHECK(ids(tt.winners_w) == std::vector<std::uint64_t>{0, 1});
    CHECK(tt.threshold_w->id.value == 2);
    CHECK(tt.payments[0] == doctest::Approx(3.0));
    CHECK(tt.fees[0] == doctest::Approx(60.0));
  }
  SUBCASE("shorter worker side promotes a requester threshold") {
    std::vector<RequesterProfile> many;
    for (std::uint64_t j = 0; j < 6; ++j) many.push_back(req(j, 100.0 - 10.0 * j, 1));
    const std::vector<WorkerProfile> few{wrk(1, 1), wrk(2, 2)};
    const auto tt = trim(wrsa(many, params(4)), wwsa(few, params(4)), params(4));
    CHECK(ids(tt.winners_r) == std::vector<std::uint64_t>{0});
    CHECK(tt.threshold_r->id.value == 1);
    CHECK(tt.fees[0] == doctest::Approx(90.0));
  }
  SUBCASE("an empty side empties both") {
    const std::vector<RequesterProfile> one{req(1, 100, 1)};
    const auto tt = trim(wrsa(one, params(2)), wwsa(ws, params(2)), params(2));
    CHECK(tt.winners_r.empty());
    CHECK(tt.winners_w.empty());
    CHECK(tt.fees.empty());
    CHECK(tt.payments.empty());
  }
}

TEST_CASE("match pairs by rank and revokes unbalanced budgets") {
  const auto out = match(wrsa(running_requesters(), params(1)), wwsa(running_workers(), params(1)),
                         params(1));
  CHECK_FALSE(out.revoked);
  REQUIRE(out.matches.size() == 1);
  CHECK(out.matches[0].requester.value == 1);
  CHECK(out.matches[0].worker.value == 1);

  SUBCASE("rank-order pairing") {
    const std::vector<RequesterProfile> rs{req(1, 50, 1), req(2, 100, 1), req(3, 10, 1)};
    const std::vector<WorkerProfile> ws{wrk(7, 2), wrk(8, 1), wrk(9, 3)};
    const auto m = match(wrsa(rs, params(2)), wwsa(ws, params(2)), params(2));
    REQUIRE(m.matches.size() == 2);
    CHECK(m.matches[0].requester.value == 2);
    CHECK(m.matches[0].worker.value == 8);
    CHECK(m.matches[1].requester.value == 1);
    CHECK(m.matches[1].worker.value == 7);
  }
  SUBCASE("revocation") {
    const std::vector<RequesterProfile> rs{req(1, 1.0, 1), req(2, 1.0, 1)};
    const std::vector<WorkerProfile> ws{wrk(1, 5), wrk(2, 5)};
    const auto m = match(wrsa(rs, params(1)), wwsa(ws, params(1)), params(1));
    CHECK(m.revoked);
    CHECK(m.matches.empty());
    CHECK(m.winners_r.empty());
    CHECK(m.winners_w.empty());
  }
}

TEST_CASE("pricing scales by the achieved valuation") {
  const std::vector<RequesterProfile> rs{req(1, 100, 4), req(2, 10, 4)};
  const std::vector<WorkerProfile> ws{wrk(1, 1), wrk(2, 2)};
  AuctionOutcome out = allocate(rs, ws, params(1));
  REQUIRE(out.matches.size() == 1);
  out.matches[0].fee = 50.0;
  out.matches[0].payment = 2.0;

  price(out, SubmissionTimes{{AgentId{1}, 12.0}});
  CHECK(out.matches[0].effective_fee == doctest::Approx(42.0));
  CHECK(out.matches[0].effective_payment == doctest::Approx(1.68));

  price(out, SubmissionTimes{{AgentId{1}, 9.0}});
  CHECK(out.matches[0].effective_fee == 50.0);
  CHECK(out.matches[0].effective_payment == 2.0);

  price(out, SubmissionTimes{{AgentId{1}, 15.5}});
  CHECK(out.matches[0].effective_fee == 0.0);
  CHECK(out.matches[0].effective_payment == 0.0);

  CHECK_THROWS_AS(price(out, SubmissionTimes{{AgentId{2}, 1.0}}), std::invalid_argument);
}

TEST_CASE("full pipeline on the running example") {
  const auto rs = running_requesters();
  const auto ws = running_workers();
  const auto out = run_eswm(rs, ws, params(1), SubmissionTimes{{AgentId{1}, 5.0}});
  REQUIRE(out.matches.size() == 1);
  CHECK(out.matches[0].fee == doctest::Approx(50.0));
  CHECK(out.matches[0].payment == doctest::Approx(2.0));
  CHECK(out.priced);

  SUBCASE("capacity above both rosters") {
    const auto big = run_eswm(rs, ws, params(100), SubmissionTimes{{AgentId{1}, 1.0},
                                                                   {AgentId{2}, 1.0},
                                                                   {AgentId{3}, 1.0}});
    CHECK(big.matches.size() == 2);
  }
  SUBCASE("benchmark prices ignore alpha") {
    const auto b = run_benchmark(rs, ws, params(1), SubmissionTimes{{AgentId{1}, 5.0}});
    REQUIRE(b.matches.size() == 1);
    CHECK(b.matches[0].fee == doctest::Approx(90.0));
    CHECK(b.matches[0].requester.value == 1);
  }
}

TEST_CASE("benchmark equals ESWM with zero exponents") {
  Rng rng(31);
  const auto pop = draw_population(PopulationDistributions{}, 60, 90, rng);
  const auto p = params(20, 0.0, 0.0);
  Rng a(1), b(1);
  const auto e = run_eswm(pop.requesters, pop.workers, p, a);
  const auto m = run_benchmark(pop.requesters, pop.workers, params(20, 0.7, 1.3), b);
  REQUIRE(e.matches.size() == m.matches.size());
  for (std::size_t k = 0; k < e.matches.size(); ++k) {
    CHECK(e.matches[k].requester == m.matches[k].requester);
    CHECK(e.matches[k].worker == m.matches[k].worker);
    CHECK(e.matches[k].fee == m.matches[k].fee);
    CHECK(e.matches[k].payment == m.matches[k].payment);
    CHECK(e.matches[k].effective_fee == m.matches[k].effective_fee);
  }

  SUBCASE("fixed-price benchmark toggle") {
    auto fixed = params(20);
    fixed.effective_pricing = false;
    Rng c(1);
    const auto f = run_benchmark(pop.requesters, pop.workers, fixed, c);
    for (const auto& mm : f.matches) {
      CHECK(mm.effective_fee == mm.fee);
      CHECK(mm.effective_payment == mm.payment);
    }
  }
  SUBCASE("benchmark ignores lambda") {
    std::vector<WorkerProfile> ws{wrk(1, 2, 0.3), wrk(2, 2, 1.4), wrk(3, 1, 1.0)};
    const auto before = wwsa(ws, benchmark_params(params(1)));
    std::swap(ws[0].mu, ws[1].mu);
    std::swap(ws[0].lambda, ws[1].lambda);
    const auto after = wwsa(ws, benchmark_params(params(1)));
    CHECK(ids(before.winners) == ids(after.winners));
    CHECK(before.threshold->id == after.threshold->id);
  }
}

TEST_CASE("economic properties on random instances") {
  const PopulationDistributions dist;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Rng rng(seed);
    const auto pop = draw_population(dist, 80, 160, rng);
    const auto p = params(seed % 2 ? 10 : 60, 0.5, 0.5);
    const auto out = run_eswm(pop.requesters, pop.workers, p, rng);

    CHECK(out.matches.size() == out.winners_r.size());
    CHECK(out.matches.size() == out.winners_w.size());
    CHECK(out.matches.size() <= p.capacity);
    if (out.revoked) {
      CHECK(out.matches.empty());
      continue;
    }
    CHECK(out.total_fees() >= out.total_payments());
    CHECK(out.total_effective_fees() - out.total_effective_payments() >= -1e-9);

    for (std::size_t k = 0; k < out.matches.size(); ++k) {
      const auto& m = out.matches[k];
      const auto& r = out.winners_r[k];
      const auto& w = out.winners_w[k];
      CHECK(m.fee <= r.max_valuation * (1 + 1e-12));
      CHECK(m.payment >= w.cost * (1 - 1e-12));
      CHECK(m.effective_fee <= m.fee);
      CHECK(m.effective_fee >= 0.0);
      CHECK(m.effective_payment <= m.payment);
      CHECK(m.effective_payment >= 0.0);
      // requester IR holds at every submission time
      for (double t : {0.0, r.deadline, 0.5 * (r.deadline + r.expiry), r.expiry, 2 * r.expiry}) {
        const double ratio = task_valuation(r, t) / r.max_valuation;
        CHECK(task_valuation(r, t) - ratio * m.fee >= -1e-9);
      }
      if (*m.submission <= r.deadline) CHECK(m.effective_payment - w.cost >= -1e-9);
    }
  }
}

TEST_CASE("outcome is independent of roster order") {
  Rng rng(77);
  auto pop = draw_population(PopulationDistributions{}, 50, 70, rng);
  // force some exact ratio ties
  pop.requesters[3] = pop.requesters[4];
  pop.requesters[3].id = AgentId{3};
  pop.workers[5].cost = pop.workers[6].cost;
  pop.workers[5].mu = pop.workers[6].mu;
  pop.workers[5].sigma = pop.workers[6].sigma;
  pop.workers[5].lambda = pop.workers[6].lambda;

  const auto p = params(15, 0.5, 0.5);
  const auto a = allocate(pop.requesters, pop.workers, p);
  auto rs = pop.requesters;
  auto ws = pop.workers;
  std::mt19937 shuffler(4);
  std::shuffle(rs.begin(), rs.end(), shuffler);
  std::shuffle(ws.begin(), ws.end(), shuffler);
  const auto b = allocate(rs, ws, p);
  REQUIRE(a.matches.size() == b.matches.size());
  for (std::size_t k = 0; k < a.matches.size(); ++k) {
    CHECK(a.matches[k].requester == b.matches[k].requester);
    CHECK(a.matches[k].worker == b.matches[k].worker);
    CHECK(a.matches[k].fee == b.matches[k].fee);
    CHECK(a.matches[k].payment == b.matches[k].payment);
  }
}

TEST_CASE("winner selection work grows linearly in roster size at fixed K") {
  const PopulationDistributions dist;
  const std::size_t k = 10;
  std::size_t prev = 0;
  for (std::size_t n : {250u, 500u, 1000u, 2000u}) {
    Rng rng(n);
    const auto pop = draw_population(dist, n, n, rng);
    const auto out = allocate(pop.requesters, pop.workers, params(k));
    // (K + 1) scans of a shrinking pool plus one scan for the threshold, per side.
    std::size_t expected = 0;
    for (std::size_t s = 0; s <= k; ++s) expected += n - s - 1;
    expected += k;
    CHECK(out.comparisons == 2 * expected);
    if (prev) {
      const double ratio = static_cast<double>(out.comparisons) / static_cast<double>(prev);
      CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
    }
    prev = out.comparisons;
  }
}
