#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "eswm/market.hpp"
#include "eswm/model.hpp"
#include "eswm/oracle.hpp"
#include "numeric_oracles.hpp"

using namespace eswm;

namespace {

RequesterProfile requester(double v, double td, double tex, double alpha, double size = 1.0,
                           std::uint64_t id = 0) {
  return RequesterProfile{AgentId{id}, size, td, tex, v, alpha};
}

// Truncated-normal density written out directly, normalized numerically.
double reference_pdf(double t, double location, double sd, double upper) {
  if (t < 0.0 || t > upper) return 0.0;
  const double z = oracle_math::integrate(
      [&](double x) { return oracle_math::normal_density(x, location, sd); }, 0.0, upper);
  return oracle_math::normal_density(t, location, sd) / z;
}

}  // namespace

TEST_CASE("task valuation follows the depreciation curve") {
  const auto r = requester(100, 10, 15, 4);
  CHECK(task_valuation(r, 0.0) == 100.0);
  CHECK(task_valuation(r, 10.0) == 100.0);
  CHECK(task_valuation(r, 12.0) == doctest::Approx(84.0).epsilon(1e-15));
  CHECK(task_valuation(requester(100, 10, 15, 100), 11.5) == 0.0);
  CHECK(task_valuation(r, 16.0) == 0.0);
  // alpha = 0 never depreciates before expiry, and expiry still clamps
  const auto flat = requester(50, 10, 12, 0);
  CHECK(task_valuation(flat, 11.9) == 50.0);
  CHECK(task_valuation(flat, 12.1) == 0.0);
}

TEST_CASE("task valuation is monotone in time and in alpha") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const double td = uniform(rng, 1, 100);
    const auto r = requester(uniform(rng, 1, 100), td, td * uniform(rng, 1, 1.5),
                             uniform(rng, 0, 100));
    auto faster = r;
    faster.alpha = r.alpha + uniform(rng, 0, 10);
    double prev = task_valuation(r, 0.0);
    for (double t = 0.0; t <= r.expiry * 1.1; t += r.expiry / 97.0) {
      const double v = task_valuation(r, t);
      CHECK(v <= prev);
      CHECK(task_valuation(faster, t) <= v);
      if (t <= r.deadline) CHECK(v == r.max_valuation);
      prev = v;
    }
  }
}

TEST_CASE("profile validation") {
  CHECK_NOTHROW(validate(requester(1, 1, 1, 0)));
  CHECK_THROWS_AS(validate(requester(1, 2, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(requester(0, 1, 1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(requester(1, 1, 1, -1)), std::invalid_argument);
  CHECK_THROWS_AS(validate(requester(1, 1, 1, 0, 0.5)), std::invalid_argument);

  const auto w = make_worker(AgentId{1}, 3.0, 0.8);
  CHECK(w.sigma == 1.6);
  CHECK(w.lambda == 1.0 / 0.8);
  CHECK(make_worker(AgentId{1}, 3.0, 0.8, 0.5).sigma == 0.5);
  CHECK_THROWS_AS(make_worker(AgentId{1}, 3.0, 0.8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_worker(AgentId{1}, 3.0, 0.0), std::invalid_argument);
  auto bad = w;
  bad.lambda = 1.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("submission density support and degenerate scale") {
  const auto w = make_worker(AgentId{0}, 1.0, 1.0, 2.0);
  CHECK(submission_pdf(w, -1.0, 10, 15) == 0.0);
  CHECK(submission_pdf(w, 15.1, 10, 15) == 0.0);
  auto flat = w;
  flat.sigma = 0.0;
  CHECK_THROWS_AS(submission_pdf(flat, 1.0, 10, 15), std::invalid_argument);
}

TEST_CASE("submission density at its mode matches the numerically normalized normal") {
  const auto w = make_worker(AgentId{0}, 1.0, 1.0, 2.0);
  const double ours = submission_pdf(w, 10.0, 10.0, 15.0);
  CHECK(ours == doctest::Approx(reference_pdf(10.0, 10.0, 2.0, 15.0)).epsilon(1e-10));
  // Frozen from an independent quad of phi((t-10)/2)/2 over [0, 15].
  CHECK(ours == doctest::Approx(0.200717586775602).epsilon(1e-10));
}

TEST_CASE("submission density integrates to one on its support") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const double td = uniform(rng, 0.5, 100);
    const double tex = td * uniform(rng, 1, 1.5);
    const auto w = make_worker(AgentId{0}, 1.0, uniform(rng, 0.01, 1.5));
    const SubmissionDistribution d(w, td, tex);
    const double total = oracle_math::integrate([&](double t) { return d.pdf(t); }, 0.0, tex,
                                                1e-12, 512);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sampled submissions follow the analytic distribution") {
  const auto w = make_worker(AgentId{0}, 1.0, 1.1);
  const double td = 10.0, tex = 14.0;
  Rng rng(2024);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sample_submission_time(w, td, tex, rng);
  CHECK(*std::min_element(xs.begin(), xs.end()) >= 0.0);
  CHECK(*std::max_element(xs.begin(), xs.end()) <= tex);
  std::sort(xs.begin(), xs.end());

  // Reference CDF by integrating the written-out density on a fine grid.
  const double loc = 1.1 * td, sd = 2.2;
  const int grid = 4000;
  std::vector<double> cdf(grid + 1, 0.0);
  for (int k = 1; k <= grid; ++k) {
    const double a = tex * (k - 1) / grid, b = tex * k / grid;
    cdf[k] = cdf[k - 1] + oracle_math::integrate(
                              [&](double x) { return oracle_math::normal_density(x, loc, sd); },
                              a, b, 1e-14, 1);
  }
  for (auto& c : cdf) c /= cdf[grid];
  auto ref = [&](double t) {
    const double pos = t / tex * grid;
    const int k = std::clamp(static_cast<int>(pos), 0, grid - 1);
    return cdf[k] + (cdf[k + 1] - cdf[k]) * (pos - k);
  };
  double sup = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double f = ref(xs[k]);
    sup = std::max({sup, std::fabs(f - k / n), std::fabs(f - (k + 1) / n)});
  }
  CHECK(sup < 0.01);
}

TEST_CASE("sampling is deterministic per seed and honors the support in the far tail") {
  const auto w = make_worker(AgentId{0}, 1.0, 1.5);
  Rng a(5), b(5);
  for (int k = 0; k < 1000; ++k) {
    const double x = sample_submission_time(w, 100.0, 100.0, a);
    CHECK(x == sample_submission_time(w, 100.0, 100.0, b));
    CHECK(x >= 0.0);
    CHECK(x <= 100.0);
  }
}

TEST_CASE("expected valuation special cases") {
  // All mass before the deadline.
  const auto early = make_worker(AgentId{0}, 1.0, 0.2);
  const auto r = requester(80, 50, 70, 3);
  CHECK(submission_cdf(early, 50, 50, 70) >= 1.0 - 1e-12);
  CHECK(expected_valuation(r, early) == doctest::Approx(80.0).epsilon(1e-8));

  // Constant valuation on the whole support.
  const auto late = make_worker(AgentId{0}, 1.0, 1.4);
  CHECK(expected_valuation(requester(42, 10, 10, 0), late) ==
        doctest::Approx(42.0).epsilon(1e-12));
}

TEST_CASE("expected valuation of the reference pair") {
  const auto r = requester(100, 10, 15, 4);
  const auto w = make_worker(AgentId{0}, 1.0, 1.2, 2.4);
  const double quad = expected_valuation(r, w);
  CHECK(quad == doctest::Approx(77.46382996331725).epsilon(1e-8));

  Rng rng(99);
  const auto mc = mc_expected_valuation(r, w, 1000000, rng);
  CHECK(std::fabs(quad - mc.mean) <= 3.0 * mc.std_err);
}

TEST_CASE("expected valuation agrees with an independent Simpson integral") {
  Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const double td = uniform(rng, 1, 100);
    const auto r = requester(uniform(rng, 1, 100), td, td * uniform(rng, 1, 1.5),
                             uniform(rng, 0.001, 5));
    const double mu = uniform(rng, 0.5, 1.5);
    const auto w = make_worker(AgentId{0}, 1.0, mu);
    const double loc = mu * td, sd = 2 * mu;
    const double z = oracle_math::integrate(
        [&](double t) { return oracle_math::normal_density(t, loc, sd); }, 0, r.expiry, 1e-13, 256);
    const double num = oracle_math::integrate(
        [&](double t) { return task_valuation(r, t) * oracle_math::normal_density(t, loc, sd); },
        0, r.expiry, 1e-11, 2048);
    CHECK(expected_valuation(r, w) == doctest::Approx(num / z).epsilon(1e-6));
  }
}

TEST_CASE("expected valuation stays within [0, v_max] and falls as workers get later") {
  Rng rng(17);
  const PopulationDistributions dist;
  for (int trial = 0; trial < 100; ++trial) {
    const auto pop = draw_population(dist, 1, 1, rng);
    const double e = expected_valuation(pop.requesters[0], pop.workers[0]);
    CHECK(e >= 0.0);
    CHECK(e <= pop.requesters[0].max_valuation);
  }
  for (int trial = 0; trial < 30; ++trial) {
    const double td = uniform(rng, 5, 100);
    const auto r = requester(uniform(rng, 1, 100), td, td * uniform(rng, 1.05, 1.5),
                             uniform(rng, 0.01, 2));
    const double sigma = uniform(rng, 0.5, 3);
    double prev = r.max_valuation;
    for (double mu = 0.5; mu <= 1.5; mu += 0.05) {
      const double e = expected_valuation(r, make_worker(AgentId{0}, 1, mu, sigma));
      CHECK(e <= prev + 1e-6 * r.max_valuation);
      prev = e;
    }
  }
}
