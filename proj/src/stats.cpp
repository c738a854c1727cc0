#include "eswm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace eswm::stats {

namespace {

double t_quantile(double p, std::size_t df) {
  const boost::math::students_t dist(static_cast<double>(df));
  return boost::math::quantile(dist, p);
}

}  // namespace

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  // Welford keeps a constant sample's mean exact.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  s.mean = mean;
  s.ci_low = s.ci_high = mean;
  if (s.n < 2) return s;
  s.stddev = std::sqrt(m2 / static_cast<double>(s.n - 1));
  s.std_err = s.stddev / std::sqrt(static_cast<double>(s.n));
  const double half = t_quantile(0.975, s.n - 1) * s.std_err;
  s.ci_low = mean - half;
  s.ci_high = mean + half;
  return s;
}

double lower_bound_95(std::span<const double> xs) {
  const Summary s = summarize(xs);
  if (s.n < 2) return s.mean;
  return s.mean - t_quantile(0.95, s.n - 1) * s.std_err;
}

std::vector<double> ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("pearson: bad sizes");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

double correlation_p_value(double rho, std::size_t n, bool positive) {
  if (n < 3) return 1.0;
  const double df = static_cast<double>(n - 2);
  const double r = std::clamp(rho, -0.999999999999, 0.999999999999);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return positive ? boost::math::cdf(boost::math::complement(dist, t)) : boost::math::cdf(dist, t);
}

}  // namespace eswm::stats
