#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace eswm::stats {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double std_err = 0.0;
  double ci_low = 0.0;  // two-sided 95% t interval
  double ci_high = 0.0;
};

Summary summarize(std::span<const double> xs);

/// Lower end of the one-sided 95% t confidence bound on the mean.
double lower_bound_95(std::span<const double> xs);

/// Mean ranks with ties averaged (1-based).
std::vector<double> ranks(std::span<const double> xs);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

/// One-sided p-value for H1: correlation < 0 (or > 0 when `positive`),
/// using the t approximation with n - 2 degrees of freedom.
double correlation_p_value(double rho, std::size_t n, bool positive);

}  // namespace eswm::stats
