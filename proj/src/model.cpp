#include "eswm/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace eswm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// erfc keeps full relative precision in the lower tail, which is where the
// truncated mass lives for very late workers.
double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate(const RequesterProfile& r) {
  require(std::isfinite(r.task_size) && r.task_size >= 1.0, "requester task_size must be >= 1");
  require(std::isfinite(r.deadline) && r.deadline > 0.0, "requester deadline must be > 0");
  require(std::isfinite(r.expiry) && r.expiry >= r.deadline,
          "requester expiry must be >= deadline");
  require(std::isfinite(r.max_valuation) && r.max_valuation > 0.0,
          "requester max_valuation must be > 0");
  require(std::isfinite(r.alpha) && r.alpha >= 0.0, "requester alpha must be >= 0");
}

void validate(const WorkerProfile& w) {
  require(std::isfinite(w.cost) && w.cost > 0.0, "worker cost must be > 0");
  require(std::isfinite(w.mu) && w.mu > 0.0, "worker mu must be > 0");
  require(std::isfinite(w.sigma) && w.sigma > 0.0, "worker sigma must be > 0");
  require(w.lambda == 1.0 / w.mu, "worker lambda must equal 1 / mu");
}

WorkerProfile make_worker(AgentId id, double cost, double mu) {
  return make_worker(id, cost, mu, 2.0 * mu);
}

WorkerProfile make_worker(AgentId id, double cost, double mu, double sigma) {
  WorkerProfile w{id, cost, mu, sigma, 1.0 / mu};
  validate(w);
  return w;
}

WorkerProfile with_punctuality(const WorkerProfile& w, double mu) {
  const double m = std::max(mu, kRatioFloor);
  WorkerProfile out = w;
  out.mu = m;
  out.sigma = 2.0 * m;
  out.lambda = 1.0 / m;
  return out;
}

double task_valuation(const RequesterProfile& r, double t) {
  if (t <= r.deadline) return r.max_valuation;
  if (t > r.expiry) return 0.0;
  const double late = t - r.deadline;
  return std::max(0.0, r.max_valuation - r.alpha * late * late);
}

double valuation_root(const RequesterProfile& r) {
  if (r.alpha <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(r.max_valuation / r.alpha);
}

SubmissionDistribution::SubmissionDistribution(const WorkerProfile& w, double deadline,
                                               double expiry)
    : location_(w.mu * deadline), scale_(w.sigma), upper_(expiry) {
  if (!(w.sigma > 0.0) || !std::isfinite(w.sigma)) {
    throw std::invalid_argument("submission distribution needs sigma > 0");
  }
  if (!(deadline > 0.0) || !(expiry >= deadline)) {
    throw std::invalid_argument("submission distribution needs 0 < deadline <= expiry");
  }
  std_lower_ = (0.0 - location_) / scale_;
  std_upper_ = (upper_ - location_) / scale_;
  cdf_lower_ = std_normal_cdf(std_lower_);
  normalizer_ = std_normal_cdf(std_upper_) - cdf_lower_;
  if (!(normalizer_ > std::numeric_limits<double>::min())) {
    throw std::domain_error("submission distribution has no representable mass on [0, expiry]");
  }
}

double SubmissionDistribution::pdf(double t) const {
  if (t < 0.0 || t > upper_) return 0.0;
  return std_normal_pdf((t - location_) / scale_) / (scale_ * normalizer_);
}

double SubmissionDistribution::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= upper_) return 1.0;
  const double c = (std_normal_cdf((t - location_) / scale_) - cdf_lower_) / normalizer_;
  return std::clamp(c, 0.0, 1.0);
}

double SubmissionDistribution::mass(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, upper_);
  if (hi <= lo) return 0.0;
  const double zl = (lo - location_) / scale_;
  const double zh = (hi - location_) / scale_;
  // Work in whichever tail keeps precision.
  if (zl > 0.0) {
    const double q = 0.5 * std::erfc(zl * kInvSqrt2) - 0.5 * std::erfc(zh * kInvSqrt2);
    return std::clamp(q / normalizer_, 0.0, 1.0);
  }
  return std::clamp((std_normal_cdf(zh) - std_normal_cdf(zl)) / normalizer_, 0.0, 1.0);
}

double SubmissionDistribution::quantile(double u) const {
  static const boost::math::normal_distribution<double> standard(0.0, 1.0);
  u = std::clamp(u, 0.0, 1.0);
  double z;
  if (std_upper_ > 0.0 && cdf_lower_ + u * normalizer_ > 0.5) {
    // Upper half: invert the complement for precision near the right edge.
    const double upper_tail = 0.5 * std::erfc(std_upper_ * kInvSqrt2);
    const double q = upper_tail + (1.0 - u) * normalizer_;
    z = boost::math::quantile(boost::math::complement(standard, std::clamp(q, 1e-300, 1.0)));
  } else {
    const double p = cdf_lower_ + u * normalizer_;
    z = boost::math::quantile(standard, std::clamp(p, 1e-300, 1.0));
  }
  return std::clamp(location_ + scale_ * z, 0.0, upper_);
}

double submission_pdf(const WorkerProfile& w, double t, double deadline, double expiry) {
  return SubmissionDistribution(w, deadline, expiry).pdf(t);
}

double submission_cdf(const WorkerProfile& w, double t, double deadline, double expiry) {
  return SubmissionDistribution(w, deadline, expiry).cdf(t);
}

double submission_time_from_uniform(const WorkerProfile& w, double deadline, double expiry,
                                    double u) {
  return SubmissionDistribution(w, deadline, expiry).quantile(u);
}

double sample_submission_time(const WorkerProfile& w, double deadline, double expiry, Rng& rng) {
  return submission_time_from_uniform(w, deadline, expiry, uniform01(rng));
}

double expected_valuation(const RequesterProfile& r, const WorkerProfile& w) {
  const SubmissionDistribution dist(w, r.deadline, r.expiry);
  const double v_max = r.max_valuation;

  double total = v_max * dist.mass(0.0, r.deadline);

  const double hi = std::min(r.expiry, r.deadline + valuation_root(r));
  if (hi > r.deadline) {
    const double post_mass = dist.mass(r.deadline, hi);
    if (post_mass * v_max > 1e-15 * v_max) {
      auto integrand = [&](double t) {
        const double late = t - r.deadline;
        return (v_max - r.alpha * late * late) * dist.pdf(t);
      };
      // Break the post-deadline span around the density peak so narrow
      // peaks are never straddled by a single panel.
      std::array<double, 5> cuts{r.deadline, dist.location() - 6.0 * dist.scale(),
                                 dist.location(), dist.location() + 6.0 * dist.scale(), hi};
      std::sort(cuts.begin() + 1, cuts.end() - 1);
      double lo = r.deadline;
      for (std::size_t k = 1; k < cuts.size(); ++k) {
        const double b = std::clamp(cuts[k], r.deadline, hi);
        if (b > lo) {
          total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
              integrand, lo, b, 15, 1e-12);
          lo = b;
        }
      }
    }
  }
  return std::clamp(total, 0.0, v_max);
}

}  // namespace eswm
