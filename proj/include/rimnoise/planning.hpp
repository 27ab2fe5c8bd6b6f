#pragma once

// Sample-size planning for the n-point estimator.

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <limits>

#include "rimnoise/errors.hpp"

namespace rimnoise {

struct SamplePlan {
  int order = 2;
  double delta = 0.05;    // absolute error on C^(n), MHz^n
  double epsilon = 0.05;  // failure probability
  double tau = 0.05;      // us
  std::uint64_t trajectories = 0;
};

/// Smallest N_s with N_s >= (2 / (delta^2 tau^(2n))) ln(2 / epsilon).
inline SamplePlan hoeffding_sample_size(int order, double delta, double epsilon, double tau) {
  detail::require(order >= 1, "order must be at least 1");
  detail::require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  detail::require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  detail::require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
  const long double d = delta, t = tau;
  const long double bound =
      2.0L / (d * d * std::pow(t, 2.0L * order)) * std::log(2.0L / static_cast<long double>(epsilon));
  if (!(bound < 1.8e19L)) throw ConfigError("required sample size overflows 64 bits");
  return SamplePlan{order, delta, epsilon, tau, static_cast<std::uint64_t>(std::ceil(bound))};
}

/// Normal-approximation N_s for a per-trajectory statistic with standard
/// deviation `sigma` (MHz^n): two-sided half-width delta at confidence 1 - epsilon.
inline std::uint64_t clt_sample_size(double sigma, double delta, double epsilon) {
  detail::require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be finite and non-negative");
  detail::require(delta > 0.0, "delta must be positive");
  detail::require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  const boost::math::normal_distribution<double> unit;
  const double z = boost::math::quantile(boost::math::complement(unit, 0.5 * epsilon));
  const double n = std::ceil(z * z * sigma * sigma / (delta * delta));
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

}  // namespace rimnoise
