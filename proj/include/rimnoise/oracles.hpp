#pragma once

// Exact reference values: closed forms for the OU process, the two-state
// transfer matrix for telegraph noise, and brute-force enumeration of small
// noise path sets for measurement correlations. Nothing here uses an RNG.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rimnoise/errors.hpp"
#include "rimnoise/noise.hpp"
#include "rimnoise/partitions.hpp"
#include "rimnoise/rim.hpp"

namespace rimnoise {

enum class OracleMethod { closed_form, transfer_matrix, brute_force };

inline std::string_view to_string(OracleMethod m) {
  switch (m) {
    case OracleMethod::closed_form: return "closed-form";
    case OracleMethod::transfer_matrix: return "transfer-matrix";
    case OracleMethod::brute_force: return "brute-force";
  }
  return "?";
}

struct OracleResult {
  double value = 0.0;
  OracleMethod method = OracleMethod::closed_form;
};

// --- Ornstein-Uhlenbeck -----------------------------------------------------

inline OracleResult ou_cumulant2(const OuParams& p, double lag) {
  p.validate();
  return {p.variance() * std::exp(-p.gamma * std::abs(lag)), OracleMethod::closed_form};
}

/// Gaussian: every cumulant above order 2 vanishes, and so does the mean.
inline OracleResult ou_cumulant(const OuParams& p, int order, std::span<const double> lags) {
  if (order == 2) return ou_cumulant2(p, lags[0]);
  p.validate();
  return {0.0, OracleMethod::closed_form};
}

inline OracleResult ou_spectrum(const OuParams& p, double omega) {
  p.validate();
  return {p.big_gamma * p.gamma / (p.gamma * p.gamma + omega * omega), OracleMethod::closed_form};
}

// --- Random telegraph noise -------------------------------------------------

/// E[prod_j f(beta(t_j))] for one fluctuator, t_1 <= ... <= t_n, by chaining
/// the exact two-state propagator.
template <class F>
double rtn_expectation(const TlfParams& p, std::span<const double> times, F&& f) {
  p.validate();
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1]) throw ConfigError("times must be ordered");
  }
  if (times.empty()) return 1.0;
  const double up = p.p_up();
  const double beta_up = p.lambda * (1.0 - p.asymmetry());
  const double beta_down = p.lambda * (-1.0 - p.asymmetry());
  const double f_up0 = f(beta_up), f_down0 = f(beta_down);
  double w_up = up * f_up0;
  double w_down = (1.0 - up) * f_down0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double memory = std::exp(-p.total_rate() * (times[i] - times[i - 1]));
    const double up_from_up = up + memory * (1.0 - up);
    const double up_from_down = up - memory * up;
    const double next_up = w_up * up_from_up + w_down * up_from_down;
    const double next_down = w_up * (1.0 - up_from_up) + w_down * (1.0 - up_from_down);
    w_up = next_up * f(beta_up);
    w_down = next_down * f(beta_down);
  }
  return w_up + w_down;
}

/// n-point moment lambda^n E[prod (xi(t_j) - xi_bar)], ordered times.
inline OracleResult rtn_moment(const TlfParams& p, std::span<const double> times) {
  return {rtn_expectation(p, times, [](double beta) { return beta; }),
          OracleMethod::transfer_matrix};
}

/// E[prod_j cos(beta(t_j) tau + dphi)]: the exact RIM correlation of one
/// fluctuator in the point-sampled phase model.
inline OracleResult rtn_measurement_moment(const TlfParams& p, std::span<const double> times,
                                           double tau, double dphi) {
  return {rtn_expectation(p, times, [&](double beta) { return std::cos(beta * tau + dphi); }),
          OracleMethod::transfer_matrix};
}

inline double rtn_cumulant2_closed(const TlfParams& p, double lag) {
  return p.variance() * std::exp(-p.total_rate() * std::abs(lag));
}

/// t_1 <= t_2 <= t_3.
inline double rtn_cumulant3_closed(const TlfParams& p, double t1, double t3) {
  const double xb = p.asymmetry();
  return -2.0 * xb * (1.0 - xb * xb) * p.lambda * p.lambda * p.lambda *
         std::exp(-p.total_rate() * (t3 - t1));
}

/// Joint cumulant of one fluctuator at arbitrary times. Orders 2 and 3 use the
/// closed forms; higher orders invert the partition formula over
/// transfer-matrix moments.
inline OracleResult rtn_cumulant(const TlfParams& p, std::span<const double> times) {
  std::vector<double> t(times.begin(), times.end());
  std::sort(t.begin(), t.end());
  const auto n = t.size();
  if (n <= 1) return {0.0, OracleMethod::closed_form};
  if (n == 2) return {rtn_cumulant2_closed(p, t[1] - t[0]), OracleMethod::closed_form};
  if (n == 3) return {rtn_cumulant3_closed(p, t[0], t[2]), OracleMethod::closed_form};
  detail::require(n <= 16, "order too large");
  std::vector<double> sub;
  const double k = cumulant_from_moments((1u << n) - 1, [&](std::uint32_t block) {
    sub.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (block & (1u << i)) sub.push_back(t[i]);
    }
    return rtn_moment(p, sub).value;
  });
  return {k, OracleMethod::transfer_matrix};
}

/// Order-n cumulant of a fluctuator ensemble at times (0, lags...):
/// cumulants of independent summands add.
inline OracleResult ensemble_cumulant(const TlfEnsembleParams& params, int order,
                                      std::span<const double> lags) {
  params.validate();
  detail::require(order >= 1 && lags.size() == static_cast<std::size_t>(order - 1),
                  "need order - 1 lags");
  std::vector<double> times{0.0};
  times.insert(times.end(), lags.begin(), lags.end());
  OracleResult total{0.0, OracleMethod::closed_form};
  for (const auto& f : params.fluctuators) {
    const auto r = rtn_cumulant(f, times);
    total.value += r.value;
    if (r.method == OracleMethod::transfer_matrix) total.method = r.method;
  }
  return total;
}

/// Sum of Lorentzians 2 sum_j lambda_j^2 W_j (1 - xi_j^2) / (W_j^2 + w^2).
inline OracleResult ensemble_spectrum(const TlfEnsembleParams& params, double omega) {
  params.validate();
  double s = 0.0;
  for (const auto& f : params.fluctuators) {
    const double w = f.total_rate();
    s += 2.0 * f.variance() * w / (w * w + omega * omega);
  }
  return {s, OracleMethod::closed_form};
}

// --- Brute-force enumeration ------------------------------------------------

/// A finite set of noise paths on the RIM grid with their probabilities.
struct PathSupport {
  std::vector<double> probabilities;
  std::vector<std::vector<double>> paths;  // beta(t_k) per path

  [[nodiscard]] std::size_t size() const { return paths.size(); }
};

inline constexpr std::size_t kMaxEnumeratedPaths = 10000;

/// All 2^n state sequences of one fluctuator on n grid points.
inline PathSupport rtn_path_support(const TlfParams& p, const TimeGrid& grid) {
  p.validate();
  grid.validate();
  detail::require(grid.count < 64 && (std::size_t{1} << grid.count) <= kMaxEnumeratedPaths,
                  "path support too large to enumerate");
  const double up = p.p_up();
  const double memory = std::exp(-p.total_rate() * grid.step);
  const double up_from_up = up + memory * (1.0 - up);
  const double up_from_down = up - memory * up;
  PathSupport support;
  const std::size_t count = std::size_t{1} << grid.count;
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<double> beta(grid.count);
    double prob = 1.0;
    bool prev_up = false;
    for (std::size_t k = 0; k < grid.count; ++k) {
      const bool is_up = (code >> k) & 1u;
      if (k == 0) {
        prob *= is_up ? up : 1.0 - up;
      } else {
        const double pu = prev_up ? up_from_up : up_from_down;
        prob *= is_up ? pu : 1.0 - pu;
      }
      beta[k] = p.lambda * ((is_up ? 1.0 : -1.0) - p.asymmetry());
      prev_up = is_up;
    }
    support.probabilities.push_back(prob);
    support.paths.push_back(std::move(beta));
  }
  return support;
}

/// Exact <r_{i_1} ... r_{i_n}> = sum_paths P(path) prod_j cos(beta_{i_j} tau + dphi_{i_j}).
inline OracleResult brute_force_measurement_correlation(const PathSupport& support,
                                                        const RimConfig& cfg,
                                                        std::span<const std::size_t> indices) {
  detail::require(support.size() <= kMaxEnumeratedPaths, "path support too large to enumerate");
  double total = 0.0;
  for (std::size_t s = 0; s < support.size(); ++s) {
    double prod = 1.0;
    for (auto k : indices) {
      detail::require(k < support.paths[s].size(), "cycle index outside the path");
      prod *= std::cos(support.paths[s][k] * cfg.tau + cfg.dphi(k));
    }
    total += support.probabilities[s] * prod;
  }
  return {total, OracleMethod::brute_force};
}

/// Brute-force noise moment E[prod beta(t_{i_j})] over a path support.
inline OracleResult brute_force_moment(const PathSupport& support,
                                       std::span<const std::size_t> indices) {
  double total = 0.0;
  for (std::size_t s = 0; s < support.size(); ++s) {
    double prod = 1.0;
    for (auto k : indices) prod *= support.paths[s][k];
    total += support.probabilities[s] * prod;
  }
  return {total, OracleMethod::brute_force};
}

}  // namespace rimnoise
