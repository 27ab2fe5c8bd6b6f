#pragma once

// Stationary classical dephasing noise sampled on a uniform time grid:
// the Ornstein-Uhlenbeck process and sums of independent two-level
// fluctuators (random telegraph noise). All samplers are exact at grid
// points; there is no time-step bias.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rimnoise/errors.hpp"
#include "rimnoise/rng.hpp"

namespace rimnoise {

/// Uniform grid t_k = k * step, k = 0..count-1 (microseconds).
struct TimeGrid {
  double step = 1.0;
  std::size_t count = 1;

  [[nodiscard]] double time(std::size_t k) const { return static_cast<double>(k) * step; }

  void validate() const {
    detail::require(std::isfinite(step) && step > 0.0, "time grid step must be positive");
    detail::require(count >= 1, "time grid needs at least one point");
  }

  /// Builds a grid from explicit sample times; rejects anything non-uniform.
  static TimeGrid from_times(std::span<const double> times, double rel_tol = 1e-9) {
    detail::require(!times.empty(), "empty time grid");
    detail::require(times.front() == 0.0, "time grid must start at t = 0");
    if (times.size() == 1) return TimeGrid{1.0, 1};
    const double step = times[1] - times[0];
    detail::require(step > 0.0, "time grid must be strictly increasing");
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double expected = static_cast<double>(k) * step;
      detail::require(std::abs(times[k] - expected) <= rel_tol * std::max(1.0, expected),
                      "time grid is not uniform");
    }
    return TimeGrid{step, times.size()};
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct OuParams {
  double gamma = 1.0;      // spectral width, MHz (correlation time 1/gamma)
  double big_gamma = 1.0;  // intensity, MHz^2; stationary variance is big_gamma / 2

  [[nodiscard]] double variance() const { return 0.5 * big_gamma; }

  void validate() const {
    detail::require(std::isfinite(gamma) && gamma > 0.0, "OU gamma must be positive");
    detail::require(std::isfinite(big_gamma) && big_gamma > 0.0, "OU intensity must be positive");
  }
};

/// One two-level fluctuator. The hidden state xi leaves +1 at rate w_plus and
/// returns at rate w_minus, so its stationary mean is the asymmetry
/// (w_minus - w_plus) / W with W = w_plus + w_minus.
struct TlfParams {
  double lambda = 1.0;   // coupling, MHz
  double w_plus = 0.5;   // MHz
  double w_minus = 0.5;  // MHz

  [[nodiscard]] double total_rate() const { return w_plus + w_minus; }
  [[nodiscard]] double asymmetry() const { return (w_minus - w_plus) / total_rate(); }
  /// Stationary probability of xi = +1.
  [[nodiscard]] double p_up() const { return w_minus / total_rate(); }
  [[nodiscard]] double variance() const {
    const double xb = asymmetry();
    return lambda * lambda * (1.0 - xb * xb);
  }

  /// Parameterization by total rate and asymmetry.
  static TlfParams from_rate(double lambda, double total_rate, double asymmetry) {
    return TlfParams{lambda, 0.5 * total_rate * (1.0 - asymmetry),
                     0.5 * total_rate * (1.0 + asymmetry)};
  }

  void validate() const {
    detail::require(std::isfinite(lambda), "fluctuator coupling must be finite");
    detail::require(std::isfinite(w_plus) && w_plus > 0.0, "w_plus must be positive");
    detail::require(std::isfinite(w_minus) && w_minus > 0.0, "w_minus must be positive");
  }
};

struct TlfEnsembleParams {
  std::vector<TlfParams> fluctuators;

  [[nodiscard]] double variance() const {
    double v = 0.0;
    for (const auto& f : fluctuators) v += f.variance();
    return v;
  }

  void validate() const {
    detail::require(!fluctuators.empty(), "fluctuator ensemble is empty");
    for (const auto& f : fluctuators) f.validate();
  }
};

enum class ProcessKind { ou, rtn, ensemble };

inline std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::ou: return "ou";
    case ProcessKind::rtn: return "rtn";
    case ProcessKind::ensemble: return "ensemble";
  }
  return "?";
}

/// Optional integration of beta over each free-evolution window [t_k, t_k + tau].
/// With substeps == 1 the phase is the point sample beta(t_k) * tau.
struct PhaseIntegration {
  double tau = 0.0;
  int substeps = 1;

  [[nodiscard]] bool enabled() const { return substeps > 1; }
};

struct NoiseTrajectory {
  TimeGrid grid;
  std::vector<double> values;  // beta(t_k), MHz
  std::vector<double> phases;  // integrated phase per window (rad); empty unless integrated
  ProcessKind process = ProcessKind::ou;
  Seed seed;

  [[nodiscard]] std::size_t size() const { return values.size(); }
};

namespace detail {

struct OuProcess {
  OuParams params;

  struct Step {
    double decay;
    double innovation_sd;
  };

  [[nodiscard]] Step step(double dt) const {
    return Step{std::exp(-params.gamma * dt),
                std::sqrt(-params.variance() * std::expm1(-2.0 * params.gamma * dt))};
  }
  double initial(RandomStream& rng) const { return std::sqrt(params.variance()) * rng.normal(); }
  static double advance(double x, const Step& s, RandomStream& rng) {
    return x * s.decay + s.innovation_sd * rng.normal();
  }
  static double value(double x) { return x; }
};

struct RtnProcess {
  TlfParams params;

  // Probability that the next state is +1, given the current state.
  struct Step {
    double up_from_up;
    double up_from_down;
  };

  [[nodiscard]] Step step(double dt) const {
    const double p = params.p_up();
    const double memory = std::exp(-params.total_rate() * dt);
    return Step{p + memory * (1.0 - p), p - memory * p};
  }
  double initial(RandomStream& rng) const { return rng.bernoulli(params.p_up()) ? 1.0 : -1.0; }
  static double advance(double xi, const Step& s, RandomStream& rng) {
    return rng.bernoulli(xi > 0.0 ? s.up_from_up : s.up_from_down) ? 1.0 : -1.0;
  }
  [[nodiscard]] double value(double xi) const { return params.lambda * (xi - params.asymmetry()); }
};

// Walks a Markov process along the grid. When phase integration is on, each
// window is split into `substeps` exact sub-steps and integrated with the
// trapezoid rule before stepping the remainder of the cycle.
template <class Process>
void sample_markov(const Process& process, const TimeGrid& grid, const PhaseIntegration& integ,
                   RandomStream& rng, std::vector<double>& values, std::vector<double>& phases) {
  values.assign(grid.count, 0.0);
  phases.clear();
  const auto full = process.step(grid.step);
  double state = process.initial(rng);
  if (!integ.enabled()) {
    for (std::size_t k = 0; k < grid.count; ++k) {
      if (k > 0) state = Process::advance(state, full, rng);
      values[k] = process.value(state);
    }
    return;
  }
  const double h = integ.tau / integ.substeps;
  const auto sub = process.step(h);
  const auto rest = process.step(grid.step - integ.tau);
  phases.assign(grid.count, 0.0);
  for (std::size_t k = 0; k < grid.count; ++k) {
    values[k] = process.value(state);
    double prev = values[k];
    double acc = 0.0;
    for (int j = 0; j < integ.substeps; ++j) {
      state = Process::advance(state, sub, rng);
      const double cur = process.value(state);
      acc += 0.5 * (prev + cur) * h;
      prev = cur;
    }
    phases[k] = acc;
    if (k + 1 < grid.count) state = Process::advance(state, rest, rng);
  }
}

inline void check_integration(const TimeGrid& grid, const PhaseIntegration& integ) {
  require(integ.substeps >= 1, "phase integration needs at least one substep");
  if (integ.enabled()) {
    require(integ.tau > 0.0 && integ.tau < grid.step,
            "phase integration requires 0 < tau < grid step");
  }
}

}  // namespace detail

/// Exact AR(1) sampling of the stationary OU process with covariance
/// (big_gamma / 2) exp(-gamma |dt|).
inline NoiseTrajectory sample_ou_trajectory(const OuParams& params, const TimeGrid& grid, Seed seed,
                                            const PhaseIntegration& integ = {}) {
  params.validate();
  grid.validate();
  detail::check_integration(grid, integ);
  NoiseTrajectory out{grid, {}, {}, ProcessKind::ou, seed};
  RandomStream rng(seed);
  detail::sample_markov(detail::OuProcess{params}, grid, integ, rng, out.values, out.phases);
  return out;
}

/// Random telegraph noise lambda * (xi(t) - mean(xi)) from the exact two-state propagator.
inline NoiseTrajectory sample_rtn_trajectory(const TlfParams& params, const TimeGrid& grid,
                                             Seed seed, const PhaseIntegration& integ = {}) {
  params.validate();
  grid.validate();
  detail::check_integration(grid, integ);
  NoiseTrajectory out{grid, {}, {}, ProcessKind::rtn, seed};
  RandomStream rng(seed);
  detail::sample_markov(detail::RtnProcess{params}, grid, integ, rng, out.values, out.phases);
  return out;
}

/// Sum of independent fluctuators; fluctuator j draws from `seed.derive(j)`.
inline NoiseTrajectory sample_ensemble_trajectory(const TlfEnsembleParams& params,
                                                  const TimeGrid& grid, Seed seed,
                                                  const PhaseIntegration& integ = {}) {
  params.validate();
  grid.validate();
  detail::check_integration(grid, integ);
  NoiseTrajectory out{grid, std::vector<double>(grid.count, 0.0), {}, ProcessKind::ensemble, seed};
  if (integ.enabled()) out.phases.assign(grid.count, 0.0);
  std::vector<double> values;
  std::vector<double> phases;
  for (std::size_t j = 0; j < params.fluctuators.size(); ++j) {
    RandomStream rng(seed.derive(j));
    detail::sample_markov(detail::RtnProcess{params.fluctuators[j]}, grid, integ, rng, values,
                          phases);
    for (std::size_t k = 0; k < grid.count; ++k) out.values[k] += values[k];
    for (std::size_t k = 0; k < phases.size(); ++k) out.phases[k] += phases[k];
  }
  return out;
}

/// n rates whose logarithms are evenly spaced on [ln w_min, ln w_max]; endpoints exact.
inline std::vector<double> make_log_uniform_rates(std::size_t n, double w_min, double w_max) {
  detail::require(n >= 1, "need at least one rate");
  detail::require(w_min > 0.0 && w_min < w_max, "log-uniform range requires 0 < w_min < w_max");
  std::vector<double> rates(n);
  if (n == 1) {
    rates[0] = w_min;
    return rates;
  }
  const double lo = std::log(w_min);
  const double span = std::log(w_max) - lo;
  for (std::size_t i = 0; i < n; ++i) {
    rates[i] = std::exp(lo + span * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  rates.front() = w_min;
  rates.back() = w_max;
  return rates;
}

}  // namespace rimnoise
