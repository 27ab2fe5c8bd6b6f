#pragma once

// A single Ramsey interferometry measurement (RIM) cycle and sequences of
// them on one noise trajectory.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string_view>
#include <vector>

#include "rimnoise/errors.hpp"
#include "rimnoise/noise.hpp"
#include "rimnoise/rng.hpp"

namespace rimnoise {

inline constexpr double kLinearResponsePhase = -std::numbers::pi / 2;
inline constexpr double kQuadraticResponsePhase = std::numbers::pi;

struct RimConfig {
  double tau = 0.05;      // free evolution, us
  double delta_t = 0.1;   // cycle delay, us
  std::size_t n_cycles = 256;
  std::vector<double> dphi_schedule;  // empty: all -pi/2; one entry: constant; else per cycle
  double t_dead = 0.0;    // readout and reset dead time, us
  int substeps = 1;       // > 1 integrates beta over each window

  [[nodiscard]] double effective_step() const { return delta_t + t_dead; }
  [[nodiscard]] TimeGrid grid() const { return TimeGrid{effective_step(), n_cycles}; }
  [[nodiscard]] PhaseIntegration integration() const { return PhaseIntegration{tau, substeps}; }

  [[nodiscard]] double dphi(std::size_t k) const {
    if (dphi_schedule.empty()) return kLinearResponsePhase;
    if (dphi_schedule.size() == 1) return dphi_schedule.front();
    return dphi_schedule[k];
  }

  [[nodiscard]] RimConfig with_constant_dphi(double dphi) const {
    RimConfig copy = *this;
    copy.dphi_schedule = {dphi};
    return copy;
  }

  void validate() const {
    detail::require(std::isfinite(tau) && tau > 0.0, "tau must be positive");
    detail::require(std::isfinite(delta_t) && delta_t > 0.0, "delta_t must be positive");
    detail::require(std::isfinite(t_dead) && t_dead >= 0.0, "t_dead must be non-negative");
    detail::require(tau < effective_step(), "tau must be shorter than the cycle time");
    detail::require(n_cycles >= 1, "n_cycles must be at least 1");
    detail::require(dphi_schedule.size() <= 1 || dphi_schedule.size() == n_cycles,
                    "dphi schedule must have 0, 1 or n_cycles entries");
    detail::require(substeps >= 1, "substeps must be at least 1");
  }
};

enum class MeasurementKind { ideal, weak_optical, assignment_error };

inline std::string_view to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::ideal: return "ideal";
    case MeasurementKind::weak_optical: return "weak_optical";
    case MeasurementKind::assignment_error: return "assignment_error";
  }
  return "?";
}

struct MeasurementModel {
  MeasurementKind kind = MeasurementKind::ideal;
  double g0 = 0.0;  // photon detection probability in |0>
  double g1 = 0.0;  // ... in |1>
  double p0 = 0.0;  // assignment error rate for |0>
  double p1 = 0.0;  // ... for |1>
  double t2 = std::numeric_limits<double>::infinity();

  static MeasurementModel ideal() { return {}; }
  static MeasurementModel weak_optical(double g0, double g1) {
    return {MeasurementKind::weak_optical, g0, g1, 0.0, 0.0,
            std::numeric_limits<double>::infinity()};
  }
  static MeasurementModel assignment_error(double p0, double p1) {
    return {MeasurementKind::assignment_error, 0.0, 0.0, p0, p1,
            std::numeric_limits<double>::infinity()};
  }

  /// Multiplier between <statistic> and r_k: Delta, b, or 1.
  [[nodiscard]] double contrast() const {
    switch (kind) {
      case MeasurementKind::weak_optical: return 0.5 * (g0 - g1);
      case MeasurementKind::assignment_error: return 1.0 - (p0 + p1);
      case MeasurementKind::ideal: break;
    }
    return 1.0;
  }

  /// Value subtracted from a raw reading to centre it: g-bar, a, or 0.
  [[nodiscard]] double offset() const {
    switch (kind) {
      case MeasurementKind::weak_optical: return 0.5 * (g0 + g1);
      case MeasurementKind::assignment_error: return p1 - p0;
      case MeasurementKind::ideal: break;
    }
    return 0.0;
  }

  /// exp(-tau / T2), or 1 when T2 is infinite.
  [[nodiscard]] double damping(double tau) const {
    return std::isinf(t2) ? 1.0 : std::exp(-tau / t2);
  }

  void validate() const {
    detail::require(t2 > 0.0, "T2 must be positive");
    if (kind == MeasurementKind::weak_optical) {
      detail::require(0.0 <= g1 && g1 < g0 && g0 <= 1.0, "weak readout requires 0 <= g1 < g0 <= 1");
    }
    if (kind == MeasurementKind::assignment_error) {
      detail::require(p0 >= 0.0 && p1 >= 0.0 && p0 + p1 < 1.0,
                      "assignment errors require p0, p1 >= 0 and p0 + p1 < 1");
    }
  }
};

enum class ReadoutMode { bernoulli, conditional };

inline std::string_view to_string(ReadoutMode mode) {
  return mode == ReadoutMode::bernoulli ? "bernoulli" : "conditional";
}

/// One trajectory's readings. Bits (ideal / assignment error) and photon
/// counts (weak optical) are stored as 0.0 / 1.0; conditional mode stores r_k.
struct OutcomeRecord {
  std::vector<double> values;
  ReadoutMode mode = ReadoutMode::conditional;
  MeasurementKind kind = MeasurementKind::ideal;
  Seed seed;

  [[nodiscard]] std::size_t size() const { return values.size(); }
};

/// [1 + (-1)^alpha * damping * cos(phi + dphi)] / 2
inline double outcome_probability(double phi, double dphi, int alpha, double damping = 1.0) {
  const double c = damping * std::cos(phi + dphi);
  return 0.5 * (1.0 + (alpha == 0 ? c : -c));
}

/// <sigma_z> after the cycle for a fixed noise realization.
inline double conditional_expectation(double phi, double dphi, double damping = 1.0) {
  return damping * std::cos(phi + dphi);
}

/// Runs cfg.n_cycles RIMs on a noise trajectory. Outcomes are conditionally
/// independent given the noise (the qubit is reset every cycle), so bernoulli
/// mode draws each cycle separately and conditional mode records the exact
/// conditional mean instead of sampling.
inline OutcomeRecord run_trajectory(const NoiseTrajectory& noise, const RimConfig& cfg,
                                    const MeasurementModel& model, ReadoutMode mode, Seed seed) {
  cfg.validate();
  model.validate();
  if (noise.size() != cfg.n_cycles ||
      std::abs(noise.grid.step - cfg.effective_step()) > 1e-9 * cfg.effective_step()) {
    throw ConfigError("noise grid does not match the RIM configuration");
  }
  const double damping = model.damping(cfg.tau);
  const bool integrated = !noise.phases.empty();
  OutcomeRecord record{std::vector<double>(cfg.n_cycles), mode, model.kind, seed};
  RandomStream rng(seed);
  for (std::size_t k = 0; k < cfg.n_cycles; ++k) {
    const double phi = integrated ? noise.phases[k] : noise.values[k] * cfg.tau;
    const double dphi = cfg.dphi(k);
    if (mode == ReadoutMode::conditional) {
      record.values[k] = conditional_expectation(phi, dphi, damping);
      continue;
    }
    const int alpha = rng.bernoulli(outcome_probability(phi, dphi, 0, damping)) ? 0 : 1;
    switch (model.kind) {
      case MeasurementKind::ideal:
        record.values[k] = alpha;
        break;
      case MeasurementKind::weak_optical:
        record.values[k] = rng.bernoulli(alpha == 0 ? model.g0 : model.g1) ? 1.0 : 0.0;
        break;
      case MeasurementKind::assignment_error: {
        const bool flip = rng.bernoulli(alpha == 0 ? model.p0 : model.p1);
        record.values[k] = flip ? 1 - alpha : alpha;
        break;
      }
    }
  }
  return record;
}

}  // namespace rimnoise
