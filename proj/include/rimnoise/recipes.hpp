#pragma once

// Published figure parameter sets. N_s is the published count times `scale`;
// below kConditionalThreshold trajectories the runs switch from sampled bits
// to conditional-expectation records.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rimnoise/config.hpp"
#include "rimnoise/errors.hpp"
#include "rimnoise/io.hpp"
#include "rimnoise/noise.hpp"

namespace rimnoise {

inline constexpr std::uint64_t kConditionalThreshold = 10'000'000;
inline constexpr std::size_t kRecipeCycles = 256;

struct Recipe {
  std::string label;
  ExperimentConfig config;
};

namespace detail {

inline ExperimentConfig recipe_base(double published, double scale, std::uint64_t seed,
                                    double tau, double delta_t) {
  ExperimentConfig cfg;
  cfg.rim.tau = tau;
  cfg.rim.delta_t = delta_t;
  cfg.rim.n_cycles = kRecipeCycles;
  const double n = std::max(1.0, std::round(published * scale));
  cfg.run.trajectories = static_cast<std::uint64_t>(n);
  cfg.run.seed = seed;
  cfg.estimation.mode = cfg.run.trajectories < kConditionalThreshold ? ReadoutMode::conditional
                                                                     : ReadoutMode::bernoulli;
  cfg.estimation.origin = OriginMode::averaged;
  cfg.estimation.quadrature = Quadrature::piecewise_linear;
  cfg.output.svg = true;
  return cfg;
}

inline TlfEnsembleParams log_uniform_bath(std::size_t n, double lambda, double asymmetry) {
  TlfEnsembleParams bath;
  for (double w : make_log_uniform_rates(n, 4.77e-3, 95.49e-3)) {
    bath.fluctuators.push_back(TlfParams::from_rate(lambda, w, asymmetry));
  }
  return bath;
}

}  // namespace detail

/// Assumed asymmetry where a caption does not state one.
inline constexpr double kFig3Asymmetry = 0.5;

inline std::vector<Recipe> make_recipe(std::string_view figure, double scale, std::uint64_t seed) {
  detail::require(scale > 0.0 && scale <= 1.0, "scale must lie in (0, 1]");
  std::vector<Recipe> out;
  if (figure == "fig2") {
    // OU, Gamma = 1 MHz^2, tau_C in {1, 0.5, 0.25} us
    for (double tau_c : {1.0, 0.5, 0.25}) {
      auto cfg = detail::recipe_base(5e8, scale, seed, 0.05, 0.1);
      cfg.noise.kind = ProcessKind::ou;
      cfg.noise.ou = OuParams{1.0 / tau_c, 1.0};
      cfg.estimation.repair = RepairMethod::quadratic_rim;
      cfg.estimation.tensors = {{2, 128, {}}, {3, 20, {2}}};
      out.push_back({"tauc_" + format_number(tau_c), cfg});
    }
  } else if (figure == "fig3") {
    auto cfg = detail::recipe_base(4e8, scale, seed, 0.15, 2.0);
    cfg.noise.kind = ProcessKind::ensemble;
    for (double w : {4.77e-3, 21.35e-3, 95.49e-3}) {
      cfg.noise.ensemble.fluctuators.push_back(TlfParams::from_rate(0.119, w, kFig3Asymmetry));
    }
    cfg.estimation.repair = RepairMethod::interpolate;
    cfg.estimation.tensors = {{2, 64, {}}, {3, 24, {}}};
    out.push_back({"bispectrum", cfg});
  } else if (figure == "fig4") {
    const double published = 9e8;
    for (double xb : {0.7, 0.5, 0.3, 0.1, 0.0}) {
      auto cfg = detail::recipe_base(published, scale, seed, 0.15, 2.0);
      cfg.noise.kind = ProcessKind::ensemble;
      cfg.noise.ensemble = detail::log_uniform_bath(10, 0.207 / std::sqrt(10.0), xb);
      cfg.estimation.repair = RepairMethod::quadratic_rim;
      cfg.estimation.tensors = {{2, 30, {}}, {3, 30, {2}}};
      cfg.estimation.spectra = false;
      out.push_back({"xi_" + format_number(xb), cfg});
    }
    for (std::size_t nt : {1, 4, 10, 16}) {
      auto cfg = detail::recipe_base(published, scale, seed, 0.15, 2.0);
      cfg.noise.kind = ProcessKind::ensemble;
      cfg.noise.ensemble =
          detail::log_uniform_bath(nt, 0.207 / std::sqrt(static_cast<double>(nt)), 0.3);
      cfg.estimation.repair = RepairMethod::quadratic_rim;
      cfg.estimation.tensors = {{2, 30, {}}, {3, 30, {2}}};
      cfg.estimation.spectra = false;
      out.push_back({"nt_" + std::to_string(nt), cfg});
    }
  } else if (figure == "figS1") {
    auto cfg = detail::recipe_base(5e8, scale, seed, 0.25, 1.0);
    cfg.noise.kind = ProcessKind::rtn;
    cfg.noise.rtn = TlfParams::from_rate(0.206, 0.063, 0.0);
    cfg.estimation.repair = RepairMethod::quadratic_rim;
    cfg.estimation.tensors = {{4, 16, {2}}, {4, 12, {}}};
    cfg.estimation.pinned_zero = 1;
    out.push_back({"trispectrum", cfg});
  } else {
    throw ConfigError("unknown figure '" + std::string(figure) + "' (fig2, fig3, fig4, figS1)");
  }
  return out;
}

}  // namespace rimnoise
