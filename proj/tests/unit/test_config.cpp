#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rimnoise/config.hpp"

namespace rimnoise {
namespace {

Json sample_json() {
  return Json::parse(R"({
    "noise": {"process": "ensemble", "fluctuators": [
      {"lambda": 0.5, "rate": 0.2, "asymmetry": 0.3},
      {"lambda": 0.4, "w_plus": 0.3, "w_minus": 0.1}]},
    "rim": {"tau": 0.1, "delta_t": 0.5, "n_cycles": 64, "t_dead": 0.1, "dphi": -1.5},
    "measurement": {"kind": "weak_optical", "g0": 0.1, "g1": 0.02, "t2": 30},
    "estimation": {"mode": "bernoulli", "origin": "fixed", "repair": "quadratic_rim",
                   "tensors": [{"order": 2, "max_lag": 10}, {"order": 3, "max_lag": 5, "fixed": [2]}],
                   "spectra": false, "window": "hann", "quadrature": "piecewise_linear"},
    "run": {"trajectories": 123, "seed": 9, "workers": 3},
    "output": {"dir": "x", "svg": true, "dump": 2}
  })");
}

TEST(Config, ParsesAllSections) {
  const auto cfg = config_from_json(sample_json());
  EXPECT_EQ(cfg.noise.kind, ProcessKind::ensemble);
  ASSERT_EQ(cfg.noise.ensemble.fluctuators.size(), 2u);
  EXPECT_NEAR(cfg.noise.ensemble.fluctuators[0].total_rate(), 0.2, 1e-15);
  EXPECT_NEAR(cfg.noise.ensemble.fluctuators[0].asymmetry(), 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(cfg.noise.ensemble.fluctuators[1].w_plus, 0.3);
  EXPECT_DOUBLE_EQ(cfg.rim.effective_step(), 0.6);
  EXPECT_DOUBLE_EQ(cfg.rim.dphi(7), -1.5);
  EXPECT_EQ(cfg.measurement.kind, MeasurementKind::weak_optical);
  EXPECT_DOUBLE_EQ(cfg.measurement.t2, 30.0);
  EXPECT_EQ(cfg.estimation.mode, ReadoutMode::bernoulli);
  EXPECT_EQ(cfg.estimation.origin, OriginMode::fixed);
  EXPECT_EQ(cfg.estimation.repair, RepairMethod::quadratic_rim);
  ASSERT_EQ(cfg.estimation.tensors.size(), 2u);
  EXPECT_EQ(cfg.estimation.tensors[1].fixed, std::vector<int>{2});
  EXPECT_EQ(cfg.estimation.window, Window::hann);
  EXPECT_EQ(cfg.run.trajectories, 123u);
  EXPECT_EQ(cfg.run.workers, 3u);
  EXPECT_EQ(cfg.output.dump, 2u);
}

TEST(Config, JsonRoundTrip) {
  const auto cfg = config_from_json(sample_json());
  const Json once = to_json(cfg);
  const Json twice = to_json(config_from_json(once));
  EXPECT_EQ(once, twice);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto j = sample_json();
  j["rim"]["taus"] = 0.1;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = sample_json();
  j["extra"] = 1;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = sample_json();
  j["noise"]["process"] = "pink";
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = sample_json();
  j["rim"]["n_cycles"] = 8;  // lag 10 no longer fits
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = sample_json();
  j["estimation"]["tensors"][1]["fixed"] = {2, 3};  // no free lag left
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = sample_json();
  j["rim"]["tau"] = "0.1";
  EXPECT_THROW(config_from_json(j), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, PlanRoundTrip) {
  auto j = sample_json();
  j["run"]["trajectories"] = Json{{"order", 4}, {"delta", 0.1}, {"epsilon", 0.05}, {"tau", 0.25}};
  const auto cfg = config_from_json(j);
  ASSERT_TRUE(cfg.run.plan.has_value());
  EXPECT_EQ(cfg.run.trajectories, hoeffding_sample_size(4, 0.1, 0.05, 0.25).trajectories);
  EXPECT_NEAR(double(cfg.run.trajectories), 4.84e7, 0.01e7);
  const auto again = config_from_json(to_json(cfg));
  EXPECT_EQ(again.run.trajectories, cfg.run.trajectories);

  auto short_plan = to_json(*cfg.run.plan);
  short_plan["trajectories"] = 100;
  EXPECT_THROW(plan_from_json(short_plan), ConfigError);
}

TEST(Config, ShortEvolutionWarning) {
  auto cfg = config_from_json(sample_json());
  EXPECT_TRUE(cfg.warnings().empty());
  cfg.noise.kind = ProcessKind::ou;
  cfg.noise.ou = OuParams{1.0, 50.0};  // sqrt(25) * 0.1 = 0.5
  EXPECT_NEAR(cfg.short_evolution_proxy(), 0.5, 1e-12);
  EXPECT_EQ(cfg.warnings().size(), 1u);
}

TEST(Config, LoadsFile) {
  const auto path = std::filesystem::temp_directory_path() / "rimnoise_config_test.json";
  std::ofstream(path) << sample_json().dump();
  EXPECT_EQ(load_config(path.string()).run.seed, 9u);
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_config(path.string()), ConfigError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace rimnoise
