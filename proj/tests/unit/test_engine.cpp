#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rimnoise/engine.hpp"
#include "rimnoise/recipes.hpp"

namespace rimnoise {
namespace {

ExperimentConfig small_rtn() {
  ExperimentConfig cfg;
  cfg.noise.kind = ProcessKind::rtn;
  cfg.noise.rtn = TlfParams::from_rate(1.0, 0.5, 0.4);
  cfg.rim.tau = 0.1;
  cfg.rim.delta_t = 0.5;
  cfg.rim.n_cycles = 32;
  cfg.estimation.tensors = {{2, 4, {}}, {3, 6, {}}, {4, 5, {1}}};
  cfg.run.trajectories = 300;  // not a multiple of the block size
  cfg.run.seed = 42;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Engine, WorkerCountDoesNotChangeResults) {
  auto cfg = small_rtn();
  cfg.estimation.repair = RepairMethod::quadratic_rim;
  const auto a = execute(cfg);
  cfg.run.workers = 3;
  const auto b = execute(cfg);
  ASSERT_EQ(a.tensors.size(), b.tensors.size());
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    EXPECT_EQ(a.tensors[i].cumulant->values, b.tensors[i].cumulant->values);
    EXPECT_EQ(a.tensors[i].cumulant->std_errors, b.tensors[i].cumulant->std_errors);
    if (a.tensors[i].spectrum) EXPECT_EQ(a.tensors[i].spectrum->values, b.tensors[i].spectrum->values);
  }
}

TEST(Engine, MatchesDirectEstimation) {
  auto cfg = small_rtn();
  cfg.estimation.tensors = {{3, 4, {}}};
  cfg.estimation.repair = RepairMethod::none;
  const auto r = execute(cfg);
  const RecordContext ctx = RecordContext::from(cfg.rim, cfg.measurement, cfg.estimation.mode);
  CorrelationEstimator est(3, LagSet::box(2, 4), ctx);
  for (std::uint64_t i = 0; i < cfg.run.trajectories; ++i) est.add(simulate_trajectory(cfg, i, false).linear);
  const auto direct = est.result();
  const auto* t = r.find(3);
  ASSERT_NE(t, nullptr);
  for (std::size_t k = 0; k < direct.size(); ++k) {
    EXPECT_NEAR(t->moment.values[k], direct.values[k], 1e-9 * (1 + std::abs(direct.values[k])));
  }
}

TEST(Engine, SupportTensorsAreAddedForHigherOrders) {
  const auto r = execute(small_rtn());
  const auto* t4 = r.find(4);
  ASSERT_NE(t4, nullptr);
  EXPECT_TRUE(t4->cumulant->fully_valid());
  EXPECT_FALSE(t4->spectrum.has_value());  // slices are not transformed
  EXPECT_TRUE(r.find(2)->spectrum.has_value());
  EXPECT_TRUE(r.find(3)->spectrum.has_value());
  bool has_support = false;
  for (const auto& t : r.tensors) has_support = has_support || t.support;
  EXPECT_TRUE(has_support);  // reach of the order-4 slice exceeds the order-2 box
}

TEST(Engine, TrivialRun) {
  ExperimentConfig cfg;
  cfg.rim.n_cycles = 1;
  cfg.run.trajectories = 1;
  const auto r = execute(cfg);
  EXPECT_TRUE(r.tensors.empty());
  ASSERT_EQ(r.first_outcome.size(), 1u);
  EXPECT_LE(std::abs(r.first_outcome[0]), 1.0);
}

TEST(Engine, SingleTrajectoryHasInfiniteErrors) {
  ExperimentConfig cfg;
  cfg.rim.n_cycles = 4;
  cfg.run.trajectories = 1;
  cfg.estimation.tensors = {{2, 2, {}}};
  cfg.estimation.spectra = false;
  const auto r = execute(cfg);
  EXPECT_TRUE(std::isinf(r.tensors[0].moment.std_errors[1]));
}

TEST(Engine, WritesArtifactsDeterministically) {
  const auto base = std::filesystem::temp_directory_path() / "rimnoise_engine_test";
  std::filesystem::remove_all(base);
  auto cfg = small_rtn();
  cfg.output.svg = true;
  cfg.output.dump = 2;
  cfg.output.dir = (base / "a").string();
  run_experiment(cfg);
  cfg.output.dir = (base / "b").string();
  cfg.run.workers = 2;
  const auto files = write_artifacts(execute(cfg));
  EXPECT_NE(std::find(files.begin(), files.end(), "report.json"), files.end());
  EXPECT_NE(std::find(files.begin(), files.end(), "trajectory_1.csv"), files.end());
  for (const auto& f : files) {
    ASSERT_TRUE(std::filesystem::exists(base / "a" / f)) << f;
    if (f.ends_with(".csv")) EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
  }
  const auto report = Json::parse(slurp(base / "a" / "report.json"));
  EXPECT_EQ(report["seed"], 42);
  EXPECT_EQ(report["config"]["run"]["trajectories"], 300);
  const auto back = read_tensor_csv((base / "a" / "t0_order2_cumulant.csv").string(), TensorKind::cumulant);
  EXPECT_EQ(back.lags.size(), 5u);
  EXPECT_NEAR(back.step, 0.5, 1e-12);
  std::filesystem::remove_all(base);
}

TEST(Engine, OracleOverlays) {
  NoiseConfig ou;
  ou.ou = OuParams{2.0, 1.0};
  const auto t = oracle_tensor(ou, 2, LagSet::box(1, 3), 0.1);
  EXPECT_NEAR(t.values[2], 0.5 * std::exp(-0.4), 1e-15);
  EXPECT_NEAR(oracle_spectrum1(ou, 2.0), 0.25, 1e-15);
  NoiseConfig rtn;
  rtn.kind = ProcessKind::rtn;
  rtn.rtn = TlfParams::from_rate(1.0, 1.0, 0.5);
  const auto t3 = oracle_tensor(rtn, 3, LagSet(2, {5, 10}), 0.1);
  EXPECT_NEAR(t3.values[0], -0.27591, 5e-6);
}

TEST(Recipes, FigureParameterSets) {
  const auto fig2 = make_recipe("fig2", 1e-6, 1);
  ASSERT_EQ(fig2.size(), 3u);
  EXPECT_EQ(fig2[0].config.run.trajectories, 500u);
  EXPECT_DOUBLE_EQ(fig2[2].config.noise.ou.gamma, 4.0);
  const auto fig3 = make_recipe("fig3", 1.0, 1);
  EXPECT_EQ(fig3[0].config.run.trajectories, 400000000u);
  EXPECT_EQ(fig3[0].config.estimation.mode, ReadoutMode::bernoulli);
  EXPECT_NEAR(fig3[0].config.noise.ensemble.fluctuators[1].total_rate(), 21.35e-3, 1e-12);
  const auto fig4 = make_recipe("fig4", 1e-6, 1);
  EXPECT_EQ(fig4.size(), 9u);
  EXPECT_NEAR(fig4[8].config.noise.ensemble.fluctuators[0].lambda, 0.207 / 4, 1e-12);
  const auto s1 = make_recipe("figS1", 1e-6, 1);
  EXPECT_DOUBLE_EQ(s1[0].config.rim.tau, 0.25);
  EXPECT_THROW(make_recipe("fig9", 1.0, 1), ConfigError);
  EXPECT_THROW(make_recipe("fig2", 0.0, 1), ConfigError);
  for (const auto* set : {&fig2, &fig3, &fig4, &s1}) {
    for (const auto& r : *set) EXPECT_NO_THROW(r.config.validate()) << r.label;
  }
}

TEST(Recipes, Fig4XiSweepTrendsToZero) {
  const auto fig4 = make_recipe("fig4", 1.0, 1);
  double previous = 1e9;
  // |C3| peaks near xi = 0.58, so the sweep decreases from xi = 0.5 on.
  for (std::size_t i = 1; i < 5; ++i) {
    const auto& cfg = fig4[i].config;
    const auto t = oracle_tensor(cfg.noise, 3, LagSet(2, {2, 2}), cfg.rim.effective_step());
    EXPECT_LE(std::abs(t.values[0]), previous);
    previous = std::abs(t.values[0]);
  }
  EXPECT_EQ(previous, 0.0);
}

}  // namespace
}  // namespace rimnoise
