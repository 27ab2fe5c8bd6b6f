#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rimnoise/estimation.hpp"
#include "rimnoise/noise.hpp"
#include "rimnoise/oracles.hpp"

namespace rimnoise {
namespace {

constexpr double kPi = std::numbers::pi;

struct Records {
  std::vector<OutcomeRecord> linear;
  std::vector<OutcomeRecord> quadratic;
};

template <class Sampler>
Records simulate(const RimConfig& cfg, std::size_t trajectories, std::uint64_t key, Sampler&& sample,
                 bool with_quadratic = false) {
  Records out;
  const auto quad_cfg = cfg.with_constant_dphi(kQuadraticResponsePhase);
  for (std::size_t i = 0; i < trajectories; ++i) {
    const auto noise = sample(cfg.grid(), Seed{key, i});
    out.linear.push_back(run_trajectory(noise, cfg, {}, ReadoutMode::conditional, {}));
    if (with_quadratic) {
      out.quadratic.push_back(run_trajectory(noise, quad_cfg, {}, ReadoutMode::conditional, {}));
    }
  }
  return out;
}

RecordContext conditional_ctx(const RimConfig& cfg) {
  return RecordContext::from(cfg, MeasurementModel::ideal(), ReadoutMode::conditional);
}

TEST(EstimateCorrelation, ConstantRecord) {
  RimConfig cfg;
  cfg.tau = 0.1;
  cfg.delta_t = 0.2;
  cfg.n_cycles = 20;
  const OutcomeRecord rec{std::vector<double>(20, 0.0), ReadoutMode::bernoulli, MeasurementKind::ideal, {}};
  const std::vector<OutcomeRecord> records(3, rec);
  const auto ctx = RecordContext::from(cfg, MeasurementModel::ideal(), ReadoutMode::bernoulli);
  const auto t = estimate_correlation(records, 2, LagSet::box(1, 5), ctx);
  EXPECT_FALSE(t.valid[0]);
  for (std::size_t i = 1; i < t.size(); ++i) {
    ASSERT_TRUE(t.valid[i]);
    EXPECT_NEAR(t.values[i], 100.0, 1e-9);
    EXPECT_EQ(t.std_errors[i], 0.0);
  }
}

TEST(EstimateCorrelation, OuTwoPoint) {
  RimConfig cfg;
  cfg.n_cycles = 64;
  const OuParams ou{1.0, 1.0};
  const auto rec = simulate(cfg, 4000, 21, [&](const TimeGrid& g, Seed s) {
    return sample_ou_trajectory(ou, g, s);
  });
  const auto t = estimate_correlation(rec.linear, 2, LagSet::box(1, 4), conditional_ctx(cfg));
  const double exact = ou_cumulant2(ou, 0.1).value;
  EXPECT_NEAR(exact, 0.45242, 1e-5);
  EXPECT_NEAR(t.values[1], exact, 3 * t.std_errors[1]);
}

TEST(EstimateCorrelation, SymmetricRtnThreePointVanishes) {
  RimConfig cfg;
  cfg.n_cycles = 32;
  const auto rtn = TlfParams::from_rate(1.0, 1.0, 0.0);
  const auto rec = simulate(cfg, 2000, 22, [&](const TimeGrid& g, Seed s) {
    return sample_rtn_trajectory(rtn, g, s);
  });
  const auto t = estimate_correlation(rec.linear, 3, LagSet::box(2, 3, std::vector<int>{2}),
                                      conditional_ctx(cfg));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.valid[i]) continue;
    EXPECT_NEAR(t.values[i], 0.0, 3 * t.std_errors[i]) << "point " << i;
  }
}

TEST(EstimateCorrelation, FixedAndAveragedOriginsAgree) {
  RimConfig cfg;
  cfg.n_cycles = 32;
  const OuParams ou{2.0, 1.0};
  const auto rec = simulate(cfg, 3000, 23, [&](const TimeGrid& g, Seed s) {
    return sample_ou_trajectory(ou, g, s);
  });
  const auto lags = LagSet::box(1, 4);
  const auto avg = estimate_correlation(rec.linear, 2, lags, conditional_ctx(cfg), OriginMode::averaged);
  const auto fix = estimate_correlation(rec.linear, 2, lags, conditional_ctx(cfg), OriginMode::fixed);
  for (std::size_t i = 1; i < lags.size(); ++i) {
    const double sigma = std::hypot(avg.std_errors[i], fix.std_errors[i]);
    EXPECT_NEAR(avg.values[i], fix.values[i], 3 * sigma);
    EXPECT_LT(avg.std_errors[i], fix.std_errors[i]);
  }
}

TEST(EstimateCorrelation, ShotNoiseScaling) {
  RimConfig cfg;
  cfg.n_cycles = 32;
  const OuParams ou{2.0, 1.0};
  const auto rec = simulate(cfg, 20000, 24, [&](const TimeGrid& g, Seed s) {
    return sample_ou_trajectory(ou, g, s);
  });
  std::vector<double> xs, ys;
  for (std::size_t n : {2000, 4000, 8000, 20000}) {
    const std::span<const OutcomeRecord> head(rec.linear.data(), n);
    const auto t = estimate_correlation(head, 2, LagSet::box(1, 1), conditional_ctx(cfg));
    xs.push_back(std::log(double(n)));
    ys.push_back(std::log(t.std_errors[1]));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / xs.size();
    my += ys[i] / ys.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -0.5, 0.05);
}

TEST(EstimateCorrelation, ResponsePhaseSignRule) {
  RimConfig cfg;
  cfg.n_cycles = 16;
  const OuParams ou{1.0, 4.0};
  const auto flipped = cfg.with_constant_dphi(kPi / 2);
  std::vector<OutcomeRecord> a, b;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto noise = sample_ou_trajectory(ou, cfg.grid(), Seed{25, i});
    a.push_back(run_trajectory(noise, cfg, {}, ReadoutMode::conditional, {}));
    b.push_back(run_trajectory(noise, flipped, {}, ReadoutMode::conditional, {}));
  }
  for (int n : {2, 3, 4}) {
    const auto lags = LagSet::box(static_cast<std::size_t>(n - 1), 3);
    const auto ta = estimate_correlation(a, n, lags, conditional_ctx(cfg));
    const auto tb = estimate_correlation(b, n, lags, conditional_ctx(cfg));
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
      EXPECT_NEAR(tb.values[i], sign * ta.values[i], 1e-12 * (1 + std::abs(ta.values[i])));
    }
  }
}

TEST(EstimateCorrelation, RejectsHeterogeneousRecordsAndLongLags) {
  RimConfig cfg;
  cfg.n_cycles = 8;
  const OutcomeRecord cond{std::vector<double>(8, 0.0), ReadoutMode::conditional, MeasurementKind::ideal, {}};
  OutcomeRecord bits = cond;
  bits.mode = ReadoutMode::bernoulli;
  std::vector<OutcomeRecord> mixed{cond, bits};
  EXPECT_THROW(estimate_correlation(mixed, 2, LagSet::box(1, 2), conditional_ctx(cfg)), ConfigError);
  std::vector<OutcomeRecord> single{cond};
  EXPECT_THROW(estimate_correlation(single, 2, LagSet::box(1, 8), conditional_ctx(cfg)), ConfigError);
  OutcomeRecord shorter = cond;
  shorter.values.pop_back();
  std::vector<OutcomeRecord> uneven{cond, shorter};
  EXPECT_THROW(estimate_correlation(uneven, 2, LagSet::box(1, 2), conditional_ctx(cfg)), ConfigError);
}

TEST(EstimateCorrelation, WeakOpticalStatisticNormalization) {
  RimConfig cfg;
  cfg.tau = 0.1;
  cfg.delta_t = 0.2;
  cfg.n_cycles = 4;
  const auto model = MeasurementModel::weak_optical(0.1, 0.02);
  // Photon in every cycle: u = (1 - g_bar) / Delta.
  const OutcomeRecord rec{std::vector<double>(4, 1.0), ReadoutMode::bernoulli, MeasurementKind::weak_optical, {}};
  const std::vector<OutcomeRecord> records{rec};
  const auto ctx = RecordContext::from(cfg, model, ReadoutMode::bernoulli);
  const auto t = estimate_correlation(records, 2, LagSet::box(1, 1), ctx);
  const double u = (1 - 0.06) / 0.04;
  EXPECT_NEAR(t.values[1], u * u / (cfg.tau * cfg.tau), 1e-9);
}

TEST(Estimator, PartialMergeMatchesSinglePass) {
  RimConfig cfg;
  cfg.n_cycles = 24;
  const auto rtn = TlfParams::from_rate(1.0, 0.5, 0.3);
  const auto rec = simulate(cfg, 200, 26, [&](const TimeGrid& g, Seed s) {
    return sample_rtn_trajectory(rtn, g, s);
  }, true);
  const auto lags = LagSet::box(2, 4);
  CorrelationEstimator whole(3, lags, conditional_ctx(cfg), OriginMode::averaged, true);
  CorrelationEstimator left(3, lags, conditional_ctx(cfg), OriginMode::averaged, true);
  CorrelationEstimator right(3, lags, conditional_ctx(cfg), OriginMode::averaged, true);
  for (std::size_t i = 0; i < rec.linear.size(); ++i) {
    whole.add(rec.linear[i], &rec.quadratic[i]);
    (i < 80 ? left : right).add(rec.linear[i], &rec.quadratic[i]);
  }
  CorrelationEstimator merged(3, lags, conditional_ctx(cfg), OriginMode::averaged, true);
  merged.merge_partial(left.take_partial());
  merged.merge(right);
  EXPECT_EQ(left.trajectories(), 0u);
  EXPECT_EQ(merged.trajectories(), 200u);
  const auto a = whole.result(), b = merged.result();
  const auto qa = whole.quadratic_result(), qb = merged.quadratic_result();
  for (std::size_t i = 0; i < lags.size(); ++i) {
    EXPECT_NEAR(a.values[i], b.values[i], 1e-9 * (1 + std::abs(a.values[i])));
    EXPECT_NEAR(a.std_errors[i], b.std_errors[i], 1e-7 * (1 + a.std_errors[i]));
    EXPECT_NEAR(qa.values[i], qb.values[i], 1e-9 * (1 + std::abs(qa.values[i])));
  }
}

TEST(Repair, InterpolatesInteriorPoint) {
  CorrelationTensor t(2, 0.1, LagSet(1, {0, 1, 2}));
  t.values = {1.0, 0.0, 3.0};
  t.valid = {1, 0, 1};
  const auto r = repair_repeated_indices(t, RepairMethod::interpolate);
  EXPECT_TRUE(r.fully_valid());
  EXPECT_DOUBLE_EQ(r.values[1], 2.0);
}

TEST(Repair, InterpolatesMaskedDiagonalOfBox) {
  CorrelationTensor t(3, 0.1, LagSet::box(2, 4));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.values[i] = 1.0 + t.lags[i][0] + 2.0 * t.lags[i][1];
    t.valid[i] = has_repeated_index(t.lags[i]) ? 0 : 1;
  }
  const auto r = repair_repeated_indices(t, RepairMethod::interpolate);
  ASSERT_TRUE(r.fully_valid());
  // Linear data bracketed along some axis is reproduced exactly.
  const auto idx = *r.find(std::vector<int>{2, 2});
  EXPECT_NEAR(r.values[idx], 7.0, 1e-12);
}

TEST(Repair, FailsWithoutNeighbours) {
  CorrelationTensor t(2, 0.1, LagSet(1, {0}));
  t.valid = {0};
  EXPECT_THROW(repair_repeated_indices(t, RepairMethod::interpolate), RuntimeError);
  EXPECT_THROW(repair_repeated_indices(t, RepairMethod::quadratic_rim), ConfigError);
}

TEST(QuadraticRim, ZeroNoiseGivesZero) {
  RimConfig cfg;
  cfg.n_cycles = 8;
  const auto rec = simulate(cfg, 3, 27, [&](const TimeGrid& g, Seed) {
    return NoiseTrajectory{g, std::vector<double>(g.count, 0.0), {}, ProcessKind::ou, {}};
  }, true);
  const auto q = estimate_quadratic_rim(rec.linear, rec.quadratic, 3, LagSet::box(2, 2), conditional_ctx(cfg));
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.valid[i]) EXPECT_NEAR(q.values[i], 0.0, 1e-12);
  }
  EXPECT_FALSE(q.valid[0]);  // (0, 0): index used three times
}

TEST(QuadraticRim, MatchesRtnMomentAtCoincidentTimes) {
  RimConfig cfg;
  cfg.n_cycles = 32;
  const auto rtn = TlfParams::from_rate(1.0, 1.0, 0.5);
  const auto rec = simulate(cfg, 2000, 28, [&](const TimeGrid& g, Seed s) {
    return sample_rtn_trajectory(rtn, g, s);
  }, true);
  const auto q = estimate_quadratic_rim(rec.linear, rec.quadratic, 3, LagSet::box(2, 3), conditional_ctx(cfg));
  const auto idx = *q.find(std::vector<int>{0, 1});
  ASSERT_TRUE(q.valid[idx]);
  const std::vector<double> times{0.0, 0.0, cfg.delta_t};
  const double exact = rtn_moment(rtn, times).value;
  EXPECT_NEAR(q.values[idx], exact, 3 * q.std_errors[idx]);
  EXPECT_THROW(estimate_quadratic_rim(rec.linear, std::span(rec.quadratic).first(5), 3,
                                      LagSet::box(2, 3), conditional_ctx(cfg)),
               ConfigError);
}

}  // namespace
}  // namespace rimnoise
