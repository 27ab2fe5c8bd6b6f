#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rimnoise/noise.hpp"

namespace rimnoise {
namespace {

struct Moments {
  double mean = 0, var = 0, cov1 = 0;
};

// Ensemble statistics at cycle k and lag 1 over many independent trajectories.
template <class Sampler>
Moments ensemble_moments(Sampler sample, std::size_t k, int n_traj) {
  double s = 0, s2 = 0, c = 0;
  for (int i = 0; i < n_traj; ++i) {
    const auto tr = sample(Seed{99, static_cast<std::uint64_t>(i)});
    s += tr.values[k];
    s2 += tr.values[k] * tr.values[k];
    c += tr.values[k] * tr.values[k + 1];
  }
  Moments m;
  m.mean = s / n_traj;
  m.var = s2 / n_traj - m.mean * m.mean;
  m.cov1 = c / n_traj - m.mean * m.mean;
  return m;
}

TEST(OuSampler, StationaryVarianceAndCovariance) {
  const OuParams p{2.0, 1.0};
  const TimeGrid grid{0.1, 40};
  const int n = 40000;
  for (std::size_t k : {0u, 30u}) {
    const auto m = ensemble_moments(
        [&](Seed s) { return sample_ou_trajectory(p, grid, s); }, k, n);
    EXPECT_NEAR(m.mean, 0.0, 4 * std::sqrt(0.5 / n));
    EXPECT_NEAR(m.var, 0.5, 0.02);
    EXPECT_NEAR(m.cov1, 0.5 * std::exp(-0.2), 0.02);
  }
}

TEST(OuSampler, DeterministicPerSeed) {
  const OuParams p{1.0, 1.0};
  const TimeGrid grid{0.1, 64};
  const auto a = sample_ou_trajectory(p, grid, Seed{3, 4});
  const auto b = sample_ou_trajectory(p, grid, Seed{3, 4});
  const auto c = sample_ou_trajectory(p, grid, Seed{3, 5});
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(RtnSampler, ValuesMeanAndCorrelation) {
  const auto p = TlfParams::from_rate(1.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(p.asymmetry(), 0.5);
  EXPECT_DOUBLE_EQ(p.p_up(), 0.75);
  const TimeGrid grid{0.5, 20};
  const int n = 40000;
  const auto m = ensemble_moments([&](Seed s) { return sample_rtn_trajectory(p, grid, s); }, 10, n);
  EXPECT_NEAR(m.mean, 0.0, 0.03);
  EXPECT_NEAR(m.var, p.variance(), 0.02);
  EXPECT_NEAR(m.cov1, p.variance() * std::exp(-0.5), 0.02);
  const auto tr = sample_rtn_trajectory(p, grid, Seed{1, 1});
  for (double v : tr.values) {
    EXPECT_TRUE(std::abs(v - 0.5) < 1e-12 || std::abs(v + 1.5) < 1e-12);
  }
}

TEST(EnsembleSampler, VarianceAdds) {
  TlfEnsembleParams e;
  for (double w : make_log_uniform_rates(4, 0.1, 1.0)) e.fluctuators.push_back(TlfParams::from_rate(0.5, w, 0.3));
  const TimeGrid grid{1.0, 8};
  const int n = 40000;
  const auto m =
      ensemble_moments([&](Seed s) { return sample_ensemble_trajectory(e, grid, s); }, 4, n);
  EXPECT_NEAR(m.var, e.variance(), 0.02);
  EXPECT_NEAR(m.mean, 0.0, 0.02);
}

TEST(LogUniformRates, EndpointsExactAndGeometric) {
  const auto r = make_log_uniform_rates(10, 4.77e-3, 95.49e-3);
  EXPECT_EQ(r.front(), 4.77e-3);
  EXPECT_EQ(r.back(), 95.49e-3);
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    EXPECT_NEAR(r[i] * r[i], r[i - 1] * r[i + 1], 1e-15);
  }
  EXPECT_THROW(make_log_uniform_rates(3, 1.0, 0.5), ConfigError);
}

TEST(PhaseIntegration, SlowNoiseGivesPointPhase) {
  // Switching far slower than tau: the window integral equals beta(t_k) tau
  // except in the rare windows containing a flip.
  const auto p = TlfParams::from_rate(1.0, 1e-6, 0.0);
  const TimeGrid grid{1.0, 50};
  const auto tr = sample_rtn_trajectory(p, grid, Seed{2, 2}, PhaseIntegration{0.2, 8});
  ASSERT_EQ(tr.phases.size(), tr.values.size());
  for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_NEAR(tr.phases[k], tr.values[k] * 0.2, 1e-12);
}

TEST(PhaseIntegration, OuIntegratedPhaseVariance) {
  // Var(int_0^tau beta) = (Gamma / gamma^2) (gamma tau - 1 + e^{-gamma tau}).
  const OuParams p{2.0, 1.0};
  const double tau = 0.5;
  const TimeGrid grid{1.0, 4};
  double s2 = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto tr = sample_ou_trajectory(p, grid, Seed{8, std::uint64_t(i)}, PhaseIntegration{tau, 64});
    s2 += tr.phases[1] * tr.phases[1];
  }
  const double g = p.gamma;
  const double expected = p.big_gamma / (g * g) * (g * tau - 1 + std::exp(-g * tau));
  EXPECT_NEAR(s2 / n, expected, 0.03 * expected);
}

TEST(TimeGrid, FromTimesRejectsNonUniform) {
  const std::vector<double> good{0.0, 0.1, 0.2, 0.3};
  EXPECT_NEAR(TimeGrid::from_times(good).step, 0.1, 1e-15);
  const std::vector<double> bad{0.0, 0.1, 0.25};
  EXPECT_THROW(TimeGrid::from_times(bad), ConfigError);
}

TEST(NoiseParams, InvalidInputsRejected) {
  EXPECT_THROW(sample_ou_trajectory(OuParams{-1.0, 1.0}, TimeGrid{0.1, 4}, Seed{}), ConfigError);
  EXPECT_THROW(sample_rtn_trajectory(TlfParams{1.0, 0.0, 1.0}, TimeGrid{0.1, 4}, Seed{}), ConfigError);
  EXPECT_THROW(sample_ensemble_trajectory(TlfEnsembleParams{}, TimeGrid{0.1, 4}, Seed{}), ConfigError);
  EXPECT_THROW(sample_ou_trajectory(OuParams{}, TimeGrid{0.1, 4}, Seed{}, PhaseIntegration{0.2, 4}),
               ConfigError);
}

}  // namespace
}  // namespace rimnoise
