#pragma once

// Experiment driver: noise -> RIM records -> streamed estimators -> repaired
// moments -> cumulants -> polyspectra, plus oracle overlays and artifacts.
//
// Trajectory i uses the substream Seed{master, i}; its noise, measurement and
// quadratic-response draws come from derived keys, so a trajectory's data
// does not depend on which worker produced it. Trajectories are grouped into
// fixed blocks of kBlockSize, each block is accumulated in index order and
// blocks are merged in index order, so every output is independent of the
// worker count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rimnoise/config.hpp"
#include "rimnoise/cumulants.hpp"
#include "rimnoise/errors.hpp"
#include "rimnoise/estimation.hpp"
#include "rimnoise/io.hpp"
#include "rimnoise/noise.hpp"
#include "rimnoise/oracles.hpp"
#include "rimnoise/rim.hpp"
#include "rimnoise/spectra.hpp"

namespace rimnoise {

inline constexpr std::uint64_t kBlockSize = 64;

struct TensorOutput {
  TensorRequest request;
  bool support = false;  // added to feed a higher-order cumulant
  CorrelationTensor moment;
  std::optional<CorrelationTensor> quadratic;
  CorrelationTensor repaired;
  std::size_t masked = 0;        // points masked before repair
  std::size_t interpolated = 0;  // points filled by interpolation
  std::optional<CorrelationTensor> cumulant;
  std::optional<CorrelationTensor> oracle;  // exact cumulant on the same lags
  std::optional<Polyspectrum> spectrum;
  std::optional<Polyspectrum> oracle_spectrum;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<TensorOutput> tensors;
  std::vector<NoiseTrajectory> dumped_noise;
  std::vector<OutcomeRecord> dumped_outcomes;
  std::vector<double> first_outcome;
  std::vector<std::string> warnings;
  std::uint64_t trajectories = 0;
  double wall_seconds = 0.0;

  [[nodiscard]] const TensorOutput* find(int order, bool support = false) const {
    for (const auto& t : tensors) {
      if (t.request.order == order && t.support == support) return &t;
    }
    return nullptr;
  }
};

// --- sampling --------------------------------------------------------------------

inline NoiseTrajectory sample_noise(const NoiseConfig& noise, const RimConfig& rim, Seed seed) {
  const auto grid = rim.grid();
  const auto integ = rim.integration();
  switch (noise.kind) {
    case ProcessKind::ou: return sample_ou_trajectory(noise.ou, grid, seed, integ);
    case ProcessKind::rtn: return sample_rtn_trajectory(noise.rtn, grid, seed, integ);
    case ProcessKind::ensemble: return sample_ensemble_trajectory(noise.ensemble, grid, seed, integ);
  }
  throw ConfigError("unknown noise process");
}

inline Seed trajectory_seed(std::uint64_t master, std::uint64_t index) { return Seed{master, index}; }

struct TrajectoryData {
  NoiseTrajectory noise;
  OutcomeRecord linear;
  std::optional<OutcomeRecord> quadratic;
};

inline TrajectoryData simulate_trajectory(const ExperimentConfig& cfg, std::uint64_t index,
                                          bool with_quadratic) {
  const Seed seed = trajectory_seed(cfg.run.seed, index);
  TrajectoryData d;
  d.noise = sample_noise(cfg.noise, cfg.rim, seed.derive(stream_tags::kNoise));
  d.linear = run_trajectory(d.noise, cfg.rim, cfg.measurement, cfg.estimation.mode,
                            seed.derive(stream_tags::kMeasurement));
  if (with_quadratic) {
    d.quadratic = run_trajectory(d.noise, cfg.rim.with_constant_dphi(kQuadraticResponsePhase),
                                 cfg.measurement, cfg.estimation.mode,
                                 seed.derive(stream_tags::kQuadratic));
  }
  return d;
}

// --- oracles ---------------------------------------------------------------------

/// Exact cumulant at times (0, lags * step), or nothing for mean (order 1).
inline std::optional<double> oracle_cumulant(const NoiseConfig& noise, int order,
                                             std::span<const int> lags, double step) {
  if (order < 2) return 0.0;
  std::vector<double> dt(lags.size());
  for (std::size_t i = 0; i < lags.size(); ++i) dt[i] = lags[i] * step;
  switch (noise.kind) {
    case ProcessKind::ou: return ou_cumulant(noise.ou, order, dt).value;
    case ProcessKind::rtn:
      return ensemble_cumulant(TlfEnsembleParams{{noise.rtn}}, order, dt).value;
    case ProcessKind::ensemble: return ensemble_cumulant(noise.ensemble, order, dt).value;
  }
  return std::nullopt;
}

inline CorrelationTensor oracle_tensor(const NoiseConfig& noise, int order, const LagSet& lags,
                                       double step) {
  CorrelationTensor t(order, step, lags, TensorKind::cumulant);
  for (std::size_t i = 0; i < lags.size(); ++i) {
    t.values[i] = oracle_cumulant(noise, order, lags[i], step).value_or(0.0);
  }
  return t;
}

/// Exact continuous-time spectrum S^(1)(w).
inline double oracle_spectrum1(const NoiseConfig& noise, double omega) {
  switch (noise.kind) {
    case ProcessKind::ou: return ou_spectrum(noise.ou, omega).value;
    case ProcessKind::rtn: return ensemble_spectrum(TlfEnsembleParams{{noise.rtn}}, omega).value;
    case ProcessKind::ensemble: return ensemble_spectrum(noise.ensemble, omega).value;
  }
  return 0.0;
}

// --- estimation plan -------------------------------------------------------------

namespace detail {

struct EstimatorSlot {
  TensorRequest request;
  bool support = false;
};

// Requested tensors plus full boxes of orders 2..n-2 that the order-n
// cumulants need, reusing requested full boxes where they reach far enough.
inline std::vector<EstimatorSlot> plan_estimators(const EstimationConfig& est) {
  std::vector<EstimatorSlot> slots;
  for (const auto& r : est.tensors) slots.push_back({r, false});
  std::map<int, int> need;  // order -> reach
  for (const auto& r : est.tensors) {
    for (int k = 2; k <= r.order - 2; ++k) need[k] = std::max(need[k], r.reach());
  }
  for (const auto& [order, reach] : need) {
    bool covered = false;
    for (const auto& r : est.tensors) {
      if (r.order == order && r.is_full_box() && r.max_lag >= reach) covered = true;
    }
    if (!covered) slots.push_back({TensorRequest{order, reach, {}}, true});
  }
  return slots;
}

// The moment tensor of `order` that covers `reach` on a full box.
inline const CorrelationTensor* support_moment(const std::vector<TensorOutput>& outs, int order,
                                               int reach) {
  const CorrelationTensor* best = nullptr;
  for (const auto& o : outs) {
    if (o.request.order == order && o.request.is_full_box() && o.request.max_lag >= reach) {
      if (best == nullptr || o.request.max_lag < best->lags.max_lag()) best = &o.repaired;
    }
  }
  return best;
}

}  // namespace detail

// --- driver ----------------------------------------------------------------------

/// Runs the experiment in memory. Nothing is written to disk.
inline RunReport execute(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = cfg;
  report.warnings = cfg.warnings();
  report.trajectories = cfg.run.trajectories;

  const auto& est = cfg.estimation;
  const bool quadratic = est.repair == RepairMethod::quadratic_rim;
  const auto slots = detail::plan_estimators(est);
  const RecordContext ctx = RecordContext::from(cfg.rim, cfg.measurement, est.mode);

  std::vector<CorrelationEstimator> totals;
  for (const auto& s : slots) {
    totals.emplace_back(s.request.order, s.request.lag_set(), ctx, est.origin, quadratic);
  }

  const std::uint64_t n_traj = cfg.run.trajectories;
  const std::uint64_t n_blocks = (n_traj + kBlockSize - 1) / kBlockSize;
  const std::size_t n_dump = std::min<std::uint64_t>(cfg.output.dump, n_traj);
  report.dumped_noise.resize(n_dump);
  report.dumped_outcomes.resize(n_dump);

  std::mutex mutex;
  std::map<std::uint64_t, std::vector<EstimatorPartial>> pending;
  std::uint64_t next_merge = 0;
  std::atomic<std::uint64_t> next_block{0};
  std::exception_ptr failure;

  auto worker = [&]() {
    try {
      std::vector<CorrelationEstimator> local;
      local.reserve(slots.size());
      for (const auto& s : slots) {
        local.emplace_back(s.request.order, s.request.lag_set(), ctx, est.origin, quadratic);
      }
      for (;;) {
        const std::uint64_t b = next_block.fetch_add(1);
        if (b >= n_blocks) break;
        {
          std::lock_guard lock(mutex);
          if (failure) break;
        }
        const std::uint64_t lo = b * kBlockSize, hi = std::min(n_traj, lo + kBlockSize);
        for (std::uint64_t i = lo; i < hi; ++i) {
          auto data = simulate_trajectory(cfg, i, quadratic);
          for (auto& e : local) e.add(data.linear, data.quadratic ? &*data.quadratic : nullptr);
          if (i < n_dump) {
            report.dumped_noise[i] = data.noise;
            report.dumped_outcomes[i] = data.linear;
          }
          if (i == 0) report.first_outcome = data.linear.values;
        }
        std::vector<EstimatorPartial> parts;
        parts.reserve(local.size());
        for (auto& e : local) parts.push_back(e.take_partial());
        std::lock_guard lock(mutex);
        pending.emplace(b, std::move(parts));
        for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
          for (std::size_t j = 0; j < totals.size(); ++j) totals[j].merge_partial(it->second[j]);
          pending.erase(it);
          ++next_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::uint64_t>(cfg.run.workers, std::max<std::uint64_t>(1, n_blocks)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Moments and repair.
  for (std::size_t j = 0; j < slots.size(); ++j) {
    TensorOutput out;
    out.request = slots[j].request;
    out.support = slots[j].support;
    out.moment = totals[j].result();
    out.masked = out.moment.invalid_count();
    if (quadratic) out.quadratic = totals[j].quadratic_result();
    CorrelationTensor repaired =
        repair_repeated_indices(out.moment, est.repair, out.quadratic ? &*out.quadratic : nullptr);
    if (est.repair != RepairMethod::none && !repaired.fully_valid()) {
      out.interpolated = repaired.invalid_count();
      repaired = repair_repeated_indices(repaired, RepairMethod::interpolate);
    } else if (est.repair == RepairMethod::interpolate) {
      out.interpolated = out.masked;
    }
    out.repaired = std::move(repaired);
    report.tensors.push_back(std::move(out));
  }

  // Cumulants, oracles and spectra.
  for (auto& out : report.tensors) {
    const int n = out.request.order;
    if (n >= 2) {
      std::vector<CorrelationTensor> family;
      for (int k = 2; k <= n - 2; ++k) {
        const auto* m = detail::support_moment(report.tensors, k, out.request.reach());
        if (m == nullptr) throw RuntimeError("missing support tensor of order " + std::to_string(k));
        family.push_back(*m);
      }
      family.push_back(out.repaired);
      out.cumulant = moments_to_cumulants(family);
    } else {
      out.cumulant = out.repaired;
      out.cumulant->kind = TensorKind::cumulant;
    }
    out.oracle = oracle_tensor(cfg.noise, n, out.moment.lags, out.moment.step);

    if (est.spectra && n >= 2 && out.request.is_full_box() && !out.support &&
        out.cumulant->fully_valid()) {
      SpectrumOptions opt;
      opt.window = est.window;
      opt.quadrature = est.quadrature;
      const int dims = n - 1;
      if (est.pinned_zero > 0 && est.pinned_zero < dims) {
        opt.pinned.assign(static_cast<std::size_t>(dims), std::nullopt);
        for (int a = dims - est.pinned_zero; a < dims; ++a) opt.pinned[static_cast<std::size_t>(a)] = 0.0;
      }
      out.spectrum = polyspectrum(*out.cumulant, opt);
      opt.propagate_errors = false;
      out.oracle_spectrum = polyspectrum(*out.oracle, opt);
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// --- artifacts -------------------------------------------------------------------

inline std::string tensor_stem(const TensorOutput& t, std::size_t index) {
  std::string s = (t.support ? "support" : "t") + std::to_string(index) + "_order" +
                  std::to_string(t.request.order);
  for (int f : t.request.fixed) s += "_f" + std::to_string(f);
  return s;
}

inline Json report_json(const RunReport& r, const std::vector<std::string>& files = {}) {
  Json tensors = Json::array();
  for (std::size_t i = 0; i < r.tensors.size(); ++i) {
    const auto& t = r.tensors[i];
    Json entry{{"name", tensor_stem(t, i)},
               {"order", t.request.order},
               {"max_lag", t.request.max_lag},
               {"fixed", t.request.fixed},
               {"support", t.support},
               {"points", t.moment.size()},
               {"masked", t.masked},
               {"interpolated", t.interpolated},
               {"effective_samples", t.moment.size() == 0 ? 0 : r.trajectories}};
    if (t.spectrum) entry["spectrum_imag_ratio"] = t.spectrum->imag_ratio;
    tensors.push_back(entry);
  }
  Json first = Json::array();
  for (double v : r.first_outcome) {
    if (first.size() >= 16) break;
    first.push_back(v);
  }
  return Json{{"seed", r.config.run.seed},
              {"trajectories", r.trajectories},
              {"workers", r.config.run.workers},
              {"wall_seconds", r.wall_seconds},
              {"short_evolution_proxy", r.config.short_evolution_proxy()},
              {"warnings", r.warnings},
              {"first_outcome", first},
              {"tensors", tensors},
              {"files", files},
              {"config", to_json(r.config)}};
}

/// Writes CSVs (and SVGs if requested) plus report.json under cfg.output.dir.
inline std::vector<std::string> write_artifacts(const RunReport& r) {
  const std::filesystem::path dir = r.config.output.dir;
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    files.push_back(name);
  };
  for (std::size_t i = 0; i < r.dumped_noise.size(); ++i) {
    put("trajectory_" + std::to_string(i) + ".csv", trajectory_csv(r.dumped_noise[i]));
    put("outcome_" + std::to_string(i) + ".csv", outcome_csv(r.dumped_outcomes[i]));
  }
  for (std::size_t i = 0; i < r.tensors.size(); ++i) {
    const auto& t = r.tensors[i];
    const std::string stem = tensor_stem(t, i);
    put(stem + "_moment.csv", tensor_csv(t.moment));
    if (t.quadratic) put(stem + "_quadratic.csv", tensor_csv(*t.quadratic));
    if (t.cumulant) {
      const auto* oracle = t.oracle ? &*t.oracle : nullptr;
      std::function<double(std::span<const int>)> overlay;
      if (oracle) {
        overlay = [oracle](std::span<const int> tuple) {
          return oracle->values[*oracle->find(tuple)];
        };
      }
      put(stem + "_cumulant.csv", tensor_csv(*t.cumulant, overlay));
    }
    if (t.spectrum) {
      const auto* os = t.oracle_spectrum ? &*t.oracle_spectrum : nullptr;
      std::function<double(std::span<const double>)> overlay;
      if (t.request.order == 2) {
        const NoiseConfig noise = r.config.noise;
        overlay = [noise](std::span<const double> w) { return oracle_spectrum1(noise, w[0]); };
      } else if (os) {
        const auto sp = t.spectrum;
        overlay = [os, sp](std::span<const double> w) {
          std::size_t p = 0;
          for (std::size_t a = 0; a < w.size(); ++a) {
            const auto& ax = sp->axes[a];
            const auto j = static_cast<std::size_t>(
                std::find(ax.begin(), ax.end(), w[a]) - ax.begin());
            p = p * ax.size() + j;
          }
          return os->values[p];
        };
      }
      put(stem + "_spectrum.csv", spectrum_csv(*t.spectrum, overlay));
    }
    if (r.config.output.svg && t.cumulant && t.request.order >= 2) {
      const auto& c = *t.cumulant;
      const std::size_t free = c.lags.dims() - t.request.fixed.size();
      if (free == 1) {
        SvgSeries est{"estimate", {}, {}, {}, "#1f77b4", false};
        SvgSeries exact{"oracle", {}, {}, {}, "#d62728", true};
        for (std::size_t k = 0; k < c.size(); ++k) {
          const double x = c.lags[k].back() * c.step;
          est.x.push_back(x);
          est.y.push_back(c.values[k]);
          est.err.push_back(3.0 * c.std_errors[k]);
          exact.x.push_back(x);
          exact.y.push_back(t.oracle ? t.oracle->values[k] : 0.0);
        }
        put(stem + "_cumulant.svg", svg_lines(stem + " cumulant", "lag (us)", {est, exact}));
      } else if (free == 2) {
        const std::size_t side = static_cast<std::size_t>(t.request.max_lag) + 1;
        put(stem + "_cumulant.svg", svg_heatmap(stem + " cumulant", side, side, c.values));
      }
      if (t.spectrum && t.spectrum->axes.size() == 1) {
        SvgSeries est{"estimate", t.spectrum->axes[0], t.spectrum->values, {}, "#1f77b4", false};
        SvgSeries exact{"oracle", t.spectrum->axes[0], {}, {}, "#d62728", true};
        for (double w : exact.x) exact.y.push_back(oracle_spectrum1(r.config.noise, w));
        put(stem + "_spectrum.svg", svg_lines(stem + " spectrum", "omega (rad/us)", {est, exact}));
      } else if (t.spectrum && t.spectrum->axes.size() == 2) {
        const auto& sp = *t.spectrum;
        // transpose so omega1 runs along x
        std::vector<double> grid(sp.values.size());
        const std::size_t n1 = sp.axes[0].size(), n2 = sp.axes[1].size();
        for (std::size_t a = 0; a < n1; ++a) {
          for (std::size_t b = 0; b < n2; ++b) grid[b * n1 + a] = sp.values[a * n2 + b];
        }
        put(stem + "_spectrum.svg", svg_heatmap(stem + " polyspectrum", n2, n1, grid));
      }
    }
  }
  files.push_back("report.json");
  write_text(dir / "report.json", report_json(r, files).dump(2) + "\n");
  return files;
}

/// execute() followed by write_artifacts().
inline RunReport run_experiment(const ExperimentConfig& cfg) {
  RunReport r = execute(cfg);
  write_artifacts(r);
  return r;
}

}  // namespace rimnoise
