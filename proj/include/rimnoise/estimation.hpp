#pragma once

// Estimation of n-point noise correlations from RIM outcome records.
//
// Each reading is first mapped to a normalized statistic u_k whose
// conditional mean given the noise is cos(phi_k + dphi_k):
//   conditional     u = r / d
//   ideal           u = (-1)^alpha / d
//   weak optical    u = (n - g_bar) / (Delta d)
//   assignment      u = ((-1)^alpha - a) / (b d)
// with d = exp(-tau / T2). For dphi = -pi/2, u / tau samples beta(t_k).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rimnoise/correlation_tensor.hpp"
#include "rimnoise/errors.hpp"
#include "rimnoise/rim.hpp"

namespace rimnoise {

enum class OriginMode { fixed, averaged };

inline std::string_view to_string(OriginMode mode) {
  return mode == OriginMode::fixed ? "fixed" : "averaged";
}

/// Affine map from a stored reading to the normalized statistic u.
struct StatisticMap {
  double slope = 1.0;      // -2 turns a bit b into 1 - 2b = (-1)^b
  double intercept = 0.0;
  double scale = 1.0;

  static StatisticMap for_records(ReadoutMode mode, const MeasurementModel& model, double tau) {
    const double damping = model.damping(tau);
    if (mode == ReadoutMode::conditional) return StatisticMap{1.0, 0.0, damping};
    switch (model.kind) {
      case MeasurementKind::ideal:
        return StatisticMap{-2.0, 1.0, damping};
      case MeasurementKind::weak_optical:
        return StatisticMap{1.0, -model.offset(), model.contrast() * damping};
      case MeasurementKind::assignment_error:
        return StatisticMap{-2.0, 1.0 - model.offset(), model.contrast() * damping};
    }
    return {};
  }

  [[nodiscard]] double operator()(double reading) const {
    return (slope * reading + intercept) / scale;
  }
};

/// Everything the estimator needs to know about how records were produced.
struct RecordContext {
  double tau = 0.05;
  double step = 0.1;  // sampling interval (delta_t + t_dead), us
  ReadoutMode mode = ReadoutMode::conditional;
  MeasurementModel model;

  [[nodiscard]] StatisticMap statistic() const { return StatisticMap::for_records(mode, model, tau); }

  static RecordContext from(const RimConfig& cfg, const MeasurementModel& model, ReadoutMode mode) {
    return RecordContext{cfg.tau, cfg.effective_step(), mode, model};
  }
};

/// Mergeable sums of per-trajectory statistics, one slot per lag tuple.
struct MomentAccumulator {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::uint64_t count = 0;

  explicit MomentAccumulator(std::size_t slots = 0) : sum(slots, 0.0), sum_sq(slots, 0.0) {}

  void merge(const MomentAccumulator& other) {
    if (other.count == 0) return;
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += other.sum[i];
      sum_sq[i] += other.sum_sq[i];
    }
    count += other.count;
  }

  [[nodiscard]] double mean(std::size_t i) const { return sum[i] / static_cast<double>(count); }

  [[nodiscard]] double std_error(std::size_t i) const {
    if (count < 2) return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(count);
    const double m = sum[i] / n;
    const double var = std::max(0.0, (sum_sq[i] - n * m * m) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

/// Accumulated sums of one estimator, detached from its lag layout.
struct EstimatorPartial {
  MomentAccumulator linear;
  MomentAccumulator quadratic;
};

namespace detail {

// Distinct cycle offsets of (0, lags...) and how often each appears.
struct IndexPattern {
  std::vector<int> offsets;
  std::vector<int> multiplicity;

  explicit IndexPattern(std::span<const int> lags) {
    auto add = [&](int offset) {
      for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (offsets[i] == offset) {
          ++multiplicity[i];
          return;
        }
      }
      offsets.push_back(offset);
      multiplicity.push_back(1);
    };
    add(0);
    for (int lag : lags) add(lag);
  }

  [[nodiscard]] int max_multiplicity() const {
    return *std::max_element(multiplicity.begin(), multiplicity.end());
  }
  [[nodiscard]] int span() const { return *std::max_element(offsets.begin(), offsets.end()); }
};

}  // namespace detail

/// Streaming n-point estimator. Feed it one trajectory at a time, merge
/// partial estimators with `merge`, then read the tensors.
///
/// The per-trajectory statistic for a lag tuple is the mean of the product
/// prod_j u_{o + l_j} / tau^n over admissible origins o (only o = 0 in fixed
/// mode); the reported standard error is the spread of that statistic across
/// trajectories.
///
/// With quadratic records attached (same noise, dphi = pi on every cycle) the
/// estimator also evaluates the repeated-index points whose indices repeat at
/// most twice: each doubled index contributes 2 (u^q + 1) / tau^2 ~ beta^2.
class CorrelationEstimator {
 public:
  CorrelationEstimator(int order, LagSet lags, const RecordContext& ctx,
                       OriginMode origin = OriginMode::averaged, bool with_quadratic = false)
      : order_(order),
        lags_(std::move(lags)),
        ctx_(ctx),
        map_(ctx.statistic()),
        origin_(origin),
        with_quadratic_(with_quadratic),
        linear_(lags_.size()),
        quadratic_(with_quadratic ? lags_.size() : 0) {
    detail::require(order >= 1, "correlation order must be at least 1");
    detail::require(lags_.dims() == static_cast<std::size_t>(order - 1),
                    "lag tuples must have order - 1 entries");
    detail::require(ctx.tau > 0.0 && ctx.step > 0.0, "tau and sampling interval must be positive");
    patterns_.reserve(lags_.size());
    for (std::size_t i = 0; i < lags_.size(); ++i) patterns_.emplace_back(lags_[i]);
    inv_tau_n_ = std::pow(ctx.tau, -order);
    products_.assign(lags_.size(), 0.0);
    if (with_quadratic_) quad_products_.assign(lags_.size(), 0.0);
  }

  [[nodiscard]] int order() const { return order_; }
  [[nodiscard]] const LagSet& lags() const { return lags_; }
  [[nodiscard]] std::uint64_t trajectories() const { return linear_.count; }
  [[nodiscard]] bool with_quadratic() const { return with_quadratic_; }

  void add(const OutcomeRecord& record, const OutcomeRecord* quadratic = nullptr) {
    check_record(record);
    const std::size_t n = record.size();
    detail::require(static_cast<std::size_t>(lags_.max_lag()) < n,
                    "lag exceeds the record length");
    u_.resize(n);
    for (std::size_t k = 0; k < n; ++k) u_[k] = map_(record.values[k]);
    if (with_quadratic_) {
      detail::require(quadratic != nullptr, "estimator expects a quadratic-response record");
      check_record(*quadratic);
      detail::require(quadratic->size() == n, "quadratic record length mismatch");
      q_.resize(n);
      const double two_over_tau2 = 2.0 / (ctx_.tau * ctx_.tau);
      for (std::size_t k = 0; k < n; ++k) q_[k] = (map_(quadratic->values[k]) + 1.0) * two_over_tau2;
    }
    const double inv_tau = 1.0 / ctx_.tau;
    for (std::size_t t = 0; t < lags_.size(); ++t) {
      const auto& pat = patterns_[t];
      const std::size_t origins =
          origin_ == OriginMode::fixed ? 1 : n - static_cast<std::size_t>(pat.span());
      products_[t] = origin_mean(lags_[t], origins) * inv_tau_n_;
      if (with_quadratic_ && pat.max_multiplicity() == 2) {
        double acc = 0.0;
        for (std::size_t o = 0; o < origins; ++o) {
          double p = 1.0;
          for (std::size_t j = 0; j < pat.offsets.size(); ++j) {
            const std::size_t k = o + static_cast<std::size_t>(pat.offsets[j]);
            p *= pat.multiplicity[j] == 2 ? q_[k] : u_[k] * inv_tau;
          }
          acc += p;
        }
        quad_products_[t] = acc / static_cast<double>(origins);
      }
    }
    for (std::size_t t = 0; t < lags_.size(); ++t) {
      linear_.sum[t] += products_[t];
      linear_.sum_sq[t] += products_[t] * products_[t];
    }
    ++linear_.count;
    if (with_quadratic_) {
      for (std::size_t t = 0; t < lags_.size(); ++t) {
        quadratic_.sum[t] += quad_products_[t];
        quadratic_.sum_sq[t] += quad_products_[t] * quad_products_[t];
      }
      ++quadratic_.count;
    }
  }

  void merge(const CorrelationEstimator& other) {
    detail::require(other.order_ == order_ && other.lags_ == lags_ &&
                        other.with_quadratic_ == with_quadratic_,
                    "cannot merge estimators with different layouts");
    linear_.merge(other.linear_);
    if (with_quadratic_) quadratic_.merge(other.quadratic_);
  }

  /// Moves the sums out and leaves the estimator empty with the same layout.
  EstimatorPartial take_partial() {
    EstimatorPartial out{std::move(linear_), std::move(quadratic_)};
    linear_ = MomentAccumulator(lags_.size());
    quadratic_ = MomentAccumulator(with_quadratic_ ? lags_.size() : 0);
    return out;
  }

  void merge_partial(const EstimatorPartial& part) {
    detail::require(part.linear.sum.size() == lags_.size() || part.linear.count == 0,
                    "partial does not match the estimator layout");
    linear_.merge(part.linear);
    if (with_quadratic_) quadratic_.merge(part.quadratic);
  }

  /// Moment tensor; repeated-index points are masked.
  [[nodiscard]] CorrelationTensor result() const {
    detail::require(linear_.count > 0, "no trajectories were added");
    CorrelationTensor out(order_, ctx_.step, lags_, TensorKind::moment);
    for (std::size_t t = 0; t < lags_.size(); ++t) {
      out.values[t] = linear_.mean(t);
      out.std_errors[t] = linear_.std_error(t);
      out.valid[t] = has_repeated_index(lags_[t]) ? 0 : 1;
    }
    return out;
  }

  /// Quadratic-response estimates; valid only where some index repeats exactly twice
  /// and none more often.
  [[nodiscard]] CorrelationTensor quadratic_result() const {
    detail::require(with_quadratic_, "estimator was built without quadratic records");
    detail::require(quadratic_.count > 0, "no trajectories were added");
    CorrelationTensor out(order_, ctx_.step, lags_, TensorKind::moment);
    for (std::size_t t = 0; t < lags_.size(); ++t) {
      const bool usable = patterns_[t].max_multiplicity() == 2;
      out.values[t] = usable ? quadratic_.mean(t) : 0.0;
      out.std_errors[t] = usable ? quadratic_.std_error(t) : 0.0;
      out.valid[t] = usable ? 1 : 0;
    }
    return out;
  }

 private:
  void check_record(const OutcomeRecord& record) const {
    if (record.mode != ctx_.mode || record.kind != ctx_.model.kind) {
      throw ConfigError("outcome records are heterogeneous (mode or measurement kind differs)");
    }
  }

  double origin_mean(std::span<const int> lags, std::size_t origins) const {
    double acc = 0.0;
    for (std::size_t o = 0; o < origins; ++o) {
      double p = u_[o];
      for (int lag : lags) p *= u_[o + static_cast<std::size_t>(lag)];
      acc += p;
    }
    return acc / static_cast<double>(origins);
  }

  int order_;
  LagSet lags_;
  RecordContext ctx_;
  StatisticMap map_;
  OriginMode origin_;
  bool with_quadratic_;
  MomentAccumulator linear_;
  MomentAccumulator quadratic_;
  std::vector<detail::IndexPattern> patterns_;
  double inv_tau_n_ = 1.0;
  // scratch
  std::vector<double> u_;
  std::vector<double> q_;
  std::vector<double> products_;
  std::vector<double> quad_products_;
};

/// Batch form of the estimator over a collection of records.
inline CorrelationTensor estimate_correlation(std::span<const OutcomeRecord> records, int order,
                                              const LagSet& lags, const RecordContext& ctx,
                                              OriginMode origin = OriginMode::averaged) {
  detail::require(!records.empty(), "no outcome records");
  const std::size_t n = records.front().size();
  for (const auto& r : records) {
    if (r.size() != n) throw ConfigError("outcome records have different lengths");
  }
  CorrelationEstimator est(order, lags, ctx, origin);
  for (const auto& r : records) est.add(r);
  return est.result();
}

/// Quadratic-response estimates at repeated-index points. `quadratic[i]` must
/// come from the same noise realization as `linear[i]`, run with dphi = pi.
inline CorrelationTensor estimate_quadratic_rim(std::span<const OutcomeRecord> linear,
                                                std::span<const OutcomeRecord> quadratic,
                                                int order, const LagSet& lags,
                                                const RecordContext& ctx,
                                                OriginMode origin = OriginMode::averaged) {
  detail::require(!linear.empty(), "no outcome records");
  if (quadratic.size() != linear.size()) {
    throw ConfigError("quadratic-response records missing for some trajectories");
  }
  CorrelationEstimator est(order, lags, ctx, origin, true);
  for (std::size_t i = 0; i < linear.size(); ++i) est.add(linear[i], &quadratic[i]);
  return est.quadratic_result();
}

enum class RepairMethod { none, interpolate, quadratic_rim };

inline std::string_view to_string(RepairMethod m) {
  switch (m) {
    case RepairMethod::none: return "none";
    case RepairMethod::interpolate: return "interpolate";
    case RepairMethod::quadratic_rim: return "quadratic_rim";
  }
  return "?";
}

namespace detail {

// Fills masked points from the originally valid points along each lag axis.
// An axis with valid neighbours on both sides contributes the linear
// interpolant; the axis results are averaged. If no axis brackets the point,
// the nearest one-sided neighbours are averaged instead.
inline CorrelationTensor interpolate_masked(const CorrelationTensor& in) {
  CorrelationTensor out = in;
  const std::size_t dims = in.lags.dims();
  std::vector<int> probe(dims);
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in.valid[i]) continue;
    const auto tuple = in.lags[i];
    double sum = 0.0, var = 0.0;
    int bracketing = 0;
    double side_sum = 0.0, side_var = 0.0;
    int sides = 0;
    for (std::size_t a = 0; a < dims; ++a) {
      std::optional<std::size_t> below, above;
      int dist_below = 0, dist_above = 0;
      for (int dir : {-1, +1}) {
        std::copy(tuple.begin(), tuple.end(), probe.begin());
        for (int d = 1;; ++d) {
          probe[a] = tuple[a] + dir * d;
          if (probe[a] < 0) break;
          auto idx = in.find(probe);
          if (!idx) break;
          if (in.valid[*idx]) {
            (dir < 0 ? below : above) = idx;
            (dir < 0 ? dist_below : dist_above) = d;
            break;
          }
        }
      }
      if (below && above) {
        const double w_above = static_cast<double>(dist_below) / (dist_below + dist_above);
        const double w_below = 1.0 - w_above;
        sum += w_below * in.values[*below] + w_above * in.values[*above];
        var += w_below * w_below * in.std_errors[*below] * in.std_errors[*below] +
               w_above * w_above * in.std_errors[*above] * in.std_errors[*above];
        ++bracketing;
      } else {
        for (auto idx : {below, above}) {
          if (!idx) continue;
          side_sum += in.values[*idx];
          side_var += in.std_errors[*idx] * in.std_errors[*idx];
          ++sides;
        }
      }
    }
    if (bracketing > 0) {
      out.values[i] = sum / bracketing;
      out.std_errors[i] = std::sqrt(var) / bracketing;
    } else if (sides > 0) {
      out.values[i] = side_sum / sides;
      out.std_errors[i] = std::sqrt(side_var) / sides;
    } else {
      // Nothing along the axes: average the closest valid shell (Chebyshev distance).
      int best = std::numeric_limits<int>::max();
      double shell_sum = 0.0, shell_var = 0.0;
      int shell = 0;
      for (std::size_t j = 0; j < in.size(); ++j) {
        if (!in.valid[j]) continue;
        const auto other = in.lags[j];
        int dist = 0;
        for (std::size_t a = 0; a < dims; ++a) dist = std::max(dist, std::abs(other[a] - tuple[a]));
        if (dist > best) continue;
        if (dist < best) {
          best = dist;
          shell_sum = shell_var = 0.0;
          shell = 0;
        }
        shell_sum += in.values[j];
        shell_var += in.std_errors[j] * in.std_errors[j];
        ++shell;
      }
      if (shell == 0) throw RuntimeError("masked point has no unmasked neighbours to interpolate from");
      out.values[i] = shell_sum / shell;
      out.std_errors[i] = std::sqrt(shell_var) / shell;
    }
    out.valid[i] = 1;
  }
  return out;
}

}  // namespace detail

/// Fills masked (repeated-index) points. Quadratic-rim copies the
/// quadratic-response estimates from `aux` where available; points it cannot
/// cover (an index repeated three or more times) stay masked.
inline CorrelationTensor repair_repeated_indices(const CorrelationTensor& tensor,
                                                 RepairMethod method,
                                                 const CorrelationTensor* aux = nullptr) {
  switch (method) {
    case RepairMethod::none:
      return tensor;
    case RepairMethod::interpolate:
      return detail::interpolate_masked(tensor);
    case RepairMethod::quadratic_rim: {
      if (aux == nullptr) throw ConfigError("quadratic-rim repair needs quadratic-response records");
      detail::require(aux->same_grid(tensor), "quadratic-response tensor is on a different grid");
      CorrelationTensor out = tensor;
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.valid[i] || !aux->valid[i]) continue;
        out.values[i] = aux->values[i];
        out.std_errors[i] = aux->std_errors[i];
        out.valid[i] = 1;
      }
      return out;
    }
  }
  return tensor;
}

}  // namespace rimnoise
