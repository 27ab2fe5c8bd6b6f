#pragma once

// Conversion between moment and cumulant tensors of a zero-mean stationary
// process. A block B of a partition of the times (t_1..t_n) is looked up in
// the tensor of order |B| at the lag tuple of its sorted times, so the lower
// order tensors must cover every lag difference that occurs.
//
// Standard errors are propagated to first order with covariances between
// tensor entries neglected.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <span>
#include <vector>

#include "rimnoise/correlation_tensor.hpp"
#include "rimnoise/errors.hpp"
#include "rimnoise/partitions.hpp"

namespace rimnoise {

namespace detail {

struct TensorEntry {
  double value = 0.0;
  double variance = 0.0;
  bool valid = true;
};

class TensorLookup {
 public:
  TensorLookup(std::span<const CorrelationTensor> tensors, TensorKind kind) {
    detail::require(!tensors.empty(), "no tensors supplied");
    step_ = tensors.front().step;
    for (const auto& t : tensors) {
      detail::require(t.kind == kind, "tensor kind mismatch");
      detail::require(std::abs(t.step - step_) <= 1e-12 * std::max(1.0, step_),
                      "tensors use different sampling intervals");
      detail::require(by_order_.emplace(t.order, &t).second, "two tensors of the same order");
    }
  }

  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] const CorrelationTensor* of_order(int order) const {
    auto it = by_order_.find(order);
    return it == by_order_.end() ? nullptr : it->second;
  }

  /// Entry at the given (sorted) times.
  [[nodiscard]] TensorEntry at(std::vector<int> times) const {
    const int order = static_cast<int>(times.size());
    const CorrelationTensor* t = of_order(order);
    if (t == nullptr) {
      throw ConfigError("missing order-" + std::to_string(order) + " tensor");
    }
    std::vector<int> tuple(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) tuple[i - 1] = times[i] - times[0];
    do {
      if (auto idx = t->find(tuple)) {
        return TensorEntry{t->values[*idx], t->std_errors[*idx] * t->std_errors[*idx],
                           t->valid[*idx] != 0};
      }
    } while (std::next_permutation(tuple.begin(), tuple.end()));
    throw ConfigError("order-" + std::to_string(order) + " tensor lacks the lag tuple needed");
  }

 private:
  std::map<int, const CorrelationTensor*> by_order_;
  double step_ = 1.0;
};

inline std::vector<int> times_of(std::span<const int> all, std::uint32_t mask) {
  std::vector<int> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (mask & (1u << i)) out.push_back(all[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Cumulant tensor of the highest order supplied, from moment tensors of
/// orders 2..n (order 1 is taken to be zero).
inline CorrelationTensor moments_to_cumulants(std::span<const CorrelationTensor> moments) {
  const detail::TensorLookup lookup(moments, TensorKind::moment);
  const auto& target = *std::max_element(
      moments.begin(), moments.end(),
      [](const CorrelationTensor& a, const CorrelationTensor& b) { return a.order < b.order; });
  const int n = target.order;
  detail::require(n <= 16, "order too large for partition enumeration");
  CorrelationTensor out(n, target.step, target.lags, TensorKind::cumulant);
  const std::uint32_t full = (1u << n) - 1;

  std::vector<int> times(static_cast<std::size_t>(n));
  std::vector<detail::TensorEntry> memo(std::size_t{1} << n);
  std::vector<char> done(memo.size());

  for (std::size_t i = 0; i < target.size(); ++i) {
    times[0] = 0;
    const auto tuple = target.lags[i];
    std::copy(tuple.begin(), tuple.end(), times.begin() + 1);
    std::fill(done.begin(), done.end(), 0);

    // k(S) = m(S) - sum over non-trivial partitions of prod k(B).
    auto cumulant = [&](auto&& self, std::uint32_t s) -> detail::TensorEntry {
      if (done[s]) return memo[s];
      detail::TensorEntry res;
      if (std::popcount(s) >= 2) {
        res = s == full ? detail::TensorEntry{target.values[i],
                                              target.std_errors[i] * target.std_errors[i],
                                              target.valid[i] != 0}
                        : lookup.at(detail::times_of(times, s));
        for_each_partition(s, [&](const std::vector<std::uint32_t>& blocks) {
          if (blocks.size() < 2) return;
          for (auto b : blocks) {
            if (std::popcount(b) == 1) return;
          }
          std::vector<detail::TensorEntry> parts;
          parts.reserve(blocks.size());
          double product = 1.0;
          for (auto b : blocks) {
            parts.push_back(self(self, b));
            product *= parts.back().value;
          }
          res.value -= product;
          for (std::size_t j = 0; j < parts.size(); ++j) {
            double others = 1.0;
            for (std::size_t l = 0; l < parts.size(); ++l) {
              if (l != j) others *= parts[l].value;
            }
            res.variance += others * others * parts[j].variance;
            res.valid = res.valid && parts[j].valid;
          }
        });
      }
      done[s] = 1;
      memo[s] = res;
      return res;
    };
    const auto k = cumulant(cumulant, full);
    out.values[i] = k.value;
    out.std_errors[i] = std::sqrt(k.variance);
    out.valid[i] = k.valid ? 1 : 0;
  }
  return out;
}

/// Moment tensors (same orders and lag sets as the input) from cumulant
/// tensors via m(S) = sum over partitions of prod k(B).
inline std::vector<CorrelationTensor> cumulants_to_moments(
    std::span<const CorrelationTensor> cumulants) {
  const detail::TensorLookup lookup(cumulants, TensorKind::cumulant);
  std::vector<CorrelationTensor> result;
  for (const auto& src : cumulants) {
    const int n = src.order;
    detail::require(n <= 16, "order too large for partition enumeration");
    CorrelationTensor out(n, src.step, src.lags, TensorKind::moment);
    const std::uint32_t full = (1u << n) - 1;
    std::vector<int> times(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < src.size(); ++i) {
      times[0] = 0;
      const auto tuple = src.lags[i];
      std::copy(tuple.begin(), tuple.end(), times.begin() + 1);
      double value = 0.0, variance = 0.0;
      bool valid = true;
      if (n >= 2) {
        for_each_partition(full, [&](const std::vector<std::uint32_t>& blocks) {
          for (auto b : blocks) {
            if (std::popcount(b) == 1) return;
          }
          std::vector<detail::TensorEntry> parts;
          double product = 1.0;
          for (auto b : blocks) {
            parts.push_back(b == full ? detail::TensorEntry{src.values[i],
                                                            src.std_errors[i] * src.std_errors[i],
                                                            src.valid[i] != 0}
                                      : lookup.at(detail::times_of(times, b)));
            product *= parts.back().value;
          }
          value += product;
          for (std::size_t j = 0; j < parts.size(); ++j) {
            double others = 1.0;
            for (std::size_t l = 0; l < parts.size(); ++l) {
              if (l != j) others *= parts[l].value;
            }
            variance += others * others * parts[j].variance;
            valid = valid && parts[j].valid;
          }
        });
      }
      out.values[i] = value;
      out.std_errors[i] = std::sqrt(variance);
      out.valid[i] = valid ? 1 : 0;
    }
    result.push_back(std::move(out));
  }
  return result;
}

}  // namespace rimnoise
