#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rimnoise/errors.hpp"

namespace rimnoise {

/// Ordered list of non-negative lag tuples, each of length `dims`, in units of
/// the sampling interval. Lag j of a tuple is t_{j+1} - t_0.
class LagSet {
 public:
  LagSet() = default;
  LagSet(std::size_t dims, std::vector<int> flat) : dims_(dims), flat_(std::move(flat)) {
    detail::require(dims_ == 0 ? flat_.empty() : flat_.size() % dims_ == 0,
                    "lag list length is not a multiple of the tuple size");
    for (int lag : flat_) detail::require(lag >= 0, "lags must be non-negative");
    count_ = dims_ == 0 ? 1 : flat_.size() / dims_;
  }

  /// All tuples in [0, max_lag]^dims whose first entries equal `fixed`, row-major.
  static LagSet box(std::size_t dims, int max_lag, std::span<const int> fixed = {}) {
    detail::require(max_lag >= 0, "max_lag must be non-negative");
    detail::require(fixed.size() <= dims, "more fixed lags than tuple entries");
    const std::size_t free = dims - fixed.size();
    std::size_t count = 1;
    for (std::size_t i = 0; i < free; ++i) count *= static_cast<std::size_t>(max_lag + 1);
    std::vector<int> flat;
    flat.reserve(count * dims);
    std::vector<int> cursor(free, 0);
    for (std::size_t n = 0; n < count; ++n) {
      flat.insert(flat.end(), fixed.begin(), fixed.end());
      flat.insert(flat.end(), cursor.begin(), cursor.end());
      for (std::size_t a = free; a-- > 0;) {
        if (++cursor[a] <= max_lag) break;
        cursor[a] = 0;
      }
    }
    return LagSet(dims, std::move(flat));
  }

  [[nodiscard]] std::size_t dims() const { return dims_; }
  [[nodiscard]] std::size_t size() const { return count_; }
  [[nodiscard]] std::span<const int> operator[](std::size_t i) const {
    return std::span<const int>(flat_).subspan(i * dims_, dims_);
  }
  [[nodiscard]] int max_lag() const {
    return flat_.empty() ? 0 : *std::max_element(flat_.begin(), flat_.end());
  }
  [[nodiscard]] const std::vector<int>& flat() const { return flat_; }

  friend bool operator==(const LagSet&, const LagSet&) = default;

 private:
  std::size_t dims_ = 0;
  std::vector<int> flat_;
  std::size_t count_ = 1;
};

/// True when (0, lags...) contains the same cycle index twice.
inline bool has_repeated_index(std::span<const int> lags) {
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (lags[i] == 0) return true;
    for (std::size_t j = i + 1; j < lags.size(); ++j) {
      if (lags[i] == lags[j]) return true;
    }
  }
  return false;
}

enum class TensorKind { moment, cumulant };

inline std::string_view to_string(TensorKind kind) {
  return kind == TensorKind::moment ? "moment" : "cumulant";
}

/// Order-n correlation or cumulant estimates on a lag set (MHz^n).
struct CorrelationTensor {
  int order = 2;
  double step = 1.0;  // sampling interval, us
  LagSet lags;
  std::vector<double> values;
  std::vector<double> std_errors;
  std::vector<char> valid;
  TensorKind kind = TensorKind::moment;

  CorrelationTensor() = default;
  CorrelationTensor(int order_, double step_, LagSet lags_, TensorKind kind_ = TensorKind::moment)
      : order(order_),
        step(step_),
        lags(std::move(lags_)),
        values(lags.size(), 0.0),
        std_errors(lags.size(), 0.0),
        valid(lags.size(), 1),
        kind(kind_) {
    detail::require(order >= 1, "correlation order must be at least 1");
    detail::require(lags.dims() == static_cast<std::size_t>(order - 1),
                    "lag tuples must have order - 1 entries");
    build_index();
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] bool fully_valid() const {
    return std::all_of(valid.begin(), valid.end(), [](char v) { return v != 0; });
  }
  [[nodiscard]] std::size_t invalid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 0));
  }

  /// Index of a lag tuple, if present.
  [[nodiscard]] std::optional<std::size_t> find(std::span<const int> tuple) const {
    if (index_.empty() && size() > 0) build_index();
    auto it = index_.find(std::vector<int>(tuple.begin(), tuple.end()));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Same lag set, order and step.
  [[nodiscard]] bool same_grid(const CorrelationTensor& other) const {
    return order == other.order && lags == other.lags &&
           std::abs(step - other.step) <= 1e-12 * std::max(1.0, step);
  }

 private:
  void build_index() const {
    for (std::size_t i = 0; i < lags.size(); ++i) {
      auto t = lags[i];
      index_.emplace(std::vector<int>(t.begin(), t.end()), i);
    }
  }
  mutable std::map<std::vector<int>, std::size_t> index_;
};

}  // namespace rimnoise
