#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

namespace rimnoise {

/// Calls `visit(blocks)` for every set partition of the elements of `mask`
/// (bit i set = element i present). Blocks are bitmasks.
template <class Visit>
void for_each_partition(std::uint32_t mask, Visit&& visit) {
  std::vector<std::uint32_t> blocks;
  std::function<void(std::uint32_t)> recurse = [&](std::uint32_t rest) {
    if (rest == 0) {
      visit(static_cast<const std::vector<std::uint32_t>&>(blocks));
      return;
    }
    const std::uint32_t first = rest & (~rest + 1);
    const std::uint32_t others = rest & ~first;
    // The block holding the lowest element: that element plus any subset of the rest.
    for (std::uint32_t sub = others;; sub = (sub - 1) & others) {
      blocks.push_back(first | sub);
      recurse(others & ~sub);
      blocks.pop_back();
      if (sub == 0) break;
    }
  };
  recurse(mask);
}

/// Joint cumulant of a zero-mean family from its moments via the Moebius
/// inversion of the partition formula:
///   k(S) = sum_pi (-1)^(|pi|-1) (|pi|-1)! prod_{B in pi} m(B).
/// Partitions with a singleton block are dropped (first moments vanish).
template <class MomentFn>
double cumulant_from_moments(std::uint32_t mask, MomentFn&& moment) {
  double total = 0.0;
  for_each_partition(mask, [&](const std::vector<std::uint32_t>& blocks) {
    double term = 1.0;
    for (auto b : blocks) {
      if (std::popcount(b) == 1) return;
      term *= moment(b);
    }
    const auto k = blocks.size();
    double weight = 1.0;
    for (std::size_t i = 2; i < k; ++i) weight *= static_cast<double>(i);
    total += ((k % 2 == 1) ? weight : -weight) * term;
  });
  return total;
}

}  // namespace rimnoise
