#pragma once

// Polyspectra from cumulant tensors.
//
// The measured tensor lives on non-negative lag tuples; the full lattice
// [-L, L]^(n-1) is reconstructed from stationarity and the permutation
// symmetry of the cumulant: times {0, d_1, ..., d_m} are shifted so the
// earliest one sits at 0 and the remaining offsets form the stored tuple.
// Lattice points whose time spread exceeds L lie outside the measured
// support and contribute zero.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rimnoise/correlation_tensor.hpp"
#include "rimnoise/errors.hpp"
#include "rimnoise/rim.hpp"

namespace rimnoise {

/// Per-axis frequency grid 0, d_omega, ..., N d_omega with d_omega = pi / (N dt).
struct FrequencyGrid {
  std::size_t dims = 1;
  double omega_max = std::numbers::pi;  // rad/us
  double resolution = std::numbers::pi;
  std::size_t points = 2;               // per axis

  [[nodiscard]] std::vector<double> axis() const {
    std::vector<double> w(points);
    for (std::size_t j = 0; j < points; ++j) w[j] = static_cast<double>(j) * resolution;
    return w;
  }

  static FrequencyGrid for_sampling(double step, std::size_t n_cycles, std::size_t dims = 1) {
    detail::require(step > 0.0 && n_cycles >= 1, "invalid sampling parameters");
    const double omega_max = std::numbers::pi / step;
    return FrequencyGrid{dims, omega_max, omega_max / static_cast<double>(n_cycles), n_cycles + 1};
  }
};

inline FrequencyGrid frequency_grid(const RimConfig& cfg, std::size_t dims = 1) {
  cfg.validate();
  return FrequencyGrid::for_sampling(cfg.effective_step(), cfg.n_cycles, dims);
}

enum class Window { none, hann };
/// riemann: dt^m sum_d e^{-i w.d} C(d). piecewise_linear: exact transform of the
/// multilinear interpolant, i.e. the riemann sum times prod_a sinc^2(w_a dt / 2),
/// which removes most of the aliasing of cusped (exponential) cumulants.
enum class Quadrature { riemann, piecewise_linear };

inline std::string_view to_string(Window w) { return w == Window::none ? "none" : "hann"; }
inline std::string_view to_string(Quadrature q) {
  return q == Quadrature::riemann ? "riemann" : "piecewise_linear";
}

struct SpectrumOptions {
  Window window = Window::none;
  Quadrature quadrature = Quadrature::riemann;
  std::optional<FrequencyGrid> grid;          // default: N = max_lag + 1 points per axis
  std::vector<std::optional<double>> pinned;  // per axis: evaluate only at this frequency
  bool propagate_errors = true;
  double error_budget = 2e8;  // max (frequency points x lattice points) for error propagation
};

struct Polyspectrum {
  int order = 1;  // n - 1
  FrequencyGrid grid;
  std::vector<std::vector<double>> axes;  // frequencies actually evaluated per axis
  std::vector<double> values;             // real part, row-major over axes
  std::vector<double> std_errors;         // empty when not propagated
  double imag_ratio = 0.0;                // max |Im| / max |Re|

  [[nodiscard]] std::size_t size() const { return values.size(); }
};

namespace detail {

// Index of the stored tuple for lattice point d, or -1 outside the support.
// The box holds every ordering of a tuple, so the remaining offsets can be
// taken in any order.
inline long lattice_to_box(std::span<const int> d, int max_lag, std::vector<int>& scratch) {
  const std::size_t m = d.size();
  int lo = 0, hi = 0;
  for (int v : d) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo > max_lag) return -1;
  // earliest time: the origin if lo == 0, else the first d_j equal to lo
  std::size_t earliest = m;  // m encodes the origin
  if (lo < 0) {
    for (std::size_t j = 0; j < m; ++j) {
      if (d[j] == lo) {
        earliest = j;
        break;
      }
    }
  }
  scratch.clear();
  if (earliest != m) scratch.push_back(-lo);  // the origin, shifted
  for (std::size_t j = 0; j < m; ++j) {
    if (j == earliest) continue;
    scratch.push_back(d[j] - lo);
  }
  long index = 0;
  for (std::size_t j = 0; j < m; ++j) index = index * (max_lag + 1) + scratch[j];
  return index;
}

inline double hann(int d, int max_lag) {
  return 0.5 * (1.0 + std::cos(std::numbers::pi * d / (max_lag + 1.0)));
}

inline double sinc2(double x) {
  if (std::abs(x) < 1e-8) return 1.0;
  const double s = std::sin(x) / x;
  return s * s;
}

}  // namespace detail

/// Polyspectrum S^(n-1)(w) of a cumulant tensor given on a full box [0, L]^(n-1).
inline Polyspectrum polyspectrum(const CorrelationTensor& cumulant, const SpectrumOptions& opt = {}) {
  const int m = cumulant.order - 1;
  detail::require(m >= 1, "polyspectra need order >= 2");
  detail::require(m <= 6, "polyspectrum order too large");
  if (!cumulant.fully_valid()) {
    throw ConfigError("cumulant tensor has masked points; repair it before transforming");
  }
  const int L = cumulant.lags.max_lag();
  const auto dims = static_cast<std::size_t>(m);
  if (!(cumulant.lags == LagSet::box(dims, L))) {
    throw ConfigError("polyspectrum needs the cumulant on a full uniform lag box");
  }
  const double dt = cumulant.step;
  const FrequencyGrid grid =
      opt.grid.value_or(FrequencyGrid::for_sampling(dt, static_cast<std::size_t>(L) + 1, dims));
  detail::require(opt.pinned.empty() || opt.pinned.size() == dims,
                  "pinned frequencies must list every axis");

  Polyspectrum out;
  out.order = m;
  out.grid = grid;
  out.grid.dims = dims;
  const auto full_axis = grid.axis();
  for (std::size_t a = 0; a < dims; ++a) {
    if (!opt.pinned.empty() && opt.pinned[a]) {
      out.axes.push_back({*opt.pinned[a]});
    } else {
      out.axes.push_back(full_axis);
    }
  }

  // Lattice values and their source index in the box.
  const int side = 2 * L + 1;
  std::size_t lattice_size = 1;
  for (int a = 0; a < m; ++a) lattice_size *= static_cast<std::size_t>(side);
  std::vector<std::complex<double>> field(lattice_size);
  std::vector<long> source(lattice_size);
  std::vector<double> weight(lattice_size);
  {
    std::vector<int> d(dims), scratch;
    for (std::size_t p = 0; p < lattice_size; ++p) {
      std::size_t rem = p;
      for (std::size_t a = dims; a-- > 0;) {
        d[a] = static_cast<int>(rem % side) - L;
        rem /= side;
      }
      const long idx = detail::lattice_to_box(d, L, scratch);
      double w = 1.0;
      if (opt.window == Window::hann) {
        for (int v : d) w *= detail::hann(v, L);
      }
      source[p] = idx;
      weight[p] = w;
      field[p] = idx < 0 ? 0.0 : w * cumulant.values[static_cast<std::size_t>(idx)];
    }
  }

  // Contract one axis at a time, last axis first.
  std::vector<std::size_t> shape(dims, static_cast<std::size_t>(side));
  for (std::size_t a = dims; a-- > 0;) {
    const auto& freqs = out.axes[a];
    std::size_t outer = 1, inner = 1;
    for (std::size_t b = 0; b < a; ++b) outer *= shape[b];
    for (std::size_t b = a + 1; b < dims; ++b) inner *= shape[b];
    const std::size_t len = shape[a];
    std::vector<std::complex<double>> next(outer * freqs.size() * inner);
    for (std::size_t f = 0; f < freqs.size(); ++f) {
      std::vector<std::complex<double>> phase(len);
      for (std::size_t k = 0; k < len; ++k) {
        const double lag = (static_cast<double>(k) - L) * dt;
        phase[k] = std::polar(1.0, -freqs[f] * lag);
      }
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
          std::complex<double> acc = 0.0;
          for (std::size_t k = 0; k < len; ++k) acc += phase[k] * field[(o * len + k) * inner + i];
          next[(o * freqs.size() + f) * inner + i] = acc;
        }
      }
    }
    field = std::move(next);
    shape[a] = freqs.size();
  }

  auto quadrature_factor = [&](std::span<const std::size_t> idx) {
    double q = std::pow(dt, m);
    if (opt.quadrature == Quadrature::piecewise_linear) {
      for (std::size_t a = 0; a < dims; ++a) q *= detail::sinc2(0.5 * out.axes[a][idx[a]] * dt);
    }
    return q;
  };

  const std::size_t n_out = field.size();
  out.values.resize(n_out);
  double max_re = 0.0, max_im = 0.0;
  std::vector<std::size_t> idx(dims);
  auto unravel = [&](std::size_t p) {
    for (std::size_t a = dims; a-- > 0;) {
      idx[a] = p % shape[a];
      p /= shape[a];
    }
  };
  for (std::size_t p = 0; p < n_out; ++p) {
    unravel(p);
    const double q = quadrature_factor(idx);
    out.values[p] = q * field[p].real();
    max_re = std::max(max_re, std::abs(out.values[p]));
    max_im = std::max(max_im, std::abs(q * field[p].imag()));
  }
  out.imag_ratio = max_re > 0.0 ? max_im / max_re : max_im;

  // Linear error propagation with independent tensor entries.
  if (opt.propagate_errors &&
      static_cast<double>(n_out) * static_cast<double>(lattice_size) <= opt.error_budget) {
    out.std_errors.resize(n_out);
    std::vector<double> coef(cumulant.size());
    std::vector<int> d(dims);
    for (std::size_t p = 0; p < n_out; ++p) {
      unravel(p);
      std::fill(coef.begin(), coef.end(), 0.0);
      for (std::size_t l = 0; l < lattice_size; ++l) {
        if (source[l] < 0) continue;
        std::size_t rem = l;
        double arg = 0.0;
        for (std::size_t a = dims; a-- > 0;) {
          const int lag = static_cast<int>(rem % side) - L;
          rem /= side;
          arg += out.axes[a][idx[a]] * lag * dt;
        }
        coef[static_cast<std::size_t>(source[l])] += weight[l] * std::cos(arg);
      }
      const double q = quadrature_factor(idx);
      double var = 0.0;
      for (std::size_t j = 0; j < coef.size(); ++j) {
        const double c = q * coef[j] * cumulant.std_errors[j];
        var += c * c;
      }
      out.std_errors[p] = std::sqrt(var);
    }
  }
  return out;
}

}  // namespace rimnoise
