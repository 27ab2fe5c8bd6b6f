#pragma once

// CSV and SVG output. Numbers are written in shortest round-trip form so
// identical doubles always give identical bytes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rimnoise/correlation_tensor.hpp"
#include "rimnoise/errors.hpp"
#include "rimnoise/noise.hpp"
#include "rimnoise/rim.hpp"
#include "rimnoise/spectra.hpp"

namespace rimnoise {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw RuntimeError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw RuntimeError("write failed for " + path.string());
}

inline std::string trajectory_csv(const NoiseTrajectory& noise) {
  std::string s = "t_us,beta_MHz\n";
  for (std::size_t k = 0; k < noise.size(); ++k) {
    s += format_number(noise.grid.time(k)) + "," + format_number(noise.values[k]) + "\n";
  }
  return s;
}

inline std::string outcome_csv(const OutcomeRecord& record) {
  std::string s = "cycle,value\n";
  for (std::size_t k = 0; k < record.size(); ++k) {
    s += std::to_string(k) + "," + format_number(record.values[k]) + "\n";
  }
  return s;
}

/// `lag1_us,...,value,std_err,valid`; an optional oracle column is appended.
inline std::string tensor_csv(const CorrelationTensor& t,
                              const std::function<double(std::span<const int>)>& oracle = {}) {
  std::string s;
  const std::size_t dims = t.lags.dims();
  for (std::size_t a = 0; a < dims; ++a) s += "lag" + std::to_string(a + 1) + "_us,";
  s += "value,std_err,valid";
  if (oracle) s += ",oracle";
  s += "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto tuple = t.lags[i];
    for (int lag : tuple) s += format_number(lag * t.step) + ",";
    s += format_number(t.values[i]) + "," + format_number(t.std_errors[i]) + "," +
         (t.valid[i] ? "1" : "0");
    if (oracle) s += "," + format_number(oracle(tuple));
    s += "\n";
  }
  return s;
}

/// Parses a tensor CSV written by `tensor_csv`. The sampling interval is the
/// smallest positive lag unless given; every lag must be a multiple of it.
inline CorrelationTensor read_tensor_csv(const std::filesystem::path& path, TensorKind kind,
                                         double step = 0.0) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tensor file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty tensor file " + path.string());
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::size_t dims = 0;
  while (dims < header.size() && header[dims] == "lag" + std::to_string(dims + 1) + "_us") ++dims;
  if (header.size() < dims + 3 || header[dims] != "value" || header[dims + 1] != "std_err" ||
      header[dims + 2] != "valid") {
    throw ConfigError("tensor file header must be lag1_us,...,value,std_err,valid");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("bad number '" + cell + "' in " + path.string());
      }
    }
    if (row.size() < dims + 3) throw ConfigError("short row in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("tensor file has no rows");
  if (step <= 0.0) {
    for (const auto& r : rows) {
      for (std::size_t a = 0; a < dims; ++a) {
        if (r[a] > 0.0 && (step <= 0.0 || r[a] < step)) step = r[a];
      }
    }
    if (step <= 0.0) step = 1.0;
  }
  std::vector<int> flat;
  for (const auto& r : rows) {
    for (std::size_t a = 0; a < dims; ++a) {
      const double k = r[a] / step;
      if (std::abs(k - std::round(k)) > 1e-6) throw ConfigError("lags are not on a uniform grid");
      flat.push_back(static_cast<int>(std::lround(k)));
    }
  }
  CorrelationTensor t(static_cast<int>(dims) + 1, step, LagSet(dims, std::move(flat)), kind);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t.values[i] = rows[i][dims];
    t.std_errors[i] = rows[i][dims + 1];
    t.valid[i] = rows[i][dims + 2] != 0.0 ? 1 : 0;
  }
  return t;
}

/// `omega1_radus,...,value[,std_err][,oracle]`.
inline std::string spectrum_csv(const Polyspectrum& sp,
                                const std::function<double(std::span<const double>)>& oracle = {}) {
  std::string s;
  const std::size_t dims = sp.axes.size();
  for (std::size_t a = 0; a < dims; ++a) s += "omega" + std::to_string(a + 1) + "_radus,";
  s += "value";
  const bool errors = !sp.std_errors.empty();
  if (errors) s += ",std_err";
  if (oracle) s += ",oracle";
  s += "\n";
  std::vector<std::size_t> idx(dims, 0);
  std::vector<double> w(dims);
  for (std::size_t p = 0; p < sp.size(); ++p) {
    std::size_t rem = p;
    for (std::size_t a = dims; a-- > 0;) {
      idx[a] = rem % sp.axes[a].size();
      rem /= sp.axes[a].size();
      w[a] = sp.axes[a][idx[a]];
    }
    for (double v : w) s += format_number(v) + ",";
    s += format_number(sp.values[p]);
    if (errors) s += "," + format_number(sp.std_errors[p]);
    if (oracle) s += "," + format_number(oracle(w));
    s += "\n";
  }
  return s;
}

// --- SVG -------------------------------------------------------------------------

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional half-widths
  std::string color = "#1f77b4";
  bool dashed = false;
};

inline std::string svg_lines(const std::string& title, const std::string& xlabel,
                             const std::vector<SvgSeries>& series) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = s.err.empty() ? 0.0 : s.err[i];
      if (!std::isfinite(s.y[i]) || !std::isfinite(e)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i] - e);
      y1 = std::max(y1, s.y[i] + e);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title << "</text>\n";
  o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\""
    << kH - kT - kB << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  o << "<text x=\"" << kL - 5 << "\" y=\"" << py(y1) + 4 << "\" text-anchor=\"end\">"
    << format_number(y1) << "</text>\n";
  o << "<text x=\"" << kL - 5 << "\" y=\"" << py(y0) + 4 << "\" text-anchor=\"end\">"
    << format_number(y0) << "</text>\n";
  o << "<text x=\"" << kL << "\" y=\"" << kH - kB + 16 << "\">" << format_number(x0) << "</text>\n";
  o << "<text x=\"" << kW - kR << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"end\">"
    << format_number(x1) << "</text>\n";
  double legend_y = kT + 16;
  for (const auto& s : series) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\""
      << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      o << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.err.size(); ++i) {
      if (!std::isfinite(s.err[i]) || !std::isfinite(s.y[i])) continue;
      o << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\""
        << py(s.y[i] - s.err[i]) << "\" y2=\"" << py(s.y[i] + s.err[i]) << "\" stroke=\""
        << s.color << "\"/>\n";
    }
    o << "<text x=\"" << kW - kR - 10 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\""
      << s.color << "\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  o << "</svg>\n";
  return o.str();
}

/// Row-major `values` of shape rows x cols drawn on a blue-white-red scale.
inline std::string svg_heatmap(const std::string& title, std::size_t rows, std::size_t cols,
                               const std::vector<double>& values) {
  detail::require(values.size() == rows * cols, "heatmap shape mismatch");
  constexpr double kSize = 400, kPad = 40;
  double vmax = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) vmax = std::max(vmax, std::abs(v));
  }
  if (vmax == 0.0) vmax = 1.0;
  const double cw = kSize / static_cast<double>(cols), ch = kSize / static_cast<double>(rows);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kPad << "\" height=\""
    << kSize + 2 * kPad << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<text x=\"" << kPad << "\" y=\"24\">" << title << " (|max| = " << format_number(vmax)
    << ")</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      const double t = std::isfinite(v) ? std::clamp(v / vmax, -1.0, 1.0) : 0.0;
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
      const int red = t >= 0 ? 255 : fade, blue = t >= 0 ? fade : 255;
      // row 0 at the bottom
      o << "<rect x=\"" << kPad + c * cw << "\" y=\"" << kPad + (rows - 1 - r) * ch
        << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\"rgb(" << red << "," << fade
        << "," << blue << ")\"/>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace rimnoise
