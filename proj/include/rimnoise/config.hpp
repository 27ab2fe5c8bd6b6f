#pragma once

// Experiment configuration and its JSON form.
//
//   {
//     "noise": {"process": "ou", "gamma": 1, "big_gamma": 1}
//            | {"process": "rtn", "lambda": 1, "rate": 0.1, "asymmetry": 0.5}
//            | {"process": "ensemble", "fluctuators": [{"lambda": .., "rate": .., "asymmetry": ..}, ...]},
//     "rim": {"tau": 0.05, "delta_t": 0.1, "n_cycles": 256, "t_dead": 0, "substeps": 1,
//             "dphi": -1.5707963 | [per-cycle values]},
//     "measurement": {"kind": "ideal" | "weak_optical" | "assignment_error",
//                     "g0": .., "g1": .., "p0": .., "p1": .., "t2": ..},
//     "estimation": {"mode": "conditional", "origin": "averaged", "repair": "interpolate",
//                    "tensors": [{"order": 2, "max_lag": 128, "fixed": []}, ...],
//                    "spectra": true, "window": "none", "quadrature": "riemann",
//                    "pinned_zero": 0},
//     "run": {"trajectories": 100000 | {plan object}, "seed": 1, "workers": 1},
//     "output": {"dir": "out", "svg": false, "dump": 0}
//   }
//
// Unknown keys are rejected. A rtn fluctuator may also be given by
// "w_plus"/"w_minus" instead of "rate"/"asymmetry"; the writer uses the rates
// so that a written config reloads bit for bit.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rimnoise/errors.hpp"
#include "rimnoise/estimation.hpp"
#include "rimnoise/noise.hpp"
#include "rimnoise/planning.hpp"
#include "rimnoise/rim.hpp"
#include "rimnoise/spectra.hpp"

namespace rimnoise {

using Json = nlohmann::ordered_json;

struct NoiseConfig {
  ProcessKind kind = ProcessKind::ou;
  OuParams ou;
  TlfParams rtn;
  TlfEnsembleParams ensemble;

  [[nodiscard]] double variance() const {
    switch (kind) {
      case ProcessKind::ou: return ou.variance();
      case ProcessKind::rtn: return rtn.variance();
      case ProcessKind::ensemble: return ensemble.variance();
    }
    return 0.0;
  }

  void validate() const {
    switch (kind) {
      case ProcessKind::ou: ou.validate(); break;
      case ProcessKind::rtn: rtn.validate(); break;
      case ProcessKind::ensemble: ensemble.validate(); break;
    }
  }
};

/// One requested tensor: the box [0, max_lag]^(order-1), optionally with the
/// leading lags pinned (a slice).
struct TensorRequest {
  int order = 2;
  int max_lag = 0;
  std::vector<int> fixed;

  [[nodiscard]] LagSet lag_set() const {
    return LagSet::box(static_cast<std::size_t>(order - 1), max_lag, fixed);
  }
  [[nodiscard]] bool is_full_box() const { return fixed.empty(); }
  [[nodiscard]] int reach() const {
    int r = max_lag;
    for (int f : fixed) r = std::max(r, f);
    return r;
  }
};

struct EstimationConfig {
  ReadoutMode mode = ReadoutMode::conditional;
  OriginMode origin = OriginMode::averaged;
  RepairMethod repair = RepairMethod::interpolate;
  std::vector<TensorRequest> tensors;
  bool spectra = true;
  Window window = Window::none;
  Quadrature quadrature = Quadrature::riemann;
  int pinned_zero = 0;  // trailing frequency axes evaluated only at omega = 0
};

struct RunConfig {
  std::uint64_t trajectories = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::optional<SamplePlan> plan;  // when trajectories came from a plan
};

struct OutputConfig {
  std::string dir = "rimspec-out";
  bool svg = false;
  std::size_t dump = 0;  // trajectories written as CSV
};

struct ExperimentConfig {
  NoiseConfig noise;
  RimConfig rim;
  MeasurementModel measurement;
  EstimationConfig estimation;
  RunConfig run;
  OutputConfig output;

  /// Short-evolution proxy sqrt(<beta^2>) * tau.
  [[nodiscard]] double short_evolution_proxy() const {
    return std::sqrt(noise.variance()) * rim.tau;
  }

  [[nodiscard]] std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    if (short_evolution_proxy() > 0.3) {
      std::ostringstream msg;
      msg << "sqrt(variance) * tau = " << short_evolution_proxy()
          << " exceeds 0.3; the short-evolution approximation is poor";
      out.push_back(msg.str());
    }
    return out;
  }

  void validate() const {
    noise.validate();
    rim.validate();
    measurement.validate();
    detail::require(run.trajectories >= 1, "run.trajectories must be at least 1");
    detail::require(run.workers >= 1, "run.workers must be at least 1");
    detail::require(estimation.pinned_zero >= 0, "pinned_zero must be non-negative");
    for (const auto& t : estimation.tensors) {
      detail::require(t.order >= 1 && t.order <= 8, "tensor order must lie in 1..8");
      detail::require(t.max_lag >= 0, "max_lag must be non-negative");
      detail::require(t.fixed.size() < static_cast<std::size_t>(std::max(1, t.order - 1)) ||
                          (t.order == 1 && t.fixed.empty()),
                      "a slice must leave at least one lag free");
      for (int f : t.fixed) detail::require(f >= 0, "fixed lags must be non-negative");
      if (static_cast<std::size_t>(t.reach()) >= rim.n_cycles) {
        throw ConfigError("tensor lags reach beyond the trajectory length n_cycles");
      }
    }
  }
};

// --- enum names ----------------------------------------------------------------

namespace detail {

template <class E, std::size_t N>
E parse_enum(const std::string& text, const std::pair<const char*, E> (&names)[N],
             const char* what) {
  for (const auto& [name, value] : names) {
    if (text == name) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + text + "'");
}

inline constexpr std::pair<const char*, ProcessKind> kProcessNames[] = {
    {"ou", ProcessKind::ou}, {"rtn", ProcessKind::rtn}, {"ensemble", ProcessKind::ensemble}};
inline constexpr std::pair<const char*, MeasurementKind> kMeasurementNames[] = {
    {"ideal", MeasurementKind::ideal},
    {"weak_optical", MeasurementKind::weak_optical},
    {"assignment_error", MeasurementKind::assignment_error}};
inline constexpr std::pair<const char*, ReadoutMode> kModeNames[] = {
    {"bernoulli", ReadoutMode::bernoulli}, {"conditional", ReadoutMode::conditional}};
inline constexpr std::pair<const char*, OriginMode> kOriginNames[] = {
    {"fixed", OriginMode::fixed}, {"averaged", OriginMode::averaged}};
inline constexpr std::pair<const char*, RepairMethod> kRepairNames[] = {
    {"none", RepairMethod::none},
    {"interpolate", RepairMethod::interpolate},
    {"quadratic_rim", RepairMethod::quadratic_rim}};
inline constexpr std::pair<const char*, Window> kWindowNames[] = {{"none", Window::none},
                                                                  {"hann", Window::hann}};
inline constexpr std::pair<const char*, Quadrature> kQuadratureNames[] = {
    {"riemann", Quadrature::riemann}, {"piecewise_linear", Quadrature::piecewise_linear}};

// Reads keys out of one JSON object and complains about leftovers.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j.is_object()) throw ConfigError("'" + name_ + "' must be a JSON object");
  }

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  T get(const char* key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(name_ + "." + key + ": " + e.what());
    }
  }

  template <class T>
  T required(const char* key) {
    if (!j_.contains(key)) throw ConfigError("missing " + name_ + "." + key);
    return get<T>(key, T{});
  }

  const Json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + name_ + "." + key);
    }
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

inline TlfParams parse_fluctuator(const Json& j, const std::string& where) {
  Section s(j, where);
  const double lambda = s.required<double>("lambda");
  TlfParams p;
  if (s.has("rate") || s.has("asymmetry")) {
    p = TlfParams::from_rate(lambda, s.required<double>("rate"), s.get<double>("asymmetry", 0.0));
  } else {
    p = TlfParams{lambda, s.required<double>("w_plus"), s.required<double>("w_minus")};
  }
  s.finish();
  return p;
}

inline Json fluctuator_json(const TlfParams& p) {
  return Json{{"lambda", p.lambda}, {"w_plus", p.w_plus}, {"w_minus", p.w_minus}};
}

}  // namespace detail

// --- plans -----------------------------------------------------------------------

inline Json to_json(const SamplePlan& p) {
  return Json{{"order", p.order},
              {"delta", p.delta},
              {"epsilon", p.epsilon},
              {"tau", p.tau},
              {"trajectories", p.trajectories}};
}

/// Recomputes the bound and rejects a plan whose trajectory count is below it.
inline SamplePlan plan_from_json(const Json& j) {
  detail::Section s(j, "plan");
  const auto plan = hoeffding_sample_size(s.required<int>("order"), s.required<double>("delta"),
                                          s.required<double>("epsilon"), s.required<double>("tau"));
  const auto stated = s.get<std::uint64_t>("trajectories", plan.trajectories);
  s.finish();
  if (stated < plan.trajectories) throw ConfigError("plan trajectories fall short of the bound");
  SamplePlan out = plan;
  out.trajectories = stated;
  return out;
}

// --- experiment ------------------------------------------------------------------

inline ExperimentConfig config_from_json(const Json& root) {
  ExperimentConfig cfg;
  detail::Section top(root, "config");

  {
    detail::Section s(top.raw("noise"), "noise");
    cfg.noise.kind = detail::parse_enum(s.required<std::string>("process"), detail::kProcessNames,
                                        "noise process");
    switch (cfg.noise.kind) {
      case ProcessKind::ou:
        cfg.noise.ou = OuParams{s.required<double>("gamma"), s.required<double>("big_gamma")};
        break;
      case ProcessKind::rtn: {
        Json copy = Json::object();
        for (const char* key : {"lambda", "rate", "asymmetry", "w_plus", "w_minus"}) {
          if (s.has(key)) copy[key] = s.raw(key);
        }
        cfg.noise.rtn = detail::parse_fluctuator(copy, "noise");
        break;
      }
      case ProcessKind::ensemble: {
        const Json& list = s.raw("fluctuators");
        if (!list.is_array()) throw ConfigError("noise.fluctuators must be an array");
        for (std::size_t i = 0; i < list.size(); ++i) {
          cfg.noise.ensemble.fluctuators.push_back(
              detail::parse_fluctuator(list[i], "noise.fluctuators[" + std::to_string(i) + "]"));
        }
        break;
      }
    }
    s.finish();
  }

  if (top.has("rim")) {
    detail::Section s(top.raw("rim"), "rim");
    cfg.rim.tau = s.get("tau", cfg.rim.tau);
    cfg.rim.delta_t = s.get("delta_t", cfg.rim.delta_t);
    cfg.rim.n_cycles = s.get<std::size_t>("n_cycles", cfg.rim.n_cycles);
    cfg.rim.t_dead = s.get("t_dead", cfg.rim.t_dead);
    cfg.rim.substeps = s.get("substeps", cfg.rim.substeps);
    if (s.has("dphi")) {
      const Json& d = s.raw("dphi");
      if (d.is_number()) {
        cfg.rim.dphi_schedule = {d.get<double>()};
      } else if (d.is_array()) {
        cfg.rim.dphi_schedule = d.get<std::vector<double>>();
      } else {
        throw ConfigError("rim.dphi must be a number or an array");
      }
    }
    s.finish();
  }

  if (top.has("measurement")) {
    detail::Section s(top.raw("measurement"), "measurement");
    auto& m = cfg.measurement;
    m.kind = detail::parse_enum(s.get<std::string>("kind", "ideal"), detail::kMeasurementNames,
                                "measurement kind");
    m.g0 = s.get("g0", 0.0);
    m.g1 = s.get("g1", 0.0);
    m.p0 = s.get("p0", 0.0);
    m.p1 = s.get("p1", 0.0);
    if (s.has("t2")) {
      const Json& t2 = s.raw("t2");
      m.t2 = t2.is_null() ? std::numeric_limits<double>::infinity() : t2.get<double>();
    }
    s.finish();
  }

  if (top.has("estimation")) {
    detail::Section s(top.raw("estimation"), "estimation");
    auto& e = cfg.estimation;
    e.mode = detail::parse_enum(s.get<std::string>("mode", "conditional"), detail::kModeNames,
                                "readout mode");
    e.origin = detail::parse_enum(s.get<std::string>("origin", "averaged"), detail::kOriginNames,
                                  "origin mode");
    e.repair = detail::parse_enum(s.get<std::string>("repair", "interpolate"),
                                  detail::kRepairNames, "repair method");
    e.spectra = s.get("spectra", e.spectra);
    e.pinned_zero = s.get("pinned_zero", e.pinned_zero);
    e.window = detail::parse_enum(s.get<std::string>("window", "none"), detail::kWindowNames,
                                  "window");
    e.quadrature = detail::parse_enum(s.get<std::string>("quadrature", "riemann"),
                                      detail::kQuadratureNames, "quadrature");
    if (s.has("tensors")) {
      const Json& list = s.raw("tensors");
      if (!list.is_array()) throw ConfigError("estimation.tensors must be an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        detail::Section t(list[i], "estimation.tensors[" + std::to_string(i) + "]");
        TensorRequest req;
        req.order = t.required<int>("order");
        req.max_lag = t.get("max_lag", 0);
        req.fixed = t.get("fixed", std::vector<int>{});
        t.finish();
        e.tensors.push_back(std::move(req));
      }
    }
    s.finish();
  }

  if (top.has("run")) {
    detail::Section s(top.raw("run"), "run");
    if (s.has("trajectories")) {
      const Json& n = s.raw("trajectories");
      if (n.is_object()) {
        cfg.run.plan = plan_from_json(n);
        cfg.run.trajectories = cfg.run.plan->trajectories;
      } else if (n.is_number_unsigned()) {
        cfg.run.trajectories = n.get<std::uint64_t>();
      } else {
        throw ConfigError("run.trajectories must be a positive integer or a plan object");
      }
    }
    cfg.run.seed = s.get("seed", cfg.run.seed);
    cfg.run.workers = s.get("workers", cfg.run.workers);
    s.finish();
  }

  if (top.has("output")) {
    detail::Section s(top.raw("output"), "output");
    cfg.output.dir = s.get("dir", cfg.output.dir);
    cfg.output.svg = s.get("svg", cfg.output.svg);
    cfg.output.dump = s.get<std::size_t>("dump", cfg.output.dump);
    s.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

inline Json to_json(const ExperimentConfig& cfg) {
  Json noise{{"process", std::string(to_string(cfg.noise.kind))}};
  switch (cfg.noise.kind) {
    case ProcessKind::ou:
      noise["gamma"] = cfg.noise.ou.gamma;
      noise["big_gamma"] = cfg.noise.ou.big_gamma;
      break;
    case ProcessKind::rtn:
      noise.update(detail::fluctuator_json(cfg.noise.rtn));
      break;
    case ProcessKind::ensemble: {
      Json list = Json::array();
      for (const auto& f : cfg.noise.ensemble.fluctuators) list.push_back(detail::fluctuator_json(f));
      noise["fluctuators"] = list;
      break;
    }
  }
  Json rim{{"tau", cfg.rim.tau},
           {"delta_t", cfg.rim.delta_t},
           {"n_cycles", cfg.rim.n_cycles},
           {"t_dead", cfg.rim.t_dead},
           {"substeps", cfg.rim.substeps}};
  if (cfg.rim.dphi_schedule.size() == 1) {
    rim["dphi"] = cfg.rim.dphi_schedule.front();
  } else if (!cfg.rim.dphi_schedule.empty()) {
    rim["dphi"] = cfg.rim.dphi_schedule;
  }
  const auto& m = cfg.measurement;
  Json meas{{"kind", std::string(to_string(m.kind))}};
  if (m.kind == MeasurementKind::weak_optical) {
    meas["g0"] = m.g0;
    meas["g1"] = m.g1;
  }
  if (m.kind == MeasurementKind::assignment_error) {
    meas["p0"] = m.p0;
    meas["p1"] = m.p1;
  }
  meas["t2"] = std::isinf(m.t2) ? Json(nullptr) : Json(m.t2);
  Json tensors = Json::array();
  for (const auto& t : cfg.estimation.tensors) {
    tensors.push_back(Json{{"order", t.order}, {"max_lag", t.max_lag}, {"fixed", t.fixed}});
  }
  const auto& e = cfg.estimation;
  Json est{{"mode", std::string(to_string(e.mode))},
           {"origin", std::string(to_string(e.origin))},
           {"repair", std::string(to_string(e.repair))},
           {"tensors", tensors},
           {"spectra", e.spectra},
           {"window", std::string(to_string(e.window))},
           {"quadrature", std::string(to_string(e.quadrature))},
           {"pinned_zero", e.pinned_zero}};
  Json run{{"trajectories",
            cfg.run.plan ? to_json(*cfg.run.plan) : Json(cfg.run.trajectories)},
           {"seed", cfg.run.seed},
           {"workers", cfg.run.workers}};
  Json out{{"dir", cfg.output.dir}, {"svg", cfg.output.svg}, {"dump", cfg.output.dump}};
  return Json{{"noise", noise}, {"rim", rim},   {"measurement", meas},
              {"estimation", est}, {"run", run}, {"output", out}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace rimnoise
