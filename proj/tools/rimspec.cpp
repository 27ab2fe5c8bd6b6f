// rimspec: command-line front end to the rimnoise library.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
// RIMSPEC_SEED and RIMSPEC_WORKERS override the config file; flags override both.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rimnoise/rimnoise.hpp"

namespace {

using namespace rimnoise;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::optional<std::size_t> dump;
};

std::optional<std::uint64_t> env_number(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError(std::string(name) + " is not a non-negative integer");
  }
}

unsigned resolve_workers(std::uint64_t requested) {
  if (requested == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(requested);
}

void apply_overrides(ExperimentConfig& cfg, const CommonFlags& f) {
  if (auto s = env_number("RIMSPEC_SEED")) cfg.run.seed = *s;
  if (auto w = env_number("RIMSPEC_WORKERS")) cfg.run.workers = resolve_workers(*w);
  if (f.seed) cfg.run.seed = *f.seed;
  if (f.workers) cfg.run.workers = resolve_workers(*f.workers);
  if (f.out) cfg.output.dir = *f.out;
  if (f.dump) cfg.output.dump = *f.dump;
  cfg.validate();
}

void print_warnings(const ExperimentConfig& cfg) {
  for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";
}

void print_summary(const RunReport& r) {
  std::cout << "trajectories " << r.trajectories << ", seed " << r.config.run.seed << ", workers "
            << r.config.run.workers << ", " << format_number(r.wall_seconds) << " s\n";
  for (std::size_t i = 0; i < r.tensors.size(); ++i) {
    const auto& t = r.tensors[i];
    if (!t.cumulant || !t.oracle) continue;
    double worst = 0.0;
    for (std::size_t k = 0; k < t.cumulant->size(); ++k) {
      const double se = t.cumulant->std_errors[k];
      if (!t.moment.valid[k]) continue;
      if (se > 0.0 && std::isfinite(se)) {
        worst = std::max(worst, std::abs(t.cumulant->values[k] - t.oracle->values[k]) / se);
      }
    }
    std::cout << "  " << tensor_stem(t, i) << ": " << t.cumulant->size() << " points, "
              << t.masked << " masked, max |z| vs oracle on unmasked points " << std::setprecision(3) << worst << "\n";
  }
  std::cout << "  output: " << r.config.output.dir << "\n";
}

// --- oracle queries -----------------------------------------------------------

struct OracleArgs {
  std::string kind;
  double gamma = 1.0, big_gamma = 1.0;
  double lambda = 1.0, rate = 1.0, asymmetry = 0.0;
  std::size_t copies = 1;
  std::vector<double> points;
  int order = 2;
  int max_lag = 16;
  double step = 0.1;
  std::string config;
};

NoiseConfig oracle_noise(const OracleArgs& a) {
  if (!a.config.empty()) return load_config(a.config).noise;
  NoiseConfig n;
  if (a.kind.rfind("ou", 0) == 0) {
    n.kind = ProcessKind::ou;
    n.ou = OuParams{a.gamma, a.big_gamma};
  } else {
    n.kind = ProcessKind::ensemble;
    n.ensemble.fluctuators.assign(a.copies, TlfParams::from_rate(a.lambda, a.rate, a.asymmetry));
  }
  n.validate();
  return n;
}

Json run_oracle(const OracleArgs& a) {
  const NoiseConfig noise = oracle_noise(a);
  Json values = Json::array();
  std::string method;
  if (a.kind == "ou_cumulant2") {
    for (double lag : a.points) values.push_back(ou_cumulant2(noise.ou, lag).value);
    method = "closed-form";
  } else if (a.kind == "ou_spectrum" || a.kind == "spectrum") {
    for (double w : a.points) values.push_back(oracle_spectrum1(noise, w));
    method = "closed-form";
  } else if (a.kind == "rtn_moment") {
    const auto& f = noise.ensemble.fluctuators.front();
    const auto r = rtn_moment(f, a.points);
    values.push_back(r.value);
    method = to_string(r.method);
  } else if (a.kind == "rtn_cumulant") {
    const auto r = rtn_cumulant(noise.ensemble.fluctuators.front(), a.points);
    values.push_back(r.value);
    method = to_string(r.method);
  } else if (a.kind == "ensemble_cumulant") {
    const auto r = ensemble_cumulant(noise.ensemble, static_cast<int>(a.points.size()) + 1, a.points);
    values.push_back(r.value);
    method = to_string(r.method);
  } else if (a.kind == "polyspectrum") {
    detail::require(a.order >= 2, "polyspectrum needs order >= 2");
    const auto lags = LagSet::box(static_cast<std::size_t>(a.order - 1), a.max_lag);
    const auto tensor = oracle_tensor(noise, a.order, lags, a.step);
    SpectrumOptions opt;
    opt.propagate_errors = false;
    const auto sp = polyspectrum(tensor, opt);
    Json axes = Json::array();
    for (const auto& ax : sp.axes) axes.push_back(ax);
    return Json{{"kind", a.kind}, {"order", a.order}, {"method", "oracle cumulant + riemann transform"},
                {"axes", axes}, {"values", sp.values}};
  } else {
    throw ConfigError("unknown oracle kind '" + a.kind + "'");
  }
  return Json{{"kind", a.kind}, {"method", method}, {"points", a.points}, {"values", values}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise polyspectrum spectroscopy with repetitive Ramsey measurements"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonFlags flags;
  app.add_option("--seed", flags.seed, "master seed");
  app.add_option("--workers", flags.workers, "worker threads (0 = all cores)");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--dump", flags.dump, "write trajectory and outcome CSVs for the first K trajectories");

  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "simulate trajectories and write outcome records");
  simulate->add_option("config", config_path, "experiment JSON")->required();

  auto* estimate = app.add_subcommand("estimate", "estimate moments and cumulants");
  estimate->add_option("config", config_path, "experiment JSON")->required();

  std::string input;
  std::string window = "none", quadrature = "riemann";
  int pin_zero = 0;
  auto* spectrum = app.add_subcommand("spectrum", "polyspectra from a config run or a cumulant CSV");
  spectrum->add_option("input", input, "experiment JSON or cumulant tensor CSV")->required();
  spectrum->add_option("--window", window, "none | hann (CSV input)");
  spectrum->add_option("--quadrature", quadrature, "riemann | piecewise_linear (CSV input)");
  spectrum->add_option("--pin-zero", pin_zero, "trailing axes evaluated at omega = 0 (CSV input)");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "exact reference values as JSON");
  oracle->add_option("kind", oa.kind,
                     "ou_cumulant2 | ou_spectrum | rtn_moment | rtn_cumulant | ensemble_cumulant | "
                     "spectrum | polyspectrum")
      ->required();
  oracle->add_option("points", oa.points, "lags, times or frequencies");
  oracle->add_option("--gamma", oa.gamma, "OU gamma (MHz)");
  oracle->add_option("--big-gamma", oa.big_gamma, "OU intensity (MHz^2)");
  oracle->add_option("--lambda", oa.lambda, "fluctuator coupling (MHz)");
  oracle->add_option("--rate", oa.rate, "fluctuator total switching rate W (MHz)");
  oracle->add_option("--asymmetry", oa.asymmetry, "fluctuator asymmetry xi_bar");
  oracle->add_option("--copies", oa.copies, "identical fluctuators in the ensemble");
  oracle->add_option("--order", oa.order, "polyspectrum: cumulant order");
  oracle->add_option("--max-lag", oa.max_lag, "polyspectrum: lag box size");
  oracle->add_option("--step", oa.step, "polyspectrum: sampling interval (us)");
  oracle->add_option("--config", oa.config, "take the noise section from an experiment JSON");

  int order = 2;
  double delta = 0.05, eps = 0.05, tau = 0.05;
  std::optional<double> sigma;
  std::string pilot;
  auto* plan = app.add_subcommand("plan", "Hoeffding sample-size plan");
  plan->add_option("-n,--order", order, "correlation order")->required();
  plan->add_option("--delta", delta, "absolute tolerance on C^(n) (MHz^n)")->required();
  plan->add_option("--eps", eps, "failure probability")->required();
  plan->add_option("--tau", tau, "free evolution time (us)")->required();
  plan->add_option("--sigma", sigma, "per-trajectory standard deviation for the normal estimate");
  plan->add_option("--pilot", pilot, "experiment JSON whose run supplies sigma");

  std::string figure;
  double scale = 1e-3;
  auto* reproduce = app.add_subcommand("reproduce", "run a published figure's parameter set");
  reproduce->add_option("figure", figure, "fig2 | fig3 | fig4 | figS1")->required();
  reproduce->add_option("--scale", scale, "fraction of the published N_s, in (0, 1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      auto cfg = load_config(config_path);
      if (!flags.dump) cfg.output.dump = std::min<std::uint64_t>(cfg.run.trajectories, 8);
      apply_overrides(cfg, flags);
      cfg.estimation.tensors.clear();
      print_warnings(cfg);
      print_summary(run_experiment(cfg));
    } else if (estimate->parsed()) {
      auto cfg = load_config(config_path);
      apply_overrides(cfg, flags);
      cfg.estimation.spectra = false;
      print_warnings(cfg);
      print_summary(run_experiment(cfg));
    } else if (spectrum->parsed()) {
      if (std::filesystem::path(input).extension() == ".csv") {
        const auto tensor = read_tensor_csv(input, TensorKind::cumulant);
        SpectrumOptions opt;
        opt.window = detail::parse_enum(window, detail::kWindowNames, "window");
        opt.quadrature = detail::parse_enum(quadrature, detail::kQuadratureNames, "quadrature");
        const int dims = tensor.order - 1;
        if (pin_zero > 0 && pin_zero < dims) {
          opt.pinned.assign(static_cast<std::size_t>(dims), std::nullopt);
          for (int a = dims - pin_zero; a < dims; ++a) opt.pinned[static_cast<std::size_t>(a)] = 0.0;
        }
        const auto sp = polyspectrum(tensor, opt);
        const std::filesystem::path dir = flags.out.value_or(".");
        write_text(dir / "spectrum.csv", spectrum_csv(sp));
        std::cout << "order " << sp.order << " polyspectrum, " << sp.size() << " points, imag ratio "
                  << format_number(sp.imag_ratio) << " -> " << (dir / "spectrum.csv").string() << "\n";
      } else {
        auto cfg = load_config(input);
        apply_overrides(cfg, flags);
        cfg.estimation.spectra = true;
        print_warnings(cfg);
        print_summary(run_experiment(cfg));
      }
    } else if (oracle->parsed()) {
      std::cout << run_oracle(oa).dump(2) << "\n";
    } else if (plan->parsed()) {
      const auto p = hoeffding_sample_size(order, delta, eps, tau);
      Json out{{"plan", to_json(p)}};
      if (!pilot.empty()) {
        auto cfg = load_config(pilot);
        apply_overrides(cfg, flags);
        cfg.estimation.mode = ReadoutMode::conditional;
        cfg.estimation.tensors = {{order, 0, {}}};
        cfg.estimation.spectra = false;
        const auto r = execute(cfg);
        const auto& t = r.tensors.front().moment;
        sigma = t.std_errors[0] * std::sqrt(static_cast<double>(r.trajectories));
      }
      if (sigma) {
        out["conditional"] = Json{{"sigma", *sigma},
                                  {"trajectories", clt_sample_size(*sigma, delta, eps)}};
      }
      std::cout << out.dump(2) << "\n";
    } else if (reproduce->parsed()) {
      const std::uint64_t seed = flags.seed.value_or(env_number("RIMSPEC_SEED").value_or(20251015));
      const std::string root = flags.out.value_or("rimspec-" + figure);
      for (auto& recipe : make_recipe(figure, scale, seed)) {
        auto cfg = recipe.config;
        cfg.output.dir = (std::filesystem::path(root) / recipe.label).string();
        CommonFlags rest = flags;
        rest.out.reset();
        rest.seed = seed;
        apply_overrides(cfg, rest);
        print_warnings(cfg);
        std::cout << figure << "/" << recipe.label << " (" << to_string(cfg.estimation.mode)
                  << " mode)\n";
        print_summary(run_experiment(cfg));
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
