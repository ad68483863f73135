// Experiment runner for the descent library.
//
// Subcommands:
//   run          execute a configured experiment (seed sweeps, CSV traces,
//                summary.json)
//   fit          fit a power law C / k^p to a trace column
//   check-bound  verify an envelope e_k <= C / k^p against a trace column
//   gradcheck    compare analytic and central-difference gradients
//
// Exit codes: 0 success (check-bound: satisfied; gradcheck: pass),
// 1 check failed, 2 configuration or input error, 3 numerical abort.

#include "descent/descent.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalAbort = 3;

struct RunArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> seeds;
  std::vector<std::string> overrides;
};

int cmd_run(const RunArgs& args) {
  descent::ExperimentConfig cfg = descent::ExperimentConfig::parse_file(args.config_path);
  for (const auto& ov : args.overrides) cfg.apply_override(ov);
  if (args.seed && args.seeds) {
    std::cerr << "error: give either --seed or --seeds, not both\n";
    return kExitConfigError;
  }
  if (args.seed) {
    cfg.erase("run.seeds");
    cfg.set("run.seed", std::to_string(*args.seed));
  }
  if (args.seeds) {
    cfg.erase("run.seed");
    cfg.set("run.seeds", *args.seeds);
  }

  const std::string stem = std::filesystem::path(args.config_path).stem().string();
  const auto outcome = descent::run_experiment(cfg, args.out_dir, stem);
  std::cout << outcome.summary.dump(2) << "\n";
  return outcome.aborted ? kExitNumericalAbort : kExitOk;
}

std::pair<std::int64_t, std::int64_t> parse_window(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos)
    throw descent::ConfigError("window", "expected k_lo:k_hi, got '" + text + "'");
  return {std::stoll(text.substr(0, pos)), std::stoll(text.substr(pos + 1))};
}

int cmd_fit(const std::string& trace_path, const std::optional<std::string>& window,
            const std::string& column) {
  const auto series = descent::read_trace_series_file(trace_path, column);
  if (series.empty()) {
    std::cerr << "error: no '" << column << "' values in " << trace_path << "\n";
    return kExitConfigError;
  }
  std::int64_t k_lo = std::max<std::int64_t>(1, series.front().first);
  std::int64_t k_hi = series.back().first;
  if (window) std::tie(k_lo, k_hi) = parse_window(*window);
  if (k_lo < series.front().first || k_hi > series.back().first) {
    std::cerr << "error: window [" << k_lo << ", " << k_hi << "] lies outside the trace ["
              << series.front().first << ", " << series.back().first << "]\n";
    return kExitConfigError;
  }
  const descent::RateFit fit = descent::fit_rate(series, k_lo, k_hi);
  std::cout << descent::detail::fit_to_json(fit).dump(2) << "\n";
  return kExitOk;
}

int cmd_check_bound(const std::string& trace_path, double p, std::optional<double> c,
                    std::int64_t anchor, double tol, const std::string& column) {
  const auto series = descent::read_trace_series_file(trace_path, column);
  const descent::BoundReport report = descent::check_bound(series, p, anchor, tol, c);
  std::cout << descent::detail::bound_to_json(report).dump(2) << "\n";
  return report.satisfied ? kExitOk : kExitCheckFailed;
}

int cmd_gradcheck(const std::string& objective, std::optional<int> dim, std::int64_t samples,
                  std::uint64_t seed, double h, double perturb) {
  descent::ManifoldKind manifold = descent::ManifoldKind::euclidean(1);
  std::optional<descent::Objective> f;
  if (objective == "sphere_height") {
    const int n = dim.value_or(3);
    f = descent::Objective::sphere_height(n);
    manifold = descent::ManifoldKind::sphere(n);
  } else if (objective == "half_square") {
    const int n = dim.value_or(1);
    f = descent::Objective::half_square(n);
    manifold = descent::ManifoldKind::euclidean(n);
  } else if (objective == "quadratic") {
    if (dim) throw descent::ConfigError("--dim", "the built-in quadratic is 2-dimensional");
    descent::Matrix a(2, 2);
    a << 4, 1, 1, 3;
    descent::Vector b(2);
    b << 1, 2;
    f = descent::Objective::quadratic(a, b);
    manifold = descent::ManifoldKind::euclidean(2);
  } else {
    throw descent::ConfigError(
        "--objective", "expected sphere_height, quadratic or half_square, got '" + objective + "'");
  }
  const auto report = descent::gradient_check(*f, manifold, samples, seed, h, perturb);
  nlohmann::json out = {{"objective", objective},
                        {"samples", report.samples},
                        {"max_rel_error", report.max_rel_error},
                        {"tolerance", 1e-5},
                        {"pass", report.pass}};
  std::cout << out.dump(2) << "\n";
  return report.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized steepest descent experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("--config", run_args.config_path, "Experiment config file")->required();
  run->add_option("--out", run_args.out_dir, "Output directory")->required();
  run->add_option("--seed", run_args.seed, "Single seed (overrides the config)");
  run->add_option("--seeds", run_args.seeds, "Seed range A..B (overrides the config)");
  run->add_option("--override", run_args.overrides, "key=value config override (repeatable)");

  std::string trace_path, column = "gap";
  std::optional<std::string> window;
  auto* fit = app.add_subcommand("fit", "Fit a power law to a trace column");
  fit->add_option("trace", trace_path, "Trace CSV path")->required();
  fit->add_option("--window", window, "Fit window k_lo:k_hi");
  fit->add_option("--column", column, "Trace column (default gap)");

  double bound_p = 0.0, bound_tol = 1e-9;
  std::optional<double> bound_c;
  std::int64_t bound_anchor = 10;
  std::string bound_trace, bound_column = "gap";
  auto* check = app.add_subcommand("check-bound", "Check an envelope against a trace column");
  check->add_option("trace", bound_trace, "Trace CSV path")->required();
  check->add_option("--p", bound_p, "Envelope exponent")->required();
  check->add_option("--C", bound_c, "Explicit envelope constant (default: calibrate at the anchor)");
  check->add_option("--anchor", bound_anchor, "Anchor iteration (default 10)");
  check->add_option("--tol", bound_tol, "Multiplicative tolerance (default 1e-9)");
  check->add_option("--column", bound_column, "Trace column (default gap)");

  std::string gc_objective;
  std::optional<int> gc_dim;
  std::int64_t gc_samples = 100;
  std::uint64_t gc_seed = 1;
  double gc_h = 1e-6, gc_perturb = 0.0;
  auto* gradcheck = app.add_subcommand("gradcheck", "Verify analytic gradients");
  gradcheck->add_option("--objective", gc_objective, "sphere_height | quadratic | half_square")
      ->required();
  gradcheck->add_option("--dim", gc_dim, "Dimension (sphere_height, half_square)");
  gradcheck->add_option("--samples", gc_samples, "Random points to test (default 100)");
  gradcheck->add_option("--seed", gc_seed, "RNG seed (default 1)");
  gradcheck->add_option("--fd-step", gc_h, "Central-difference step (default 1e-6)");
  gradcheck->add_option("--perturb", gc_perturb, "Corrupt the analytic gradient (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (fit->parsed()) return cmd_fit(trace_path, window, column);
    if (check->parsed())
      return cmd_check_bound(bound_trace, bound_p, bound_c, bound_anchor, bound_tol, bound_column);
    if (gradcheck->parsed())
      return cmd_gradcheck(gc_objective, gc_dim, gc_samples, gc_seed, gc_h, gc_perturb);
  } catch (const descent::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const descent::CsvError& e) {
    std::cerr << "csv error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (...) {
    std::cerr << "error: unknown failure\n";
    return kExitConfigError;
  }
  return kExitConfigError;  // unreachable with require_subcommand(1)
}
