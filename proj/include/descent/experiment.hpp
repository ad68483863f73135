#pragma once

#include "descent/analysis.hpp"
#include "descent/config.hpp"
#include "descent/optimize.hpp"
#include "descent/trace_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

namespace descent {

inline constexpr int kSummaryFormatVersion = 1;

/// Sweep parallelism: DESCENT_THREADS when set (>= 1), otherwise the
/// hardware concurrency.
inline int resolve_threads() {
  if (const char* env = std::getenv("DESCENT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline Trace run_with_method(const RunConfig& rc, ExperimentConfig::Method method) {
  switch (method) {
    case ExperimentConfig::Method::Rgd: return run_rgd(rc);
    case ExperimentConfig::Method::Momentum: return run_momentum(rc);
    case ExperimentConfig::Method::Sgd: return run_sgd(rc);
  }
  throw std::logic_error("unreachable");
}

struct ExperimentOutcome {
  nlohmann::json summary;
  bool aborted = false;
  std::vector<std::string> trace_paths;
  std::string mean_path;     // empty unless more than one seed
  std::string summary_path;
};

namespace detail {

inline nlohmann::json fit_to_json(const RateFit& fit) {
  return {{"p", fit.exponent}, {"C", fit.constant},       {"r_squared", fit.r_squared},
          {"window", nlohmann::json::array({fit.k_lo, fit.k_hi})},
          {"points_used", fit.points_used}};
}

inline nlohmann::json bound_to_json(const BoundReport& report) {
  return {{"satisfied", report.satisfied},
          {"worst_k", report.worst_k},
          {"worst_ratio", report.worst_ratio},
          {"anchor_k", report.anchor_k},
          {"C", report.constant},
          {"p", report.exponent},
          {"C_calibrated", report.constant_calibrated}};
}

inline std::vector<std::pair<std::int64_t, double>> gap_series(const Trace& trace) {
  std::vector<std::pair<std::int64_t, double>> out;
  for (const TraceRecord& r : trace.records)
    if (r.gap) out.emplace_back(r.k, *r.gap);
  return out;
}

}  // namespace detail

/// Runs the configured experiment over its seed sweep: one trace CSV per
/// seed, a mean-trace CSV when the sweep has several seeds, and summary.json
/// written last. Seeds are computed in parallel (chunked) but consumed in
/// ascending order, so every output byte is independent of scheduling.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                        const std::filesystem::path& out_dir,
                                        const std::string& stem, int threads = 0) {
  const auto t_start = std::chrono::steady_clock::now();
  if (threads <= 0) threads = resolve_threads();
  const std::vector<std::uint64_t> seeds = cfg.seeds();
  const ExperimentConfig::Method method = cfg.method();
  const bool coords = cfg.trace_coords();
  std::filesystem::create_directories(out_dir);

  // Validate once before spawning anything so config errors surface cleanly.
  (void)cfg.build_run_config(seeds.front());

  ExperimentOutcome outcome;
  MeanAccumulator acc;
  nlohmann::json aborted = nlohmann::json::array();
  std::optional<Trace> single;
  bool mean_ok = seeds.size() > 1;
  std::string mean_note;

  const std::size_t chunk = static_cast<std::size_t>(threads);
  std::vector<Trace> slots;
  for (std::size_t base = 0; base < seeds.size(); base += chunk) {
    const std::size_t count = std::min(chunk, seeds.size() - base);
    slots.assign(count, Trace{});
    if (count == 1) {
      slots[0] = run_with_method(cfg.build_run_config(seeds[base]), method);
    } else {
      std::vector<std::thread> workers;
      std::vector<std::exception_ptr> errors(count);
      workers.reserve(count);
      for (std::size_t i = 0; i < count; ++i)
        workers.emplace_back([&, i] {
          try {
            slots[i] = run_with_method(cfg.build_run_config(seeds[base + i]), method);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      for (auto& w : workers) w.join();
      for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    }
    for (std::size_t i = 0; i < count; ++i) {
      Trace& trace = slots[i];
      const std::uint64_t seed = seeds[base + i];
      const std::filesystem::path path =
          out_dir / (stem + "_seed" + std::to_string(seed) + ".csv");
      write_trace_csv_file(path.string(), trace, coords);
      outcome.trace_paths.push_back(path.string());
      if (trace.status == RunStatus::AbortedNonFinite) {
        outcome.aborted = true;
        aborted.push_back({{"seed", seed}, {"abort_k", trace.abort_k}});
      }
      if (mean_ok && !outcome.aborted) {
        try {
          acc.add(trace);
        } catch (const std::invalid_argument& e) {
          mean_ok = false;  // e.g. gradient stops at seed-dependent iterations
          mean_note = e.what();
        }
      }
      if (seeds.size() == 1) single = std::move(trace);
    }
  }
  if (outcome.aborted && mean_ok) {
    mean_ok = false;
    mean_note = "a seed aborted on non-finite values";
  }

  std::optional<Trace> summary_trace;
  if (seeds.size() == 1) {
    summary_trace = std::move(single);
  } else if (mean_ok) {
    summary_trace = acc.mean();
    const std::filesystem::path path = out_dir / (stem + "_mean.csv");
    write_trace_csv_file(path.string(), *summary_trace, false);
    outcome.mean_path = path.string();
  }

  nlohmann::json summary;
  summary["format_version"] = kSummaryFormatVersion;
  summary["config"] = cfg.entries();
  summary["seeds"] = {{"first", seeds.front()}, {"last", seeds.back()}, {"count", seeds.size()}};
  summary["status"] =
      outcome.aborted ? "aborted_nonfinite"
                      : (summary_trace ? to_string(summary_trace->status) : "completed");
  summary["aborted_seeds"] = aborted;
  if (!mean_note.empty()) summary["mean_note"] = mean_note;
  summary["rate_fit"] = nlohmann::json();
  summary["bound_reports"] = nlohmann::json::array();
  if (summary_trace) {
    const TraceRecord& last = summary_trace->back();
    summary["iterations"] = last.k;
    summary["final_f"] = last.f_value;
    summary["final_gap"] = last.gap ? nlohmann::json(*last.gap) : nlohmann::json();
    summary["final_grad_norm"] = last.grad_norm;
    const auto series = detail::gap_series(*summary_trace);
    if (!series.empty() && !outcome.aborted) {
      std::int64_t k_lo = 10, k_hi = summary_trace->last_k();
      if (auto window = cfg.fit_window()) std::tie(k_lo, k_hi) = *window;
      try {
        const RateFit fit = fit_rate(series, k_lo, k_hi);
        summary["rate_fit"] = detail::fit_to_json(fit);
        const BoundReport report = check_bound(series, fit.exponent, 10, 0.05);
        summary["bound_reports"].push_back(detail::bound_to_json(report));
      } catch (const std::invalid_argument& e) {
        summary["rate_fit_note"] = e.what();
      }
    }
  }
  summary["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  const std::filesystem::path summary_file = out_dir / "summary.json";
  {
    std::ofstream os(summary_file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + summary_file.string());
    os << summary.dump(2) << "\n";
  }
  outcome.summary_path = summary_file.string();
  outcome.summary = std::move(summary);
  return outcome;
}

/// Analytic-vs-central-difference gradient audit over random points.
struct GradCheckReport {
  double max_rel_error = 0.0;
  std::int64_t samples = 0;
  bool pass = false;
};

/// Compares the analytic ambient gradient (optionally corrupted by
/// `perturb`, the negative-control hook) against central differences at
/// random points: spheres get uniform sphere points, Euclidean objectives
/// standard normal points. Relative error uses a unit floor:
/// ||g - g_fd|| / max(1, ||g||).
inline GradCheckReport gradient_check(const Objective& f, const ManifoldKind& manifold,
                                      std::int64_t samples, std::uint64_t seed, double h = 1e-6,
                                      double perturb = 0.0) {
  if (samples < 1) throw std::invalid_argument("gradient_check requires samples >= 1");
  if (manifold.dim != f.dim())
    throw std::invalid_argument("gradient_check: manifold/objective dimension mismatch");
  RngState state{seed, 0};
  GradCheckReport report;
  report.samples = samples;
  for (std::int64_t i = 0; i < samples; ++i) {
    const ManifoldPoint x = detail::random_point(manifold, state);
    Vector g = euclidean_gradient(f, x);
    if (perturb != 0.0) g.array() += perturb;
    const Vector g_fd = finite_difference_gradient(f, x, h);
    const double rel = (g - g_fd).norm() / std::max(1.0, g.norm());
    report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  report.pass = report.max_rel_error <= 1e-5;
  return report;
}

}  // namespace descent
