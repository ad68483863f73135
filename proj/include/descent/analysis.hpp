#pragma once

#include "descent/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace descent {

/// Values below this are floating-point floor, not signal; log-log fits
/// exclude them.
inline constexpr double kFitFloor = 1e-15;

/// Composite progress measure E_k = f(x_k) - f(x*) + 1/2 ||x_k - x*||^2.
inline double energy(const TraceRecord& rec, const Vector& x_star, double f_star) {
  if (rec.x.size() != x_star.size())
    throw std::invalid_argument("energy: record and minimizer dimensions differ");
  return rec.f_value - f_star + 0.5 * (rec.x - x_star).squaredNorm();
}

/// Streaming pointwise mean of traces sharing a config. Traces must be added
/// in ascending seed order so aggregation is schedule-independent. Coordinate
/// and noise fields are omitted from the result.
class MeanAccumulator {
 public:
  void add(const Trace& trace) {
    if (count_ == 0) {
      init(trace);
    } else {
      check_compatible(trace);
    }
    if (count_ > 0 && trace.seed <= last_seed_)
      throw std::invalid_argument("mean accumulation requires strictly ascending seeds");
    last_seed_ = trace.seed;
    if (count_ == 0) first_seed_ = trace.seed;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
      const TraceRecord& r = trace.records[i];
      f_sum_[i] += r.f_value;
      grad_sum_[i] += r.grad_norm;
      alpha_sum_[i] += r.alpha;
      beta_sum_[i] += r.beta;
      if (has_gap_) {
        if (!r.gap) throw std::invalid_argument("traces disagree on gap availability");
        gap_sum_[i] += *r.gap;
      }
      if (has_dist_) {
        if (!r.dist_to_opt) throw std::invalid_argument("traces disagree on dist availability");
        dist_sum_[i] += *r.dist_to_opt;
      }
    }
    ++count_;
  }

  std::int64_t count() const { return count_; }

  Trace mean() const {
    if (count_ == 0) throw std::invalid_argument("mean of zero traces");
    Trace out;
    out.status = status_;
    out.meta = meta_;
    out.meta["mean_of"] = std::to_string(count_);
    out.meta["seed_first"] = std::to_string(first_seed_);
    out.meta["seed_last"] = std::to_string(last_seed_);
    const auto n = static_cast<long double>(count_);
    for (std::size_t i = 0; i < f_sum_.size(); ++i) {
      TraceRecord r;
      r.k = static_cast<std::int64_t>(i);
      r.f_value = static_cast<double>(f_sum_[i] / n);
      r.grad_norm = static_cast<double>(grad_sum_[i] / n);
      r.alpha = static_cast<double>(alpha_sum_[i] / n);
      r.beta = static_cast<double>(beta_sum_[i] / n);
      if (has_gap_) r.gap = static_cast<double>(gap_sum_[i] / n);
      if (has_dist_) r.dist_to_opt = static_cast<double>(dist_sum_[i] / n);
      out.records.push_back(std::move(r));
    }
    return out;
  }

 private:
  void init(const Trace& trace) {
    const std::size_t n = trace.records.size();
    if (n == 0) throw std::invalid_argument("cannot average an empty trace");
    has_gap_ = trace.records.front().gap.has_value();
    has_dist_ = trace.records.front().dist_to_opt.has_value();
    f_sum_.assign(n, 0.0L);
    grad_sum_.assign(n, 0.0L);
    alpha_sum_.assign(n, 0.0L);
    beta_sum_.assign(n, 0.0L);
    if (has_gap_) gap_sum_.assign(n, 0.0L);
    if (has_dist_) dist_sum_.assign(n, 0.0L);
    status_ = trace.status;
    meta_ = trace.meta;
    meta_.erase("run.seed");
  }

  void check_compatible(const Trace& trace) {
    if (trace.records.size() != f_sum_.size())
      throw std::invalid_argument("traces of different lengths cannot be averaged");
    auto meta = trace.meta;
    meta.erase("run.seed");
    if (meta != meta_)
      throw std::invalid_argument("traces from different configs cannot be averaged");
  }

  std::int64_t count_ = 0;
  std::uint64_t first_seed_ = 0, last_seed_ = 0;
  bool has_gap_ = false, has_dist_ = false;
  RunStatus status_ = RunStatus::Completed;
  std::map<std::string, std::string> meta_;
  std::vector<long double> f_sum_, grad_sum_, alpha_sum_, beta_sum_, gap_sum_, dist_sum_;
};

/// Pointwise mean of f_value, gap and grad_norm over traces that share a
/// config (modulo seed) and length, merged in ascending seed order.
inline Trace mean_trace(const std::vector<Trace>& traces) {
  MeanAccumulator acc;
  for (const Trace& t : traces) acc.add(t);
  return acc.mean();
}

/// Fitted power law e_k ~ C / k^p over a window of iteration indices.
struct RateFit {
  double exponent = 0.0;  // p
  double constant = 0.0;  // C
  double r_squared = 0.0;
  std::int64_t k_lo = 0, k_hi = 0;
  std::int64_t points_used = 0;
};

/// Ordinary least squares in log-log coordinates over [k_lo, k_hi].
/// Uses a log-spaced subsample of at most 200 points so long traces fit
/// quickly without biasing the regression toward large k. Values inside
/// (-1e-15, 1e-15) are floating-point floor, not signal, and are excluded
/// (converged traces reach a gap of exactly zero); values at or below
/// -1e-15 mean the series is not a decay curve and are an error.
inline RateFit fit_rate(std::span<const std::pair<std::int64_t, double>> series,
                        std::int64_t k_lo, std::int64_t k_hi) {
  if (k_lo < 1 || k_hi <= k_lo) throw std::invalid_argument("fit window requires 1 <= k_lo < k_hi");
  std::vector<std::pair<std::int64_t, double>> window;
  for (const auto& [k, e] : series) {
    if (k < k_lo || k > k_hi) continue;
    if (e <= -kFitFloor)
      throw std::invalid_argument("fit_rate: nonpositive value at k=" + std::to_string(k));
    if (e < kFitFloor) continue;
    window.emplace_back(k, e);
  }
  if (window.size() < 3)
    throw std::invalid_argument("fit_rate needs at least 3 positive points in the window");
  std::sort(window.begin(), window.end());

  std::vector<std::pair<std::int64_t, double>> sample;
  if (window.size() <= 200) {
    sample = window;
  } else {
    const double log_lo = std::log(static_cast<double>(window.front().first));
    const double log_hi = std::log(static_cast<double>(window.back().first));
    std::int64_t prev = -1;
    for (int i = 0; i < 200; ++i) {
      const double target = std::exp(log_lo + (log_hi - log_lo) * i / 199.0);
      auto it = std::lower_bound(window.begin(), window.end(),
                                 std::pair<std::int64_t, double>{
                                     static_cast<std::int64_t>(std::llround(target)), 0.0});
      if (it == window.end()) --it;
      if (it->first != prev) {
        sample.push_back(*it);
        prev = it->first;
      }
    }
  }

  const auto n = static_cast<double>(sample.size());
  double sx = 0, sy = 0;
  for (const auto& [k, e] : sample) {
    sx += std::log(static_cast<double>(k));
    sy += std::log(e);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [k, e] : sample) {
    const double dx = std::log(static_cast<double>(k)) - mx;
    const double dy = std::log(e) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate window (single k)");
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (const auto& [k, e] : sample) {
    const double pred = my + slope * (std::log(static_cast<double>(k)) - mx);
    const double resid = std::log(e) - pred;
    ss_res += resid * resid;
  }
  RateFit fit;
  fit.exponent = -slope;
  fit.constant = std::exp(my - slope * mx);
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  fit.k_lo = k_lo;
  fit.k_hi = k_hi;
  fit.points_used = static_cast<std::int64_t>(sample.size());
  return fit;
}

/// Verdict on the envelope e_k <= C / k^p for all k > anchor.
struct BoundReport {
  bool satisfied = false;
  std::int64_t worst_k = 0;
  double worst_ratio = 0.0;  // max over k of e_k * k^p / C
  std::int64_t anchor_k = 0;
  double constant = 0.0;  // the C actually used
  double exponent = 0.0;
  bool constant_calibrated = false;  // true: C = e_anchor * anchor^p
};

/// Checks e_k <= C / k^p for every k > anchor_k, within a multiplicative
/// tolerance: satisfied iff worst_ratio <= 1 + tolerance. C is either
/// supplied (theorems with explicit constants) or calibrated from the anchor
/// record (O(.) claims with unstated constants). Nonpositive series values
/// cannot violate an upper envelope and count as satisfying.
inline BoundReport check_bound(std::span<const std::pair<std::int64_t, double>> series, double p,
                               std::int64_t anchor_k, double tolerance,
                               std::optional<double> explicit_c = std::nullopt) {
  if (anchor_k < 0) throw std::invalid_argument("check_bound anchor must be >= 0");
  BoundReport report;
  report.anchor_k = anchor_k;
  report.exponent = p;
  if (explicit_c) {
    if (!(*explicit_c > 0)) throw std::invalid_argument("check_bound requires C > 0");
    report.constant = *explicit_c;
    report.constant_calibrated = false;
  } else {
    const auto at_anchor =
        std::find_if(series.begin(), series.end(), [&](const auto& kv) { return kv.first == anchor_k; });
    if (at_anchor == series.end())
      throw std::invalid_argument("check_bound: no record at anchor k=" + std::to_string(anchor_k));
    if (!(at_anchor->second > 0))
      throw std::invalid_argument("check_bound: anchor value must be positive to calibrate C");
    report.constant = at_anchor->second * std::pow(static_cast<double>(anchor_k), p);
    report.constant_calibrated = true;
  }

  bool any = false;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [k, e] : series) {
    if (k <= anchor_k) continue;
    any = true;
    const double ratio = e * std::pow(static_cast<double>(k), p) / report.constant;
    if (ratio > worst) {
      worst = ratio;
      report.worst_k = k;
    }
  }
  if (!any) throw std::invalid_argument("check_bound: no records beyond the anchor (empty window)");
  report.worst_ratio = worst;
  report.satisfied = worst <= 1.0 + tolerance;
  return report;
}

}  // namespace descent
