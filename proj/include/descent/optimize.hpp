#pragma once

#include "descent/manifold.hpp"
#include "descent/noise.hpp"
#include "descent/objective.hpp"
#include "descent/schedule.hpp"
#include "descent/trace.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace descent {

enum class StepRule { ExpMap, NormalizeRetract, Ambient };

inline std::string to_string(StepRule r) {
  switch (r) {
    case StepRule::ExpMap: return "expmap";
    case StepRule::NormalizeRetract: return "retract";
    case StepRule::Ambient: return "ambient";
  }
  return "?";
}

/// Everything one run needs. grad_tol > 0 stops the run once
/// ||grad f|| <= grad_tol; grad_tol = 0 disables the gradient test so traces
/// always reach max_iters (a converged iterate has exactly zero gradient in
/// floating point, which would otherwise truncate fixed-length experiments).
struct RunConfig {
  Objective objective;
  ManifoldKind manifold;
  ManifoldPoint x0;
  ScheduleSpec schedule;
  StepRule step_rule = StepRule::ExpMap;
  std::optional<NoiseSpec> noise;
  std::optional<std::vector<double>> noise_override;  // one value per iteration, dim 1 only
  std::uint64_t seed = 0;
  std::int64_t max_iters = 1000;
  double grad_tol = 0.0;
  std::map<std::string, std::string> echo;  // carried into Trace::meta
};

/// One steepest-descent step x' = step(x, -alpha * grad f(x)) under the
/// chosen rule. A point with exactly zero Riemannian gradient is returned
/// unchanged.
inline ManifoldPoint rgd_step(const Objective& f, const ManifoldPoint& x, double alpha,
                              StepRule rule) {
  if (!(alpha > 0)) throw std::invalid_argument("rgd_step requires alpha > 0");
  if (rule == StepRule::Ambient && !x.manifold.is_euclidean())
    throw std::invalid_argument("ambient steps are only defined on Euclidean manifolds");
  TangentVector grad = riemannian_gradient(f, x);
  if (grad.coords.isZero(0.0)) return x;
  switch (rule) {
    case StepRule::ExpMap: return exp_map(x, scaled(grad, -alpha));
    case StepRule::NormalizeRetract: return retract_normalize(x, scaled(grad, -alpha));
    case StepRule::Ambient: return {x.manifold, x.coords - alpha * grad.coords};
  }
  return x;
}

/// Momentum update x' = x - alpha grad f(x) + beta (x - x_prev).
/// Stated (and only valid) in a linear space.
inline ManifoldPoint momentum_step(const Objective& f, const ManifoldPoint& x,
                                   const ManifoldPoint& x_prev, double alpha, double beta) {
  if (!x.manifold.is_euclidean())
    throw std::invalid_argument("momentum_step is only defined on Euclidean manifolds");
  if (!(x_prev.manifold == x.manifold))
    throw std::invalid_argument("momentum_step: x and x_prev on different manifolds");
  if (!(alpha >= 0)) throw std::invalid_argument("momentum_step requires alpha >= 0");
  if (!(beta >= 0)) throw std::invalid_argument("momentum_step requires beta >= 0");
  const Vector grad = euclidean_gradient(f, x);
  // beta = 0 reduces exactly (bit-for-bit) to the plain gradient step.
  if (beta == 0.0) return {x.manifold, x.coords - alpha * grad};
  return {x.manifold, x.coords - alpha * grad + beta * (x.coords - x_prev.coords)};
}

/// Stochastic update x' = x - alpha (grad f(x) + xi).
inline ManifoldPoint sgd_step(const Objective& f, const ManifoldPoint& x, double alpha,
                              const Vector& xi) {
  if (!x.manifold.is_euclidean())
    throw std::invalid_argument("sgd_step is only defined on Euclidean manifolds");
  if (xi.size() != x.coords.size())
    throw std::invalid_argument("sgd_step: noise dimension does not match point");
  if (!(alpha > 0)) throw std::invalid_argument("sgd_step requires alpha > 0");
  const Vector grad = euclidean_gradient(f, x);
  return {x.manifold, x.coords - alpha * (grad + xi)};
}

/// Exact minimizer of alpha -> f(x - alpha g) for the quadratic
/// f = 1/2 <Ax,x> - <b,x>: alpha = <g,g> / <Ag,g> with g = Ax - b.
inline double exact_line_search_quadratic(const Matrix& a, const Vector& b, const Vector& x) {
  const Vector g = a * x - b;
  const double gg = g.squaredNorm();
  if (gg == 0.0)
    throw std::domain_error("exact line search is undefined at a critical point (grad = 0)");
  return gg / (a * g).dot(g);
}

/// Displacement-ratio momentum ||x_k - x_prev|| / ||x_prev - x_prev2||.
/// Returns 0 when the denominator is at or below 1e-15 (covers the first
/// iterations, where fewer than two displacements exist).
inline double momentum_ratio_beta(const Vector& x_k, const Vector& x_prev, const Vector& x_prev2) {
  if (x_k.size() != x_prev.size() || x_prev.size() != x_prev2.size())
    throw std::invalid_argument("momentum_ratio_beta: dimension mismatch");
  const double denom = (x_prev - x_prev2).norm();
  if (denom <= 1e-15) return 0.0;
  return (x_k - x_prev).norm() / denom;
}

namespace detail {

inline void validate_common(const RunConfig& cfg) {
  if (!(cfg.x0.manifold == cfg.manifold))
    throw std::invalid_argument("x0 does not live on the configured manifold");
  if (cfg.objective.dim() != cfg.manifold.dim)
    throw std::invalid_argument("objective dimension does not match manifold dimension");
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (!(cfg.grad_tol >= 0)) throw std::invalid_argument("grad_tol must be >= 0");
  if (cfg.step_rule == StepRule::Ambient && !cfg.manifold.is_euclidean())
    throw std::invalid_argument("ambient step rule requires a Euclidean manifold");
  if (cfg.schedule.alpha.kind == AlphaRule::Kind::ExactLineSearch &&
      (cfg.objective.kind() != ObjectiveKind::Quadratic || !cfg.manifold.is_euclidean()))
    throw std::invalid_argument(
        "exact line search is only valid for quadratic objectives on Euclidean manifolds");
}

struct RunContext {
  std::optional<ManifoldPoint> minimizer;
  double f_star = 0.0;

  explicit RunContext(const RunConfig& cfg) {
    minimizer = cfg.objective.known_minimizer(cfg.manifold);
    if (minimizer) f_star = eval(cfg.objective, *minimizer);
  }

  TraceRecord make_record(const RunConfig& cfg, std::int64_t k, const ManifoldPoint& x,
                          double alpha, double beta) const {
    TraceRecord rec;
    rec.k = k;
    rec.x = x.coords;
    rec.f_value = eval(cfg.objective, x);
    rec.grad_norm = riemannian_gradient(cfg.objective, x).coords.norm();
    rec.alpha = alpha;
    rec.beta = beta;
    if (minimizer) {
      rec.gap = rec.f_value - f_star;
      rec.dist_to_opt = geodesic_distance(x, *minimizer);
    }
    return rec;
  }
};

inline Trace make_trace(const RunConfig& cfg, const char* method) {
  Trace tr;
  tr.seed = cfg.seed;
  tr.meta = cfg.echo;
  tr.meta["method"] = method;
  tr.meta["objective"] = cfg.objective.name();
  tr.meta["manifold"] = cfg.manifold.name();
  tr.meta["schedule.alpha"] = cfg.schedule.alpha.name();
  tr.meta["schedule.beta"] = cfg.schedule.beta.name();
  tr.meta["step_rule"] = to_string(cfg.step_rule);
  tr.meta["run.seed"] = std::to_string(cfg.seed);
  return tr;
}

inline bool record_is_finite(const TraceRecord& rec) {
  if (!std::isfinite(rec.f_value) || !std::isfinite(rec.grad_norm)) return false;
  return rec.x.allFinite();
}

// Appends the k-th record; returns false (and marks the trace aborted) on
// the first non-finite value so decaying-step schedules cannot mask a blowup.
inline bool append_checked(Trace& tr, TraceRecord rec) {
  const bool finite = record_is_finite(rec);
  const std::int64_t k = rec.k;
  tr.append(std::move(rec));
  if (!finite) {
    tr.status = RunStatus::AbortedNonFinite;
    tr.abort_k = k;
    return false;
  }
  return true;
}

inline bool gradient_stop(const RunConfig& cfg, double grad_norm) {
  return cfg.grad_tol > 0.0 && grad_norm <= cfg.grad_tol;
}

}  // namespace detail

/// Riemannian steepest descent per the configured step rule and schedule.
/// Fails fast on noise (use run_sgd) or momentum (use run_momentum).
inline Trace run_rgd(const RunConfig& cfg) {
  detail::validate_common(cfg);
  if (cfg.noise) throw std::invalid_argument("run_rgd does not accept noise; use run_sgd");
  if (cfg.schedule.beta.kind != BetaRule::Kind::Zero)
    throw std::invalid_argument("run_rgd does not accept momentum; use run_momentum");

  detail::RunContext ctx(cfg);
  Trace tr = detail::make_trace(cfg, "rgd");
  ManifoldPoint x = cfg.x0;
  if (!detail::append_checked(tr, ctx.make_record(cfg, 0, x, 0.0, 0.0))) return tr;

  for (std::int64_t k = 1; k <= cfg.max_iters; ++k) {
    if (detail::gradient_stop(cfg, tr.back().grad_norm)) {
      tr.status = RunStatus::GradientConverged;
      return tr;
    }
    double alpha;
    if (cfg.schedule.alpha.kind == AlphaRule::Kind::ExactLineSearch) {
      if (tr.back().grad_norm == 0.0) {
        // Critical point: the line search is undefined; the step is a no-op.
        if (!detail::append_checked(tr, ctx.make_record(cfg, k, x, 0.0, 0.0))) return tr;
        continue;
      }
      alpha = exact_line_search_quadratic(cfg.objective.a(), cfg.objective.b(), x.coords);
    } else {
      alpha = alpha_at(cfg.schedule.alpha, k);
    }
    x = rgd_step(cfg.objective, x, alpha, cfg.step_rule);
    if (!detail::append_checked(tr, ctx.make_record(cfg, k, x, alpha, 0.0))) return tr;
  }
  tr.status = RunStatus::Completed;
  return tr;
}

/// Momentum descent x_k = x_{k-1} - alpha_k grad f + beta_k (x_{k-1} - x_{k-2})
/// on a Euclidean manifold, with x_{-1} = x_0 (the first step is pure
/// gradient descent). StepRatio momentum uses the displacement ratio
/// ||d_{k-1}|| / ||d_{k-2}|| clamped to <= 1: the raw ratio exceeds 1 on
/// anisotropic quadratics and makes the iteration diverge.
inline Trace run_momentum(const RunConfig& cfg) {
  detail::validate_common(cfg);
  if (cfg.noise) throw std::invalid_argument("run_momentum does not accept noise; use run_sgd");
  if (!cfg.manifold.is_euclidean())
    throw std::invalid_argument("run_momentum requires a Euclidean manifold");

  detail::RunContext ctx(cfg);
  Trace tr = detail::make_trace(cfg, "momentum");
  ManifoldPoint x = cfg.x0;
  ManifoldPoint x_prev = cfg.x0;  // x_{-1} = x_0
  double disp_prev = 0.0, disp_prev2 = 0.0;
  if (!detail::append_checked(tr, ctx.make_record(cfg, 0, x, 0.0, 0.0))) return tr;

  for (std::int64_t k = 1; k <= cfg.max_iters; ++k) {
    if (detail::gradient_stop(cfg, tr.back().grad_norm)) {
      tr.status = RunStatus::GradientConverged;
      return tr;
    }
    double alpha = 0.0;
    const bool at_critical = tr.back().grad_norm == 0.0;
    if (cfg.schedule.alpha.kind == AlphaRule::Kind::ExactLineSearch) {
      if (!at_critical)
        alpha = exact_line_search_quadratic(cfg.objective.a(), cfg.objective.b(), x.coords);
    } else {
      alpha = alpha_at(cfg.schedule.alpha, k);
    }
    double beta = 0.0;
    if (cfg.schedule.beta.kind == BetaRule::Kind::StepRatio) {
      if (disp_prev2 > 1e-15) beta = std::min(disp_prev / disp_prev2, 1.0);
    } else {
      beta = beta_at(cfg.schedule.beta, k);
    }
    ManifoldPoint next = momentum_step(cfg.objective, x, x_prev, alpha, beta);
    disp_prev2 = disp_prev;
    disp_prev = (next.coords - x.coords).norm();
    x_prev = std::move(x);
    x = std::move(next);
    if (!detail::append_checked(tr, ctx.make_record(cfg, k, x, alpha, beta))) return tr;
  }
  tr.status = RunStatus::Completed;
  return tr;
}

/// Stochastic descent x_k = x_{k-1} - alpha_k (grad f + xi_k) with
/// alpha_k = c / k^gamma, gamma in (0.5, 1]. Noise is drawn from the
/// per-iteration substream (seed, k), so traces are reproducible and
/// independent of evaluation order; an override sequence replaces the
/// sampler for auditing fixed noise realizations.
inline Trace run_sgd(const RunConfig& cfg) {
  detail::validate_common(cfg);
  if (!cfg.noise) throw std::invalid_argument("run_sgd requires a noise spec");
  if (!cfg.manifold.is_euclidean())
    throw std::invalid_argument("run_sgd requires a Euclidean manifold");
  if (cfg.schedule.alpha.kind != AlphaRule::Kind::PowerLaw ||
      !(cfg.schedule.alpha.gamma > 0.5 && cfg.schedule.alpha.gamma <= 1.0))
    throw std::invalid_argument(
        "run_sgd requires a power-law step schedule with gamma in (0.5, 1]; got " +
        cfg.schedule.alpha.name());
  if (cfg.noise->dim != cfg.manifold.dim)
    throw std::invalid_argument("noise dimension does not match the manifold");
  if (cfg.noise_override) {
    if (cfg.manifold.dim != 1)
      throw std::invalid_argument("noise override sequences are only defined for dim 1");
    if (static_cast<std::int64_t>(cfg.noise_override->size()) < cfg.max_iters)
      throw std::invalid_argument("noise override sequence is shorter than max_iters");
  }

  detail::RunContext ctx(cfg);
  Trace tr = detail::make_trace(cfg, "sgd");
  tr.meta["noise"] = cfg.noise->name();
  ManifoldPoint x = cfg.x0;
  if (!detail::append_checked(tr, ctx.make_record(cfg, 0, x, 0.0, 0.0))) return tr;

  for (std::int64_t k = 1; k <= cfg.max_iters; ++k) {
    if (detail::gradient_stop(cfg, tr.back().grad_norm)) {
      tr.status = RunStatus::GradientConverged;
      return tr;
    }
    const double alpha = alpha_at(cfg.schedule.alpha, k);
    Vector xi;
    if (cfg.noise_override) {
      xi = Vector::Constant(1, (*cfg.noise_override)[static_cast<std::size_t>(k - 1)]);
    } else {
      xi = sample(*cfg.noise, substream(cfg.seed, static_cast<std::uint64_t>(k))).first;
    }
    x = sgd_step(cfg.objective, x, alpha, xi);
    TraceRecord rec = ctx.make_record(cfg, k, x, alpha, 0.0);
    rec.xi = xi;
    if (!detail::append_checked(tr, std::move(rec))) return tr;
  }
  tr.status = RunStatus::Completed;
  return tr;
}

}  // namespace descent
