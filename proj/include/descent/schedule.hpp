#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace descent {

/// Step-size rule families. PowerLaw(c, gamma) is c / k^gamma with the step
/// index k counted from 1. ExactLineSearch is only meaningful for quadratic
/// objectives on Euclidean manifolds (checked at run configuration).
struct AlphaRule {
  enum class Kind { Fixed, PowerLaw, ExactLineSearch };

  Kind kind = Kind::Fixed;
  double value = 0.0;  // Fixed
  double c = 0.0;      // PowerLaw
  double gamma = 1.0;  // PowerLaw

  static AlphaRule fixed(double value) {
    if (!(value > 0)) throw std::invalid_argument("fixed step size must be positive");
    AlphaRule r;
    r.kind = Kind::Fixed;
    r.value = value;
    return r;
  }

  static AlphaRule power_law(double c, double gamma) {
    if (!(c > 0)) throw std::invalid_argument("power-law step requires c > 0");
    if (!(gamma > 0 && gamma <= 1))
      throw std::invalid_argument("power-law step requires gamma in (0, 1]");
    AlphaRule r;
    r.kind = Kind::PowerLaw;
    r.c = c;
    r.gamma = gamma;
    return r;
  }

  static AlphaRule exact_line_search() {
    AlphaRule r;
    r.kind = Kind::ExactLineSearch;
    return r;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Fixed: return "fixed(" + std::to_string(value) + ")";
      case Kind::PowerLaw:
        return "powerlaw(c=" + std::to_string(c) + ", gamma=" + std::to_string(gamma) + ")";
      case Kind::ExactLineSearch: return "linesearch";
    }
    return "?";
  }
};

/// Momentum rule families. StepRatio is Example-2 style
/// beta_k = ||x_{k-1} - x_{k-2}|| / ||x_{k-2} - x_{k-3}||, evaluated inside
/// run_momentum from the displacement history.
struct BetaRule {
  enum class Kind { Zero, PowerLaw, StepRatio };

  Kind kind = Kind::Zero;
  double d = 0.0;
  double gamma = 1.0;

  static BetaRule zero() { return {}; }

  static BetaRule power_law(double d, double gamma) {
    if (!(d > 0)) throw std::invalid_argument("power-law momentum requires d > 0");
    if (!(gamma > 0 && gamma <= 1))
      throw std::invalid_argument("power-law momentum requires gamma in (0, 1]");
    BetaRule r;
    r.kind = Kind::PowerLaw;
    r.d = d;
    r.gamma = gamma;
    return r;
  }

  static BetaRule step_ratio() {
    BetaRule r;
    r.kind = Kind::StepRatio;
    return r;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Zero: return "zero";
      case Kind::PowerLaw:
        return "powerlaw(d=" + std::to_string(d) + ", gamma=" + std::to_string(gamma) + ")";
      case Kind::StepRatio: return "stepratio";
    }
    return "?";
  }
};

struct ScheduleSpec {
  AlphaRule alpha;
  BetaRule beta;
};

/// Closed-form step size at iteration k >= 1. ExactLineSearch has no closed
/// form; runs compute it from the current gradient instead.
inline double alpha_at(const AlphaRule& rule, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("step index k starts at 1");
  switch (rule.kind) {
    case AlphaRule::Kind::Fixed: return rule.value;
    case AlphaRule::Kind::PowerLaw: return rule.c / std::pow(static_cast<double>(k), rule.gamma);
    case AlphaRule::Kind::ExactLineSearch:
      throw std::invalid_argument("exact line search has no closed-form schedule value");
  }
  return 0.0;
}

inline double beta_at(const BetaRule& rule, std::int64_t k) {
  if (k < 1) throw std::invalid_argument("step index k starts at 1");
  switch (rule.kind) {
    case BetaRule::Kind::Zero: return 0.0;
    case BetaRule::Kind::PowerLaw: return rule.d / std::pow(static_cast<double>(k), rule.gamma);
    case BetaRule::Kind::StepRatio:
      throw std::invalid_argument("step-ratio momentum is defined by the iterate history");
  }
  return 0.0;
}

struct ScheduleReport {
  bool alpha_to_zero = false;
  bool alpha_sum_diverges = false;
  bool beta_to_zero = false;
};

/// Symbolic verdicts on the convergence hypotheses alpha_k -> 0,
/// sum alpha_k = inf, beta_k -> 0 for the supported families.
/// ExactLineSearch steps on a quadratic stay in [1/lambda_max, 1/lambda_min]:
/// bounded away from zero, divergent sum. StepRatio tends to the contraction
/// rate of the iteration, not to zero.
inline ScheduleReport validate_schedule(const ScheduleSpec& s) {
  ScheduleReport r;
  switch (s.alpha.kind) {
    case AlphaRule::Kind::Fixed:
      r.alpha_to_zero = false;
      r.alpha_sum_diverges = true;
      break;
    case AlphaRule::Kind::PowerLaw:
      r.alpha_to_zero = true;
      r.alpha_sum_diverges = s.alpha.gamma <= 1.0;
      break;
    case AlphaRule::Kind::ExactLineSearch:
      r.alpha_to_zero = false;
      r.alpha_sum_diverges = true;
      break;
  }
  switch (s.beta.kind) {
    case BetaRule::Kind::Zero: r.beta_to_zero = true; break;
    case BetaRule::Kind::PowerLaw: r.beta_to_zero = true; break;
    case BetaRule::Kind::StepRatio: r.beta_to_zero = false; break;
  }
  return r;
}

}  // namespace descent
