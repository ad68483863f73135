#pragma once

#include "descent/manifold.hpp"
#include "descent/rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace descent {

/// Zero-mean noise families with bounded q-th moments, q > 2.
enum class NoiseFamily { Zero, Uniform, StudentT };

struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Zero;
  double half_width = 1.0;  // Uniform: xi ~ U[-half_width, half_width]
  double dof = 5.0;         // StudentT degrees of freedom
  double scale = 1.0;       // StudentT scale
  double moment_order_q = 4.0;
  int dim = 1;

  static NoiseSpec zero(int dim, double q = 4.0) {
    check_common(q, dim);
    NoiseSpec s;
    s.family = NoiseFamily::Zero;
    s.moment_order_q = q;
    s.dim = dim;
    return s;
  }

  static NoiseSpec uniform(double half_width, double q, int dim) {
    check_common(q, dim);
    if (!(half_width > 0)) throw std::invalid_argument("uniform noise requires half_width > 0");
    NoiseSpec s;
    s.family = NoiseFamily::Uniform;
    s.half_width = half_width;
    s.moment_order_q = q;
    s.dim = dim;
    return s;
  }

  static NoiseSpec student_t(double dof, double scale, double q, int dim) {
    check_common(q, dim);
    if (!(dof > 2)) throw std::invalid_argument("student_t noise requires dof > 2");
    if (!(scale > 0)) throw std::invalid_argument("student_t noise requires scale > 0");
    if (!(dof > q))
      throw std::invalid_argument(
          "student_t noise with dof = " + std::to_string(dof) +
          " has no finite moment of order q = " + std::to_string(q) + " (requires dof > q)");
    NoiseSpec s;
    s.family = NoiseFamily::StudentT;
    s.dof = dof;
    s.scale = scale;
    s.moment_order_q = q;
    s.dim = dim;
    return s;
  }

  std::string name() const {
    switch (family) {
      case NoiseFamily::Zero: return "zero";
      case NoiseFamily::Uniform: return "uniform(" + std::to_string(half_width) + ")";
      case NoiseFamily::StudentT:
        return "student_t(nu=" + std::to_string(dof) + ", s=" + std::to_string(scale) + ")";
    }
    return "?";
  }

 private:
  static void check_common(double q, int dim) {
    if (!(q > 2)) throw std::invalid_argument("noise moment order q must exceed 2");
    if (dim < 1) throw std::invalid_argument("noise dim must be >= 1");
  }
};

namespace detail {
// Student-t draw, Bailey's trigonometric form:
//   T = sqrt(nu * (U^(-2/nu) - 1)) * cos(2 pi V),  U, V ~ U(0,1) independent.
// Consumes exactly two uniforms, so the stream position never depends on
// the values drawn (no rejection loop).
inline double student_t_draw(double dof, RngState& state) {
  const double u = next_open01(state);
  const double v = next_uniform01(state);
  return std::sqrt(dof * (std::pow(u, -2.0 / dof) - 1.0)) * std::cos(2.0 * M_PI * v);
}
}  // namespace detail

/// One i.i.d.-coordinate draw from the family. The state strictly advances
/// (Zero consumes `dim` virtual draws so mixed-family experiments stay
/// stream-aligned).
inline std::pair<Vector, RngState> sample(const NoiseSpec& spec, RngState state) {
  Vector out(spec.dim);
  switch (spec.family) {
    case NoiseFamily::Zero:
      out.setZero();
      state.counter += static_cast<std::uint64_t>(spec.dim);
      break;
    case NoiseFamily::Uniform:
      for (int i = 0; i < spec.dim; ++i)
        out[i] = spec.half_width * (2.0 * next_uniform01(state) - 1.0);
      break;
    case NoiseFamily::StudentT:
      for (int i = 0; i < spec.dim; ++i)
        out[i] = spec.scale * detail::student_t_draw(spec.dof, state);
      break;
  }
  return {std::move(out), state};
}

struct MomentEstimate {
  double value = 0.0;
  /// Set when the population moment does not exist (StudentT, order >= dof):
  /// the estimate is still computed but diverges as n grows.
  bool diverges = false;
};

/// (1/n) sum ||xi_i||^order over n draws from the stream with the given seed.
inline MomentEstimate empirical_moment(const NoiseSpec& spec, double order, std::int64_t n,
                                       std::uint64_t seed) {
  if (n < 1000) throw std::invalid_argument("empirical_moment requires n >= 1000");
  if (!(order > 0)) throw std::invalid_argument("empirical_moment requires order > 0");
  RngState state{seed, 0};
  long double acc = 0.0L;
  for (std::int64_t i = 0; i < n; ++i) {
    auto [xi, next] = sample(spec, state);
    state = next;
    acc += std::pow(static_cast<long double>(xi.norm()), static_cast<long double>(order));
  }
  MomentEstimate est;
  est.value = static_cast<double>(acc / static_cast<long double>(n));
  est.diverges = spec.family == NoiseFamily::StudentT && order >= spec.dof;
  return est;
}

}  // namespace descent
