#pragma once

#include "descent/manifold.hpp"
#include "descent/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace descent {

enum class ObjectiveKind { SphereHeight, Quadratic, HalfSquare };

/// Largest eigenvalue of a symmetric PSD matrix by plain power iteration
/// with Rayleigh-quotient convergence. Deterministic start.
inline double power_iteration_lambda_max(const Matrix& a) {
  const auto n = a.rows();
  Vector v = Vector::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] += 1e-3 * static_cast<double>(i);  // break symmetry
  v /= v.norm();
  double lambda = v.dot(a * v);
  for (int iter = 0; iter < 200000; ++iter) {
    Vector av = a * v;
    const double norm = av.norm();
    if (norm == 0.0) return 0.0;
    v = av / norm;
    const double next = v.dot(a * v);
    if (std::abs(next - lambda) <= 1e-15 * std::max(1.0, std::abs(next))) return next;
    lambda = next;
  }
  return lambda;
}

/// Evaluable scalar field with an analytic ambient gradient. Three built-in
/// families:
///   SphereHeight  f(x) = x_n   (the last ambient coordinate)
///   Quadratic     f(x) = 1/2 <Ax, x> - <b, x>,  A symmetric positive definite
///   HalfSquare    f(x) = 1/2 ||x||^2
/// Extension point: add a kind, its closed forms in eval/euclidean_gradient,
/// and its minimizer/Lipschitz data below.
class Objective {
 public:
  static Objective sphere_height(int ambient_dim = 3) {
    if (ambient_dim < 2) throw std::invalid_argument("sphere_height requires ambient_dim >= 2");
    Objective f;
    f.kind_ = ObjectiveKind::SphereHeight;
    f.dim_ = ambient_dim;
    return f;
  }

  static Objective quadratic(Matrix a, Vector b) {
    if (a.rows() != a.cols() || a.rows() != b.size() || b.size() < 1)
      throw std::invalid_argument("quadratic requires square A matching b");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("quadratic A is not symmetric");
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("quadratic A is not positive definite");
    Objective f;
    f.kind_ = ObjectiveKind::Quadratic;
    f.dim_ = static_cast<int>(b.size());
    f.minimizer_ = llt.solve(b);
    f.a_ = std::move(a);
    f.b_ = std::move(b);
    if ((f.a_ * *f.minimizer_ - f.b_).norm() > 1e-8)
      throw std::invalid_argument("quadratic minimizer solve failed the gradient check");
    f.lambda_max_ = power_iteration_lambda_max(f.a_);
    return f;
  }

  static Objective half_square(int dim) {
    if (dim < 1) throw std::invalid_argument("half_square requires dim >= 1");
    Objective f;
    f.kind_ = ObjectiveKind::HalfSquare;
    f.dim_ = dim;
    return f;
  }

  ObjectiveKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Matrix& a() const { require(kind_ == ObjectiveKind::Quadratic, "A"); return a_; }
  const Vector& b() const { require(kind_ == ObjectiveKind::Quadratic, "b"); return b_; }

  std::string name() const {
    switch (kind_) {
      case ObjectiveKind::SphereHeight: return "sphere_height";
      case ObjectiveKind::Quadratic: return "quadratic";
      case ObjectiveKind::HalfSquare: return "half_square";
    }
    return "?";
  }

  /// Known minimizer on the given manifold, when one exists there.
  std::optional<ManifoldPoint> known_minimizer(const ManifoldKind& m) const {
    if (m.dim != dim_) return std::nullopt;
    switch (kind_) {
      case ObjectiveKind::SphereHeight: {
        if (!m.is_sphere()) return std::nullopt;  // unbounded below on R^n
        Vector south = Vector::Zero(dim_);
        south[dim_ - 1] = -1.0;
        return ManifoldPoint(m, std::move(south));
      }
      case ObjectiveKind::Quadratic:
        if (!m.is_euclidean()) return std::nullopt;
        return ManifoldPoint(m, *minimizer_);
      case ObjectiveKind::HalfSquare:
        if (!m.is_euclidean()) return std::nullopt;
        return ManifoldPoint(m, Vector::Zero(dim_));
    }
    return std::nullopt;
  }

  /// Known gradient Lipschitz constant on the given manifold, if any.
  std::optional<double> known_lipschitz(const ManifoldKind& m) const {
    switch (kind_) {
      case ObjectiveKind::SphereHeight: return m.is_sphere() ? std::optional<double>(1.0) : std::nullopt;
      case ObjectiveKind::Quadratic: return lambda_max_;
      case ObjectiveKind::HalfSquare: return 1.0;
    }
    return std::nullopt;
  }

 private:
  Objective() = default;
  static void require(bool ok, const char* field) {
    if (!ok) throw std::logic_error(std::string("objective has no field ") + field);
  }

  ObjectiveKind kind_ = ObjectiveKind::HalfSquare;
  int dim_ = 1;
  Matrix a_;
  Vector b_;
  std::optional<Vector> minimizer_;
  std::optional<double> lambda_max_;
};

namespace detail {
inline void require_dim(const Objective& f, Eigen::Index n, const char* op) {
  if (n != f.dim())
    throw std::invalid_argument(std::string(op) + ": point dimension " + std::to_string(n) +
                                " does not match objective dimension " + std::to_string(f.dim()));
}

inline double eval_coords(const Objective& f, const Vector& x) {
  switch (f.kind()) {
    case ObjectiveKind::SphereHeight: return x[x.size() - 1];
    case ObjectiveKind::Quadratic: return 0.5 * (f.a() * x).dot(x) - f.b().dot(x);
    case ObjectiveKind::HalfSquare: return 0.5 * x.squaredNorm();
  }
  return 0.0;
}

inline Vector gradient_coords(const Objective& f, const Vector& x) {
  switch (f.kind()) {
    case ObjectiveKind::SphereHeight: {
      Vector g = Vector::Zero(x.size());
      g[x.size() - 1] = 1.0;
      return g;
    }
    case ObjectiveKind::Quadratic: return f.a() * x - f.b();
    case ObjectiveKind::HalfSquare: return x;
  }
  return Vector();
}
}  // namespace detail

inline double eval(const Objective& f, const ManifoldPoint& x) {
  detail::require_dim(f, x.coords.size(), "eval");
  return detail::eval_coords(f, x.coords);
}

inline Vector euclidean_gradient(const Objective& f, const ManifoldPoint& x) {
  detail::require_dim(f, x.coords.size(), "euclidean_gradient");
  return detail::gradient_coords(f, x.coords);
}

/// Ambient gradient projected onto T_x M; equals the ambient gradient on
/// Euclidean manifolds.
inline TangentVector riemannian_gradient(const Objective& f, const ManifoldPoint& x) {
  return project_to_tangent(x, euclidean_gradient(f, x));
}

/// Central differences per ambient coordinate. Verification oracle for the
/// analytic gradients; callers project the result when a tangent comparison
/// is wanted.
inline Vector finite_difference_gradient(const Objective& f, const ManifoldPoint& x, double h = 1e-6) {
  detail::require_dim(f, x.coords.size(), "finite_difference_gradient");
  if (!(h >= 1e-10 && h <= 1e-2))
    throw std::invalid_argument("finite_difference_gradient step h must lie in [1e-10, 1e-2]");
  Vector g(x.coords.size());
  Vector probe = x.coords;
  for (Eigen::Index i = 0; i < probe.size(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double above = detail::eval_coords(f, probe);
    probe[i] = xi - h;
    const double below = detail::eval_coords(f, probe);
    probe[i] = xi;
    g[i] = (above - below) / (2.0 * h);
  }
  return g;
}

namespace detail {
inline ManifoldPoint random_point(const ManifoldKind& m, RngState& state) {
  Vector v(m.dim);
  for (int i = 0; i < m.dim; ++i) v[i] = next_normal(state);
  if (m.is_sphere()) v /= v.norm();
  return {m, std::move(v)};
}

inline TangentVector random_unit_tangent(const ManifoldPoint& p, RngState& state) {
  Vector v(p.coords.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = next_normal(state);
  TangentVector t = project_to_tangent(p, v);
  const double norm = t.coords.norm();
  if (norm < 1e-9) return random_unit_tangent(p, state);
  return scaled(t, 1.0 / norm);
}
}  // namespace detail

/// Estimate of the gradient Lipschitz constant over the manifold.
/// Quadratic: the exact top eigenvalue of A (power iteration). Otherwise
/// the max of ||g(x) - g(y)|| / d(x, y) over sampled pairs, alternating
/// independent pairs with nearby pairs (y = exp_x(delta u), delta log-spread
/// over [1e-4, 1] scales) so both the global and the local ratio suprema are
/// probed. Sampled values are a lower bound on the true constant.
inline double lipschitz_estimate(const Objective& f, const ManifoldKind& m, std::int64_t n_samples,
                                 std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("lipschitz_estimate requires n_samples >= 2");
  if (m.dim != f.dim())
    throw std::invalid_argument("lipschitz_estimate: manifold dimension does not match objective");
  if (f.kind() == ObjectiveKind::Quadratic) return *f.known_lipschitz(m);

  RngState state{seed, 0};
  double best = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    ManifoldPoint x = detail::random_point(m, state);
    ManifoldPoint y = x;
    if (i % 2 == 0) {
      y = detail::random_point(m, state);
    } else {
      const double delta = std::pow(10.0, -4.0 * next_uniform01(state));
      TangentVector dir = detail::random_unit_tangent(x, state);
      y = m.is_sphere() ? exp_map(x, scaled(dir, delta))
                        : ManifoldPoint(m, x.coords + delta * dir.coords);
    }
    const double dist = geodesic_distance(x, y);
    if (dist <= 1e-12) continue;
    const double diff =
        (riemannian_gradient(f, x).coords - riemannian_gradient(f, y).coords).norm();
    best = std::max(best, diff / dist);
  }
  return best;
}

/// Diagnostic for the ratio ||grad f(x)|| * d(x, x*) / (f(x) - f(x*)).
/// Values below 1 mark points where a gradient-dominance argument fails
/// (e.g. the sphere-height function near the north pole). Not an invariant.
inline double gradient_gap_ratio(const Objective& f, const ManifoldPoint& x,
                                 const ManifoldPoint& x_star) {
  const double gap = eval(f, x) - eval(f, x_star);
  if (gap <= 0.0) throw std::invalid_argument("gradient_gap_ratio requires f(x) > f(x*)");
  const double grad_norm = riemannian_gradient(f, x).coords.norm();
  return grad_norm * geodesic_distance(x, x_star) / gap;
}

}  // namespace descent
