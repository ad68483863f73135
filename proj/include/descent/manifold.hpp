#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace descent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Unit-norm tolerance for sphere points (~100x double epsilon at O(1) coords).
inline constexpr double kPointNormTol = 1e-12;
/// Tangency tolerance: |<t, p>| <= kTangencyTol * max(1, ||t||).
inline constexpr double kTangencyTol = 1e-10;

/// A manifold instance: Euclidean n-space or the unit sphere S^{n-1}
/// embedded in n-space. `dim` is always the ambient dimension.
struct ManifoldKind {
  enum class Family { Euclidean, Sphere };

  Family family = Family::Euclidean;
  int dim = 1;

  static ManifoldKind euclidean(int dim) {
    if (dim < 1) throw std::invalid_argument("euclidean manifold requires dim >= 1");
    return {Family::Euclidean, dim};
  }

  static ManifoldKind sphere(int ambient_dim) {
    if (ambient_dim < 2) throw std::invalid_argument("sphere manifold requires ambient_dim >= 2");
    return {Family::Sphere, ambient_dim};
  }

  bool is_sphere() const { return family == Family::Sphere; }
  bool is_euclidean() const { return family == Family::Euclidean; }

  friend bool operator==(const ManifoldKind& a, const ManifoldKind& b) {
    return a.family == b.family && a.dim == b.dim;
  }

  std::string name() const {
    return (is_sphere() ? "sphere(" : "euclidean(") + std::to_string(dim) + ")";
  }
};

/// A point in ambient coordinates, tagged with the manifold it lives on.
/// Sphere points satisfy | ||x|| - 1 | <= kPointNormTol; the constructor
/// rejects anything further off the manifold than that.
struct ManifoldPoint {
  ManifoldKind manifold;
  Vector coords;

  ManifoldPoint(ManifoldKind m, Vector c) : manifold(m), coords(std::move(c)) {
    if (coords.size() != manifold.dim)
      throw std::invalid_argument("point has " + std::to_string(coords.size()) +
                                  " coordinates, manifold is " + manifold.name());
    if (manifold.is_sphere() && std::abs(coords.norm() - 1.0) > kPointNormTol)
      throw std::invalid_argument("sphere point is not unit norm: ||x|| = " +
                                  std::to_string(coords.norm()));
  }
};

/// A tangent vector at `base`, stored in ambient coordinates. On the sphere
/// it must be orthogonal to the base point within kTangencyTol.
struct TangentVector {
  ManifoldPoint base;
  Vector coords;

  TangentVector(ManifoldPoint b, Vector c) : base(std::move(b)), coords(std::move(c)) {
    if (coords.size() != base.coords.size())
      throw std::invalid_argument("tangent vector dimension does not match base point");
    if (base.manifold.is_sphere()) {
      const double overlap = std::abs(coords.dot(base.coords));
      if (overlap > kTangencyTol * std::max(1.0, coords.norm()))
        throw std::invalid_argument("tangent vector is not orthogonal to sphere base point");
    }
  }
};

namespace detail {
inline void require_same_base(const ManifoldPoint& p, const TangentVector& t,
                              const char* what) {
  if (!(t.base.manifold == p.manifold) || t.base.coords != p.coords)
    throw std::invalid_argument(std::string(what) + ": tangent vector is based at a different point");
}
}  // namespace detail

/// Orthogonal projection of an ambient vector onto T_p M.
/// Sphere: v - <v,p> p. Euclidean: identity.
inline TangentVector project_to_tangent(const ManifoldPoint& p, const Vector& v) {
  if (v.size() != p.coords.size())
    throw std::invalid_argument("project_to_tangent: vector dimension does not match point");
  if (p.manifold.is_sphere()) return {p, v - v.dot(p.coords) * p.coords};
  return {p, v};
}

/// Exponential map. Sphere: great-circle motion
/// cos(||t||) p + sin(||t||) t/||t||, renormalized; Euclidean: p + t.
inline ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& t) {
  detail::require_same_base(p, t, "exp_map");
  if (p.manifold.is_euclidean()) return {p.manifold, p.coords + t.coords};
  const double norm = t.coords.norm();
  if (norm == 0.0) return p;
  Vector out = std::cos(norm) * p.coords + (std::sin(norm) / norm) * t.coords;
  out /= out.norm();
  return {p.manifold, std::move(out)};
}

/// First-order retraction. Sphere: (p + t) / ||p + t||; Euclidean: p + t.
/// Throws if p + t is (numerically) the origin, i.e. an antipodal overshoot.
inline ManifoldPoint retract_normalize(const ManifoldPoint& p, const TangentVector& t) {
  detail::require_same_base(p, t, "retract_normalize");
  Vector sum = p.coords + t.coords;
  if (p.manifold.is_euclidean()) return {p.manifold, std::move(sum)};
  const double norm = sum.norm();
  if (norm <= kPointNormTol)
    throw std::domain_error("retract_normalize: p + t is degenerate (antipodal overshoot)");
  sum /= norm;
  return {p.manifold, std::move(sum)};
}

/// Geodesic distance. Sphere: arccos of the clamped dot product;
/// Euclidean: ||p - q||.
inline double geodesic_distance(const ManifoldPoint& p, const ManifoldPoint& q) {
  if (!(p.manifold == q.manifold))
    throw std::invalid_argument("geodesic_distance: points live on different manifolds");
  if (p.manifold.is_euclidean()) return (p.coords - q.coords).norm();
  // Clamp before arccos: dot products of unit vectors drift past +-1 in FP.
  const double dot = std::clamp(p.coords.dot(q.coords), -1.0, 1.0);
  return std::acos(dot);
}

/// Riemannian metric at p: both instances use the ambient inner product.
inline double inner(const ManifoldPoint& p, const TangentVector& u, const TangentVector& v) {
  detail::require_same_base(p, u, "inner");
  detail::require_same_base(p, v, "inner");
  return u.coords.dot(v.coords);
}

inline TangentVector zero_tangent(const ManifoldPoint& p) {
  return {p, Vector::Zero(p.coords.size())};
}

inline TangentVector scaled(const TangentVector& t, double s) {
  return {t.base, s * t.coords};
}

}  // namespace descent
