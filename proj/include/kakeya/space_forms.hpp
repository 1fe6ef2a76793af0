#pragma once

// Constant-curvature model spaces in ambient coordinates:
//   Euclidean  R^d
//   Sphere     S^d = {|x| = 1} in R^{d+1}
//   Hyperbolic H^d = {x1^2 + ... + xd^2 - x_{d+1}^2 = -1, x_{d+1} > 0} in R^{d,1}
// Curvature is +1, -1 or 0; other curvatures are handled by rescaling the metric.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kakeya/errors.hpp"

namespace kakeya {

enum class Model { Euclidean, Sphere, Hyperbolic };

std::string to_string(Model m);
Model model_from_string(const std::string& name);

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct SpaceForm {
  Model kind = Model::Euclidean;
  int dim = 2;

  SpaceForm() = default;
  SpaceForm(Model k, int d) : kind(k), dim(d) {
    if (d < 1) throw InvalidArgument("space form dimension must be positive");
  }
  int ambient_dim() const { return kind == Model::Euclidean ? dim : dim + 1; }
  double curvature() const { return kind == Model::Sphere ? 1.0 : kind == Model::Hyperbolic ? -1.0 : 0.0; }
};

inline constexpr double kConstructionTol = 1e-12;
inline constexpr double kPropagationTol = 1e-10;

template <class Scalar = double>
struct SFPoint {
  VectorX<Scalar> coords;
};

template <class Scalar = double>
struct SFTangent {
  SFPoint<Scalar> base;
  VectorX<Scalar> vector;
};

/// Unit-speed geodesic s -> exp_base(s * direction).
template <class Scalar = double>
struct SFGeodesic {
  SFPoint<Scalar> base;
  VectorX<Scalar> direction;
};

/// Euclidean dot product, or the Minkowski product u1v1 + ... + udvd - u_{d+1}v_{d+1}
/// on the hyperboloid model.
template <class Scalar, class A, class B>
Scalar inner(const SpaceForm& sf, const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  Scalar s = u.dot(v);
  if (sf.kind == Model::Hyperbolic) {
    const auto last = u.size() - 1;
    s -= Scalar(2) * u(last) * v(last);
  }
  return s;
}

template <class Scalar, class A>
Scalar metric_norm(const SpaceForm& sf, const Eigen::MatrixBase<A>& v) {
  using std::sqrt;
  Scalar n2 = inner<Scalar>(sf, v, v);
  return sqrt(n2 > Scalar(0) ? n2 : Scalar(0));
}

/// Deviation from the model quadric: |<p,p> - 1| (sphere), |<p,p>_M + 1| (hyperboloid),
/// or 0 (Euclidean).
template <class Scalar>
Scalar quadric_residual(const SpaceForm& sf, const VectorX<Scalar>& p) {
  using std::abs;
  switch (sf.kind) {
    case Model::Sphere: return abs(p.squaredNorm() - Scalar(1));
    case Model::Hyperbolic: return abs(inner<Scalar>(sf, p, p) + Scalar(1));
    default: return Scalar(0);
  }
}

template <class Scalar>
bool on_model(const SpaceForm& sf, const VectorX<Scalar>& p, double tol = kConstructionTol) {
  if (p.size() != sf.ambient_dim()) return false;
  if (sf.kind == Model::Hyperbolic && !(p(p.size() - 1) > Scalar(0))) return false;
  Scalar scale = sf.kind == Model::Hyperbolic ? std::max(Scalar(1), p.squaredNorm()) : Scalar(1);
  return quadric_residual(sf, p) <= Scalar(tol) * scale;
}

template <class Scalar = double>
SFPoint<Scalar> make_point(const SpaceForm& sf, VectorX<Scalar> coords, double tol = kConstructionTol) {
  if (coords.size() != sf.ambient_dim())
    throw InvalidArgument("point has " + std::to_string(coords.size()) + " coordinates, model needs " +
                          std::to_string(sf.ambient_dim()));
  if (!on_model(sf, coords, tol)) throw InvalidArgument("point does not lie on the " + to_string(sf.kind) + " model");
  return {std::move(coords)};
}

/// Chart center: (0,...,0,-1) on the sphere, (0,...,0,1) on the hyperboloid, origin otherwise.
template <class Scalar = double>
SFPoint<Scalar> center(const SpaceForm& sf) {
  VectorX<Scalar> c = VectorX<Scalar>::Zero(sf.ambient_dim());
  if (sf.kind == Model::Sphere) c(sf.dim) = Scalar(-1);
  if (sf.kind == Model::Hyperbolic) c(sf.dim) = Scalar(1);
  return {c};
}

template <class Scalar>
bool is_tangent(const SpaceForm& sf, const SFPoint<Scalar>& p, const VectorX<Scalar>& v, double tol = kConstructionTol) {
  using std::abs;
  if (v.size() != sf.ambient_dim()) return false;
  if (sf.kind == Model::Euclidean) return true;
  Scalar scale = std::max(Scalar(1), v.norm() * p.coords.norm());
  return abs(inner<Scalar>(sf, v, p.coords)) <= Scalar(tol) * scale;
}

/// Removes the normal component of v at p (p is its own normal in both curved models).
template <class Scalar>
VectorX<Scalar> project_tangent(const SpaceForm& sf, const SFPoint<Scalar>& p, const VectorX<Scalar>& v) {
  if (sf.kind == Model::Euclidean) return v;
  // <p,p> = 1 on the sphere and -1 on the hyperboloid.
  Scalar pp = inner<Scalar>(sf, p.coords, p.coords);
  return v - (inner<Scalar>(sf, v, p.coords) / pp) * p.coords;
}

template <class Scalar = double>
SFTangent<Scalar> make_tangent(const SpaceForm& sf, const SFPoint<Scalar>& p, VectorX<Scalar> v,
                               double tol = kConstructionTol) {
  if (!is_tangent(sf, p, v, tol)) throw InvalidArgument("vector is not tangent to the model at the base point");
  return {p, std::move(v)};
}

/// Geodesic through p with initial velocity v rescaled to unit metric speed.
template <class Scalar = double>
SFGeodesic<Scalar> make_geodesic(const SpaceForm& sf, const SFPoint<Scalar>& p, const VectorX<Scalar>& v) {
  if (!is_tangent(sf, p, v, kPropagationTol)) throw InvalidArgument("geodesic direction is not tangent");
  Scalar n = metric_norm<Scalar>(sf, v);
  if (!(n > Scalar(1e-14))) throw InvalidArgument("geodesic direction must be nonzero (and spacelike)");
  return {p, v / n};
}

template <class Scalar>
SFPoint<Scalar> exp_map(const SpaceForm& sf, const SFTangent<Scalar>& v) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  if (!is_tangent(sf, v.base, v.vector, kPropagationTol)) throw InvalidArgument("exp_map: vector is not tangent");
  const VectorX<Scalar>& p = v.base.coords;
  Scalar r = metric_norm<Scalar>(sf, v.vector);
  if (sf.kind == Model::Euclidean) return {p + v.vector};
  if (r == Scalar(0)) return v.base;
  VectorX<Scalar> u = v.vector / r;
  if (sf.kind == Model::Sphere) return {cos(r) * p + sin(r) * u};
  return {cosh(r) * p + sinh(r) * u};
}

template <class Scalar>
SFPoint<Scalar> exp_map(const SpaceForm& sf, const SFPoint<Scalar>& p, const VectorX<Scalar>& v) {
  return exp_map(sf, SFTangent<Scalar>{p, v});
}

/// Sphere geodesics are restricted to |s| < pi (injectivity guard).
template <class Scalar>
SFPoint<Scalar> geodesic_eval(const SpaceForm& sf, const SFGeodesic<Scalar>& geo, Scalar s) {
  using std::abs;
  if (sf.kind == Model::Sphere && !(abs(s) < Scalar(std::numbers::pi)))
    throw DomainError("geodesic parameter outside the injectivity guard |s| < pi");
  return exp_map(sf, SFTangent<Scalar>{geo.base, s * geo.direction});
}

/// gamma'(s) of a unit-speed geodesic.
template <class Scalar>
VectorX<Scalar> geodesic_velocity(const SpaceForm& sf, const SFGeodesic<Scalar>& geo, Scalar s) {
  using std::cos;
  using std::cosh;
  using std::sin;
  using std::sinh;
  const VectorX<Scalar>& p = geo.base.coords;
  const VectorX<Scalar>& u = geo.direction;
  switch (sf.kind) {
    case Model::Sphere: return -sin(s) * p + cos(s) * u;
    case Model::Hyperbolic: return sinh(s) * p + cosh(s) * u;
    default: return u;
  }
}

/// Geodesic distance. The inner product is validated (1e-9 slack) and the value is
/// computed from chord lengths, which stays accurate for nearby and far points alike.
template <class Scalar>
Scalar distance(const SpaceForm& sf, const SFPoint<Scalar>& p, const SFPoint<Scalar>& q) {
  using std::asinh;
  using std::atan2;
  using std::sqrt;
  constexpr double kSlack = 1e-9;
  if (p.coords.size() != q.coords.size()) throw InvalidArgument("distance: points from different models");
  switch (sf.kind) {
    case Model::Euclidean: return (p.coords - q.coords).norm();
    case Model::Sphere: {
      Scalar c = p.coords.dot(q.coords);
      if (c > Scalar(1 + kSlack) || c < Scalar(-1 - kSlack))
        throw DomainError("distance: inner product outside [-1, 1] beyond slack");
      Scalar minus = (p.coords - q.coords).norm();
      Scalar plus = (p.coords + q.coords).norm();
      return Scalar(2) * atan2(minus, plus);
    }
    case Model::Hyperbolic: {
      Scalar c = -inner<Scalar>(sf, p.coords, q.coords);
      if (c < Scalar(1 - kSlack)) throw DomainError("distance: Minkowski product above -1 beyond slack");
      VectorX<Scalar> diff = p.coords - q.coords;
      Scalar chord2 = inner<Scalar>(sf, diff, diff);  // = 2(c - 1) >= 0
      return Scalar(2) * asinh(sqrt(chord2 > Scalar(0) ? chord2 : Scalar(0)) / Scalar(2));
    }
  }
  return Scalar(0);
}

/// Transports v (tangent at geo(0)) to geo(s): the component along the geodesic
/// rotates (or boosts) with gamma', the orthogonal complement is carried unchanged.
template <class Scalar>
SFTangent<Scalar> parallel_transport(const SpaceForm& sf, const SFGeodesic<Scalar>& geo, const VectorX<Scalar>& v,
                                     Scalar s) {
  if (!is_tangent(sf, geo.base, v, kPropagationTol)) throw InvalidArgument("parallel_transport: v is not tangent at geo(0)");
  SFPoint<Scalar> q = geodesic_eval(sf, geo, s);
  if (sf.kind == Model::Euclidean) return {q, v};
  Scalar a = inner<Scalar>(sf, v, geo.direction);
  VectorX<Scalar> w = v - a * geo.direction;
  return {q, a * geodesic_velocity(sf, geo, s) + w};
}

/// Geodesic equation in ambient coordinates integrated with classical RK4; the
/// state is projected back onto the quadric and its tangent space after each
/// step. Returns samples at s = k * (length / steps), k = 0..steps.
template <class Scalar>
std::vector<SFPoint<Scalar>> integrate_geodesic(const SpaceForm& sf, const SFGeodesic<Scalar>& geo, Scalar length,
                                                int steps) {
  using std::sqrt;
  if (steps < 1) throw InvalidArgument("integrate_geodesic: steps must be positive");
  const Eigen::Index n = sf.ambient_dim();
  VectorX<Scalar> x = geo.base.coords, v = geo.direction;
  auto accel = [&](const VectorX<Scalar>& pos, const VectorX<Scalar>& vel) -> VectorX<Scalar> {
    switch (sf.kind) {
      case Model::Sphere: return -vel.squaredNorm() * pos;
      case Model::Hyperbolic: return inner<Scalar>(sf, vel, vel) * pos;
      default: return VectorX<Scalar>::Zero(n);
    }
  };
  const Scalar h = length / Scalar(steps);
  std::vector<SFPoint<Scalar>> out;
  out.reserve(steps + 1);
  out.push_back({x});
  for (int k = 0; k < steps; ++k) {
    VectorX<Scalar> k1x = v, k1v = accel(x, v);
    VectorX<Scalar> k2x = v + Scalar(0.5) * h * k1v, k2v = accel(x + Scalar(0.5) * h * k1x, k2x);
    VectorX<Scalar> k3x = v + Scalar(0.5) * h * k2v, k3v = accel(x + Scalar(0.5) * h * k2x, k3x);
    VectorX<Scalar> k4x = v + h * k3v, k4v = accel(x + h * k3x, k4x);
    x += h / Scalar(6) * (k1x + Scalar(2) * k2x + Scalar(2) * k3x + k4x);
    v += h / Scalar(6) * (k1v + Scalar(2) * k2v + Scalar(2) * k3v + k4v);
    if (sf.kind == Model::Sphere) {
      x.normalize();
    } else if (sf.kind == Model::Hyperbolic) {
      x /= sqrt(-inner<Scalar>(sf, x, x));
    }
    v = project_tangent(sf, SFPoint<Scalar>{x}, v);
    out.push_back({x});
  }
  return out;
}

/// Samples exp_p(sum_i a_i b_i) over the lattice of coefficient vectors a.
/// The basis (columns) must be tangent at p and linearly independent with k < d.
template <class Scalar>
std::vector<SFPoint<Scalar>> geodesic_submanifold_sample(const SpaceForm& sf, const SFPoint<Scalar>& p,
                                                         const MatrixX<Scalar>& basis,
                                                         const std::vector<VectorX<Scalar>>& lattice) {
  const Eigen::Index k = basis.cols();
  if (k < 1 || k >= sf.dim) throw InvalidArgument("submanifold dimension must satisfy 1 <= k < d");
  if (basis.rows() != sf.ambient_dim()) throw InvalidArgument("basis vectors have the wrong length");
  for (Eigen::Index j = 0; j < k; ++j)
    if (!is_tangent(sf, p, VectorX<Scalar>(basis.col(j)), kPropagationTol))
      throw InvalidArgument("basis vector " + std::to_string(j) + " is not tangent at p");
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(basis);
  const auto& sv = svd.singularValues();
  if (!(sv(k - 1) > Scalar(1e-10) * std::max(Scalar(1), sv(0))))
    throw InvalidArgument("submanifold basis is linearly dependent");
  std::vector<SFPoint<Scalar>> out;
  out.reserve(lattice.size());
  for (const auto& a : lattice) {
    if (a.size() != k) throw InvalidArgument("lattice point has the wrong number of coefficients");
    VectorX<Scalar> v = basis * a;
    if (sf.kind == Model::Sphere && !(metric_norm<Scalar>(sf, v) < Scalar(std::numbers::pi)))
      throw DomainError("lattice point outside the injectivity guard");
    out.push_back(exp_map(sf, SFTangent<Scalar>{p, v}));
  }
  return out;
}

/// Ambient isometry (reflection on the sphere, Lorentz boost on the hyperboloid,
/// translation handled separately for Euclidean) taking p to the chart center.
/// For Euclidean models the returned matrix is the identity.
template <class Scalar = double>
MatrixX<Scalar> isometry_to_center(const SpaceForm& sf, const SFPoint<Scalar>& p) {
  const Eigen::Index n = sf.ambient_dim();
  MatrixX<Scalar> m = MatrixX<Scalar>::Identity(n, n);
  if (sf.kind == Model::Sphere) {
    VectorX<Scalar> w = p.coords - center<Scalar>(sf).coords;
    Scalar ww = w.squaredNorm();
    if (ww > Scalar(0)) m -= Scalar(2) * w * w.transpose() / ww;
  } else if (sf.kind == Model::Hyperbolic) {
    const Eigen::Index d = sf.dim;
    VectorX<Scalar> x = p.coords.head(d);
    Scalar x0 = p.coords(d);
    m.topLeftCorner(d, d) += x * x.transpose() / (Scalar(1) + x0);
    m.topRightCorner(d, 1) = -x;
    m.bottomLeftCorner(1, d) = -x.transpose();
    m(d, d) = x0;
  }
  return m;
}

/// Point at geodesic distance `radius * U^(1/d)` from the chart center in a uniformly
/// random direction (uniform in the tangent ball, not in volume).
template <class Scalar, class Rng>
SFPoint<Scalar> random_point_near_center(const SpaceForm& sf, Scalar radius, Rng& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  VectorX<Scalar> dir = VectorX<Scalar>::Zero(sf.ambient_dim());
  for (int i = 0; i < sf.dim; ++i) dir(i) = Scalar(gauss(rng));
  dir.normalize();
  Scalar r = radius * Scalar(std::pow(unif(rng), 1.0 / sf.dim));
  return exp_map(sf, SFTangent<Scalar>{center<Scalar>(sf), r * dir});
}

template <class Scalar, class Rng>
VectorX<Scalar> random_unit_tangent(const SpaceForm& sf, const SFPoint<Scalar>& p, Rng& rng) {
  std::normal_distribution<double> gauss;
  for (;;) {
    VectorX<Scalar> v(sf.ambient_dim());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Scalar(gauss(rng));
    v = project_tangent(sf, p, v);
    Scalar n = metric_norm<Scalar>(sf, v);
    if (n > Scalar(1e-6)) return v / n;
  }
}

/// CSV with a header row x1..xn and one point per row.
void write_point_cloud_csv(const std::string& path, const std::vector<SFPoint<double>>& points);

}  // namespace kakeya
