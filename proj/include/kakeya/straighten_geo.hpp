#pragma once

// Charts in which the geodesics of a space form are straight lines:
// the gnomonic projection of the lower hemisphere onto {x_{d+1} = -1} and the
// Beltrami-Klein projection of the hyperboloid onto {x_{d+1} = 1}.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kakeya/space_forms.hpp"

namespace kakeya {

/// Gnomonic charts reject points with x_{d+1} > -kGnomonicMargin.
inline constexpr double kGnomonicMargin = 0.05;
/// klein_inv rejects |w| > kKleinRadiusGuard.
inline constexpr double kKleinRadiusGuard = 0.99;

// ---------------------------------------------------------------------------
// Closed-form chart maps.

template <class Scalar>
VectorX<Scalar> gnomonic_fwd(const SFPoint<Scalar>& p) {
  const Eigen::Index d = p.coords.size() - 1;
  Scalar last = p.coords(d);
  if (!(last <= Scalar(-kGnomonicMargin)))
    throw DomainError("gnomonic chart needs x_{d+1} <= -0.05 (lower hemisphere)");
  return -p.coords.head(d) / last;
}

template <class Scalar>
SFPoint<Scalar> gnomonic_inv(const VectorX<Scalar>& u) {
  using std::sqrt;
  const Eigen::Index d = u.size();
  Scalar s = sqrt(u.squaredNorm() + Scalar(1));
  VectorX<Scalar> x(d + 1);
  x.head(d) = u / s;
  x(d) = Scalar(-1) / s;
  return {x};
}

template <class Scalar>
VectorX<Scalar> klein_fwd(const SFPoint<Scalar>& p) {
  const Eigen::Index d = p.coords.size() - 1;
  Scalar last = p.coords(d);
  if (!(last > Scalar(0))) throw DomainError("Klein chart needs a point on the upper hyperboloid sheet");
  return p.coords.head(d) / last;
}

template <class Scalar>
SFPoint<Scalar> klein_inv(const VectorX<Scalar>& w) {
  using std::sqrt;
  Scalar r2 = w.squaredNorm();
  if (!(r2 <= Scalar(kKleinRadiusGuard * kKleinRadiusGuard)))
    throw DomainError("Klein point outside the numerical guard |w| <= 0.99");
  const Eigen::Index d = w.size();
  Scalar s = sqrt(Scalar(1) - r2);
  VectorX<Scalar> x(d + 1);
  x.head(d) = w / s;
  x(d) = Scalar(1) / s;
  return {x};
}

/// g_ij = delta_ij / (1 - |w|^2) + w_i w_j / (1 - |w|^2)^2
template <class Scalar>
MatrixX<Scalar> klein_metric(const VectorX<Scalar>& w) {
  Scalar r2 = w.squaredNorm();
  if (!(r2 < Scalar(1))) throw DomainError("Klein metric is defined only inside the unit ball");
  Scalar a = Scalar(1) / (Scalar(1) - r2);
  const Eigen::Index d = w.size();
  return a * MatrixX<Scalar>::Identity(d, d) + (a * a) * w * w.transpose();
}

/// Round metric pulled back through gnomonic_inv:
/// g = ((1 + |u|^2) I - u u^T) / (1 + |u|^2)^2
template <class Scalar>
MatrixX<Scalar> gnomonic_metric(const VectorX<Scalar>& u) {
  Scalar s = Scalar(1) + u.squaredNorm();
  const Eigen::Index d = u.size();
  return (s * MatrixX<Scalar>::Identity(d, d) - u * u.transpose()) / (s * s);
}

// ---------------------------------------------------------------------------

enum class ChartKind { Gnomonic, Klein, Identity };

/// Straightening chart of a space form, centered at (0,...,0,-1) on the sphere and
/// (0,...,0,1) on the hyperboloid. Other centers: compose with isometry_to_center.
struct ChartMap {
  ChartKind kind = ChartKind::Identity;
  int dim = 2;

  static ChartMap for_model(const SpaceForm& sf);
  SpaceForm model() const;

  Eigen::VectorXd forward(const SFPoint<double>& p) const;
  SFPoint<double> inverse(const Eigen::VectorXd& u) const;
  /// d x ambient derivative of `forward` at p (acts on tangent vectors).
  Eigen::MatrixXd forward_jacobian(const SFPoint<double>& p) const;
  /// ambient x d derivative of `inverse` at u.
  Eigen::MatrixXd inverse_jacobian(const Eigen::VectorXd& u) const;
  /// Model metric in chart coordinates.
  Eigen::MatrixXd metric(const Eigen::VectorXd& u) const;
  /// Riemannian volume density sqrt(det g) in chart coordinates.
  double volume_density(const Eigen::VectorXd& u) const;
  bool in_domain(const Eigen::VectorXd& u) const;
};

/// Max distance of the points (rows) to their best-fit affine k-flat, divided by
/// the extent of the points along their first principal axis. 0 for a single
/// point or coincident points.
double flat_fit_residual(const Eigen::MatrixXd& points, int k);
inline double collinearity_residual(const Eigen::MatrixXd& points) { return flat_fit_residual(points, 1); }

struct StraightenedPolyline {
  Eigen::MatrixXd images;  // one chart point per row
  double residual = 0.0;   // collinearity residual of the images
};

StraightenedPolyline straighten_geodesic(const SpaceForm& sf, const SFGeodesic<double>& geo, const ChartMap& chart,
                                         const std::vector<double>& samples);
/// Chart images of arbitrary model points, one per row.
Eigen::MatrixXd chart_images(const ChartMap& chart, const std::vector<SFPoint<double>>& points);

/// F(x~, x_d) = (x~, 1) / x_d. Needs |x_d| >= 1e-6.
Eigen::VectorXd projective_nikodym_to_kakeya(const Eigen::VectorXd& x);

struct BilipschitzBounds {
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  std::size_t n_pairs = 0;
};

/// Extremes of |chart(p) - chart(q)| / dist(p, q) over n seeded random pairs in the
/// geodesic ball of `radius` about the chart center.
BilipschitzBounds bilipschitz_scan(const ChartMap& chart, double radius, std::size_t n_pairs, std::uint64_t seed);

/// Length of the straight chord from wp to wq under the Klein metric
/// (composite 4-point Gauss-Legendre, `panels` panels).
double klein_segment_length(const Eigen::VectorXd& wp, const Eigen::VectorXd& wq, int panels = 32);

/// (z, e): arclength z along the reference geodesic and angle e in [0, 2pi).
struct LineSpaceElement {
  double z = 0.0;
  double e = 0.0;
};

struct LineImage {
  double rho = 0.0;  // signed position along the image line of the reference geodesic
  double eta = 0.0;  // direction angle of the image line, in [0, 2pi)
};

/// Line-space map for a surface (d = 2). The reference geodesic must start at the
/// chart center; angles e are measured at the center from the first chart axis,
/// carried to gamma0(z) by parallel transport, and eta is the chart angle of the
/// straight image of the resulting geodesic. Requires |z| <= max_z.
LineImage line_space_map(const SpaceForm& surface, const SFGeodesic<double>& gamma0, const LineSpaceElement& el,
                         double max_z = 1.0);

}  // namespace kakeya
