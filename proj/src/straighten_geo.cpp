#include "kakeya/straighten_geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace kakeya {

ChartMap ChartMap::for_model(const SpaceForm& sf) {
  switch (sf.kind) {
    case Model::Sphere: return {ChartKind::Gnomonic, sf.dim};
    case Model::Hyperbolic: return {ChartKind::Klein, sf.dim};
    default: return {ChartKind::Identity, sf.dim};
  }
}

SpaceForm ChartMap::model() const {
  switch (kind) {
    case ChartKind::Gnomonic: return {Model::Sphere, dim};
    case ChartKind::Klein: return {Model::Hyperbolic, dim};
    default: return {Model::Euclidean, dim};
  }
}

Eigen::VectorXd ChartMap::forward(const SFPoint<double>& p) const {
  switch (kind) {
    case ChartKind::Gnomonic: return gnomonic_fwd(p);
    case ChartKind::Klein: return klein_fwd(p);
    default: return p.coords;
  }
}

SFPoint<double> ChartMap::inverse(const Eigen::VectorXd& u) const {
  switch (kind) {
    case ChartKind::Gnomonic: return gnomonic_inv(u);
    case ChartKind::Klein: return klein_inv(u);
    default: return {u};
  }
}

Eigen::MatrixXd ChartMap::forward_jacobian(const SFPoint<double>& p) const {
  if (kind == ChartKind::Identity) return Eigen::MatrixXd::Identity(dim, dim);
  const double last = p.coords(dim);
  const double sign = kind == ChartKind::Gnomonic ? -1.0 : 1.0;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim + 1);
  j.leftCols(dim) = (sign / last) * Eigen::MatrixXd::Identity(dim, dim);
  j.col(dim) = (-sign / (last * last)) * p.coords.head(dim);
  return j;
}

Eigen::MatrixXd ChartMap::inverse_jacobian(const Eigen::VectorXd& u) const {
  if (kind == ChartKind::Identity) return Eigen::MatrixXd::Identity(dim, dim);
  // gnomonic: s2 = 1 + |u|^2; Klein: s2 = 1 - |w|^2
  const double s2 = kind == ChartKind::Gnomonic ? 1.0 + u.squaredNorm() : 1.0 - u.squaredNorm();
  const double sq = std::sqrt(s2);
  const double s3 = s2 * sq;
  Eigen::MatrixXd j(dim + 1, dim);
  if (kind == ChartKind::Gnomonic) {
    j.topRows(dim) = Eigen::MatrixXd::Identity(dim, dim) / sq - u * u.transpose() / s3;
  } else {
    j.topRows(dim) = Eigen::MatrixXd::Identity(dim, dim) / sq + u * u.transpose() / s3;
  }
  j.row(dim) = u.transpose() / s3;
  return j;
}

Eigen::MatrixXd ChartMap::metric(const Eigen::VectorXd& u) const {
  switch (kind) {
    case ChartKind::Gnomonic: return gnomonic_metric(u);
    case ChartKind::Klein: return klein_metric(u);
    default: return Eigen::MatrixXd::Identity(dim, dim);
  }
}

double ChartMap::volume_density(const Eigen::VectorXd& u) const {
  switch (kind) {
    case ChartKind::Gnomonic: return std::pow(1.0 + u.squaredNorm(), -0.5 * (dim + 1));
    case ChartKind::Klein: {
      double r2 = u.squaredNorm();
      if (!(r2 < 1.0)) throw DomainError("Klein volume density is defined only inside the unit ball");
      return std::pow(1.0 - r2, -0.5 * (dim + 1));
    }
    default: return 1.0;
  }
}

bool ChartMap::in_domain(const Eigen::VectorXd& u) const {
  switch (kind) {
    case ChartKind::Gnomonic: return 1.0 + u.squaredNorm() <= 1.0 / (kGnomonicMargin * kGnomonicMargin);
    case ChartKind::Klein: return u.squaredNorm() <= kKleinRadiusGuard * kKleinRadiusGuard;
    default: return true;
  }
}

double flat_fit_residual(const Eigen::MatrixXd& points, int k) {
  if (points.rows() < 2) return 0.0;
  if (k < 1 || k >= points.cols() + 1) throw InvalidArgument("flat dimension out of range");
  Eigen::RowVectorXd mean = points.colwise().mean();
  Eigen::MatrixXd c = points.rowwise() - mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinV);
  const Eigen::MatrixXd& v = svd.matrixV();
  Eigen::VectorXd along = c * v.col(0);
  double extent = along.maxCoeff() - along.minCoeff();
  if (!(extent > 0.0)) return 0.0;
  const int kk = std::min<int>(k, static_cast<int>(v.cols()));
  Eigen::MatrixXd basis = v.leftCols(kk);
  Eigen::MatrixXd off = c - (c * basis) * basis.transpose();
  return off.rowwise().norm().maxCoeff() / extent;
}

StraightenedPolyline straighten_geodesic(const SpaceForm& sf, const SFGeodesic<double>& geo, const ChartMap& chart,
                                         const std::vector<double>& samples) {
  if (chart.model().kind != sf.kind || chart.dim != sf.dim) throw InvalidArgument("chart does not match the model");
  StraightenedPolyline out;
  out.images.resize(static_cast<Eigen::Index>(samples.size()), sf.dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SFPoint<double> p = geodesic_eval(sf, geo, samples[i]);
    Eigen::VectorXd u = chart.forward(p);
    if (!chart.in_domain(u)) throw DomainError("geodesic sample leaves the chart domain");
    out.images.row(static_cast<Eigen::Index>(i)) = u.transpose();
  }
  out.residual = collinearity_residual(out.images);
  return out;
}

Eigen::MatrixXd chart_images(const ChartMap& chart, const std::vector<SFPoint<double>>& points) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), chart.dim);
  for (std::size_t i = 0; i < points.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = chart.forward(points[i]).transpose();
  return out;
}

Eigen::VectorXd projective_nikodym_to_kakeya(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  if (d < 2) throw InvalidArgument("projective map needs dimension >= 2");
  double xd = x(d - 1);
  if (!(std::abs(xd) >= 1e-6)) throw DomainError("projective map undefined for |x_d| < 1e-6");
  Eigen::VectorXd out(d);
  out.head(d - 1) = x.head(d - 1) / xd;
  out(d - 1) = 1.0 / xd;
  return out;
}

BilipschitzBounds bilipschitz_scan(const ChartMap& chart, double radius, std::size_t n_pairs, std::uint64_t seed) {
  if (!(radius > 0.0)) throw InvalidArgument("bilipschitz_scan: radius must be positive");
  if (n_pairs == 0) throw InvalidArgument("bilipschitz_scan: need at least one pair");
  const SpaceForm sf = chart.model();
  if (sf.kind == Model::Sphere && radius >= std::acos(kGnomonicMargin))
    throw InvalidArgument("bilipschitz_scan: region leaves the gnomonic chart");
  std::mt19937_64 rng(seed);
  BilipschitzBounds b;
  b.ratio_min = std::numeric_limits<double>::infinity();
  b.ratio_max = 0.0;
  while (b.n_pairs < n_pairs) {
    SFPoint<double> p = random_point_near_center(sf, radius, rng);
    SFPoint<double> q = random_point_near_center(sf, radius, rng);
    double dist = distance(sf, p, q);
    if (dist < 1e-12) continue;
    double ratio = (chart.forward(p) - chart.forward(q)).norm() / dist;
    b.ratio_min = std::min(b.ratio_min, ratio);
    b.ratio_max = std::max(b.ratio_max, ratio);
    ++b.n_pairs;
  }
  return b;
}

double klein_segment_length(const Eigen::VectorXd& wp, const Eigen::VectorXd& wq, int panels) {
  static constexpr std::array<double, 4> kNodes = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                                   0.8611363115940526};
  static constexpr std::array<double, 4> kWeights = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                                     0.3478548451374538};
  if (panels < 1) throw InvalidArgument("klein_segment_length: panels must be positive");
  Eigen::VectorXd dw = wq - wp;
  double total = 0.0;
  const double h = 1.0 / panels;
  for (int k = 0; k < panels; ++k) {
    double mid = (k + 0.5) * h;
    for (std::size_t i = 0; i < kNodes.size(); ++i) {
      double tau = mid + 0.5 * h * kNodes[i];
      Eigen::VectorXd w = wp + tau * dw;
      total += 0.5 * h * kWeights[i] * std::sqrt(dw.dot(klein_metric(w) * dw));
    }
  }
  return total;
}

LineImage line_space_map(const SpaceForm& surface, const SFGeodesic<double>& gamma0, const LineSpaceElement& el,
                         double max_z) {
  if (surface.dim != 2) throw InvalidArgument("line_space_map is defined for surfaces (d = 2)");
  if (!(std::abs(el.z) <= max_z)) throw DomainError("line_space_map: z outside the reference segment");
  const SFPoint<double> c = center<double>(surface);
  if ((gamma0.base.coords - c.coords).norm() > 1e-12)
    throw InvalidArgument("line_space_map: reference geodesic must start at the chart center");
  const ChartMap chart = ChartMap::for_model(surface);

  Eigen::VectorXd l0 = gamma0.direction.head(2).normalized();
  SFPoint<double> q = geodesic_eval(surface, gamma0, el.z);
  Eigen::VectorXd uq = chart.forward(q);
  if (!chart.in_domain(uq)) throw DomainError("line_space_map: z leaves the chart domain");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(surface.ambient_dim());
  v(0) = std::cos(el.e);
  v(1) = std::sin(el.e);
  SFTangent<double> moved = parallel_transport(surface, gamma0, v, el.z);
  Eigen::VectorXd dir = chart.forward_jacobian(q) * moved.vector;

  LineImage out;
  out.rho = uq.dot(l0);
  double eta = std::atan2(dir(1), dir(0));
  if (eta < 0.0) eta += 2.0 * std::numbers::pi;
  if (eta >= 2.0 * std::numbers::pi) eta -= 2.0 * std::numbers::pi;
  out.eta = eta;
  return out;
}

}  // namespace kakeya
