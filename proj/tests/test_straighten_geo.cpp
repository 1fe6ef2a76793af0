#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kakeya/straighten_geo.hpp"

using namespace kakeya;

namespace {

Eigen::MatrixXd numeric_inverse_jacobian(const ChartMap& c, const Eigen::VectorXd& u, double h = 1e-6) {
  const int d = static_cast<int>(u.size());
  Eigen::MatrixXd J(c.inverse(u).coords.size(), d);
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd a = u, b = u;
    a(j) += h;
    b(j) -= h;
    J.col(j) = (c.inverse(a).coords - c.inverse(b).coords) / (2 * h);
  }
  return J;
}

Eigen::MatrixXd ambient_metric(const SpaceForm& sf) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(sf.ambient_dim(), sf.ambient_dim());
  if (sf.kind == Model::Hyperbolic) g(sf.dim, sf.dim) = -1.0;
  return g;
}

}  // namespace

TEST_CASE("chart selection by model") {
  CHECK(ChartMap::for_model(SpaceForm(Model::Sphere, 2)).kind == ChartKind::Gnomonic);
  CHECK(ChartMap::for_model(SpaceForm(Model::Hyperbolic, 3)).kind == ChartKind::Klein);
  CHECK(ChartMap::for_model(SpaceForm(Model::Euclidean, 2)).kind == ChartKind::Identity);
}

TEST_CASE("chart domain guards") {
  auto g = ChartMap::for_model(SpaceForm(Model::Sphere, 2));
  CHECK_THROWS_AS(g.forward(SFPoint<double>{Eigen::Vector3d(1, 0, 0)}), DomainError);
  auto k = ChartMap::for_model(SpaceForm(Model::Hyperbolic, 2));
  CHECK_THROWS_AS(k.inverse(Eigen::Vector2d(0.995, 0)), DomainError);
  CHECK(k.in_domain(Eigen::Vector2d(0.5, 0.5)));
  CHECK_FALSE(k.in_domain(Eigen::Vector2d(0.8, 0.8)));
  CHECK_THROWS_AS(k.volume_density(Eigen::Vector2d(1.0, 0.1)), DomainError);
}

TEST_CASE("property: analytic Jacobians match finite differences") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (Model m : {Model::Sphere, Model::Hyperbolic}) {
    for (int d : {2, 3}) {
      auto c = ChartMap::for_model(SpaceForm(m, d));
      for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd x(d);
        for (int q = 0; q < d; ++q) x(q) = u(rng);
        CHECK((c.inverse_jacobian(x) - numeric_inverse_jacobian(c, x)).norm() < 1e-8);
        // forward_jacobian * inverse_jacobian = I on the chart
        Eigen::MatrixXd fj = c.forward_jacobian(c.inverse(x));
        CHECK((fj * c.inverse_jacobian(x) - Eigen::MatrixXd::Identity(d, d)).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("property: chart metric is the pullback of the ambient form and the density is sqrt det") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Model m : {Model::Sphere, Model::Hyperbolic}) {
    SpaceForm sf(m, 2);
    auto c = ChartMap::for_model(sf);
    for (int i = 0; i < 20; ++i) {
      Eigen::Vector2d x(u(rng), u(rng));
      Eigen::MatrixXd J = numeric_inverse_jacobian(c, x);
      Eigen::MatrixXd pull = J.transpose() * ambient_metric(sf) * J;
      CHECK((pull - c.metric(x)).norm() < 1e-8);
      CHECK(c.volume_density(x) == doctest::Approx(std::sqrt(pull.determinant())).epsilon(1e-7));
    }
  }
}

TEST_CASE("Klein metric closed form") {
  Eigen::Vector2d w(0.3, -0.4);
  Eigen::MatrixXd g = klein_metric<double>(w);
  const double a = 1.0 / (1.0 - 0.25);
  CHECK(g(0, 0) == doctest::Approx(a + a * a * 0.09));
  CHECK(g(0, 1) == doctest::Approx(a * a * -0.12));
  CHECK_THROWS_AS(klein_metric<double>(Eigen::Vector2d(1.0, 0.0)), DomainError);
}

TEST_CASE("flat fit residual") {
  Eigen::MatrixXd line(3, 2);
  line << 0, 0, 1, 1, 2, 2;
  CHECK(collinearity_residual(line) < 1e-15);
  Eigen::MatrixXd bent(3, 2);
  bent << 0, 0, 1, 0.1, 2, 0;
  // max off-line distance over extent: the fitted line is y = 1/30, worst offset 2/30 over extent 2
  CHECK(collinearity_residual(bent) == doctest::Approx((0.1 - 0.1 / 3) / 2).epsilon(1e-12));
  Eigen::MatrixXd one(1, 3);
  one << 1, 2, 3;
  CHECK(collinearity_residual(one) == 0.0);
  Eigen::MatrixXd plane(4, 3);
  plane << 0, 0, 1, 1, 0, 1, 0, 1, 1, 1, 1, 1;
  CHECK(flat_fit_residual(plane, 2) < 1e-15);
}

TEST_CASE("straightened great circles and hyperbolic lines are collinear") {
  for (Model m : {Model::Sphere, Model::Hyperbolic, Model::Euclidean}) {
    SpaceForm sf(m, 2);
    auto c = ChartMap::for_model(sf);
    auto p = m == Model::Euclidean ? SFPoint<double>{Eigen::Vector2d(0.1, 0.2)} : center<double>(sf);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sf.ambient_dim());
    v(0) = 0.6;
    v(1) = 0.8;
    auto geo = make_geodesic(sf, p, v);
    auto res = straighten_geodesic(sf, geo, c, {-0.5, -0.2, 0.0, 0.3, 0.7});
    CHECK(res.residual < 1e-14);
    CHECK(res.images.rows() == 5);
  }
  SpaceForm sf(Model::Sphere, 2);
  auto geo = make_geodesic(sf, center<double>(sf), Eigen::VectorXd(Eigen::Vector3d(1, 0, 0)));
  CHECK_THROWS_AS(straighten_geodesic(sf, geo, ChartMap::for_model(SpaceForm(Model::Hyperbolic, 2)), {0.0}),
                  InvalidArgument);
  CHECK_THROWS_AS(straighten_geodesic(sf, geo, ChartMap::for_model(sf), {1.55}), DomainError);
}

TEST_CASE("projective map") {
  Eigen::Vector3d x(0.3, -0.2, 2.0);
  Eigen::VectorXd f = projective_nikodym_to_kakeya(x);
  CHECK(f(0) == doctest::Approx(0.15));
  CHECK(f(1) == doctest::Approx(-0.1));
  CHECK(f(2) == doctest::Approx(0.5));
  CHECK((projective_nikodym_to_kakeya(f) - x).norm() < 1e-15);
  CHECK_THROWS_AS(projective_nikodym_to_kakeya(Eigen::Vector3d(1, 1, 1e-7)), DomainError);
  CHECK_THROWS_AS(projective_nikodym_to_kakeya(Eigen::VectorXd::Ones(1)), InvalidArgument);
}

TEST_CASE("bilipschitz scan") {
  auto e = bilipschitz_scan(ChartMap::for_model(SpaceForm(Model::Euclidean, 2)), 0.5, 200, 4);
  CHECK(e.ratio_min == doctest::Approx(1.0));
  CHECK(e.ratio_max == doctest::Approx(1.0));
  // gnomonic chart stretches, Klein chart shrinks, both by (1 + O(r^2))
  auto s = bilipschitz_scan(ChartMap::for_model(SpaceForm(Model::Sphere, 2)), 0.3, 500, 4);
  CHECK(s.ratio_min >= 1.0 - 1e-12);
  CHECK(s.ratio_max <= 1.0 / std::pow(std::cos(0.3), 2) + 1e-12);
  auto h = bilipschitz_scan(ChartMap::for_model(SpaceForm(Model::Hyperbolic, 2)), 0.3, 500, 4);
  CHECK(h.ratio_max <= 1.0 + 1e-12);
  CHECK(h.ratio_min >= 1.0 / std::pow(std::cosh(0.3), 2) - 1e-12);
  auto again = bilipschitz_scan(ChartMap::for_model(SpaceForm(Model::Sphere, 2)), 0.3, 500, 4);
  CHECK(again.ratio_min == s.ratio_min);
  CHECK(again.ratio_max == s.ratio_max);
}

TEST_CASE("Klein chord length equals hyperbolic distance") {
  auto k = ChartMap::for_model(SpaceForm(Model::Hyperbolic, 2));
  SpaceForm sf(Model::Hyperbolic, 2);
  Eigen::Vector2d a(0.1, -0.3), b(-0.4, 0.5);
  double exact = distance(sf, k.inverse(a), k.inverse(b));
  CHECK(klein_segment_length(a, b) == doctest::Approx(exact).epsilon(1e-8));
  // from the center along a radius: atanh(r)
  CHECK(klein_segment_length(Eigen::Vector2d(0, 0), Eigen::Vector2d(0.6, 0)) ==
        doctest::Approx(std::atanh(0.6)).epsilon(1e-10));
}

TEST_CASE("line-space map") {
  for (Model m : {Model::Sphere, Model::Hyperbolic}) {
    SpaceForm sf(m, 2);
    auto geo = make_geodesic(sf, center<double>(sf), Eigen::VectorXd(Eigen::Vector3d(1, 0, 0)));
    // the reference geodesic itself: e = 0 at z = 0 maps to rho = 0, eta = 0
    auto base = line_space_map(sf, geo, {0.0, 0.0});
    CHECK(base.rho == doctest::Approx(0.0));
    CHECK(base.eta == doctest::Approx(0.0));
    // at the center the chart is conformal: eta = e
    auto turned = line_space_map(sf, geo, {0.0, 1.0});
    CHECK(turned.eta == doctest::Approx(1.0));
    // rho is the chart position of gamma0(z): tan z (gnomonic) or tanh z (Klein)
    auto moved = line_space_map(sf, geo, {0.4, 0.7});
    CHECK(moved.rho == doctest::Approx(m == Model::Sphere ? std::tan(0.4) : std::tanh(0.4)));
    // transport along the reference geodesic keeps e = 0 tangent to it
    CHECK(line_space_map(sf, geo, {0.4, 0.0}).eta == doctest::Approx(0.0));
    CHECK_THROWS_AS(line_space_map(sf, geo, {1.5, 0.0}), DomainError);
  }
}
