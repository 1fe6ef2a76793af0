#include <doctest.h>

#include <cmath>

#include "kakeya/phase_analysis.hpp"
#include "kakeya/phase_spec.hpp"

using namespace kakeya;

namespace {

const char* kBourgain = "x1*y1 + x2*y2 + t*y1*y2 + (t^2/2)*y1^2";
const char* kStraight = "x1*y1 + x2*y2 + t*(y1^2 + y2^2)/2";

PhasePoint at(double x1, double x2, double t, double y1, double y2) {
  return PhasePoint(Eigen::Vector2d(x1, x2), t, Eigen::Vector2d(y1, y2));
}

}  // namespace

TEST_CASE("generalized cross product") {
  Eigen::MatrixXd v(3, 2);
  v << 1, 0, 0, 1, 0, 0;
  Eigen::VectorXd c = generalized_cross(v);
  CHECK(c.isApprox(Eigen::Vector3d(0, 0, 1)));
  v << 1, 4, 2, 5, 3, 6;
  Eigen::Vector3d ref = Eigen::Vector3d(1, 2, 3).cross(Eigen::Vector3d(4, 5, 6));
  // same line as the 3D cross product, orthogonal to both columns
  CHECK(std::abs(generalized_cross(v).normalized().dot(ref.normalized())) == doctest::Approx(1.0));
  CHECK(std::abs(generalized_cross(v).dot(v.col(0))) < 1e-12);
  Eigen::MatrixXd w(2, 1);
  w << 3, 4;
  CHECK(generalized_cross(w).isApprox(Eigen::Vector2d(4, -3)));
}

TEST_CASE("G0 for the straight phase is (-y, 1)") {
  auto phi = PhaseFunction::parse(kStraight, 3);
  Eigen::VectorXd g = g0(phi, at(0.05, -0.02, 0.03, 0.1, -0.2));
  CHECK(g.isApprox(Eigen::Vector3d(-0.1, 0.2, 1.0)));
  auto flat = PhaseFunction::parse("x1 + t", 2);
  CHECK_THROWS_AS(g0(flat, PhasePoint::zero(2)), DomainError);
}

TEST_CASE("H1 and H2 hold for the example phases") {
  for (const char* src : {kBourgain, kStraight}) {
    auto phi = PhaseFunction::parse(src, 3);
    auto samples = default_samples(phi);
    CHECK(samples.size() > 10);
    auto h1 = check_h1(phi, samples);
    CHECK(h1.pass);
    CHECK(h1.max_residual == 0.0);
    auto h2 = check_h2(phi, Eigen::Vector2d(0.05, -0.05), default_xt_samples(phi, Eigen::Vector2d::Zero()));
    CHECK(h2.pass);
  }
}

TEST_CASE("H1 fails for a degenerate phase with a shortfall residual") {
  auto phi = PhaseFunction::parse("x1*y1 + t*y1^2", 3);
  auto r = check_h1(phi, default_samples(phi));
  CHECK_FALSE(r.pass);
  CHECK(r.max_residual == doctest::Approx(1.0));
  CHECK(r.values[r.witness] == doctest::Approx(0.0));
}

TEST_CASE("Bourgain residual on the example phase matches the closed form") {
  auto phi = PhaseFunction::parse(kBourgain, 3);
  // At x = 0, y = 0: G0 = e_t, M1 = [[2t,1],[1,0]], M2 = [[2,0],[0,0]].
  const double t = 0.1;
  Eigen::Matrix2d m1, m2;
  m1 << 2 * t, 1, 1, 0;
  m2 << 2, 0, 0, 0;
  const double c = (m1.array() * m2.array()).sum() / m1.squaredNorm();
  const double residual = (m2 - c * m1).norm() / m2.norm();
  auto r = bourgain_residual(phi, at(0, 0, t, 0, 0));
  CHECK(r.c == doctest::Approx(c).epsilon(1e-10));
  CHECK(r.c == doctest::Approx(0.196).epsilon(1e-3));
  CHECK(r.residual == doctest::Approx(residual).epsilon(1e-10));
  CHECK(r.residual == doctest::Approx(0.99015).epsilon(1e-4));
  auto report = check_bourgain(phi, default_samples(phi));
  CHECK_FALSE(report.pass);
  CHECK(report.max_residual > 0.5);
}

TEST_CASE("Bourgain residual vanishes on straight and translation-invariant phases") {
  for (const char* src : {kStraight, "x1*y1 + x2*y2 + (exp(t) - 1)*(y1^2 + y2^2)/2",
                          "x1*y1 + x2*y2 + log(1 + t)*(y1^2 - y2^2)/2 + sin(t)*y2"}) {
    auto phi = PhaseFunction::parse(src, 3);
    auto samples = default_samples(phi);
    CHECK(check_bourgain(phi, samples).pass);
    CHECK(check_bourgain(phi, samples, 1e-6, BourgainMode::Field).max_residual < 1e-6);
    CHECK(check_translation_invariant(phi, samples).pass);
  }
  auto bad = PhaseFunction::parse("x1*y1 + x2*y2 + x1*t*y2", 3);
  CHECK_FALSE(check_translation_invariant(bad, default_samples(bad)).pass);
}

TEST_CASE("straight condition separates straight and curved families") {
  auto s = PhaseFunction::parse(kStraight, 3);
  Eigen::Vector2d y(0.05, -0.03);
  CHECK(check_straight_condition(s, default_xt_samples(s, y)).pass);
  auto b = PhaseFunction::parse(kBourgain, 3);
  auto r = check_straight_condition(b, default_xt_samples(b, y));
  CHECK_FALSE(r.pass);
  CHECK(r.max_residual > 1e-3);
}

TEST_CASE("default samples are deterministic and jitter with the seed") {
  auto phi = PhaseFunction::parse(kStraight, 3);
  auto a = default_samples(phi, 0), b = default_samples(phi, 0), c = default_samples(phi, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].xt() == b[i].xt());
  bool moved = false;
  for (std::size_t i = 0; i < std::min(a.size(), c.size()); ++i) moved |= a[i].xt() != c[i].xt();
  CHECK(moved);
}

TEST_CASE("curve tracing: straight lines and the compression surface") {
  std::vector<double> ts;
  for (int k = -10; k <= 10; ++k) ts.push_back(0.02 * k);
  auto s = PhaseFunction::parse(kStraight, 3);
  Eigen::Vector2d y(0.1, -0.2), x0(0.03, 0.04);
  auto line = trace_curve(s, y, x0, ts);
  REQUIRE(line.complete);
  CHECK(line.method == TraceMethod::TranslationInvariant);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    Eigen::Vector2d expect = x0 - ts[k] * y;
    CHECK((line.points.row(k).head(2).transpose() - expect).norm() < 1e-12);
    CHECK(line.points(k, 2) == ts[k]);
  }
  auto newton = trace_curve(s, y, x0, ts, TraceMethod::Newton);
  CHECK((newton.points - line.points).norm() < 1e-10);

  // omega = (0, -y2) with y1 = 0 traces x1 = t x2, x2 = -y2
  auto b = PhaseFunction::parse(kBourgain, 3);
  auto curve = trace_curve(b, Eigen::Vector2d(0.0, 0.2), Eigen::Vector2d(0.0, -0.2), ts);
  REQUIRE(curve.complete);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    CHECK(curve.points(k, 1) == doctest::Approx(-0.2));
    CHECK(curve.points(k, 0) == doctest::Approx(ts[k] * curve.points(k, 1)));
  }
}

TEST_CASE("tube membership") {
  auto s = PhaseFunction::parse(kStraight, 3);
  Eigen::Vector2d y(0.1, 0.0);
  Eigen::Vector3d base(0.0, 0.0, 0.0);
  CHECK(tube_contains(s, y, base, 0.01, Eigen::Vector3d(-0.02, 0.0, 0.2)));
  CHECK(tube_contains(s, y, base, 0.01, Eigen::Vector3d(-0.02, 0.005, 0.2)));
  CHECK_FALSE(tube_contains(s, y, base, 0.01, Eigen::Vector3d(-0.02, 0.02, 0.2)));
}
