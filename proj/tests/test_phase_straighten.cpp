#include <doctest.h>

#include <cmath>
#include <string>

#include "kakeya/phase_spec.hpp"
#include "kakeya/phase_straighten.hpp"

using namespace kakeya;

namespace {

PhaseFunction load(const std::string& name) { return load_phase_spec(std::string(KAKEYA_DATA_DIR) + "/phases/" + name); }

double max_over(const UniformGrid& g, auto&& f) {
  double worst = 0.0;
  for (double t : g.nodes()) worst = std::max(worst, std::abs(f(t)));
  return worst;
}

}  // namespace

TEST_CASE("lattice ball") {
  auto ys = lattice_ball(3, 0.2, 5);
  CHECK(ys.size() == 13);  // i^2 + j^2 <= 4 on the 5 x 5 lattice
  for (const auto& y : ys) CHECK(y.norm() <= 0.2 + 1e-15);
  CHECK(lattice_ball(2, 0.2, 5).size() == 5);
}

TEST_CASE("exponential phase: c = 1, alpha = log(1 + t), B = 0, h = |y|^2/2") {
  auto phi = load("exp_phase.json");
  auto r = straighten_phase(phi);
  REQUIRE(r.success);
  const auto& cg = r.c.c.grid();
  CHECK(cg.end() == doctest::Approx(0.15));
  CHECK(max_over(cg, [&](double t) { return r.c.c(t) - 1.0; }) < 1e-9);
  CHECK(max_over(r.working_grid, [&](double t) { return r.alpha(t) - std::log1p(t); }) < 1e-8);
  CHECK(max_over(r.working_grid, [&](double t) { return r.alpha.derivative(t) - 1.0 / (1.0 + t); }) < 1e-8);
  CHECK(max_over(cg, [&](double t) { return r.b.value(t).norm(); }) < 1e-9);
  CHECK(r.verify.residual < 1e-6);
  CHECK(r.verify.x_linearity < 1e-10);
  for (std::size_t i = 0; i < r.hqf.ys.size(); ++i) {
    CHECK(r.hqf.h[i] == doctest::Approx(0.5 * r.hqf.ys[i].squaredNorm()).epsilon(1e-6).scale(1e-6));
    CHECK(std::abs(r.hqf.q[i]) < 1e-8);
  }
  CHECK(r.hqf.h_hessian.isApprox(Eigen::Matrix2d::Identity(), 1e-5));
}

TEST_CASE("drifting phase: A = (1 - t, 0) and B = (-t^2/2, 0)") {
  auto phi = load("exp_drift_phase.json");
  auto r = straighten_phase(phi);
  REQUIRE(r.success);
  const auto& g = r.a.a.grid();
  CHECK(max_over(g, [&](double t) { return (r.a.a(t) - Eigen::Vector2d(1.0 - t, 0.0)).norm(); }) < 1e-8);
  CHECK(max_over(g, [&](double t) { return (r.b.value(t) - Eigen::Vector2d(-t * t / 2, 0.0)).norm(); }) < 1e-8);
  CHECK(max_over(g, [&](double t) { return (r.b.derivative(t) - Eigen::Vector2d(-t, 0.0)).norm(); }) < 1e-7);
  CHECK(r.verify.pass);
}

TEST_CASE("log phase: alpha = e^t - 1, B2 = log(1 + t) - sin t, h = (y1^2 - y2^2)/2 + y2") {
  auto phi = load("log_phase.json");
  auto r = straighten_phase(phi);
  REQUIRE(r.success);
  const auto& cg = r.c.c.grid();
  CHECK(max_over(cg, [&](double t) { return r.c.c(t) + 1.0 / (1.0 + t); }) < 1e-8);
  CHECK(max_over(cg, [&](double t) { return r.a.a(t)(1) - (std::cos(t) / (1.0 + t) - std::sin(t)); }) < 1e-8);
  CHECK(max_over(r.working_grid, [&](double t) { return r.alpha(t) - std::expm1(t); }) < 1e-8);
  CHECK(max_over(cg, [&](double t) { return r.b.value(t)(1) - (std::log1p(t) - std::sin(t)); }) < 1e-8);
  CHECK(r.alpha.inverse(std::expm1(0.05)) == doctest::Approx(0.05).epsilon(1e-9));
  for (std::size_t i = 0; i < r.hqf.ys.size(); ++i) {
    const auto& y = r.hqf.ys[i];
    CHECK(r.hqf.h[i] == doctest::Approx(0.5 * (y(0) * y(0) - y(1) * y(1)) + y(1)).epsilon(1e-6).scale(1e-6));
  }
  CHECK(r.hqf.h_hessian_det == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.hqf.pass);
}

TEST_CASE("kappa maps, inverse and Jacobian") {
  auto r = straighten_phase(load("exp_drift_phase.json"));
  Eigen::Vector3d xt(0.02, -0.03, 0.07);
  Eigen::VectorXd k = r.kappa.apply(xt);
  const double a = std::log1p(0.07);
  CHECK(k(2) == doctest::Approx(a).epsilon(1e-8));
  CHECK(k(0) == doctest::Approx(0.02 - a * a / 2).epsilon(1e-8));
  CHECK((r.kappa.inverse(k) - xt).norm() < 1e-9);
  CHECK(r.kappa.jacobian_det(0.07) == doctest::Approx(1.0 / 1.07).epsilon(1e-7));
  CHECK(r.kappa.jacobian(xt).determinant() == doctest::Approx(1.0 / 1.07).epsilon(1e-7));
}

TEST_CASE("negative control: the identity map does not straighten") {
  auto phi = load("exp_phase.json");
  auto ys = lattice_ball(3, 0.2, 5);
  auto grid = UniformGrid::symmetric(0.1, 1e-3);
  auto rep = verify_straightened(phi, Kappa::identity(3), grid, ys);
  CHECK_FALSE(rep.pass);
  // second t-derivative of (e^t - 1) y is e^t y
  CHECK(rep.residual == doctest::Approx(0.2 * std::exp(0.1)).epsilon(3e-3));
}

TEST_CASE("pipeline rejects phases outside its scope") {
  CHECK_THROWS_AS(straighten_phase(load("bourgain_example.json")), ConditionFailure);
  auto curved = PhaseFunction::parse("x1*y1 + x2*y2 + x1*t*y2", 3);
  CHECK_THROWS_AS(straighten_phase(curved), ConditionFailure);
}

TEST_CASE("reparametrization failures") {
  // with c = 40, alpha = log(1 + 40 t) / 40 blows up at t = -0.025
  auto grid = UniformGrid::symmetric(0.15, 1e-3);
  ScalarProfile c(grid, std::vector<double>(grid.size, 40.0));
  CHECK_THROWS(solve_alpha(c, UniformGrid::symmetric(0.1, 1e-3)));
}
