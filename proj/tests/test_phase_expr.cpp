#include <doctest.h>

#include <cmath>
#include <random>

#include "kakeya/phase_expr.hpp"
#include "kakeya/phase_spec.hpp"

using namespace kakeya;

namespace {

PhasePoint pt3(double x1, double x2, double t, double y1, double y2) {
  return PhasePoint(Eigen::Vector2d(x1, x2), t, Eigen::Vector2d(y1, y2));
}

// Central-difference oracle for d/dv of phi at pt, built from plain evaluations.
double fd(const PhaseFunction& phi, Var v, PhasePoint pt, double h = 1e-5) {
  PhasePoint a = pt, b = pt;
  a[v] += h;
  b[v] -= h;
  return (phi(a) - phi(b)) / (2 * h);
}

}  // namespace

TEST_CASE("parser evaluates against hand-coded formulas") {
  auto phi = PhaseFunction::parse("x1*y1 + x2*y2 + t*y1*y2 + (t^2/2)*y1^2", 3);
  auto direct = [](double x1, double x2, double t, double y1, double y2) {
    return x1 * y1 + x2 * y2 + t * y1 * y2 + t * t / 2 * y1 * y1;
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 0; i < 50; ++i) {
    double v[5];
    for (double& c : v) c = u(rng);
    CHECK(phi(pt3(v[0], v[1], v[2], v[3], v[4])) == doctest::Approx(direct(v[0], v[1], v[2], v[3], v[4])).epsilon(1e-14));
  }
}

TEST_CASE("transcendental functions and precedence") {
  auto phi = PhaseFunction::parse("-sin(t)^2 + cos(x1)*exp(y1) - log(1 + t)/sqrt(4) + 2^3", 2);
  PhasePoint p(Eigen::VectorXd::Constant(1, 0.3), 0.2, Eigen::VectorXd::Constant(1, -0.1));
  double expect = -std::pow(std::sin(0.2), 2) + std::cos(0.3) * std::exp(-0.1) - std::log(1.2) / 2 + 8;
  CHECK(phi(p) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("exact rational literals fold exactly") {
  Expr e = parse_phase("1/3 + 1/6", 2);
  REQUIRE(e.is_constant());
  CHECK(e.number().exact);
  CHECK(e.number().num == 1);
  CHECK(e.number().den == 2);
  Expr d = parse_phase("0.5", 2);
  CHECK_FALSE(d.number().exact);
}

TEST_CASE("printing round-trips structurally") {
  for (const char* src : {"x1*y1 + t*y1^2/2", "exp(t) - 1", "-(x1 - t)^3 * sin(y1 / 7)", "sqrt(1 + t^2) + 0.25*y1"}) {
    Expr e = parse_phase(src, 2);
    CHECK(structurally_equal(parse_phase(print(e), 2), e));
  }
}

TEST_CASE("parse errors carry positions") {
  auto pos_of = [](const char* src) -> long {
    try {
      parse_phase(src, 3);
    } catch (const ParseError& e) {
      return static_cast<long>(e.position());
    }
    return -1;
  };
  CHECK(pos_of("x1 + ") == 5);
  CHECK(pos_of("x1 * (y1") == 8);
  CHECK(pos_of("x3 + t") == 0);  // x3 does not exist for d = 3
  CHECK(pos_of("y1^1.5") == 3);
  CHECK(pos_of("t/0") == 2);
  CHECK(pos_of("foo(t)") == 0);
  CHECK(pos_of("") == 0);
  CHECK_THROWS_AS(parse_phase("t", 1), InvalidArgument);
}

TEST_CASE("undefined evaluation raises DomainError") {
  auto phi = PhaseFunction::parse("log(t) + y1", 2);
  CHECK_THROWS_AS(phi(PhasePoint(Eigen::VectorXd::Zero(1), -0.1, Eigen::VectorXd::Zero(1))), DomainError);
  auto psi = PhaseFunction::parse("y1 / t", 2);
  CHECK_THROWS_AS(psi(PhasePoint::zero(2)), DomainError);
}

TEST_CASE("property: symbolic first derivatives match central differences") {
  auto phi = PhaseFunction::parse("x1*y1 + x2*y2 + log(1 + t)*(y1^2 - y2^2)/2 + sin(t*x1)*y2 + exp(y1*t)", 3);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  std::vector<Var> vars{var_x(0), var_x(1), var_t(), var_y(0), var_y(1)};
  for (int i = 0; i < 40; ++i) {
    PhasePoint p = pt3(u(rng), u(rng), u(rng), u(rng), u(rng));
    for (Var v : vars) CHECK(phi.partial({v}, p) == doctest::Approx(fd(phi, v, p)).epsilon(1e-8));
  }
}

TEST_CASE("property: mixed partials are order independent and match nested differences") {
  auto phi = PhaseFunction::parse("x1*y1 + t^3*y1^2*y2 + cos(t)*y2^2 + x2*t*y1", 3);
  PhasePoint p = pt3(0.1, -0.05, 0.07, 0.12, -0.08);
  double a = phi.partial({var_t(), var_y(0), var_y(1)}, p);
  const std::size_t cached = phi.cache_size();
  double b = phi.partial({var_y(1), var_t(), var_y(0)}, p);
  CHECK(a == b);
  CHECK(phi.cache_size() == cached);  // permuted multi-index hits the same entry
  // oracle: 6 t y1 at the point, from the monomial t^3 y1^2 y2
  CHECK(a == doctest::Approx(6 * 0.07 * 0.07 * 0.12).epsilon(1e-13));
  CHECK_THROWS_AS(phi.derivative({var_t(), var_t(), var_t(), var_t(), var_t()}), InvalidArgument);
}

TEST_CASE("gradient and Hessian blocks") {
  auto phi = PhaseFunction::parse("x1*y1 + x2*y2 + t*y1*y2 + (t^2/2)*y1^2", 3);
  PhasePoint p = pt3(0.0, 0.0, 0.1, 0.0, 0.0);
  Eigen::VectorXd g = grad_y(phi, p);
  CHECK(g.norm() == doctest::Approx(0.0));
  Eigen::MatrixXd hy = hessian_y(phi, p);
  CHECK(hy(0, 0) == doctest::Approx(0.01));
  CHECK(hy(0, 1) == doctest::Approx(0.1));
  CHECK(hy(1, 1) == doctest::Approx(0.0));
  Var t = var_t();
  Eigen::MatrixXd ht = hessian_y(phi, p, std::span<const Var>(&t, 1));
  CHECK(ht(0, 0) == doctest::Approx(0.2));
  CHECK(ht(0, 1) == doctest::Approx(1.0));
  Eigen::MatrixXd m = mixed_xt_y(phi, p);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m(0, 0) == doctest::Approx(1.0));
  CHECK(m(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("phase spec JSON") {
  auto phi = phase_from_json(nlohmann::json{{"d", 2}, {"phase", "x1*y1 + t*y1^2/2"}});
  CHECK(phi.dim() == 2);
  CHECK(phi.epsilon0() == kDefaultEpsilon0);
  auto back = phase_to_json(phi);
  CHECK(back["phase"] == "x1*y1 + t*y1^2/2");
  CHECK_THROWS_AS(phase_from_json(nlohmann::json{{"phase", "t"}}), InvalidArgument);
  CHECK_THROWS_AS(phase_from_json(nlohmann::json{{"d", 2}, {"phase", "t +"}}), ParseError);
  CHECK_THROWS_AS(phase_from_json(nlohmann::json{{"d", 2}, {"phase", "t"}, {"epsilon0", -1}}), InvalidArgument);
}
