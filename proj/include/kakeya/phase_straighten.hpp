#pragma once

// Straightening of translation-invariant phases phi = <x,y> + psi(t;y) that
// satisfy Bourgain's condition: extract c(t) and A(t), solve
//   B'' - c B' + A = 0,           B(0) = B'(0) = 0,
//   alpha'' + c(alpha) alpha'^2 = 0, alpha(0) = 0, alpha'(0) = 1,
// and assemble kappa(x, t) = (x + B(alpha(t)), alpha(t)), after which
// phi(kappa(x,t); y) = <x,y> + t h(y) + q(y) + f(t).

#include <vector>

#include <Eigen/Dense>

#include "kakeya/phase_expr.hpp"
#include "kakeya/profiles.hpp"

namespace kakeya {

struct StraightenOptions {
  double t_max = 0.1;
  double spacing = 1e-3;
  /// c, A and B are sampled on [-margin * t_max, margin * t_max] because alpha
  /// leaves the working interval.
  double profile_margin = 1.5;
  double y_radius = 0.2;
  int y_per_axis = 5;
  double c_tol = 1e-6;
  double a_tol = 1e-6;
  double ode_tol = 1e-10;
  double verify_tol = 1e-6;
  double x_linearity_tol = 1e-10;
  double reconstruction_tol = 1e-6;
  double hessian_det_tol = 1e-8;
};

/// Lattice with `per_axis` points per coordinate on [-radius, radius]^(d-1),
/// restricted to the closed ball of that radius.
std::vector<Eigen::VectorXd> lattice_ball(int dim, double radius, int per_axis);

struct CExtraction {
  ScalarProfile c;
  double spread = 0.0;           // max over t of the spread of c over y
  double proportionality = 0.0;  // max ||N - cM|| / ||N||
};

/// Throws ConditionFailure when the t-derivatives of the y-Hessian are not
/// proportional, c depends on y, or d/dt grad_y^2 psi is singular.
CExtraction extract_c(const PhaseFunction& phi, const UniformGrid& grid, const std::vector<Eigen::VectorXd>& ys,
                      double tol = 1e-6);

struct AExtraction {
  VectorProfile a;
  double spread = 0.0;
};

AExtraction extract_A(const PhaseFunction& phi, const ScalarProfile& c, const std::vector<Eigen::VectorXd>& ys,
                      double tol = 1e-6);

/// B and B' on the grid of c (which A must share).
HermiteProfile solve_B(const ScalarProfile& c, const VectorProfile& a, double tol = 1e-10);

/// alpha and alpha' on the nodes of `grid`.
class Reparam {
 public:
  Reparam() = default;
  explicit Reparam(HermiteProfile profile) : profile_(std::move(profile)) {}
  static Reparam identity(const UniformGrid& grid);

  const UniformGrid& grid() const { return profile_.grid(); }
  const HermiteProfile& profile() const { return profile_; }
  double operator()(double t) const { return profile_.value(t)(0); }
  double derivative(double t) const { return profile_.derivative(t)(0); }
  double min_derivative() const;
  /// Solves alpha(t) = s by Newton's method; s must lie in alpha's range.
  double inverse(double s) const;

 private:
  HermiteProfile profile_;
};

/// Throws DomainError when alpha leaves the range of c, NumericalError when
/// alpha' drops to 1e-6 or below.
Reparam solve_alpha(const ScalarProfile& c, const UniformGrid& grid, double tol = 1e-10);

class Kappa {
 public:
  Kappa() = default;
  Kappa(HermiteProfile b, Reparam alpha) : b_(std::move(b)), alpha_(std::move(alpha)) {}
  static Kappa identity(int dim);

  bool is_identity() const { return identity_; }
  /// (x, t) -> (x + B(alpha(t)), alpha(t))
  Eigen::VectorXd apply(const Eigen::VectorXd& xt) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& xt) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& xt) const;
  double jacobian_det(double t) const;
  const Reparam& alpha() const { return alpha_; }
  const HermiteProfile& b() const { return b_; }

 private:
  HermiteProfile b_;
  Reparam alpha_;
  bool identity_ = false;
  int dim_ = 0;
};

struct VerifyReport {
  double residual = 0.0;     // max norm of second t-differences of d_y Phi
  double x_linearity = 0.0;  // max |phi(kappa(x,t);y) - phi(kappa(0,t);y) - <x,y>|
  std::size_t n_points = 0;
  bool pass = false;
};

/// Phi(t;y) = phi(kappa(0,t);y); second differences use the node spacing of `t_grid`.
VerifyReport verify_straightened(const PhaseFunction& phi, const Kappa& kappa, const UniformGrid& t_grid,
                                 const std::vector<Eigen::VectorXd>& ys, double tol = 1e-6,
                                 double x_tol = 1e-10);

struct HqfSamples {
  std::vector<Eigen::VectorXd> ys;
  std::vector<double> h;
  std::vector<double> q;
  std::vector<double> t;
  std::vector<double> f;
  double phi00 = 0.0;
  double reconstruction_residual = 0.0;
  Eigen::MatrixXd h_hessian;
  double h_hessian_det = 0.0;
  bool pass = false;
};

/// h(y) = d/dt Phi(0;y) - d/dt Phi(0;0) (Richardson-extrapolated central
/// differences, step 1e-4), q(y) = Phi(0;y) - Phi(0;0), f(t) = Phi(t;0) - Phi(0;0).
double recovered_h(const PhaseFunction& phi, const Kappa& kappa, const Eigen::VectorXd& y);
HqfSamples recover_hqf(const PhaseFunction& phi, const Kappa& kappa, const UniformGrid& t_grid,
                       const std::vector<Eigen::VectorXd>& ys, double tol = 1e-6, double det_tol = 1e-8);

struct StraighteningResult {
  UniformGrid working_grid;
  CExtraction c;
  AExtraction a;
  HermiteProfile b;
  Reparam alpha;
  Kappa kappa;
  VerifyReport verify;
  HqfSamples hqf;
  double translation_residual = 0.0;
  double min_alpha_derivative = 0.0;
  bool success = false;
};

/// Runs the whole pipeline. Throws ConditionFailure when the phase is not
/// translation invariant or fails Bourgain's condition.
StraighteningResult straighten_phase(const PhaseFunction& phi, const StraightenOptions& opt = {});

}  // namespace kakeya
