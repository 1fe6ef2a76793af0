#pragma once

// Condition checks on phase functions and Kakeya curve tracing.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kakeya/phase_expr.hpp"

namespace kakeya {

struct ConditionReport {
  std::string name;
  std::vector<double> residuals;  // one per sample, all >= 0
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::size_t witness = 0;  // index of the sample attaining max_residual
  PhasePoint witness_point;
  /// Raw per-sample quantity behind the residual when it is not the residual
  /// itself (sigma ratio for h1, |det| for h2, C for bourgain).
  std::vector<double> values;
  std::vector<std::string> flags;
};

/// Generalized cross product of the columns of a d x (d-1) matrix:
/// component i is (-1)^i times the minor with row i deleted (0-based i).
Eigen::VectorXd generalized_cross(const Eigen::MatrixXd& v);

/// G0 at pt, scaled so the t-component is 1 when |t-component| > 1e-8, else
/// to unit length. Throws DomainError when every minor is below 1e-14.
Eigen::VectorXd g0(const PhaseFunction& phi, const PhasePoint& pt);

/// 5-point lattice per coordinate over [-r, r] with r = 0.8 * epsilon0,
/// keeping points with |x| <= r and |y| <= r. A nonzero seed jitters the
/// lattice by up to r/8 per coordinate.
std::vector<PhasePoint> default_samples(const PhaseFunction& phi, std::uint64_t seed = 0);
/// Same lattice over (x, t) with y fixed.
std::vector<PhasePoint> default_xt_samples(const PhaseFunction& phi, const Eigen::VectorXd& y,
                                           std::uint64_t seed = 0);

// H1 and H2 are lower-bound conditions. Their residual is the relative
// shortfall max(0, 1 - s / tol) of the measured quantity s, so it is 0 exactly
// when the sample passes, and pass requires max_residual == 0.

ConditionReport check_h1(const PhaseFunction& phi, const std::vector<PhasePoint>& samples, double tol = 1e-6);
/// The y-Hessian of <grad_(x,t) phi(x,t;y), G0(x,t;y0)> at y = y0 is the
/// matrix sum_k G0_k d/dz_k grad_y^2 phi(x,t;y0). Samples supply (x, t); their y is ignored.
ConditionReport check_h2(const PhaseFunction& phi, const Eigen::VectorXd& y0, const std::vector<PhasePoint>& samples,
                         double tol = 1e-8);
Eigen::MatrixXd h2_matrix(const PhaseFunction& phi, const PhasePoint& pt);

enum class BourgainMode { Frozen, Field };

struct BourgainResult {
  double c = 0.0;
  double residual = 0.0;
  bool c_defined = true;
  Eigen::MatrixXd m1;
  Eigen::MatrixXd m2;
};

BourgainResult bourgain_residual(const PhaseFunction& phi, const PhasePoint& pt,
                                 BourgainMode mode = BourgainMode::Frozen);
/// Frozen-mode residual with a caller-supplied direction in place of G0.
BourgainResult bourgain_residual(const PhaseFunction& phi, const PhasePoint& pt, const Eigen::VectorXd& g);

ConditionReport check_bourgain(const PhaseFunction& phi, const std::vector<PhasePoint>& samples, double tol = 1e-8,
                               BourgainMode mode = BourgainMode::Frozen);
ConditionReport check_translation_invariant(const PhaseFunction& phi, const std::vector<PhasePoint>& samples,
                                            double tol = 1e-9);
/// Residual of sample i is the largest sine of the angle between G0 at sample i
/// and G0 at any other sample. Samples must share one y.
ConditionReport check_straight_condition(const PhaseFunction& phi, const std::vector<PhasePoint>& samples,
                                         double tol = 1e-8);

enum class TraceMethod { Auto, Newton, TranslationInvariant };

struct CurveTrace {
  std::vector<double> t;
  Eigen::MatrixXd points;  // rows (x, t)
  bool complete = true;
  std::string diagnostic;
  TraceMethod method = TraceMethod::Newton;
};

/// Solves grad_y phi(x, t; y) = grad_y phi(base; y) for x at each t of the
/// increasing grid, continuing outward from t = 0 in both directions.
CurveTrace trace_curve(const PhaseFunction& phi, const Eigen::VectorXd& y, const Eigen::VectorXd& base_x,
                       const std::vector<double>& t_grid, TraceMethod method = TraceMethod::Auto);

/// |grad_y phi(query; y) - grad_y phi(base; y)| < delta, with base and query given as (x, t).
bool tube_contains(const PhaseFunction& phi, const Eigen::VectorXd& y, const Eigen::VectorXd& base_xt, double delta,
                   const Eigen::VectorXd& query_xt);

}  // namespace kakeya
