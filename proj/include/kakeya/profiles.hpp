#pragma once

// Sampled one-variable profiles on uniform grids, and an RK4 integrator with
// step-doubling error control.

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace kakeya {

struct UniformGrid {
  double start = 0.0;
  double step = 1.0;
  std::size_t size = 0;

  /// Nodes -half_width, ..., half_width; half_width must be a multiple of step
  /// up to rounding.
  static UniformGrid symmetric(double half_width, double step);

  double node(std::size_t i) const { return start + static_cast<double>(i) * step; }
  double end() const { return node(size - 1); }
  bool contains(double t, double slack = 1e-12) const { return t >= start - slack && t <= end() + slack; }
  std::vector<double> nodes() const;
  /// Index of the node closest to t (clamped).
  std::size_t nearest(double t) const;
};

/// Scalar profile with 4-point (cubic) Lagrange interpolation.
class ScalarProfile {
 public:
  ScalarProfile() = default;
  ScalarProfile(UniformGrid grid, std::vector<double> values);

  const UniformGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator()(double t) const;

 private:
  UniformGrid grid_;
  std::vector<double> values_;
};

/// Vector-valued profile with 4-point Lagrange interpolation.
class VectorProfile {
 public:
  VectorProfile() = default;
  VectorProfile(UniformGrid grid, std::vector<Eigen::VectorXd> values);

  const UniformGrid& grid() const { return grid_; }
  const std::vector<Eigen::VectorXd>& values() const { return values_; }
  Eigen::Index dim() const { return values_.empty() ? 0 : values_.front().size(); }
  Eigen::VectorXd operator()(double t) const;

 private:
  UniformGrid grid_;
  std::vector<Eigen::VectorXd> values_;
};

/// Vector-valued profile with node values and node derivatives, evaluated by
/// piecewise cubic Hermite interpolation.
class HermiteProfile {
 public:
  HermiteProfile() = default;
  HermiteProfile(UniformGrid grid, std::vector<Eigen::VectorXd> values, std::vector<Eigen::VectorXd> derivs);

  const UniformGrid& grid() const { return grid_; }
  const std::vector<Eigen::VectorXd>& values() const { return values_; }
  const std::vector<Eigen::VectorXd>& derivatives() const { return derivs_; }
  Eigen::Index dim() const { return values_.empty() ? 0 : values_.front().size(); }
  Eigen::VectorXd value(double t) const;
  Eigen::VectorXd derivative(double t) const;

 private:
  UniformGrid grid_;
  std::vector<Eigen::VectorXd> values_;
  std::vector<Eigen::VectorXd> derivs_;
};

using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Integrates y' = f(t, y) from t0 to t1 (either direction) with classical RK4.
/// Each step is compared with two half steps; the step is accepted when the
/// max-norm difference / 15 is below tol, and the extrapolated value is kept.
/// Throws NumericalError when the step size collapses.
Eigen::VectorXd integrate_rk4(const OdeRhs& f, double t0, Eigen::VectorXd y, double t1, double h_init, double tol,
                              OdeStats* stats = nullptr);

}  // namespace kakeya
