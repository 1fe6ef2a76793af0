#include "kakeya/profiles.hpp"

#include <algorithm>
#include <cmath>

#include "kakeya/errors.hpp"

namespace kakeya {

UniformGrid UniformGrid::symmetric(double half_width, double step) {
  if (!(step > 0.0) || !(half_width >= 0.0)) throw InvalidArgument("grid needs a positive step and nonnegative width");
  const auto half = static_cast<std::size_t>(std::llround(half_width / step));
  UniformGrid g;
  g.start = -static_cast<double>(half) * step;
  g.step = step;
  g.size = 2 * half + 1;
  return g;
}

std::vector<double> UniformGrid::nodes() const {
  std::vector<double> out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = node(i);
  return out;
}

std::size_t UniformGrid::nearest(double t) const {
  double k = std::round((t - start) / step);
  if (k < 0.0) return 0;
  return std::min(size - 1, static_cast<std::size_t>(k));
}

namespace {

// First node of the 4-point stencil around t, and the Lagrange weights.
std::size_t lagrange_stencil(const UniformGrid& g, double t, double w[4]) {
  if (g.size < 4) throw InvalidArgument("interpolation needs at least 4 nodes");
  if (!g.contains(t, 1e-9 * g.step)) throw DomainError("profile evaluated outside its grid");
  double u = (t - g.start) / g.step;
  auto i0 = static_cast<std::ptrdiff_t>(std::floor(u)) - 1;
  i0 = std::clamp<std::ptrdiff_t>(i0, 0, static_cast<std::ptrdiff_t>(g.size) - 4);
  double s = u - static_cast<double>(i0);  // position relative to node i0, nodes at 0,1,2,3
  w[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  w[1] = s * (s - 2) * (s - 3) / 2.0;
  w[2] = -s * (s - 1) * (s - 3) / 2.0;
  w[3] = s * (s - 1) * (s - 2) / 6.0;
  return static_cast<std::size_t>(i0);
}

std::size_t hermite_cell(const UniformGrid& g, double t) {
  if (g.size < 2) throw InvalidArgument("Hermite interpolation needs at least 2 nodes");
  if (!g.contains(t, 1e-9 * g.step)) throw DomainError("profile evaluated outside its grid");
  auto i = static_cast<std::ptrdiff_t>(std::floor((t - g.start) / g.step));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(g.size) - 2));
}

}  // namespace

ScalarProfile::ScalarProfile(UniformGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size) throw InvalidArgument("profile size does not match its grid");
}

double ScalarProfile::operator()(double t) const {
  double w[4];
  std::size_t i0 = lagrange_stencil(grid_, t, w);
  return w[0] * values_[i0] + w[1] * values_[i0 + 1] + w[2] * values_[i0 + 2] + w[3] * values_[i0 + 3];
}

VectorProfile::VectorProfile(UniformGrid grid, std::vector<Eigen::VectorXd> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size) throw InvalidArgument("profile size does not match its grid");
}

Eigen::VectorXd VectorProfile::operator()(double t) const {
  double w[4];
  std::size_t i0 = lagrange_stencil(grid_, t, w);
  return w[0] * values_[i0] + w[1] * values_[i0 + 1] + w[2] * values_[i0 + 2] + w[3] * values_[i0 + 3];
}

HermiteProfile::HermiteProfile(UniformGrid grid, std::vector<Eigen::VectorXd> values,
                               std::vector<Eigen::VectorXd> derivs)
    : grid_(grid), values_(std::move(values)), derivs_(std::move(derivs)) {
  if (values_.size() != grid_.size || derivs_.size() != grid_.size)
    throw InvalidArgument("profile size does not match its grid");
}

Eigen::VectorXd HermiteProfile::value(double t) const {
  std::size_t i = hermite_cell(grid_, t);
  const double h = grid_.step;
  const double s = (t - grid_.node(i)) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * values_[i] + h10 * h * derivs_[i] + h01 * values_[i + 1] + h11 * h * derivs_[i + 1];
}

Eigen::VectorXd HermiteProfile::derivative(double t) const {
  std::size_t i = hermite_cell(grid_, t);
  const double h = grid_.step;
  const double s = (t - grid_.node(i)) / h;
  const double d00 = 6 * s * s - 6 * s;
  const double d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -6 * s * s + 6 * s;
  const double d11 = 3 * s * s - 2 * s;
  return (d00 * values_[i] + d01 * values_[i + 1]) / h + d10 * derivs_[i] + d11 * derivs_[i + 1];
}

namespace {

Eigen::VectorXd rk4_step(const OdeRhs& f, double t, const Eigen::VectorXd& y, double h) {
  Eigen::VectorXd k1 = f(t, y);
  Eigen::VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  Eigen::VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  Eigen::VectorXd k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::VectorXd integrate_rk4(const OdeRhs& f, double t0, Eigen::VectorXd y, double t1, double h_init, double tol,
                              OdeStats* stats) {
  if (!(tol > 0.0) || !(h_init > 0.0)) throw InvalidArgument("integrate_rk4 needs positive tolerance and step");
  const double span = t1 - t0;
  if (span == 0.0) return y;
  const double dir = span > 0 ? 1.0 : -1.0;
  const double h_min = 1e-12 * std::abs(span);
  double h = std::min(h_init, std::abs(span));
  double t = t0;
  while (dir * (t1 - t) > 0.0) {
    double remaining = std::abs(t1 - t);
    bool last = h >= remaining;
    double step = last ? remaining : h;
    Eigen::VectorXd full = rk4_step(f, t, y, dir * step);
    Eigen::VectorXd half = rk4_step(f, t, y, 0.5 * dir * step);
    half = rk4_step(f, t + 0.5 * dir * step, half, 0.5 * dir * step);
    double err = (half - full).cwiseAbs().maxCoeff() / 15.0;
    if (!std::isfinite(err)) throw NumericalError("integrate_rk4: non-finite state");
    if (err <= tol) {
      y = half + (half - full) / 15.0;
      t = last ? t1 : t + dir * step;
      if (stats) ++stats->accepted;
      double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
      h = step * std::clamp(grow, 1.0, 4.0);
    } else {
      if (stats) ++stats->rejected;
      h = step * std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.9);
      if (h < h_min) throw NumericalError("integrate_rk4: step size collapsed below 1e-12 of the interval");
    }
  }
  return y;
}

}  // namespace kakeya
