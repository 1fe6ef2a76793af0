#include "kakeya/phase_straighten.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kakeya/errors.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/phase_analysis.hpp"

namespace kakeya {

namespace {

constexpr double kSingularRatio = 1e-12;
constexpr double kFrobFloor = 1e-12;
constexpr double kMinAlphaDerivative = 1e-6;
constexpr double kRichardsonStep = 1e-4;
constexpr double kHessianStep = 1e-2;

std::string at_t(double t) {
  std::ostringstream os;
  os << " at t = " << t;
  return os.str();
}

PhasePoint at_origin(int dim, double t, const Eigen::VectorXd& y) {
  return PhasePoint(Eigen::VectorXd::Zero(dim - 1), t, y);
}

PhasePoint kappa_point(const Kappa& kappa, const Eigen::VectorXd& xt, const Eigen::VectorXd& y) {
  PhasePoint p;
  p.set_xt(kappa.apply(xt));
  p.y = y;
  return p;
}

Eigen::VectorXd xt_of(const Eigen::VectorXd& x, double t) {
  Eigen::VectorXd z(x.size() + 1);
  z.head(x.size()) = x;
  z(x.size()) = t;
  return z;
}

double big_phi(const PhaseFunction& phi, const Kappa& kappa, double t, const Eigen::VectorXd& y) {
  return phi(kappa_point(kappa, xt_of(Eigen::VectorXd::Zero(phi.dim() - 1), t), y));
}

}  // namespace

std::vector<Eigen::VectorXd> lattice_ball(int dim, double radius, int per_axis) {
  if (dim < 2 || per_axis < 1) throw InvalidArgument("lattice_ball: bad dimension or lattice size");
  const int m = dim - 1;
  std::vector<double> axis(per_axis);
  for (int i = 0; i < per_axis; ++i)
    axis[i] = per_axis == 1 ? 0.0 : -radius + 2.0 * radius * i / (per_axis - 1);
  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(per_axis);
  std::vector<Eigen::VectorXd> out;
  for (std::size_t code = 0; code < total; ++code) {
    Eigen::VectorXd y(m);
    std::size_t c = code;
    for (int i = 0; i < m; ++i) {
      y(i) = axis[c % per_axis];
      c /= per_axis;
    }
    if (y.norm() <= radius * (1 + 1e-12)) out.push_back(std::move(y));
  }
  return out;
}

CExtraction extract_c(const PhaseFunction& phi, const UniformGrid& grid, const std::vector<Eigen::VectorXd>& ys,
                      double tol) {
  if (ys.empty()) throw InvalidArgument("extract_c needs y samples");
  const std::size_t n = grid.size;
  std::vector<double> mean(n), spread(n), prop(n);
  std::vector<char> singular(n, 0);
  const Var dt[1] = {var_t()};
  const Var dtt[2] = {var_t(), var_t()};
  parallel_for(n, [&](std::size_t k) {
    const double t = grid.node(k);
    double lo = INFINITY, hi = -INFINITY, sum = 0.0, worst = 0.0;
    for (const auto& y : ys) {
      PhasePoint p = at_origin(phi.dim(), t, y);
      Eigen::MatrixXd m = hessian_y(phi, p, dt);
      Eigen::MatrixXd nn = hessian_y(phi, p, dtt);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
      const auto& s = svd.singularValues();
      if (!(s(0) > 0.0) || s(s.size() - 1) / s(0) < kSingularRatio) {
        singular[k] = 1;
        return;
      }
      double c = nn.cwiseProduct(m).sum() / m.squaredNorm();
      double nnorm = nn.norm();
      if (nnorm >= kFrobFloor) worst = std::max(worst, (nn - c * m).norm() / nnorm);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      sum += c;
    }
    mean[k] = sum / static_cast<double>(ys.size());
    spread[k] = hi - lo;
    prop[k] = worst;
  });
  CExtraction out;
  for (std::size_t k = 0; k < n; ++k) {
    if (singular[k]) throw ConditionFailure("d/dt grad_y^2 psi is singular" + at_t(grid.node(k)));
    if (prop[k] > tol)
      throw ConditionFailure("d^2/dt^2 grad_y^2 psi is not proportional to d/dt grad_y^2 psi (residual " +
                             std::to_string(prop[k]) + ")" + at_t(grid.node(k)));
    if (spread[k] > tol)
      throw ConditionFailure("c depends on y (spread " + std::to_string(spread[k]) + ")" + at_t(grid.node(k)));
    out.spread = std::max(out.spread, spread[k]);
    out.proportionality = std::max(out.proportionality, prop[k]);
  }
  out.c = ScalarProfile(grid, std::move(mean));
  return out;
}

AExtraction extract_A(const PhaseFunction& phi, const ScalarProfile& c, const std::vector<Eigen::VectorXd>& ys,
                      double tol) {
  if (ys.empty()) throw InvalidArgument("extract_A needs y samples");
  const UniformGrid& grid = c.grid();
  const int m = phi.dim() - 1;
  const auto yv = y_vars(phi.dim());
  const Var dt[1] = {var_t()};
  const Var dtt[2] = {var_t(), var_t()};
  std::vector<Eigen::VectorXd> mean(grid.size);
  std::vector<double> spread(grid.size);
  parallel_for(grid.size, [&](std::size_t k) {
    const double t = grid.node(k);
    const double ck = c.values()[k];
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, INFINITY), hi = Eigen::VectorXd::Constant(m, -INFINITY);
    for (const auto& y : ys) {
      PhasePoint p = at_origin(phi.dim(), t, y);
      Eigen::VectorXd v = phi.partial_vector(yv, dtt, p) - ck * phi.partial_vector(yv, dt, p);
      sum += v;
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    mean[k] = sum / static_cast<double>(ys.size());
    spread[k] = (hi - lo).maxCoeff();
  });
  AExtraction out;
  for (std::size_t k = 0; k < grid.size; ++k) {
    if (spread[k] > tol)
      throw ConditionFailure("A depends on y (spread " + std::to_string(spread[k]) + ")" + at_t(grid.node(k)));
    out.spread = std::max(out.spread, spread[k]);
  }
  out.a = VectorProfile(grid, std::move(mean));
  return out;
}

HermiteProfile solve_B(const ScalarProfile& c, const VectorProfile& a, double tol) {
  const UniformGrid& grid = c.grid();
  if (a.grid().size != grid.size || a.grid().start != grid.start || a.grid().step != grid.step)
    throw InvalidArgument("solve_B: c and A must share a grid");
  const Eigen::Index m = a.dim();
  OdeRhs rhs = [&](double t, const Eigen::VectorXd& s) {
    Eigen::VectorXd ds(2 * m);
    ds.head(m) = s.tail(m);
    ds.tail(m) = c(t) * s.tail(m) - a(t);
    return ds;
  };
  std::vector<Eigen::VectorXd> b(grid.size), db(grid.size);
  const std::size_t i0 = grid.nearest(0.0);
  if (std::abs(grid.node(i0)) > 1e-12) throw InvalidArgument("solve_B: grid must contain t = 0");
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2 * m);
  b[i0] = zero.head(m);
  db[i0] = zero.tail(m);
  Eigen::VectorXd s = zero;
  for (std::size_t k = i0 + 1; k < grid.size; ++k) {
    s = integrate_rk4(rhs, grid.node(k - 1), s, grid.node(k), grid.step, tol);
    b[k] = s.head(m);
    db[k] = s.tail(m);
  }
  s = zero;
  for (std::size_t k = i0; k-- > 0;) {
    s = integrate_rk4(rhs, grid.node(k + 1), s, grid.node(k), grid.step, tol);
    b[k] = s.head(m);
    db[k] = s.tail(m);
  }
  return HermiteProfile(grid, std::move(b), std::move(db));
}

Reparam Reparam::identity(const UniformGrid& grid) {
  std::vector<Eigen::VectorXd> v(grid.size), d(grid.size, Eigen::VectorXd::Ones(1));
  for (std::size_t i = 0; i < grid.size; ++i) v[i] = Eigen::VectorXd::Constant(1, grid.node(i));
  return Reparam(HermiteProfile(grid, std::move(v), std::move(d)));
}

double Reparam::min_derivative() const {
  double lo = INFINITY;
  for (const auto& d : profile_.derivatives()) lo = std::min(lo, d(0));
  return lo;
}

double Reparam::inverse(double s) const {
  const UniformGrid& g = grid();
  const double lo = (*this)(g.start), hi = (*this)(g.end());
  if (!(s >= lo - 1e-14 && s <= hi + 1e-14)) throw DomainError("alpha inverse: value outside the range of alpha");
  double t = std::clamp(s, g.start, g.end());
  for (int it = 0; it < 60; ++it) {
    double step = ((*this)(t) - s) / derivative(t);
    t = std::clamp(t - step, g.start, g.end());
    if (std::abs(step) < 1e-15) break;
  }
  return t;
}

Reparam solve_alpha(const ScalarProfile& c, const UniformGrid& grid, double tol) {
  OdeRhs rhs = [&](double, const Eigen::VectorXd& s) {
    if (!c.grid().contains(s(0))) throw DomainError("alpha left the range of the c profile");
    Eigen::VectorXd ds(2);
    ds(0) = s(1);
    ds(1) = -c(s(0)) * s(1) * s(1);
    return ds;
  };
  std::vector<Eigen::VectorXd> a(grid.size), da(grid.size);
  const std::size_t i0 = grid.nearest(0.0);
  if (std::abs(grid.node(i0)) > 1e-12) throw InvalidArgument("solve_alpha: grid must contain t = 0");
  const Eigen::Vector2d init(0.0, 1.0);
  auto store = [&](std::size_t k, const Eigen::VectorXd& s) {
    if (!(s(1) > kMinAlphaDerivative))
      throw NumericalError("alpha' dropped to " + std::to_string(s(1)) + at_t(grid.node(k)));
    a[k] = s.head(1);
    da[k] = s.tail(1);
  };
  store(i0, init);
  Eigen::VectorXd s = init;
  for (std::size_t k = i0 + 1; k < grid.size; ++k) {
    s = integrate_rk4(rhs, grid.node(k - 1), s, grid.node(k), grid.step, tol);
    store(k, s);
  }
  s = init;
  for (std::size_t k = i0; k-- > 0;) {
    s = integrate_rk4(rhs, grid.node(k + 1), s, grid.node(k), grid.step, tol);
    store(k, s);
  }
  return Reparam(HermiteProfile(grid, std::move(a), std::move(da)));
}

Kappa Kappa::identity(int dim) {
  Kappa k;
  k.identity_ = true;
  k.dim_ = dim;
  return k;
}

Eigen::VectorXd Kappa::apply(const Eigen::VectorXd& xt) const {
  if (identity_) return xt;
  const Eigen::Index m = xt.size() - 1;
  Eigen::VectorXd out(xt.size());
  const double s = alpha_(xt(m));
  out.head(m) = xt.head(m) + b_.value(s);
  out(m) = s;
  return out;
}

Eigen::VectorXd Kappa::inverse(const Eigen::VectorXd& xt) const {
  if (identity_) return xt;
  const Eigen::Index m = xt.size() - 1;
  Eigen::VectorXd out(xt.size());
  out.head(m) = xt.head(m) - b_.value(xt(m));
  out(m) = alpha_.inverse(xt(m));
  return out;
}

Eigen::MatrixXd Kappa::jacobian(const Eigen::VectorXd& xt) const {
  const Eigen::Index d = xt.size();
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(d, d);
  if (identity_) return j;
  const double t = xt(d - 1);
  const double da = alpha_.derivative(t);
  j.col(d - 1).head(d - 1) = b_.derivative(alpha_(t)) * da;
  j(d - 1, d - 1) = da;
  return j;
}

double Kappa::jacobian_det(double t) const { return identity_ ? 1.0 : alpha_.derivative(t); }

VerifyReport verify_straightened(const PhaseFunction& phi, const Kappa& kappa, const UniformGrid& t_grid,
                                 const std::vector<Eigen::VectorXd>& ys, double tol, double x_tol) {
  const int m = phi.dim() - 1;
  const std::size_t n = t_grid.size;
  if (n < 3) throw InvalidArgument("verify_straightened needs at least 3 t nodes");
  std::vector<Eigen::VectorXd> probes_x;
  for (int i = 0; i < m; ++i) probes_x.push_back(0.1 * Eigen::VectorXd::Unit(m, i));
  probes_x.push_back(Eigen::VectorXd::Constant(m, -0.05));

  std::vector<double> res(ys.size()), lin(ys.size());
  const double h2 = t_grid.step * t_grid.step;
  parallel_for(ys.size(), [&](std::size_t j) {
    const auto& y = ys[j];
    std::vector<Eigen::VectorXd> g(n);
    std::vector<double> base(n);
    for (std::size_t k = 0; k < n; ++k) {
      PhasePoint p = kappa_point(kappa, xt_of(Eigen::VectorXd::Zero(m), t_grid.node(k)), y);
      g[k] = grad_y(phi, p);
      base[k] = phi(p);
    }
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) worst = std::max(worst, ((g[k + 1] - 2.0 * g[k] + g[k - 1]) / h2).norm());
    double wl = 0.0;
    for (const auto& x : probes_x) {
      for (std::size_t k = 0; k < n; ++k) {
        double v = phi(kappa_point(kappa, xt_of(x, t_grid.node(k)), y));
        wl = std::max(wl, std::abs(v - base[k] - x.dot(y)));
      }
    }
    res[j] = worst;
    lin[j] = wl;
  });
  VerifyReport r;
  for (std::size_t j = 0; j < ys.size(); ++j) {
    r.residual = std::max(r.residual, res[j]);
    r.x_linearity = std::max(r.x_linearity, lin[j]);
  }
  r.n_points = ys.size() * (n - 2);
  r.pass = r.residual < tol && r.x_linearity < x_tol;
  return r;
}

double recovered_h(const PhaseFunction& phi, const Kappa& kappa, const Eigen::VectorXd& y) {
  auto dphi = [&](const Eigen::VectorXd& yy) {
    auto central = [&](double h) {
      return (big_phi(phi, kappa, h, yy) - big_phi(phi, kappa, -h, yy)) / (2.0 * h);
    };
    double coarse = central(kRichardsonStep);
    double fine = central(0.5 * kRichardsonStep);
    return (4.0 * fine - coarse) / 3.0;
  };
  return dphi(y) - dphi(Eigen::VectorXd::Zero(y.size()));
}

HqfSamples recover_hqf(const PhaseFunction& phi, const Kappa& kappa, const UniformGrid& t_grid,
                       const std::vector<Eigen::VectorXd>& ys, double tol, double det_tol) {
  const int m = phi.dim() - 1;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  HqfSamples out;
  out.ys = ys;
  out.phi00 = big_phi(phi, kappa, 0.0, zero);
  out.h.resize(ys.size());
  out.q.resize(ys.size());
  parallel_for(ys.size(), [&](std::size_t j) {
    out.h[j] = recovered_h(phi, kappa, ys[j]);
    out.q[j] = big_phi(phi, kappa, 0.0, ys[j]) - out.phi00;
  });
  out.t = t_grid.nodes();
  out.f.resize(out.t.size());
  for (std::size_t k = 0; k < out.t.size(); ++k) out.f[k] = big_phi(phi, kappa, out.t[k], zero) - out.phi00;

  std::vector<double> worst(ys.size(), 0.0);
  parallel_for(ys.size(), [&](std::size_t j) {
    for (std::size_t k = 0; k < out.t.size(); ++k) {
      double model = out.t[k] * out.h[j] + out.q[j] + out.f[k] + out.phi00;
      worst[j] = std::max(worst[j], std::abs(big_phi(phi, kappa, out.t[k], ys[j]) - model));
    }
  });
  for (double w : worst) out.reconstruction_residual = std::max(out.reconstruction_residual, w);

  const double s = kHessianStep;
  out.h_hessian.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = i; k < m; ++k) {
      auto hv = [&](double a, double b) {
        Eigen::VectorXd y = zero;
        y(i) += a;
        y(k) += b;
        return recovered_h(phi, kappa, y);
      };
      double v = (hv(s, s) - hv(s, -s) - hv(-s, s) + hv(-s, -s)) / (4.0 * s * s);
      out.h_hessian(i, k) = v;
      out.h_hessian(k, i) = v;
    }
  }
  out.h_hessian_det = out.h_hessian.determinant();
  out.pass = out.reconstruction_residual < tol && std::abs(out.h_hessian_det) > det_tol;
  return out;
}

StraighteningResult straighten_phase(const PhaseFunction& phi, const StraightenOptions& opt) {
  const double profile_half = opt.t_max * opt.profile_margin;
  if (!(opt.t_max > 0.0) || !(opt.profile_margin >= 1.0))
    throw InvalidArgument("straighten: t_max must be positive and the profile margin at least 1");
  if (profile_half >= phi.epsilon0()) throw InvalidArgument("straighten: profile range exceeds epsilon0");
  if (opt.y_radius >= phi.epsilon0()) throw InvalidArgument("straighten: y radius exceeds epsilon0");

  StraighteningResult r;
  ConditionReport ti = check_translation_invariant(phi, default_samples(phi));
  r.translation_residual = ti.max_residual;
  if (!ti.pass)
    throw ConditionFailure("phase is not translation invariant (residual " + std::to_string(ti.max_residual) + ")");

  r.working_grid = UniformGrid::symmetric(opt.t_max, opt.spacing);
  const UniformGrid profile_grid = UniformGrid::symmetric(profile_half, opt.spacing);
  const auto ys = lattice_ball(phi.dim(), opt.y_radius, opt.y_per_axis);

  r.c = extract_c(phi, profile_grid, ys, opt.c_tol);
  r.a = extract_A(phi, r.c.c, ys, opt.a_tol);
  r.b = solve_B(r.c.c, r.a.a, opt.ode_tol);
  r.alpha = solve_alpha(r.c.c, r.working_grid, opt.ode_tol);
  r.min_alpha_derivative = r.alpha.min_derivative();
  r.kappa = Kappa(r.b, r.alpha);
  r.verify = verify_straightened(phi, r.kappa, r.working_grid, ys, opt.verify_tol, opt.x_linearity_tol);
  r.hqf = recover_hqf(phi, r.kappa, r.working_grid, ys, opt.reconstruction_tol, opt.hessian_det_tol);
  r.success = r.verify.pass && r.hqf.pass && r.min_alpha_derivative > 0.0;
  return r;
}

}  // namespace kakeya
