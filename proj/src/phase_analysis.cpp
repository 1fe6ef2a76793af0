#include "kakeya/phase_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "kakeya/parallel.hpp"

namespace kakeya {

namespace {

constexpr double kMinorFloor = 1e-14;
constexpr double kTNormFloor = 1e-8;
constexpr double kFrobFloor = 1e-12;
constexpr double kFieldStep = 1e-4;
constexpr int kNewtonMaxIter = 50;
constexpr double kNewtonStepTol = 1e-12;
constexpr double kMaxCondition = 1e8;

void finalize(ConditionReport& r, const std::vector<PhasePoint>& samples, bool shortfall) {
  r.max_residual = 0.0;
  r.witness = 0;
  for (std::size_t i = 0; i < r.residuals.size(); ++i) {
    if (r.residuals[i] > r.max_residual) {
      r.max_residual = r.residuals[i];
      r.witness = i;
    }
  }
  if (!samples.empty()) r.witness_point = samples[r.witness];
  r.pass = shortfall ? r.max_residual == 0.0 : r.max_residual < r.tolerance;
}

Eigen::MatrixXd directional_hessian(const PhaseFunction& phi, const PhasePoint& pt, const Eigen::VectorXd& g) {
  const auto zs = xt_vars(phi.dim());
  const int m = phi.dim() - 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < zs.size(); ++k) {
    if (g(k) == 0.0) continue;
    Var extra[1] = {zs[k]};
    out += g(k) * hessian_y(phi, pt, extra);
  }
  return out;
}

BourgainResult finish_bourgain(Eigen::MatrixXd m1, Eigen::MatrixXd m2) {
  BourgainResult r;
  const double n1 = m1.norm();
  const double n2 = m2.norm();
  if (n2 < kFrobFloor) {
    r.c = n1 < kFrobFloor ? 0.0 : (m2.cwiseProduct(m1)).sum() / (n1 * n1);
    r.residual = 0.0;
  } else if (n1 < kFrobFloor) {
    r.c_defined = false;
    r.residual = 1.0;
  } else {
    r.c = (m2.cwiseProduct(m1)).sum() / (n1 * n1);
    r.residual = (m2 - r.c * m1).norm() / n2;
  }
  r.m1 = std::move(m1);
  r.m2 = std::move(m2);
  return r;
}

std::vector<double> lattice_axis(double r) { return {-r, -0.5 * r, 0.0, 0.5 * r, r}; }

}  // namespace

Eigen::VectorXd generalized_cross(const Eigen::MatrixXd& v) {
  const Eigen::Index d = v.rows();
  if (v.cols() != d - 1) throw InvalidArgument("generalized_cross needs a d x (d-1) matrix");
  Eigen::VectorXd out(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::MatrixXd minor(d - 1, d - 1);
    for (Eigen::Index r = 0, rr = 0; r < d; ++r) {
      if (r == i) continue;
      minor.row(rr++) = v.row(r);
    }
    double det = d == 1 ? 1.0 : minor.determinant();
    out(i) = (i % 2 == 0) ? det : -det;
  }
  return out;
}

Eigen::VectorXd g0(const PhaseFunction& phi, const PhasePoint& pt) {
  Eigen::VectorXd g = generalized_cross(mixed_xt_y(phi, pt));
  if (g.cwiseAbs().maxCoeff() < kMinorFloor) throw DomainError("G0 vanishes: all minors of the mixed Hessian are below 1e-14");
  const double gt = g(g.size() - 1);
  if (std::abs(gt) > kTNormFloor) return g / gt;
  return g.normalized();
}

std::vector<PhasePoint> default_samples(const PhaseFunction& phi, std::uint64_t seed) {
  const int m = phi.dim() - 1;
  const double r = 0.8 * phi.epsilon0();
  const auto axis = lattice_axis(r);
  const int ncoord = 2 * m + 1;
  std::size_t total = 1;
  for (int i = 0; i < ncoord; ++i) total *= axis.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-r / 8, r / 8);
  std::vector<PhasePoint> out;
  for (std::size_t code = 0; code < total; ++code) {
    PhasePoint p = PhasePoint::zero(phi.dim());
    std::size_t c = code;
    for (int i = 0; i < ncoord; ++i) {
      double v = axis[c % axis.size()];
      c /= axis.size();
      if (seed != 0) v += jitter(rng);
      if (i < m) p.x(i) = v;
      else if (i == m) p.t = std::clamp(v, -r, r);
      else p.y(i - m - 1) = v;
    }
    if (p.x.norm() <= r && p.y.norm() <= r) out.push_back(std::move(p));
  }
  return out;
}

std::vector<PhasePoint> default_xt_samples(const PhaseFunction& phi, const Eigen::VectorXd& y, std::uint64_t seed) {
  const int m = phi.dim() - 1;
  if (y.size() != m) throw InvalidArgument("y has the wrong dimension");
  const double r = 0.8 * phi.epsilon0();
  const auto axis = lattice_axis(r);
  std::size_t total = 1;
  for (int i = 0; i <= m; ++i) total *= axis.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-r / 8, r / 8);
  std::vector<PhasePoint> out;
  for (std::size_t code = 0; code < total; ++code) {
    PhasePoint p(Eigen::VectorXd::Zero(m), 0.0, y);
    std::size_t c = code;
    for (int i = 0; i <= m; ++i) {
      double v = axis[c % axis.size()];
      c /= axis.size();
      if (seed != 0) v += jitter(rng);
      if (i < m) p.x(i) = v;
      else p.t = std::clamp(v, -r, r);
    }
    if (p.x.norm() <= r) out.push_back(std::move(p));
  }
  return out;
}

ConditionReport check_h1(const PhaseFunction& phi, const std::vector<PhasePoint>& samples, double tol) {
  ConditionReport r;
  r.name = "h1";
  r.tolerance = tol;
  r.residuals.assign(samples.size(), 0.0);
  r.values.assign(samples.size(), 0.0);
  parallel_for(samples.size(), [&](std::size_t i) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mixed_xt_y(phi, samples[i]));
    const auto& s = svd.singularValues();
    double ratio = s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
    r.values[i] = ratio;
    r.residuals[i] = std::max(0.0, 1.0 - ratio / tol);
  });
  finalize(r, samples, true);
  return r;
}

Eigen::MatrixXd h2_matrix(const PhaseFunction& phi, const PhasePoint& pt) {
  return directional_hessian(phi, pt, g0(phi, pt));
}

ConditionReport check_h2(const PhaseFunction& phi, const Eigen::VectorXd& y0, const std::vector<PhasePoint>& samples,
                         double tol) {
  ConditionReport r;
  r.name = "h2";
  r.tolerance = tol;
  r.residuals.assign(samples.size(), 0.0);
  r.values.assign(samples.size(), 0.0);
  std::vector<PhasePoint> pts(samples);
  for (auto& p : pts) p.y = y0;
  parallel_for(pts.size(), [&](std::size_t i) {
    double det = std::abs(h2_matrix(phi, pts[i]).determinant());
    r.values[i] = det;
    r.residuals[i] = std::max(0.0, 1.0 - det / tol);
  });
  finalize(r, pts, true);
  return r;
}

BourgainResult bourgain_residual(const PhaseFunction& phi, const PhasePoint& pt, const Eigen::VectorXd& g) {
  const auto zs = xt_vars(phi.dim());
  if (g.size() != static_cast<Eigen::Index>(zs.size())) throw InvalidArgument("direction has the wrong dimension");
  const int m = phi.dim() - 1;
  Eigen::MatrixXd m1 = directional_hessian(phi, pt, g);
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < zs.size(); ++k) {
    for (std::size_t l = 0; l < zs.size(); ++l) {
      double w = g(k) * g(l);
      if (w == 0.0) continue;
      Var extra[2] = {zs[k], zs[l]};
      m2 += w * hessian_y(phi, pt, extra);
    }
  }
  return finish_bourgain(std::move(m1), std::move(m2));
}

BourgainResult bourgain_residual(const PhaseFunction& phi, const PhasePoint& pt, BourgainMode mode) {
  Eigen::VectorXd g = g0(phi, pt);
  if (mode == BourgainMode::Frozen) return bourgain_residual(phi, pt, g);
  auto field = [&](const Eigen::VectorXd& z) {
    PhasePoint q = pt;
    q.set_xt(z);
    return directional_hessian(phi, q, g0(phi, q));
  };
  const Eigen::VectorXd z0 = pt.xt();
  Eigen::MatrixXd m1 = directional_hessian(phi, pt, g);
  Eigen::MatrixXd m2 = (field(z0 + kFieldStep * g) - field(z0 - kFieldStep * g)) / (2.0 * kFieldStep);
  return finish_bourgain(std::move(m1), std::move(m2));
}

ConditionReport check_bourgain(const PhaseFunction& phi, const std::vector<PhasePoint>& samples, double tol,
                               BourgainMode mode) {
  ConditionReport r;
  r.name = "bourgain";
  r.tolerance = tol;
  r.residuals.assign(samples.size(), 0.0);
  r.values.assign(samples.size(), 0.0);
  std::vector<char> undefined(samples.size(), 0);
  parallel_for(samples.size(), [&](std::size_t i) {
    BourgainResult b = bourgain_residual(phi, samples[i], mode);
    r.residuals[i] = b.residual;
    r.values[i] = b.c;
    undefined[i] = b.c_defined ? 0 : 1;
  });
  if (std::any_of(undefined.begin(), undefined.end(), [](char c) { return c != 0; }))
    r.flags.push_back("C undefined at some samples");
  finalize(r, samples, false);
  return r;
}

ConditionReport check_translation_invariant(const PhaseFunction& phi, const std::vector<PhasePoint>& samples,
                                            double tol) {
  ConditionReport r;
  r.name = "translation";
  r.tolerance = tol;
  r.residuals.assign(samples.size(), 0.0);
  const auto xs = [&] {
    auto v = xt_vars(phi.dim());
    v.pop_back();
    return v;
  }();
  parallel_for(samples.size(), [&](std::size_t i) {
    const PhasePoint& p = samples[i];
    Eigen::VectorXd dx = phi.partial_vector(xs, {}, p);
    double res = (dx - p.y).cwiseAbs().maxCoeff();
    PhasePoint p0 = p;
    p0.t = 0.0;
    res = std::max(res, std::abs(phi(p0) - p.x.dot(p.y)));
    r.residuals[i] = res;
  });
  finalize(r, samples, false);
  return r;
}

ConditionReport check_straight_condition(const PhaseFunction& phi, const std::vector<PhasePoint>& samples, double tol) {
  ConditionReport r;
  r.name = "straight";
  r.tolerance = tol;
  const std::size_t n = samples.size();
  r.residuals.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    if ((samples[i].y - samples[0].y).norm() != 0.0)
      throw InvalidArgument("straight-condition samples must share one y");
  }
  std::vector<Eigen::VectorXd> dirs(n);
  parallel_for(n, [&](std::size_t i) { dirs[i] = g0(phi, samples[i]).normalized(); });
  parallel_for(n, [&](std::size_t i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.5 * (dirs[i] - dirs[j]).norm() * (dirs[i] + dirs[j]).norm();
      worst = std::max(worst, s);
    }
    r.residuals[i] = worst;
  });
  if (n < 4) r.flags.push_back("insufficient samples");
  finalize(r, samples, false);
  return r;
}

namespace {

bool looks_translation_invariant(const PhaseFunction& phi, const Eigen::VectorXd& y, const Eigen::VectorXd& base_x,
                                 const std::vector<double>& t_grid) {
  std::vector<PhasePoint> probes;
  std::vector<double> ts = {0.0};
  if (!t_grid.empty()) {
    ts.push_back(t_grid.front());
    ts.push_back(t_grid.back());
  }
  const Eigen::Index m = base_x.size();
  for (double t : ts) {
    probes.emplace_back(base_x, t, y);
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::VectorXd x = base_x;
      x(i) += 0.1;
      probes.emplace_back(x, t, y);
    }
  }
  return check_translation_invariant(phi, probes, 1e-9).pass;
}

}  // namespace

CurveTrace trace_curve(const PhaseFunction& phi, const Eigen::VectorXd& y, const Eigen::VectorXd& base_x,
                       const std::vector<double>& t_grid, TraceMethod method) {
  const int m = phi.dim() - 1;
  if (y.size() != m || base_x.size() != m) throw InvalidArgument("trace_curve: y or base has the wrong dimension");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw InvalidArgument("trace_curve: t-grid must be increasing");

  CurveTrace out;
  if (method == TraceMethod::Auto)
    method = looks_translation_invariant(phi, y, base_x, t_grid) ? TraceMethod::TranslationInvariant
                                                                  : TraceMethod::Newton;
  out.method = method;

  const Eigen::VectorXd v0 = grad_y(phi, PhasePoint(base_x, 0.0, y));
  const std::size_t n = t_grid.size();
  std::vector<Eigen::VectorXd> xs(n);
  std::vector<char> ok(n, 0);

  if (method == TraceMethod::TranslationInvariant) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
    const Eigen::VectorXd g0y = grad_y(phi, PhasePoint(zero, 0.0, y));
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = base_x + g0y - grad_y(phi, PhasePoint(zero, t_grid[i], y));
      ok[i] = 1;
    }
  } else {
    auto xs_vars = xt_vars(phi.dim());
    xs_vars.pop_back();
    const auto ys = y_vars(phi.dim());
    auto solve_at = [&](double t, Eigen::VectorXd x, std::string& why) -> std::optional<Eigen::VectorXd> {
      for (int it = 0; it < kNewtonMaxIter; ++it) {
        PhasePoint p(x, t, y);
        Eigen::VectorXd f = grad_y(phi, p) - v0;
        Eigen::MatrixXd j = phi.partial_matrix(ys, xs_vars, {}, p);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
        const auto& s = svd.singularValues();
        if (!(s(s.size() - 1) > 0.0) || s(0) / s(s.size() - 1) > kMaxCondition) {
          why = "x-block condition number above 1e8 at t = " + std::to_string(t);
          return std::nullopt;
        }
        Eigen::VectorXd step = j.fullPivLu().solve(f);
        x -= step;
        if (step.norm() < kNewtonStepTol) return x;
      }
      why = "Newton did not converge within 50 iterations at t = " + std::to_string(t);
      return std::nullopt;
    };
    // Outward from t = 0: first the nonnegative part, then the negative part.
    const std::size_t split = static_cast<std::size_t>(
        std::lower_bound(t_grid.begin(), t_grid.end(), 0.0) - t_grid.begin());
    std::string why;
    Eigen::VectorXd warm = base_x;
    for (std::size_t i = split; i < n; ++i) {
      auto x = t_grid[i] == 0.0 ? std::optional<Eigen::VectorXd>(base_x) : solve_at(t_grid[i], warm, why);
      if (!x) break;
      xs[i] = *x;
      ok[i] = 1;
      warm = *x;
    }
    warm = base_x;
    for (std::size_t i = split; i-- > 0;) {
      auto x = solve_at(t_grid[i], warm, why);
      if (!x) break;
      xs[i] = *x;
      ok[i] = 1;
      warm = *x;
    }
    out.diagnostic = why;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) {
      out.complete = false;
      continue;
    }
    out.t.push_back(t_grid[i]);
  }
  out.points.resize(static_cast<Eigen::Index>(out.t.size()), m + 1);
  for (std::size_t i = 0, row = 0; i < n; ++i) {
    if (!ok[i]) continue;
    out.points.row(static_cast<Eigen::Index>(row)).head(m) = xs[i].transpose();
    out.points(static_cast<Eigen::Index>(row), m) = t_grid[i];
    ++row;
  }
  return out;
}

bool tube_contains(const PhaseFunction& phi, const Eigen::VectorXd& y, const Eigen::VectorXd& base_xt, double delta,
                   const Eigen::VectorXd& query_xt) {
  PhasePoint b, q;
  b.y = y;
  q.y = y;
  b.set_xt(base_xt);
  q.set_xt(query_xt);
  return (grad_y(phi, q) - grad_y(phi, b)).norm() < delta;
}

}  // namespace kakeya
