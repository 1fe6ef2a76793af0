#include "kakeya/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kakeya/errors.hpp"
#include "kakeya/geometry_measure.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/straighten_geo.hpp"

namespace kakeya {

std::vector<Eigen::VectorXd> direction_net(int d, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("direction net spacing must be positive");
  std::vector<Eigen::VectorXd> out;
  if (d == 2) {
    const int m = static_cast<int>(std::ceil(2.0 * std::numbers::pi / spacing));
    for (int i = 0; i < m; ++i) {
      double a = 2.0 * std::numbers::pi * i / m;
      out.push_back(Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
  } else if (d == 3) {
    const int m = static_cast<int>(std::ceil(4.0 * std::numbers::pi / (spacing * spacing)));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      double z = 1.0 - (2.0 * i + 1.0) / m;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = golden * i;
      out.push_back(Eigen::Vector3d(r * std::cos(a), r * std::sin(a), z));
    }
  } else {
    throw InvalidArgument("direction nets support d = 2 or d = 3");
  }
  return out;
}

namespace {

struct Run {
  int dy, dz, x0, x1;
};

// Cells (as offsets from the center cell) whose centers lie in the tube of
// direction omega centered at a cell center. Each row is one x-run by convexity.
std::vector<Run> tube_pattern(const GridSpec& spec, const Eigen::VectorXd& omega, double delta) {
  const double h = spec.cell();
  const int R = static_cast<int>(std::ceil((0.5 + delta) / h)) + 1;
  GridSpec local{spec.d, (2 * R + 1) * h / 2.0, 2 * R + 1};
  const int m = local.n;
  const std::size_t rows = spec.d == 2 ? m : static_cast<std::size_t>(m) * m;
  std::vector<int> lo(rows, std::numeric_limits<int>::max()), hi(rows, std::numeric_limits<int>::min());
  Eigen::VectorXd u = omega.normalized();
  visit_segment_cells(local, Eigen::VectorXd(-0.5 * u), Eigen::VectorXd(0.5 * u), delta, 0, m, [&](std::size_t f) {
    auto idx = local.unflat(f);
    std::size_t row = static_cast<std::size_t>(idx[1]) + (spec.d == 3 ? static_cast<std::size_t>(m) * idx[2] : 0);
    lo[row] = std::min(lo[row], idx[0]);
    hi[row] = std::max(hi[row], idx[0]);
  });
  std::vector<Run> runs;
  for (std::size_t row = 0; row < rows; ++row) {
    if (lo[row] > hi[row]) continue;
    int iy = static_cast<int>(row % m), iz = spec.d == 3 ? static_cast<int>(row / m) : R;
    runs.push_back({iy - R, iz - R, lo[row] - R, hi[row] - R});
  }
  return runs;
}

// Row-wise prefix sums of |f| along the first axis.
struct RowPrefix {
  int n;
  std::vector<double> p;

  explicit RowPrefix(const ScalarGrid& f) : n(f.spec().n) {
    const std::size_t rows = f.spec().cells() / static_cast<std::size_t>(n);
    p.assign(rows * (n + 1), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += std::abs(f[r * n + i]);
        p[r * (n + 1) + i + 1] = acc;
      }
    }
  }

  double tube_sum(const std::vector<Run>& runs, int ix, int iy, int iz, bool three_d) const {
    double s = 0.0;
    for (const Run& run : runs) {
      int ry = iy + run.dy, rz = iz + run.dz;
      if (ry < 0 || ry >= n) continue;
      if (three_d && (rz < 0 || rz >= n)) continue;
      int a = std::max(0, ix + run.x0), b = std::min(n - 1, ix + run.x1);
      if (a > b) continue;
      std::size_t row = static_cast<std::size_t>(ry) + (three_d ? static_cast<std::size_t>(n) * rz : 0);
      s += p[row * (n + 1) + b + 1] - p[row * (n + 1) + a];
    }
    return s;
  }
};

void check_delta(const GridSpec& spec, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (delta < 2.0 * spec.cell()) throw InvalidArgument("delta is smaller than two cell widths");
}

void finish_argmax(MaximalScanResult& r) {
  r.argmax = 0;
  for (std::size_t i = 1; i < r.values.size(); ++i)
    if (r.values[i] > r.values[r.argmax]) r.argmax = i;
}

std::array<int, 3> snap(const GridSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.d) throw InvalidArgument("position dimension does not match the grid");
  std::array<int, 3> idx{0, 0, 0};
  for (int q = 0; q < spec.d; ++q) {
    if (std::abs(x(q)) > spec.L) throw InvalidArgument("position outside the grid box");
    idx[q] = std::clamp(spec.locate(x(q)), 0, spec.n - 1);
  }
  return idx;
}

Eigen::VectorXd center_of_idx(const GridSpec& spec, const std::array<int, 3>& idx) {
  Eigen::VectorXd c(spec.d);
  for (int q = 0; q < spec.d; ++q) c(q) = spec.center(idx[q]);
  return c;
}

}  // namespace

MaximalScanResult kakeya_maximal(const ScalarGrid& f, double delta, const std::vector<Eigen::VectorXd>& directions) {
  const GridSpec& spec = f.spec();
  check_delta(spec, delta);
  const bool three_d = spec.d == 3;
  const double scale = spec.cell_volume() / std::pow(delta, spec.d - 1);
  const int stride = std::max(1, static_cast<int>(std::lround(delta / (2.0 * spec.cell()))));
  const int start = ((spec.n - 1) % stride) / 2;
  RowPrefix prefix(f);

  MaximalScanResult r;
  r.kind = "kakeya";
  r.delta = delta;
  r.parameters = directions;
  r.values.assign(directions.size(), 0.0);
  r.witnesses.assign(directions.size(), Eigen::VectorXd());
  parallel_for(directions.size(), [&](std::size_t k) {
    if (directions[k].size() != spec.d) throw InvalidArgument("direction dimension does not match the grid");
    auto runs = tube_pattern(spec, directions[k], delta);
    double best = -1.0;
    std::array<int, 3> arg{start, start, three_d ? start : 0};
    for (int ix = start; ix < spec.n; ix += stride)
      for (int iy = start; iy < spec.n; iy += stride)
        for (int iz = three_d ? start : 0; iz < (three_d ? spec.n : 1); iz += stride) {
          double s = prefix.tube_sum(runs, ix, iy, iz, three_d);
          if (s > best) {
            best = s;
            arg = {ix, iy, iz};
          }
        }
    r.values[k] = best * scale;
    r.witnesses[k] = center_of_idx(spec, arg);
  });
  finish_argmax(r);
  return r;
}

namespace {

// Model distance from ambient point q to the unit geodesic segment s in [-1/2, 1/2].
double segment_distance(Model kind, const double* q, const double* p, const double* u, int D) {
  if (kind == Model::Sphere) {
    double a = 0, b = 0;
    for (int i = 0; i < D; ++i) {
      a += q[i] * p[i];
      b += q[i] * u[i];
    }
    double s = std::atan2(b, a);
    if (std::abs(s) <= 0.5) return std::asin(std::sqrt(std::clamp(1.0 - a * a - b * b, 0.0, 1.0)));
    double c0 = std::cos(0.5), s0 = std::sin(0.5);
    double best = std::max(a * c0 + b * s0, a * c0 - b * s0);
    return std::acos(std::clamp(best, -1.0, 1.0));
  }
  // hyperboloid, Minkowski product with the last coordinate negative
  double a = q[D - 1] * p[D - 1], b = -q[D - 1] * u[D - 1];
  for (int i = 0; i < D - 1; ++i) {
    a -= q[i] * p[i];
    b += q[i] * u[i];
  }
  double s = std::atanh(std::clamp(b / a, -1.0, 1.0));
  if (std::abs(s) <= 0.5) return std::asinh(std::sqrt(std::max(0.0, a * a - b * b - 1.0)));
  double ch = std::cosh(0.5), sh = std::sinh(0.5);
  double best = std::min(a * ch - b * sh, a * ch + b * sh);
  return std::acosh(std::max(1.0, best));
}

MaximalScanResult nikodym_model(const ScalarGrid& f, double delta, const std::vector<Eigen::VectorXd>& positions,
                                const std::vector<Eigen::VectorXd>& directions, const SpaceForm& model) {
  const GridSpec& spec = f.spec();
  const ChartMap chart = ChartMap::for_model(model);
  const int D = model.ambient_dim();
  const std::size_t cells = spec.cells();
  std::vector<double> ambient(cells * D), weight(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    Eigen::VectorXd u = spec.center_of(c);
    if (!chart.in_domain(u)) continue;
    auto pt = chart.inverse(u);
    for (int i = 0; i < D; ++i) ambient[c * D + i] = pt.coords(i);
    weight[c] = std::abs(f[c]) * chart.volume_density(u);
  }
  const double scale = spec.cell_volume() / std::pow(delta, spec.d - 1);

  MaximalScanResult r;
  r.kind = "nikodym";
  r.delta = delta;
  r.parameters = positions;
  r.values.assign(positions.size(), 0.0);
  r.witnesses.assign(positions.size(), Eigen::VectorXd());
  parallel_for(positions.size(), [&](std::size_t i) {
    const Eigen::VectorXd& x = positions[i];
    if (x.size() != spec.d) throw InvalidArgument("position dimension does not match the grid");
    SFPoint<double> base = chart.inverse(x);
    Eigen::MatrixXd J = chart.inverse_jacobian(x);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < directions.size(); ++k) {
      SFGeodesic<double> geo = make_geodesic(model, base, Eigen::VectorXd(J * directions[k].normalized()));
      Eigen::VectorXd a = chart.forward(geodesic_eval(model, geo, -0.5));
      Eigen::VectorXd b = chart.forward(geodesic_eval(model, geo, 0.5));
      // chart length <= K * model length near the segment
      double rmax = std::max(a.norm(), b.norm()) + 4.0 * delta;
      double K = chart.kind == ChartKind::Gnomonic ? 1.0 + rmax * rmax : 1.0;
      double s = 0.0;
      visit_segment_cells(spec, a, b, K * delta * (1.0 + 1e-9), 0, spec.n, [&](std::size_t c) {
        if (weight[c] == 0.0) return;
        if (segment_distance(model.kind, &ambient[c * D], geo.base.coords.data(), geo.direction.data(), D) < delta)
          s += weight[c];
      });
      if (s > best) {
        best = s;
        arg = k;
      }
    }
    r.values[i] = best * scale;
    r.witnesses[i] = directions.empty() ? Eigen::VectorXd() : directions[arg];
  });
  finish_argmax(r);
  return r;
}

}  // namespace

MaximalScanResult nikodym_maximal(const ScalarGrid& f, double delta, const std::vector<Eigen::VectorXd>& positions,
                                  const std::vector<Eigen::VectorXd>& directions, const SpaceForm& model) {
  const GridSpec& spec = f.spec();
  check_delta(spec, delta);
  if (model.dim != spec.d) throw InvalidArgument("model and grid dimensions differ");
  for (const auto& w : directions)
    if (w.size() != spec.d || w.norm() == 0.0) throw InvalidArgument("directions must be nonzero d-vectors");
  if (model.kind != Model::Euclidean) return nikodym_model(f, delta, positions, directions, model);

  const bool three_d = spec.d == 3;
  const double scale = spec.cell_volume() / std::pow(delta, spec.d - 1);
  RowPrefix prefix(f);
  std::vector<std::vector<Run>> patterns(directions.size());
  parallel_for(directions.size(), [&](std::size_t k) { patterns[k] = tube_pattern(spec, directions[k], delta); });

  MaximalScanResult r;
  r.kind = "nikodym";
  r.delta = delta;
  r.parameters = positions;
  r.values.assign(positions.size(), 0.0);
  r.witnesses.assign(positions.size(), Eigen::VectorXd());
  parallel_for(positions.size(), [&](std::size_t i) {
    auto idx = snap(spec, positions[i]);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      double s = prefix.tube_sum(patterns[k], idx[0], idx[1], idx[2], three_d);
      if (s > best) {
        best = s;
        arg = k;
      }
    }
    r.values[i] = std::max(best, 0.0) * scale;
    r.witnesses[i] = directions.empty() ? Eigen::VectorXd() : directions[arg];
  });
  finish_argmax(r);
  return r;
}

MaximalScanResult curved_maximal(const PhaseFunction& phi, const ScalarGrid& f, double delta,
                                 const std::vector<Eigen::VectorXd>& ys) {
  const GridSpec& spec = f.spec();
  const int d = spec.d;
  if (phi.dim() != d) throw InvalidArgument("phase and grid dimensions differ");
  check_delta(spec, delta);
  const double eps = phi.epsilon0();

  // support of f inside the phase domain
  std::vector<std::size_t> cells;
  std::vector<Eigen::VectorXd> xts;
  for (std::size_t c = 0; c < spec.cells(); ++c) {
    if (f[c] == 0.0) continue;
    Eigen::VectorXd z = spec.center_of(c);
    if (z.head(d - 1).norm() < eps && std::abs(z(d - 1)) < eps) {
      cells.push_back(c);
      xts.push_back(std::move(z));
    }
  }

  // omega lattice of spacing delta in the open eps-ball, first axis slowest
  std::vector<Eigen::VectorXd> omegas;
  const int K = static_cast<int>(std::floor(eps / delta));
  std::vector<int> k(d - 1, -K);
  for (;;) {
    Eigen::VectorXd w(d - 1);
    for (int q = 0; q < d - 1; ++q) w(q) = delta * k[q];
    if (w.norm() < eps) omegas.push_back(w);
    int q = d - 2;
    while (q >= 0 && ++k[q] > K) k[q--] = -K;
    if (q < 0) break;
  }

  std::vector<Expr> grad;
  for (int j = 0; j < d - 1; ++j) grad.push_back(phi.derivative({var_y(j)}));
  auto grad_at = [&](const Eigen::VectorXd& xt, const Eigen::VectorXd& y) {
    PhasePoint pt(xt.head(d - 1), xt(d - 1), y);
    Eigen::VectorXd g(d - 1);
    for (int j = 0; j < d - 1; ++j) g(j) = eval(grad[j], pt);
    return g;
  };

  const double scale = spec.cell_volume() / std::pow(delta, d - 1);
  MaximalScanResult r;
  r.kind = "curved";
  r.delta = delta;
  r.parameters = ys;
  r.values.assign(ys.size(), 0.0);
  r.witnesses.assign(ys.size(), Eigen::VectorXd());
  parallel_for(ys.size(), [&](std::size_t i) {
    const Eigen::VectorXd& y = ys[i];
    if (y.size() != d - 1) throw InvalidArgument("frequency dimension must be d - 1");
    Eigen::MatrixXd G(d - 1, cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) G.col(c) = grad_at(xts[c], y);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t w = 0; w < omegas.size(); ++w) {
      Eigen::VectorXd base(d);
      base << omegas[w], 0.0;
      Eigen::VectorXd g0 = grad_at(base, y);
      double s = 0.0;
      for (std::size_t c = 0; c < cells.size(); ++c)
        if ((G.col(c) - g0).squaredNorm() < delta * delta) s += std::abs(f[cells[c]]);
      if (s > best) {
        best = s;
        arg = w;
      }
    }
    r.values[i] = std::max(best, 0.0) * scale;
    r.witnesses[i] = omegas.empty() ? Eigen::VectorXd() : omegas[arg];
  });
  finish_argmax(r);
  return r;
}

double scan_norm(const MaximalScanResult& r, double q) {
  if (r.values.empty()) throw InvalidArgument("empty scan");
  if (std::isinf(q)) return r.sup();
  if (!(q > 0.0)) throw InvalidArgument("norm exponent must be positive");
  double s = 0.0;
  for (double v : r.values) s += std::pow(std::abs(v), q);
  return std::pow(s / static_cast<double>(r.values.size()), 1.0 / q);
}

ScalingFit lp_scaling_fit(const std::vector<MaximalScanResult>& scans, double q) {
  std::vector<double> x, y;
  for (const auto& s : scans) {
    double nrm = scan_norm(s, q);
    if (!(nrm > 0.0)) throw NumericalError("scaling fit needs positive norms");
    if (std::find(x.begin(), x.end(), std::log(s.delta)) == x.end()) {
      x.push_back(std::log(s.delta));
      y.push_back(std::log(nrm));
    }
  }
  if (x.size() < 3) throw InvalidArgument("scaling fit needs at least 3 distinct deltas");
  auto fit = least_squares_fit(x, y);
  return {fit[0], fit[1], fit[2]};
}

}  // namespace kakeya
