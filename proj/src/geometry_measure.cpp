#include "kakeya/geometry_measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "kakeya/errors.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/phase_analysis.hpp"
#include "kakeya/straighten_geo.hpp"

namespace kakeya {

double point_segment_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd ab = b - a;
  double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - a - s * ab).norm();
}

double bounding_half_width(const TubeFamily& family) {
  double m = 0.0;
  for (const auto& pl : family.polylines)
    if (pl.size() > 0) m = std::max(m, pl.cwiseAbs().maxCoeff());
  return m + family.delta;
}

namespace {

struct Segment {
  Eigen::VectorXd a, b;
  int z_lo, z_hi;  // last-axis index range that can be touched
};

bool any_corner_within(const GridSpec& spec, std::size_t flat, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       double r) {
  const Eigen::VectorXd c = spec.center_of(flat);
  const double half = 0.5 * spec.cell();
  Eigen::VectorXd corner(spec.d);
  for (int mask = 0; mask < (1 << spec.d); ++mask) {
    for (int q = 0; q < spec.d; ++q) corner(q) = c(q) + ((mask >> q) & 1 ? half : -half);
    if (point_segment_distance(corner, a, b) < r) return true;
  }
  return false;
}

}  // namespace

RasterResult rasterize_tubes(const TubeFamily& family, const GridSpec& spec, RasterMode mode) {
  spec.validate();
  if (!(family.delta > 0.0)) throw InvalidArgument("tube radius must be positive");
  RasterResult out{OccupancyGrid(spec), spec.cell() > family.delta};
  const double h = spec.cell();
  const double reach = mode == RasterMode::Center ? family.delta : family.delta + 0.5 * h * std::sqrt(spec.d);

  std::vector<Segment> segs;
  for (const auto& pl : family.polylines) {
    if (pl.cols() != spec.d) throw InvalidArgument("polyline dimension does not match the grid");
    const Eigen::Index rows = pl.rows();
    for (Eigen::Index i = 0; i + 1 < std::max<Eigen::Index>(rows, 2); ++i) {
      Eigen::VectorXd a = pl.row(std::min(i, rows - 1)).transpose();
      Eigen::VectorXd b = pl.row(std::min(i + 1, rows - 1)).transpose();
      const int last = spec.d - 1;
      double lo = std::min(a(last), b(last)) - reach, hi = std::max(a(last), b(last)) + reach;
      segs.push_back({std::move(a), std::move(b), spec.locate(lo), spec.locate(hi)});
    }
  }

  const int slabs = std::min(spec.n, std::max(1, 4 * thread_count()));
  parallel_for(static_cast<std::size_t>(slabs), [&](std::size_t s) {
    const int z0 = static_cast<int>(s * static_cast<std::size_t>(spec.n) / static_cast<std::size_t>(slabs));
    const int z1 = static_cast<int>((s + 1) * static_cast<std::size_t>(spec.n) / static_cast<std::size_t>(slabs));
    for (const auto& seg : segs) {
      if (seg.z_hi < z0 || seg.z_lo >= z1) continue;
      if (mode == RasterMode::Center) {
        visit_segment_cells(spec, seg.a, seg.b, reach, z0, z1, [&](std::size_t f) { out.grid.set(f); });
      } else {
        visit_segment_cells(spec, seg.a, seg.b, reach, z0, z1, [&](std::size_t f) {
          if (!out.grid.test(f) && any_corner_within(spec, f, seg.a, seg.b, family.delta)) out.grid.set(f);
        });
      }
    }
  });
  return out;
}

std::array<double, 3> least_squares_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw InvalidArgument("least-squares fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("least-squares fit needs distinct abscissae");
  double slope = sxy / sxx;
  double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return {slope, my - slope * mx, r2};
}

namespace {

void check_k_range(int kmin, int kmax) {
  if (kmin < 0 || kmax < kmin) throw InvalidArgument("box count: invalid k range");
  if (kmax - kmin + 1 < 3) throw InvalidArgument("box count needs at least 3 scales");
}

BoxCountReport finish_report(int kmin, int kmax, double L, std::vector<std::uint64_t> counts) {
  BoxCountReport r;
  std::vector<double> xs, ys;
  for (int k = kmin; k <= kmax; ++k) {
    r.k.push_back(k);
    r.scale.push_back(std::ldexp(2.0 * L, -k));
    xs.push_back(k);
    ys.push_back(std::log2(static_cast<double>(std::max<std::uint64_t>(counts[k - kmin], 1))));
  }
  r.counts = std::move(counts);
  auto fit = least_squares_fit(xs, ys);
  r.slope = fit[0];
  r.intercept = fit[1];
  r.r2 = fit[2];
  return r;
}

}  // namespace

BoxCountReport box_count(const OccupancyGrid& grid, int kmin, int kmax) {
  check_k_range(kmin, kmax);
  const GridSpec& spec = grid.spec();
  const auto n = static_cast<unsigned>(spec.n);
  if (!std::has_single_bit(n)) throw InvalidArgument("box count needs a power-of-two resolution");
  const int log_n = std::countr_zero(n);
  if (kmax > log_n) throw InvalidArgument("box count: 2^kmax exceeds the grid resolution");
  const int nk = kmax - kmin + 1;
  std::vector<std::vector<std::uint64_t>> marks(nk);
  for (int k = kmin; k < std::min(kmax + 1, log_n); ++k) {
    std::size_t blocks = std::size_t{1} << (k * spec.d);
    marks[k - kmin].assign((blocks + 63) / 64, 0);
  }
  grid.for_each_occupied([&](std::size_t f) {
    auto idx = spec.unflat(f);
    for (int k = kmin; k < std::min(kmax + 1, log_n); ++k) {
      const int shift = log_n - k;
      std::size_t b = 0;
      for (int q = spec.d - 1; q >= 0; --q) b = (b << k) | static_cast<std::size_t>(idx[q] >> shift);
      marks[k - kmin][b / 64] |= std::uint64_t{1} << (b % 64);
    }
  });
  std::vector<std::uint64_t> counts(nk, 0);
  for (int k = kmin; k <= kmax; ++k) {
    if (k == log_n) {
      counts[k - kmin] = grid.count();
    } else {
      for (auto w : marks[k - kmin]) counts[k - kmin] += static_cast<std::uint64_t>(std::popcount(w));
    }
  }
  return finish_report(kmin, kmax, spec.L, std::move(counts));
}

BoxCountReport box_count_points(const Eigen::MatrixXd& points, double L, int kmin, int kmax) {
  check_k_range(kmin, kmax);
  const Eigen::Index d = points.cols();
  if (d < 1 || kmax * d > 63) throw InvalidArgument("box count: dimension or k too large for 64-bit keys");
  if (!(L > 0.0)) throw InvalidArgument("box count: L must be positive");
  if (points.size() > 0 && points.cwiseAbs().maxCoeff() > L) throw InvalidArgument("box count: point outside [-L, L]^d");
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> keys(static_cast<std::size_t>(points.rows()));
  for (int k = kmin; k <= kmax; ++k) {
    const std::uint64_t side = std::uint64_t{1} << k;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      std::uint64_t key = 0;
      for (Eigen::Index q = d - 1; q >= 0; --q) {
        auto c = static_cast<std::uint64_t>(std::floor((points(i, q) + L) / (2.0 * L) * static_cast<double>(side)));
        key = (key << k) | std::min(c, side - 1);
      }
      keys[static_cast<std::size_t>(i)] = key;
    }
    std::sort(keys.begin(), keys.end());
    counts.push_back(static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin()));
  }
  return finish_report(kmin, kmax, L, std::move(counts));
}

TubeFamily phase_curve_family(const PhaseFunction& phi, const std::vector<Eigen::VectorXd>& ys,
                              const std::vector<Eigen::VectorXd>& omegas, const std::vector<double>& t_grid,
                              double delta, const std::string& provenance) {
  if (ys.size() != omegas.size()) throw InvalidArgument("need one omega per y");
  TubeFamily fam;
  fam.delta = delta;
  fam.provenance = provenance;
  fam.polylines.resize(ys.size());
  parallel_for(ys.size(), [&](std::size_t i) {
    CurveTrace tr = trace_curve(phi, ys[i], omegas[i], t_grid);
    if (!tr.complete) throw NumericalError("curve tracing failed: " + tr.diagnostic);
    fam.polylines[i] = std::move(tr.points);
  });
  return fam;
}

std::vector<Eigen::VectorXd> square_lattice(int dim, double radius, int per_axis) {
  if (dim < 2 || per_axis < 1) throw InvalidArgument("square_lattice: bad dimension or size");
  const int m = dim - 1;
  std::size_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<std::size_t>(per_axis);
  std::vector<Eigen::VectorXd> out;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    Eigen::VectorXd y(m);
    std::size_t c = code;
    for (int i = 0; i < m; ++i) {
      auto j = static_cast<int>(c % static_cast<std::size_t>(per_axis));
      c /= static_cast<std::size_t>(per_axis);
      y(i) = per_axis == 1 ? 0.0 : -radius + 2.0 * radius * j / (per_axis - 1);
    }
    out.push_back(std::move(y));
  }
  return out;
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

TubeFamily bourgain_compression_family(int per_axis, double y_radius, double t_half, int nodes, double delta) {
  PhaseFunction phi = PhaseFunction::parse("x1*y1 + x2*y2 + t*y1*y2 + (t^2/2)*y1^2", 3);
  auto ys = square_lattice(3, y_radius, per_axis);
  std::vector<Eigen::VectorXd> omegas;
  omegas.reserve(ys.size());
  for (const auto& y : ys) omegas.push_back(Eigen::Vector2d(0.0, -y(1)));
  return phase_curve_family(phi, ys, omegas, linspace(-t_half, t_half, nodes), delta, "bourgain-compression");
}

TubeFamily straight_family(int dim, int per_axis, double y_radius, double t_half, int nodes, double delta,
                           std::uint64_t seed) {
  std::string src, sq;
  for (int i = 1; i < dim; ++i) {
    src += (i > 1 ? " + " : "") + ("x" + std::to_string(i)) + "*y" + std::to_string(i);
    sq += (i > 1 ? " + " : "") + ("y" + std::to_string(i)) + "^2";
  }
  PhaseFunction phi = PhaseFunction::parse(src + " + t*(" + sq + ")/2", dim);
  auto ys = square_lattice(dim, y_radius, per_axis);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-y_radius, y_radius);
  std::vector<Eigen::VectorXd> omegas;
  omegas.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    Eigen::VectorXd w(dim - 1);
    for (int q = 0; q < dim - 1; ++q) w(q) = u(rng);
    omegas.push_back(std::move(w));
  }
  return phase_curve_family(phi, ys, omegas, linspace(-t_half, t_half, nodes), delta, "straight-random-omega");
}

CoverageResult nikodym_coverage(const OccupancyGrid& omega, const std::vector<Eigen::VectorXd>& bases,
                                const std::vector<Eigen::VectorXd>& directions, double lambda,
                                const SpaceForm& model, int samples) {
  const GridSpec& spec = omega.spec();
  if (model.dim != spec.d) throw InvalidArgument("coverage: model and grid dimensions differ");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("coverage: lambda must lie in [0, 1]");
  if (samples < 1) throw InvalidArgument("coverage: need at least one sample");
  if (directions.empty()) throw InvalidArgument("coverage: empty direction family");
  const ChartMap chart = ChartMap::for_model(model);

  auto occupied_at = [&](const Eigen::VectorXd& u) {
    std::array<int, 3> idx{0, 0, 0};
    for (int q = 0; q < spec.d; ++q) {
      idx[q] = spec.locate(u(q));
      if (idx[q] < 0 || idx[q] >= spec.n) return false;
    }
    return omega.test(spec.flat(idx));
  };

  CoverageResult r;
  r.covered.assign(bases.size(), 0);
  r.best_fraction.assign(bases.size(), 0.0);
  r.best_direction.assign(bases.size(), 0);
  parallel_for(bases.size(), [&](std::size_t i) {
    const Eigen::VectorXd& x = bases[i];
    double best = -1.0;
    int best_j = 0;
    for (std::size_t j = 0; j < directions.size(); ++j) {
      const Eigen::VectorXd dir = directions[j].normalized();
      int hits = 0;
      if (model.kind == Model::Euclidean) {
        for (int k = 0; k < samples; ++k) {
          double s = -0.5 + (k + 0.5) / samples;
          if (occupied_at(x + s * dir)) ++hits;
        }
      } else {
        SFPoint<double> p = chart.inverse(x);
        SFGeodesic<double> geo = make_geodesic(model, p, Eigen::VectorXd(chart.inverse_jacobian(x) * dir));
        for (int k = 0; k < samples; ++k) {
          double s = -0.5 + (k + 0.5) / samples;
          if (occupied_at(chart.forward(geodesic_eval(model, geo, s)))) ++hits;
        }
      }
      double frac = static_cast<double>(hits) / samples;
      if (frac > best) {
        best = frac;
        best_j = static_cast<int>(j);
      }
    }
    r.best_fraction[i] = best;
    r.best_direction[i] = best_j;
    r.covered[i] = best >= lambda ? 1 : 0;
  });
  for (char c : r.covered) r.n_covered += c ? 1 : 0;
  return r;
}

}  // namespace kakeya
