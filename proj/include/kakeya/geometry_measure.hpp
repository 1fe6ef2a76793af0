#pragma once

// Tube families, rasterization, box counting and Nikodym coverage.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kakeya/grid.hpp"
#include "kakeya/phase_expr.hpp"
#include "kakeya/space_forms.hpp"

namespace kakeya {

struct TubeFamily {
  std::vector<Eigen::MatrixXd> polylines;  // one point per row
  double delta = 0.0;
  std::string provenance;
};

enum class RasterMode { Center, Conservative };

struct RasterResult {
  OccupancyGrid grid;
  bool coarse_warning = false;  // cell size exceeds delta
};

/// Smallest L with every tube of the family inside [-L, L]^d: max |coordinate| + delta.
double bounding_half_width(const TubeFamily& family);

/// Center mode: a cell is occupied iff its center lies within distance delta
/// of some polyline. Conservative mode: iff one of its corners does.
RasterResult rasterize_tubes(const TubeFamily& family, const GridSpec& spec, RasterMode mode = RasterMode::Center);

/// Euclidean distance from p to the segment [a, b].
double point_segment_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Calls fn(flat) for every cell whose center is within distance r of the
/// segment [a, b], restricted to last-axis indices in [z0, z1). A cell is
/// visited at most once per call.
template <class F>
void visit_segment_cells(const GridSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double r, int z0,
                         int z1, F&& fn);

struct BoxCountReport {
  std::vector<int> k;
  std::vector<double> scale;  // 2^-k * 2L
  std::vector<std::uint64_t> counts;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (x_i, y_i); returns (slope, intercept, r2).
std::array<double, 3> least_squares_fit(const std::vector<double>& x, const std::vector<double>& y);

/// N_k = number of dyadic blocks of side 2^-k * 2L containing an occupied cell.
/// Needs n a power of two, 2^kmax <= n and at least 3 scales.
BoxCountReport box_count(const OccupancyGrid& grid, int kmin, int kmax);
/// Same for a point cloud (one point per row) inside [-L, L]^d.
BoxCountReport box_count_points(const Eigen::MatrixXd& points, double L, int kmin, int kmax);

/// Curves of phi through (omega_i, 0) for each y_i, traced on t_grid.
TubeFamily phase_curve_family(const PhaseFunction& phi, const std::vector<Eigen::VectorXd>& ys,
                              const std::vector<Eigen::VectorXd>& omegas, const std::vector<double>& t_grid,
                              double delta, const std::string& provenance);

/// per_axis^(d-1) points on the cube [-radius, radius]^(d-1).
std::vector<Eigen::VectorXd> square_lattice(int dim, double radius, int per_axis);

/// Bourgain's phase x.y + t y1 y2 + t^2/2 y1^2 (d = 3) with omega(y) = (0, -y2).
TubeFamily bourgain_compression_family(int per_axis, double y_radius, double t_half, int nodes, double delta);
/// <x,y> + t|y|^2/2 on the same y-lattice with omega uniform in [-y_radius, y_radius]^(d-1).
TubeFamily straight_family(int dim, int per_axis, double y_radius, double t_half, int nodes, double delta,
                           std::uint64_t seed);

struct CoverageResult {
  std::vector<char> covered;
  std::vector<double> best_fraction;
  std::vector<int> best_direction;
  std::size_t n_covered = 0;
};

/// For each base point (chart coordinates) and each direction, samples the
/// unit geodesic segment centered at the base at `samples` midpoints of equal
/// arclength cells and measures the fraction landing in occupied cells.
/// Euclidean models use straight segments; curved models map through their chart.
CoverageResult nikodym_coverage(const OccupancyGrid& omega, const std::vector<Eigen::VectorXd>& bases,
                                const std::vector<Eigen::VectorXd>& directions, double lambda,
                                const SpaceForm& model, int samples = 256);

// ---------------------------------------------------------------------------

template <class F>
void visit_segment_cells(const GridSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b, double r, int z0,
                         int z1, F&& fn) {
  const int d = spec.d;
  const double h = spec.cell();
  double A[3] = {0, 0, 0}, AB[3] = {0, 0, 0};
  for (int q = 0; q < d; ++q) {
    A[q] = a(q);
    AB[q] = b(q) - a(q);
  }
  int p = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(AB[i]) > std::abs(AB[p])) p = i;
  // cells whose centers lie in [lo, hi]
  auto clamp_idx = [&](double lo, double hi, int& i0, int& i1) {
    i0 = std::max(0, static_cast<int>(std::ceil((lo + spec.L) / h - 0.5)));
    i1 = std::min(spec.n - 1, static_cast<int>(std::floor((hi + spec.L) / h - 0.5)));
  };
  const double len2 = AB[0] * AB[0] + AB[1] * AB[1] + AB[2] * AB[2];
  const double r2 = r * r;
  int p0, p1;
  clamp_idx(std::min(A[p], A[p] + AB[p]) - r, std::max(A[p], A[p] + AB[p]) + r, p0, p1);
  for (int ip = p0; ip <= p1; ++ip) {
    const double cp = spec.center(ip);
    double s0 = 0.0, s1 = 1.0;
    if (AB[p] != 0.0) {
      double u = (cp - r - A[p]) / AB[p], v = (cp + r - A[p]) / AB[p];
      s0 = std::max(0.0, std::min(u, v));
      s1 = std::min(1.0, std::max(u, v));
      if (s0 > s1) continue;
    }
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    bool empty = false;
    for (int q = 0; q < d; ++q) {
      if (q == p) {
        lo[q] = hi[q] = ip;
      } else {
        double e0 = A[q] + s0 * AB[q], e1 = A[q] + s1 * AB[q];
        clamp_idx(std::min(e0, e1) - r, std::max(e0, e1) + r, lo[q], hi[q]);
      }
      if (q == d - 1) {
        lo[q] = std::max(lo[q], z0);
        hi[q] = std::min(hi[q], z1 - 1);
      }
      if (lo[q] > hi[q]) empty = true;
    }
    if (empty) continue;
    double c[3] = {0, 0, 0};
    for (int iz = lo[2]; iz <= hi[2]; ++iz) {
      if (d == 3) c[2] = spec.center(iz) - A[2];
      for (int iy = lo[1]; iy <= hi[1]; ++iy) {
        c[1] = spec.center(iy) - A[1];
        for (int ix = lo[0]; ix <= hi[0]; ++ix) {
          c[0] = spec.center(ix) - A[0];
          double s = len2 > 0.0 ? (c[0] * AB[0] + c[1] * AB[1] + c[2] * AB[2]) / len2 : 0.0;
          s = std::clamp(s, 0.0, 1.0);
          double dx = c[0] - s * AB[0], dy = c[1] - s * AB[1], dz = c[2] - s * AB[2];
          if (dx * dx + dy * dy + dz * dz < r2) fn(spec.flat({ix, iy, iz}));
        }
      }
    }
  }
}

}  // namespace kakeya
