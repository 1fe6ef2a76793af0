#pragma once

// Discretized Kakeya, Nikodym and curved Kakeya maximal functions on scalar grids.
// A tube T_omega^delta(x) is the open delta-neighborhood of the unit segment
// centered at x with direction omega. Integrals are cell-center sums times the
// cell volume; values are normalized by delta^(d-1).

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kakeya/grid.hpp"
#include "kakeya/phase_expr.hpp"
#include "kakeya/space_forms.hpp"

namespace kakeya {

struct MaximalScanResult {
  std::string kind;  // "kakeya", "nikodym" or "curved"
  double delta = 0.0;
  std::vector<Eigen::VectorXd> parameters;  // directions, positions or frequencies
  std::vector<double> values;
  std::vector<Eigen::VectorXd> witnesses;  // maximizing x, direction or omega
  std::size_t argmax = 0;                  // first index attaining the sup

  double sup() const { return values.empty() ? 0.0 : values[argmax]; }
};

/// Unit directions with spacing at most `spacing`: uniform angles on the circle
/// (d = 2) or a Fibonacci net of ceil(4 pi / spacing^2) points (d = 3).
std::vector<Eigen::VectorXd> direction_net(int d, double spacing);

/// K_delta f(omega) for each direction: sup over x on a lattice of cell centers
/// with stride round(delta / (2 cell)). Ties go to the lexicographically smallest x.
MaximalScanResult kakeya_maximal(const ScalarGrid& f, double delta, const std::vector<Eigen::VectorXd>& directions);

/// N_delta f(x) for each position, sup over `directions`. Euclidean models use
/// straight tubes through the nearest cell center. Curved models treat the grid
/// as chart coordinates: tubes are model-metric delta-neighborhoods of the unit
/// geodesic through x with chart direction omega, weighted by the volume density.
MaximalScanResult nikodym_maximal(const ScalarGrid& f, double delta, const std::vector<Eigen::VectorXd>& positions,
                                  const std::vector<Eigen::VectorXd>& directions, const SpaceForm& model);

/// Curved Kakeya maximal function of phi on a grid in (x, t) coordinates. For each
/// y the sup runs over omega on a delta-lattice of the open epsilon0-ball; tubes
/// are restricted to |x| < epsilon0, |t| < epsilon0.
MaximalScanResult curved_maximal(const PhaseFunction& phi, const ScalarGrid& f, double delta,
                                 const std::vector<Eigen::VectorXd>& ys);

/// (mean |v_i|^q)^(1/q); q = infinity gives the max.
double scan_norm(const MaximalScanResult& r, double q);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares slope of log scan_norm(r, q) against log delta. Needs >= 3
/// distinct deltas.
ScalingFit lp_scaling_fit(const std::vector<MaximalScanResult>& scans, double q);

}  // namespace kakeya
