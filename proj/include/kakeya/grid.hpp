#pragma once

// Uniform grids on the box [-L, L]^d (d = 2 or 3). Cell (i_1, ..., i_d) has
// center -L + (i + 1/2) * 2L/n per axis; the flat index varies fastest in i_1.

#include <array>
#include <bit>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace kakeya {

struct GridSpec {
  int d = 2;
  double L = 1.0;
  int n = 64;

  /// Throws InvalidArgument unless d is 2 or 3, L > 0 and n >= 1.
  void validate() const;
  double cell() const { return 2.0 * L / n; }
  double cell_volume() const;
  double center(int i) const { return -L + (i + 0.5) * cell(); }
  /// Index of the cell containing coordinate v (may be out of [0, n)).
  int locate(double v) const;
  std::size_t cells() const;
  std::size_t slice_cells() const;  // cells per value of the last index
  std::size_t flat(const std::array<int, 3>& idx) const;
  std::array<int, 3> unflat(std::size_t flat) const;
  Eigen::VectorXd center_of(std::size_t flat) const;
};

/// Bit-packed occupancy. Each slice of the last axis starts on a fresh word,
/// so writers that own disjoint last-axis ranges never share a word.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  bool test(std::size_t flat) const;
  void set(std::size_t flat);
  std::size_t count() const;
  /// Occupied flat indices in increasing order.
  std::vector<std::uint64_t> occupied() const;
  /// Calls fn(flat) for each occupied cell in increasing order.
  template <class F>
  void for_each_occupied(F&& fn) const;

  nlohmann::json to_json() const;
  static OccupancyGrid from_json(const nlohmann::json& j);

  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b);

 private:
  std::size_t word_of(std::size_t flat, unsigned* bit) const;
  GridSpec spec_;
  std::size_t words_per_slice_ = 0;
  std::vector<std::uint64_t> words_;
};

class ScalarGrid {
 public:
  ScalarGrid() = default;
  explicit ScalarGrid(const GridSpec& spec, double fill = 0.0);

  const GridSpec& spec() const { return spec_; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  const std::vector<double>& values() const { return values_; }

  /// f(center) sampled at every cell center.
  template <class F>
  static ScalarGrid sample(const GridSpec& spec, F&& f);
  /// 1 on occupied cells, 0 elsewhere.
  static ScalarGrid indicator(const OccupancyGrid& g);

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

template <class F>
void OccupancyGrid::for_each_occupied(F&& fn) const {
  const std::size_t per = spec_.slice_cells();
  for (int s = 0; s < spec_.n; ++s) {
    const std::size_t base_word = static_cast<std::size_t>(s) * words_per_slice_;
    for (std::size_t w = 0; w < words_per_slice_; ++w) {
      std::uint64_t bits = words_[base_word + w];
      while (bits) {
        unsigned b = static_cast<unsigned>(std::countr_zero(bits));
        bits &= bits - 1;
        fn(static_cast<std::size_t>(s) * per + w * 64 + b);
      }
    }
  }
}

template <class F>
ScalarGrid ScalarGrid::sample(const GridSpec& spec, F&& f) {
  ScalarGrid g(spec);
  for (std::size_t i = 0; i < spec.cells(); ++i) g.values_[i] = f(spec.center_of(i));
  return g;
}

}  // namespace kakeya
