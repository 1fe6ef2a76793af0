#include "kakeya/grid.hpp"

#include <bit>
#include <cmath>

#include "kakeya/errors.hpp"

namespace kakeya {

void GridSpec::validate() const {
  if (d != 2 && d != 3) throw InvalidArgument("grids support d = 2 or d = 3");
  if (!(L > 0.0)) throw InvalidArgument("grid half-width L must be positive");
  if (n < 1) throw InvalidArgument("grid resolution must be positive");
}

double GridSpec::cell_volume() const { return std::pow(cell(), d); }

int GridSpec::locate(double v) const { return static_cast<int>(std::floor((v + L) / cell())); }

std::size_t GridSpec::cells() const { return slice_cells() * static_cast<std::size_t>(n); }

std::size_t GridSpec::slice_cells() const {
  return d == 2 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
}

std::size_t GridSpec::flat(const std::array<int, 3>& idx) const {
  const auto nn = static_cast<std::size_t>(n);
  std::size_t f = static_cast<std::size_t>(idx[0]) + nn * static_cast<std::size_t>(idx[1]);
  if (d == 3) f += nn * nn * static_cast<std::size_t>(idx[2]);
  return f;
}

std::array<int, 3> GridSpec::unflat(std::size_t f) const {
  const auto nn = static_cast<std::size_t>(n);
  std::array<int, 3> idx{0, 0, 0};
  idx[0] = static_cast<int>(f % nn);
  f /= nn;
  idx[1] = static_cast<int>(f % nn);
  if (d == 3) idx[2] = static_cast<int>(f / nn);
  return idx;
}

Eigen::VectorXd GridSpec::center_of(std::size_t f) const {
  auto idx = unflat(f);
  Eigen::VectorXd c(d);
  for (int a = 0; a < d; ++a) c(a) = center(idx[a]);
  return c;
}

OccupancyGrid::OccupancyGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  words_per_slice_ = (spec_.slice_cells() + 63) / 64;
  words_.assign(words_per_slice_ * static_cast<std::size_t>(spec_.n), 0);
}

std::size_t OccupancyGrid::word_of(std::size_t flat, unsigned* bit) const {
  const std::size_t per = spec_.slice_cells();
  const std::size_t slice = flat / per;
  const std::size_t off = flat % per;
  *bit = static_cast<unsigned>(off % 64);
  return slice * words_per_slice_ + off / 64;
}

bool OccupancyGrid::test(std::size_t flat) const {
  unsigned b;
  std::size_t w = word_of(flat, &b);
  return (words_[w] >> b) & 1u;
}

void OccupancyGrid::set(std::size_t flat) {
  unsigned b;
  std::size_t w = word_of(flat, &b);
  words_[w] |= std::uint64_t{1} << b;
}

std::size_t OccupancyGrid::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<std::uint64_t> OccupancyGrid::occupied() const {
  std::vector<std::uint64_t> out;
  out.reserve(count());
  for_each_occupied([&](std::size_t f) { out.push_back(f); });
  return out;
}

nlohmann::json OccupancyGrid::to_json() const {
  return nlohmann::json{{"d", spec_.d}, {"L", spec_.L}, {"n", spec_.n}, {"occupied", occupied()}};
}

OccupancyGrid OccupancyGrid::from_json(const nlohmann::json& j) {
  try {
    GridSpec spec;
    spec.d = j.value("d", 2);
    spec.L = j.at("L").get<double>();
    spec.n = j.at("n").get<int>();
    OccupancyGrid g(spec);
    const std::size_t total = spec.cells();
    for (const auto& v : j.at("occupied")) {
      auto f = v.get<std::uint64_t>();
      if (f >= total) throw InvalidArgument("occupied index out of range");
      g.set(static_cast<std::size_t>(f));
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed grid JSON: ") + e.what());
  }
}

bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
  return a.spec_.d == b.spec_.d && a.spec_.n == b.spec_.n && a.spec_.L == b.spec_.L && a.words_ == b.words_;
}

ScalarGrid::ScalarGrid(const GridSpec& spec, double fill) : spec_(spec) {
  spec_.validate();
  values_.assign(spec_.cells(), fill);
}

ScalarGrid ScalarGrid::indicator(const OccupancyGrid& g) {
  ScalarGrid s(g.spec());
  g.for_each_occupied([&](std::size_t f) { s.values_[f] = 1.0; });
  return s;
}

}  // namespace kakeya
