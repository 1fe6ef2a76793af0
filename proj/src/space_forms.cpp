#include "kakeya/space_forms.hpp"

#include "kakeya/io.hpp"

namespace kakeya {

std::string to_string(Model m) {
  switch (m) {
    case Model::Euclidean: return "euclidean";
    case Model::Sphere: return "sphere";
    case Model::Hyperbolic: return "hyperbolic";
  }
  return "?";
}

Model model_from_string(const std::string& name) {
  if (name == "euclidean") return Model::Euclidean;
  if (name == "sphere") return Model::Sphere;
  if (name == "hyperbolic" || name == "hyperboloid") return Model::Hyperbolic;
  throw InvalidArgument("unknown model '" + name + "' (expected euclidean, sphere or hyperbolic)");
}

void write_point_cloud_csv(const std::string& path, const std::vector<SFPoint<double>>& points) {
  std::vector<std::string> header;
  const Eigen::Index n = points.empty() ? 0 : points.front().coords.size();
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("x" + std::to_string(i + 1));
  CsvWriter csv(path, header);
  for (const auto& p : points) csv.row(std::span<const double>(p.coords.data(), p.coords.size()));
}

}  // namespace kakeya
