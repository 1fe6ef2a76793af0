#include "kakeya/phase_spec.hpp"

#include <fstream>

namespace kakeya {

PhaseFunction phase_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw InvalidArgument("phase spec must be a JSON object");
  if (!spec.contains("d") || !spec["d"].is_number_integer()) throw InvalidArgument("phase spec needs integer \"d\"");
  if (!spec.contains("phase") || !spec["phase"].is_string())
    throw InvalidArgument("phase spec needs string \"phase\"");
  double eps = kDefaultEpsilon0;
  if (spec.contains("epsilon0")) {
    if (!spec["epsilon0"].is_number()) throw InvalidArgument("\"epsilon0\" must be a number");
    eps = spec["epsilon0"].get<double>();
  }
  int d = spec["d"].get<int>();
  std::string src = spec["phase"].get<std::string>();
  if (src.empty()) throw InvalidArgument("\"phase\" is empty");
  return PhaseFunction::parse(src, d, eps);
}

PhaseFunction load_phase_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open phase spec '" + path + "'");
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("phase spec '" + path + "' is not valid JSON: " + e.what());
  }
  return phase_from_json(spec);
}

nlohmann::json phase_to_json(const PhaseFunction& phi) {
  return {{"d", phi.dim()}, {"phase", phi.source()}, {"epsilon0", phi.epsilon0()}};
}

}  // namespace kakeya
