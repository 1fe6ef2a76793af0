#include "kakeya/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "kakeya/errors.hpp"
#include "kakeya/geometry_measure.hpp"
#include "kakeya/io.hpp"
#include "kakeya/maximal.hpp"
#include "kakeya/parallel.hpp"
#include "kakeya/phase_analysis.hpp"
#include "kakeya/phase_spec.hpp"
#include "kakeya/phase_straighten.hpp"
#include "kakeya/straighten_geo.hpp"

namespace kakeya::cli {

namespace {

using nlohmann::json;

struct Common {
  std::string spec;
  std::string model = "sphere";
  std::string delta;
  int grid = 0;
  double box = 0.0;
  std::uint64_t seed = 1;
  std::vector<std::string> tol;
  std::string out = ".";
  int threads = 0;
};

/// NAME=VALUE overrides; every name must be consumed by the command.
class Tolerances {
 public:
  explicit Tolerances(const std::vector<std::string>& items) {
    for (const auto& it : items) {
      auto eq = it.find('=');
      if (eq == std::string::npos || eq == 0) throw InvalidArgument("--tol expects NAME=VALUE, got '" + it + "'");
      values_[it.substr(0, eq)] = parse_double(it.substr(eq + 1));
    }
  }
  double get(const std::string& name, double fallback) {
    used_.insert(name);
    auto it = values_.find(name);
    return it == values_.end() ? fallback : it->second;
  }
  void finish() const {
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) throw InvalidArgument("unknown tolerance name '" + k + "' for this command");
  }
  static double parse_double(const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("not a number: '" + s + "'");
    }
  }

 private:
  std::map<std::string, double> values_;
  std::set<std::string> used_;
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(Tolerances::parse_double(item));
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json point_json(const PhasePoint& p) {
  return {{"x", to_std(p.x)}, {"t", p.t}, {"y", to_std(p.y)}};
}

json report_json(const ConditionReport& r) {
  return {{"name", r.name},
          {"max_residual", r.max_residual},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"n_samples", r.residuals.size()},
          {"witness", r.witness},
          {"witness_point", point_json(r.witness_point)},
          {"flags", r.flags}};
}

class Context {
 public:
  Context(const Common& c, CLI::App* sub, std::string name, std::ostream& out)
      : common(c), tols(c.tol), name_(std::move(name)), out_(out) {
    config_["command"] = name_;
    std::vector<CLI::App*> chain;
    for (CLI::App* a = sub; a != nullptr; a = a->get_parent()) chain.insert(chain.begin(), a);
    for (CLI::App* app : chain) {
      for (const CLI::Option* opt : app->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name() == "--version" || opt->get_name().empty()) continue;
        std::string key = opt->get_name();
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        if (opt->count() > 0) {
          auto res = opt->results();
          config_[key] = res.size() == 1 ? json(res.front()) : json(res);
        } else {
          config_[key] = opt->get_default_str();
        }
      }
    }
    std::filesystem::create_directories(common.out);
  }

  std::string path(const std::string& file) const { return (std::filesystem::path(common.out) / file).string(); }

  int finish(json report, bool pass, const std::string& summary) {
    tols.finish();
    report["version"] = kVersion;
    report["config"] = config_;
    report["pass"] = pass;
    std::string file = name_;
    for (char& ch : file)
      if (ch == ' ' || ch == '-') ch = '_';
    write_json(path(file + ".json"), report);
    out_ << name_ << ": " << summary << (pass ? "" : " [FAIL]") << "\n";
    return pass ? kExitOk : kExitConditionFailed;
  }

  SpaceForm model(int dim) const { return SpaceForm(model_from_string(common.model), dim); }
  std::vector<double> deltas(double fallback) const {
    auto v = common.delta.empty() ? std::vector<double>{fallback} : parse_list(common.delta);
    for (double d : v)
      if (!(d > 0.0)) throw InvalidArgument("--delta values must be positive");
    return v;
  }

  const Common& common;
  Tolerances tols;

 private:
  std::string name_;
  std::ostream& out_;
  json config_;
};

// ---------------------------------------------------------------------------
// geo

struct GeoOpts {
  int dim = 2;
  int count = 100;
  int samples = 17;
  double length = 1.0;
  double radius = 0.5;
  int steps = 64;
  int k = 0;
  int lattice = 5;
  double span = 0.5;
  std::size_t pairs = 1000;
};

int geo_straighten(Context& ctx, const GeoOpts& o) {
  SpaceForm sf = ctx.model(o.dim);
  ChartMap chart = ChartMap::for_model(sf);
  double tol_closed = ctx.tols.get("closed", 1e-10), tol_int = ctx.tols.get("integrator", 1e-7);
  if (o.count < 1 || o.samples < 2 || o.steps < 1) throw InvalidArgument("count, samples and steps must be positive");
  std::mt19937_64 rng(ctx.common.seed);
  std::vector<double> s(o.samples);
  for (int k = 0; k < o.samples; ++k) s[k] = -o.length / 2 + o.length * k / (o.samples - 1);
  CsvWriter csv(ctx.path("geodesics.csv"), [&] {
    std::vector<std::string> h{"geodesic", "s"};
    for (int i = 1; i <= o.dim; ++i) h.push_back("u" + std::to_string(i));
    return h;
  }());
  double closed_max = 0.0, int_max = 0.0;
  for (int g = 0; g < o.count; ++g) {
    SFPoint<double> p = random_point_near_center(sf, o.radius, rng);
    Eigen::VectorXd v = random_unit_tangent(sf, p, rng);
    SFGeodesic<double> geo = make_geodesic(sf, p, v);
    StraightenedPolyline pl = straighten_geodesic(sf, geo, chart, s);
    closed_max = std::max(closed_max, pl.residual);
    for (int k = 0; k < o.samples; ++k) {
      std::vector<double> row{static_cast<double>(g), s[k]};
      for (int i = 0; i < o.dim; ++i) row.push_back(pl.images(k, i));
      csv.row(row);
    }
    SFGeodesic<double> start{geodesic_eval(sf, geo, -o.length / 2), geodesic_velocity(sf, geo, -o.length / 2)};
    auto pts = integrate_geodesic(sf, start, o.length, o.steps);
    int_max = std::max(int_max, collinearity_residual(chart_images(chart, pts)));
  }
  bool pass = closed_max < tol_closed && int_max < tol_int;
  json rep{{"residual_max", closed_max},
           {"integrator_residual_max", int_max},
           {"n_samples", o.count * o.samples},
           {"n_geodesics", o.count}};
  return ctx.finish(rep, pass, "residual_max " + format_double(closed_max));
}

int geo_check_lines(Context& ctx, const GeoOpts& o) {
  SpaceForm sf = ctx.model(o.dim);
  ChartMap chart = ChartMap::for_model(sf);
  const int k = o.k > 0 ? o.k : o.dim - 1;
  double tol = ctx.tols.get("hyperplane", 1e-9);
  if (o.lattice < 2) throw InvalidArgument("--lattice must be at least 2");
  std::vector<Eigen::VectorXd> lattice;
  {
    int total = 1;
    for (int i = 0; i < k; ++i) total *= o.lattice;
    for (int code = 0; code < total; ++code) {
      Eigen::VectorXd a(k);
      int c = code;
      for (int i = 0; i < k; ++i, c /= o.lattice) a(i) = -o.span + 2 * o.span * (c % o.lattice) / (o.lattice - 1);
      lattice.push_back(a);
    }
  }
  std::mt19937_64 rng(ctx.common.seed);
  double worst = 0.0;
  for (int g = 0; g < o.count; ++g) {
    SFPoint<double> p = random_point_near_center(sf, o.radius, rng);
    Eigen::MatrixXd basis(sf.ambient_dim(), k);
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd v = random_unit_tangent(sf, p, rng);
      for (int i = 0; i < j; ++i) v -= inner<double>(sf, v, basis.col(i)) * basis.col(i);
      basis.col(j) = v / metric_norm<double>(sf, v);
    }
    auto pts = geodesic_submanifold_sample(sf, p, basis, lattice);
    worst = std::max(worst, flat_fit_residual(chart_images(chart, pts), k));
  }
  json rep{{"residual_max", worst}, {"k", k}, {"n_samples", o.count * static_cast<int>(lattice.size())}};
  return ctx.finish(rep, worst < tol, "residual_max " + format_double(worst));
}

int geo_bilipschitz(Context& ctx, const GeoOpts& o) {
  SpaceForm sf = ctx.model(o.dim);
  auto b = bilipschitz_scan(ChartMap::for_model(sf), o.radius, o.pairs, ctx.common.seed);
  json rep{{"ratio_min", b.ratio_min}, {"ratio_max", b.ratio_max}, {"n_samples", b.n_pairs}, {"radius", o.radius}};
  return ctx.finish(rep, true, "ratio in [" + format_double(b.ratio_min) + ", " + format_double(b.ratio_max) + "]");
}

// ---------------------------------------------------------------------------
// nikodym-to-kakeya

struct N2KOpts {
  std::string input;
  int dim = 3;
  int count = 1000;
};

int nikodym_to_kakeya(Context& ctx, const N2KOpts& o) {
  Eigen::MatrixXd pts;
  if (!o.input.empty()) {
    pts = read_csv_matrix(o.input);
  } else {
    std::mt19937_64 rng(ctx.common.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.5, 2.0);
    pts.resize(o.count, o.dim);
    for (int i = 0; i < o.count; ++i) {
      for (int q = 0; q + 1 < o.dim; ++q) pts(i, q) = u(rng);
      pts(i, o.dim - 1) = pos(rng);
    }
  }
  const Eigen::Index d = pts.cols();
  std::vector<std::string> header;
  for (Eigen::Index i = 1; i <= d; ++i) header.push_back("x" + std::to_string(i));
  for (Eigen::Index i = 1; i <= d; ++i) header.push_back("F" + std::to_string(i));
  CsvWriter csv(ctx.path("nikodym_to_kakeya.csv"), header);
  double inv = 0.0;
  for (Eigen::Index r = 0; r < pts.rows(); ++r) {
    Eigen::VectorXd x = pts.row(r).transpose();
    Eigen::VectorXd fx = projective_nikodym_to_kakeya(x);
    if (x(d - 1) > 0) inv = std::max(inv, (projective_nikodym_to_kakeya(fx) - x).cwiseAbs().maxCoeff());
    std::vector<double> row = to_std(x);
    for (double v : to_std(fx)) row.push_back(v);
    csv.row(row);
  }
  double tol = ctx.tols.get("involution", 1e-12);
  json rep{{"involution_residual", inv}, {"n_samples", pts.rows()}};
  return ctx.finish(rep, inv < tol, "involution residual " + format_double(inv));
}

// ---------------------------------------------------------------------------
// phase

struct PhaseOpts {
  std::string conditions = "h1,h2,translation,bourgain,straight";
  std::string y0;
  bool field = false;
  bool jitter = false;
  double t_max = 0.1;
  double spacing = 1e-3;
  double y_radius = 0.2;
  int per_axis = 5;
  std::string omega_rule = "zero";
  int nodes = 41;
};

PhaseFunction load_spec(const Context& ctx) {
  if (ctx.common.spec.empty()) throw InvalidArgument("--spec is required");
  return load_phase_spec(ctx.common.spec);
}

Eigen::VectorXd y0_of(const PhaseOpts& o, int dim) {
  if (o.y0.empty()) return Eigen::VectorXd::Zero(dim - 1);
  auto v = parse_list(o.y0);
  if (static_cast<int>(v.size()) != dim - 1) throw InvalidArgument("--y0 must have d - 1 entries");
  return to_vec(v);
}

int phase_check(Context& ctx, const PhaseOpts& o) {
  PhaseFunction phi = load_spec(ctx);
  const int d = phi.dim();
  const std::uint64_t seed = o.jitter ? ctx.common.seed : 0;
  auto samples = default_samples(phi, seed);
  Eigen::VectorXd y0 = y0_of(o, d);
  json reports = json::array();
  bool all = true;
  for (const auto& c : split(o.conditions)) {
    ConditionReport r;
    if (c == "h1") {
      r = check_h1(phi, samples, ctx.tols.get("h1", 1e-6));
    } else if (c == "h2") {
      r = check_h2(phi, y0, default_xt_samples(phi, y0, seed), ctx.tols.get("h2", 1e-8));
    } else if (c == "translation") {
      r = check_translation_invariant(phi, samples, ctx.tols.get("translation", 1e-9));
    } else if (c == "bourgain") {
      r = check_bourgain(phi, samples, ctx.tols.get("bourgain", 1e-8),
                         o.field ? BourgainMode::Field : BourgainMode::Frozen);
    } else if (c == "straight") {
      // one check per y on a small lattice (or at --y0), merged
      double tol = ctx.tols.get("straight", 1e-8);
      std::vector<Eigen::VectorXd> ys =
          o.y0.empty() ? lattice_ball(d, 0.4 * phi.epsilon0(), 3) : std::vector<Eigen::VectorXd>{y0};
      for (const auto& y : ys) {
        ConditionReport part = check_straight_condition(phi, default_xt_samples(phi, y, seed), tol);
        if (r.name.empty() || part.max_residual > r.max_residual) {
          auto residuals = std::move(r.residuals);
          r = part;
          r.residuals.insert(r.residuals.begin(), residuals.begin(), residuals.end());
        } else {
          r.residuals.insert(r.residuals.end(), part.residuals.begin(), part.residuals.end());
          r.pass = r.pass && part.pass;
        }
      }
    } else {
      throw InvalidArgument("unknown condition '" + c + "' (h1, h2, translation, bourgain, straight)");
    }
    all = all && r.pass;
    json rj = report_json(r);
    if (c == "bourgain") {
      PhasePoint probe(Eigen::VectorXd::Zero(d - 1), 0.1, Eigen::VectorXd::Zero(d - 1));
      auto b = bourgain_residual(phi, probe, o.field ? BourgainMode::Field : BourgainMode::Frozen);
      rj["residual_at_t0.1_y0"] = b.residual;
    }
    reports.push_back(rj);
  }
  json rep{{"phase", phase_to_json(phi)}, {"conditions", reports}};
  return ctx.finish(rep, all, all ? "all conditions pass" : "some conditions fail");
}

json profile_json(const std::vector<double>& t, const std::function<Eigen::VectorXd(double)>& f) {
  json arr = json::array();
  for (double s : t) arr.push_back(to_std(f(s)));
  return arr;
}

int phase_straighten(Context& ctx, const PhaseOpts& o) {
  PhaseFunction phi = load_spec(ctx);
  StraightenOptions so;
  so.t_max = o.t_max;
  so.spacing = o.spacing;
  so.y_radius = o.y_radius;
  so.y_per_axis = o.per_axis;
  so.c_tol = ctx.tols.get("c", so.c_tol);
  so.a_tol = ctx.tols.get("a", so.a_tol);
  so.ode_tol = ctx.tols.get("ode", so.ode_tol);
  so.verify_tol = ctx.tols.get("verify", so.verify_tol);
  so.x_linearity_tol = ctx.tols.get("x_linearity", so.x_linearity_tol);
  so.reconstruction_tol = ctx.tols.get("reconstruction", so.reconstruction_tol);
  so.hessian_det_tol = ctx.tols.get("hessian_det", so.hessian_det_tol);
  StraighteningResult res = straighten_phase(phi, so);

  const auto t = res.working_grid.nodes();
  const int m = phi.dim() - 1;
  std::vector<std::string> header{"t", "alpha", "alpha_prime", "c"};
  for (int i = 1; i <= m; ++i) header.push_back("A" + std::to_string(i));
  for (int i = 1; i <= m; ++i) header.push_back("B" + std::to_string(i));
  CsvWriter prof(ctx.path("straighten_profiles.csv"), header);
  for (double s : t) {
    std::vector<double> row{s, res.alpha(s), res.alpha.derivative(s), res.c.c(s)};
    for (double v : to_std(res.a.a(s))) row.push_back(v);
    for (double v : to_std(res.b.value(s))) row.push_back(v);
    prof.row(row);
  }
  std::vector<std::string> hh;
  for (int i = 1; i <= m; ++i) hh.push_back("y" + std::to_string(i));
  hh.push_back("h");
  hh.push_back("q");
  CsvWriter hq(ctx.path("straighten_hq.csv"), hh);
  for (std::size_t i = 0; i < res.hqf.ys.size(); ++i) {
    std::vector<double> row = to_std(res.hqf.ys[i]);
    row.push_back(res.hqf.h[i]);
    row.push_back(res.hqf.q[i]);
    hq.row(row);
  }

  json rep{{"phase", phase_to_json(phi)},
           {"success", res.success},
           {"translation_residual", res.translation_residual},
           {"c_spread", res.c.spread},
           {"c_proportionality", res.c.proportionality},
           {"a_spread", res.a.spread},
           {"verify_residual", res.verify.residual},
           {"x_linearity", res.verify.x_linearity},
           {"reconstruction_residual", res.hqf.reconstruction_residual},
           {"h_hessian_det", res.hqf.h_hessian_det},
           {"min_alpha_derivative", res.min_alpha_derivative},
           {"profiles",
            {{"t", t},
             {"alpha", profile_json(t, [&](double s) { return Eigen::VectorXd::Constant(1, res.alpha(s)); })},
             {"alpha_prime",
              profile_json(t, [&](double s) { return Eigen::VectorXd::Constant(1, res.alpha.derivative(s)); })},
             {"c", profile_json(t, [&](double s) { return Eigen::VectorXd::Constant(1, res.c.c(s)); })},
             {"A", profile_json(t, [&](double s) { return res.a.a(s); })},
             {"B", profile_json(t, [&](double s) { return res.b.value(s); })}}},
           {"hqf", {{"t", res.hqf.t}, {"f", res.hqf.f}, {"phi00", res.hqf.phi00}}}};
  return ctx.finish(rep, res.success, "verify residual " + format_double(res.verify.residual));
}

int phase_curves(Context& ctx, const PhaseOpts& o) {
  PhaseFunction phi = load_spec(ctx);
  const int d = phi.dim();
  auto ys = square_lattice(d, o.y_radius, o.per_axis);
  std::vector<Eigen::VectorXd> omegas;
  for (const auto& y : ys) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d - 1);
    if (o.omega_rule == "compression") {
      if (d != 3) throw InvalidArgument("the compression rule needs d = 3");
      w(1) = -y(1);
    } else if (o.omega_rule != "zero") {
      throw InvalidArgument("--omega-rule must be zero or compression");
    }
    omegas.push_back(w);
  }
  if (o.nodes < 2) throw InvalidArgument("--nodes must be at least 2");
  std::vector<double> tg(o.nodes);
  for (int i = 0; i < o.nodes; ++i) tg[i] = -o.t_max + 2.0 * o.t_max * i / (o.nodes - 1);
  TubeFamily fam = phase_curve_family(phi, ys, omegas, tg, 1.0, o.omega_rule);
  std::vector<std::string> header{"curve"};
  for (int i = 1; i < d; ++i) header.push_back("y" + std::to_string(i));
  for (int i = 1; i < d; ++i) header.push_back("x" + std::to_string(i));
  header.push_back("t");
  CsvWriter csv(ctx.path("curves.csv"), header);
  double worst = 0.0;
  for (std::size_t c = 0; c < fam.polylines.size(); ++c) {
    const auto& pl = fam.polylines[c];
    worst = std::max(worst, collinearity_residual(pl));
    for (Eigen::Index r = 0; r < pl.rows(); ++r) {
      std::vector<double> row{static_cast<double>(c)};
      for (double v : to_std(ys[c])) row.push_back(v);
      for (Eigen::Index q = 0; q < d; ++q) row.push_back(pl(r, q));
      csv.row(row);
    }
  }
  json rep{{"phase", phase_to_json(phi)}, {"n_curves", fam.polylines.size()}, {"collinearity_max", worst}};
  return ctx.finish(rep, true, std::to_string(fam.polylines.size()) + " curves");
}

// ---------------------------------------------------------------------------
// sets, dimension, maximal functions

struct SetOpts {
  std::string family = "bourgain";
  int per_axis = 64;
  double y_radius = 0.25;
  double t_half = 0.25;
  int nodes = 17;
  bool conservative = false;
  int dim = 2;
  std::string input;
  int kmin = 4;
  int kmax = 10;
};

GridSpec grid_of(const Context& ctx, int d, int n_default, double L_default) {
  GridSpec g{d, ctx.common.box > 0 ? ctx.common.box : L_default, ctx.common.grid > 0 ? ctx.common.grid : n_default};
  g.validate();
  return g;
}

int set_build(Context& ctx, const SetOpts& o) {
  double delta = ctx.deltas(std::ldexp(1.0, -6)).front();
  RasterMode mode = o.conservative ? RasterMode::Conservative : RasterMode::Center;
  RasterResult rr;
  std::string provenance = o.family;
  if (o.family == "bourgain" || o.family == "straight") {
    TubeFamily fam = o.family == "bourgain"
                         ? bourgain_compression_family(o.per_axis, o.y_radius, o.t_half, o.nodes, delta)
                         : straight_family(3, o.per_axis, o.y_radius, o.t_half, o.nodes, delta, ctx.common.seed);
    // default box: tight around the family
    GridSpec spec = grid_of(ctx, 3, 512, bounding_half_width(fam));
    rr = rasterize_tubes(fam, spec, mode);
  } else if (o.family == "segment") {
    GridSpec spec = grid_of(ctx, o.dim, 1024, 1.0);
    TubeFamily fam;
    fam.delta = delta;
    Eigen::MatrixXd pl = Eigen::MatrixXd::Zero(2, o.dim);
    pl(0, 0) = -0.5;
    pl(1, 0) = 0.5;
    fam.polylines.push_back(pl);
    rr = rasterize_tubes(fam, spec, mode);
  } else if (o.family == "square") {
    GridSpec spec = grid_of(ctx, o.dim, 1024, 1.0);
    rr.grid = OccupancyGrid(spec);
    for (std::size_t c = 0; c < spec.cells(); ++c) rr.grid.set(c);
  } else {
    throw InvalidArgument("--family must be bourgain, straight, segment or square");
  }
  write_json(ctx.path("set.json"), rr.grid.to_json());
  json rep{{"family", provenance},
           {"occupied", rr.grid.count()},
           {"cell", rr.grid.spec().cell()},
           {"delta", delta},
           {"coarse_warning", rr.coarse_warning}};
  return ctx.finish(rep, true, std::to_string(rr.grid.count()) + " occupied cells");
}

int dim_boxcount(Context& ctx, const SetOpts& o) {
  if (o.input.empty()) throw InvalidArgument("--input is required");
  BoxCountReport r;
  if (std::filesystem::path(o.input).extension() == ".csv") {
    if (!(ctx.common.box > 0)) throw InvalidArgument("point clouds need --box L");
    r = box_count_points(read_csv_matrix(o.input), ctx.common.box, o.kmin, o.kmax);
  } else {
    r = box_count(OccupancyGrid::from_json(read_json(o.input)), o.kmin, o.kmax);
  }
  CsvWriter csv(ctx.path("boxcount.csv"), {"k", "scale", "count"});
  for (std::size_t i = 0; i < r.k.size(); ++i) {
    std::vector<double> row{static_cast<double>(r.k[i]), r.scale[i], static_cast<double>(r.counts[i])};
    csv.row(row);
  }
  json rep{{"k", r.k}, {"counts", r.counts}, {"slope", r.slope}, {"intercept", r.intercept}, {"r2", r.r2}};
  return ctx.finish(rep, true, "slope " + format_double(r.slope));
}

struct MaxOpts {
  std::string kind = "kakeya";
  std::string input;
  std::string f = "one";
  double sigma = 0.1;
  int dim = 2;
  double spacing = 0.0;
  int per_axis = 5;
  double radius = 0.3;
  std::string q = "2";
};

int maximal_scan(Context& ctx, const MaxOpts& o) {
  ScalarGrid f;
  if (!o.input.empty()) {
    f = ScalarGrid::indicator(OccupancyGrid::from_json(read_json(o.input)));
  } else {
    GridSpec spec = grid_of(ctx, o.dim, 256, 2.0);
    if (o.f == "one") {
      f = ScalarGrid(spec, 1.0);
    } else if (o.f == "bump") {
      const double s2 = 2.0 * o.sigma * o.sigma;
      f = ScalarGrid::sample(spec, [&](const Eigen::VectorXd& c) { return std::exp(-c.squaredNorm() / s2); });
    } else {
      throw InvalidArgument("--f must be one or bump");
    }
  }
  const int d = f.spec().d;
  auto deltas = ctx.deltas(0.1);
  std::vector<double> qs = parse_list(o.q);
  std::optional<PhaseFunction> phi;
  if (o.kind == "curved") phi = load_spec(ctx);

  std::vector<std::string> header{"delta", "index"};
  const int pdim = o.kind == "curved" ? d - 1 : d;
  for (int i = 1; i <= pdim; ++i) header.push_back("p" + std::to_string(i));
  header.push_back("value");
  const int wdim = o.kind == "curved" ? d - 1 : d;
  for (int i = 1; i <= wdim; ++i) header.push_back("w" + std::to_string(i));
  CsvWriter csv(ctx.path("maximal_scan.csv"), header);

  std::vector<MaximalScanResult> scans;
  json per = json::array();
  for (double delta : deltas) {
    MaximalScanResult r;
    if (o.kind == "kakeya") {
      r = kakeya_maximal(f, delta, direction_net(d, o.spacing > 0 ? o.spacing : delta));
    } else if (o.kind == "nikodym") {
      r = nikodym_maximal(f, delta, lattice_ball(d + 1, o.radius, o.per_axis),
                          direction_net(d, o.spacing > 0 ? o.spacing : delta), ctx.model(d));
    } else if (o.kind == "curved") {
      r = curved_maximal(*phi, f, delta, lattice_ball(d, o.radius, o.per_axis));
    } else {
      throw InvalidArgument("--kind must be kakeya, nikodym or curved");
    }
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      std::vector<double> row{delta, static_cast<double>(i)};
      for (double v : to_std(r.parameters[i])) row.push_back(v);
      row.push_back(r.values[i]);
      Eigen::VectorXd w = r.witnesses[i];
      if (w.size() != wdim) w = Eigen::VectorXd::Zero(wdim);
      for (double v : to_std(w)) row.push_back(v);
      csv.row(row);
    }
    json norms = json::object();
    for (double q : qs) norms[format_double(q)] = scan_norm(r, q);
    per.push_back({{"delta", delta}, {"sup", r.sup()}, {"argmax", r.argmax}, {"norms", norms}});
    scans.push_back(std::move(r));
  }
  json rep{{"kind", o.kind}, {"scans", per}};
  if (scans.size() >= 3) {
    json fits = json::object();
    for (double q : qs) {
      auto fit = lp_scaling_fit(scans, q);
      fits[format_double(q)] = {{"slope", fit.slope}, {"r2", fit.r2}};
    }
    rep["scaling_fit"] = fits;
  }
  return ctx.finish(rep, true, "sup " + format_double(scans.front().sup()));
}

struct CoverOpts {
  std::string input;
  double lambda = 0.5;
  int per_axis = 9;
  double radius = 0.5;
  double spacing = 0.05;
  int samples = 256;
};

int nikodym_cover(Context& ctx, const CoverOpts& o) {
  if (o.input.empty()) throw InvalidArgument("--input is required");
  OccupancyGrid omega = OccupancyGrid::from_json(read_json(o.input));
  const int d = omega.spec().d;
  auto bases = lattice_ball(d + 1, o.radius, o.per_axis);
  auto dirs = direction_net(d, o.spacing);
  auto r = nikodym_coverage(omega, bases, dirs, o.lambda, ctx.model(d), o.samples);
  std::vector<std::string> header;
  for (int i = 1; i <= d; ++i) header.push_back("x" + std::to_string(i));
  header.insert(header.end(), {"covered", "fraction", "direction"});
  CsvWriter csv(ctx.path("coverage.csv"), header);
  for (std::size_t i = 0; i < bases.size(); ++i) {
    std::vector<double> row = to_std(bases[i]);
    row.push_back(r.covered[i]);
    row.push_back(r.best_fraction[i]);
    row.push_back(r.best_direction[i]);
    csv.row(row);
  }
  json rep{{"n_bases", bases.size()}, {"n_covered", r.n_covered}, {"lambda", o.lambda}};
  return ctx.finish(rep, true, std::to_string(r.n_covered) + "/" + std::to_string(bases.size()) + " covered");
}

struct LineOpts {
  double max_z = 0.5;
  int z_count = 11;
  int e_count = 16;
};

int linespace_map(Context& ctx, const LineOpts& o) {
  SpaceForm sf = ctx.model(2);
  if (o.z_count < 1 || o.e_count < 1) throw InvalidArgument("--z-count and --e-count must be positive");
  SFPoint<double> c = center<double>(sf);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(sf.ambient_dim());
  dir(0) = 1.0;
  SFGeodesic<double> gamma0 = make_geodesic(sf, c, dir);
  CsvWriter csv(ctx.path("linespace.csv"), {"z", "e", "rho", "eta"});
  for (int i = 0; i < o.z_count; ++i) {
    double z = o.z_count == 1 ? 0.0 : -o.max_z + 2.0 * o.max_z * i / (o.z_count - 1);
    for (int j = 0; j < o.e_count; ++j) {
      double e = 2.0 * std::numbers::pi * j / o.e_count;
      LineImage im = line_space_map(sf, gamma0, {z, e}, o.max_z);
      std::vector<double> row{z, e, im.rho, im.eta};
      csv.row(row);
    }
  }
  json rep{{"n_samples", o.z_count * o.e_count}};
  return ctx.finish(rep, true, std::to_string(o.z_count * o.e_count) + " line elements");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments on Kakeya and Nikodym geometry", "kakeya-lab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Common common;
  app.add_option("--spec", common.spec, "phase spec JSON");
  app.add_option("--model", common.model, "euclidean | sphere | hyperbolic")
      ->check(CLI::IsMember({"euclidean", "sphere", "hyperbolic"}));
  app.add_option("--delta", common.delta, "comma-separated tube radii");
  app.add_option("--grid", common.grid, "grid resolution per axis");
  app.add_option("--box", common.box, "grid half-width L");
  app.add_option("--seed", common.seed, "RNG seed");
  app.add_option("--tol", common.tol, "tolerance override NAME=VALUE")->take_all()->allow_extra_args(false);
  app.add_option("--out", common.out, "output directory");
  app.add_option("--threads", common.threads, "worker thread cap (default: KAKEYA_LAB_THREADS or all cores)");

  std::string chosen;
  CLI::App* sub = nullptr;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& full, const std::string& help) {
    CLI::App* s = parent->add_subcommand(name, help);
    s->fallthrough();
    s->callback([&, s, full] {
      chosen = full;
      sub = s;
    });
    return s;
  };

  GeoOpts geo;
  CLI::App* geo_cmd = app.add_subcommand("geo", "geodesic straightening charts");
  geo_cmd->require_subcommand(1);
  geo_cmd->fallthrough();
  {
    auto* s = leaf(geo_cmd, "straighten", "geo straighten", "collinearity of chart images of random geodesics");
    s->add_option("--dim", geo.dim);
    s->add_option("--count", geo.count);
    s->add_option("--samples", geo.samples);
    s->add_option("--length", geo.length);
    s->add_option("--radius", geo.radius);
    s->add_option("--steps", geo.steps, "integrator steps");
  }
  {
    auto* s = leaf(geo_cmd, "check-lines", "geo check-lines", "flatness of chart images of geodesic submanifolds");
    s->add_option("--dim", geo.dim);
    s->add_option("--k", geo.k, "submanifold dimension (default d - 1)");
    s->add_option("--count", geo.count);
    s->add_option("--lattice", geo.lattice);
    s->add_option("--span", geo.span);
    s->add_option("--radius", geo.radius);
  }
  {
    auto* s = leaf(geo_cmd, "bilipschitz", "geo bilipschitz", "distortion ratios of the chart");
    s->add_option("--dim", geo.dim);
    s->add_option("--radius", geo.radius);
    s->add_option("--pairs", geo.pairs);
  }

  N2KOpts n2k;
  {
    auto* s = leaf(&app, "nikodym-to-kakeya", "nikodym-to-kakeya", "apply the projective map F");
    s->add_option("--input", n2k.input, "CSV of points (header row)");
    s->add_option("--dim", n2k.dim);
    s->add_option("--count", n2k.count);
  }

  PhaseOpts ph;
  CLI::App* phase_cmd = app.add_subcommand("phase", "phase-function conditions and straightening");
  phase_cmd->require_subcommand(1);
  phase_cmd->fallthrough();
  {
    auto* s = leaf(phase_cmd, "check", "phase check", "evaluate conditions on the default sample lattice");
    s->add_option("--conditions", ph.conditions);
    s->add_option("--y0", ph.y0, "frequency for h2 and straight (comma-separated)");
    s->add_flag("--field", ph.field, "Bourgain condition with the G0 field");
    s->add_flag("--jitter", ph.jitter, "jitter the sample lattice with --seed");
  }
  {
    auto* s = leaf(phase_cmd, "straighten", "phase straighten", "straighten a translation-invariant phase");
    s->add_option("--t-max", ph.t_max);
    s->add_option("--spacing", ph.spacing);
    s->add_option("--y-radius", ph.y_radius);
    s->add_option("--per-axis", ph.per_axis);
  }
  {
    auto* s = leaf(phase_cmd, "curves", "phase curves", "trace Kakeya curves");
    s->add_option("--t-max", ph.t_max);
    s->add_option("--nodes", ph.nodes);
    s->add_option("--y-radius", ph.y_radius);
    s->add_option("--per-axis", ph.per_axis);
    s->add_option("--omega-rule", ph.omega_rule, "zero | compression");
  }

  SetOpts so;
  CLI::App* set_cmd = app.add_subcommand("set", "tube sets");
  set_cmd->require_subcommand(1);
  set_cmd->fallthrough();
  {
    auto* s = leaf(set_cmd, "build", "set build", "rasterize a tube family");
    s->add_option("--family", so.family, "bourgain | straight | segment | square");
    s->add_option("--per-axis", so.per_axis);
    s->add_option("--y-radius", so.y_radius);
    s->add_option("--t-half", so.t_half);
    s->add_option("--nodes", so.nodes);
    s->add_option("--dim", so.dim, "dimension for segment and square");
    s->add_flag("--conservative", so.conservative);
  }
  CLI::App* dim_cmd = app.add_subcommand("dim", "dimension estimates");
  dim_cmd->require_subcommand(1);
  dim_cmd->fallthrough();
  {
    auto* s = leaf(dim_cmd, "boxcount", "dim boxcount", "box-counting slope of a grid or point cloud");
    s->add_option("--input", so.input, "grid JSON, or CSV point cloud with --box");
    s->add_option("--kmin", so.kmin);
    s->add_option("--kmax", so.kmax);
  }

  MaxOpts mo;
  CLI::App* max_cmd = app.add_subcommand("maximal", "maximal functions");
  max_cmd->require_subcommand(1);
  max_cmd->fallthrough();
  {
    auto* s = leaf(max_cmd, "scan", "maximal scan", "evaluate a maximal function over its parameter net");
    s->add_option("--kind", mo.kind, "kakeya | nikodym | curved");
    s->add_option("--input", mo.input, "grid JSON used as an indicator function");
    s->add_option("--f", mo.f, "one | bump (when no --input)");
    s->add_option("--sigma", mo.sigma);
    s->add_option("--dim", mo.dim);
    s->add_option("--spacing", mo.spacing, "direction net spacing (default delta)");
    s->add_option("--per-axis", mo.per_axis, "position or frequency lattice size");
    s->add_option("--radius", mo.radius, "position or frequency lattice radius");
    s->add_option("--q", mo.q, "norm exponents");
  }

  CoverOpts co;
  CLI::App* nik_cmd = app.add_subcommand("nikodym", "Nikodym sets");
  nik_cmd->require_subcommand(1);
  nik_cmd->fallthrough();
  {
    auto* s = leaf(nik_cmd, "coverage", "nikodym coverage", "covered base points of a set");
    s->add_option("--input", co.input, "grid JSON");
    s->add_option("--lambda", co.lambda);
    s->add_option("--per-axis", co.per_axis);
    s->add_option("--radius", co.radius);
    s->add_option("--spacing", co.spacing);
    s->add_option("--samples", co.samples);
  }

  LineOpts lo;
  CLI::App* ls_cmd = app.add_subcommand("linespace", "line-space model");
  ls_cmd->require_subcommand(1);
  ls_cmd->fallthrough();
  {
    auto* s = leaf(ls_cmd, "map", "linespace map", "tabulate the line-space map");
    s->add_option("--max-z", lo.max_z);
    s->add_option("--z-count", lo.z_count);
    s->add_option("--e-count", lo.e_count);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_thread_count(common.threads);
    Context ctx(common, sub, chosen, out);
    if (chosen == "geo straighten") return geo_straighten(ctx, geo);
    if (chosen == "geo check-lines") return geo_check_lines(ctx, geo);
    if (chosen == "geo bilipschitz") return geo_bilipschitz(ctx, geo);
    if (chosen == "nikodym-to-kakeya") return nikodym_to_kakeya(ctx, n2k);
    if (chosen == "phase check") return phase_check(ctx, ph);
    if (chosen == "phase straighten") return phase_straighten(ctx, ph);
    if (chosen == "phase curves") return phase_curves(ctx, ph);
    if (chosen == "set build") return set_build(ctx, so);
    if (chosen == "dim boxcount") return dim_boxcount(ctx, so);
    if (chosen == "maximal scan") return maximal_scan(ctx, mo);
    if (chosen == "nikodym coverage") return nikodym_cover(ctx, co);
    if (chosen == "linespace map") return linespace_map(ctx, lo);
    err << "error: no command selected\n";
    return kExitUsage;
  } catch (const ConditionFailure& e) {
    err << "condition failure: " << e.what() << "\n";
    return kExitConditionFailed;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid JSON: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "file error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace kakeya::cli
