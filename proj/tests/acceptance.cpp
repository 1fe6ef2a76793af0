// Acceptance checks 1-11. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kakeya/cli.hpp"
#include "kakeya/geometry_measure.hpp"
#include "kakeya/maximal.hpp"
#include "kakeya/phase_analysis.hpp"
#include "kakeya/phase_spec.hpp"
#include "kakeya/phase_straighten.hpp"
#include "kakeya/straighten_geo.hpp"

using namespace kakeya;

namespace {

const std::string kData = KAKEYA_DATA_DIR;

PhaseFunction load(const std::string& name) { return load_phase_spec(kData + "/phases/" + name); }

/// FNV-1a over the bit patterns of every recorded number.
class Digest {
 public:
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  void add(std::uint64_t v) { mix(v); }
  void add(const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) add(m.data()[i]);
  }
  void add(const std::vector<double>& v) {
    for (double x : v) add(x);
  }
  std::uint64_t value() const { return h_; }

 private:
  void mix(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffu;
      h_ *= 0x100000001b3ull;
    }
  }
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

struct Outcome {
  bool pass = true;
  std::string detail;
  Digest digest;
  double seconds = 0.0;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

void require(Outcome& o, bool ok, const std::string& what) {
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what;
  if (!ok) {
    o.pass = false;
    o.detail += " (!)";
  }
}

Eigen::MatrixXd chart_rows(const ChartMap& chart, const std::vector<SFPoint<double>>& pts) {
  return chart_images(chart, pts);
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  double worst_closed = 0.0, worst_int = 0.0;
  for (Model m : {Model::Sphere, Model::Hyperbolic}) {
    SpaceForm sf(m, 2);
    ChartMap chart = ChartMap::for_model(sf);
    std::mt19937_64 rng(101);
    std::vector<double> s;
    for (int k = 0; k <= 32; ++k) s.push_back(-0.5 + k / 32.0);
    for (int i = 0; i < 100; ++i) {
      auto p = random_point_near_center(sf, 0.5, rng);
      auto geo = make_geodesic(sf, p, random_unit_tangent(sf, p, rng));
      auto closed = straighten_geodesic(sf, geo, chart, s);
      worst_closed = std::max(worst_closed, closed.residual);
      auto start = make_geodesic(sf, geodesic_eval(sf, geo, -0.5), geodesic_velocity(sf, geo, -0.5));
      auto pts = integrate_geodesic(sf, start, 1.0, 200);
      Eigen::MatrixXd img = chart_rows(chart, pts);
      worst_int = std::max(worst_int, collinearity_residual(img));
      o.digest.add(closed.images);
      o.digest.add(img);
    }
  }
  require(o, worst_closed < 1e-10, "closed-form residual " + fmt(worst_closed) + " < 1e-10");
  require(o, worst_int < 1e-7, "integrator residual " + fmt(worst_int) + " < 1e-7");
  return o;
}

Outcome criterion2() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_rt = 0.0;
  for (Model m : {Model::Sphere, Model::Hyperbolic}) {
    ChartMap chart = ChartMap::for_model(SpaceForm(m, 2));
    const double radius = m == Model::Sphere ? 2.0 : 0.95;
    for (int i = 0; i < 10000; ++i) {
      Eigen::Vector2d w;
      do w = Eigen::Vector2d(u(rng), u(rng)) * radius;
      while (w.norm() > radius);
      Eigen::VectorXd back = chart.forward(chart.inverse(w));
      worst_rt = std::max(worst_rt, (back - w).norm());
      o.digest.add(back);
    }
  }
  SpaceForm hyp(Model::Hyperbolic, 2);
  ChartMap klein = ChartMap::for_model(hyp);
  double worst_len = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::Vector2d a, b;
    do a = Eigen::Vector2d(u(rng), u(rng)) * 0.9;
    while (a.norm() > 0.9);
    do b = Eigen::Vector2d(u(rng), u(rng)) * 0.9;
    while (b.norm() > 0.9);
    double quad = klein_segment_length(a, b);
    double exact = distance(hyp, klein.inverse(a), klein.inverse(b));
    worst_len = std::max(worst_len, std::abs(quad - exact));
    o.digest.add(quad);
  }
  require(o, worst_rt < 1e-12, "roundtrip " + fmt(worst_rt) + " < 1e-12");
  require(o, worst_len < 1e-6, "Klein length error " + fmt(worst_len) + " < 1e-6");
  return o;
}

Outcome criterion3() {
  Outcome o;
  double worst = 0.0;
  std::vector<Eigen::VectorXd> lattice;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) lattice.push_back(Eigen::Vector2d(0.12 * i, 0.12 * j));
  for (Model m : {Model::Sphere, Model::Hyperbolic}) {
    SpaceForm sf(m, 3);
    ChartMap chart = ChartMap::for_model(sf);
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 50; ++trial) {
      auto p = random_point_near_center(sf, 0.3, rng);
      Eigen::VectorXd e1 = random_unit_tangent(sf, p, rng);
      Eigen::VectorXd e2 = random_unit_tangent(sf, p, rng);
      e2 -= inner<double>(sf, e1, e2) * e1;
      e2 /= metric_norm<double>(sf, e2);
      Eigen::MatrixXd basis(sf.ambient_dim(), 2);
      basis << e1, e2;
      auto pts = geodesic_submanifold_sample(sf, p, basis, lattice);
      Eigen::MatrixXd img = chart_rows(chart, pts);
      worst = std::max(worst, flat_fit_residual(img, 2));
      o.digest.add(img);
    }
  }
  require(o, worst < 1e-9, "hyperplane residual " + fmt(worst) + " < 1e-9");
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 2.0), s(-1.0, 2.0);
  double worst_inv = 0.0, worst_col = 0.0;
  for (int d : {2, 3}) {
    for (int i = 0; i < 10000; ++i) {
      Eigen::VectorXd x(d);
      for (int q = 0; q + 1 < d; ++q) x(q) = u(rng);
      x(d - 1) = pos(rng);
      Eigen::VectorXd back = projective_nikodym_to_kakeya(projective_nikodym_to_kakeya(x));
      worst_inv = std::max(worst_inv, (back - x).norm() / x.norm());
      o.digest.add(back);
    }
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd a(d), b(d);
      for (int q = 0; q + 1 < d; ++q) {
        a(q) = u(rng);
        b(q) = u(rng);
      }
      a(d - 1) = pos(rng);
      b(d - 1) = pos(rng);
      double lam = s(rng);
      Eigen::VectorXd c = a + lam * (b - a);
      if (c(d - 1) < 0.1) c = a + 0.5 * (b - a);
      Eigen::MatrixXd img(3, d);
      img.row(0) = projective_nikodym_to_kakeya(a).transpose();
      img.row(1) = projective_nikodym_to_kakeya(b).transpose();
      img.row(2) = projective_nikodym_to_kakeya(c).transpose();
      worst_col = std::max(worst_col, collinearity_residual(img));
      o.digest.add(img);
    }
  }
  require(o, worst_inv < 1e-12, "involution " + fmt(worst_inv) + " < 1e-12");
  require(o, worst_col < 1e-10, "collinear triples " + fmt(worst_col) + " < 1e-10");
  return o;
}

Outcome criterion5() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  auto straight = load("straight_phase.json");
  auto samples = default_samples(straight);
  Eigen::VectorXd y0 = Eigen::Vector2d(0.05, -0.05);
  std::vector<ConditionReport> reps{check_h1(straight, samples), check_h2(straight, y0, default_xt_samples(straight, y0)),
                                    check_translation_invariant(straight, samples), check_bourgain(straight, samples),
                                    check_straight_condition(straight, default_xt_samples(straight, y0))};
  double worst = 0.0;
  bool all = true;
  for (const auto& r : reps) {
    worst = std::max(worst, r.max_residual);
    all &= r.pass;
    o.digest.add(r.residuals);
  }
  require(o, all && worst < 1e-8, "straight phase passes all, max residual " + fmt(worst));

  auto ex = load("bourgain_example.json");
  auto es = default_samples(ex);
  auto h1 = check_h1(ex, es);
  auto tr = check_translation_invariant(ex, es);
  auto bg = check_bourgain(ex, es);
  auto st = check_straight_condition(ex, default_xt_samples(ex, y0));
  auto at = bourgain_residual(ex, PhasePoint(Eigen::Vector2d::Zero(), 0.1, Eigen::Vector2d::Zero()));
  o.digest.add(bg.residuals);
  o.digest.add(st.residuals);
  require(o, h1.pass && tr.pass, "example passes h1 and translation");
  require(o, !bg.pass && std::abs(at.residual - 0.990) <= 0.005,
          "example fails Bourgain, residual at (0.1, 0) = " + fmt(at.residual));
  require(o, !st.pass, "example fails straight condition (" + fmt(st.max_residual) + ")");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(o, secs < 1.0, "runtime " + fmt(secs) + " s < 1 s");
  return o;
}

Outcome criterion6() {
  Outcome o;
  auto r = straighten_phase(load("exp_phase.json"));
  double alpha_err = 0.0;
  for (double t : r.working_grid.nodes()) alpha_err = std::max(alpha_err, std::abs(r.alpha(t) - std::log1p(t)));
  double h_err = 0.0;
  for (std::size_t i = 0; i < r.hqf.ys.size(); ++i)
    h_err = std::max(h_err, std::abs(r.hqf.h[i] - 0.5 * r.hqf.ys[i].squaredNorm()));
  require(o, alpha_err < 1e-6, "alpha vs log(1+t) " + fmt(alpha_err));
  require(o, r.verify.residual < 1e-6, "verify residual " + fmt(r.verify.residual));
  require(o, h_err < 1e-6, "h vs |y|^2/2 " + fmt(h_err));

  auto drift = straighten_phase(load("exp_drift_phase.json"));
  double b_err = 0.0;
  for (double t : drift.working_grid.nodes())
    b_err = std::max(b_err, (drift.b.value(t) - Eigen::Vector2d(-t * t / 2, 0.0)).norm());
  require(o, b_err < 1e-6, "B vs -(t^2/2) e1 " + fmt(b_err));

  auto ys = lattice_ball(3, 0.2, 5);
  auto neg = verify_straightened(load("exp_phase.json"), Kappa::identity(3), r.working_grid, ys);
  double ymax = 0.0;
  for (const auto& y : ys) ymax = std::max(ymax, y.norm());
  require(o, !neg.pass && neg.residual >= 0.1 * ymax, "identity residual " + fmt(neg.residual));
  for (double t : r.working_grid.nodes()) o.digest.add(r.alpha(t));
  o.digest.add(r.hqf.h);
  for (double t : drift.working_grid.nodes()) o.digest.add(drift.b.value(t));
  o.digest.add(neg.residual);
  return o;
}

Outcome criterion7() {
  Outcome o;
  double worst_post = 0.0;
  auto ys = lattice_ball(3, 0.2, 3);
  for (const char* name : {"exp_phase.json", "exp_drift_phase.json", "log_phase.json", "straight_phase.json"}) {
    auto phi = load(name);
    auto r = straighten_phase(phi);
    const auto ts = r.working_grid.nodes();
    std::vector<double> ss;
    for (double t : ts) ss.push_back(r.alpha(t));
    for (const auto& y : ys) {
      for (const Eigen::VectorXd& x0 : {Eigen::VectorXd(Eigen::Vector2d(0.0, 0.0)), Eigen::VectorXd(Eigen::Vector2d(0.05, -0.03))}) {
        // trace in the original coordinates at s = alpha(t), then pull back through kappa
        auto tr = trace_curve(phi, y, x0, ss);
        if (!tr.complete) {
          require(o, false, std::string(name) + " trace incomplete");
          return o;
        }
        Eigen::MatrixXd post(ts.size(), 3);
        for (std::size_t k = 0; k < ts.size(); ++k) {
          Eigen::Vector3d z = tr.points.row(k).transpose();
          post.row(k).head(2) = (z.head(2) - r.b.value(z(2))).transpose();
          post(k, 2) = ts[k];
        }
        worst_post = std::max(worst_post, collinearity_residual(post));
        o.digest.add(post);
      }
    }
  }
  require(o, worst_post < 1e-6, "post-kappa collinearity " + fmt(worst_post) + " < 1e-6");

  auto ex = load("bourgain_example.json");
  std::vector<double> tg;
  for (int k = -25; k <= 25; ++k) tg.push_back(0.01 * k);
  double worst_surface = 0.0;
  for (const auto& y : lattice_ball(3, 0.2, 5)) {
    auto tr = trace_curve(ex, y, Eigen::Vector2d(0.0, -y(1)), tg);
    for (Eigen::Index k = 0; k < tr.points.rows(); ++k)
      worst_surface = std::max(worst_surface, std::abs(tr.points(k, 0) - tr.points(k, 2) * tr.points(k, 1)));
    o.digest.add(tr.points);
  }
  require(o, worst_surface < 1e-10, "x1 = t x2 error " + fmt(worst_surface) + " < 1e-10");
  return o;
}

Outcome criterion8() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  GridSpec s2{2, 0.5, 1024};
  TubeFamily seg;
  seg.delta = 0.6 * s2.cell();
  Eigen::MatrixXd pl(2, 2);
  pl << -0.4, -0.3, 0.4, 0.3;
  seg.polylines.push_back(pl);
  auto seg_rep = box_count(rasterize_tubes(seg, s2).grid, 4, 10);

  OccupancyGrid sq(s2);
  for (std::size_t c = 0; c < s2.cells(); ++c) {
    Eigen::VectorXd z = s2.center_of(c);
    if (std::abs(z(0)) < 0.3 && std::abs(z(1)) < 0.3) sq.set(c);
  }
  auto sq_rep = box_count(sq, 4, 10);

  // compression surface x1 = t x2 over |x2|, |t| <= 1/4, sampled as a point cloud
  const int m = 2048;
  Eigen::MatrixXd cloud(static_cast<Eigen::Index>(m) * m, 3);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double x2 = -0.25 + 0.5 * (i + 0.5) / m, t = -0.25 + 0.5 * (j + 0.5) / m;
      cloud.row(static_cast<Eigen::Index>(i) * m + j) << t * x2, x2, t;
    }
  }
  auto surf_rep = box_count_points(cloud, 0.25, 4, 10);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(o, std::abs(seg_rep.slope - 1.0) <= 0.05, "segment " + fmt(seg_rep.slope));
  require(o, std::abs(sq_rep.slope - 2.0) <= 0.05, "square " + fmt(sq_rep.slope));
  require(o, std::abs(surf_rep.slope - 2.0) <= 0.1, "compression surface " + fmt(surf_rep.slope));
  require(o, secs < 60.0, "runtime " + fmt(secs) + " s < 60 s");
  for (const auto* r : {&seg_rep, &sq_rep, &surf_rep})
    for (auto c : r->counts) o.digest.add(static_cast<std::uint64_t>(c));
  return o;
}

Outcome criterion9() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  const double delta = std::ldexp(1.0, -6);
  auto comp = bourgain_compression_family(64, 0.25, 0.25, 17, delta);
  auto str = straight_family(3, 64, 0.25, 0.25, 17, delta, 1);
  // tight boxes; box sizes kept coarser than delta (k = 2..5)
  auto cg = rasterize_tubes(comp, GridSpec{3, bounding_half_width(comp), 512}).grid;
  auto cr = box_count(cg, 2, 5);
  auto sg = rasterize_tubes(str, GridSpec{3, bounding_half_width(str), 512}).grid;
  auto sr = box_count(sg, 2, 5);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(o, cr.slope <= 2.2, "compression slope " + fmt(cr.slope) + " <= 2.2");
  require(o, sr.slope >= 2.6, "straight slope " + fmt(sr.slope) + " >= 2.6");
  require(o, secs < 300.0, "runtime " + fmt(secs) + " s < 300 s");
  o.digest.add(static_cast<std::uint64_t>(cg.count()));
  o.digest.add(static_cast<std::uint64_t>(sg.count()));
  for (auto c : cr.counts) o.digest.add(static_cast<std::uint64_t>(c));
  for (auto c : sr.counts) o.digest.add(static_cast<std::uint64_t>(c));
  return o;
}

Outcome criterion10() {
  Outcome o;
  const double delta = 0.1;
  const double target = 2.0 + std::numbers::pi * delta;
  GridSpec big{2, 2.0, 512};
  ScalarGrid one(big, 1.0);
  auto dirs = direction_net(2, delta);
  auto k = kakeya_maximal(one, delta, dirs);
  std::vector<Eigen::VectorXd> center{Eigen::Vector2d::Zero()};
  auto n = nikodym_maximal(one, delta, center, dirs, SpaceForm(Model::Euclidean, 2));
  double kerr = 0.0;
  for (double v : k.values) kerr = std::max(kerr, std::abs(v / target - 1.0));
  double nerr = std::abs(n.sup() / target - 1.0);
  require(o, kerr <= 0.05 && nerr <= 0.05, "K and N vs 2+pi delta: " + fmt(kerr) + ", " + fmt(nerr));
  o.digest.add(k.values);
  o.digest.add(n.values);

  GridSpec mid{2, 1.5, 256};
  ScalarGrid onem(mid, 1.0);
  std::vector<Eigen::VectorXd> pos;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      if (std::hypot(i, j) * 0.15 <= 0.3) pos.push_back(Eigen::Vector2d(0.15 * i, 0.15 * j));
  auto flat = nikodym_maximal(onem, delta, pos, dirs, SpaceForm(Model::Euclidean, 2));
  double worst_ratio = 0.0;
  for (Model m : {Model::Sphere, Model::Hyperbolic}) {
    auto curved = nikodym_maximal(onem, delta, pos, dirs, SpaceForm(m, 2));
    for (std::size_t i = 0; i < pos.size(); ++i)
      worst_ratio = std::max(worst_ratio, std::abs(curved.values[i] / flat.values[i] - 1.0));
    o.digest.add(curved.values);
  }
  require(o, worst_ratio <= 0.15, "space-form N vs Euclidean " + fmt(worst_ratio));

  auto phi = load("straight_phase_2d.json");
  GridSpec fine{2, 0.3, 512};
  const double sigma = 0.05, d2 = 0.02;
  auto bump = ScalarGrid::sample(fine, [&](const Eigen::VectorXd& z) { return std::exp(-z.squaredNorm() / (2 * sigma * sigma)); });
  std::vector<Eigen::VectorXd> ys;
  for (double y : {-0.2, -0.1, 0.0, 0.1, 0.2}) ys.push_back(Eigen::VectorXd::Constant(1, y));
  auto cm = curved_maximal(phi, bump, d2, ys);
  double worst_c = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i](0), norm = std::sqrt(1.0 + y * y);
    // |x + t y - omega| < delta is the straight tube along (-y, 1) of half-width delta / sqrt(1 + y^2)
    const double dp = d2 / norm;
    auto kk = kakeya_maximal(bump, dp, {Eigen::Vector2d(-y / norm, 1.0 / norm)});
    const double reparam = kk.sup() * dp / d2;
    worst_c = std::max(worst_c, std::abs(cm.values[i] / reparam - 1.0));
  }
  o.digest.add(cm.values);
  require(o, worst_c <= 0.10, "curved vs reparametrized K " + fmt(worst_c));
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs representative CLI commands twice into the same directory and compares
/// every output file byte for byte.
bool cli_runs_identical(std::string* detail) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kakeya_acceptance_cli";
  const std::vector<std::vector<std::string>> cmds{
      {"geo", "straighten", "--model", "hyperbolic", "--count", "20", "--seed", "7"},
      {"phase", "check", "--spec", kData + "/phases/bourgain_example.json", "--jitter", "--seed", "7"},
      {"phase", "straighten", "--spec", kData + "/phases/log_phase.json"},
      {"maximal", "scan", "--kind", "nikodym", "--model", "sphere", "--f", "bump", "--grid", "128", "--delta", "0.1,0.2,0.3"},
      {"nikodym-to-kakeya", "--count", "50", "--seed", "7"},
  };
  bool same = true;
  std::size_t files = 0;
  for (const auto& cmd : cmds) {
    std::vector<std::map<std::string, std::string>> snaps;
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(dir);
      auto args = cmd;
      args.insert(args.end(), {"--out", dir.string()});
      std::ostringstream out, err;
      kakeya::cli::run(args, out, err);
      std::map<std::string, std::string> snap;
      snap["<stdout>"] = out.str();
      for (const auto& e : fs::directory_iterator(dir)) snap[e.path().filename().string()] = slurp(e.path());
      snaps.push_back(std::move(snap));
    }
    files += snaps[0].size();
    same &= snaps[0] == snaps[1];
  }
  fs::remove_all(dir);
  *detail = std::to_string(files) + " CLI outputs compared";
  return same;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"geodesic straightening", criterion1},  {"chart roundtrips", criterion2},
      {"hyperplane images", criterion3},       {"projective duality", criterion4},
      {"condition checkers", criterion5},      {"straightening pipeline", criterion6},
      {"straightened curves", criterion7},     {"box-counting calibration", criterion8},
      {"compression contrast", criterion9},    {"maximal-function calibration", criterion10},
  };
  bool all = true;
  std::vector<std::uint64_t> first;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all &= o.pass;
    first.push_back(o.digest.value());
    std::printf("[%s] %2zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), o.seconds);
    std::fflush(stdout);
  }

  // 11: rerun everything with the same seeds
  bool same = true;
  std::string mismatched;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::uint64_t again = 0;
    try {
      again = criteria[i].second().digest.value();
    } catch (const std::exception&) {
    }
    if (again != first[i]) {
      same = false;
      mismatched += " " + std::to_string(i + 1);
    }
  }
  std::string cli_detail;
  bool cli_same = cli_runs_identical(&cli_detail);
  bool ok11 = same && cli_same;
  all &= ok11;
  std::printf("[%s] 11 determinism: library reruns %s; %s %s\n", ok11 ? "PASS" : "FAIL",
              same ? "bit-identical" : ("differ in" + mismatched).c_str(), cli_detail.c_str(),
              cli_same ? "byte-identical" : "differ");
  return all ? 0 : 1;
}
