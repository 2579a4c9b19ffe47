// One PASS/FAIL line per acceptance criterion, each with the measured numbers
// and the wall time. Exit status is nonzero when any criterion fails.
#include "hyperlin/dynamics.hpp"
#include "hyperlin/error.hpp"
#include "hyperlin/exponents.hpp"
#include "hyperlin/linearize_contraction.hpp"
#include "hyperlin/linearize_hyperbolic.hpp"
#include "hyperlin/lp_foliation.hpp"
#include "hyperlin/spectral.hpp"
#include "hyperlin/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hyperlin;
using dynamics::PolyTerm;
using spectral::Band;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

void run(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string time_note;
  if (limit_s > 0.0) {
    if (secs >= limit_s) o.pass = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, " (limit %.0f s)", limit_s);
    time_note = buf;
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s; %.2f s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs,
              time_note.c_str());
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

dynamics::MapPtr poly(int n, std::vector<PolyTerm> terms) {
  return std::make_shared<dynamics::PolynomialMap>(n, std::move(terms));
}

double max_abs(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

// x1 * prod_{j >= 0} (1 + x2 2^{-j})^{-1}, summed as logs until the terms vanish.
double product_oracle(double x1, double x2) {
  double s = 0.0;
  for (int j = 0; j < 200; ++j) {
    const double t = std::ldexp(x2, -j);
    if (std::abs(t) < 1e-18) break;
    s += std::log1p(t);
  }
  return x1 * std::exp(-s);
}

Outcome conditions() {
  const double d = 1e-3;
  const auto r5 = spectral::from_bands({{1.0 / 16 + d, 1.0 / 8}, {1.0 / 8 + d, 1.0 / 4}, {1.0 / 4 + d, 1.0 / 2}});
  const auto r7 = spectral::from_bands({{0.1, 1.0 / 6}, {2, 3}, {9, 10}});
  const auto r8 = spectral::from_bands({{0.1, 0.1}, {1.0 / 6, 1.0 / 6}, {2, 2}, {5, 5}, {10, 10}});
  const bool b5 = spectral::check_band_condition(r5).holds;
  const bool t7 = spectral::check_band_condition(r7).holds &&
                  spectral::check_gap_condition(r7, spectral::make_margins(r7, 0.0)).holds;
  const bool rs7 = spectral::check_rs_condition(r7).holds;
  const bool g8 = spectral::check_gap_condition(r8, spectral::make_margins(r8, 0.0)).holds &&
                  spectral::check_band_condition(r8).holds;
  std::ostringstream os;
  os << std::boolalpha << "remark5 band " << b5 << ", remark7 theorem " << t7 << " rs " << rs7 << ", remark8 gap "
     << g8;
  return {b5 && t7 && !rs7 && g8, os.str()};
}

Outcome exponent_formulas() {
  using namespace exponents;
  const double planar = beta_planar(0.5, 2.0, 0.0);
  const double overall = beta_overall(spectral::from_bands({{0.5, 0.5}, {2, 2}}), 0.0).beta_overall;
  const double direct = std::log(0.5) / (std::log(0.1) - std::log(0.5));
  const double con = beta_contraction({{0.1, 0.1}, {0.5, 0.5}}, 0.0).beta[0];
  double dual = 0.0;
  int compared = 0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + static_cast<int>(u(rng) * 4);
    std::vector<Band> up;
    double lo = 1.05 + u(rng);
    for (int i = 0; i < m; ++i) {
      const double hi = lo * (1.0 + 0.3 * u(rng));
      up.push_back({lo, hi});
      lo = hi * (1.5 + 3.0 * u(rng));
    }
    std::vector<Band> down;
    for (int i = m - 1; i >= 0; --i) down.push_back({1.0 / up[i].hi, 1.0 / up[i].lo});
    const double eps = 1e-3 * u(rng);
    try {
      const auto e = beta_expansion(up, eps);
      const auto c = beta_contraction(down, eps);
      for (int i = 0; i < m; ++i) dual = std::max(dual, std::abs(e.beta[i] - c.beta[m - 1 - i]));
      ++compared;
    } catch (const Error&) {
      bool mirrored = false;
      try {
        beta_contraction(down, eps);
      } catch (const Error&) {
        mirrored = true;
      }
      if (!mirrored) dual = 1.0;
    }
  }
  const double e1 = std::abs(planar - 0.5), e2 = std::abs(overall - planar), e3 = std::abs(con - direct);
  const bool ok = e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12 && dual <= 1e-12 && compared > 50;
  return {ok, "planar err " + num(e1) + ", overall vs planar " + num(e2) + ", contraction err " + num(e3) +
                  ", duality max " + num(dual) + " over " + std::to_string(compared) + " spectra"};
}

Outcome contraction_oracle() {
  const auto f = poly(2, {{0.2, {1, 0}, 0}, {1.0, {0, 2}, 0}, {0.5, {0, 1}, 1}});
  contraction::ContractionParams p;
  p.half_width = 0.01;
  p.resolution = 65;
  const auto r = contraction::linearize_contraction(f, spectral::from_bands({{0.2, 0.2}, {0.5, 0.5}}), p);
  const double h = 2.0 * p.half_width / (p.resolution - 1);
  double err = 0.0;
  for (const auto& x : verify::sample_box(r.box, 4000, 7)) {
    Vec oracle = x;
    oracle[0] -= 20.0 * x[1] * x[1];
    err = std::max(err, max_abs(r.chain->forward(x) - oracle));
  }
  const auto res = verify::conjugacy_residual(*f, *r.chain, f->linear(), r.box, 2000, 3);
  return {err <= 5.0 * h * h && res.max <= 1e-6,
          "max error " + num(err) + " vs 5h^2 " + num(5.0 * h * h) + ", residual " + num(res.max)};
}

Outcome hyperbolic_oracle() {
  const auto planar = spectral::from_bands({{0.5, 0.5}, {2.0, 2.0}});
  const auto f = poly(2, {{0.5, {1, 0}, 0}, {1.0, {1, 1}, 0}, {2.0, {0, 1}, 1}});
  const auto r = hyperbolic::linearize_hyperbolic(f, planar);
  double err = 0.0;
  for (const auto& x : verify::sample_box(r.report_box, 3000, 11)) {
    const Vec p = r.chain->forward(x);
    err = std::max(err, std::max(std::abs(p[0] - product_oracle(x[0], x[1])), std::abs(p[1] - x[1])));
  }
  const auto g = poly(2, {{0.5, {1, 0}, 0}, {1.0, {0, 2}, 0}, {2.0, {0, 1}, 1}});
  const auto rg = hyperbolic::linearize_hyperbolic(g, planar);
  double gerr = 0.0;
  for (long i = 0; i < rg.g_u.g.node_count(); ++i) {
    const double y = rg.g_u.g.node(i)[0];
    gerr = std::max(gerr, std::abs(rg.g_u.g.value(i)[0] - 2.0 / 7.0 * y * y));
  }
  // A quadratic graph is reproduced by cubic interpolation, so only round-off remains.
  const bool ok = err <= 1e-4 && r.decoupling_residual <= 1e-4 && gerr <= 1e-12;
  return {ok, "product error " + num(err) + " on half-width " + num(r.report_box.half_width(0)) + ", decoupling " +
                  num(r.decoupling_residual) + ", g_u error " + num(gerr)};
}

// (0.5 x1 + x1 x2, 2 x2) with the radial cutoff between 0.02 and 0.06.
dynamics::MapPtr coupled_planar() {
  const auto f = poly(2, {{0.5, {1, 0}, 0}, {1.0, {1, 1}, 0}, {2.0, {0, 1}, 1}});
  return dynamics::bump_modify(f, 0.02, 0.06, 1.0).map;
}

std::vector<Vec> xy_samples(const lp::Omega& om, int count, unsigned seed, double shrink) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    Vec z(3);
    z << shrink * om.x_box.hi[0] * u(rng), shrink * om.x_box.hi[1] * u(rng), shrink * om.y_box.hi[0] * u(rng);
    out.push_back(z);
  }
  return out;
}

Outcome lyapunov_perron() {
  const auto map = coupled_planar();
  const auto coarse = lp::stable_foliation(map, {0}, {1}, {}, lp::Omega::centered(2, 1, 0.01, 33, 3));
  const auto fine = lp::stable_foliation(map, {0}, {1}, {}, lp::Omega::centered(2, 1, 0.01, 65, 5));
  const auto pts = xy_samples(fine.omega, 400, 7, 0.9);
  const double rc = lp::verify_lp_equivalence(*map, coarse, pts);
  const double rf = lp::verify_lp_equivalence(*map, fine, pts);
  const auto props = lp::foliation_properties(*map, fine, 400, 3);
  const double b3 = fine.derivative_mismatch;

  lp::LPParameters a, b;
  a.gamma1 = 0.6;
  a.gamma2 = 1.5;
  b.gamma1 = 0.8;
  b.gamma2 = 1.8;
  const auto om = lp::Omega::centered(2, 1, 0.01, 17, 3);
  const auto fa = lp::stable_foliation(map, {0}, {1}, a, om);
  const auto fb = lp::stable_foliation(map, {0}, {1}, b, om);
  double gdiff = 0.0;
  for (long i = 0; i < fa.q[0].node_count(); ++i) gdiff = std::max(gdiff, max_abs(fa.q[0].value(i) - fb.q[0].value(i)));

  const double bmax = std::max({props.b1, props.b2, b3, props.b4});
  const bool ok = rf <= 1e-4 && rf <= 0.5 * rc && bmax <= 1e-4 && gdiff <= 1e-5;
  return {ok, "residual " + num(rc) + " -> " + num(rf) + " (33 -> 65 nodes), B1 " + num(props.b1) + " B2 " +
                  num(props.b2) + " B3 " + num(b3) + " B4 " + num(props.b4) + ", gamma change " + num(gdiff)};
}

Outcome fiber_contraction() {
  const auto map = coupled_planar();
  const auto fol = lp::stable_foliation(map, {0}, {1}, {}, lp::Omega::centered(2, 1, 0.01, 33, 3));
  const auto f = poly(2, {{0.2, {1, 0}, 0}, {1.0, {0, 2}, 0}, {1.0, {1, 1}, 0}, {-20.0, {0, 3}, 0}, {0.5, {0, 1}, 1}});
  const auto r = contraction::linearize_contraction(f, spectral::from_bands({{0.2, 0.2}, {0.5, 0.5}}));
  const auto& st = r.stages.at(1);
  const bool ok = fol.measured_contraction <= fol.contraction_estimate && !st.exact &&
                  st.decay_rate <= st.eta + 0.05 && st.decay_r2 >= 0.98;
  return {ok, "Q contraction " + num(fol.measured_contraction) + " <= " + num(fol.contraction_estimate) +
                  ", Psi decay " + num(st.decay_rate) + " vs eta " + num(st.eta) + " (R^2 " + num(st.decay_r2) + ")"};
}

Outcome growth_bounds() {
  const auto f = poly(2, {{0.2, {1, 0}, 0}, {1.0, {0, 2}, 0}, {1.0, {1, 1}, 0}, {-20.0, {0, 3}, 0}, {0.5, {0, 1}, 1}});
  const auto dec = spectral::from_bands({{0.2, 0.2}, {0.5, 0.5}});
  const auto r = contraction::linearize_contraction(f, dec);
  const auto g = contraction::growth_bound_diagnostics(r, dec, 1, 100, 30, 5);
  const bool enough = g.q.points >= 3 && g.c1.points >= 3 && g.b1.points >= 3;
  const bool ok = enough && g.q.rate <= g.log_mu_l_plus + 0.05 && g.c1.rate <= g.log_mu_l_plus + 0.05 &&
                  g.b1.rate <= g.log_mu_m_plus + 0.05;
  return {ok, "Q " + num(g.q.rate) + ", c1 " + num(g.c1.rate) + " vs " + num(g.log_mu_l_plus) + "; b1 " +
                  num(g.b1.rate) + " vs " + num(g.log_mu_m_plus)};
}

Outcome holder_machinery() {
  const auto root = [](const Vec& x) {
    Vec o(1);
    o[0] = std::copysign(std::sqrt(std::abs(x[0])), x[0]);
    return o;
  };
  const auto est = verify::holder_exponent(root, Vec::Zero(1), 1.0);
  bool ok = std::abs(est.exponent - 0.5) <= 0.05;
  std::string detail = "root field " + num(est.exponent);

  struct Case {
    std::string name;
    dynamics::MapPtr map;
    spectral::SpectrumDecomposition dec;
  };
  const auto con = spectral::from_bands({{0.2, 0.2}, {0.5, 0.5}});
  const auto sad = spectral::from_bands({{0.5, 0.5}, {2.0, 2.0}});
  const std::vector<Case> cases = {
      {"contraction_quadratic", poly(2, {{0.2, {1, 0}, 0}, {1.0, {0, 2}, 0}, {0.5, {0, 1}, 1}}), con},
      {"contraction_coupled",
       poly(2, {{0.2, {1, 0}, 0}, {1.0, {0, 2}, 0}, {1.0, {1, 1}, 0}, {-20.0, {0, 3}, 0}, {0.5, {0, 1}, 1}}), con},
      {"hyperbolic_bilinear", poly(2, {{0.5, {1, 0}, 0}, {1.0, {1, 1}, 0}, {2.0, {0, 1}, 1}}), sad},
      {"hyperbolic_quadratic", poly(2, {{0.5, {1, 0}, 0}, {1.0, {0, 2}, 0}, {2.0, {0, 1}, 1}}), sad},
      {"hyperbolic_curved",
       poly(2, {{0.5, {1, 0}, 0}, {1.0, {0, 2}, 0}, {1.0, {1, 1}, 0}, {2.0, {0, 1}, 1}, {1.0, {2, 0}, 1}}), sad},
  };
  for (const auto& c : cases) {
    const auto lin = hyperbolic::linearize(c.map, c.dec);
    const double predicted = exponents::beta_overall(c.dec, 1e-3).beta_overall;
    const auto h = verify::holder_exponent([&](const Vec& x) { return verify::flatten(lin.chain->derivative(x)); },
                                           Vec::Zero(2), lin.report_box.half_width(0));
    ok = ok && h.exponent >= predicted - 0.1;
    detail += ", " + c.name + " " + num(h.exponent) + " >= " + num(predicted - 0.1);
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path work = fs::temp_directory_path() / "hyperlin_acceptance";
  fs::remove_all(work);
  const std::string cfg = std::string(HYPERLIN_SRC) + "/configs/contraction_quadratic.ini";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = std::string("\"") + HYPERLIN_CLI + "\" linearize --config \"" + cfg + "\" --out \"" +
                            (work / run).string() + "\" > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, "cli run failed: " + cmd};
  }
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), work / "a");
    if (slurp(e.path()) != slurp(work / "b" / rel)) return {false, rel.string() + " differs"};
    ++files;
  }
  std::size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(work / "b"))
    if (e.is_regular_file()) ++other;
  fs::remove_all(work);
  const bool ok = files > 0 && other == static_cast<std::size_t>(files);
  return {ok, std::to_string(files) + " output files byte-identical across two runs"};
}

}  // namespace

int main() {
  run(1, "condition checks", 1.0, conditions);
  run(2, "exponent formulas", 1.0, exponent_formulas);
  run(3, "contraction oracle", 30.0, contraction_oracle);
  run(4, "hyperbolic oracle", 120.0, hyperbolic_oracle);
  run(5, "lyapunov-perron", 120.0, lyapunov_perron);
  run(6, "fiber contraction", 0.0, fiber_contraction);
  run(7, "growth bounds", 0.0, growth_bounds);
  run(8, "holder machinery", 0.0, holder_machinery);
  run(9, "determinism", 0.0, determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
