#include "hyperlin/verify.hpp"

#include "hyperlin/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <map>
#include <random>

namespace hyperlin::verify {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Vec unit_ball_point(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i) p[i] = u(rng);
    if (p.norm() <= 1.0) return p;
  }
}

}  // namespace

Vec flatten(const Mat& m) {
  Vec v(m.rows() * m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c);
  return v;
}

std::vector<Vec> sample_box(const Box& box, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec x(box.dim());
    for (int a = 0; a < box.dim(); ++a) x[a] = box.lo[a] + u(rng) * (box.hi[a] - box.lo[a]);
    out.push_back(x);
  }
  return out;
}

HolderEstimate holder_exponent(const Field& field, const Vec& center, double radius, const HolderOptions& opts,
                               unsigned seed) {
  if (!(radius > 0.0) || !(opts.sep_lo > 0.0) || !(opts.sep_hi > opts.sep_lo) || opts.scales < 2)
    throw Error(ErrorCode::InvalidArgument, "holder_exponent: bad radius or separation range");
  const int dim = static_cast<int>(center.size());
  std::mt19937_64 rng(seed);
  const double log_lo = std::log(opts.sep_lo * radius), log_hi = std::log(opts.sep_hi * radius);

  struct Obs {
    int family;
    double ls, ln;
  };
  std::vector<Obs> obs;
  double sep_min = INFINITY, sep_max = 0.0;
  for (int f = 0; f < opts.families; ++f) {
    Vec a, b;
    do {
      a = unit_ball_point(dim, rng);
      b = unit_ball_point(dim, rng);
    } while ((a - b).norm() < 0.25);
    const double ab = (a - b).norm();
    for (int j = 0; j < opts.scales; ++j) {
      const double sep = std::exp(log_lo + (log_hi - log_lo) * j / (opts.scales - 1));
      const double s = sep / ab;
      const Vec fa = field(center + s * a), fb = field(center + s * b);
      const double num = inf_norm(Vec(fa - fb));
      const double floor = 100.0 * DBL_EPSILON * std::max({1.0, inf_norm(fa), inf_norm(fb)});
      if (!(num > floor)) continue;
      obs.push_back({f, std::log(sep), std::log(num)});
      sep_min = std::min(sep_min, sep);
      sep_max = std::max(sep_max, sep);
    }
  }

  HolderEstimate est;
  // Families with fewer than three usable scales carry little slope information.
  std::map<int, std::pair<int, std::pair<double, double>>> fam;
  for (const auto& o : obs) {
    auto& e = fam[o.family];
    e.first += 1;
    e.second.first += o.ls;
    e.second.second += o.ln;
  }
  double sxx = 0.0, sxy = 0.0;
  int used = 0, groups = 0;
  for (const auto& [f, e] : fam)
    if (e.first >= 3) ++groups;
  for (const auto& o : obs) {
    const auto& e = fam[o.family];
    if (e.first < 3) continue;
    const double dx = o.ls - e.second.first / e.first, dy = o.ln - e.second.second / e.first;
    sxx += dx * dx;
    sxy += dx * dy;
    ++used;
  }
  est.pairs = used;
  est.sep_min = used ? sep_min : 0.0;
  est.sep_max = used ? sep_max : 0.0;
  if (used < opts.min_pairs || sxx <= 0.0) {
    est.constant = true;
    return est;
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (const auto& o : obs) {
    const auto& e = fam[o.family];
    if (e.first < 3) continue;
    const double dx = o.ls - e.second.first / e.first, dy = o.ln - e.second.second / e.first;
    ssr += (dy - slope * dx) * (dy - slope * dx);
  }
  const int dof = std::max(1, used - groups - 1);
  const double se = std::sqrt(ssr / dof / sxx);
  est.raw_slope = slope;
  est.exponent = std::clamp(slope, 0.0, 1.05);
  est.ci_low = slope - 1.96 * se;
  est.ci_high = slope + 1.96 * se;
  return est;
}

ResidualReport conjugacy_residual(const dynamics::Map& map, const transform::Transform& chain, const Mat& lin,
                                  const Box& box, int samples, unsigned seed) {
  ResidualReport r;
  const auto pts = sample_box(box, samples, seed);
  for (const auto& x : pts) {
    const double fwd = inf_norm(Vec(chain.forward(map.eval(x)) - lin * chain.forward(x)));
    const double inv = inf_norm(Vec(map.eval(chain.inverse(x)) - chain.inverse(Vec(lin * x))));
    r.max = std::max(r.max, fwd);
    r.mean += fwd;
    r.inverse_max = std::max(r.inverse_max, inv);
    r.inverse_mean += inv;
  }
  r.samples = static_cast<int>(pts.size());
  if (r.samples) {
    r.mean /= r.samples;
    r.inverse_mean /= r.samples;
  }
  return r;
}

double foliation_invariance(const dynamics::Map& map, const lp::FoliationResult& fol, int samples, unsigned seed) {
  const Box& xb = fol.omega.x_box;
  const Box& yb = fol.omega.y_box;
  const int n = xb.dim(), c = yb.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int accepted = 0;
  for (long attempt = 0; attempt < 50L * samples && accepted < samples; ++attempt) {
    Vec x(n), y(c);
    for (int a = 0; a < n; ++a) x[a] = xb.lo[a] + u(rng) * (xb.hi[a] - xb.lo[a]);
    for (int a = 0; a < c; ++a) y[a] = yb.lo[a] + u(rng) * (yb.hi[a] - yb.lo[a]);
    const Vec p = x + fol.q0(x, y);
    const Vec fp = map.eval(p);
    const Vec fx = map.eval(x);
    const Vec fy = gather(fp, fol.contracting);
    if (!xb.contains(fx) || !yb.contains(fy)) continue;
    ++accepted;
    worst = std::max(worst, inf_norm(Vec(fp - fx - fol.q0(fx, fy))));
  }
  return worst;
}

DiffeoReport diffeo_check(const transform::Transform& chain, const Box& box, int samples, unsigned seed) {
  DiffeoReport r;
  r.min_singular = INFINITY;
  double scale = 0.0;
  for (int a = 0; a < box.dim(); ++a) scale = std::max(scale, box.half_width(a));
  const double step = 1e-4 * scale;
  const auto pts = sample_box(box, samples, seed);
  for (const auto& x : pts) {
    r.forward_inverse = std::max(r.forward_inverse, inf_norm(Vec(chain.inverse(chain.forward(x)) - x)));
    const Mat d = chain.derivative(x);
    const Mat fd = dynamics::finite_difference_jacobian([&](const Vec& z) { return chain.forward(z); }, x, step);
    r.derivative_mismatch = std::max(r.derivative_mismatch, (fd - d).cwiseAbs().maxCoeff());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(d)};
    r.min_singular = std::min(r.min_singular, svd.singularValues().minCoeff());
    r.max_singular = std::max(r.max_singular, svd.singularValues().maxCoeff());
  }
  r.samples = static_cast<int>(pts.size());
  if (!r.samples) r.min_singular = 0.0;
  return r;
}

std::vector<SharpnessRow> sharpness_experiment(const std::vector<double>& params,
                                               const std::function<SharpnessMember(double)>& build,
                                               double margin, unsigned seed) {
  std::vector<SharpnessRow> rows;
  for (double p : params) {
    SharpnessRow row;
    row.parameter = p;
    try {
      const SharpnessMember m = build(p);
      row.predicted = m.predicted;
      double radius = INFINITY;
      for (int a = 0; a < m.box.dim(); ++a) radius = std::min(radius, m.box.half_width(a));
      const auto est = holder_exponent([&](const Vec& x) { return flatten(m.chain->derivative(x)); },
                                       Vec::Zero(m.box.dim()), radius, {}, seed);
      row.measured = est.exponent;
      row.constant = est.constant;
      row.ok = row.measured >= row.predicted - margin;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hyperlin::verify
