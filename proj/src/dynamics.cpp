#include "hyperlin/dynamics.hpp"

#include "hyperlin/error.hpp"
#include "hyperlin/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

namespace hyperlin::dynamics {

Box unbounded_box(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  Box b;
  b.lo.assign(dim, -inf);
  b.hi.assign(dim, inf);
  return b;
}

Map::Map(Mat linear, Box domain) : linear_(std::move(linear)), domain_(std::move(domain)) {
  if (domain_.dim() == 0) domain_ = unbounded_box(dim());
  if (dim() < 1 || dim() > kMaxDim / 2) throw Error(ErrorCode::InvalidArgument, "map dimension must be between 1 and 4");
}

Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int j = 0; j < x.size(); ++j) {
    Vec xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return J;
}

Mat Map::jacobian(const Vec& x) const {
  const double step = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
  return finite_difference_jacobian([this](const Vec& z) { return eval(z); }, x, step);
}

void Map::eval_batch(const PointBatch& in, PointBatch& out) const {
  out = PointBatch(dim(), in.count);
  for (std::size_t i = 0; i < in.count; ++i) out.set_point(i, eval(in.point(i)));
}

void Map::jacobian_batch(const PointBatch& in, PointBatch& out) const {
  const int n = dim();
  out = PointBatch(n * n, in.count);
  for (std::size_t i = 0; i < in.count; ++i) {
    const Mat J = jacobian(in.point(i));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) out.coord(r * n + c)[i] = J(r, c);
  }
}

namespace {

Mat linear_part_of(int dim, const std::vector<PolyTerm>& terms) {
  Mat L = Mat::Zero(dim, dim);
  for (const auto& t : terms) {
    if (static_cast<int>(t.exponents.size()) != dim || t.output < 0 || t.output >= dim)
      throw Error(ErrorCode::InvalidArgument, "polynomial term has wrong arity or output index");
    int degree = 0, var = -1;
    for (int j = 0; j < dim; ++j) {
      if (t.exponents[j] < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent");
      degree += t.exponents[j];
      if (t.exponents[j] == 1) var = j;
    }
    if (degree == 0 && t.coef != 0.0) throw Error(ErrorCode::InvalidArgument, "map must fix the origin (constant term)");
    if (degree == 1) L(t.output, var) += t.coef;
  }
  return L;
}

}  // namespace

PolynomialMap::PolynomialMap(int dim, std::vector<PolyTerm> terms, Box domain)
    : Map(linear_part_of(dim, terms), std::move(domain)), terms_(std::move(terms)) {
  value_ = flatten(dim, dim, terms_);
  std::vector<PolyTerm> dterms;
  for (const auto& t : terms_) {
    for (int j = 0; j < dim; ++j) {
      if (t.exponents[j] == 0) continue;
      PolyTerm d = t;
      d.coef *= t.exponents[j];
      d.exponents[j] -= 1;
      d.output = t.output * dim + j;
      dterms.push_back(d);
    }
  }
  deriv_ = flatten(dim, dim * dim, dterms);
}

PolynomialMap::Flat PolynomialMap::flatten(int dim, int outputs, const std::vector<PolyTerm>& terms) {
  Flat p;
  p.outputs = outputs;
  for (const auto& t : terms) {
    p.coef.push_back(t.coef);
    p.output.push_back(t.output);
    p.exponents.insert(p.exponents.end(), t.exponents.begin(), t.exponents.begin() + dim);
  }
  return p;
}

Vec PolynomialMap::eval_flat(const Flat& p, int dim, const Vec& x) {
  Vec out = Vec::Zero(p.outputs);
  for (std::size_t t = 0; t < p.coef.size(); ++t) {
    double v = p.coef[t];
    const int* e = p.exponents.data() + t * dim;
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < e[j]; ++k) v *= x[j];
    out[p.output[t]] += v;
  }
  return out;
}

Vec PolynomialMap::eval(const Vec& x) const { return eval_flat(value_, dim(), x); }

Mat PolynomialMap::jacobian(const Vec& x) const {
  const Vec flat = eval_flat(deriv_, dim(), x);
  Mat J(dim(), dim());
  for (int r = 0; r < dim(); ++r)
    for (int c = 0; c < dim(); ++c) J(r, c) = flat[r * dim() + c];
  return J;
}

void PolynomialMap::batch(const Flat& p, const PointBatch& in, PointBatch& out) const {
  out = PointBatch(p.outputs, in.count);
  kernels::PolyView view;
  view.dim = dim();
  view.outputs = p.outputs;
  view.nterms = static_cast<int>(p.coef.size());
  view.coef = p.coef.data();
  view.output = p.output.data();
  view.exponents = p.exponents.data();
  kernels::active().poly_eval(view, in.data.data(), in.count, out.data.data());
}

void PolynomialMap::eval_batch(const PointBatch& in, PointBatch& out) const { batch(value_, in, out); }
void PolynomialMap::jacobian_batch(const PointBatch& in, PointBatch& out) const { batch(deriv_, in, out); }

FunctionMap::FunctionMap(Mat linear, Eval f, Jac df, Box domain)
    : Map(std::move(linear), std::move(domain)), f_(std::move(f)), df_(std::move(df)) {}

Mat FunctionMap::jacobian(const Vec& x) const { return df_ ? df_(x) : Map::jacobian(x); }

BasisChangedMap::BasisChangedMap(MapPtr inner, Mat basis, Mat basis_inv)
    : Map(basis_inv * inner->linear() * basis, unbounded_box(inner->dim())),
      inner_(std::move(inner)),
      basis_(std::move(basis)),
      basis_inv_(std::move(basis_inv)) {}

Vec BasisChangedMap::eval(const Vec& z) const { return basis_inv_ * inner_->eval(basis_ * z); }
Mat BasisChangedMap::jacobian(const Vec& z) const { return basis_inv_ * inner_->jacobian(basis_ * z) * basis_; }

RestrictedMap::RestrictedMap(MapPtr inner, IndexSet idx)
    : Map(gather(inner->linear(), idx, idx), unbounded_box(static_cast<int>(idx.size()))),
      inner_(std::move(inner)),
      idx_(std::move(idx)) {}

Vec RestrictedMap::embed(const Vec& x) const {
  Vec full = Vec::Zero(inner_->dim());
  scatter(full, idx_, x);
  return full;
}

Vec RestrictedMap::eval(const Vec& x) const { return gather(inner_->eval(embed(x)), idx_); }
Mat RestrictedMap::jacobian(const Vec& x) const { return gather(inner_->jacobian(embed(x)), idx_, idx_); }

InverseMap::InverseMap(MapPtr inner, NewtonOptions opts)
    : Map(inner->linear().inverse(), unbounded_box(inner->dim())),
      inner_(std::move(inner)),
      lin_inv_(inner_->linear().inverse()),
      opts_(opts) {}

double InverseMap::linear_beyond() const {
  // F = Lambda beyond r1 means F^{-1} = Lambda^{-1} on Lambda(outside r1), which
  // contains everything beyond ||Lambda|| r1.
  const double r = inner_->linear_beyond();
  if (!std::isfinite(r)) return r;
  return r * Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(inner_->linear())).singularValues()(0);
}

Vec InverseMap::eval(const Vec& z) const {
  Vec x = lin_inv_ * z;
  if (x.norm() >= inner_->linear_beyond()) return x;
  Vec r = inner_->eval(x) - z;
  double rn = r.cwiseAbs().maxCoeff();
  const double scale = std::max(z.cwiseAbs().maxCoeff(), 1e-300);
  for (int it = 0; it < opts_.max_iter; ++it) {
    if (rn <= 4e-16 * scale || rn == 0.0) return x;
    const Vec dx = inner_->jacobian(x).fullPivLu().solve(r);
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h < 30; ++h) {
      const Vec xn = x - t * dx;
      const Vec rnew = inner_->eval(xn) - z;
      const double nn = rnew.cwiseAbs().maxCoeff();
      if (nn < rn) {
        x = xn;
        r = rnew;
        rn = nn;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      // Stalled at round-off level.
      if (rn <= 1e-13 * scale) return x;
      break;
    }
  }
  if (rn <= 1e-13 * scale) return x;
  std::ostringstream os;
  os << "inverse Newton did not converge (residual " << rn << ")";
  throw Error(ErrorCode::InverseNewtonFailed, os.str());
}

Mat InverseMap::jacobian(const Vec& z) const { return inner_->jacobian(eval(z)).inverse(); }

double bump_kernel(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return std::exp(1.0 / (t * (t - 1.0)));
}

namespace {

// Cumulative integral of q on a uniform table, evaluated by cubic Hermite
// interpolation with the exact slope q.
class PrimitiveTable {
 public:
  static constexpr int kCells = 4096;

  PrimitiveTable() {
    using boost::math::quadrature::gauss_kronrod;
    values_[0] = 0.0;
    for (int i = 0; i < kCells; ++i) {
      const double a = static_cast<double>(i) / kCells, b = static_cast<double>(i + 1) / kCells;
      values_[i + 1] = values_[i] + gauss_kronrod<double, 15>::integrate(bump_kernel, a, b, 0, 0.0);
    }
    total_ = values_[kCells];
    for (auto& v : values_) v /= total_;
  }

  double total() const { return total_; }

  double operator()(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double t = s * kCells;
    const int i = std::min(static_cast<int>(t), kCells - 1);
    const double u = t - i;
    const double h = 1.0 / kCells;
    const double y0 = values_[i], y1 = values_[i + 1];
    const double d0 = bump_kernel(static_cast<double>(i) / kCells) / total_ * h;
    const double d1 = bump_kernel(static_cast<double>(i + 1) / kCells) / total_ * h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * d0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * d1;
  }

 private:
  std::array<double, kCells + 1> values_{};
  double total_ = 1.0;
};

const PrimitiveTable& primitive_table() {
  static const PrimitiveTable table;
  return table;
}

}  // namespace

double bump_primitive(double s) { return primitive_table()(s); }

double bump_u(double x1, double x2) {
  if (x1 == 0.0 && x2 == 0.0) throw Error(ErrorCode::OriginUndefined, "u is undefined at the origin");
  if (x1 <= 0.0) return 0.0;
  if (x1 >= std::fabs(x2)) return 1.0;
  return bump_primitive(x1 / std::fabs(x2));
}

RadialCutoff::RadialCutoff(double r0, double r1) : r0_(r0), r1_(r1) {
  if (!(r0 > 0.0 && r1 > r0)) throw Error(ErrorCode::InvalidArgument, "cutoff radii need 0 < r0 < r1");
}

double RadialCutoff::value(double r) const {
  if (r <= r0_) return 1.0;
  if (r >= r1_) return 0.0;
  return 1.0 - bump_primitive((r - r0_) / (r1_ - r0_));
}

double RadialCutoff::slope(double r) const {
  if (r <= r0_ || r >= r1_) return 0.0;
  const double w = r1_ - r0_;
  return -bump_kernel((r - r0_) / w) / (primitive_table().total() * w);
}

BumpModifiedMap::BumpModifiedMap(MapPtr inner, double r0, double r1)
    : Map(inner->linear(), unbounded_box(inner->dim())), inner_(std::move(inner)), cutoff_(r0, r1) {}

Vec BumpModifiedMap::eval(const Vec& x) const {
  const double r = x.norm();
  if (r >= cutoff_.r1()) return linear() * x;
  if (r <= cutoff_.r0()) return inner_->eval(x);
  const Vec lx = linear() * x;
  return lx + cutoff_.value(r) * (inner_->eval(x) - lx);
}

Mat BumpModifiedMap::jacobian(const Vec& x) const {
  const double r = x.norm();
  if (r >= cutoff_.r1()) return linear();
  if (r <= cutoff_.r0()) return inner_->jacobian(x);
  const Vec f = inner_->eval(x) - linear() * x;
  const Mat df = inner_->jacobian(x) - linear();
  return linear() + cutoff_.value(r) * df + f * (cutoff_.slope(r) / r) * x.transpose();
}

void BumpModifiedMap::eval_batch(const PointBatch& in, PointBatch& out) const {
  const int n = dim();
  out = PointBatch(n, in.count);
  std::vector<std::size_t> active;
  std::vector<double> radius(in.count);
  for (std::size_t i = 0; i < in.count; ++i) {
    double r2 = 0.0;
    for (int c = 0; c < n; ++c) r2 += in.coord(c)[i] * in.coord(c)[i];
    radius[i] = std::sqrt(r2);
    if (radius[i] < cutoff_.r1()) active.push_back(i);
  }
  for (std::size_t i = 0; i < in.count; ++i) {
    for (int r = 0; r < n; ++r) {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += linear()(r, c) * in.coord(c)[i];
      out.coord(r)[i] = s;
    }
  }
  if (active.empty()) return;
  PointBatch sub(n, active.size()), fsub;
  for (std::size_t k = 0; k < active.size(); ++k)
    for (int c = 0; c < n; ++c) sub.coord(c)[k] = in.coord(c)[active[k]];
  inner_->eval_batch(sub, fsub);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t i = active[k];
    const double rho = cutoff_.value(radius[i]);
    for (int c = 0; c < n; ++c) {
      const double lx = out.coord(c)[i];
      out.coord(c)[i] = (rho == 1.0) ? fsub.coord(c)[k] : lx + rho * (fsub.coord(c)[k] - lx);
    }
  }
}

void BumpModifiedMap::jacobian_batch(const PointBatch& in, PointBatch& out) const {
  const int n = dim();
  out = PointBatch(n * n, in.count);
  std::vector<std::size_t> active;
  std::vector<double> radius(in.count);
  for (std::size_t i = 0; i < in.count; ++i) {
    double r2 = 0.0;
    for (int c = 0; c < n; ++c) r2 += in.coord(c)[i] * in.coord(c)[i];
    radius[i] = std::sqrt(r2);
    if (radius[i] < cutoff_.r1()) active.push_back(i);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) out.coord(r * n + c)[i] = linear()(r, c);
  }
  if (active.empty()) return;
  PointBatch sub(n, active.size()), fsub, jsub;
  for (std::size_t k = 0; k < active.size(); ++k)
    for (int c = 0; c < n; ++c) sub.coord(c)[k] = in.coord(c)[active[k]];
  inner_->jacobian_batch(sub, jsub);
  bool need_values = false;
  for (std::size_t k = 0; k < active.size(); ++k)
    if (radius[active[k]] > cutoff_.r0()) need_values = true;
  if (need_values) inner_->eval_batch(sub, fsub);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t i = active[k];
    const double r = radius[i];
    if (r <= cutoff_.r0()) {
      for (int e = 0; e < n * n; ++e) out.coord(e)[i] = jsub.coord(e)[k];
      continue;
    }
    const double rho = cutoff_.value(r);
    const double sl = cutoff_.slope(r) / r;
    for (int a = 0; a < n; ++a) {
      double lx = 0.0;
      for (int c = 0; c < n; ++c) lx += linear()(a, c) * sub.coord(c)[k];
      const double fa = fsub.coord(a)[k] - lx;
      for (int b = 0; b < n; ++b) {
        const double L = linear()(a, b);
        out.coord(a * n + b)[i] = L + rho * (jsub.coord(a * n + b)[k] - L) + fa * sl * sub.coord(b)[k];
      }
    }
  }
}

NonlinearitySize sample_nonlinearity(const Map& map, double radius) {
  const int n = map.dim();
  // Lattice over [-radius, radius]^n plus random points in the ball.
  static constexpr std::array<int, 5> kLattice{0, 2001, 201, 41, 17};
  const int per_axis = kLattice[std::min(n, 4)];
  std::vector<Vec> samples;
  long total = 1;
  for (int a = 0; a < n; ++a) total *= per_axis;
  for (long idx = 0; idx < total; ++idx) {
    Vec x(n);
    long rest = idx;
    for (int a = 0; a < n; ++a) {
      x[a] = -radius + 2.0 * radius * (rest % per_axis) / (per_axis - 1);
      rest /= per_axis;
    }
    if (x.norm() < radius) samples.push_back(x);
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 10000; ++s) {
    Vec x(n);
    for (int a = 0; a < n; ++a) x[a] = g(rng);
    x *= radius * std::pow(u(rng), 1.0 / n) / x.norm();
    samples.push_back(x);
  }
  NonlinearitySize out;
  auto norms = [&](const Vec& x) {
    const Mat d = map.jacobian(x) - map.linear();
    return std::pair{Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(d)).singularValues()(0),
                     d.cwiseAbs().rowwise().sum().maxCoeff()};
  };
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto [e2, einf] = norms(samples[i]);
    out.eta = std::max(out.eta, e2);
    out.eta_inf = std::max(out.eta_inf, einf);
    ranked.push_back({e2, i});
  }
  // Sampling underestimates the supremum; polish the best samples by compass search.
  const std::size_t top = std::min<std::size_t>(16, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + top, ranked.end(), std::greater<>());
  for (std::size_t t = 0; t < top && out.eta > 0.0; ++t) {
    Vec x = samples[ranked[t].second];
    double best = ranked[t].first;
    for (double step = 2.0 * radius / (per_axis - 1); step > 1e-10 * radius; step *= 0.5) {
      // Capped: along the boundary sphere the search can creep indefinitely.
      bool moved = true;
      for (int moves = 0; moved && moves < 64; ++moves) {
        moved = false;
        for (int a = 0; a < n; ++a)
          for (double sgn : {1.0, -1.0}) {
            Vec y = x;
            y[a] += sgn * step;
            if (y.norm() >= radius) continue;
            const auto [e2, einf] = norms(y);
            out.eta_inf = std::max(out.eta_inf, einf);
            if (e2 > best) {
              best = e2;
              x = y;
              moved = true;
            }
          }
      }
    }
    out.eta = std::max(out.eta, best);
  }
  return out;
}

BumpModification bump_modify(const MapPtr& map, double r0, double r1, double eta_target) {
  const int n = map->dim();
  for (int a = 0; a < n; ++a)
    if (!(map->domain().lo[a] <= -r1 && map->domain().hi[a] >= r1))
      throw Error(ErrorCode::InvalidArgument, "bump radii must lie inside the domain box");
  auto mod = std::make_shared<const BumpModifiedMap>(map, r0, r1);
  const auto size = sample_nonlinearity(*mod, r1);
  BumpModification out;
  out.r0 = r0;
  out.r1 = r1;
  out.map = mod;
  out.eta = size.eta;
  out.eta_inf = size.eta_inf;
  if (out.eta > eta_target) {
    std::ostringstream os;
    os << "achieved eta " << out.eta << " exceeds the target " << eta_target << " for radii (" << r0 << ", " << r1
       << ")";
    throw Error(ErrorCode::EtaNotAchievable, os.str());
  }
  return out;
}

Vec iterate(const Map& map, const Vec& x, int k) {
  Vec y = x;
  for (int i = 0; i < k; ++i) {
    if (!map.domain().contains(y)) throw Error(ErrorCode::LeftDomain, "iterate left the domain at step " + std::to_string(i));
    y = map.eval(y);
  }
  if (!map.domain().contains(y)) throw Error(ErrorCode::LeftDomain, "iterate left the domain at step " + std::to_string(k));
  return y;
}

Mat iterate_derivative(const Map& map, const Vec& x, int k) {
  Vec y = x;
  Mat D = Mat::Identity(map.dim(), map.dim());
  for (int i = 0; i < k; ++i) {
    if (!map.domain().contains(y)) throw Error(ErrorCode::LeftDomain, "iterate left the domain at step " + std::to_string(i));
    D = map.jacobian(y) * D;
    y = map.eval(y);
  }
  return D;
}

double origin_residual(const Map& map) { return map.eval(Vec::Zero(map.dim())).cwiseAbs().maxCoeff(); }

double linear_part_residual(const Map& map) {
  return (map.jacobian(Vec::Zero(map.dim())) - map.linear()).cwiseAbs().maxCoeff();
}

}  // namespace hyperlin::dynamics
