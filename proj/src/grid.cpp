#include "hyperlin/grid.hpp"

#include "hyperlin/error.hpp"
#include "hyperlin/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hyperlin {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = (i == n - 1) ? hi : lo + (hi - lo) * i / (n - 1);
  return out;
}

GridFunction::GridFunction(Box box, std::vector<int> resolution, int codim)
    : box_(std::move(box)), res_(std::move(resolution)), codim_(codim) {
  init();
}

void GridFunction::init() {
  const int d = box_.dim();
  if (d == 0 || static_cast<int>(res_.size()) != d || d > kMaxDim || codim_ <= 0)
    throw Error(ErrorCode::InvalidArgument, "grid shape mismatch");
  h_.resize(d);
  inv_h_.resize(d);
  stride_.resize(d);
  nodes_ = 1;
  for (int a = d - 1; a >= 0; --a) {
    if (res_[a] < 2 || !(box_.hi[a] > box_.lo[a]))
      throw Error(ErrorCode::InvalidArgument, "grid axis needs at least two nodes and a positive width");
    stride_[a] = nodes_;
    nodes_ *= res_[a];
    h_[a] = (box_.hi[a] - box_.lo[a]) / (res_[a] - 1);
    inv_h_[a] = 1.0 / h_[a];
  }
  values_.assign(static_cast<std::size_t>(nodes_) * codim_, 0.0);
}

GridFunction GridFunction::sample(const Box& box, const std::vector<int>& resolution, int codim,
                                  const std::function<Vec(const Vec&)>& f) {
  GridFunction g(box, resolution, codim);
  for (long i = 0; i < g.nodes_; ++i) g.set_value(i, f(g.node(i)));
  return g;
}

std::vector<int> GridFunction::node_multi_index(long index) const {
  std::vector<int> m(dim());
  for (int a = 0; a < dim(); ++a) {
    m[a] = static_cast<int>(index / stride_[a]);
    index %= stride_[a];
  }
  return m;
}

long GridFunction::node_index(const std::vector<int>& multi) const {
  long idx = 0;
  for (int a = 0; a < dim(); ++a) idx += multi[a] * stride_[a];
  return idx;
}

Vec GridFunction::node(long index) const {
  Vec x(dim());
  const auto m = node_multi_index(index);
  for (int a = 0; a < dim(); ++a)
    x[a] = (m[a] == res_[a] - 1) ? box_.hi[a] : box_.lo[a] + m[a] * h_[a];
  return x;
}

Vec GridFunction::value(long index) const {
  Vec v(codim_);
  for (int c = 0; c < codim_; ++c) v[c] = values_[index * codim_ + c];
  return v;
}

void GridFunction::set_value(long index, const Vec& v) {
  for (int c = 0; c < codim_; ++c) values_[index * codim_ + c] = v[c];
}

Vec GridFunction::eval(const Vec& x) const {
  if (!box_.contains(x, 1e-9)) {
    std::ostringstream os;
    os << "point outside grid box (" << x.transpose() << ")";
    throw Error(ErrorCode::OutsideBox, os.str());
  }
  return eval_extrapolated(x);
}

Vec GridFunction::eval_extrapolated(const Vec& x) const {
  const int d = dim();
  long cell[kMaxDim];
  double frac[kMaxDim];
  for (int a = 0; a < d; ++a) {
    const double t = (x[a] - box_.lo[a]) * inv_h_[a];
    double c = std::floor(t);
    c = std::min(std::max(c, 0.0), static_cast<double>(res_[a] - 2));
    cell[a] = static_cast<long>(c);
    frac[a] = t - c;
  }
  Vec out = Vec::Zero(codim_);
  const int corners = 1 << d;
  for (int m = 0; m < corners; ++m) {
    double w = 1.0;
    long off = 0;
    for (int a = 0; a < d; ++a) {
      const int bit = (m >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      off += (cell[a] + bit) * stride_[a];
    }
    if (w == 0.0) continue;
    const double* v = values_.data() + off * codim_;
    for (int c = 0; c < codim_; ++c) out[c] += w * v[c];
  }
  return out;
}

namespace {

struct AxisWeights {
  int count = 0;
  long node[8];
  double w[8];
  double dw[8];
  void add(long n, double a, double b) {
    for (int i = 0; i < count; ++i)
      if (node[i] == n) {
        w[i] += a;
        dw[i] += b;
        return;
      }
    node[count] = n;
    w[count] = a;
    dw[count] = b;
    ++count;
  }
};

AxisWeights catmull_rom(double t, int res, double inv_h) {
  double c = std::floor(t);
  c = std::min(std::max(c, 0.0), static_cast<double>(res - 2));
  const double u = t - c, u2 = u * u, u3 = u2 * u;
  const double w[4] = {0.5 * (-u + 2 * u2 - u3), 0.5 * (2 - 5 * u2 + 3 * u3), 0.5 * (u + 4 * u2 - 3 * u3),
                       0.5 * (-u2 + u3)};
  const double dw[4] = {0.5 * (-1 + 4 * u - 3 * u2) * inv_h, 0.5 * (-10 * u + 9 * u2) * inv_h,
                        0.5 * (1 + 8 * u - 9 * u2) * inv_h, 0.5 * (-2 * u + 3 * u2) * inv_h};
  AxisWeights out;
  const long base = static_cast<long>(c) - 1;
  for (int i = 0; i < 4; ++i) {
    const long n = base + i;
    if (n >= 0 && n < res) {
      out.add(n, w[i], dw[i]);
    } else if (res >= 3) {
      // Ghost node from the quadratic through the three nearest nodes.
      const long a = n < 0 ? 0 : res - 1, s = n < 0 ? 1 : -1;
      out.add(a, 3 * w[i], 3 * dw[i]);
      out.add(a + s, -3 * w[i], -3 * dw[i]);
      out.add(a + 2 * s, w[i], dw[i]);
    } else {
      const long a = n < 0 ? 0 : res - 1, s = n < 0 ? 1 : -1;
      out.add(a, 2 * w[i], 2 * dw[i]);
      out.add(a + s, -w[i], -dw[i]);
    }
  }
  return out;
}

}  // namespace

void GridFunction::cubic(const Vec& x, Vec* value, Mat* jac) const {
  const int d = dim();
  AxisWeights ax[kMaxDim];
  long combos = 1;
  for (int a = 0; a < d; ++a) {
    ax[a] = catmull_rom((x[a] - box_.lo[a]) * inv_h_[a], res_[a], inv_h_[a]);
    combos *= ax[a].count;
  }
  if (value) *value = Vec::Zero(codim_);
  if (jac) *jac = Mat::Zero(codim_, d);
  int pick[kMaxDim] = {0};
  for (long m = 0; m < combos; ++m) {
    long rest = m, off = 0;
    double w = 1.0;
    for (int a = 0; a < d; ++a) {
      pick[a] = static_cast<int>(rest % ax[a].count);
      rest /= ax[a].count;
      w *= ax[a].w[pick[a]];
      off += ax[a].node[pick[a]] * stride_[a];
    }
    const double* v = values_.data() + off * codim_;
    if (value)
      for (int c = 0; c < codim_; ++c) (*value)[c] += w * v[c];
    if (jac)
      for (int b = 0; b < d; ++b) {
        double g = 1.0;
        for (int a = 0; a < d; ++a) g *= a == b ? ax[a].dw[pick[a]] : ax[a].w[pick[a]];
        for (int c = 0; c < codim_; ++c) (*jac)(c, b) += g * v[c];
      }
  }
}

Vec GridFunction::eval_cubic(const Vec& x) const {
  Vec v;
  cubic(x, &v, nullptr);
  return v;
}

Mat GridFunction::derivative_cubic(const Vec& x) const {
  Mat j;
  cubic(x, nullptr, &j);
  return j;
}

Mat GridFunction::derivative(const Vec& x) const {
  Mat J(codim_, dim());
  for (int a = 0; a < dim(); ++a) {
    Vec xp = x, xm = x;
    double lo_step = h_[a], hi_step = h_[a];
    if (x[a] - lo_step < box_.lo[a]) lo_step = std::max(0.0, x[a] - box_.lo[a]);
    if (x[a] + hi_step > box_.hi[a]) hi_step = std::max(0.0, box_.hi[a] - x[a]);
    if (lo_step + hi_step <= 0.0) lo_step = hi_step = h_[a];
    xp[a] += hi_step;
    xm[a] -= lo_step;
    J.col(a) = (eval_extrapolated(xp) - eval_extrapolated(xm)) / (lo_step + hi_step);
  }
  return J;
}

void GridFunction::eval_batch(const PointBatch& points, PointBatch& out) const {
  if (points.dim != dim()) throw Error(ErrorCode::InvalidArgument, "batch dimension mismatch");
  out = PointBatch(codim_, points.count);
  kernels::GridView view;
  view.dim = dim();
  view.lo = box_.lo.data();
  view.inv_h = inv_h_.data();
  view.res = res_.data();
  view.stride = stride_.data();
  view.values = values_.data();
  view.codim = codim_;
  const auto& k = kernels::active();
  for (int c = 0; c < codim_; ++c) {
    view.component = c;
    k.multilinear_eval(view, points.data.data(), points.count, out.coord(c));
  }
}

void GridFunction::write_csv(std::ostream& os) const {
  os << std::setprecision(17);
  os << "# dim " << dim() << " codim " << codim_ << "\n# res";
  for (int r : res_) os << ' ' << r;
  os << "\n# lo";
  for (double v : box_.lo) os << ' ' << v;
  os << "\n# hi";
  for (double v : box_.hi) os << ' ' << v;
  os << "\n";
  for (int a = 0; a < dim(); ++a) os << "x" << a << ',';
  for (int c = 0; c < codim_; ++c) os << "f" << c << (c + 1 < codim_ ? "," : "\n");
  for (long i = 0; i < nodes_; ++i) {
    const Vec x = node(i);
    for (int a = 0; a < dim(); ++a) os << x[a] << ',';
    for (int c = 0; c < codim_; ++c) os << values_[i * codim_ + c] << (c + 1 < codim_ ? "," : "\n");
  }
}

GridFunction GridFunction::read_csv(std::istream& is) {
  auto header = [&](const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::ConfigError, "truncated grid table");
    std::istringstream ls(line);
    std::string hash, k;
    ls >> hash >> k;
    if (hash != "#" || k != key) throw Error(ErrorCode::ConfigError, "grid table header missing '" + key + "'");
    std::vector<double> out;
    double v;
    while (ls >> v) out.push_back(v);
    return out;
  };
  std::string line;
  std::getline(is, line);
  int d = 0, c = 0;
  {
    std::istringstream ls(line);
    std::string hash, k1, k2;
    ls >> hash >> k1 >> d >> k2 >> c;
    if (k1 != "dim" || k2 != "codim") throw Error(ErrorCode::ConfigError, "bad grid table header");
  }
  const auto res_d = header("res");
  const auto lo = header("lo");
  const auto hi = header("hi");
  if (static_cast<int>(res_d.size()) != d || static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
    throw Error(ErrorCode::ConfigError, "grid table header has wrong arity");
  Box box{lo, hi};
  std::vector<int> res(res_d.begin(), res_d.end());
  GridFunction g(box, res, c);
  std::getline(is, line);  // column names
  for (long i = 0; i < g.nodes_; ++i) {
    if (!std::getline(is, line)) throw Error(ErrorCode::ConfigError, "grid table has too few rows");
    std::istringstream ls(line);
    std::string cell;
    for (int a = 0; a < d; ++a) std::getline(ls, cell, ',');
    for (int k = 0; k < c; ++k) {
      if (!std::getline(ls, cell, ',')) throw Error(ErrorCode::ConfigError, "grid table row too short");
      g.values_[i * c + k] = std::stod(cell);
    }
  }
  return g;
}

void GridFunction::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  write_csv(os);
}

GridFunction GridFunction::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ConfigError, "cannot read " + path);
  return read_csv(is);
}

}  // namespace hyperlin
