#include "hyperlin/invariant_graph.hpp"

#include "hyperlin/error.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hyperlin::graphs {

namespace {

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Vec assemble(int n, const IndexSet& a, const Vec& xa, const IndexSet& b, const Vec& xb) {
  Vec x = Vec::Zero(n);
  scatter(x, a, xa);
  scatter(x, b, xb);
  return x;
}

// Quadratic part of w -> pi_uv F(0, w) by second differences, and the jet M
// with h(w) ~ (w^T M_c w)_c.
std::vector<Eigen::MatrixXd> quadratic_jet(const dynamics::Map& f, const IndexSet& uv, const IndexSet& w,
                                           double step, bool* resonant) {
  const int n = f.dim(), p = static_cast<int>(uv.size()), q = static_cast<int>(w.size());
  const Mat lam = f.linear();
  const Mat C = gather(lam, w, w), L = gather(lam, uv, uv);
  auto fw = [&](const Vec& ww) { return gather(f.eval(assemble(n, uv, Vec::Zero(p), w, ww)), uv); };
  const Vec f0 = fw(Vec::Zero(q));
  std::vector<Eigen::MatrixXd> Q(p, Eigen::MatrixXd::Zero(q, q));
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) {
      Vec hess;
      if (i == j) {
        Vec e = Vec::Zero(q);
        e[i] = step;
        hess = (fw(e) - 2.0 * f0 + fw(Vec(-e))) / (step * step);
      } else {
        Vec a = Vec::Zero(q), b = Vec::Zero(q);
        a[i] = step;
        b[j] = step;
        hess = (fw(Vec(a + b)) - fw(Vec(a - b)) - fw(Vec(b - a)) + fw(Vec(-a - b))) / (4.0 * step * step);
      }
      for (int c = 0; c < p; ++c) Q[c](i, j) = Q[c](j, i) = 0.5 * hess[c];
    }
  // vec(C^T M C) = (C^T kron C^T) vec(M) in column-major vec.
  const int qq = q * q;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p * qq, p * qq);
  Eigen::MatrixXd CtC = Eigen::kroneckerProduct(Eigen::MatrixXd(C.transpose()), Eigen::MatrixXd(C.transpose()));
  Eigen::VectorXd rhs(p * qq);
  for (int c = 0; c < p; ++c) {
    K.block(c * qq, c * qq, qq, qq) += CtC;
    for (int d = 0; d < p; ++d) K.block(c * qq, d * qq, qq, qq) -= L(c, d) * Eigen::MatrixXd::Identity(qq, qq);
    rhs.segment(c * qq, qq) = Eigen::Map<const Eigen::VectorXd>(Q[c].data(), qq);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  std::vector<Eigen::MatrixXd> M(p, Eigen::MatrixXd::Zero(q, q));
  *resonant = lu.rank() < K.rows();
  if (*resonant) return M;
  const Eigen::VectorXd sol = lu.solve(rhs);
  for (int c = 0; c < p; ++c) M[c] = Eigen::Map<const Eigen::MatrixXd>(sol.data() + c * qq, q, q);
  return M;
}

}  // namespace

GraphResult slow_graph(const dynamics::Map& stage, const IndexSet& uv, const IndexSet& w, const Box& wbox,
                       const std::vector<int>& resolution, const GraphSettings& settings) {
  const int n = stage.dim(), p = static_cast<int>(uv.size()), q = static_cast<int>(w.size());
  if (p + q != n || q == 0 || p == 0) throw Error(ErrorCode::InvalidArgument, "slow_graph: bad index sets");
  const Mat C = gather(stage.linear(), w, w);
  const Mat C_inv = C.inverse();
  double hw = INFINITY;
  for (int a = 0; a < q; ++a) hw = std::min(hw, wbox.half_width(a));
  bool resonant = false;
  const auto M = quadratic_jet(stage, uv, w, 0.1 * hw, &resonant);

  GraphResult out;
  out.jet_closure = !resonant;
  out.g = GridFunction(wbox, resolution, p);
  auto jet = [&](const Vec& ww) {
    Vec o(p);
    const Eigen::VectorXd we = ww;
    for (int c = 0; c < p; ++c) o[c] = we.dot(M[c] * we);
    return o;
  };
  auto lookup = [&](const GridFunction& g, const Vec& ww) {
    return wbox.contains(ww, 1e-12) ? g.eval_cubic(ww) : jet(ww);
  };
  // Start from the jet; preimages and the values they need are fixed per node.
  std::vector<Vec> pre(out.g.node_count());
  for (long i = 0; i < out.g.node_count(); ++i) {
    pre[i] = C_inv * out.g.node(i);
    out.g.set_value(i, jet(out.g.node(i)));
  }
  for (int it = 1; it <= settings.max_iter; ++it) {
    GridFunction next = out.g;
    double delta = 0.0, scale = 0.0;
    for (long i = 0; i < out.g.node_count(); ++i) {
      const Vec hv = lookup(out.g, pre[i]);
      const Vec val = gather(stage.eval(assemble(n, uv, hv, w, pre[i])), uv);
      delta = std::max(delta, max_abs(Vec(val - out.g.value(i))));
      scale = std::max(scale, max_abs(val));
      next.set_value(i, val);
    }
    out.g = std::move(next);
    out.iterations = it;
    out.last_delta = delta;
    if (delta <= settings.tol * std::max(1.0, scale)) break;
    if (it == settings.max_iter) {
      std::ostringstream os;
      os << "slow graph transform stalled at change " << delta << " after " << it << " sweeps";
      throw Error(ErrorCode::NoConvergence, os.str());
    }
  }
  for (long i = 0; i < out.g.node_count(); ++i) {
    const Vec ww = out.g.node(i);
    const Vec cw = C * ww;
    if (!wbox.contains(cw, 1e-12)) continue;
    const Vec img = gather(stage.eval(assemble(n, uv, out.g.value(i), w, ww)), uv);
    out.residual = std::max(out.residual, max_abs(Vec(img - out.g.eval_cubic(cw))));
  }
  return out;
}

GraphResult stable_graph(const dynamics::Map& map, const IndexSet& s, const IndexSet& e, const Box& sbox,
                         const std::vector<int>& resolution, const GraphSettings& settings) {
  const int n = map.dim(), ps = static_cast<int>(s.size()), pe = static_cast<int>(e.size());
  if (ps + pe != n || ps == 0 || pe == 0) throw Error(ErrorCode::InvalidArgument, "stable_graph: bad index sets");
  const Mat lam = map.linear();
  const Mat le_inv = gather(lam, e, e).inverse();
  GraphResult out;
  out.g = GridFunction(sbox, resolution, pe);
  for (int it = 1; it <= settings.max_iter; ++it) {
    GridFunction next = out.g;
    double delta = 0.0, scale = 0.0;
    for (long i = 0; i < out.g.node_count(); ++i) {
      const Vec y = out.g.node(i);
      const Vec x = assemble(n, s, y, e, out.g.value(i));
      const Vec fx = map.eval(x);
      const Vec fe = gather(Vec(fx - lam * x), e);
      const Vec val = le_inv * (out.g.eval_cubic(gather(fx, s)) - fe);
      delta = std::max(delta, max_abs(Vec(val - out.g.value(i))));
      scale = std::max(scale, max_abs(val));
      next.set_value(i, val);
    }
    out.g = std::move(next);
    out.iterations = it;
    out.last_delta = delta;
    if (delta <= settings.tol * std::max(1.0, scale)) break;
    if (it == settings.max_iter) {
      std::ostringstream os;
      os << "stable graph transform stalled at change " << delta << " after " << it << " sweeps";
      throw Error(ErrorCode::NoConvergence, os.str());
    }
  }
  for (long i = 0; i < out.g.node_count(); ++i) {
    const Vec y = out.g.node(i);
    const Vec fx = map.eval(assemble(n, s, y, e, out.g.value(i)));
    const Vec fy = gather(fx, s);
    if (!sbox.contains(fy, 1e-12)) continue;
    out.residual = std::max(out.residual, max_abs(Vec(gather(fx, e) - out.g.eval_cubic(fy))));
  }
  return out;
}

}  // namespace hyperlin::graphs
