#include "hyperlin/lp_foliation.hpp"

#include "hyperlin/error.hpp"
#include "hyperlin/verify.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hyperlin::lp {

namespace {

double inf_norm(const Mat& m) { return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }
double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::pair<double, double> modulus_range(const Mat& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(m), false);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    lo = std::min(lo, std::abs(es.eigenvalues()[i]));
    hi = std::max(hi, std::abs(es.eigenvalues()[i]));
  }
  return {lo, hi};
}

Vec split_point(const Vec& z, int from, int count) { return z.segment(from, count); }

}  // namespace

Omega Omega::centered(int n, int c, double half_width, int x_res, int y_res) {
  Omega o;
  o.x_box = Box::centered(n, half_width);
  o.x_res.assign(n, x_res);
  o.y_box = Box::centered(c, half_width);
  o.y_res.assign(c, y_res);
  return o;
}

std::vector<int> Omega::resolution() const {
  std::vector<int> r = x_res;
  r.insert(r.end(), y_res.begin(), y_res.end());
  return r;
}

LPProblem::LPProblem(dynamics::MapPtr map, IndexSet contracting, IndexSet expanding, LPParameters params)
    : map_(std::move(map)), c_idx_(std::move(contracting)), e_idx_(std::move(expanding)), params_(params) {
  n_ = map_->dim();
  K_ = params_.K_tail;
  if (params_.N < 1 || K_ < params_.N) throw Error(ErrorCode::InvalidArgument, "need 1 <= N <= K_tail");
  if (c_idx_.empty() || e_idx_.empty() || static_cast<int>(c_idx_.size() + e_idx_.size()) != n_)
    throw Error(ErrorCode::NotMixed, "foliations need both contracting and expanding coordinates");
  const Mat& lam = map_->linear();
  if (inf_norm(gather(lam, c_idx_, e_idx_)) > 1e-12 * inf_norm(lam) ||
      inf_norm(gather(lam, e_idx_, c_idx_)) > 1e-12 * inf_norm(lam))
    throw Error(ErrorCode::InvalidArgument, "linear part must be block diagonal in the given index sets");
  lam_c_ = gather(lam, c_idx_, c_idx_);
  const Mat lam_e = gather(lam, e_idx_, e_idx_);
  lam_e_inv_ = lam_e.inverse();
  linear_radius_ = map_->linear_beyond();

  const double ls_plus = modulus_range(lam_c_).second;
  const auto [lu_minus, lu_plus] = modulus_range(lam_e);
  if (!(ls_plus < 1.0 && lu_minus > 1.0))
    throw Error(ErrorCode::InvalidArgument, "index sets do not split the spectrum at the unit circle");
  if (!(ls_plus * lu_plus < lu_minus))
    throw Error(ErrorCode::ConditionViolated, "no admissible weights: lambda_s^+ lambda_u^+ >= lambda_u^-");
  gamma1_ = params_.gamma1 > 0.0 ? params_.gamma1 : std::sqrt(ls_plus * std::min(1.0, lu_minus / lu_plus));
  gamma2_ = params_.gamma2 > 0.0 ? params_.gamma2 : std::sqrt(std::max(1.0, gamma1_ * lu_plus) * lu_minus);
  if (!(ls_plus < gamma1_ && gamma1_ < 1.0 && 1.0 < gamma2_ && gamma2_ < lu_minus && gamma1_ * lu_plus < gamma2_)) {
    std::ostringstream os;
    os << "weights gamma1 = " << gamma1_ << ", gamma2 = " << gamma2_ << " are not admissible";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }

  eta_inf_ = params_.eta_inf;
  if (!(eta_inf_ > 0.0)) {
    const double radius = std::isfinite(linear_radius_) ? linear_radius_ : 1.0;
    eta_inf_ = dynamics::sample_nonlinearity(*map_, radius).eta_inf;
  }
  const double ls = inf_norm(lam_c_);
  const double r = gamma1_ * inf_norm(lam_e_inv_);
  contraction_estimate_ = (ls < gamma1_ && r < 1.0)
                              ? eta_inf_ / gamma1_ * (1.0 / (1.0 - ls / gamma1_) + r / (1.0 - r))
                              : std::numeric_limits<double>::infinity();
  tail_bound_ = r < 1.0 ? std::pow(r, K_ + 1) / (1.0 - r) * eta_inf_ : std::numeric_limits<double>::infinity();
  if (!(tail_bound_ <= params_.tol / 10.0)) {
    std::ostringstream os;
    os << "tail bound " << tail_bound_ << " exceeds tol/10 = " << params_.tol / 10.0 << " for K_tail = " << K_;
    throw Error(ErrorCode::TailTooShort, os.str());
  }
}

Node LPProblem::make_node(const Vec& x, const Vec& y) const {
  Node nd;
  nd.x = x;
  nd.y = y;
  const Mat& lam = map_->linear();
  Vec xk = x;
  Mat jk = Mat::Identity(n_, n_);
  for (int k = 0; k <= K_; ++k) {
    nd.orbit.push_back(xk);
    nd.orbit_jac.push_back(jk);
    const bool lin = xk.norm() >= linear_radius_;
    nd.linear_at.push_back(lin);
    const Vec fx = lin ? Vec(lam * xk) : map_->eval(xk);
    const Mat dfx = lin ? lam : map_->jacobian(xk);
    nd.f_orbit.push_back(fx - lam * xk);
    nd.df_orbit.push_back(dfx - lam);
    jk = dfx * jk;
    xk = fx;
  }
  return nd;
}

Sequence LPProblem::zero_sequence() const { return Sequence(K_ + 1, Vec::Zero(n_)); }
MatSequence LPProblem::zero_mat_sequence() const { return MatSequence(K_ + 1, Mat::Zero(n_, n_ + c())); }

Sequence LPProblem::apply_T(const Node& nd, const Sequence& v) const {
  const Mat& lam = map_->linear();
  std::vector<Vec> df(K_ + 1);
  for (int k = 0; k <= K_; ++k) {
    const Vec z = nd.orbit[k] + v[k];
    if (nd.linear_at[k] && z.norm() >= linear_radius_)
      df[k] = Vec::Zero(n_);
    else
      df[k] = (map_->eval(z) - lam * z) - nd.f_orbit[k];
  }
  Sequence out(K_ + 1, Vec::Zero(n_));
  Vec s = nd.y - gather(nd.x, c_idx_);
  scatter(out[0], c_idx_, s);
  for (int k = 0; k < K_; ++k) {
    s = lam_c_ * s + gather(df[k], c_idx_);
    scatter(out[k + 1], c_idx_, s);
  }
  Vec b = Vec::Zero(static_cast<int>(e_idx_.size()));
  for (int k = K_; k >= 0; --k) {
    b = lam_e_inv_ * (b - gather(df[k], e_idx_));
    scatter(out[k], e_idx_, b);
  }
  return out;
}

MatSequence LPProblem::apply_S(const Node& nd, const Sequence& v, const MatSequence& w) const {
  const Mat& lam = map_->linear();
  const int m = n_ + c();
  std::vector<Mat> ddf(K_ + 1);
  for (int k = 0; k <= K_; ++k) {
    const Vec z = nd.orbit[k] + v[k];
    Mat e = Mat::Zero(n_, m);
    e.leftCols(n_) = nd.orbit_jac[k];
    if (nd.linear_at[k] && z.norm() >= linear_radius_) {
      ddf[k] = Mat::Zero(n_, m);
    } else {
      const Mat dfz = map_->jacobian(z) - lam;
      ddf[k] = dfz * (w[k] + e) - nd.df_orbit[k] * e;
    }
  }
  MatSequence out(K_ + 1, Mat::Zero(n_, m));
  const int c_dim = c();
  Mat a = Mat::Zero(c_dim, m);
  for (int i = 0; i < c_dim; ++i) {
    a(i, c_idx_[i]) = -1.0;
    a(i, n_ + i) = 1.0;
  }
  auto put_rows = [](Mat& dst, const IndexSet& rows, const Mat& src) {
    for (std::size_t r = 0; r < rows.size(); ++r) dst.row(rows[r]) = src.row(static_cast<int>(r));
  };
  auto take_rows = [&](const Mat& src, const IndexSet& rows) {
    Mat o(static_cast<int>(rows.size()), m);
    for (std::size_t r = 0; r < rows.size(); ++r) o.row(static_cast<int>(r)) = src.row(rows[r]);
    return o;
  };
  put_rows(out[0], c_idx_, a);
  for (int k = 0; k < K_; ++k) {
    a = lam_c_ * a + take_rows(ddf[k], c_idx_);
    put_rows(out[k + 1], c_idx_, a);
  }
  Mat b = Mat::Zero(static_cast<int>(e_idx_.size()), m);
  for (int k = K_; k >= 0; --k) {
    b = lam_e_inv_ * (b - take_rows(ddf[k], e_idx_));
    put_rows(out[k], e_idx_, b);
  }
  return out;
}

double LPProblem::norm_v(const Sequence& a, const Sequence& b) const {
  double best = 0.0, w = 1.0;
  for (int k = 0; k <= K_; ++k, w /= gamma1_) best = std::max(best, w * inf_norm(Vec(a[k] - b[k])));
  return best;
}

double LPProblem::norm_w(const MatSequence& a, const MatSequence& b) const {
  double best = 0.0, w = 1.0;
  for (int k = 0; k <= K_; ++k, w /= gamma2_) best = std::max(best, w * inf_norm(Mat(a[k] - b[k])));
  return best;
}

LPProblem::NodeSolution LPProblem::solve_node(const Node& nd) const {
  NodeSolution sol;
  sol.v = zero_sequence();
  sol.w = zero_mat_sequence();
  for (int it = 0; it < params_.max_iter; ++it) {
    Sequence v = apply_T(nd, sol.v);
    MatSequence w = apply_S(nd, sol.v, sol.w);
    const double dv = norm_v(v, sol.v), dw = norm_w(w, sol.w);
    sol.delta_v.push_back(dv);
    sol.delta_w.push_back(dw);
    sol.v = std::move(v);
    sol.w = std::move(w);
    if (dv < params_.tol && dw < params_.tol) return sol;
  }
  std::ostringstream os;
  os << "Picard iteration did not reach tol " << params_.tol << " in " << params_.max_iter << " sweeps (last deltas "
     << sol.delta_v.back() << ", " << sol.delta_w.back() << ")";
  throw Error(ErrorCode::NoConvergence, os.str());
}

Vec FoliationResult::q0(const Vec& x, const Vec& y) const {
  Vec z(x.size() + y.size());
  z << x, y;
  return q.front().eval_extrapolated(z);
}

Mat FoliationResult::Dq0(const Vec& x, const Vec& y) const {
  Vec z(x.size() + y.size());
  z << x, y;
  const Vec flat = dq0.eval_extrapolated(z);
  const int n = static_cast<int>(x.size()), m = static_cast<int>(z.size());
  Mat d(n, m);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) d(r, c) = flat[r * m + c];
  return d;
}

Vec FoliationResult::leaf_point(const Vec& x, const Vec& y) const { return x + q0(x, y); }

FoliationResult solve_foliation(const LPProblem& pb, const Omega& omega) {
  const int n = pb.n(), c = pb.c(), m = n + c;
  if (omega.x_box.dim() != n || omega.y_box.dim() != c) throw Error(ErrorCode::InvalidArgument, "Omega shape mismatch");
  const Box box = omega.box();
  const std::vector<int> res = omega.resolution();
  FoliationResult out;
  out.contracting = pb.contracting();
  out.expanding = pb.expanding();
  out.omega = omega;
  out.gamma1 = pb.gamma1();
  out.gamma2 = pb.gamma2();
  out.eta_inf = pb.eta_inf();
  out.contraction_estimate = pb.contraction_estimate();
  out.tail_bound = pb.tail_bound();
  out.h = GridFunction(box, res, static_cast<int>(pb.expanding().size()));
  out.dq0 = GridFunction(box, res, n * m);
  for (int k = 0; k <= pb.params().N; ++k) out.q.emplace_back(box, res, n);

  std::vector<double> dv_max, dw_max;
  for (long i = 0; i < out.h.node_count(); ++i) {
    const Vec z = out.h.node(i);
    const Node nd = pb.make_node(split_point(z, 0, n), split_point(z, n, c));
    const auto sol = pb.solve_node(nd);
    if (sol.delta_v.size() > dv_max.size()) {
      dv_max.resize(sol.delta_v.size(), 0.0);
      dw_max.resize(sol.delta_w.size(), 0.0);
    }
    for (std::size_t k = 0; k < sol.delta_v.size(); ++k) {
      dv_max[k] = std::max(dv_max[k], sol.delta_v[k]);
      dw_max[k] = std::max(dw_max[k], sol.delta_w[k]);
    }
    for (int k = 0; k <= pb.params().N; ++k) out.q[k].set_value(i, sol.v[k]);
    out.h.set_value(i, gather(Vec(nd.x + sol.v[0]), pb.expanding()));
    Vec flat(n * m);
    for (int r = 0; r < n; ++r)
      for (int col = 0; col < m; ++col) flat[r * m + col] = sol.w[0](r, col);
    out.dq0.set_value(i, flat);

    // Residual of one more sweep at the fixed point.
    const Sequence tv = pb.apply_T(nd, sol.v);
    const MatSequence sw = pb.apply_S(nd, sol.v, sol.w);
    out.fixed_point_residual_v = std::max(out.fixed_point_residual_v, pb.norm_v(tv, sol.v));
    out.fixed_point_residual_w = std::max(out.fixed_point_residual_w, pb.norm_w(sw, sol.w));
  }
  out.iterations = static_cast<int>(dv_max.size());
  const double floor = 100.0 * pb.params().tol;
  for (std::size_t k = 0; k < dv_max.size(); ++k) {
    IterationLog row;
    row.iteration = static_cast<int>(k) + 1;
    row.delta_v = dv_max[k];
    row.delta_w = dw_max[k];
    row.ratio_v = (k > 0 && dv_max[k - 1] > 0.0) ? dv_max[k] / dv_max[k - 1] : 0.0;
    if (k > 0 && dv_max[k - 1] > floor) out.measured_contraction = std::max(out.measured_contraction, row.ratio_v);
    out.log.push_back(row);
  }
  if (out.measured_contraction >= 1.0) {
    std::ostringstream os;
    os << "measured contraction " << out.measured_contraction << " >= 1 (a-priori estimate "
       << out.contraction_estimate << ", eta " << out.eta_inf << ")";
    throw Error(ErrorCode::EtaTooLarge, os.str());
  }

  // w_0 against finite differences of pointwise re-solves at a few nodes.
  const long probes = std::min<long>(6, out.h.node_count());
  const double step = pb.params().derivative_step;
  for (long p = 0; p < probes; ++p) {
    const long i = (2 * p + 1) * out.h.node_count() / (2 * probes);
    const Vec z = out.h.node(i);
    const Mat w0 = out.Dq0(z.head(n), z.tail(c));
    for (int j = 0; j < m; ++j) {
      Vec zp = z, zm = z;
      zp[j] += step;
      zm[j] -= step;
      const Vec vp = pb.solve_node(pb.make_node(zp.head(n), zp.tail(c))).v[0];
      const Vec vm = pb.solve_node(pb.make_node(zm.head(n), zm.tail(c))).v[0];
      const Vec fd = (vp - vm) / (2.0 * step);
      out.derivative_mismatch = std::max(out.derivative_mismatch, inf_norm(Vec(fd - w0.col(j))));
    }
  }
  if (out.derivative_mismatch > pb.params().derivative_tol) {
    std::ostringstream os;
    os << "w_0 differs from the finite-difference derivative of q_0 by " << out.derivative_mismatch;
    throw Error(ErrorCode::DerivativeMismatch, os.str());
  }
  return out;
}

FoliationResult stable_foliation(const dynamics::MapPtr& map, const IndexSet& stable, const IndexSet& unstable,
                                 const LPParameters& params, const Omega& omega) {
  return solve_foliation(LPProblem(map, stable, unstable, params), omega);
}

FoliationResult unstable_foliation(const dynamics::MapPtr& map, const IndexSet& stable, const IndexSet& unstable,
                                   const LPParameters& params, const Omega& omega) {
  auto inv = std::make_shared<dynamics::InverseMap>(map);
  try {
    return solve_foliation(LPProblem(inv, unstable, stable, params), omega);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NewtonFailed) throw Error(ErrorCode::InverseNewtonFailed, e.what());
    throw;
  }
}

double verify_lp_equivalence(const dynamics::Map& map, const FoliationResult& fol,
                             const std::vector<Vec>& xy_samples) {
  const int n = map.dim();
  double worst = 0.0;
  for (const auto& z : xy_samples) {
    const Vec x = z.head(n);
    const Vec y = z.tail(z.size() - n);
    Vec a = x + fol.q0(x, y);
    Vec b = x;
    for (std::size_t k = 0; k < fol.q.size(); ++k) {
      if (k > 0) {
        a = map.eval(a);
        b = map.eval(b);
      }
      const Vec qk = fol.q[k].eval_extrapolated(z);
      worst = std::max(worst, inf_norm(Vec(a - b - qk)));
    }
  }
  return worst;
}

FoliationProperties foliation_properties(const dynamics::Map& map, const FoliationResult& fol, int samples,
                                         unsigned seed) {
  const int n = map.dim();
  const int c = static_cast<int>(fol.contracting.size());
  FoliationProperties out;
  const GridFunction& q0 = fol.q.front();
  for (long i = 0; i < q0.node_count(); ++i) {
    const Vec z = q0.node(i);
    const Vec x = z.head(n), y = z.tail(c);
    out.b1 = std::max(out.b1, inf_norm(Vec(gather(Vec(x + q0.value(i)), fol.contracting) - y)));
  }
  // B2 on the x-nodes, with y = pi_C x interpolated between y-nodes.
  GridFunction xs(fol.omega.x_box, fol.omega.x_res, 1);
  for (long i = 0; i < xs.node_count(); ++i) {
    const Vec x = xs.node(i);
    const Vec y = gather(x, fol.contracting);
    if (!fol.omega.y_box.contains(y, 1e-12)) continue;
    Vec z(n + c);
    z << x, y;
    out.b2 = std::max(out.b2, inf_norm(Vec(fol.h.eval(z) - gather(x, fol.expanding))));
  }
  out.b4 = verify::foliation_invariance(map, fol, samples, seed);
  return out;
}

DqHolder holder_check_Dq0(const FoliationResult& fol, double predicted_beta, unsigned seed) {
  const int n = fol.omega.x_box.dim(), c = fol.omega.y_box.dim();
  const Box box = fol.omega.box();
  double radius = std::numeric_limits<double>::infinity();
  for (int a = 0; a < box.dim(); ++a) radius = std::min(radius, box.half_width(a));
  auto field = [&](const Vec& z) { return fol.dq0.eval(z); };
  const auto est = verify::holder_exponent(field, Vec::Zero(n + c), 0.5 * radius, {}, seed);
  DqHolder out;
  out.exponent = est.exponent;
  out.constant = est.constant;
  out.predicted = predicted_beta;
  return out;
}

}  // namespace hyperlin::lp
