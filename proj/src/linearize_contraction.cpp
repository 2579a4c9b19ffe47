#include "hyperlin/linearize_contraction.hpp"

#include "hyperlin/error.hpp"
#include "hyperlin/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hyperlin::contraction {

namespace {

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double inf_norm(const Mat& m) { return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }

Vec assemble(int n, const IndexSet& a, const Vec& xa, const IndexSet& b, const Vec& xb) {
  Vec x = Vec::Zero(n);
  scatter(x, a, xa);
  scatter(x, b, xb);
  return x;
}

std::string stage_context(int band, const std::string& what) {
  return "band " + std::to_string(band + 1) + ": " + what;
}

}  // namespace

int default_resolution(int n) {
  switch (n) {
    case 1: return 257;
    case 2: return 65;
    case 3: return 33;
    default: return 17;
  }
}

int default_graph_refine(int w_dim) {
  switch (w_dim) {
    case 1: return 64;
    case 2: return 4;
    default: return 1;
  }
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return {0.0, 0.0};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double r2 = (sxx > 0.0 && syy > 0.0) ? sxy * sxy / (sxx * syy) : 1.0;
  return {slope, r2};
}

ContractionResult linearize_contraction(const dynamics::MapPtr& map, const spectral::SpectrumDecomposition& dec,
                                        const ContractionParams& params) {
  if (!dec.contraction()) throw Error(ErrorCode::InvalidArgument, "linearize_contraction needs a contracting spectrum");
  const auto band_check = spectral::check_band_condition(dec);
  if (!band_check.holds) throw Error(ErrorCode::BandConditionViolated, "band condition fails for the contraction");
  const int n = map->dim();
  const int m = dec.m();

  ContractionResult out;
  out.linear = spectral::make_linear_part(map->linear(), dec);
  const auto& lp = out.linear;
  out.band_map = lp.identity_basis() ? map : std::make_shared<dynamics::BasisChangedMap>(map, lp.basis, lp.basis_inv);
  const dynamics::Map& G = *out.band_map;
  const Mat lam = G.linear();
  const auto margins = spectral::default_margins(dec);
  const int res = params.resolution > 0 ? params.resolution : default_resolution(n);
  out.box = Box::centered(n, params.half_width);

  std::vector<transform::TransformPtr> done;  // Phi_{m-1}, ..., Phi_{l+1} in application order
  for (int b = m - 1; b >= 0; --b) {
    StageReport st;
    st.band = b;
    st.v = lp.band_indices[b];
    st.u = lp.bands_range(0, b);
    st.w = lp.bands_range(b + 1, m);
    st.B = gather(lam, st.v, st.v);
    const Mat B_inv = st.B.inverse();
    st.eta = margins.mu_plus[m - 1] * margins.mu_plus[b] / margins.mu_minus[b];
    if (!(st.eta < 1.0)) {
      std::ostringstream os;
      os << "eta = " << st.eta << " >= 1";
      throw Error(ErrorCode::BandConditionViolated, stage_context(b, os.str()));
    }
    st.kmax = params.kmax > 0 ? params.kmax : static_cast<int>(std::ceil(std::log(params.tol) / std::log(st.eta))) + 8;
    auto pre = std::make_shared<transform::Chain>(n, done, "pre_band_" + std::to_string(b + 1));
    st.pre = pre;
    const IndexSet uv = concat(st.u, st.v);

    GridFunction graph;
    if (!st.w.empty()) {
      const Mat C = gather(lam, st.w, st.w);
      const IndexSet w_idx = st.w;
      auto stage = std::make_shared<dynamics::FunctionMap>(
          lam,
          [&G, pre, w_idx, C](const Vec& x) {
            Vec y = G.eval(pre->inverse(x));
            scatter(y, w_idx, Vec(C * gather(x, w_idx)));
            return y;
          },
          nullptr, dynamics::unbounded_box(n));
      const int refine = params.graph_refine > 0 ? params.graph_refine : default_graph_refine(static_cast<int>(st.w.size()));
      const std::vector<int> gres(st.w.size(), refine * (res - 1) + 1);
      try {
        auto gr = graphs::slow_graph(*stage, uv, st.w, Box::centered(static_cast<int>(st.w.size()), params.half_width),
                                     gres, params.graph);
        st.graph_iterations = gr.iterations;
        st.graph_residual = gr.residual;
        st.jet_closure = gr.jet_closure;
        graph = gr.g;
      } catch (const Error& e) {
        throw Error(e.code(), stage_context(b, e.what()));
      }
      st.theta = std::make_shared<transform::ShearTransform>(n, uv, st.w, graph, "theta_band_" + std::to_string(b + 1));
    }

    // Psi at every node from the two orbits through y = pre^{-1}(x) and the
    // graph point with the same w.
    st.psi = GridFunction(out.box, std::vector<int>(n, res), static_cast<int>(st.v.size()));
    const long nodes = st.psi.node_count();
    std::vector<Vec> ys(nodes), yhs(nodes), vals(nodes);
    for (long i = 0; i < nodes; ++i) {
      const Vec x = st.psi.node(i);
      ys[i] = pre->inverse(x);
      if (st.w.empty()) {
        yhs[i] = Vec::Zero(n);
      } else {
        const Vec xw = gather(x, st.w);
        yhs[i] = pre->inverse(assemble(n, uv, graph.eval_cubic(xw), st.w, xw));
      }
      vals[i] = gather(ys[i], st.v) - gather(yhs[i], st.v);
    }
    Mat binv_k = Mat::Identity(st.v.size(), st.v.size());
    bool converged = false;
    // Round-off in the faster coordinates is amplified by B^{-k}; once the
    // differences rise for a few steps the best iterate is kept.
    std::vector<Vec> best = vals;
    double best_diff = INFINITY;
    int rising = 0;
    for (int k = 1; k <= st.kmax; ++k) {
      binv_k = B_inv * binv_k;
      double diff = 0.0;
      for (long i = 0; i < nodes; ++i) {
        ys[i] = G.eval(ys[i]);
        yhs[i] = G.eval(yhs[i]);
        const Vec val = binv_k * (gather(ys[i], st.v) - gather(yhs[i], st.v));
        diff = std::max(diff, max_abs(Vec(val - vals[i])));
        vals[i] = val;
      }
      st.diffs.push_back(diff);
      st.iterations = k;
      if (diff < params.tol) {
        converged = true;
        break;
      }
      if (diff < best_diff) {
        best_diff = diff;
        best = vals;
        st.best_iteration = k;
        rising = 0;
      } else if (++rising == 3) {
        st.stalled = true;
        vals = std::move(best);
        converged = best_diff < params.stall_tol;
        break;
      }
    }
    st.floor = st.stalled ? best_diff : st.diffs.empty() ? 0.0 : st.diffs.back();
    for (long i = 0; i < nodes; ++i) st.psi.set_value(i, vals[i]);

    std::vector<double> ks, ls;
    const std::size_t fit_end = st.stalled ? static_cast<std::size_t>(st.best_iteration) : st.diffs.size();
    for (std::size_t k = 0; k < fit_end; ++k)
      if (st.diffs[k] >= 10.0 * params.tol) {
        ks.push_back(static_cast<double>(k + 1));
        ls.push_back(std::log(st.diffs[k]));
      }
    if (ks.size() < 3) {
      st.exact = true;
    } else {
      const auto [slope, r2] = fit_line(ks, ls);
      st.decay_rate = std::exp(slope);
      st.decay_r2 = r2;
    }
    if (!st.exact && st.decay_rate > params.slow_factor * st.eta) {
      std::ostringstream os;
      os << "Psi differences decay at rate " << st.decay_rate << " > " << params.slow_factor << " * eta = "
         << params.slow_factor * st.eta;
      throw Error(ErrorCode::SlowDecay, stage_context(b, os.str()));
    }
    if (!converged) {
      std::ostringstream os;
      if (st.stalled)
        os << "Psi differences stalled at " << best_diff << " (iteration " << st.best_iteration << ") above "
           << params.stall_tol;
      else
        os << "Psi differences still " << st.diffs.back() << " after kmax = " << st.kmax;
      throw Error(ErrorCode::NoConvergence, stage_context(b, os.str()));
    }

    auto phi = std::make_shared<transform::ReplaceTransform>(
        n, std::vector<transform::ReplaceTransform::Block>{{st.v, st.psi}}, "phi_band_" + std::to_string(b + 1));

    // v-component of the conjugated stage is linear.
    Box half = Box::centered(n, 0.5 * params.half_width);
    for (const auto& x : verify::sample_box(half, params.residual_samples, params.seed + static_cast<unsigned>(b))) {
      const Vec fx = pre->forward(G.eval(pre->inverse(x)));
      st.v_linearity =
          std::max(st.v_linearity, max_abs(Vec(st.psi.eval_cubic(fx) - st.B * st.psi.eval_cubic(x))));
    }

    done.push_back(phi);
    out.stages.push_back(std::move(st));
  }

  std::vector<transform::TransformPtr> members;
  if (!lp.identity_basis())
    members.push_back(std::make_shared<transform::LinearTransform>(lp.basis_inv, lp.basis, "to_band_coordinates"));
  members.insert(members.end(), done.begin(), done.end());
  if (!lp.identity_basis())
    members.push_back(std::make_shared<transform::LinearTransform>(lp.basis, lp.basis_inv, "from_band_coordinates"));
  out.chain = std::make_shared<transform::Chain>(n, members, "contraction");
  return out;
}

GrowthReport growth_bound_diagnostics(const ContractionResult& result, const spectral::SpectrumDecomposition& dec,
                                      int stage, int samples, int kmax, unsigned seed, double floor) {
  if (stage < 0 || stage >= static_cast<int>(result.stages.size()))
    throw Error(ErrorCode::InvalidArgument, "growth_bound_diagnostics: no such stage");
  const StageReport& st = result.stages[stage];
  const int n = result.band_map->dim();
  const auto margins = spectral::default_margins(dec);
  GrowthReport rep;
  rep.log_mu_l_plus = std::log(margins.mu_plus[st.band]);
  rep.log_mu_m_plus = std::log(margins.mu_plus[dec.m() - 1]);

  std::vector<transform::TransformPtr> parts{st.pre};
  if (st.theta) parts.push_back(st.theta);
  auto t = std::make_shared<transform::Chain>(n, parts, "straighten");
  transform::ConjugatedMap ft(result.band_map, t, result.band_map->linear());
  const IndexSet uv = concat(st.u, st.v);

  std::vector<double> q(kmax + 1, 0.0), c1(kmax + 1, 0.0), b1(kmax + 1, 0.0);
  Box half = Box::centered(n, 0.5 * result.box.half_width(0));
  for (Vec x : verify::sample_box(half, samples, seed)) {
    Mat jac = Mat::Identity(n, n);
    for (int k = 1; k <= kmax; ++k) {
      jac = ft.jacobian(x) * jac;
      x = ft.eval(x);
      q[k] = std::max(q[k], inf_norm(gather(jac, uv, uv)));
      const Mat d = ft.jacobian(x);
      if (!st.w.empty()) c1[k] = std::max(c1[k], inf_norm(gather(d, st.v, st.w)));
      b1[k] = std::max(b1[k], inf_norm(Mat(gather(d, st.v, st.v) - st.B)));
    }
  }
  auto fit = [&](const std::vector<double>& vals) {
    std::vector<double> ks, ls;
    for (int k = 1; k <= kmax; ++k)
      if (vals[k] > floor) {
        ks.push_back(k);
        ls.push_back(std::log(vals[k]));
      }
    GrowthFit g;
    g.points = static_cast<int>(ks.size());
    if (g.points >= 3) {
      const auto [slope, r2] = fit_line(ks, ls);
      g.rate = slope;
      g.r2 = r2;
    }
    return g;
  };
  rep.q = fit(q);
  rep.c1 = fit(c1);
  rep.b1 = fit(b1);
  return rep;
}

}  // namespace hyperlin::contraction
