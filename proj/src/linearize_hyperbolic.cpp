#include "hyperlin/linearize_hyperbolic.hpp"

#include "hyperlin/error.hpp"
#include "hyperlin/verify.hpp"

#include <algorithm>
#include <cmath>

namespace hyperlin::hyperbolic {

namespace {

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool vanishes(const GridFunction& g) {
  return std::all_of(g.values().begin(), g.values().end(), [](double v) { return v == 0.0; });
}

// Runs one phase and prefixes its errors with the phase name.
template <class F>
auto phase(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

spectral::SpectrumDecomposition inverse_decomposition(const spectral::SpectrumDecomposition& dec) {
  std::vector<spectral::Band> bands;
  for (auto it = dec.bands.rbegin(); it != dec.bands.rend(); ++it) bands.push_back({1.0 / it->hi, 1.0 / it->lo});
  return spectral::from_bands(bands);
}

spectral::SpectrumDecomposition stable_part(const spectral::SpectrumDecomposition& dec) {
  return spectral::from_bands({dec.bands.begin(), dec.bands.begin() + dec.d});
}

spectral::SpectrumDecomposition unstable_part(const spectral::SpectrumDecomposition& dec) {
  return spectral::from_bands({dec.bands.begin() + dec.d, dec.bands.end()});
}

HyperbolicResult linearize_hyperbolic(const dynamics::MapPtr& map, const spectral::SpectrumDecomposition& dec,
                                      const HyperbolicParams& params) {
  if (!dec.mixed()) throw Error(ErrorCode::NotMixed, "linearize_hyperbolic needs contracting and expanding bands");
  const auto rs = spectral::check_rs_condition(dec);
  if (!rs.holds) throw Error(ErrorCode::ConditionViolated, "gap condition fails");
  const int n = map->dim();

  HyperbolicResult out;
  out.linear = spectral::make_linear_part(map->linear(), dec);
  const auto& lp = out.linear;
  out.band_map = lp.identity_basis() ? map : std::make_shared<dynamics::BasisChangedMap>(map, lp.basis, lp.basis_inv);
  const Mat lam = out.band_map->linear();
  const IndexSet S = lp.stable(), U = lp.unstable();
  const int ns = static_cast<int>(S.size()), nu = static_cast<int>(U.size());

  // Manifold graphs on a box that holds the images of the cutoff ball.
  const double gbox = 1.25 * params.r1 * std::max(1.0, lam.norm());
  const auto inv = std::make_shared<dynamics::InverseMap>(out.band_map);
  out.g_u = phase("unstable manifold", [&] {
    return graphs::stable_graph(*inv, U, S, Box::centered(nu, gbox), std::vector<int>(nu, params.graph_resolution),
                                params.graph);
  });
  std::vector<transform::TransformPtr> shears;
  dynamics::MapPtr g1 = out.band_map;
  if (!vanishes(out.g_u.g)) {
    out.theta1 = std::make_shared<transform::ShearTransform>(n, S, U, out.g_u.g, "theta1");
    shears.push_back(out.theta1);
    g1 = std::make_shared<transform::ConjugatedMap>(out.band_map, out.theta1, lam);
  }
  out.g_s = phase("stable manifold", [&] {
    return graphs::stable_graph(*g1, S, U, Box::centered(ns, gbox), std::vector<int>(ns, params.graph_resolution),
                                params.graph);
  });
  if (!vanishes(out.g_s.g)) {
    out.theta2 = std::make_shared<transform::ShearTransform>(n, U, S, out.g_s.g, "theta2");
    shears.push_back(out.theta2);
  }
  out.straightened = shears.empty() ? out.band_map
                                    : std::make_shared<transform::ConjugatedMap>(
                                          out.band_map, std::make_shared<transform::Chain>(n, shears, "straighten"), lam);
  for (const auto& x : verify::sample_box(Box::centered(n, params.r0), params.residual_samples, params.seed)) {
    Vec xs = x, xu = x;
    scatter(xs, U, Vec::Zero(nu));
    scatter(xu, S, Vec::Zero(ns));
    out.axis_residual = std::max(out.axis_residual, max_abs(gather(out.straightened->eval(xs), U)));
    out.axis_residual = std::max(out.axis_residual, max_abs(gather(out.straightened->eval(xu), S)));
  }

  const auto mod = phase("cutoff", [&] { return dynamics::bump_modify(out.straightened, params.r0, params.r1, params.eta_target); });
  out.modified = mod.map;
  out.eta = mod.eta;
  out.eta_inf = mod.eta_inf;

  lp::LPParameters lpp = params.lp;
  if (!(lpp.eta_inf > 0.0)) lpp.eta_inf = mod.eta_inf;
  const double hw = 0.5 * params.r0;
  out.stable = phase("stable foliation", [&] {
    return lp::stable_foliation(out.modified, S, U, lpp, lp::Omega::centered(n, ns, hw, params.fol_x_res, params.fol_y_res));
  });
  out.unstable = phase("unstable foliation", [&] {
    return lp::unstable_foliation(out.modified, S, U, lpp,
                                  lp::Omega::centered(n, nu, hw, params.fol_x_res, params.fol_y_res));
  });

  // Leaf/axis intersections: the y = 0 slices of both foliations.
  const Box xbox = Box::centered(n, hw);
  const std::vector<int> xres(n, params.fol_x_res);
  auto slice = [&](const lp::FoliationResult& fol, int c) {
    return GridFunction::sample(xbox, xres, static_cast<int>(fol.expanding.size()), [&](const Vec& x) {
      Vec z(n + c);
      z << x, Vec::Zero(c);
      return fol.h.eval(z);
    });
  };
  out.psi = std::make_shared<transform::ReplaceTransform>(
      n, std::vector<transform::ReplaceTransform::Block>{{S, slice(out.unstable, nu)}, {U, slice(out.stable, ns)}}, "psi");

  out.f_minus = std::make_shared<dynamics::RestrictedMap>(out.modified, S);
  out.f_plus = std::make_shared<dynamics::RestrictedMap>(out.modified, U);
  out.report_box = Box::centered(n, 0.5 * hw);
  for (const auto& x : verify::sample_box(out.report_box, params.residual_samples, params.seed + 1)) {
    const Vec px = out.psi->forward(x);
    Vec rhs(n);
    scatter(rhs, S, out.f_minus->eval(gather(px, S)));
    scatter(rhs, U, out.f_plus->eval(gather(px, U)));
    out.decoupling_residual = std::max(out.decoupling_residual, max_abs(Vec(out.psi->forward(out.modified->eval(x)) - rhs)));
  }

  contraction::ContractionParams cp = params.factor;
  cp.half_width = hw;
  out.minus = phase("contracting factor", [&] { return contraction::linearize_contraction(out.f_minus, stable_part(dec), cp); });
  const auto f_plus_inv = std::make_shared<dynamics::InverseMap>(out.f_plus);
  out.plus = phase("expanding factor", [&] {
    return contraction::linearize_contraction(f_plus_inv, inverse_decomposition(unstable_part(dec)), cp);
  });

  auto block = std::make_shared<transform::BlockTransform>(
      n, std::vector<transform::BlockTransform::Part>{{S, out.minus.chain}, {U, out.plus.chain}}, "factors");
  std::vector<transform::TransformPtr> members;
  if (!lp.identity_basis())
    members.push_back(std::make_shared<transform::LinearTransform>(lp.basis_inv, lp.basis, "to_band_coordinates"));
  members.insert(members.end(), shears.begin(), shears.end());
  members.push_back(out.psi);
  members.push_back(block);
  if (!lp.identity_basis())
    members.push_back(std::make_shared<transform::LinearTransform>(lp.basis, lp.basis_inv, "from_band_coordinates"));
  out.chain = std::make_shared<transform::Chain>(n, members, "hyperbolic");
  return out;
}

Linearization linearize(const dynamics::MapPtr& map, const spectral::SpectrumDecomposition& dec,
                        const LinearizeParams& params) {
  Linearization out;
  const int n = map->dim();
  if (dec.contraction()) {
    out.kind = "contraction";
    out.factor = contraction::linearize_contraction(map, dec, params.contraction);
    out.chain = out.factor->chain;
    out.report_box = out.factor->box;
  } else if (dec.expansion()) {
    out.kind = "expansion";
    auto inv = std::make_shared<dynamics::InverseMap>(map);
    out.factor = contraction::linearize_contraction(inv, inverse_decomposition(dec), params.contraction);
    out.chain = out.factor->chain;
    out.report_box = Box::centered(n, params.contraction.half_width / std::max(1.0, map->linear().norm()));
  } else {
    out.kind = "hyperbolic";
    out.full = linearize_hyperbolic(map, dec, params.hyperbolic);
    out.chain = out.full->chain;
    out.report_box = out.full->report_box;
  }
  return out;
}

}  // namespace hyperlin::hyperbolic
