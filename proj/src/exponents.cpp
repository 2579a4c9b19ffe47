#include "hyperlin/exponents.hpp"

#include "hyperlin/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hyperlin::exponents {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << what << " evaluates to " << v << "; the condition slack is too small for this epsilon";
    throw Error(ErrorCode::NonpositiveExponent, os.str());
  }
}

std::vector<Band> contracting(const SpectrumDecomposition& dec) {
  return {dec.bands.begin(), dec.bands.begin() + dec.d};
}

std::vector<Band> expanding(const SpectrumDecomposition& dec) {
  return {dec.bands.begin() + dec.d, dec.bands.end()};
}

void require_foliation(const SpectrumDecomposition& dec) {
  const auto r = spectral::check_foliation_condition(dec, spectral::make_margins(dec, 0.0));
  if (!r.holds) throw Error(ErrorCode::ConditionViolated, "lambda_d^+ lambda_m^+ < lambda_{d+1}^- fails");
}

}  // namespace

double lemma4_beta(double alpha, double tau1, double tau2, double rho, double eps) {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(tau1 > 0.0) || !(tau2 > 0.0) || !(rho > 0.0))
    throw Error(ErrorCode::InvalidArgument, "lemma4_beta needs alpha in (0,1] and positive tau1, tau2, rho");
  if (!(rho * tau1 < 1.0)) throw Error(ErrorCode::HypothesisViolated, "rho * tau1 must be below 1");
  const double p = rho * tau2;
  if (std::fabs(p - 1.0) <= 1e-12) return alpha - eps;
  if (p < 1.0) return alpha;
  const double b = (std::log(tau1) + std::log(rho)) / (std::log(tau1) - std::log(tau2)) * alpha;
  if (!(b > 0.0)) throw Error(ErrorCode::NonpositiveResult, "series exponent is not positive");
  return b;
}

double beta_s(const SpectrumDecomposition& dec, double eps) {
  if (!dec.mixed()) throw Error(ErrorCode::NotMixed, "beta_s needs a mixed spectrum");
  require_foliation(dec);
  const double ld = std::log(dec.bands[dec.d - 1].hi);
  const double lm = std::log(dec.bands.back().hi);
  const double lu = std::log(dec.bands[dec.d].lo);
  const double b = (ld + lm - lu) / (ld - lm) - eps;
  require_positive(b, "beta_s");
  return b;
}

double beta_u(const SpectrumDecomposition& dec, double eps) {
  if (!dec.mixed()) throw Error(ErrorCode::NotMixed, "beta_u needs a mixed spectrum");
  require_foliation(dec);
  const double lu = std::log(dec.bands[dec.d].lo);
  const double l1 = std::log(dec.bands.front().lo);
  const double ld = std::log(dec.bands[dec.d - 1].hi);
  const double b = (lu + l1 - ld) / (lu - l1) - eps;
  require_positive(b, "beta_u");
  return b;
}

Recursion beta_contraction(const std::vector<Band>& bands, double eps) {
  const int m = static_cast<int>(bands.size());
  if (m == 0) throw Error(ErrorCode::EmptySpectrum, "no contracting bands");
  Recursion r;
  r.beta.assign(m, 1.0);
  r.zeta.assign(std::max(m - 1, 0), 1.0);
  const double ltop = std::log(bands.back().hi);
  for (int l = m - 2; l >= 0; --l) {
    const double lp = std::log(bands[l].hi);
    const double lm = std::log(bands[l].lo);
    const double zeta = std::min(r.beta[l + 1], lp / std::log(bands[l + 1].lo) - 1.0 - eps);
    require_positive(zeta, "zeta");
    const double b = std::min(zeta - eps, (lp + ltop - lm) / (lp - zeta * ltop) * zeta - eps);
    require_positive(b, "beta");
    r.zeta[l] = zeta;
    r.beta[l] = b;
  }
  return r;
}

Recursion beta_expansion(const std::vector<Band>& bands, double eps) {
  const int m = static_cast<int>(bands.size());
  if (m == 0) throw Error(ErrorCode::EmptySpectrum, "no expanding bands");
  Recursion r;
  r.beta.assign(m, 1.0);
  r.zeta.assign(std::max(m - 1, 0), 1.0);
  const double lbase = std::log(bands.front().lo);
  for (int j = 1; j < m; ++j) {
    const double lm = std::log(bands[j].lo);
    const double lp = std::log(bands[j].hi);
    const double zeta = std::min(r.beta[j - 1], lm / std::log(bands[j - 1].hi) - 1.0 - eps);
    require_positive(zeta, "zeta");
    const double b = std::min(zeta - eps, (lm + lbase - lp) / (lm - zeta * lbase) * zeta - eps);
    require_positive(b, "beta");
    r.zeta[j - 1] = zeta;
    r.beta[j] = b;
  }
  return r;
}

double beta_planar(double lambda1, double lambda2, double eps) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0 && lambda2 > 1.0))
    throw Error(ErrorCode::InvalidArgument, "beta_planar needs 0 < lambda1 < 1 < lambda2");
  const double a = std::log(lambda1);
  const double b = std::log(lambda2);
  return std::min(a / (a - b) - eps, b / (b - a) - eps);
}

ExponentReport beta_overall(const SpectrumDecomposition& dec, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in [0, 1)");
  const auto band = spectral::check_band_condition(dec);
  if (!band.holds) throw Error(ErrorCode::BandConditionViolated, "band width condition fails");
  ExponentReport rep;
  rep.epsilon = eps;
  double beta = 1.0;
  if (dec.d > 0) {
    rep.contraction = beta_contraction(contracting(dec), eps);
    rep.beta_1 = rep.contraction.beta.front();
    beta = std::min(beta, rep.beta_1);
  }
  if (dec.d < dec.m()) {
    rep.expansion = beta_expansion(expanding(dec), eps);
    rep.beta_m = rep.expansion.beta.back();
    beta = std::min(beta, rep.beta_m);
  }
  if (dec.mixed()) {
    const auto gap = spectral::check_gap_condition(dec, spectral::make_margins(dec, 0.0));
    if (!gap.holds) throw Error(ErrorCode::ConditionViolated, "spectral gap condition fails");
    rep.beta_s = beta_s(dec, eps);
    rep.beta_u = beta_u(dec, eps);
    beta = std::min({beta, rep.beta_s, rep.beta_u});
  }
  rep.beta_overall = beta;
  return rep;
}

}  // namespace hyperlin::exponents
