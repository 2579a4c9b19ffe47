#include "hyperlin/spectral.hpp"

#include "hyperlin/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

namespace hyperlin::spectral {

namespace {

void validate_hyperbolic(const std::vector<Band>& bands, double tol) {
  for (const auto& b : bands) {
    if (!(b.lo > 0.0) || b.hi < b.lo) throw Error(ErrorCode::InvalidArgument, "band must satisfy 0 < lo <= hi");
    if (b.lo <= 1.0 + tol && b.hi >= 1.0 - tol) {
      std::ostringstream os;
      os << "band [" << b.lo << ", " << b.hi << "] touches the unit circle";
      throw Error(ErrorCode::NonHyperbolic, os.str());
    }
  }
}

int count_contracting(const std::vector<Band>& bands) {
  int d = 0;
  for (const auto& b : bands)
    if (b.hi < 1.0) ++d;
  return d;
}

}  // namespace

SpectrumDecomposition cluster_moduli(std::vector<double> moduli, double gap_threshold, double hyperbolicity_tol) {
  if (moduli.empty()) throw Error(ErrorCode::EmptySpectrum, "no eigenvalues");
  std::sort(moduli.begin(), moduli.end());
  for (double r : moduli) {
    if (std::fabs(r - 1.0) < hyperbolicity_tol) {
      std::ostringstream os;
      os << "eigenvalue modulus " << r << " lies on the unit circle";
      throw Error(ErrorCode::NonHyperbolic, os.str());
    }
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "moduli must be positive (map must be invertible)");
  }
  SpectrumDecomposition dec;
  Band current{moduli.front(), moduli.front()};
  for (std::size_t i = 1; i < moduli.size(); ++i) {
    const double r = moduli[i];
    const bool crosses = (current.hi < 1.0) != (r < 1.0);
    if (crosses || r / current.hi > 1.0 + gap_threshold) {
      dec.bands.push_back(current);
      current = Band{r, r};
    } else {
      current.hi = r;
    }
  }
  dec.bands.push_back(current);
  dec.d = count_contracting(dec.bands);
  return dec;
}

SpectrumDecomposition from_bands(const std::vector<Band>& bands, double hyperbolicity_tol) {
  if (bands.empty()) throw Error(ErrorCode::EmptySpectrum, "no bands");
  validate_hyperbolic(bands, hyperbolicity_tol);
  for (std::size_t i = 1; i < bands.size(); ++i)
    if (!(bands[i].lo > bands[i - 1].hi))
      throw Error(ErrorCode::InvalidArgument, "bands must be ordered and disjoint");
  SpectrumDecomposition dec;
  dec.bands = bands;
  dec.d = count_contracting(bands);
  return dec;
}

std::vector<double> eigenvalue_moduli(const Mat& lambda) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(lambda), false);
  std::vector<double> out;
  for (int i = 0; i < lambda.rows(); ++i) out.push_back(std::abs(es.eigenvalues()[i]));
  return out;
}

double min_spectral_gap(const SpectrumDecomposition& dec) {
  double gap = dec.bands.front().lo;
  for (int i = 0; i + 1 < dec.m(); ++i) gap = std::min(gap, dec.bands[i + 1].lo - dec.bands[i].hi);
  if (dec.d > 0) gap = std::min(gap, 1.0 - dec.bands[dec.d - 1].hi);
  if (dec.d < dec.m()) gap = std::min(gap, dec.bands[dec.d].lo - 1.0);
  return gap;
}

Margins make_margins(const SpectrumDecomposition& dec, double delta) {
  if (delta < 0.0) throw Error(ErrorCode::InvalidArgument, "delta must be non-negative");
  if (delta >= 0.5 * min_spectral_gap(dec))
    throw Error(ErrorCode::InvalidArgument, "delta must stay below half the smallest spectral gap");
  Margins mg;
  mg.delta = delta;
  for (const auto& b : dec.bands) {
    mg.mu_minus.push_back(b.lo - delta);
    mg.mu_plus.push_back(b.hi + delta);
  }
  if (dec.d > 0) {
    mg.lambda_s_minus = dec.bands.front().lo - delta;
    mg.lambda_s_plus = dec.bands[dec.d - 1].hi + delta;
  }
  if (dec.d < dec.m()) {
    mg.lambda_u_minus = dec.bands[dec.d].lo - delta;
    mg.lambda_u_plus = dec.bands.back().hi + delta;
  }
  return mg;
}

Margins default_margins(const SpectrumDecomposition& dec) { return make_margins(dec, 1e-3 * min_spectral_gap(dec)); }

void ConditionReport::add(std::string label, double lhs, double rhs) {
  rows.push_back({std::move(label), lhs, rhs});
  if (!(lhs < rhs)) holds = false;
}

ConditionReport check_band_condition(const SpectrumDecomposition& dec) {
  ConditionReport r;
  r.name = "band";
  const int m = dec.m();
  if (dec.contraction()) {
    const double bound = 1.0 / dec.bands.back().hi;
    for (int i = 0; i < m; ++i)
      r.add("band " + std::to_string(i + 1) + " width ratio", dec.bands[i].hi / dec.bands[i].lo, bound);
    return r;
  }
  for (int i = 0; i < dec.d; ++i)
    r.add("band " + std::to_string(i + 1) + " width ratio", dec.bands[i].hi / dec.bands[i].lo,
          1.0 / dec.bands[dec.d - 1].hi);
  for (int j = dec.d; j < m; ++j)
    r.add("band " + std::to_string(j + 1) + " width ratio", dec.bands[j].hi / dec.bands[j].lo, dec.bands[dec.d].lo);
  return r;
}

ConditionReport check_gap_condition(const SpectrumDecomposition& dec, const Margins& mg) {
  if (!dec.mixed()) throw Error(ErrorCode::NotMixed, "gap condition needs both contracting and expanding bands");
  ConditionReport r;
  r.name = "gap";
  const double lhs = mg.lambda_u_minus / mg.lambda_s_plus;
  r.add("lambda_u^+ < lambda_u^- / lambda_s^+", mg.lambda_u_plus, lhs);
  r.add("1 / lambda_s^- < lambda_u^- / lambda_s^+", 1.0 / mg.lambda_s_minus, lhs);
  return r;
}

ConditionReport check_rs_condition(const SpectrumDecomposition& dec, const Margins& mg) {
  ConditionReport r = check_gap_condition(dec, mg);
  r.name = "rs";
  r.add("lambda_s^+ / lambda_s^- < 1 / lambda_s^+", mg.lambda_s_plus / mg.lambda_s_minus, 1.0 / mg.lambda_s_plus);
  r.add("lambda_u^+ / lambda_u^- < lambda_u^-", mg.lambda_u_plus / mg.lambda_u_minus, mg.lambda_u_minus);
  return r;
}

ConditionReport check_rs_condition(const SpectrumDecomposition& dec) {
  return check_rs_condition(dec, make_margins(dec, 0.0));
}

ConditionReport check_foliation_condition(const SpectrumDecomposition& dec, const Margins& mg) {
  if (!dec.mixed()) throw Error(ErrorCode::NotMixed, "foliation condition needs a mixed spectrum");
  ConditionReport r;
  r.name = "foliation";
  r.add("lambda_s^+ lambda_u^+ < lambda_u^-", mg.lambda_s_plus * mg.lambda_u_plus, mg.lambda_u_minus);
  return r;
}

AdaptedNorm::AdaptedNorm(Mat block, double target, int k) : a_(std::move(block)), target_(target), k_(k) {}

double AdaptedNorm::operator()(const Vec& x) const {
  double sum = 0.0;
  Vec y = x;
  double w = 1.0;
  for (int k = 0; k <= k_; ++k) {
    sum += w * y.norm();
    y = a_ * y;
    w /= target_;
  }
  return sum;
}

double AdaptedNorm::induced_norm_estimate(int samples, unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double best = 0.0;
  const int n = static_cast<int>(a_.rows());
  for (int s = 0; s < samples; ++s) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = g(rng);
    best = std::max(best, (*this)(a_ * x) / (*this)(x));
  }
  return best;
}

AdaptedNorm adapted_norm(const Mat& block, double target, int k_max) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(block), false);
  double radius = 0.0;
  for (int i = 0; i < block.rows(); ++i) radius = std::max(radius, std::abs(es.eigenvalues()[i]));
  if (!(radius < target)) {
    std::ostringstream os;
    os << "spectral radius " << radius << " is not below the target " << target;
    throw Error(ErrorCode::TargetTooTight, os.str());
  }
  Eigen::MatrixXd p = Eigen::MatrixXd(block);
  double scale = target;
  for (int k = 0; k <= k_max; ++k) {
    // p = A^{k+1}, scale = target^{k+1}
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(p).singularValues()(0);
    if (s <= scale) return AdaptedNorm(block, target, k);
    p = Eigen::MatrixXd(block) * p;
    scale *= target;
  }
  // Rough requirement: the transient ||A^k|| / target^k decays like (radius/target)^k.
  const int needed = static_cast<int>(std::ceil(std::log(1e3) / std::log(target / radius)));
  std::ostringstream os;
  os << "no K <= " << k_max << " gives an adapted norm; roughly K >= " << std::max(needed, k_max + 1)
     << " is required";
  throw Error(ErrorCode::KTooSmall, os.str());
}

bool LinearPart::identity_basis() const { return (basis - Mat::Identity(n(), n())).norm() == 0.0; }

IndexSet LinearPart::stable() const { return bands_range(0, d); }
IndexSet LinearPart::unstable() const { return bands_range(d, static_cast<int>(band_indices.size())); }

IndexSet LinearPart::bands_range(int first, int last) const {
  IndexSet out;
  for (int b = first; b < last; ++b) out.insert(out.end(), band_indices[b].begin(), band_indices[b].end());
  return out;
}

Mat LinearPart::band_block(int band) const { return gather(block, band_indices[band], band_indices[band]); }

LinearPart make_linear_part(const Mat& lambda, const SpectrumDecomposition& dec) {
  const int n = static_cast<int>(lambda.rows());
  if (lambda.cols() != n) throw Error(ErrorCode::InvalidArgument, "linear part must be square");
  using CMat = Eigen::MatrixXcd;
  Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(lambda), false);
  const auto ev = es.eigenvalues();

  auto band_of = [&](double r) {
    for (int b = 0; b < dec.m(); ++b) {
      const double tol = 1e-9 * std::max(1.0, dec.bands[b].hi);
      if (r >= dec.bands[b].lo - tol && r <= dec.bands[b].hi + tol) return b;
    }
    std::ostringstream os;
    os << "eigenvalue modulus " << r << " lies in no band";
    throw Error(ErrorCode::InvalidArgument, os.str());
  };
  std::vector<int> owner(n);
  for (int i = 0; i < n; ++i) owner[i] = band_of(std::abs(ev[i]));

  std::vector<Eigen::MatrixXd> bases(dec.m());
  std::vector<IndexSet> axis_sets(dec.m());
  bool axis_aligned = true;
  for (int b = 0; b < dec.m(); ++b) {
    CMat r = CMat::Identity(n, n);
    int rank = 0;
    for (int i = 0; i < n; ++i) {
      if (owner[i] == b) {
        ++rank;
        continue;
      }
      r = (Eigen::MatrixXd(lambda).cast<std::complex<double>>() - ev[i] * CMat::Identity(n, n)) * r;
    }
    if (rank == 0) throw Error(ErrorCode::InvalidArgument, "band without eigenvalues");
    Eigen::MatrixXd re = r.real();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(re);
    Eigen::MatrixXd q = qr.householderQ();
    bases[b] = q.leftCols(rank);
    const double tol = 1e-10 * bases[b].norm();
    for (int i = 0; i < n; ++i)
      if (bases[b].row(i).norm() > tol) axis_sets[b].push_back(i);
    if (static_cast<int>(axis_sets[b].size()) != rank) axis_aligned = false;
  }

  LinearPart lp;
  lp.lambda = lambda;
  lp.d = dec.d;
  if (axis_aligned) {
    lp.basis = Mat::Identity(n, n);
    lp.basis_inv = Mat::Identity(n, n);
    lp.band_indices = axis_sets;
  } else {
    lp.basis = Mat(n, n);
    int col = 0;
    for (int b = 0; b < dec.m(); ++b) {
      IndexSet idx;
      for (int c = 0; c < bases[b].cols(); ++c) {
        lp.basis.col(col) = bases[b].col(c);
        idx.push_back(col++);
      }
      lp.band_indices.push_back(idx);
    }
    lp.basis_inv = lp.basis.inverse();
  }
  lp.block = lp.basis_inv * lambda * lp.basis;
  const double bound = 1e-8 * std::max(1.0, lambda.norm());
  for (int b = 0; b < dec.m(); ++b) {
    const IndexSet others = complement(lp.band_indices[b], n);
    for (int i : lp.band_indices[b])
      for (int j : others) {
        if (std::fabs(lp.block(i, j)) > bound || std::fabs(lp.block(j, i)) > bound)
          throw Error(ErrorCode::InvalidArgument, "band subspaces are not invariant under the linear part");
        lp.block(i, j) = 0.0;
        lp.block(j, i) = 0.0;
      }
  }
  return lp;
}

}  // namespace hyperlin::spectral
