#pragma once

#include "hyperlin/types.hpp"

#include <string>
#include <vector>

namespace hyperlin::spectral {

// Closed interval of eigenvalue moduli.
struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

// Bands ordered by modulus; the first d are contracting (< 1), the rest expanding.
struct SpectrumDecomposition {
  std::vector<Band> bands;
  int d = 0;

  int m() const { return static_cast<int>(bands.size()); }
  bool contraction() const { return d == m(); }
  bool expansion() const { return d == 0; }
  bool mixed() const { return d > 0 && d < m(); }
};

// Sorts the moduli and starts a new band whenever consecutive moduli differ by a
// ratio above 1 + gap_threshold, never letting a band straddle the unit circle.
SpectrumDecomposition cluster_moduli(std::vector<double> moduli, double gap_threshold = 0.2,
                                     double hyperbolicity_tol = 1e-9);

// Bands given directly as intervals; validates order, disjointness and hyperbolicity.
SpectrumDecomposition from_bands(const std::vector<Band>& bands, double hyperbolicity_tol = 1e-9);

std::vector<double> eigenvalue_moduli(const Mat& lambda);

struct Margins {
  double delta = 0.0;
  std::vector<double> mu_minus;
  std::vector<double> mu_plus;
  double lambda_s_minus = 0.0;
  double lambda_s_plus = 0.0;
  double lambda_u_minus = 0.0;
  double lambda_u_plus = 0.0;
};

// Smallest distance between neighbouring bands, between the bands next to the
// unit circle and 1, and between the lowest band and 0.
double min_spectral_gap(const SpectrumDecomposition& dec);
Margins make_margins(const SpectrumDecomposition& dec, double delta);
Margins default_margins(const SpectrumDecomposition& dec);

struct Inequality {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;  // holds when lhs < rhs
};

struct ConditionReport {
  std::string name;
  bool holds = true;
  std::vector<Inequality> rows;

  void add(std::string label, double lhs, double rhs);
};

// Per-band width condition: contraction-only spectra need
// lambda_i^+ / lambda_i^- < 1 / lambda_m^+; mixed spectra bound the contracting
// bands by 1 / lambda_d^+ and the expanding bands by lambda_{d+1}^-.
ConditionReport check_band_condition(const SpectrumDecomposition& dec);
// lambda_u^- / lambda_s^+ > max(lambda_u^+, 1 / lambda_s^-) on the envelopes.
ConditionReport check_gap_condition(const SpectrumDecomposition& dec, const Margins& margins);
// Gap condition plus the two envelope width bounds.
ConditionReport check_rs_condition(const SpectrumDecomposition& dec, const Margins& margins);
// Same with the raw band envelopes (delta = 0).
ConditionReport check_rs_condition(const SpectrumDecomposition& dec);
// lambda_s^+ lambda_u^+ < lambda_u^-.
ConditionReport check_foliation_condition(const SpectrumDecomposition& dec, const Margins& margins);

// ||x||_* = sum_{k=0}^{K} rho^{-k} ||A^k x||_2 with rho = target. The induced norm
// of A is then at most target, which holds exactly once ||A^{K+1}||_2 <= target^{K+1}.
class AdaptedNorm {
 public:
  AdaptedNorm(Mat block, double target, int k);
  double operator()(const Vec& x) const;
  double target() const { return target_; }
  int k() const { return k_; }
  // Largest ||A x||_* / ||x||_* over random unit directions.
  double induced_norm_estimate(int samples, unsigned seed) const;

 private:
  Mat a_;
  double target_;
  int k_;
};

AdaptedNorm adapted_norm(const Mat& block, double target, int k_max = 500);

// Real block diagonalisation of the linear part. Band coordinates z relate to
// the original coordinates by x = basis * z.
struct LinearPart {
  Mat lambda;
  Mat basis;
  Mat basis_inv;
  Mat block;
  std::vector<IndexSet> band_indices;
  int d = 0;

  int n() const { return static_cast<int>(lambda.rows()); }
  bool identity_basis() const;
  IndexSet stable() const;
  IndexSet unstable() const;
  IndexSet bands_range(int first, int last) const;  // union of bands [first, last)
  Mat band_block(int band) const;
};

LinearPart make_linear_part(const Mat& lambda, const SpectrumDecomposition& dec);

}  // namespace hyperlin::spectral
