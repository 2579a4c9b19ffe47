#pragma once

#include "hyperlin/spectral.hpp"

#include <vector>

namespace hyperlin::exponents {

using spectral::Band;
using spectral::SpectrumDecomposition;

// Series exponent: alpha if rho*tau2 < 1, alpha - eps on the boundary, and
// alpha (log tau1 + log rho) / (log tau1 - log tau2) beyond it. Needs rho*tau1 < 1.
double lemma4_beta(double alpha, double tau1, double tau2, double rho, double eps);

double beta_s(const SpectrumDecomposition& dec, double eps);
double beta_u(const SpectrumDecomposition& dec, double eps);

struct Recursion {
  std::vector<double> beta;  // one per band, in band order
  std::vector<double> zeta;  // between neighbouring bands (size m - 1), in band order
};

// Contracting bands in ascending order; the recursion starts at the top band with beta = 1.
Recursion beta_contraction(const std::vector<Band>& bands, double eps);
// Expanding bands in ascending order; the recursion starts at the lowest band with beta = 1.
Recursion beta_expansion(const std::vector<Band>& bands, double eps);

double beta_planar(double lambda1, double lambda2, double eps);

struct ExponentReport {
  double epsilon = 0.0;
  Recursion contraction;
  Recursion expansion;
  double beta_s = 1.0;
  double beta_u = 1.0;
  double beta_1 = 1.0;  // lowest contracting band
  double beta_m = 1.0;  // highest expanding band
  double beta_overall = 1.0;
};

// Validates the band and gap conditions (with delta -> 0) and assembles the
// minimum of the constituents present in the spectrum.
ExponentReport beta_overall(const SpectrumDecomposition& dec, double eps);

}  // namespace hyperlin::exponents
