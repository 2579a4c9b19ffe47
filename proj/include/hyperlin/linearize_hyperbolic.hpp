#pragma once

#include "hyperlin/dynamics.hpp"
#include "hyperlin/invariant_graph.hpp"
#include "hyperlin/linearize_contraction.hpp"
#include "hyperlin/lp_foliation.hpp"
#include "hyperlin/spectral.hpp"
#include "hyperlin/transform.hpp"

#include <memory>
#include <optional>
#include <string>

namespace hyperlin::hyperbolic {

struct HyperbolicParams {
  double r0 = 0.02;  // cutoff radii; results are reported inside r0 / 4
  double r1 = 0.06;
  double eta_target = 1.0;
  int graph_resolution = 513;  // manifold graph nodes per axis
  graphs::GraphSettings graph;
  int fol_x_res = 33;
  int fol_y_res = 3;
  lp::LPParameters lp;
  contraction::ContractionParams factor;  // half_width is replaced by r0 / 2
  int residual_samples = 400;
  unsigned seed = 1;
};

struct HyperbolicResult {
  spectral::LinearPart linear;
  dynamics::MapPtr band_map;     // G
  dynamics::MapPtr straightened; // Theta2 Theta1 G (Theta2 Theta1)^{-1}
  dynamics::MapPtr modified;     // bump-modified straightened map
  double eta = 0.0;
  double eta_inf = 0.0;
  graphs::GraphResult g_u;       // unstable graph of G
  graphs::GraphResult g_s;       // stable graph after the first shear
  double axis_residual = 0.0;    // both axes invariant after straightening
  transform::TransformPtr theta1, theta2;  // null when the graph vanishes
  lp::FoliationResult stable, unstable;
  std::shared_ptr<const transform::ReplaceTransform> psi;
  dynamics::MapPtr f_minus, f_plus;
  double decoupling_residual = 0.0;
  contraction::ContractionResult minus;  // linearizes F_-
  contraction::ContractionResult plus;   // linearizes F_+^{-1}, hence F_+
  std::shared_ptr<const transform::Chain> chain;
  Box report_box;
};

HyperbolicResult linearize_hyperbolic(const dynamics::MapPtr& map, const spectral::SpectrumDecomposition& dec,
                                      const HyperbolicParams& params = {});

struct LinearizeParams {
  contraction::ContractionParams contraction;
  HyperbolicParams hyperbolic;
};

struct Linearization {
  std::string kind;  // contraction, expansion or hyperbolic
  std::shared_ptr<const transform::Chain> chain;
  Box report_box;
  std::optional<contraction::ContractionResult> factor;  // contraction and expansion
  std::optional<HyperbolicResult> full;                  // mixed spectra
};

// Contractions go straight to the cascade, expansions through their inverse.
Linearization linearize(const dynamics::MapPtr& map, const spectral::SpectrumDecomposition& dec,
                        const LinearizeParams& params = {});

// Bands of the inverse map: moduli inverted, order reversed.
spectral::SpectrumDecomposition inverse_decomposition(const spectral::SpectrumDecomposition& dec);
// Contracting (or expanding) bands alone.
spectral::SpectrumDecomposition stable_part(const spectral::SpectrumDecomposition& dec);
spectral::SpectrumDecomposition unstable_part(const spectral::SpectrumDecomposition& dec);

}  // namespace hyperlin::hyperbolic
