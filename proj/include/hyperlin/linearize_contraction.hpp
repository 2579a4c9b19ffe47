#pragma once

#include "hyperlin/dynamics.hpp"
#include "hyperlin/grid.hpp"
#include "hyperlin/invariant_graph.hpp"
#include "hyperlin/spectral.hpp"
#include "hyperlin/transform.hpp"
#include "hyperlin/types.hpp"

#include <memory>
#include <vector>

namespace hyperlin::contraction {

struct ContractionParams {
  double half_width = 0.01;  // the working box is [-hw, hw]^n in band coordinates
  int resolution = 0;        // nodes per axis of the Psi grids; 0 picks by dimension
  int graph_refine = 0;      // graph cells per Psi cell; 0 picks by |W|
  double tol = 1e-12;        // stop once successive Psi iterates differ by less
  double stall_tol = 1e-8;   // accepted floor when round-off growth stops the iteration first
  int kmax = 0;              // 0: ceil(log tol / log eta) + 8
  double slow_factor = 1.5;  // SlowDecay when the fitted rate exceeds slow_factor * eta
  graphs::GraphSettings graph;
  int residual_samples = 200;
  unsigned seed = 1;
};

int default_resolution(int n);
int default_graph_refine(int w_dim);

struct StageReport {
  int band = 0;
  IndexSet u, v, w;
  Mat B;
  double eta = 0.0;  // mu_m^+ mu_l^+ / mu_l^-
  int kmax = 0;
  int iterations = 0;
  std::vector<double> diffs;  // sup over nodes of successive Psi differences
  bool stalled = false;       // differences started to grow before reaching tol
  int best_iteration = 0;
  double floor = 0.0;         // last (or smallest, when stalled) difference
  double decay_rate = 0.0;    // exp of the fitted slope of log diffs
  double decay_r2 = 1.0;
  bool exact = false;         // differences vanish: no fit
  int graph_iterations = 0;
  double graph_residual = 0.0;
  bool jet_closure = false;
  double v_linearity = 0.0;   // |Psi(F_l x) - B Psi(x)| on samples
  transform::TransformPtr pre;                         // Phi_{>l}
  std::shared_ptr<const transform::ShearTransform> theta;  // (u, v) -= h(w); null when W is empty
  GridFunction psi;
};

struct ContractionResult {
  std::shared_ptr<const transform::Chain> chain;  // original coordinates
  spectral::LinearPart linear;
  dynamics::MapPtr band_map;  // the map in band coordinates
  Box box;                    // working box in band coordinates
  std::vector<StageReport> stages;  // in processing order, top band first
};

// Partial linearization cascade, band by band from the weakest contraction
// down. The map should already coincide with its cutoff version near O.
ContractionResult linearize_contraction(const dynamics::MapPtr& map, const spectral::SpectrumDecomposition& dec,
                                        const ContractionParams& params = {});

struct GrowthFit {
  double rate = 0.0;  // slope of log sup-norm against k
  double r2 = 0.0;
  int points = 0;
};

struct GrowthReport {
  GrowthFit q;       // (u, v) block of D F~^k
  GrowthFit c1;      // d_w pi_v F~ at F~^k x
  GrowthFit b1;      // d_v pi_v F~ - B at F~^k x
  double log_mu_l_plus = 0.0;
  double log_mu_m_plus = 0.0;
};

// Block growth of the straightened stage F~ = (Theta Phi_{>l}) G (Theta Phi_{>l})^{-1}
// along orbits of sample points; only values above the floor enter the fits.
GrowthReport growth_bound_diagnostics(const ContractionResult& result, const spectral::SpectrumDecomposition& dec,
                                      int stage, int samples, int kmax, unsigned seed, double floor = 1e-9);

// Least-squares line through (x, y); returns slope and R^2.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hyperlin::contraction
