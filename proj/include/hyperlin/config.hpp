#pragma once

#include "hyperlin/dynamics.hpp"
#include "hyperlin/linearize_hyperbolic.hpp"
#include "hyperlin/spectral.hpp"
#include "hyperlin/verify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hyperlin::config {

// Flat INI run description. Every key is validated before any computation;
// problems raise ConfigError naming the line and section.key.
struct RunConfig {
  std::string source;

  // [map]
  std::string map_builtin;  // empty when terms are given
  int dim = 0;
  std::vector<dynamics::PolyTerm> terms;
  double domain_half_width = 0.0;  // 0: unbounded

  // [spectrum]; without bands or moduli the map's linear part is clustered
  std::string spectrum_builtin;
  std::vector<spectral::Band> bands;
  std::vector<double> moduli;
  double gap_threshold = 0.2;
  double hyperbolicity_tol = 1e-9;

  // [exponents]
  double epsilon = 1e-3;
  double delta = 0.0;  // 0: default margins

  // [bump], [lp], [foliation]
  double r0 = 0.02;
  double r1 = 0.06;
  double eta_target = 1.0;
  lp::LPParameters lp;
  int fol_x_res = 33;
  int fol_y_res = 3;

  // [cascade], [hyperbolic]
  contraction::ContractionParams cascade;
  int graph_resolution = 513;

  // [verify]
  int samples = 1000;
  verify::HolderOptions holder;
  std::string chain_dir;  // verify: previously exported chain; empty means <out>/chain

  // [sharpness]: the coefficient of term `sweep_term` runs over `sweep_values`
  int sweep_term = -1;
  std::vector<double> sweep_values;
  double sweep_margin = 0.1;

  unsigned seed = 1;
  std::string out_dir;  // [run] out, overridden by --out

  bool has_map() const { return dim > 0; }
  bool has_spectrum() const { return !bands.empty() || !moduli.empty() || !spectrum_builtin.empty(); }
};

RunConfig parse(const std::string& text, const std::string& source = "<string>");
RunConfig load(const std::string& path);

// "coef | e_0 ... e_{n-1} | out"
dynamics::PolyTerm parse_term(const std::string& text, int dim);

std::vector<std::string> map_builtins();
std::vector<std::string> spectrum_builtins();

dynamics::MapPtr build_map(const RunConfig& cfg);
// Explicit bands, clustered moduli, a named spectrum, or the map's linear part.
spectral::SpectrumDecomposition build_spectrum(const RunConfig& cfg);
spectral::Margins build_margins(const RunConfig& cfg, const spectral::SpectrumDecomposition& dec);
hyperbolic::LinearizeParams build_linearize_params(const RunConfig& cfg);

}  // namespace hyperlin::config
