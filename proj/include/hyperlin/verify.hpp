#pragma once

#include "hyperlin/dynamics.hpp"
#include "hyperlin/lp_foliation.hpp"
#include "hyperlin/transform.hpp"
#include "hyperlin/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hyperlin::verify {

using Field = std::function<Vec(const Vec&)>;

// Pairs x = c + s a, x~ = c + s b with a, b in the unit ball and separations
// s|a - b| log-spaced over [sep_lo, sep_hi] * radius. The slope is pooled over
// pair families with one intercept per family.
struct HolderOptions {
  double sep_lo = 1e-4;
  double sep_hi = 1e-2;
  int families = 40;
  int scales = 20;
  int min_pairs = 200;
};

struct HolderEstimate {
  double exponent = 1.0;   // clamped to [0, 1.05]
  double raw_slope = 1.0;  // before clamping
  double ci_low = 1.0;     // 95% band of the slope
  double ci_high = 1.0;
  double sep_min = 0.0;
  double sep_max = 0.0;
  int pairs = 0;
  bool constant = false;   // too few pairs above the round-off floor
};

HolderEstimate holder_exponent(const Field& field, const Vec& center, double radius, const HolderOptions& opts = {},
                               unsigned seed = 1);

// Row-major flattening, for derivative fields.
Vec flatten(const Mat& m);

// Uniform points in a box, seed-deterministic.
std::vector<Vec> sample_box(const Box& box, int count, unsigned seed);

struct ResidualReport {
  double max = 0.0;
  double mean = 0.0;
  double inverse_max = 0.0;  // |F(Phi^-1 x) - Phi^-1(Lambda x)|
  double inverse_mean = 0.0;
  int samples = 0;
};
ResidualReport conjugacy_residual(const dynamics::Map& map, const transform::Transform& chain, const Mat& lin,
                                  const Box& box, int samples, unsigned seed);

// F(x + q_0(x, y)) - F(x) - q_0(F x, pi_C F(x + q_0(x, y))) on interior samples
// whose images stay on the grid.
double foliation_invariance(const dynamics::Map& map, const lp::FoliationResult& fol, int samples, unsigned seed);

struct DiffeoReport {
  double forward_inverse = 0.0;
  double derivative_mismatch = 0.0;  // finite differences against the chain derivative
  double min_singular = 0.0;
  double max_singular = 0.0;
  int samples = 0;
};
DiffeoReport diffeo_check(const transform::Transform& chain, const Box& box, int samples, unsigned seed);

struct SharpnessMember {
  transform::TransformPtr chain;
  Box box;              // where the derivative exponent is measured (centered at the origin)
  double predicted = 0.0;
};

struct SharpnessRow {
  double parameter = 0.0;
  double predicted = 0.0;
  double measured = 0.0;
  bool constant = false;
  bool ok = false;  // measured >= predicted - margin
  std::string error;
};

// Builds each member, measures the exponent of its conjugacy derivative; a
// failing member becomes a row with the error text.
std::vector<SharpnessRow> sharpness_experiment(const std::vector<double>& params,
                                               const std::function<SharpnessMember(double)>& build,
                                               double margin, unsigned seed);

}  // namespace hyperlin::verify
