#pragma once

#include <cstddef>

// Hot inner loops with a scalar reference implementation and an AVX2 variant.
// The variant is chosen once at startup from the CPU feature bits; setting
// HYPERLIN_KERNELS=scalar in the environment forces the reference path.
namespace hyperlin::kernels {

// Flattened polynomial map: term t contributes coef[t] * prod_j x_j^exponents[t*dim+j]
// to output component output[t].
struct PolyView {
  int dim = 0;
  int outputs = 0;
  int nterms = 0;
  const double* coef = nullptr;
  const int* output = nullptr;
  const int* exponents = nullptr;
};

// Uniform grid with node-major values (values[node * codim + component]).
struct GridView {
  int dim = 0;
  const double* lo = nullptr;
  const double* inv_h = nullptr;
  const int* res = nullptr;
  const long* stride = nullptr;
  const double* values = nullptr;
  int codim = 1;
  int component = 0;
};

struct KernelTable {
  const char* name;
  // in: dim x count (SoA), out: outputs x count (SoA, overwritten)
  void (*poly_eval)(const PolyView& p, const double* in, std::size_t count, double* out);
  // Multilinear interpolation of one component; points outside the box are
  // extrapolated from the boundary cell.
  void (*multilinear_eval)(const GridView& g, const double* in, std::size_t count, double* out);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();
const KernelTable& active();

}  // namespace hyperlin::kernels
