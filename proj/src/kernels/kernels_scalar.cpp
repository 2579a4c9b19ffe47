#include "hyperlin/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace hyperlin::kernels {
namespace {

void poly_eval_scalar(const PolyView& p, const double* in, std::size_t count, double* out) {
  std::fill(out, out + static_cast<std::size_t>(p.outputs) * count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    for (int t = 0; t < p.nterms; ++t) {
      double v = p.coef[t];
      const int* e = p.exponents + static_cast<std::size_t>(t) * p.dim;
      for (int j = 0; j < p.dim; ++j)
        for (int k = 0; k < e[j]; ++k) v = v * in[j * count + i];
      out[p.output[t] * count + i] += v;
    }
  }
}

void multilinear_eval_scalar(const GridView& g, const double* in, std::size_t count, double* out) {
  long cell[16];
  double frac[16];
  for (std::size_t i = 0; i < count; ++i) {
    for (int a = 0; a < g.dim; ++a) {
      const double t = (in[a * count + i] - g.lo[a]) * g.inv_h[a];
      double c = std::floor(t);
      c = std::min(std::max(c, 0.0), static_cast<double>(g.res[a] - 2));
      cell[a] = static_cast<long>(c);
      frac[a] = t - c;
    }
    double acc = 0.0;
    const int corners = 1 << g.dim;
    for (int m = 0; m < corners; ++m) {
      double w = 1.0;
      long off = 0;
      for (int a = 0; a < g.dim; ++a) {
        const int bit = (m >> a) & 1;
        w = w * (bit ? frac[a] : 1.0 - frac[a]);
        off += (cell[a] + bit) * g.stride[a];
      }
      acc = acc + w * g.values[off * g.codim + g.component];
    }
    out[i] = acc;
  }
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{"scalar", poly_eval_scalar, multilinear_eval_scalar, max_abs_diff_scalar};
  return t;
}

}  // namespace hyperlin::kernels
