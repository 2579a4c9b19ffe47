#include "hyperlin/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace hyperlin::kernels {
namespace {

void poly_eval_avx2(const PolyView& p, const double* in, std::size_t count, double* out) {
  std::fill(out, out + static_cast<std::size_t>(p.outputs) * count, 0.0);
  const std::size_t vec_end = count - count % 4;
  for (std::size_t i = 0; i < vec_end; i += 4) {
    __m256d x[16];
    for (int j = 0; j < p.dim; ++j) x[j] = _mm256_loadu_pd(in + j * count + i);
    __m256d acc[64];
    for (int o = 0; o < p.outputs; ++o) acc[o] = _mm256_setzero_pd();
    for (int t = 0; t < p.nterms; ++t) {
      __m256d v = _mm256_set1_pd(p.coef[t]);
      const int* e = p.exponents + static_cast<std::size_t>(t) * p.dim;
      for (int j = 0; j < p.dim; ++j)
        for (int k = 0; k < e[j]; ++k) v = _mm256_mul_pd(v, x[j]);
      acc[p.output[t]] = _mm256_add_pd(acc[p.output[t]], v);
    }
    for (int o = 0; o < p.outputs; ++o) _mm256_storeu_pd(out + o * count + i, acc[o]);
  }
  if (vec_end < count) {
    // Tail through the reference loop on a shifted view.
    for (std::size_t i = vec_end; i < count; ++i) {
      for (int t = 0; t < p.nterms; ++t) {
        double v = p.coef[t];
        const int* e = p.exponents + static_cast<std::size_t>(t) * p.dim;
        for (int j = 0; j < p.dim; ++j)
          for (int k = 0; k < e[j]; ++k) v = v * in[j * count + i];
        out[p.output[t] * count + i] += v;
      }
    }
  }
}

void multilinear_eval_avx2(const GridView& g, const double* in, std::size_t count, double* out) {
  const std::size_t vec_end = count - count % 4;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256i codim = _mm256_set1_epi64x(g.codim);
  const __m256i comp = _mm256_set1_epi64x(g.component);
  for (std::size_t i = 0; i < vec_end; i += 4) {
    __m256i cell[16];
    __m256d frac[16];
    for (int a = 0; a < g.dim; ++a) {
      const __m256d x = _mm256_loadu_pd(in + a * count + i);
      const __m256d t = _mm256_mul_pd(_mm256_sub_pd(x, _mm256_set1_pd(g.lo[a])), _mm256_set1_pd(g.inv_h[a]));
      __m256d c = _mm256_floor_pd(t);
      c = _mm256_min_pd(_mm256_max_pd(c, zero), _mm256_set1_pd(static_cast<double>(g.res[a] - 2)));
      cell[a] = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(c));
      frac[a] = _mm256_sub_pd(t, c);
    }
    __m256d acc = zero;
    const int corners = 1 << g.dim;
    for (int m = 0; m < corners; ++m) {
      __m256d w = one;
      __m256i off = _mm256_setzero_si256();
      for (int a = 0; a < g.dim; ++a) {
        const int bit = (m >> a) & 1;
        w = _mm256_mul_pd(w, bit ? frac[a] : _mm256_sub_pd(one, frac[a]));
        const __m256i idx = bit ? _mm256_add_epi64(cell[a], _mm256_set1_epi64x(1)) : cell[a];
        off = _mm256_add_epi64(off, _mm256_mul_epi32(idx, _mm256_set1_epi64x(g.stride[a])));
      }
      off = _mm256_add_epi64(_mm256_mul_epi32(off, codim), comp);
      const __m256d v = _mm256_i64gather_pd(g.values, off, 8);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(w, v));
    }
    _mm256_storeu_pd(out + i, acc);
  }
  if (vec_end < count) {
    GridView tail = g;
    const std::size_t rest = count - vec_end;
    double buf_in[16 * 4];
    for (int a = 0; a < g.dim; ++a)
      for (std::size_t k = 0; k < rest; ++k) buf_in[a * rest + k] = in[a * count + vec_end + k];
    scalar_table().multilinear_eval(tail, buf_in, rest, out + vec_end);
  }
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  const std::size_t vec_end = n - n % 4;
  for (std::size_t i = 0; i < vec_end; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (std::size_t i = vec_end; i < n; ++i) r = std::max(r, std::fabs(a[i] - b[i]));
  return r;
}

}  // namespace

const KernelTable& avx2_table_impl() {
  static const KernelTable t{"avx2", poly_eval_avx2, multilinear_eval_avx2, max_abs_diff_avx2};
  return t;
}

}  // namespace hyperlin::kernels
