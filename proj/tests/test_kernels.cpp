#include "doctest.h"

#include "hyperlin/grid.hpp"
#include "hyperlin/kernels.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace hyperlin;

namespace {

std::vector<double> random_soa(int dim, std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(dim * n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("polynomial kernel variants agree") {
  const auto* simd = kernels::avx2_table();
  if (simd == nullptr) {
    MESSAGE("AVX2 unavailable; only the reference kernel is exercised");
    return;
  }
  // 3 variables, 2 outputs: x0^2 x1 - 0.5 x2^3 + 1.5 x0 | 2 x1 x2 + x0^4
  std::vector<double> coef{1.0, -0.5, 1.5, 2.0, 1.0};
  std::vector<int> output{0, 0, 0, 1, 1};
  std::vector<int> exps{2, 1, 0, 0, 0, 3, 1, 0, 0, 0, 1, 1, 4, 0, 0};
  kernels::PolyView p{3, 2, 5, coef.data(), output.data(), exps.data()};
  for (std::size_t n : {1u, 3u, 4u, 7u, 1001u}) {
    const auto in = random_soa(3, n, -2.0, 2.0, 7 + n);
    std::vector<double> a(2 * n), b(2 * n);
    kernels::scalar_table().poly_eval(p, in.data(), n, a.data());
    simd->poly_eval(p, in.data(), n, b.data());
    for (std::size_t i = 0; i < 2 * n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
    // Reference values for the first point.
    const double x0 = in[0], x1 = in[n], x2 = in[2 * n];
    CHECK(a[0] == doctest::Approx(x0 * x0 * x1 - 0.5 * x2 * x2 * x2 + 1.5 * x0).epsilon(1e-14));
    CHECK(a[n] == doctest::Approx(2 * x1 * x2 + std::pow(x0, 4)).epsilon(1e-14));
  }
}

TEST_CASE("multilinear kernel variants agree, including extrapolation") {
  const auto* simd = kernels::avx2_table();
  if (simd == nullptr) return;
  for (int dim : {1, 2, 3, 4}) {
    Box box = Box::centered(dim, 1.0);
    std::vector<int> res(dim, 5 + dim);
    auto g = GridFunction::sample(box, res, 2, [](const Vec& x) {
      Vec v(2);
      v[0] = std::sin(x.sum());
      v[1] = x.squaredNorm();
      return v;
    });
    const std::size_t n = 257;
    PointBatch pts(dim, n);
    pts.data = random_soa(dim, n, -1.3, 1.3, 11 * dim);
    kernels::GridView view;
    view.dim = dim;
    view.lo = box.lo.data();
    std::vector<double> inv_h(dim);
    std::vector<long> stride(dim);
    for (int a = 0; a < dim; ++a) {
      inv_h[a] = 1.0 / g.spacing(a);
      stride[a] = g.stride(a);
    }
    view.inv_h = inv_h.data();
    view.res = g.resolution().data();
    view.stride = stride.data();
    view.values = g.values().data();
    view.codim = 2;
    for (int c = 0; c < 2; ++c) {
      view.component = c;
      std::vector<double> a(n), b(n);
      kernels::scalar_table().multilinear_eval(view, pts.data.data(), n, a.data());
      simd->multilinear_eval(view, pts.data.data(), n, b.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
        CHECK(a[i] == doctest::Approx(g.eval_extrapolated(pts.point(i))[c]).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("max-abs-diff kernel variants agree") {
  const auto* simd = kernels::avx2_table();
  if (simd == nullptr) return;
  for (std::size_t n : {0u, 1u, 5u, 64u, 1003u}) {
    const auto a = random_soa(1, n, -1, 1, 3 + n);
    const auto b = random_soa(1, n, -1, 1, 5 + n);
    CHECK(kernels::scalar_table().max_abs_diff(a.data(), b.data(), n) ==
          simd->max_abs_diff(a.data(), b.data(), n));
  }
}

TEST_CASE("active table is one of the variants") {
  const auto& k = kernels::active();
  const bool known = (&k == &kernels::scalar_table()) || (&k == kernels::avx2_table());
  CHECK(known);
}
