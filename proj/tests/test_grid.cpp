#include "doctest.h"

#include "hyperlin/error.hpp"
#include "hyperlin/grid.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace hyperlin;

TEST_CASE("nodes reproduce stored values") {
  auto g = GridFunction::sample(Box::centered(2, 1.0), {5, 7}, 1, [](const Vec& x) {
    Vec v(1);
    v[0] = std::exp(x[0]) * std::cos(3 * x[1]);
    return v;
  });
  for (long i = 0; i < g.node_count(); ++i) CHECK(g.eval(g.node(i))[0] == doctest::Approx(g.value(i)[0]).epsilon(1e-14));
}

TEST_CASE("affine functions are interpolated exactly") {
  auto g = GridFunction::sample(Box::centered(3, 0.5), {3, 4, 5}, 2, [](const Vec& x) {
    Vec v(2);
    v[0] = 1.0 + 2 * x[0] - 3 * x[1] + 0.5 * x[2];
    v[1] = -4.0;
    return v;
  });
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int s = 0; s < 200; ++s) {
    Vec x(3);
    x << u(rng), u(rng), u(rng);
    const Vec v = g.eval(x);
    CHECK(v[0] == doctest::Approx(1.0 + 2 * x[0] - 3 * x[1] + 0.5 * x[2]).epsilon(1e-13));
    CHECK(v[1] == doctest::Approx(-4.0));
  }
}

TEST_CASE("x^2 on 65 nodes stays within the h^2 max|f''| / 8 bound") {
  const double h = 2.0 / 64;
  auto g = GridFunction::sample(Box::centered(1, 1.0), {65}, 1, [](const Vec& x) {
    Vec v(1);
    v[0] = x[0] * x[0];
    return v;
  });
  double worst = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    Vec x(1);
    x[0] = -1.0 + 2.0 * i / 10000;
    worst = std::max(worst, std::fabs(g.eval(x)[0] - x[0] * x[0]));
  }
  CHECK(worst <= h * h / 4 * (1 + 1e-12));
  CHECK(worst > 0.9 * h * h / 4);
}

TEST_CASE("grid derivative is second-order accurate") {
  auto f = [](const Vec& x) {
    Vec v(1);
    v[0] = std::sin(x[0]) * std::exp(x[1]);
    return v;
  };
  double prev = 0.0;
  for (int res : {17, 33, 65}) {
    auto g = GridFunction::sample(Box::centered(2, 1.0), {res, res}, 1, f);
    Vec x(2);
    x << 0.3, -0.2;
    const Mat J = g.derivative(x);
    const double err = std::fabs(J(0, 0) - std::cos(0.3) * std::exp(-0.2)) + std::fabs(J(0, 1) - std::sin(0.3) * std::exp(-0.2));
    if (prev > 0) CHECK(err < prev / 3.0);
    prev = err;
  }
}

TEST_CASE("outside the box raises OutsideBox") {
  GridFunction g(Box::centered(1, 1.0), {3}, 1);
  Vec x(1);
  x[0] = 1.5;
  CHECK_THROWS_AS(g.eval(x), Error);
  CHECK_NOTHROW(g.eval_extrapolated(x));
}

TEST_CASE("csv round trip is exact") {
  auto g = GridFunction::sample(Box::centered(2, 0.3), {4, 3}, 2, [](const Vec& x) {
    Vec v(2);
    v[0] = std::sqrt(2.0) * x[0] + M_PI * x[1] * x[1];
    v[1] = 1.0 / 3.0;
    return v;
  });
  std::stringstream ss;
  g.write_csv(ss);
  auto h = GridFunction::read_csv(ss);
  CHECK(h.values() == g.values());
  CHECK(h.box().lo == g.box().lo);
  CHECK(h.resolution() == g.resolution());
}

TEST_CASE("batched interpolation matches pointwise evaluation") {
  auto g = GridFunction::sample(Box::centered(2, 1.0), {9, 9}, 2, [](const Vec& x) {
    Vec v(2);
    v[0] = x[0] * x[1];
    v[1] = std::cos(x[0]);
    return v;
  });
  PointBatch pts(2, 37);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& x : pts.data) x = u(rng);
  PointBatch out;
  g.eval_batch(pts, out);
  for (std::size_t i = 0; i < pts.count; ++i) {
    const Vec v = g.eval(pts.point(i));
    CHECK(out.coord(0)[i] == doctest::Approx(v[0]).epsilon(1e-13));
    CHECK(out.coord(1)[i] == doctest::Approx(v[1]).epsilon(1e-13));
  }
}

TEST_CASE("cubic interpolation reproduces quadratics with their derivative") {
  auto q = [](const Vec& x) {
    Vec o(1);
    o << 1.0 + 2.0 * x[0] - x[1] + 3.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + 0.5 * x[1] * x[1];
    return o;
  };
  const auto g = GridFunction::sample(Box::centered(2, 1.0), {9, 7}, 1, q);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 200; ++i) {
    Vec x(2);
    x << u(rng), u(rng);
    CHECK(g.eval_cubic(x)[0] == doctest::Approx(q(x)[0]).epsilon(1e-12));
    const Mat d = g.derivative_cubic(x);
    CHECK(d(0, 0) == doctest::Approx(2.0 + 6.0 * x[0] - 2.0 * x[1]).epsilon(1e-11));
    CHECK(d(0, 1) == doctest::Approx(-1.0 - 2.0 * x[0] + x[1]).epsilon(1e-11));
  }
}

TEST_CASE("cubic derivative is the derivative of the cubic value") {
  const auto g = GridFunction::sample(Box::centered(1, 1.0), {17}, 1, [](const Vec& x) {
    Vec o(1);
    o << std::sin(3.0 * x[0]);
    return o;
  });
  for (double t = -0.97; t < 0.97; t += 0.0731) {
    Vec a(1), b(1), c(1);
    a << t;
    b << t + 1e-7;
    c << t - 1e-7;
    const double fd = (g.eval_cubic(b)[0] - g.eval_cubic(c)[0]) / 2e-7;
    CHECK(std::abs(fd - g.derivative_cubic(a)(0, 0)) < 1e-7);
    CHECK(std::abs(g.eval_cubic(a)[0] - std::sin(3.0 * t)) < 5e-3);
  }
}
