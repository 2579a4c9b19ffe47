#include "doctest.h"

#include "hyperlin/error.hpp"
#include "hyperlin/linearize_hyperbolic.hpp"
#include "hyperlin/verify.hpp"

#include <cmath>

using namespace hyperlin;
using dynamics::PolyTerm;

namespace {

dynamics::MapPtr poly(int n, std::vector<PolyTerm> terms) {
  return std::make_shared<dynamics::PolynomialMap>(n, std::move(terms));
}

// x1 * prod_{j >= 0} (1 + x2 2^{-j})^{-1}, summed in log form.
double product_oracle(double x1, double x2) {
  double s = 0.0;
  for (int j = 0; j < 200; ++j) {
    const double t = std::ldexp(x2, -j);
    if (std::abs(t) < 1e-18) break;
    s += std::log1p(t);
  }
  return x1 * std::exp(-s);
}

const auto kPlanar = spectral::from_bands({{0.5, 0.5}, {2.0, 2.0}});

}  // namespace

TEST_CASE("bilinear coupling matches the infinite-product conjugacy") {
  const auto f = poly(2, {{0.5, {1, 0}, 0}, {1.0, {1, 1}, 0}, {2.0, {0, 1}, 1}});
  const auto r = hyperbolic::linearize_hyperbolic(f, kPlanar);
  CHECK(r.report_box.half_width(0) == doctest::Approx(0.005));
  double err = 0.0;
  for (const auto& x : verify::sample_box(r.report_box, 3000, 11)) {
    const Vec p = r.chain->forward(x);
    err = std::max(err, std::max(std::abs(p[0] - product_oracle(x[0], x[1])), std::abs(p[1] - x[1])));
  }
  CHECK(err <= 1e-4);
  CHECK(r.decoupling_residual <= 1e-4);
  const auto res = verify::conjugacy_residual(*f, *r.chain, f->linear(), r.report_box, 1000, 3);
  CHECK(res.max <= 1e-4);
  CHECK(r.stable.measured_contraction <= r.stable.contraction_estimate);
  CHECK(r.unstable.measured_contraction <= r.unstable.contraction_estimate);
}

TEST_CASE("unstable graph of a quadratic map") {
  const auto f = poly(2, {{0.5, {1, 0}, 0}, {1.0, {0, 2}, 0}, {2.0, {0, 1}, 1}});
  const auto r = hyperbolic::linearize_hyperbolic(f, kPlanar);
  double err = 0.0;
  for (long i = 0; i < r.g_u.g.node_count(); ++i) {
    const double y = r.g_u.g.node(i)[0];
    err = std::max(err, std::abs(r.g_u.g.value(i)[0] - 2.0 / 7.0 * y * y));
  }
  // The graph is exactly quadratic, which cubic interpolation reproduces.
  CHECK(err < 1e-14);
  REQUIRE(r.theta1);
  CHECK(r.axis_residual < 1e-14);
  const auto res = verify::conjugacy_residual(*f, *r.chain, f->linear(), r.report_box, 1000, 3);
  CHECK(res.max < 1e-12);
}

TEST_CASE("both manifolds curved") {
  const auto f = poly(2, {{0.5, {1, 0}, 0}, {1.0, {0, 2}, 0}, {1.0, {1, 1}, 0}, {2.0, {0, 1}, 1}, {1.0, {2, 0}, 1}});
  const auto r = hyperbolic::linearize_hyperbolic(f, kPlanar);
  CHECK(r.theta1);
  CHECK(r.theta2);
  CHECK(r.axis_residual < 1e-9);
  CHECK(r.decoupling_residual < 1e-4);
  const auto res = verify::conjugacy_residual(*f, *r.chain, f->linear(), r.report_box, 1000, 3);
  CHECK(res.max < 1e-4);
  const auto d = verify::diffeo_check(*r.chain, r.report_box, 100, 3);
  CHECK(d.forward_inverse < 1e-9);
  CHECK(d.min_singular > 0.5);
}

TEST_CASE("linear hyperbolic map gives an identity chain") {
  const auto f = poly(2, {{0.5, {1, 0}, 0}, {2.0, {0, 1}, 1}});
  const auto r = hyperbolic::linearize_hyperbolic(f, kPlanar);
  CHECK_FALSE(r.theta1);
  CHECK_FALSE(r.theta2);
  for (const auto& x : verify::sample_box(r.report_box, 200, 1)) CHECK((r.chain->forward(x) - x).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pipeline refuses spectra outside its scope") {
  const auto c = poly(2, {{0.5, {1, 0}, 0}, {0.6, {0, 1}, 1}});
  try {
    hyperbolic::linearize_hyperbolic(c, spectral::from_bands({{0.5, 0.6}}));
    FAIL("expected NotMixed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotMixed);
  }
  // 2 / 0.5 = 4 is not above 1 / 0.1.
  const auto g = poly(3, {{0.1, {1, 0, 0}, 0}, {0.5, {0, 1, 0}, 1}, {2.0, {0, 0, 1}, 2}});
  try {
    hyperbolic::linearize_hyperbolic(g, spectral::from_bands({{0.1, 0.5}, {2.0, 2.0}}));
    FAIL("expected ConditionViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConditionViolated);
  }
}

TEST_CASE("dispatch handles expansions through the inverse") {
  const auto f = poly(2, {{2.0, {1, 0}, 0}, {1.0, {0, 2}, 0}, {5.0, {0, 1}, 1}});
  const auto dec = spectral::from_bands({{2.0, 2.0}, {5.0, 5.0}});
  const auto lin = hyperbolic::linearize(f, dec);
  CHECK(lin.kind == "expansion");
  REQUIRE(lin.factor);
  const auto res = verify::conjugacy_residual(*f, *lin.chain, f->linear(), lin.report_box, 1000, 3);
  CHECK(res.max < 1e-6);
}

TEST_CASE("inverse and part decompositions") {
  const auto dec = spectral::from_bands({{0.1, 0.2}, {0.5, 0.5}, {2.0, 4.0}});
  const auto inv = hyperbolic::inverse_decomposition(dec);
  REQUIRE(inv.m() == 3);
  CHECK(inv.d == 1);
  CHECK(inv.bands[0].lo == doctest::Approx(0.25));
  CHECK(inv.bands[2].hi == doctest::Approx(10.0));
  CHECK(hyperbolic::stable_part(dec).m() == 2);
  CHECK(hyperbolic::unstable_part(dec).m() == 1);
}
