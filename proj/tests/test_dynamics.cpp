#include "doctest.h"

#include "hyperlin/dynamics.hpp"
#include "hyperlin/error.hpp"

#include <cmath>
#include <random>

using namespace hyperlin;
using namespace hyperlin::dynamics;

namespace {

MapPtr quadratic_contraction() {
  // (0.2 x1 + x2^2, 0.5 x2)
  return std::make_shared<PolynomialMap>(
      2, std::vector<PolyTerm>{{0.2, {1, 0}, 0}, {1.0, {0, 2}, 0}, {0.5, {0, 1}, 1}});
}

MapPtr saddle() {
  // (0.5 x1 + x1 x2, 2 x2 + x1^2)
  return std::make_shared<PolynomialMap>(
      2, std::vector<PolyTerm>{{0.5, {1, 0}, 0}, {1.0, {1, 1}, 0}, {2.0, {0, 1}, 1}, {1.0, {2, 0}, 1}});
}

// Composite Simpson with an even number of panels.
double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST_CASE("polynomial map extracts the linear part and iterates") {
  const auto f = quadratic_contraction();
  CHECK(f->linear()(0, 0) == 0.2);
  CHECK(f->linear()(1, 1) == 0.5);
  CHECK(f->linear()(0, 1) == 0.0);
  const Vec y = iterate(*f, v2(0.0, 0.1), 2);
  CHECK(y[0] == doctest::Approx(0.0045).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(origin_residual(*f) == 0.0);
  CHECK(linear_part_residual(*f) < 1e-14);
}

TEST_CASE("constant terms are rejected") {
  CHECK_THROWS_AS(PolynomialMap(1, {{1.0, {0}, 0}}), Error);
}

TEST_CASE("symbolic jacobian agrees with finite differences") {
  const auto f = saddle();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int t = 0; t < 20; ++t) {
    const Vec x = v2(u(rng), u(rng));
    const Mat fd = finite_difference_jacobian([&](const Vec& z) { return f->eval(z); }, x, 1e-5);
    CHECK((f->jacobian(x) - fd).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("batch evaluation matches pointwise evaluation") {
  const auto f = saddle();
  PointBatch in(2, 37), out(2, 37), jac(4, 37);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 37; ++i) in.set_point(i, v2(u(rng), u(rng)));
  f->eval_batch(in, out);
  f->jacobian_batch(in, jac);
  for (int i = 0; i < 37; ++i) {
    const Vec x = in.point(i);
    CHECK((out.point(i) - f->eval(x)).norm() < 1e-15);
    const Mat j = f->jacobian(x);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) CHECK(jac.point(i)[2 * r + c] == doctest::Approx(j(r, c)).epsilon(1e-14));
  }
}

TEST_CASE("iterate_derivative is the chain rule product") {
  const auto f = saddle();
  const Vec x = v2(0.01, -0.02);
  Mat expect = Mat::Identity(2, 2);
  Vec y = x;
  for (int k = 0; k < 4; ++k) {
    expect = f->jacobian(y) * expect;
    y = f->eval(y);
  }
  CHECK((iterate_derivative(*f, x, 4) - expect).norm() < 1e-14);
}

TEST_CASE("iterates leaving the domain are reported") {
  const auto f = std::make_shared<PolynomialMap>(1, std::vector<PolyTerm>{{2.0, {1}, 0}}, Box::centered(1, 1.0));
  try {
    iterate(*f, Vec::Constant(1, 0.3), 3);
    FAIL("expected LeftDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LeftDomain);
  }
}

TEST_CASE("basis change conjugates the map") {
  const auto f = saddle();
  Mat m(2, 2);
  m << 1.0, 0.3, -0.2, 1.0;
  const Mat mi = m.inverse();
  BasisChangedMap g(f, m, mi);
  const Vec z = v2(0.05, -0.04);
  CHECK((g.eval(z) - mi * f->eval(m * z)).norm() < 1e-15);
  CHECK((g.linear() - mi * f->linear() * m).norm() < 1e-14);
  const Mat fd = finite_difference_jacobian([&](const Vec& w) { return g.eval(w); }, z, 1e-5);
  CHECK((g.jacobian(z) - fd).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("restriction embeds with zeros") {
  const auto f = saddle();
  RestrictedMap r(f, {1});
  const Vec x = Vec::Constant(1, 0.1);
  CHECK(r.eval(x)[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.linear()(0, 0) == 2.0);
}

TEST_CASE("inverse map inverts the map") {
  const auto f = saddle();
  InverseMap g(f);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int t = 0; t < 20; ++t) {
    const Vec z = v2(u(rng), u(rng));
    CHECK((f->eval(g.eval(z)) - z).norm() < 1e-14);
    CHECK((g.jacobian(z) * f->jacobian(g.eval(z)) - Mat::Identity(2, 2)).norm() < 1e-12);
  }
  CHECK((g.linear() - f->linear().inverse()).norm() < 1e-15);
}

TEST_CASE("bump kernel and primitive") {
  CHECK(bump_kernel(0.0) == 0.0);
  CHECK(bump_kernel(1.0) == 0.0);
  CHECK(bump_kernel(0.5) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));
  CHECK(bump_primitive(-1.0) == 0.0);
  CHECK(bump_primitive(2.0) == 1.0);
  CHECK(bump_primitive(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  const double total = simpson(bump_kernel, 0.0, 1.0, 20000);
  for (double s : {0.1, 0.25, 0.4, 0.7, 0.93}) {
    const double expect = simpson(bump_kernel, 0.0, s, 20000) / total;
    CHECK(std::fabs(bump_primitive(s) - expect) < 1e-10);
  }
  for (int i = 1; i < 100; ++i) CHECK(bump_primitive(i / 100.0) >= bump_primitive((i - 1) / 100.0));
}

TEST_CASE("u is smooth away from the origin and undefined at it") {
  CHECK(bump_u(0.25, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bump_u(-0.1, 0.5) == 0.0);
  CHECK(bump_u(0.6, 0.5) == 1.0);
  CHECK(bump_u(0.1, -0.5) == bump_u(0.1, 0.5));
  try {
    bump_u(0.0, 0.0);
    FAIL("expected OriginUndefined");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OriginUndefined);
  }
}

TEST_CASE("radial cutoff") {
  RadialCutoff c(0.01, 0.05);
  CHECK(c.value(0.0) == 1.0);
  CHECK(c.value(0.01) == 1.0);
  CHECK(c.value(0.05) == 0.0);
  CHECK(c.value(0.03) == doctest::Approx(0.5).epsilon(1e-12));
  for (double r : {0.015, 0.02, 0.035, 0.045}) {
    const double fd = (c.value(r + 1e-7) - c.value(r - 1e-7)) / 2e-7;
    CHECK(c.slope(r) == doctest::Approx(fd).epsilon(1e-5));
  }
  CHECK_THROWS_AS(RadialCutoff(0.05, 0.01), Error);
}

TEST_CASE("bump modification of a linear map is linear") {
  Mat lam(2, 2);
  lam << 0.5, 0, 0, 2;
  auto lin = std::make_shared<PolynomialMap>(2, std::vector<PolyTerm>{{0.5, {1, 0}, 0}, {2.0, {0, 1}, 1}});
  const auto mod = bump_modify(lin, 0.01, 0.05, 1e-12);
  CHECK(mod.eta == 0.0);
  CHECK((mod.map->linear() - lam).norm() == 0.0);
}

TEST_CASE("bump modification keeps F inside r0 and Lambda outside r1") {
  const auto f = quadratic_contraction();
  const auto mod = bump_modify(f, 0.01, 0.05, 0.2);
  CHECK(mod.eta <= 0.2);
  CHECK(mod.eta > 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    Vec dir = v2(g(rng), g(rng));
    dir.normalize();
    const Vec inner = 0.009 * dir, outer = 0.06 * dir;
    CHECK(mod.map->eval(inner) == f->eval(inner));
    CHECK((mod.map->eval(outer) - f->linear() * outer).norm() == 0.0);
  }
  // Independent sample of the derivative bound.
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int t = 0; t < 10000; ++t) {
    const Vec x = v2(u(rng), u(rng));
    const Mat d = mod.map->jacobian(x) - f->linear();
    CHECK_MESSAGE(Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(d)).singularValues()(0) <= mod.eta * (1 + 1e-6),
                  "x = ", x.transpose());
  }
}

TEST_CASE("bump-modified jacobian agrees with finite differences") {
  const auto f = saddle();
  BumpModifiedMap m(f, 0.02, 0.06);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.06, 0.06);
  PointBatch in(2, 16), out(2, 16), jac(4, 16);
  for (int t = 0; t < 16; ++t) {
    const Vec x = v2(u(rng), u(rng));
    in.set_point(t, x);
    const Mat fd = finite_difference_jacobian([&](const Vec& z) { return m.eval(z); }, x, 1e-7);
    CHECK((m.jacobian(x) - fd).cwiseAbs().maxCoeff() < 1e-6);
  }
  m.eval_batch(in, out);
  m.jacobian_batch(in, jac);
  for (int t = 0; t < 16; ++t) {
    CHECK((out.point(t) - m.eval(in.point(t))).norm() < 1e-15);
    const Mat j = m.jacobian(in.point(t));
    CHECK(std::fabs(jac.point(t)[1] - j(0, 1)) < 1e-14);
  }
}

TEST_CASE("unachievable eta is reported with the achieved value") {
  const auto f = quadratic_contraction();
  try {
    bump_modify(f, 0.01, 0.05, 1e-6);
    FAIL("expected EtaNotAchievable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EtaNotAchievable);
  }
}

TEST_CASE("inverse of a bump-modified map is exact outside the linear ball") {
  const auto f = saddle();
  auto m = std::make_shared<BumpModifiedMap>(f, 0.02, 0.06);
  InverseMap g(m);
  const Vec z = v2(0.3, 0.4);
  CHECK((g.eval(z) - f->linear().inverse() * z).norm() < 1e-16);
  const Vec w = v2(0.01, 0.03);
  CHECK((m->eval(g.eval(w)) - w).norm() < 1e-15);
}
