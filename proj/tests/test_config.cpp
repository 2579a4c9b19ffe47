#include "doctest.h"

#include "hyperlin/config.hpp"
#include "hyperlin/error.hpp"
#include "hyperlin/report.hpp"

#include <string>

using namespace hyperlin;

namespace {

std::string config_error(const std::string& text) {
  try {
    config::parse(text, "t.ini");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("full configuration round trip") {
  const auto c = config::parse(R"(# planar contraction
[run]
seed = 11
out = results

[map]
dimension = 2
term1 = 0.2 | 1 0 | 0
term2 = 1.0 | 0 2 | 0
term3 = 0.5 | 0 1 | 1

[lp]
gamma1 = auto
gamma2 = auto
N = 6
K_tail = 40

[cascade]
resolution = 33
tol = 1e-11

[exponents]
epsilon = 0.01
)");
  CHECK(c.seed == 11);
  CHECK(c.out_dir == "results");
  REQUIRE(c.terms.size() == 3);
  CHECK(c.terms[1].coef == 1.0);
  CHECK(c.terms[1].exponents == std::vector<int>{0, 2});
  CHECK(c.terms[2].output == 1);
  CHECK(c.lp.gamma1 == 0.0);
  CHECK(c.lp.N == 6);
  CHECK(c.lp.K_tail == 40);
  CHECK(c.cascade.resolution == 33);
  CHECK(c.cascade.tol == 1e-11);
  CHECK(c.epsilon == 0.01);
  const auto map = config::build_map(c);
  Vec x(2);
  x << 0.1, 0.2;
  CHECK(map->eval(x)[0] == doctest::Approx(0.02 + 0.04));
  const auto dec = config::build_spectrum(c);
  REQUIRE(dec.m() == 2);
  CHECK(dec.contraction());
  CHECK(dec.bands[0].lo == doctest::Approx(0.2));
}

TEST_CASE("builtins") {
  const auto c = config::parse("[map]\nbuiltin = hyperbolic_bilinear\n[spectrum]\nbuiltin = remark7\n");
  CHECK(c.dim == 2);
  CHECK(c.terms.size() == 3);
  const auto dec = config::build_spectrum(c);
  CHECK(dec.m() == 3);
  CHECK(dec.d == 1);
  for (const auto& name : config::spectrum_builtins())
    CHECK_NOTHROW(config::build_spectrum(config::parse("[spectrum]\nbuiltin = " + name + "\n")));
  for (const auto& name : config::map_builtins()) {
    const auto m = config::build_map(config::parse("[map]\nbuiltin = " + name + "\n"));
    CHECK(dynamics::origin_residual(*m) == 0.0);
  }
}

TEST_CASE("explicit bands and moduli") {
  const auto b = config::parse("[spectrum]\nbands = 0.1 0.16666666666666667, 2 3, 9 10\n");
  REQUIRE(b.bands.size() == 3);
  CHECK(b.bands[1].hi == 3.0);
  const auto p = config::parse("[spectrum]\nbands = 0.1, 0.5\n");
  CHECK(p.bands[0].lo == p.bands[0].hi);
  const auto m = config::build_spectrum(config::parse("[spectrum]\nmoduli = 0.5 0.55 2\n"));
  CHECK(m.m() == 2);
}

TEST_CASE("errors name the line and the field") {
  CHECK(contains(config_error("[map]\ndimension = 2\nbogus = 1\n"), "t.ini:3: map.bogus: unknown key"));
  CHECK(contains(config_error("[lp]\nN = eight\n[spectrum]\nmoduli = 0.5\n"), "t.ini:2: lp.N"));
  CHECK(contains(config_error("[map]\ndimension = 2\nterm1 = 1 | 1 0 0 | 0\n"), "expected 2 exponents"));
  CHECK(contains(config_error("[map]\ndimension = 2\nterm1 = 1 | 1 0 | 2\n"), "output index out of range"));
  CHECK(contains(config_error("[map]\ndimension = 2\nterm1 = 1 | 1 0\n"), "coefficient | exponents | output"));
  CHECK(contains(config_error("[map]\nbuiltin = nope\n"), "unknown builtin"));
  CHECK(contains(config_error("[bump]\nr0 = 0.1\nr1 = 0.05\n[spectrum]\nmoduli = 0.5\n"), "r0 < r1"));
  CHECK(contains(config_error("[lp]\ngamma1 = 0.7\n[spectrum]\nmoduli = 0.5\n"), "both gammas"));
  CHECK(contains(config_error("[spectrum]\nbands = 0.5 0.4\n"), "spectrum.bands"));
  CHECK(contains(config_error("[spectrum]\nbands = 0.5 1.0\n"), "spectrum.bands"));
  CHECK(contains(config_error("[run]\nseed = 1\n"), "neither a map nor a spectrum"));
  CHECK(contains(config_error("[lp]\nN = 9\nK_tail = 8\n[spectrum]\nmoduli = 0.5\n"), "t.ini:3: lp.K_tail"));
  CHECK(contains(config_error("[a]\nk = 1\nk = 2\n"), "t.ini:3"));
  CHECK(contains(config_error("[map]\ndimension = 1\nterm1 = 0.5 | 1 | 0\n[sharpness]\nterm = 3\n"), "no such term"));
  CHECK(contains(config_error("[cascade]\ntol = 1e-12x\n[spectrum]\nmoduli = 0.5\n"), "cascade.tol"));
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(config::load("/nonexistent/run.ini"), Error);
}

TEST_CASE("report formatting keeps 17 significant digits") {
  CHECK(report::fmt(0.1) == "0.10000000000000001");
  CHECK(report::fmt(2.0) == "2");
  report::KeyValue kv;
  kv.section("a");
  kv.put("x", 1.0 / 3.0);
  kv.put("flag", true);
  kv.put("list", std::vector<double>{1.0, 0.5});
  kv.section("b");
  kv.put("n", 3);
  CHECK(kv.str() == "[a]\nx = 0.33333333333333331\nflag = true\nlist = 1 0.5\n\n[b]\nn = 3\n");
  report::Csv csv({"a", "b"});
  CHECK_THROWS_AS(csv.row(std::vector<double>{1.0}), Error);
}
