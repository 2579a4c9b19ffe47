#include "hyperlin/config.hpp"

#include "hyperlin/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hyperlin::config {

namespace {

namespace pt = boost::property_tree;

using dynamics::PolyTerm;

// section.key -> line, for messages about values the INI parser accepted.
std::map<std::string, int> index_lines(const std::string& text) {
  std::map<std::string, int> out;
  std::istringstream in(text);
  std::string line, section;
  for (int no = 1; std::getline(in, line); ++no) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#' || line[b] == ';') continue;
    if (line[b] == '[') {
      const auto e = line.find(']', b);
      section = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(b, eq - b);
    key.erase(key.find_last_not_of(" \t") + 1);
    out.emplace(section + "." + key, no);
  }
  return out;
}

struct Context {
  std::string source;
  std::map<std::string, int> lines;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    const auto it = lines.find(field);
    std::ostringstream os;
    os << source;
    if (it != lines.end()) os << ':' << it->second;
    os << ": " << field << ": " << what;
    throw Error(ErrorCode::ConfigError, os.str());
  }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Throws std::invalid_argument unless the whole word is a finite number.
double to_double(const std::string& w) {
  std::size_t used = 0;
  const double v = std::stod(w, &used);
  if (used != w.size() || !std::isfinite(v)) throw std::invalid_argument("not a finite number: '" + w + "'");
  return v;
}

long to_long(const std::string& w) {
  std::size_t used = 0;
  const long v = std::stol(w, &used);
  if (used != w.size()) throw std::invalid_argument("not an integer: '" + w + "'");
  return v;
}

double single_double(const std::string& s) {
  const auto w = words(s);
  if (w.size() != 1) throw std::invalid_argument("expected one number");
  return to_double(w[0]);
}

int single_int(const std::string& s) {
  const auto w = words(s);
  if (w.size() != 1) throw std::invalid_argument("expected one integer");
  return static_cast<int>(to_long(w[0]));
}

std::vector<double> double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& w : words(s)) out.push_back(to_double(w));
  if (out.empty()) throw std::invalid_argument("expected at least one number");
  return out;
}

// "lo hi, lo hi, ..."; a single number is a point band.
std::vector<spectral::Band> band_list(const std::string& s) {
  std::vector<spectral::Band> out;
  for (const auto& part : split(s, ',')) {
    const auto w = words(part);
    if (w.size() == 1) {
      const double v = to_double(w[0]);
      out.push_back({v, v});
    } else if (w.size() == 2) {
      out.push_back({to_double(w[0]), to_double(w[1])});
    } else {
      throw std::invalid_argument("each band is 'lo hi' or a single modulus");
    }
  }
  return out;
}

double positive(double v) {
  if (!(v > 0.0)) throw std::invalid_argument("must be positive");
  return v;
}

int at_least(int v, int lo) {
  if (v < lo) throw std::invalid_argument("must be at least " + std::to_string(lo));
  return v;
}

double gamma_value(const std::string& s) {
  const auto w = words(s);
  if (w.size() == 1 && w[0] == "auto") return 0.0;
  return positive(single_double(s));
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<unsigned>(at_least(single_int(v), 0)); }},
      {"run.out", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"map.builtin", [](RunConfig& c, const std::string& v) { c.map_builtin = v; }},
      {"map.dimension", [](RunConfig& c, const std::string& v) { c.dim = at_least(single_int(v), 1); }},
      {"map.domain_half_width", [](RunConfig& c, const std::string& v) { c.domain_half_width = positive(single_double(v)); }},
      {"spectrum.builtin", [](RunConfig& c, const std::string& v) { c.spectrum_builtin = v; }},
      {"spectrum.bands", [](RunConfig& c, const std::string& v) { c.bands = band_list(v); }},
      {"spectrum.moduli", [](RunConfig& c, const std::string& v) { c.moduli = double_list(v); }},
      {"spectrum.gap_threshold", [](RunConfig& c, const std::string& v) { c.gap_threshold = positive(single_double(v)); }},
      {"spectrum.hyperbolicity_tol",
       [](RunConfig& c, const std::string& v) { c.hyperbolicity_tol = positive(single_double(v)); }},
      {"exponents.epsilon",
       [](RunConfig& c, const std::string& v) {
         c.epsilon = single_double(v);
         if (c.epsilon < 0.0) throw std::invalid_argument("must be non-negative");
       }},
      {"exponents.delta",
       [](RunConfig& c, const std::string& v) { c.delta = positive(single_double(v)); }},
      {"bump.r0", [](RunConfig& c, const std::string& v) { c.r0 = positive(single_double(v)); }},
      {"bump.r1", [](RunConfig& c, const std::string& v) { c.r1 = positive(single_double(v)); }},
      {"bump.eta_target", [](RunConfig& c, const std::string& v) { c.eta_target = positive(single_double(v)); }},
      {"lp.gamma1", [](RunConfig& c, const std::string& v) { c.lp.gamma1 = gamma_value(v); }},
      {"lp.gamma2", [](RunConfig& c, const std::string& v) { c.lp.gamma2 = gamma_value(v); }},
      {"lp.N", [](RunConfig& c, const std::string& v) { c.lp.N = at_least(single_int(v), 1); }},
      {"lp.K_tail", [](RunConfig& c, const std::string& v) { c.lp.K_tail = at_least(single_int(v), 1); }},
      {"lp.tol", [](RunConfig& c, const std::string& v) { c.lp.tol = positive(single_double(v)); }},
      {"lp.max_iter", [](RunConfig& c, const std::string& v) { c.lp.max_iter = at_least(single_int(v), 1); }},
      {"lp.eta_inf", [](RunConfig& c, const std::string& v) { c.lp.eta_inf = positive(single_double(v)); }},
      {"lp.derivative_tol", [](RunConfig& c, const std::string& v) { c.lp.derivative_tol = positive(single_double(v)); }},
      {"foliation.x_resolution", [](RunConfig& c, const std::string& v) { c.fol_x_res = at_least(single_int(v), 3); }},
      {"foliation.y_resolution", [](RunConfig& c, const std::string& v) { c.fol_y_res = at_least(single_int(v), 2); }},
      {"cascade.half_width", [](RunConfig& c, const std::string& v) { c.cascade.half_width = positive(single_double(v)); }},
      {"cascade.resolution", [](RunConfig& c, const std::string& v) { c.cascade.resolution = at_least(single_int(v), 3); }},
      {"cascade.graph_refine", [](RunConfig& c, const std::string& v) { c.cascade.graph_refine = at_least(single_int(v), 1); }},
      {"cascade.tol", [](RunConfig& c, const std::string& v) { c.cascade.tol = positive(single_double(v)); }},
      {"cascade.stall_tol", [](RunConfig& c, const std::string& v) { c.cascade.stall_tol = positive(single_double(v)); }},
      {"cascade.kmax", [](RunConfig& c, const std::string& v) { c.cascade.kmax = at_least(single_int(v), 1); }},
      {"cascade.slow_factor", [](RunConfig& c, const std::string& v) { c.cascade.slow_factor = positive(single_double(v)); }},
      {"hyperbolic.graph_resolution",
       [](RunConfig& c, const std::string& v) { c.graph_resolution = at_least(single_int(v), 3); }},
      {"verify.samples", [](RunConfig& c, const std::string& v) { c.samples = at_least(single_int(v), 1); }},
      {"verify.chain", [](RunConfig& c, const std::string& v) { c.chain_dir = v; }},
      {"verify.holder_sep_lo", [](RunConfig& c, const std::string& v) { c.holder.sep_lo = positive(single_double(v)); }},
      {"verify.holder_sep_hi", [](RunConfig& c, const std::string& v) { c.holder.sep_hi = positive(single_double(v)); }},
      {"verify.holder_families", [](RunConfig& c, const std::string& v) { c.holder.families = at_least(single_int(v), 2); }},
      {"verify.holder_scales", [](RunConfig& c, const std::string& v) { c.holder.scales = at_least(single_int(v), 3); }},
      {"sharpness.term", [](RunConfig& c, const std::string& v) { c.sweep_term = at_least(single_int(v), 1); }},
      {"sharpness.values", [](RunConfig& c, const std::string& v) { c.sweep_values = double_list(v); }},
      {"sharpness.margin", [](RunConfig& c, const std::string& v) { c.sweep_margin = positive(single_double(v)); }},
  };
  return table;
}

bool is_term_key(const std::string& key) {
  if (key.rfind("term", 0) != 0 || key.size() == 4) return false;
  return key.find_first_not_of("0123456789", 4) == std::string::npos;
}

PolyTerm term(double c, std::vector<int> e, int out) { return {c, std::move(e), out}; }

struct MapBuiltin {
  int dim;
  std::vector<PolyTerm> terms;
};

const std::map<std::string, MapBuiltin>& map_table() {
  static const std::map<std::string, MapBuiltin> table = {
      // (0.2 x1 + x2^2, 0.5 x2); conjugacy (x1 - 20 x2^2, x2)
      {"contraction_quadratic", {2, {term(0.2, {1, 0}, 0), term(1.0, {0, 2}, 0), term(0.5, {0, 1}, 1)}}},
      {"contraction_coupled",
       {2,
        {term(0.2, {1, 0}, 0), term(1.0, {0, 2}, 0), term(1.0, {1, 1}, 0), term(-20.0, {0, 3}, 0),
         term(0.5, {0, 1}, 1)}}},
      // (0.5 x1 + x1 x2, 2 x2); conjugacy x1 prod_j (1 + x2 2^-j)^-1
      {"hyperbolic_bilinear", {2, {term(0.5, {1, 0}, 0), term(1.0, {1, 1}, 0), term(2.0, {0, 1}, 1)}}},
      // (0.5 x1 + x2^2, 2 x2); unstable graph (2/7) x2^2
      {"hyperbolic_quadratic", {2, {term(0.5, {1, 0}, 0), term(1.0, {0, 2}, 0), term(2.0, {0, 1}, 1)}}},
      {"hyperbolic_curved",
       {2,
        {term(0.5, {1, 0}, 0), term(1.0, {0, 2}, 0), term(1.0, {1, 1}, 0), term(2.0, {0, 1}, 1),
         term(1.0, {2, 0}, 1)}}},
  };
  return table;
}

const std::map<std::string, std::vector<spectral::Band>>& spectrum_table() {
  static const std::map<std::string, std::vector<spectral::Band>> table = {
      {"remark5", {{1.0 / 16 + 1e-3, 1.0 / 8}, {1.0 / 8 + 1e-3, 1.0 / 4}, {1.0 / 4 + 1e-3, 1.0 / 2}}},
      {"remark7", {{0.1, 1.0 / 6}, {2.0, 3.0}, {9.0, 10.0}}},
      {"remark8", {{0.1, 0.1}, {1.0 / 6, 1.0 / 6}, {2.0, 2.0}, {5.0, 5.0}, {10.0, 10.0}}},
  };
  return table;
}

void validate(RunConfig& c, const Context& ctx) {
  if (!c.map_builtin.empty()) {
    const auto it = map_table().find(c.map_builtin);
    if (it == map_table().end()) ctx.fail("map.builtin", "unknown builtin '" + c.map_builtin + "'");
    if (!c.terms.empty()) ctx.fail("map.builtin", "give either a builtin or terms, not both");
    if (c.dim != 0 && c.dim != it->second.dim) ctx.fail("map.dimension", "does not match the builtin");
    c.dim = it->second.dim;
    c.terms = it->second.terms;
  } else if (c.dim > 0 && c.terms.empty()) {
    ctx.fail("map.dimension", "a map needs at least one term");
  }
  if (!c.spectrum_builtin.empty()) {
    const auto it = spectrum_table().find(c.spectrum_builtin);
    if (it == spectrum_table().end()) ctx.fail("spectrum.builtin", "unknown builtin '" + c.spectrum_builtin + "'");
    if (!c.bands.empty() || !c.moduli.empty()) ctx.fail("spectrum.builtin", "give one of builtin, bands, moduli");
  }
  if (!c.bands.empty() && !c.moduli.empty()) ctx.fail("spectrum.bands", "give bands or moduli, not both");
  if (!c.has_map() && !c.has_spectrum()) ctx.fail("map.builtin", "the config defines neither a map nor a spectrum");
  try {
    if (!c.bands.empty()) spectral::from_bands(c.bands, c.hyperbolicity_tol);
    if (!c.moduli.empty()) spectral::cluster_moduli(c.moduli, c.gap_threshold, c.hyperbolicity_tol);
  } catch (const Error& e) {
    ctx.fail(c.bands.empty() ? "spectrum.moduli" : "spectrum.bands", e.what());
  }
  if (!(c.r0 < c.r1)) ctx.fail("bump.r1", "needs r0 < r1");
  if (c.lp.N > c.lp.K_tail) ctx.fail("lp.K_tail", "needs N <= K_tail");
  if ((c.lp.gamma1 > 0.0) != (c.lp.gamma2 > 0.0)) ctx.fail("lp.gamma2", "set both gammas or neither");
  if (!(c.holder.sep_lo < c.holder.sep_hi)) ctx.fail("verify.holder_sep_hi", "needs holder_sep_lo < holder_sep_hi");
  if (c.sweep_term > 0 && c.sweep_term > static_cast<int>(c.terms.size()))
    ctx.fail("sharpness.term", "no such term (terms are numbered from 1 in file order)");
  if (!c.sweep_values.empty() && c.sweep_term <= 0) ctx.fail("sharpness.values", "needs sharpness.term");
}

}  // namespace

PolyTerm parse_term(const std::string& text, int dim) {
  const auto parts = split(text, '|');
  if (parts.size() != 3) throw std::invalid_argument("expected 'coefficient | exponents | output'");
  PolyTerm t;
  t.coef = single_double(parts[0]);
  for (const auto& w : words(parts[1])) {
    const long e = to_long(w);
    if (e < 0) throw std::invalid_argument("exponents must be non-negative");
    t.exponents.push_back(static_cast<int>(e));
  }
  if (static_cast<int>(t.exponents.size()) != dim)
    throw std::invalid_argument("expected " + std::to_string(dim) + " exponents");
  t.output = single_int(parts[2]);
  if (t.output < 0 || t.output >= dim) throw std::invalid_argument("output index out of range");
  return t;
}

RunConfig parse(const std::string& text, const std::string& source) {
  Context ctx{source, index_lines(text)};
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  c.source = source;
  // Dimension first: terms need it.
  if (const auto d = tree.get_child_optional(pt::ptree::path_type("map/dimension", '/'))) {
    try {
      c.dim = at_least(single_int(d->data()), 1);
    } catch (const std::exception& e) {
      ctx.fail("map.dimension", e.what());
    }
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) ctx.fail(section, "keys must sit inside a [section]");
    for (const auto& [key, node] : body) {
      const std::string field = section + "." + key;
      const std::string& value = node.data();
      try {
        if (section == "map" && is_term_key(key)) {
          if (c.dim <= 0) throw std::invalid_argument("map.dimension must be given before terms");
          c.terms.push_back(parse_term(value, c.dim));
          continue;
        }
        const auto it = setters().find(field);
        if (it == setters().end()) ctx.fail(field, "unknown key");
        it->second(c, value);
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        ctx.fail(field, e.what());
      }
    }
  }
  validate(c, ctx);
  return c;
}

RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::vector<std::string> map_builtins() {
  std::vector<std::string> out;
  for (const auto& [k, v] : map_table()) out.push_back(k);
  return out;
}

std::vector<std::string> spectrum_builtins() {
  std::vector<std::string> out;
  for (const auto& [k, v] : spectrum_table()) out.push_back(k);
  return out;
}

dynamics::MapPtr build_map(const RunConfig& cfg) {
  if (!cfg.has_map()) throw Error(ErrorCode::ConfigError, cfg.source + ": this command needs a [map]");
  const Box domain = cfg.domain_half_width > 0.0 ? Box::centered(cfg.dim, cfg.domain_half_width)
                                                 : dynamics::unbounded_box(cfg.dim);
  return std::make_shared<dynamics::PolynomialMap>(cfg.dim, cfg.terms, domain);
}

spectral::SpectrumDecomposition build_spectrum(const RunConfig& cfg) {
  if (!cfg.spectrum_builtin.empty()) return spectral::from_bands(spectrum_table().at(cfg.spectrum_builtin));
  if (!cfg.bands.empty()) return spectral::from_bands(cfg.bands, cfg.hyperbolicity_tol);
  if (!cfg.moduli.empty()) return spectral::cluster_moduli(cfg.moduli, cfg.gap_threshold, cfg.hyperbolicity_tol);
  const auto map = build_map(cfg);
  return spectral::cluster_moduli(spectral::eigenvalue_moduli(map->linear()), cfg.gap_threshold, cfg.hyperbolicity_tol);
}

spectral::Margins build_margins(const RunConfig& cfg, const spectral::SpectrumDecomposition& dec) {
  return cfg.delta > 0.0 ? spectral::make_margins(dec, cfg.delta) : spectral::default_margins(dec);
}

hyperbolic::LinearizeParams build_linearize_params(const RunConfig& cfg) {
  hyperbolic::LinearizeParams p;
  p.contraction = cfg.cascade;
  p.contraction.seed = cfg.seed;
  auto& h = p.hyperbolic;
  h.r0 = cfg.r0;
  h.r1 = cfg.r1;
  h.eta_target = cfg.eta_target;
  h.graph_resolution = cfg.graph_resolution;
  h.fol_x_res = cfg.fol_x_res;
  h.fol_y_res = cfg.fol_y_res;
  h.lp = cfg.lp;
  h.factor = cfg.cascade;
  h.factor.seed = cfg.seed;
  h.seed = cfg.seed;
  return p;
}

}  // namespace hyperlin::config
