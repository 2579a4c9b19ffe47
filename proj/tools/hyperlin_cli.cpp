// hyperlin: batch front end. One command per process; all output goes to --out.
#include "hyperlin/config.hpp"
#include "hyperlin/error.hpp"
#include "hyperlin/exponents.hpp"
#include "hyperlin/linearize_hyperbolic.hpp"
#include "hyperlin/lp_foliation.hpp"
#include "hyperlin/report.hpp"
#include "hyperlin/verify.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace hyperlin;

namespace {

struct Run {
  std::string command;
  config::RunConfig cfg;
  fs::path out;
  report::KeyValue kv;

  void header() {
    kv.section("run");
    kv.put("command", command);
    kv.put("config", cfg.source);
    kv.put("seed", cfg.seed);
  }
  void finish(const std::string& status) {
    kv.section("status");
    kv.put("result", status);
    kv.write((out / "report.txt").string());
  }
};

Box box_half(const Box& b, double factor) {
  Box out = b;
  for (int a = 0; a < b.dim(); ++a) {
    const double c = 0.5 * (b.lo[a] + b.hi[a]), h = factor * b.half_width(a);
    out.lo[a] = c - h;
    out.hi[a] = c + h;
  }
  return out;
}

double min_half_width(const Box& b) {
  double h = INFINITY;
  for (int a = 0; a < b.dim(); ++a) h = std::min(h, b.half_width(a));
  return h;
}

// Where linearize reports, without running it.
Box report_box_for(const config::RunConfig& cfg, const dynamics::Map& map, const spectral::SpectrumDecomposition& dec) {
  const int n = map.dim();
  if (dec.contraction()) return Box::centered(n, cfg.cascade.half_width);
  if (dec.expansion()) return Box::centered(n, cfg.cascade.half_width / std::max(1.0, map.linear().norm()));
  return Box::centered(n, 0.25 * cfg.r0);
}

void put_residual(report::KeyValue& kv, const std::string& p, const verify::ResidualReport& r) {
  kv.put(p + ".max", r.max);
  kv.put(p + ".mean", r.mean);
  kv.put(p + ".inverse_max", r.inverse_max);
  kv.put(p + ".inverse_mean", r.inverse_mean);
  kv.put(p + ".samples", r.samples);
}

void put_diffeo(report::KeyValue& kv, const verify::DiffeoReport& d) {
  kv.put("diffeo.forward_inverse", d.forward_inverse);
  kv.put("diffeo.derivative_mismatch", d.derivative_mismatch);
  kv.put("diffeo.min_singular", d.min_singular);
  kv.put("diffeo.max_singular", d.max_singular);
  kv.put("diffeo.samples", d.samples);
}

void put_holder(report::KeyValue& kv, const std::string& p, const verify::HolderEstimate& h) {
  kv.put(p + ".exponent", h.exponent);
  kv.put(p + ".raw_slope", h.raw_slope);
  kv.put(p + ".ci_low", h.ci_low);
  kv.put(p + ".ci_high", h.ci_high);
  kv.put(p + ".sep_min", h.sep_min);
  kv.put(p + ".sep_max", h.sep_max);
  kv.put(p + ".pairs", h.pairs);
  kv.put(p + ".constant", h.constant);
}

verify::HolderEstimate derivative_exponent(const transform::Transform& chain, const Box& box,
                                           const config::RunConfig& cfg) {
  return verify::holder_exponent([&](const Vec& x) { return verify::flatten(chain.derivative(x)); },
                                 Vec::Zero(chain.dim()), min_half_width(box), cfg.holder, cfg.seed);
}

// Residuals, diffeomorphism checks and the derivative exponent of a chain.
void check_chain(Run& run, const dynamics::Map& map, const transform::Transform& chain, const Box& box,
                 const spectral::SpectrumDecomposition& dec) {
  const auto& cfg = run.cfg;
  auto& kv = run.kv;
  kv.section("residual");
  kv.put("box_half_width", min_half_width(box));
  put_residual(kv, "conjugacy", verify::conjugacy_residual(map, chain, map.linear(), box, cfg.samples, cfg.seed));
  put_diffeo(kv, verify::diffeo_check(chain, box, std::min(cfg.samples, 200), cfg.seed));
  kv.section("regularity");
  const double predicted = exponents::beta_overall(dec, cfg.epsilon).beta_overall;
  const auto h = derivative_exponent(chain, box, cfg);
  kv.put("predicted_beta", predicted);
  put_holder(kv, "derivative", h);
  kv.put("derivative.meets_prediction", h.exponent >= predicted - 0.1);
}

int cmd_analyze(Run& run) {
  auto& kv = run.kv;
  const auto& cfg = run.cfg;
  const auto dec = config::build_spectrum(cfg);
  kv.section("spectrum");
  kv.put("source", !cfg.spectrum_builtin.empty() ? "builtin " + cfg.spectrum_builtin
                   : !cfg.bands.empty()          ? std::string("bands")
                   : !cfg.moduli.empty()         ? std::string("moduli")
                                                 : std::string("map linear part"));
  report::put_spectrum(kv, dec);
  if (cfg.has_map()) {
    const auto map = config::build_map(cfg);
    kv.put("origin_residual", dynamics::origin_residual(*map));
    kv.put("moduli", spectral::eigenvalue_moduli(map->linear()));
  }
  const auto margins = config::build_margins(cfg, dec);
  kv.section("margins");
  report::put_margins(kv, margins);
  kv.section("conditions");
  const auto band = spectral::check_band_condition(dec);
  report::put_condition(kv, band);
  bool holds = band.holds;
  if (dec.mixed()) {
    const auto gap = spectral::check_gap_condition(dec, margins);
    report::put_condition(kv, gap);
    report::put_condition(kv, spectral::check_rs_condition(dec));
    report::put_condition(kv, spectral::check_foliation_condition(dec, margins));
    holds = holds && gap.holds;
  }
  kv.put("theorem_conditions_hold", holds);
  if (!holds) {
    run.finish("condition failure");
    return 2;
  }
  kv.section("exponents");
  // The conditions can hold with slack too thin for the chosen epsilon.
  try {
    report::put_exponents(kv, exponents::beta_overall(dec, cfg.epsilon));
  } catch (const Error& e) {
    kv.put("epsilon", cfg.epsilon);
    kv.put("error", std::string(e.what()));
  }
  run.finish("ok");
  return 0;
}

void put_foliation(report::KeyValue& kv, const std::string& p, const lp::FoliationResult& f) {
  kv.put(p + ".gamma1", f.gamma1);
  kv.put(p + ".gamma2", f.gamma2);
  kv.put(p + ".eta_inf", f.eta_inf);
  kv.put(p + ".contraction_estimate", f.contraction_estimate);
  kv.put(p + ".measured_contraction", f.measured_contraction);
  kv.put(p + ".tail_bound", f.tail_bound);
  kv.put(p + ".iterations", f.iterations);
  kv.put(p + ".derivative_mismatch", f.derivative_mismatch);
  kv.put(p + ".fixed_point_residual_v", f.fixed_point_residual_v);
  kv.put(p + ".fixed_point_residual_w", f.fixed_point_residual_w);
}

void write_log(const lp::FoliationResult& f, const fs::path& path) {
  report::Csv csv({"iteration", "delta_v", "delta_w", "ratio_v"});
  for (const auto& l : f.log) csv.row({static_cast<double>(l.iteration), l.delta_v, l.delta_w, l.ratio_v});
  csv.write(path.string());
}

int cmd_foliate(Run& run) {
  auto& kv = run.kv;
  const auto& cfg = run.cfg;
  const auto map = config::build_map(cfg);
  const auto dec = config::build_spectrum(cfg);
  if (!dec.mixed()) throw Error(ErrorCode::NotMixed, "foliations need contracting and expanding bands");
  const auto lin = spectral::make_linear_part(map->linear(), dec);
  const dynamics::MapPtr g =
      lin.identity_basis() ? map : std::make_shared<dynamics::BasisChangedMap>(map, lin.basis, lin.basis_inv);
  const auto mod = dynamics::bump_modify(g, cfg.r0, cfg.r1, cfg.eta_target);
  kv.section("bump");
  kv.put("r0", mod.r0);
  kv.put("r1", mod.r1);
  kv.put("eta", mod.eta);
  kv.put("eta_inf", mod.eta_inf);

  lp::LPParameters params = cfg.lp;
  if (!(params.eta_inf > 0.0)) params.eta_inf = mod.eta_inf;
  const int n = map->dim(), ns = static_cast<int>(lin.stable().size()), nu = n - ns;
  const double hw = 0.5 * cfg.r0;
  const auto stable = lp::stable_foliation(mod.map, lin.stable(), lin.unstable(), params,
                                           lp::Omega::centered(n, ns, hw, cfg.fol_x_res, cfg.fol_y_res));
  const auto unstable = lp::unstable_foliation(mod.map, lin.stable(), lin.unstable(), params,
                                               lp::Omega::centered(n, nu, hw, cfg.fol_x_res, cfg.fol_y_res));
  const auto inv = std::make_shared<dynamics::InverseMap>(mod.map);
  const struct {
    const char* name;
    const lp::FoliationResult* fol;
    const dynamics::Map* map;
    double predicted;
  } parts[] = {{"stable", &stable, mod.map.get(), exponents::beta_s(dec, cfg.epsilon)},
               {"unstable", &unstable, inv.get(), exponents::beta_u(dec, cfg.epsilon)}};
  for (const auto& part : parts) {
    kv.section(part.name);
    put_foliation(kv, "lp", *part.fol);
    const auto samples = verify::sample_box(box_half(part.fol->omega.box(), 0.5), cfg.samples, cfg.seed);
    kv.put("lp.equivalence_residual", lp::verify_lp_equivalence(*part.map, *part.fol, samples));
    const auto props = lp::foliation_properties(*part.map, *part.fol, cfg.samples, cfg.seed);
    kv.put("b1", props.b1);
    kv.put("b2", props.b2);
    kv.put("b4", props.b4);
    const auto h = lp::holder_check_Dq0(*part.fol, part.predicted, cfg.seed);
    kv.put("dq0.exponent", h.exponent);
    kv.put("dq0.predicted", h.predicted);
    kv.put("dq0.constant", h.constant);
    write_log(*part.fol, run.out / (std::string(part.name) + "_log.csv"));
    part.fol->h.save((run.out / (std::string(part.name) + "_h.csv")).string());
  }
  run.finish("ok");
  return 0;
}

void put_stages(report::KeyValue& kv, const std::string& p, const contraction::ContractionResult& r,
                report::Csv& diffs) {
  kv.put(p + ".stages", static_cast<int>(r.stages.size()));
  for (const auto& st : r.stages) {
    const std::string s = p + ".band" + std::to_string(st.band + 1);
    kv.put(s + ".eta", st.eta);
    kv.put(s + ".kmax", st.kmax);
    kv.put(s + ".iterations", st.iterations);
    kv.put(s + ".exact", st.exact);
    kv.put(s + ".decay_rate", st.decay_rate);
    kv.put(s + ".decay_r2", st.decay_r2);
    kv.put(s + ".stalled", st.stalled);
    kv.put(s + ".floor", st.floor);
    kv.put(s + ".graph_iterations", st.graph_iterations);
    kv.put(s + ".graph_residual", st.graph_residual);
    kv.put(s + ".jet_closure", st.jet_closure);
    kv.put(s + ".v_linearity", st.v_linearity);
    for (std::size_t k = 0; k < st.diffs.size(); ++k)
      diffs.row(std::vector<std::string>{p, std::to_string(st.band + 1), std::to_string(k + 1), report::fmt(st.diffs[k])});
  }
}

int cmd_linearize(Run& run) {
  auto& kv = run.kv;
  const auto& cfg = run.cfg;
  const auto map = config::build_map(cfg);
  const auto dec = config::build_spectrum(cfg);
  const auto lin = hyperbolic::linearize(map, dec, config::build_linearize_params(cfg));
  kv.section("linearize");
  kv.put("kind", lin.kind);
  kv.put("report_box_half_width", min_half_width(lin.report_box));
  report::Csv diffs({"factor", "band", "k", "diff"});
  if (lin.factor) put_stages(kv, "cascade", *lin.factor, diffs);
  if (lin.full) {
    const auto& h = *lin.full;
    kv.section("phases");
    kv.put("unstable_graph.iterations", h.g_u.iterations);
    kv.put("unstable_graph.residual", h.g_u.residual);
    kv.put("stable_graph.iterations", h.g_s.iterations);
    kv.put("stable_graph.residual", h.g_s.residual);
    kv.put("axis_residual", h.axis_residual);
    kv.put("bump.eta", h.eta);
    kv.put("bump.eta_inf", h.eta_inf);
    put_foliation(kv, "stable_foliation", h.stable);
    put_foliation(kv, "unstable_foliation", h.unstable);
    kv.put("decoupling_residual", h.decoupling_residual);
    put_stages(kv, "minus", h.minus, diffs);
    put_stages(kv, "plus", h.plus, diffs);
    put_residual(kv, "minus.residual",
                 verify::conjugacy_residual(*h.f_minus, *h.minus.chain, h.f_minus->linear(), box_half(h.minus.box, 0.5),
                                            cfg.samples, cfg.seed));
    const dynamics::InverseMap plus_inv(h.f_plus);
    put_residual(kv, "plus.residual",
                 verify::conjugacy_residual(plus_inv, *h.plus.chain, plus_inv.linear(), box_half(h.plus.box, 0.5),
                                            cfg.samples, cfg.seed));
  }
  diffs.write((run.out / "stage_diffs.csv").string());
  lin.chain->save_dir((run.out / "chain").string());
  check_chain(run, *map, *lin.chain, lin.report_box, dec);
  run.finish("ok");
  return 0;
}

int cmd_verify(Run& run, const std::string& chain_opt) {
  const auto& cfg = run.cfg;
  const auto map = config::build_map(cfg);
  const auto dec = config::build_spectrum(cfg);
  const fs::path dir = !chain_opt.empty()        ? fs::path(chain_opt)
                       : !cfg.chain_dir.empty() ? fs::path(cfg.chain_dir)
                                                : run.out / "chain";
  const auto chain = transform::Chain::load_dir(dir.string());
  run.kv.section("chain");
  run.kv.put("members", static_cast<int>(chain->members().size()));
  check_chain(run, *map, *chain, report_box_for(cfg, *map, dec), dec);
  run.finish("ok");
  return 0;
}

int cmd_sharpness(Run& run) {
  auto& kv = run.kv;
  const auto& cfg = run.cfg;
  if (cfg.sweep_term <= 0 || cfg.sweep_values.empty())
    throw Error(ErrorCode::ConfigError, cfg.source + ": sharpness needs [sharpness] term and values");
  const auto params = config::build_linearize_params(cfg);
  const auto rows = verify::sharpness_experiment(
      cfg.sweep_values,
      [&](double p) {
        auto member = cfg;
        member.terms[cfg.sweep_term - 1].coef = p;
        const auto map = config::build_map(member);
        // The spectrum moves with the parameter: cluster the member's own linear part.
        const auto dec = spectral::cluster_moduli(spectral::eigenvalue_moduli(map->linear()), cfg.gap_threshold,
                                                  cfg.hyperbolicity_tol);
        const auto lin = hyperbolic::linearize(map, dec, params);
        return verify::SharpnessMember{lin.chain, lin.report_box, exponents::beta_overall(dec, cfg.epsilon).beta_overall};
      },
      cfg.sweep_margin, cfg.seed);
  report::Csv csv({"parameter", "predicted", "measured", "constant", "ok", "error"});
  int ok = 0;
  for (const auto& r : rows) {
    ok += r.ok;
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    csv.row(std::vector<std::string>{report::fmt(r.parameter), report::fmt(r.predicted), report::fmt(r.measured),
                                     r.constant ? "true" : "false", r.ok ? "true" : "false", err});
  }
  csv.write((run.out / "sharpness.csv").string());
  kv.section("sharpness");
  kv.put("term", cfg.sweep_term);
  kv.put("margin", cfg.sweep_margin);
  kv.put("members", static_cast<int>(rows.size()));
  kv.put("members_ok", ok);
  kv.put("all_ok", ok == static_cast<int>(rows.size()));
  run.finish("ok");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth linearization of hyperbolic fixed points"};
  app.require_subcommand(1);
  std::string config_path, out_dir, chain_dir;
  unsigned seed = 0;
  bool seed_given = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (default: [run] out)");
    sub->add_option("--seed", seed, "sample seed, overrides [run] seed")->each([&](const std::string&) { seed_given = true; });
  };
  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "spectral decomposition, condition checks and exponents"},
      {"foliate", "stable and unstable foliations of a mixed spectrum"},
      {"linearize", "conjugacy chain, residuals and derivative regularity"},
      {"verify", "re-check an exported chain against the map"},
      {"sharpness", "derivative exponent across a one-parameter family"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    subs.push_back(sub);
  }
  subs[3]->add_option("--chain", chain_dir, "exported chain directory (default: <out>/chain)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  Run run;
  for (auto* s : subs)
    if (s->parsed()) run.command = s->get_name();
  try {
    run.cfg = config::load(config_path);
    if (seed_given) run.cfg.seed = seed;
    if (out_dir.empty()) out_dir = run.cfg.out_dir;
    if (out_dir.empty()) throw Error(ErrorCode::ConfigError, "no output directory: pass --out or set [run] out");
    run.out = out_dir;
    fs::create_directories(run.out);
  } catch (const Error& e) {
    std::cerr << "hyperlin: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "hyperlin: " << e.what() << '\n';
    return 4;
  }

  run.header();
  try {
    if (run.command == "analyze") return cmd_analyze(run);
    if (run.command == "foliate") return cmd_foliate(run);
    if (run.command == "linearize") return cmd_linearize(run);
    if (run.command == "verify") return cmd_verify(run, chain_dir);
    return cmd_sharpness(run);
  } catch (const Error& e) {
    std::cerr << "hyperlin " << run.command << ": " << e.what() << '\n';
    run.kv.section("error");
    run.kv.put("code", std::string(error_name(e.code())));
    run.kv.put("message", std::string(e.what()));
    run.finish("error");
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "hyperlin " << run.command << ": " << e.what() << '\n';
    run.kv.section("error");
    run.kv.put("message", std::string(e.what()));
    run.finish("error");
    return 3;
  }
}
