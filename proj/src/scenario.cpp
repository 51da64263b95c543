#include "gerbe/scenario.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gerbe {

using nlohmann::json;

namespace {

std::vector<ScalarExpr> parse_expr_list(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw LoadError(what + " must be an array of expressions");
  std::vector<ScalarExpr> out;
  for (const auto& e : arr) out.push_back(ScalarExpr::parse(e.get<std::string>()));
  return out;
}

std::vector<std::vector<ScalarExpr>> parse_expr_grid(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw LoadError(what + " must be an array of expression rows");
  std::vector<std::vector<ScalarExpr>> out;
  for (const auto& row : arr) out.push_back(parse_expr_list(row, what));
  return out;
}

Chart parse_chart(const json& j) {
  Chart c;
  c.dim = j.at("dim").get<int>();
  if (c.dim < 1 || c.dim > 3) throw LoadError("chart dim must be 1..3");
  const auto& box = j.at("box");
  if (int(box.size()) != c.dim) throw LoadError("chart box must have dim intervals");
  for (int i = 0; i < c.dim; ++i) {
    c.box[i].lo = box[i][0].get<double>();
    c.box[i].hi = box[i][1].get<double>();
    if (!(c.box[i].lo < c.box[i].hi)) throw LoadError("chart box interval is empty");
  }
  return c;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(row);
  }
  return rows;
}

json residuals_to_json(const std::map<std::string, double>& residuals) {
  json out = json::object();
  for (const auto& [k, v] : residuals) out[k] = v;
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

}  // namespace

const Chart& Scenario::chart(const std::string& id) const {
  auto it = charts.find(id);
  if (it == charts.end()) throw LoadError("unknown chart '" + id + "'");
  return it->second;
}
const ConnectionPtr& Scenario::connection(const std::string& id) const {
  auto it = connections.find(id);
  if (it == connections.end()) throw LoadError("unknown connection '" + id + "'");
  return it->second;
}
const GaugePtr& Scenario::gauge(const std::string& id) const {
  auto it = gauges.find(id);
  if (it == gauges.end()) throw LoadError("unknown gauge transformation '" + id + "'");
  return it->second;
}
const Gauge2Transformation& Scenario::gauge2(const std::string& id) const {
  auto it = gauge2s.find(id);
  if (it == gauge2s.end()) throw LoadError("unknown gauge 2-transformation '" + id + "'");
  return it->second;
}
const Path& Scenario::path(const std::string& id) const {
  auto it = paths.find(id);
  if (it == paths.end()) throw LoadError("unknown path '" + id + "'");
  return it->second;
}
const Bigon& Scenario::bigon(const std::string& id) const {
  auto it = bigons.find(id);
  if (it == bigons.end()) throw LoadError("unknown bigon '" + id + "'");
  return it->second;
}
const Itinerary& Scenario::itinerary(const std::string& id) const {
  auto it = itineraries.find(id);
  if (it == itineraries.end()) throw LoadError("unknown itinerary '" + id + "'");
  return it->second;
}
std::string Scenario::arg(const std::string& key) const {
  auto it = args.find(key);
  if (it == args.end()) throw LoadError("scenario does not set args." + key);
  return it->second;
}

Scenario load_scenario_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw LoadError("cannot parse " + origin + ": " + e.what());
  }
  if (j.value("version", 0) != 1) throw LoadError(origin + ": unsupported scenario version");

  Scenario sc;
  sc.cm = instance(crossed_module_name_from_string(j.at("crossed_module").get<std::string>()));
  sc.seed = j.value("seed", 0ull);
  if (j.contains("integrator")) {
    const auto& ji = j["integrator"];
    sc.cfg.n_steps = ji.value("n_steps", sc.cfg.n_steps);
    std::string scheme = ji.value("scheme", std::string("cf_midpoint"));
    if (scheme == "cf_midpoint") sc.cfg.scheme = Scheme::cf_midpoint;
    else if (scheme == "rk4_projected") sc.cfg.scheme = Scheme::rk4_projected;
    else throw LoadError("unknown integrator scheme " + scheme);
    sc.cfg.richardson = ji.value("richardson", sc.cfg.richardson);
    sc.cfg.validate();
  }

  for (const auto& jc : j.value("charts", json::array()))
    sc.charts.emplace(jc.at("id").get<std::string>(), parse_chart(jc));

  for (const auto& jc : j.value("connections", json::array())) {
    std::string id = jc.at("id").get<std::string>();
    const Chart& chart = sc.chart(jc.at("chart").get<std::string>());
    OneForm A = jc.contains("A") && jc["A"].is_string() && jc["A"] == "zero"
                    ? OneForm::zero(chart, sc.cm->G())
                    : OneForm::from_exprs(chart, sc.cm->G(), parse_expr_grid(jc.at("A"), "A"));
    ConnectionPtr conn;
    if (jc.contains("B") && jc["B"].is_string()) {
      std::string mode = jc["B"].get<std::string>();
      if (mode == "fake_flat") {
        conn = make_fake_flat(sc.cm, A);
      } else if (mode == "zero") {
        conn = make_connection(sc.cm, chart, A, TwoForm::zero(chart, sc.cm->H()));
      } else {
        throw LoadError("connection B must be an expression grid, \"zero\" or \"fake_flat\"");
      }
    } else {
      TwoForm B = TwoForm::from_exprs(chart, sc.cm->H(), parse_expr_grid(jc.at("B"), "B"));
      conn = make_connection(sc.cm, chart, A, B);
    }
    sc.connections.emplace(id, conn);
  }

  for (const auto& jg : j.value("gauges", json::array())) {
    std::string id = jg.at("id").get<std::string>();
    const ConnectionPtr& src = sc.connection(jg.at("connection").get<std::string>());
    GroupMap g = GroupMap::from_generator(src->chart, sc.cm->G(),
                                          parse_expr_list(jg.at("g"), "gauge g"));
    OneForm phi = jg.contains("phi") && jg["phi"].is_string()
                      ? OneForm::zero(src->chart, sc.cm->H())
                      : OneForm::from_exprs(src->chart, sc.cm->H(),
                                            parse_expr_grid(jg.at("phi"), "gauge phi"));
    GaugePtr gt = apply_gauge(src, g, phi);
    if (jg.contains("target_id"))
      sc.connections.emplace(jg["target_id"].get<std::string>(), gt->target);
    sc.gauges.emplace(id, gt);
  }

  for (const auto& ja : j.value("gauge2s", json::array())) {
    std::string id = ja.at("id").get<std::string>();
    const GaugePtr& src = sc.gauge(ja.at("gauge").get<std::string>());
    GroupMap a = GroupMap::from_generator(src->source->chart, sc.cm->H(),
                                          parse_expr_list(ja.at("a"), "gauge2 a"));
    sc.gauge2s.emplace(id, make_gauge2(src, a));
  }

  for (const auto& jp : j.value("paths", json::array())) {
    std::string id = jp.at("id").get<std::string>();
    const Chart& chart = sc.chart(jp.at("chart").get<std::string>());
    Path p = Path::from_exprs(chart, parse_expr_list(jp.at("components"), "path"),
                              jp.value("sitting", false));
    p.check_in_chart();
    sc.paths.emplace(id, p);
  }

  for (const auto& jb : j.value("bigons", json::array())) {
    std::string id = jb.at("id").get<std::string>();
    const Chart& chart = sc.chart(jb.at("chart").get<std::string>());
    Bigon b = Bigon::from_exprs(chart, parse_expr_list(jb.at("components"), "bigon"));
    b.require_bigon();
    sc.bigons.emplace(id, b);
  }

  for (const auto& ji : j.value("itineraries", json::array())) {
    Itinerary itin;
    for (const auto& leg : ji.at("legs"))
      itin.push_back(ItineraryLeg{leg[0].get<std::string>(), leg[1].get<double>(),
                                  leg[2].get<double>()});
    sc.itineraries.emplace(ji.at("id").get<std::string>(), itin);
  }

  if (j.contains("bundle")) {
    const auto& jb = j["bundle"];
    std::vector<CoverChart> charts;
    for (const auto& jcov : jb.at("charts")) {
      std::string cid = jcov.at("id").get<std::string>();
      Chart patch = jcov.contains("box") ? parse_chart(jcov) : sc.connection(cid)->chart;
      charts.push_back(CoverChart{cid, patch, sc.connection(cid)});
    }
    std::vector<TransitionDatum> transitions;
    for (const auto& jt : jb.value("transitions", json::array())) {
      TransitionDatum t;
      t.from = jt.at("from").get<std::string>();
      t.to = jt.at("to").get<std::string>();
      t.overlap = parse_chart(jt.at("overlap"));
      t.gt = sc.gauge(jt.at("gauge").get<std::string>());
      transitions.push_back(t);
    }
    std::vector<Cocycle2> cocycles;
    for (const auto& jcc : jb.value("cocycles", json::array())) {
      Cocycle2 c;
      c.i = jcc.at("i").get<std::string>();
      c.j = jcc.at("j").get<std::string>();
      c.k = jcc.at("k").get<std::string>();
      // the 2-cell sits over the composite of the declared transitions; the
      // (i, k) transition is derived from it
      GaugePtr gij, gjk;
      for (const auto& t : transitions) {
        if (t.from == c.i && t.to == c.j) gij = t.gt;
        if (t.from == c.j && t.to == c.k) gjk = t.gt;
      }
      if (!gij || !gjk)
        throw LoadError("cocycle (" + c.i + "," + c.j + "," + c.k +
                        ") needs declared transitions i->j and j->k");
      GaugePtr composite = compose_gauge(gjk, gij);
      GroupMap a = GroupMap::from_generator(composite->source->chart, sc.cm->H(),
                                            parse_expr_list(jcc.at("a"), "cocycle a"));
      c.a = make_gauge2(composite, a);
      cocycles.push_back(c);
      if (jcc.contains("overlap")) {
        TransitionDatum tik;
        tik.from = c.i;
        tik.to = c.k;
        tik.overlap = parse_chart(jcc.at("overlap"));
        tik.gt = c.a.target;
        transitions.push_back(tik);
      }
    }
    sc.bundle = std::make_shared<BundleData>(sc.cm, charts, transitions, cocycles,
                                             jb.value("fake_flat", false));
  }

  const json args_obj = j.value("args", json::object());
  for (const auto& [key, value] : args_obj.items()) sc.args[key] = value.get<std::string>();

  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Scenario sc = load_scenario_text(ss.str(), path);
  sc.args["__file"] = path;
  sc.args["__digest"] = hex64(fnv1a(ss.str()));
  return sc;
}

// ---- command execution ---------------------------------------------------------

namespace {

struct CommandContext {
  const Scenario& sc;
  IntegratorConfig cfg;
  std::uint64_t seed;
  double tolerance;
  json report;
  int exit_code = 0;
};

void finish_residuals(CommandContext& ctx, const std::map<std::string, double>& residuals) {
  ctx.report["residuals"] = residuals_to_json(residuals);
  double worst = 0;
  for (const auto& [k, v] : residuals) worst = std::max(worst, v);
  ctx.report["max_residual"] = worst;
  ctx.report["pass"] = worst <= ctx.tolerance;
  if (worst > ctx.tolerance) ctx.exit_code = 2;
}

void cmd_poe(CommandContext& ctx) {
  const auto& conn = ctx.sc.connection(ctx.sc.arg("connection"));
  TransportResult res = poe(conn->A, ctx.sc.path(ctx.sc.arg("path")), ctx.cfg);
  ctx.report["result"] = {{"matrix", matrix_to_json(res.value.matrix)},
                          {"error_estimate", res.error_estimate},
                          {"constraint_residual", res.value.constraint_residual()}};
}

void cmd_soe(CommandContext& ctx) {
  const auto& conn = ctx.sc.connection(ctx.sc.arg("connection"));
  SoeInfo info;
  TransportResult res = soe(conn->cm, conn->A, conn->B, ctx.sc.bigon(ctx.sc.arg("bigon")),
                            ctx.cfg, ctx.sc.conventions, &info);
  ctx.report["result"] = {{"matrix", matrix_to_json(res.value.matrix)},
                          {"error_estimate", res.error_estimate},
                          {"fake_flat_probe", info.fake_flat_probe},
                          {"fake_flat_warning", info.fake_flat_warning}};
}

void cmd_hgphi(CommandContext& ctx) {
  const auto& gt = ctx.sc.gauge(ctx.sc.arg("gauge"));
  HgPhiResult res = hg_phi(gt->source->cm, gt->phi, gt->target->A,
                           ctx.sc.path(ctx.sc.arg("path")), ctx.cfg);
  ctx.report["result"] = {{"h", matrix_to_json(res.h.matrix)},
                          {"g", matrix_to_json(res.g.matrix)},
                          {"error_estimate", res.error_estimate}};
}

void cmd_check_crossed_module(CommandContext& ctx) {
  AxiomCheckReport rep = check_axioms(*ctx.sc.cm, 200, ctx.seed);
  finish_residuals(ctx, rep.residuals);
}

void cmd_check_fake_flat(CommandContext& ctx) {
  const auto& conn = ctx.sc.connection(ctx.sc.arg("connection"));
  std::map<std::string, double> residuals;
  residuals["fake_curvature_probe"] = fake_flat_residual(conn->cm, conn->A, conn->B);
  finish_residuals(ctx, residuals);
}

void cmd_check_gauge(CommandContext& ctx) {
  const auto& gt = ctx.sc.gauge(ctx.sc.arg("gauge"));
  GaugeCheckReport rep = check_gauge(*gt, 40, ctx.seed);
  finish_residuals(ctx, {{"eq1", rep.eq1}, {"eq2", rep.eq2}});
}

void cmd_check_axioms(CommandContext& ctx, const std::string& suite) {
  const auto& conn = ctx.sc.connection(ctx.sc.arg("connection"));
  SampleFamily family = make_sample_family(conn->chart, ctx.seed);
  if (suite == "functor") {
    AxiomReport rep = run_axiom_suite(*conn, family, ctx.cfg, ctx.sc.conventions);
    if (ctx.sc.args.count("gauge")) {
      AxiomReport t = run_axiom_suite(*ctx.sc.gauge(ctx.sc.arg("gauge")), family, ctx.cfg,
                                      ctx.sc.conventions);
      rep.residuals.insert(t.residuals.begin(), t.residuals.end());
    }
    finish_residuals(ctx, rep.residuals);
  } else if (suite == "gauge2") {
    const Gauge2Transformation& a2t = ctx.sc.gauge2(ctx.sc.arg("gauge2"));
    AxiomReport rep = run_axiom_suite(a2t, family, ctx.cfg, ctx.sc.conventions);
    Gauge2CheckReport chk = check_gauge2(a2t, 40, ctx.seed);
    rep.residuals["gauge2_g_condition"] = chk.g_condition;
    rep.residuals["gauge2_phi_condition"] = chk.phi_condition;
    finish_residuals(ctx, rep.residuals);
  } else if (suite == "thin") {
    AxiomReport rep = thin_invariance_suite(*conn, family, ctx.cfg, ctx.sc.conventions);
    finish_residuals(ctx, rep.residuals);
  } else if (suite == "homega" || suite == "equivariance") {
    TotalSpaceForms forms(conn->cm, conn->A, conn->B);
    if (suite == "equivariance") {
      EquivarianceReport rep = check_equivariance(forms, 100, ctx.seed);
      finish_residuals(ctx, {{"eq_a", rep.eq_a}, {"eq_b", rep.eq_b}, {"eq_c", rep.eq_c}});
    } else {
      finish_residuals(ctx,
                       trivial_bundle_suite(forms, ctx.cfg, ctx.sc.conventions, ctx.seed));
    }
  } else {
    throw LoadError("unknown suite '" + suite +
                    "' (expected functor|gauge2|thin|homega|equivariance)");
  }
}

void cmd_transport_path(CommandContext& ctx) {
  if (!ctx.sc.bundle) throw LoadError("scenario has no bundle");
  const Path& gamma = ctx.sc.path(ctx.sc.arg("path"));
  TransportWord word =
      transport_path(*ctx.sc.bundle, gamma, ctx.sc.itinerary(ctx.sc.arg("itinerary")), ctx.cfg);
  json entries = json::array();
  for (const auto& e : word.entries) {
    if (std::holds_alternative<WordSegment>(e)) {
      const auto& s = std::get<WordSegment>(e);
      entries.push_back({{"kind", "segment"},
                         {"chart", s.chart_id},
                         {"interval", {s.t0, s.t1}},
                         {"value", matrix_to_json(s.value.matrix)}});
    } else {
      const auto& jmp = std::get<WordJump>(e);
      entries.push_back({{"kind", "jump"},
                         {"from", jmp.from},
                         {"to", jmp.to},
                         {"at_t", jmp.at_t},
                         {"h", matrix_to_json(jmp.cell.h.matrix)},
                         {"g", matrix_to_json(jmp.cell.g.matrix)}});
    }
  }
  ctx.report["result"] = {
      {"word", entries},
      {"g_total", matrix_to_json(word.normalize().matrix)},
      {"start_trivialization", word.start_trivialization},
      {"end_trivialization", word.end_trivialization},
      {"adjacency_residual", word.adjacency_residual([&](double t) { return gamma(t); })}};
}

void cmd_transport_bigon(CommandContext& ctx) {
  if (!ctx.sc.bundle) throw LoadError("scenario has no bundle");
  TwoGroupMorphism cell =
      transport_bigon(*ctx.sc.bundle, ctx.sc.bigon(ctx.sc.arg("bigon")),
                      ctx.sc.itinerary(ctx.sc.arg("itinerary")), ctx.cfg, ctx.sc.conventions);
  ctx.report["result"] = {{"h", matrix_to_json(cell.h.matrix)},
                          {"g", matrix_to_json(cell.g.matrix)}};
}

void cmd_compare_itineraries(CommandContext& ctx) {
  if (!ctx.sc.bundle) throw LoadError("scenario has no bundle");
  ItineraryComparison out = compare_itineraries(
      *ctx.sc.bundle, ctx.sc.path(ctx.sc.arg("path")), ctx.sc.itinerary(ctx.sc.arg("itinerary")),
      ctx.sc.itinerary(ctx.sc.arg("itinerary_b")), ctx.cfg);
  ctx.report["result"] = {{"h", matrix_to_json(out.cell.h.matrix)},
                          {"g", matrix_to_json(out.cell.g.matrix)}};
  finish_residuals(ctx, {{"itinerary_comparison", out.residual}});
}

void cmd_validate_bundle(CommandContext& ctx) {
  if (!ctx.sc.bundle) throw LoadError("scenario has no bundle");
  ValidationReport rep = validate_bundle(*ctx.sc.bundle, 25, ctx.seed);
  finish_residuals(ctx, rep.residuals);
}

void cmd_calibrate(CommandContext& ctx, const RunFlags& flags) {
  CalibrationOutcome out = calibrate_soe(ctx.sc, flags);
  ctx.report["result"] = {
      {"ode_sign", out.winner.ode_sign},
      {"arg_order", out.winner.arg_order == SoeArgOrder::ts ? "ts" : "st"},
      {"matches_frozen", out.matches_frozen},
      {"evidence", residuals_to_json(out.evidence)}};
}

}  // namespace

RunResult run_command(const std::string& command, const Scenario& scenario,
                      const RunFlags& flags) {
  auto t0 = std::chrono::steady_clock::now();
  CommandContext ctx{scenario, scenario.cfg, scenario.seed, 1e-5, json::object(), 0};
  if (flags.seed) ctx.seed = *flags.seed;
  if (flags.steps) {
    ctx.cfg.n_steps = *flags.steps;
    ctx.cfg.validate();
  }
  if (flags.tolerance) ctx.tolerance = *flags.tolerance;
  ctx.report["command"] = command;
  ctx.report["seed"] = ctx.seed;
  ctx.report["n_steps"] = ctx.cfg.n_steps;
  ctx.report["tolerance"] = ctx.tolerance;
  if (scenario.args.count("__digest")) ctx.report["inputs_digest"] = scenario.args.at("__digest");

  if (command == "poe") cmd_poe(ctx);
  else if (command == "soe") cmd_soe(ctx);
  else if (command == "hgphi") cmd_hgphi(ctx);
  else if (command == "check-crossed-module") cmd_check_crossed_module(ctx);
  else if (command == "check-fake-flat") cmd_check_fake_flat(ctx);
  else if (command == "check-gauge") cmd_check_gauge(ctx);
  else if (command == "check-axioms")
    cmd_check_axioms(ctx, !flags.suite.empty() ? flags.suite
                                               : scenario.args.count("suite")
                                                     ? scenario.args.at("suite")
                                                     : "functor");
  else if (command == "transport-path") cmd_transport_path(ctx);
  else if (command == "transport-bigon") cmd_transport_bigon(ctx);
  else if (command == "compare-itineraries") cmd_compare_itineraries(ctx);
  else if (command == "validate-bundle") cmd_validate_bundle(ctx);
  else if (command == "calibrate-soe") cmd_calibrate(ctx, flags);
  else throw LoadError("unknown command '" + command + "'");

  RunResult out;
  out.exit_code = ctx.exit_code;
  out.report_json = ctx.report.dump(2) + "\n";
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---- calibration ------------------------------------------------------------------

CalibrationOutcome calibrate_soe(const Scenario& scenario, const RunFlags& flags) {
  IntegratorConfig cfg = scenario.cfg;
  if (flags.steps) cfg.n_steps = *flags.steps;
  cfg.richardson = false;
  double threshold = flags.tolerance.value_or(1e-4);

  const ConnectionPtr& conn = scenario.connection(scenario.arg("connection"));
  const Bigon& sigma = scenario.bigon(scenario.arg("bigon"));
  const CrossedModulePtr& cm = conn->cm;

  // abelian oracle fixture (built-in)
  auto ab = instance(CrossedModuleName::ABELIAN_GERBE);
  Chart abc{2, {Interval{-1, 1}, Interval{-1, 1}}};
  OneForm abA = OneForm::zero(abc, ab->G());
  TwoForm abB = TwoForm::from_exprs(
      abc, ab->H(), {{ScalarExpr::parse("0.8 + 0.3*x1 - 0.2*x2")}});
  Rng rng(scenario.seed + 17);
  Vec x(2), y(2);
  x << -0.5, -0.4;
  y << 0.55, 0.35;
  Bigon ab_sigma = Bigon::linear_interpolation(random_path_between(abc, rng, x, y),
                                               random_path_between(abc, rng, x, y));
  // reference quadrature of the pulled-back 2-form
  double quad = 0;
  {
    int n = 200;
    for (int i = 0; i <= n; ++i)
      for (int jj = 0; jj <= n; ++jj) {
        double wi = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        double wj = (jj == 0 || jj == n) ? 1 : (jj % 2 ? 4 : 2);
        double s = double(i) / n, t = double(jj) / n;
        quad += wi * wj * abB(ab_sigma(s, t), ab_sigma.d_dt(s, t), ab_sigma.d_ds(s, t)).coeffs[0];
      }
    quad /= 9.0 * double(n) * double(n);
  }

  CalibrationOutcome out;
  int n_pass = 0;
  for (int sign : {-1, +1}) {
    for (SoeArgOrder order : {SoeArgOrder::ts, SoeArgOrder::st}) {
      SoeConventions cand{sign, order};
      std::string tag = std::string(sign < 0 ? "sign-_" : "sign+_") +
                        (order == SoeArgOrder::ts ? "ts" : "st");
      // (i) target-source matching on the generic instance
      GroupElement h = soe(cm, conn->A, conn->B, sigma, cfg, cand).value;
      double ts_res = dist(mul(cm->t(h), poe(conn->A, sigma.source(), cfg).value),
                           poe(conn->A, sigma.target(), cfg).value);
      out.evidence[tag + "_target_source"] = ts_res;
      // (ii) abelian quadrature oracle (magnitude)
      GroupElement habs = soe(ab, abA, abB, ab_sigma, cfg, cand).value;
      double ab_res = std::abs(std::abs(std::arg(habs.matrix(0, 0))) - std::abs(quad));
      out.evidence[tag + "_abelian_quadrature"] = ab_res;
      // (iii) vertical and horizontal composition
      GroupElement whole = h;
      GroupElement bot = soe(cm, conn->A, conn->B, sigma.restrict_s(0.0, 0.5), cfg, cand).value;
      GroupElement top = soe(cm, conn->A, conn->B, sigma.restrict_s(0.5, 1.0), cfg, cand).value;
      double vert = dist(whole, mul(top, bot));
      out.evidence[tag + "_vertical"] = vert;
      Bigon back(sigma.chart(), [sigma](double s, double t) { return sigma(s, 1.0 - t); });
      GroupElement hb = soe(cm, conn->A, conn->B, back, cfg, cand).value;
      GroupElement hcomp =
          soe(cm, conn->A, conn->B, Bigon::horizontal_compose(sigma, back), cfg, cand).value;
      GroupElement glued = mul(hb, cm->alpha(poe(conn->A, back.source(), cfg).value, whole));
      double horiz = dist(hcomp, glued);
      out.evidence[tag + "_horizontal"] = horiz;

      bool pass = ts_res < threshold && ab_res < threshold && vert < threshold &&
                  horiz < threshold;
      out.evidence[tag + "_pass"] = pass ? 1.0 : 0.0;
      if (pass) {
        ++n_pass;
        out.winner = cand;
      }
    }
  }
  if (n_pass != 1)
    throw NoUniqueConvention("calibration found " + std::to_string(n_pass) +
                             " passing convention assignments (expected exactly 1)");
  SoeConventions frozen;
  out.matches_frozen = out.winner.ode_sign == frozen.ode_sign &&
                       out.winner.arg_order == frozen.arg_order;
  return out;
}

}  // namespace gerbe
