#include "gerbe/harness.hpp"

#include <cmath>

namespace gerbe {

namespace {

// Cubic-in-u wiggle that vanishes at both ends, scaled to keep the image
// inside the box.
Path wiggly_path(const Chart& chart, const Vec& x, const Vec& y, const Vec& w1, const Vec& w2) {
  int d = chart.dim;
  Vec a = x, b = y, c1 = w1, c2 = w2;
  auto eval = [a, b, c1, c2, d](double u) {
    double v = smooth_step(u);
    Vec p(d);
    for (int i = 0; i < d; ++i)
      p[i] = (1.0 - v) * a[i] + v * b[i] + v * (1.0 - v) * (c1[i] + c2[i] * v);
    return p;
  };
  return Path(chart, eval);
}

}  // namespace

Path random_path_between(const Chart& chart, Rng& rng, const Vec& x, const Vec& y) {
  int d = chart.dim;
  Vec w1(d), w2(d);
  for (int i = 0; i < d; ++i) {
    double span = chart.box[i].hi - chart.box[i].lo;
    // v(1-v)(c1 + c2 v) stays below ~0.30 |c1| + 0.15 |c2| on [0,1]
    double room = 0.15 * span;
    double mid = 0.5 * (x[i] + y[i]);
    double center_room = std::min(chart.box[i].hi - mid, mid - chart.box[i].lo);
    double scale = std::min(room, 0.9 * center_room);
    w1[i] = rng.uniform(-scale, scale);
    w2[i] = rng.uniform(-scale, scale) * 0.25;
  }
  return wiggly_path(chart, x, y, w1, w2);
}

Path random_path(const Chart& chart, Rng& rng) {
  Vec x = random_interior_point(chart, rng, 40.0);
  Vec y = random_interior_point(chart, rng, 40.0);
  return random_path_between(chart, rng, x, y);
}

SampleFamily make_sample_family(const Chart& chart, std::uint64_t seed, int n_paths, int n_pairs,
                                int n_bigons) {
  Rng rng(seed);
  SampleFamily fam;
  fam.chart = chart;
  fam.seed = seed;
  for (int i = 0; i < n_paths; ++i) fam.paths.push_back(random_path(chart, rng));
  for (int i = 0; i < n_pairs; ++i) {
    Vec x = random_interior_point(chart, rng, 40.0);
    Vec y = random_interior_point(chart, rng, 40.0);
    Vec z = random_interior_point(chart, rng, 40.0);
    Vec w = random_interior_point(chart, rng, 40.0);
    fam.composable_pairs.emplace_back(random_path_between(chart, rng, x, y),
                                      random_path_between(chart, rng, y, z));
    fam.composable_triples.push_back({random_path_between(chart, rng, x, y),
                                      random_path_between(chart, rng, y, z),
                                      random_path_between(chart, rng, z, w)});
  }
  for (int i = 0; i < n_bigons; ++i) {
    Vec x = random_interior_point(chart, rng, 40.0);
    Vec y = random_interior_point(chart, rng, 40.0);
    Path bottom = random_path_between(chart, rng, x, y);
    Path mid = random_path_between(chart, rng, x, y);
    Path top = random_path_between(chart, rng, x, y);
    fam.bigons.push_back(Bigon::linear_interpolation(bottom, mid));
    fam.vertical_pairs.emplace_back(Bigon::linear_interpolation(bottom, mid),
                                    Bigon::linear_interpolation(mid, top));
    // horizontally composable: second bigon starts where the first ends
    Vec z = random_interior_point(chart, rng, 40.0);
    Path b2 = random_path_between(chart, rng, y, z);
    Path t2 = random_path_between(chart, rng, y, z);
    fam.horizontal_pairs.emplace_back(Bigon::linear_interpolation(bottom, mid),
                                      Bigon::linear_interpolation(b2, t2));
  }
  return fam;
}

double AxiomReport::max_residual() const {
  double m = 0;
  for (const auto& [k, v] : residuals) m = std::max(m, v);
  return m;
}

GroupElement f_path(const GammaConnection& conn, const Path& gamma, const IntegratorConfig& cfg) {
  return poe(conn.A, gamma, cfg).value;
}

TwoGroupMorphism f_bigon(const GammaConnection& conn, const Bigon& sigma,
                         const IntegratorConfig& cfg, const SoeConventions& conv) {
  GroupElement h = soe(conn.cm, conn.A, conn.B, sigma, cfg, conv).value;
  GroupElement g = poe(conn.A, sigma.source(), cfg).value;
  return TwoGroupMorphism{conn.cm, h, g};
}

TwoGroupMorphism rho_path(const GaugeTransformation& gt, const Path& gamma,
                          const IntegratorConfig& cfg) {
  const CrossedModulePtr& cm = gt.source->cm;
  HgPhiResult hg = hg_phi(cm, gt.phi, gt.target->A, gamma, cfg);
  GroupElement base = poe(gt.source->A, gamma, cfg).value;
  GroupElement gy = gt.g.at(gamma.end());
  return TwoGroupMorphism{cm, inv(hg.h), mul(gy, base)};
}

TwoGroupMorphism mod_point(const Gauge2Transformation& a2t, const Vec& x) {
  const CrossedModulePtr& cm = a2t.source->source->cm;
  return TwoGroupMorphism{cm, GroupElement(cm->H(), a2t.a(x)),
                          GroupElement(cm->G(), a2t.source->g(x))};
}

namespace {

void merge_max(AxiomReport& rep, const std::string& key, double v) {
  auto [it, inserted] = rep.residuals.try_emplace(key, v);
  if (!inserted) it->second = std::max(it->second, v);
}

// The suites report failures instead of raising them, so composition is
// forced and any boundary mismatch is folded into the residual.
TwoGroupMorphism vcompose_reporting(const TwoGroupMorphism& m2, const TwoGroupMorphism& m1,
                                    double* gap) {
  *gap = std::max(*gap, dist(m2.source(), m1.target()));
  return TwoGroupMorphism{m1.cm, mul(m2.h, m1.h), m1.g};
}

}  // namespace

AxiomReport run_axiom_suite(const GammaConnection& conn, const SampleFamily& family,
                            const IntegratorConfig& cfg, const SoeConventions& conv) {
  AxiomReport rep;
  const CrossedModulePtr& cm = conn.cm;
  // F1: vertical functoriality
  for (const auto& [bottom, top] : family.vertical_pairs) {
    TwoGroupMorphism whole = f_bigon(conn, Bigon::vertical_compose(bottom, top), cfg, conv);
    double gap = 0;
    TwoGroupMorphism glued = vcompose_reporting(f_bigon(conn, top, cfg, conv),
                                                f_bigon(conn, bottom, cfg, conv), &gap);
    merge_max(rep, "F1_vertical", dist(whole, glued) + gap);
  }
  // F2: horizontal exchange
  for (const auto& [first, second] : family.horizontal_pairs) {
    TwoGroupMorphism whole = f_bigon(conn, Bigon::horizontal_compose(first, second), cfg, conv);
    TwoGroupMorphism glued = mor_product(f_bigon(conn, second, cfg, conv),
                                         f_bigon(conn, first, cfg, conv));
    merge_max(rep, "F2_horizontal", dist(whole, glued));
  }
  // F3/F4: units and associativity (reparameterization residuals at B-Gamma)
  for (const Path& gamma : family.paths) {
    Path with_unit = Path::concatenate(Path::constant(family.chart, gamma.start()), gamma);
    merge_max(rep, "F3_unit",
              dist(f_path(conn, with_unit, cfg), f_path(conn, gamma, cfg)));
  }
  for (const auto& triple : family.composable_triples) {
    Path left = Path::concatenate(Path::concatenate(triple[0], triple[1]), triple[2]);
    Path right = Path::concatenate(triple[0], Path::concatenate(triple[1], triple[2]));
    merge_max(rep, "F4_associativity", dist(f_path(conn, left, cfg), f_path(conn, right, cfg)));
  }
  // source/target matching of the bigon cells
  for (const Bigon& sigma : family.bigons) {
    TwoGroupMorphism cell = f_bigon(conn, sigma, cfg, conv);
    GroupElement matched = mul(cm->t(cell.h), cell.g);
    merge_max(rep, "target_source", dist(matched, f_path(conn, sigma.target(), cfg)));
  }
  // path functoriality
  for (const auto& [first, second] : family.composable_pairs) {
    GroupElement whole = f_path(conn, Path::concatenate(first, second), cfg);
    GroupElement glued = mul(f_path(conn, second, cfg), f_path(conn, first, cfg));
    merge_max(rep, "path_composition", dist(whole, glued));
  }
  return rep;
}

AxiomReport run_axiom_suite(const GaugeTransformation& gt, const SampleFamily& family,
                            const IntegratorConfig& cfg, const SoeConventions& conv) {
  AxiomReport rep;
  const CrossedModulePtr& cm = gt.source->cm;
  // T1: h_{g,phi} on a composite against the pasted composite
  for (const auto& [first, second] : family.composable_pairs) {
    GroupElement h_whole = hg_phi(cm, gt.phi, gt.target->A, Path::concatenate(first, second), cfg).h;
    GroupElement h1 = hg_phi(cm, gt.phi, gt.target->A, first, cfg).h;
    GroupElement h2 = hg_phi(cm, gt.phi, gt.target->A, second, cfg).h;
    GroupElement poe2 = poe(gt.target->A, second, cfg).value;
    GroupElement pasted = mul(h2, cm->alpha(poe2, h1));
    merge_max(rep, "T1_composite", dist(h_whole, pasted));
  }
  // endpoint identity of Prop A.2.4 (b)
  for (const Path& gamma : family.paths) {
    GroupElement h = hg_phi(cm, gt.phi, gt.target->A, gamma, cfg).h;
    GroupElement lhs = mul(poe(gt.target->A, gamma, cfg).value, gt.g.at(gamma.start()));
    GroupElement rhs = mul(cm->t(inv(h)), mul(gt.g.at(gamma.end()), poe(gt.source->A, gamma, cfg).value));
    merge_max(rep, "T1_endpoints", dist(lhs, rhs));
  }
  // T2: the gauge square for surface transport
  for (const Bigon& sigma : family.bigons) {
    GroupElement h_src = hg_phi(cm, gt.phi, gt.target->A, sigma.source(), cfg).h;
    GroupElement h_tgt = hg_phi(cm, gt.phi, gt.target->A, sigma.target(), cfg).h;
    GroupElement soe_src = soe(cm, gt.source->A, gt.source->B, sigma, cfg, conv).value;
    GroupElement soe_tgt = soe(cm, gt.target->A, gt.target->B, sigma, cfg, conv).value;
    GroupElement gy = gt.g.at(sigma.source().end());
    GroupElement lhs = mul(soe_tgt, inv(h_src));
    GroupElement rhs = mul(inv(h_tgt), cm->alpha(gy, soe_src));
    merge_max(rep, "T2_gauge_square", dist(lhs, rhs));
  }
  return rep;
}

AxiomReport run_axiom_suite(const Gauge2Transformation& a2t, const SampleFamily& family,
                            const IntegratorConfig& cfg, const SoeConventions& conv) {
  (void)conv;
  AxiomReport rep;
  const GaugePtr& gt1 = a2t.source;
  const GaugePtr& gt2 = a2t.target;
  const CrossedModulePtr& cm = gt1->source->cm;
  for (const Path& gamma : family.paths) {
    Vec x = gamma.start(), y = gamma.end();
    TwoGroupMorphism rho1 = rho_path(*gt1, gamma, cfg);
    TwoGroupMorphism rho2 = rho_path(*gt2, gamma, cfg);
    GroupElement poeA = poe(gt1->source->A, gamma, cfg).value;
    GroupElement poeA2 = poe(gt1->target->A, gamma, cfg).value;
    double gap = 0;
    TwoGroupMorphism lhs = vcompose_reporting(
        mor_product(TwoGroupMorphism::identity(cm, poeA2), mod_point(a2t, x)), rho1, &gap);
    TwoGroupMorphism rhs = vcompose_reporting(
        rho2, mor_product(mod_point(a2t, y), TwoGroupMorphism::identity(cm, poeA)), &gap);
    merge_max(rep, "M_modification", dist(lhs, rhs) + gap);
  }
  return rep;
}

AxiomReport thin_invariance_suite(const GammaConnection& conn, const SampleFamily& family,
                                  const IntegratorConfig& cfg, const SoeConventions& conv) {
  AxiomReport rep;
  for (const Path& gamma : family.paths) {
    merge_max(rep, "poe_reparam",
              dist(f_path(conn, gamma.reparameterized(), cfg), f_path(conn, gamma, cfg)));
  }
  for (const Bigon& sigma : family.bigons) {
    GroupElement base = soe(conn.cm, conn.A, conn.B, sigma, cfg, conv).value;
    merge_max(rep, "soe_reparam_t",
              dist(soe(conn.cm, conn.A, conn.B, sigma.reparameterized_t(), cfg, conv).value, base));
    merge_max(rep, "soe_reparam_s",
              dist(soe(conn.cm, conn.A, conn.B, sigma.reparameterized_s(), cfg, conv).value, base));
  }
  // rank-degenerate bigon: the whole family is one path
  if (!family.paths.empty()) {
    const Path& gamma = family.paths.front();
    Bigon degenerate(family.chart, [gamma](double, double t) { return gamma(t); });
    GroupElement one = GroupElement::identity(conn.cm->H());
    merge_max(rep, "degenerate_bigon",
              dist(soe(conn.cm, conn.A, conn.B, degenerate, cfg, conv).value, one));
  }
  return rep;
}

}  // namespace gerbe
