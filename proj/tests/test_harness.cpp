#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbe/harness.hpp"
#include "oracles.hpp"

using namespace gerbe;

namespace {

Chart square2() { return Chart{2, {Interval{-1, 1}, Interval{-1, 1}}}; }
ScalarExpr e(const char* s) { return ScalarExpr::parse(s); }

IntegratorConfig fast(int n = 400) {
  IntegratorConfig cfg;
  cfg.n_steps = n;
  cfg.richardson = false;
  return cfg;
}

ConnectionPtr spin_conn() {
  auto cm = instance(CrossedModuleName::SPIN);
  OneForm A = OneForm::from_exprs(square2(), cm->G(),
                                  {{e("0.35"), e("0.1*x2"), e("0")},
                                   {e("0"), e("0.4"), e("0.25*x1")}});
  return make_fake_flat(cm, A);
}

GaugePtr spin_gauge(const ConnectionPtr& conn) {
  auto cm = conn->cm;
  return apply_gauge(conn,
                     GroupMap::from_generator(square2(), cm->G(),
                                              {e("0.3*x1"), e("0.2"), e("0.1*x2")}),
                     OneForm::from_exprs(square2(), cm->H(),
                                         {{e("0.1"), e("0"), e("0.05*x2")},
                                          {e("0"), e("0.08*x1"), e("0")}}));
}

}  // namespace

TEST_CASE("sample families are deterministic and composable by construction") {
  SampleFamily a = make_sample_family(square2(), 99);
  SampleFamily b = make_sample_family(square2(), 99);
  REQUIRE(a.paths.size() == b.paths.size());
  for (std::size_t i = 0; i < a.paths.size(); ++i)
    CHECK((a.paths[i](0.37) - b.paths[i](0.37)).norm() == 0.0);
  for (const auto& [first, second] : a.composable_pairs)
    CHECK((first.end() - second.start()).norm() < 1e-12);
  for (const auto& [bottom, top] : a.vertical_pairs) {
    CHECK((bottom.target()(0.4) - top.source()(0.4)).norm() < 1e-12);
    CHECK(bottom.boundary_residual() < 1e-12);
    CHECK(top.boundary_residual() < 1e-12);
  }
  for (const auto& [first, second] : a.horizontal_pairs)
    CHECK((first(0.3, 1.0) - second(0.3, 0.0)).norm() < 1e-12);
}

TEST_CASE("f_path") {
  ConnectionPtr conn = spin_conn();
  SUBCASE("constant path gives the identity") {
    Vec x(2);
    x << 0.2, -0.1;
    GroupElement g = f_path(*conn, Path::constant(square2(), x), fast());
    CHECK(dist(g, GroupElement::identity(conn->cm->G())) < 1e-12);
  }
  SUBCASE("functorial under concatenation") {
    Rng rng(1);
    Vec x(2), y(2), z(2);
    x << -0.5, -0.2;
    y << 0.1, 0.3;
    z << 0.5, -0.3;
    Path p1 = random_path_between(square2(), rng, x, y);
    Path p2 = random_path_between(square2(), rng, y, z);
    GroupElement whole = f_path(*conn, Path::concatenate(p1, p2), fast(2000));
    GroupElement glued = mul(f_path(*conn, p2, fast(2000)), f_path(*conn, p1, fast(2000)));
    CHECK(dist(whole, glued) < 1e-7);
  }
  SUBCASE("thin invariance under reparameterization") {
    Rng rng(2);
    Path p = random_path(square2(), rng);
    CHECK(dist(f_path(*conn, p.reparameterized(), fast(2000)),
               f_path(*conn, p, fast(2000))) < 1e-6);
  }
}

TEST_CASE("f_bigon") {
  ConnectionPtr conn = spin_conn();
  auto cm = conn->cm;
  Rng rng(3);
  SUBCASE("identity bigon maps to the identity 2-cell") {
    Path p = random_path(square2(), rng);
    Bigon constant_family(square2(), [p](double, double t) { return p(t); });
    TwoGroupMorphism cell = f_bigon(*conn, constant_family, fast());
    CHECK(dist(cell.h, GroupElement::identity(cm->H())) < 1e-8);
    CHECK(dist(cell.g, f_path(*conn, p, fast())) < 1e-12);
  }
  SUBCASE("B = 0 collapses to (1, poe)") {
    OneForm curved = OneForm::from_exprs(square2(), cm->G(),
                                         {{e("0.4"), e("0.3*x2"), e("0")},
                                          {e("0"), e("0.5"), e("0.6*x1")}});
    GammaConnection flat0{cm, square2(), curved, TwoForm::zero(square2(), cm->H()), {}};
    Vec x(2), y(2);
    x << -0.4, -0.2;
    y << 0.4, 0.3;
    Bigon sigma = Bigon::linear_interpolation(random_path_between(square2(), rng, x, y),
                                              random_path_between(square2(), rng, x, y));
    TwoGroupMorphism cell = f_bigon(flat0, sigma, fast());
    CHECK(dist(cell.h, GroupElement::identity(cm->H())) < 1e-8);
  }
  SUBCASE("vertical pairs compose") {
    SampleFamily fam = make_sample_family(square2(), 17, 1, 1, 1);
    const auto& [bottom, top] = fam.vertical_pairs.front();
    TwoGroupMorphism whole = f_bigon(*conn, Bigon::vertical_compose(bottom, top), fast(800));
    TwoGroupMorphism glued =
        mor_vcompose(f_bigon(*conn, top, fast(800)), f_bigon(*conn, bottom, fast(800)));
    CHECK(dist(whole, glued) < 1e-6);
  }
}

TEST_CASE("rho_path") {
  ConnectionPtr conn = spin_conn();
  auto cm = conn->cm;
  GaugePtr gt = spin_gauge(conn);
  Rng rng(5);
  SUBCASE("identity gauge gives the identity 2-cell on poe") {
    GaugePtr idg = identity_gauge(conn);
    Path p = random_path(square2(), rng);
    TwoGroupMorphism cell = rho_path(*idg, p, fast());
    CHECK(dist(cell.h, GroupElement::identity(cm->H())) < 1e-10);
    CHECK(dist(cell.g, f_path(*conn, p, fast())) < 1e-12);
  }
  SUBCASE("constant path gives (1, g(x))") {
    Vec x(2);
    x << 0.25, -0.15;
    TwoGroupMorphism cell = rho_path(*gt, Path::constant(square2(), x), fast());
    CHECK(dist(cell.h, GroupElement::identity(cm->H())) < 1e-10);
    CHECK(frob(Mat(cell.g.matrix - gt->g(x))) < 1e-12);
  }
  SUBCASE("target recomputes through the endpoint identity") {
    for (int i = 0; i < 3; ++i) {
      Path p = random_path(square2(), rng);
      TwoGroupMorphism cell = rho_path(*gt, p, fast(800));
      GroupElement target = mul(poe(gt->target->A, p, fast(800)).value,
                                GroupElement(cm->G(), gt->g(p.start())));
      CHECK(dist(cell.target(), target) < 1e-6);
    }
  }
  SUBCASE("composite gauge pastes") {
    GaugePtr g2 = apply_gauge(gt->target,
                              GroupMap::from_generator(square2(), cm->G(),
                                                       {e("0.1*x2"), e("0.15"), e("0.2*x1")}),
                              OneForm::zero(square2(), cm->H()));
    GaugePtr comp = compose_gauge(g2, gt);
    Path p = random_path(square2(), rng);
    GroupElement h_comp = inv(rho_path(*comp, p, fast(800)).h);
    GroupElement h1 = inv(rho_path(*gt, p, fast(800)).h);
    GroupElement h2 = inv(rho_path(*g2, p, fast(800)).h);
    GroupElement pasted = mul(cm->alpha(GroupElement(cm->G(), g2->g(p.end())), h1), h2);
    CHECK(dist(h_comp, pasted) < 1e-6);
  }
}

TEST_CASE("mod_point") {
  ConnectionPtr conn = spin_conn();
  auto cm = conn->cm;
  GaugePtr gt = spin_gauge(conn);
  GroupMap amap = GroupMap::from_generator(square2(), cm->H(),
                                           {e("0.2*x1"), e("0.1"), e("0.15*x2")});
  Gauge2Transformation a2t = make_gauge2(gt, amap);
  Vec x(2);
  x << 0.2, 0.1;
  SUBCASE("identity 2-transformation gives the unit cell at g1(x)") {
    TwoGroupMorphism cell = mod_point(identity_gauge2(gt), x);
    CHECK(dist(cell.h, GroupElement::identity(cm->H())) == 0.0);
    CHECK(frob(Mat(cell.g.matrix - gt->g(x))) == 0.0);
  }
  SUBCASE("source and target recompute through the g-condition") {
    TwoGroupMorphism cell = mod_point(a2t, x);
    CHECK(frob(Mat(cell.source().matrix - a2t.source->g(x))) < 1e-12);
    CHECK(frob(Mat(cell.target().matrix - a2t.target->g(x))) < 1e-7);
  }
  SUBCASE("abelian gerbe puts all content in H") {
    auto ab = instance(CrossedModuleName::ABELIAN_GERBE);
    Chart ch = square2();
    ConnectionPtr c0 = make_connection(ab, ch, OneForm::zero(ch, ab->G()),
                                       TwoForm::from_exprs(ch, ab->H(), {{e("0.4")}}));
    GaugePtr base = identity_gauge(c0);
    GroupMap am = GroupMap::from_generator(ch, ab->H(), {e("0.3*x1")});
    TwoGroupMorphism cell = mod_point(make_gauge2(base, am), x);
    CHECK(frob(Mat(cell.g.matrix - mat_identity(1))) == 0.0);
    CHECK(frob(Mat(cell.h.matrix - am(x))) == 0.0);
  }
}

TEST_CASE("axiom suites pass on a fake-flat instance") {
  ConnectionPtr conn = spin_conn();
  SampleFamily fam = make_sample_family(square2(), 7, 2, 2, 2);
  SUBCASE("functor axioms") {
    AxiomReport rep = run_axiom_suite(*conn, fam, fast(800));
    INFO(rep.residuals.begin()->first);
    CHECK(rep.max_residual() < 1e-5);
  }
  SUBCASE("pseudonaturality") {
    GaugePtr gt = spin_gauge(conn);
    AxiomReport rep = run_axiom_suite(*gt, fam, fast(800));
    CHECK(rep.max_residual() < 1e-5);
  }
  SUBCASE("modification square") {
    GaugePtr gt = spin_gauge(conn);
    Gauge2Transformation a2t = make_gauge2(
        gt, GroupMap::from_generator(square2(), conn->cm->H(),
                                     {e("0.2*x1"), e("0.1"), e("0.15*x2")}));
    AxiomReport rep = run_axiom_suite(a2t, fam, fast(800));
    CHECK(rep.max_residual() < 1e-5);
  }
  SUBCASE("thin invariance") {
    AxiomReport rep = thin_invariance_suite(*conn, fam, fast(800));
    CHECK(rep.max_residual() < 1e-6);
  }
}

TEST_CASE("a non-fake-flat connection breaks target-source matching") {
  auto cm = instance(CrossedModuleName::SPIN);
  OneForm curved = OneForm::from_exprs(square2(), cm->G(),
                                       {{e("0.4"), e("0.3*x2"), e("0")},
                                        {e("0"), e("0.5"), e("0.6*x1")}});
  // B = 0 against a curved A: fake curvature is far from zero
  GammaConnection broken{cm, square2(), curved, TwoForm::zero(square2(), cm->H()),
                         fake_flat_residual(cm, curved, TwoForm::zero(square2(), cm->H()))};
  CHECK(*broken.fake_flat_checked > 1e-3);
  SampleFamily fam = make_sample_family(square2(), 19, 1, 1, 1);
  AxiomReport rep = run_axiom_suite(broken, fam, fast(400));
  CHECK(rep.residuals.at("target_source") > 1e-3);
}

TEST_CASE("H-trivial crossed modules collapse the surface layer") {
  auto cm = h_trivial_module(GroupDescriptor::su2());
  OneForm A = OneForm::from_exprs(square2(), cm->G(),
                                  {{e("0.4"), e("0.3*x2"), e("0")},
                                   {e("0"), e("0.5"), e("0.6*x1")}});
  // H = {1} forces B = 0 and makes every 2-cell (1, poe)
  GammaConnection conn{cm, square2(), A, TwoForm::zero(square2(), cm->H()), 0.0};
  SampleFamily fam = make_sample_family(square2(), 23, 1, 1, 1);
  TwoGroupMorphism cell = f_bigon(conn, fam.bigons.front(), fast());
  CHECK(cell.h.matrix.rows() == 1);
  CHECK(dist(cell.h, GroupElement::identity(cm->H())) == 0.0);
  CHECK(dist(cell.g, f_path(conn, fam.bigons.front().source(), fast())) < 1e-12);
}

TEST_CASE("flat connections give bigon-independent surface transport") {
  // gauge-transform the zero connection: the result is flat but nonzero
  auto cm = instance(CrossedModuleName::SPIN);
  Chart ch = square2();
  ConnectionPtr zero = make_connection(cm, ch, OneForm::zero(ch, cm->G()),
                                       TwoForm::zero(ch, cm->H()));
  GaugePtr gt = apply_gauge(zero,
                            GroupMap::from_generator(ch, cm->G(),
                                                     {e("0.4*x1"), e("0.3*x2"), e("0.2*x1*x2")}),
                            OneForm::from_exprs(ch, cm->H(),
                                                {{e("0.1*x2"), e("0"), e("0.05")},
                                                 {e("0"), e("0.1*x1"), e("0")}}));
  ConnectionPtr flat = gt->target;
  REQUIRE(flat->fake_flat_checked);
  CHECK(*flat->fake_flat_checked < 1e-4);
  Rng rng(31);
  Vec x(2), y(2);
  x << -0.4, -0.25;
  y << 0.45, 0.3;
  Path bottom = random_path_between(ch, rng, x, y);
  Path top = random_path_between(ch, rng, x, y);
  Path mid = random_path_between(ch, rng, x, y);
  // two different bigons with the same boundary paths
  Bigon direct = Bigon::linear_interpolation(bottom, top);
  Bigon via_mid = Bigon::vertical_compose(Bigon::linear_interpolation(bottom, mid),
                                          Bigon::linear_interpolation(mid, top));
  GroupElement h1 = soe(cm, flat->A, flat->B, direct, fast(800)).value;
  GroupElement h2 = soe(cm, flat->A, flat->B, via_mid, fast(800)).value;
  CHECK(dist(h1, h2) < 1e-5);
}
