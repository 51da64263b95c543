#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbe/gauge.hpp"
#include "gerbe/harness.hpp"
#include "oracles.hpp"

using namespace gerbe;

namespace {

Chart square2() { return Chart{2, {Interval{-1, 1}, Interval{-1, 1}}}; }
ScalarExpr e(const char* s) { return ScalarExpr::parse(s); }

IntegratorConfig fast(int n = 400, bool rich = false) {
  IntegratorConfig cfg;
  cfg.n_steps = n;
  cfg.richardson = rich;
  return cfg;
}

ConnectionPtr spin_conn() {
  auto cm = instance(CrossedModuleName::SPIN);
  OneForm A = OneForm::from_exprs(square2(), cm->G(),
                                  {{e("0.4"), e("0.1*x2"), e("0")},
                                   {e("0"), e("0.5"), e("0.3*x1")}});
  return make_fake_flat(cm, A);
}

Bigon test_bigon(Rng& rng) {
  Chart ch = square2();
  Vec x(2), y(2);
  x << -0.4, -0.3;
  y << 0.5, 0.4;
  return Bigon::linear_interpolation(random_path_between(ch, rng, x, y),
                                     random_path_between(ch, rng, x, y));
}

}  // namespace

TEST_CASE("config validation") {
  IntegratorConfig cfg;
  cfg.n_steps = 7;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.n_steps = 9;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.n_steps = 8;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("poe of the zero form is the identity") {
  auto cm = instance(CrossedModuleName::SPIN);
  Chart ch = square2();
  Path p = Path::from_exprs(ch, {e("u - 0.5"), e("0.2*u")});
  TransportResult res = poe(OneForm::zero(ch, cm->G()), p, fast());
  CHECK(dist(res.value, GroupElement::identity(cm->G())) < 1e-12);
}

TEST_CASE("abelian poe reduces to a quadrature") {
  auto u1 = GroupDescriptor::u1();
  Chart ch = square2();
  // omega = (0.7 + 0.4 x1) dx1 . i  along the path x1 = u - 0.5, x2 = 0
  OneForm omega = OneForm::from_exprs(ch, u1, {{e("0.7 + 0.4*x1")}, {e("0")}});
  Path p = Path::from_exprs(ch, {e("u - 0.5"), e("0")});
  double integral = oracle::simpson([](double u) { return 0.7 + 0.4 * (u - 0.5); }, 512);
  GroupElement g = poe(omega, p, fast()).value;
  CHECK(std::abs(g.matrix(0, 0) - std::polar(1.0, -integral)) < 1e-9);
  SUBCASE("prefix flow matches the partial quadrature") {
    PrefixFlow flow = poe_prefix(omega, p, fast());
    double partial =
        oracle::simpson([](double u) { return 0.5 * (0.7 + 0.4 * (0.5 * u - 0.5)); }, 512);
    CHECK(std::abs(flow.nodes[200](0, 0) - std::polar(1.0, -partial)) < 1e-9);
    CHECK(frob(Mat(flow.nodes[0] - mat_identity(1))) == 0.0);
    CHECK(dist(flow.value(), g) == 0.0);
  }
}

TEST_CASE("poe splits multiplicatively at an interior point") {
  auto cm = instance(CrossedModuleName::SPIN);
  OneForm A = OneForm::from_exprs(square2(), cm->G(),
                                  {{e("0.2"), e("0.06*x2"), e("0")},
                                   {e("0"), e("0.25"), e("0.15*x1")}});
  Rng rng(11);
  for (int i = 0; i < 5; ++i) {
    Path p = random_path(square2(), rng);
    GroupElement whole = poe(A, p, fast(2000)).value;
    GroupElement first = poe(A, p.restrict(0.0, 0.4), fast(2000)).value;
    GroupElement second = poe(A, p.restrict(0.4, 1.0), fast(2000)).value;
    CHECK(dist(whole, mul(second, first)) < 1e-8);
  }
}

TEST_CASE("poe gauge covariance") {
  // omega' = Ad_g^{-1}(omega) + g^* theta  =>  poe(omega) g(x) = g(y) poe(omega')
  auto cm = instance(CrossedModuleName::SPIN);
  Chart ch = square2();
  Rng rng(13);
  OneForm omega = OneForm::from_exprs(ch, cm->G(),
                                      {{e("0.4"), e("0.2*x2"), e("0")},
                                       {e("0.1"), e("0"), e("0.3*x1")}});
  GroupMap g = GroupMap::from_generator(ch, cm->G(), {e("0.3*x1"), e("0.2*x2"), e("0.1")});
  OneForm primed(ch, cm->G(), [cm, omega, g](const Vec& p, const Vec& X) {
    Mat ad = Mat(g(p).inverse() * omega(p, X).matrix() * g(p));
    return AlgebraElement(cm->G(), Coef(cm->G()->expand(ad) + g.theta(p, X).coeffs));
  });
  for (int i = 0; i < 5; ++i) {
    Path p = random_path(ch, rng);
    GroupElement lhs = mul(poe(omega, p, fast(800)).value, GroupElement(cm->G(), g(p.start())));
    GroupElement rhs = mul(GroupElement(cm->G(), g(p.end())), poe(primed, p, fast(800)).value);
    CHECK(dist(lhs, rhs) < 1e-7);
  }
}

TEST_CASE("rk4_projected agrees with cf_midpoint and stays on the group") {
  ConnectionPtr conn = spin_conn();
  Rng rng(17);
  Path p = random_path(square2(), rng);
  IntegratorConfig mid = fast(800);
  IntegratorConfig rk = fast(800);
  rk.scheme = Scheme::rk4_projected;
  CHECK(dist(poe(conn->A, p, mid).value, poe(conn->A, p, rk).value) < 1e-6);
  CHECK(poe(conn->A, p, rk).value.constraint_residual() < 1e-7);
}

TEST_CASE("hg_phi") {
  ConnectionPtr conn = spin_conn();
  auto cm = conn->cm;
  Chart ch = square2();
  Rng rng(19);
  GroupMap g = GroupMap::from_generator(ch, cm->G(), {e("0.3*x1"), e("0.2"), e("0.1*x2")});
  OneForm phi = OneForm::from_exprs(ch, cm->H(),
                                    {{e("0.1"), e("0"), e("0.05*x2")},
                                     {e("0"), e("0.08*x1"), e("0")}});
  GaugePtr gt = apply_gauge(conn, g, phi);

  SUBCASE("trivial H-part when phi = 0") {
    GaugePtr plain = apply_gauge(conn, g, OneForm::zero(ch, cm->H()));
    Path p = random_path(ch, rng);
    HgPhiResult res = hg_phi(cm, plain->phi, plain->target->A, p, fast());
    CHECK(dist(res.h, GroupElement::identity(cm->H())) < 1e-10);
    CHECK(dist(res.g, poe(plain->target->A, p, fast()).value) < 1e-12);
  }
  SUBCASE("g-component equals poe of the target form") {
    Path p = random_path(ch, rng);
    HgPhiResult res = hg_phi(cm, gt->phi, gt->target->A, p, fast());
    CHECK(dist(res.g, poe(gt->target->A, p, fast()).value) < 1e-9);
  }
  SUBCASE("endpoint identity") {
    for (int i = 0; i < 5; ++i) {
      Path p = random_path(ch, rng);
      HgPhiResult res = hg_phi(cm, gt->phi, gt->target->A, p, fast(800));
      GroupElement lhs =
          mul(poe(gt->target->A, p, fast(800)).value, GroupElement(cm->G(), g(p.start())));
      GroupElement rhs = mul(cm->t(inv(res.h)), mul(GroupElement(cm->G(), g(p.end())),
                                                    poe(conn->A, p, fast(800)).value));
      CHECK(dist(lhs, rhs) < 1e-7);
    }
  }
  SUBCASE("composition law across a split") {
    for (int i = 0; i < 5; ++i) {
      Path p = random_path(ch, rng);
      GroupElement whole = hg_phi(cm, gt->phi, gt->target->A, p, fast(800)).h;
      GroupElement h1 = hg_phi(cm, gt->phi, gt->target->A, p.restrict(0.0, 0.5), fast(800)).h;
      GroupElement h2 = hg_phi(cm, gt->phi, gt->target->A, p.restrict(0.5, 1.0), fast(800)).h;
      GroupElement poe2 = poe(gt->target->A, p.restrict(0.5, 1.0), fast(800)).value;
      CHECK(dist(whole, mul(h2, cm->alpha(poe2, h1))) < 1e-7);
    }
  }
}

TEST_CASE("soe basics") {
  ConnectionPtr conn = spin_conn();
  auto cm = conn->cm;
  Rng rng(23);
  Bigon sigma = test_bigon(rng);

  SUBCASE("B = 0 gives the identity even for curved A") {
    OneForm curved = OneForm::from_exprs(square2(), cm->G(),
                                         {{e("0.4"), e("0.3*x2"), e("0")},
                                          {e("0"), e("0.5"), e("0.6*x1")}});
    TwoForm zero = TwoForm::zero(square2(), cm->H());
    SoeInfo info;
    GroupElement h = soe(cm, curved, zero, sigma, fast(), {}, &info).value;
    CHECK(dist(h, GroupElement::identity(cm->H())) < 1e-8);
    CHECK(info.fake_flat_warning);  // curved A with B = 0 is not fake-flat
  }
  SUBCASE("non-bigon input is rejected") {
    Bigon bad = Bigon::from_exprs(square2(), {e("t - 0.5 + 0.2*s"), e("0")});
    CHECK_THROWS_AS(soe(cm, conn->A, conn->B, bad, fast()), NotABigon);
  }
  SUBCASE("target-source matching") {
    GroupElement h = soe(cm, conn->A, conn->B, sigma, fast(800)).value;
    GroupElement lhs = mul(cm->t(h), poe(conn->A, sigma.source(), fast(800)).value);
    CHECK(dist(lhs, poe(conn->A, sigma.target(), fast(800)).value) < 1e-6);
  }
  SUBCASE("vertical split") {
    GroupElement whole = soe(cm, conn->A, conn->B, sigma, fast(800)).value;
    GroupElement bot = soe(cm, conn->A, conn->B, sigma.restrict_s(0, 0.5), fast(800)).value;
    GroupElement top = soe(cm, conn->A, conn->B, sigma.restrict_s(0.5, 1), fast(800)).value;
    CHECK(dist(whole, mul(top, bot)) < 1e-6);
  }
}

TEST_CASE("abelian surface holonomy matches the 2-D quadrature") {
  auto ab = instance(CrossedModuleName::ABELIAN_GERBE);
  Chart ch = square2();
  OneForm A = OneForm::zero(ch, ab->G());
  TwoForm B = TwoForm::from_exprs(ch, ab->H(), {{e("0.8 + 0.3*x1 - 0.2*x2")}});
  Rng rng(29);
  Bigon sigma = test_bigon(rng);
  double quad = oracle::simpson2(
      [&](double s, double t) {
        return B(sigma(s, t), sigma.d_dt(s, t), sigma.d_ds(s, t)).coeffs[0];
      },
      256);
  GroupElement h = soe(ab, A, B, sigma, fast(800)).value;
  CHECK(std::abs(std::abs(std::arg(h.matrix(0, 0))) - std::abs(quad)) < 1e-7);
}

TEST_CASE("soe pullback naturality") {
  ConnectionPtr conn = spin_conn();
  auto cm = conn->cm;
  Chart ch = square2();
  auto f = [](const Vec& p) {
    Vec q(2);
    q << 0.6 * p[0] + 0.08 * std::sin(p[1]), 0.7 * p[1] + 0.05 * p[0] * p[0];
    return q;
  };
  OneForm fa = pullback(conn->A, f, ch);
  TwoForm fb = pullback(conn->B, f, ch);
  Rng rng(31);
  Bigon sigma = test_bigon(rng);
  Bigon pushed(ch, [f, sigma](double s, double t) { return f(sigma(s, t)); });
  GroupElement lhs = soe(cm, fa, fb, sigma, fast(800)).value;
  GroupElement rhs = soe(cm, conn->A, conn->B, pushed, fast(800)).value;
  CHECK(dist(lhs, rhs) < 1e-6);
}

TEST_CASE("reparameterization invariance") {
  ConnectionPtr conn = spin_conn();
  Rng rng(37);
  Bigon sigma = test_bigon(rng);
  Path p = random_path(square2(), rng);
  GroupElement base_poe = poe(conn->A, p, fast(2000)).value;
  CHECK(dist(poe(conn->A, p.reparameterized(), fast(2000)).value, base_poe) < 1e-6);
  GroupElement base_soe = soe(conn->cm, conn->A, conn->B, sigma, fast(800)).value;
  CHECK(dist(soe(conn->cm, conn->A, conn->B, sigma.reparameterized_t(), fast(800)).value,
             base_soe) < 1e-6);
  CHECK(dist(soe(conn->cm, conn->A, conn->B, sigma.reparameterized_s(), fast(800)).value,
             base_soe) < 1e-6);
}

TEST_CASE("Richardson estimate shrinks at second order") {
  ConnectionPtr conn = spin_conn();
  Rng rng(41);
  Path p = random_path(square2(), rng);
  double est400 = poe(conn->A, p, fast(400, true)).error_estimate;
  double est800 = poe(conn->A, p, fast(800, true)).error_estimate;
  CHECK(est800 < est400 / 3.8);
  // the estimate bounds the distance to a much finer run
  GroupElement refined = poe(conn->A, p, fast(6400)).value;
  CHECK(dist(poe(conn->A, p, fast(400)).value, refined) < 3 * est400);

  Bigon sigma = test_bigon(rng);
  double s200 = soe(conn->cm, conn->A, conn->B, sigma, fast(200, true)).error_estimate;
  double s400 = soe(conn->cm, conn->A, conn->B, sigma, fast(400, true)).error_estimate;
  CHECK(s400 < s200 / 3.5);
}

TEST_CASE("soe error estimate at default settings is below 1e-6") {
  ConnectionPtr conn = spin_conn();
  Rng rng(43);
  Bigon sigma = test_bigon(rng);
  IntegratorConfig cfg;  // shipped defaults: 2000 steps, richardson on
  TransportResult res = soe(conn->cm, conn->A, conn->B, sigma, cfg);
  CHECK(res.error_estimate < 1e-6);
}

TEST_CASE("soe_square right-edge correction closes the parameterized square") {
  // On a square whose right edge moves, t(soe_square) must connect the
  // composites (right o top) and (bottom o left) edge transports.
  ConnectionPtr conn = spin_conn();
  auto cm = conn->cm;
  Chart ch = square2();
  Bigon sq = Bigon::from_exprs(
      ch, {e("-0.4 + 0.8*t"), e("-0.3 + 0.5*s + 0.2*s*t + 0.1*t*(1-t)")});
  GroupElement h = soe_square(cm, conn->A, conn->B, sq, fast(800)).value;
  GroupElement top = poe(conn->A, sq.source(), fast(800)).value;
  GroupElement bottom = poe(conn->A, sq.target(), fast(800)).value;
  GroupElement left = poe(conn->A, sq.left_edge(), fast(800)).value;
  GroupElement right = poe(conn->A, sq.right_edge(), fast(800)).value;
  GroupElement lhs = mul(cm->t(h), mul(right, top));
  GroupElement rhs = mul(bottom, left);
  CHECK(dist(lhs, rhs) < 1e-6);
}
