#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbe/fields.hpp"
#include "oracles.hpp"

using namespace gerbe;

namespace {

Chart square2() { return Chart{2, {Interval{-1, 1}, Interval{-1, 1}}}; }
Chart cube3() { return Chart{3, {Interval{-1, 1}, Interval{-1, 1}, Interval{-1, 1}}}; }

ScalarExpr e(const char* s) { return ScalarExpr::parse(s); }

Vec pt2(double a, double b) {
  Vec p(2);
  p << a, b;
  return p;
}

}  // namespace

TEST_CASE("1-form evaluation") {
  auto su2 = GroupDescriptor::su2();
  Chart ch = square2();
  SUBCASE("zero form") {
    OneForm z = OneForm::zero(ch, su2);
    CHECK(z(pt2(0.3, -0.2), unit_vec(2, 0)).norm() == 0.0);
  }
  SUBCASE("linearity in the tangent") {
    OneForm A = OneForm::from_exprs(ch, su2, {{e("x1"), e("0.5"), e("x2*x2")},
                                              {e("1"), e("x1*x2"), e("0")}});
    Vec p = pt2(0.4, -0.7);
    Vec X = pt2(0.3, 0.8);
    Coef twice = A(p, Vec(2 * X)).coeffs;
    CHECK((twice - 2 * A(p, X).coeffs).norm() < 1e-14);
  }
  SUBCASE("single-component substitution") {
    OneForm A = OneForm::from_exprs(ch, su2, {{e("x1*x2"), e("0"), e("0")},
                                              {e("0"), e("0"), e("0")}});
    Coef c = A(pt2(0.5, -0.4), unit_vec(2, 0)).coeffs;
    CHECK(c[0] == doctest::Approx(-0.2));
    CHECK(c[1] == 0.0);
  }
  SUBCASE("component shape is validated") {
    CHECK_THROWS_AS(OneForm::from_exprs(ch, su2, {{e("0")}}), LoadError);
  }
}

TEST_CASE("2-form antisymmetry is structural") {
  auto su2 = GroupDescriptor::su2();
  Chart ch = square2();
  TwoForm B = TwoForm::from_exprs(ch, su2, {{e("x1"), e("x2"), e("1")}});
  Vec p = pt2(0.3, 0.6);
  Vec X = pt2(1, 2), Y = pt2(-1, 1);
  CHECK(B(p, X, X).norm() == 0.0);
  CHECK((B(p, X, Y).coeffs + B(p, Y, X).coeffs).norm() == 0.0);
}

TEST_CASE("exterior derivative by finite differences") {
  auto su2 = GroupDescriptor::su2();
  Chart ch = square2();
  SUBCASE("constant coefficients differentiate to zero") {
    OneForm A = OneForm::from_exprs(ch, su2, {{e("0.3"), e("0.7"), e("0")},
                                              {e("1"), e("0"), e("0.2")}});
    CHECK(d_fd(A, pt2(0.1, 0.2), unit_vec(2, 0), unit_vec(2, 1)).norm() < 1e-9);
  }
  SUBCASE("hand-computed exterior derivative of x2 dx1") {
    OneForm A = OneForm::from_exprs(ch, su2, {{e("x2"), e("0"), e("0")},
                                              {e("0"), e("0"), e("0")}});
    Coef c = d_fd(A, pt2(0.1, 0.2), unit_vec(2, 0), unit_vec(2, 1)).coeffs;
    CHECK(c[0] == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(std::abs(c[1]) < 1e-9);
  }
  SUBCASE("antisymmetry") {
    OneForm A = OneForm::from_exprs(ch, su2, {{e("x1*x2"), e("x2*x2"), e("0")},
                                              {e("x1"), e("0"), e("x2")}});
    Vec p = pt2(-0.2, 0.4);
    Vec X = pt2(0.7, 0.1), Y = pt2(-0.3, 0.9);
    CHECK((d_fd(A, p, X, Y).coeffs + d_fd(A, p, Y, X).coeffs).norm() < 1e-9);
  }
  SUBCASE("matches the analytic derivative on cubic polynomials") {
    // A = x1^2 x2 dx1 . e1 + x1^3 dx2 . e2 ; dA(e1, e2) = 3 x1^2 e2 - x1^2 e1
    OneForm A = OneForm::from_exprs(ch, su2, {{e("x1^2*x2"), e("0"), e("0")},
                                              {e("0"), e("x1^3"), e("0")}});
    Vec p = pt2(0.5, -0.3);
    Coef c = d_fd(A, p, unit_vec(2, 0), unit_vec(2, 1)).coeffs;
    CHECK(c[0] == doctest::Approx(-0.25).epsilon(1e-6));
    CHECK(c[1] == doctest::Approx(0.75).epsilon(1e-6));
  }
  SUBCASE("boundary proximity is an error") {
    OneForm A = OneForm::zero(ch, su2);
    CHECK_THROWS_AS(d_fd(A, pt2(1.0, 0.0), unit_vec(2, 0), unit_vec(2, 1)), BoundaryProximity);
  }
}

TEST_CASE("wedge brackets") {
  auto su2 = GroupDescriptor::su2();
  Chart ch = square2();
  OneForm A = OneForm::from_exprs(ch, su2, {{e("0.5"), e("x2"), e("0")},
                                            {e("x1"), e("0"), e("0.3")}});
  Vec p = pt2(0.2, -0.5);
  Vec X = pt2(1, 0), Y = pt2(0, 1);
  SUBCASE("[A ^ A](X, X) = 0") {
    CHECK(wedge_bracket(A, A, p, X, X).norm() == 0.0);
  }
  SUBCASE("abelian algebra gives zero") {
    auto u1 = GroupDescriptor::u1();
    OneForm Au = OneForm::from_exprs(ch, u1, {{e("x1")}, {e("x2*x2")}});
    CHECK(wedge_bracket(Au, Au, p, X, Y).norm() < 1e-14);
  }
  SUBCASE("half of [A ^ A] expands to the plain bracket") {
    Coef lhs = wedge_bracket(A, A, p, X, Y).coeffs;  // [A(X),A(Y)] - [A(Y),A(X)]
    Coef rhs = 2 * bracket(A(p, X), A(p, Y)).coeffs;
    CHECK((lhs - rhs).norm() < 1e-13);
  }
}

TEST_CASE("fake curvature") {
  Chart ch = square2();
  SUBCASE("zero connection") {
    auto cm = instance(CrossedModuleName::INNER_SU2);
    OneForm A = OneForm::zero(ch, cm->G());
    TwoForm B = TwoForm::zero(ch, cm->H());
    CHECK(fake_curvature(*cm, A, B, pt2(0, 0), unit_vec(2, 0), unit_vec(2, 1)).norm() == 0.0);
  }
  SUBCASE("abelian gerbe with A = 0 is fake-flat for every B") {
    auto cm = instance(CrossedModuleName::ABELIAN_GERBE);
    OneForm A = OneForm::zero(ch, cm->G());
    TwoForm B = TwoForm::from_exprs(ch, cm->H(), {{e("1 + x1*x2")}});
    CHECK(fake_curvature(*cm, A, B, pt2(0.2, 0.1), unit_vec(2, 0), unit_vec(2, 1)).norm() == 0.0);
  }
}

TEST_CASE("curvature 3-form") {
  auto ab = instance(CrossedModuleName::ABELIAN_GERBE);
  Chart ch = cube3();
  SUBCASE("constant B with A = 0") {
    OneForm A = OneForm::zero(ch, ab->G());
    TwoForm B = TwoForm::from_exprs(ch, ab->H(), {{e("0.4")}, {e("0.2")}, {e("0.9")}});
    Vec p = Vec::Zero(3);
    CHECK(curvature3(*ab, A, B, p, unit_vec(3, 0), unit_vec(3, 1), unit_vec(3, 2)).norm() < 1e-9);
  }
  SUBCASE("hand-computed dB for B = f dx1^dx2") {
    // components ordered (12), (13), (23); f = x3^2 so curv = 2 x3
    OneForm A = OneForm::zero(ch, ab->G());
    TwoForm B = TwoForm::from_exprs(ch, ab->H(), {{e("x3^2")}, {e("0")}, {e("0")}});
    Vec p = Vec::Zero(3);
    p[2] = 0.4;
    Coef c = curvature3(*ab, A, B, p, unit_vec(3, 0), unit_vec(3, 1), unit_vec(3, 2)).coeffs;
    CHECK(c[0] == doctest::Approx(0.8).epsilon(1e-6));
  }
  SUBCASE("total antisymmetry in the three slots") {
    auto cm = instance(CrossedModuleName::INNER_SU2);
    OneForm A = OneForm::from_exprs(
        ch, cm->G(),
        {{e("0.2"), e("x3"), e("0")}, {e("x1"), e("0"), e("0.1")}, {e("0"), e("x2"), e("0.3")}});
    TwoForm B = TwoForm::from_exprs(ch, cm->H(), {{e("x1"), e("0"), e("0.5")},
                                                  {e("0"), e("x3"), e("0")},
                                                  {e("0.3"), e("0"), e("x2")}});
    Rng rng(1);
    Vec p = Vec::Zero(3);
    p << 0.1, -0.2, 0.25;
    Vec X(3), Y(3), Z(3);
    X << 1, 0.2, -0.1;
    Y << 0, 1, 0.4;
    Z << 0.3, -0.5, 1;
    Coef base = curvature3(*cm, A, B, p, X, Y, Z).coeffs;
    CHECK((curvature3(*cm, A, B, p, Y, X, Z).coeffs + base).norm() < 1e-7);
    CHECK((curvature3(*cm, A, B, p, X, Z, Y).coeffs + base).norm() < 1e-7);
    CHECK((curvature3(*cm, A, B, p, Z, X, Y).coeffs - base).norm() < 1e-7);
  }
}

TEST_CASE("group-valued maps") {
  auto su2 = GroupDescriptor::su2();
  Chart ch = square2();
  GroupMap g = GroupMap::from_generator(ch, su2, {e("0.3*x1"), e("0.2*x2"), e("0.1")});
  SUBCASE("values satisfy the constraint structurally") {
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
      Vec p = pt2(rng.uniform(-1, 1), rng.uniform(-1, 1));
      CHECK(su2->constraint_residual(g(p)) < 1e-12);
    }
  }
  SUBCASE("Maurer-Cartan pullbacks of a one-parameter family") {
    // g(x) = exp(x1 X0): theta(e1) = X0 = theta_bar(e1)
    GroupMap f = GroupMap::from_generator(ch, su2, {e("x1"), e("0"), e("0")});
    Vec p = pt2(0.2, 0.0);
    Coef expected = Coef::Zero(3);
    expected[0] = 1.0;
    CHECK((f.theta(p, unit_vec(2, 0)).coeffs - expected).norm() < 1e-8);
    CHECK((f.theta_bar(p, unit_vec(2, 0)).coeffs - expected).norm() < 1e-8);
  }
  SUBCASE("product and inverse maps stay on the group") {
    GroupMap prod = g.pointwise_product(g.pointwise_inverse());
    CHECK(frob(Mat(prod(pt2(0.3, 0.4)) - mat_identity(2))) < 1e-12);
  }
}

TEST_CASE("paths") {
  Chart ch = square2();
  SUBCASE("load-time invariant: image inside the chart") {
    Path leaves = Path::from_exprs(ch, {e("2*u"), e("0")});
    CHECK_THROWS_AS(leaves.check_in_chart(), LoadError);
    Path stays = Path::from_exprs(ch, {e("u - 0.5"), e("0.3*u")});
    CHECK_NOTHROW(stays.check_in_chart());
  }
  SUBCASE("sitting instants kill endpoint velocity") {
    Path p = Path::from_exprs(ch, {e("u - 0.5"), e("0.3*u")}, true);
    CHECK(p.velocity(0.0).norm() < 1e-4);
    CHECK(p.velocity(1.0).norm() < 1e-4);
    CHECK((p(0.0) - pt2(-0.5, 0)).norm() < 1e-12);
    CHECK((p(1.0) - pt2(0.5, 0.3)).norm() < 1e-12);
  }
  SUBCASE("concatenation requires matching endpoints") {
    Path a = Path::from_exprs(ch, {e("u - 0.9"), e("0")});
    Path b = Path::from_exprs(ch, {e("0.5*u"), e("0")});
    CHECK_THROWS_AS(Path::concatenate(a, b), NonComposable);
    Path c = Path::from_exprs(ch, {e("0.1 + 0.5*u"), e("0")});
    Path glued = Path::concatenate(a, c);
    CHECK((glued(0.0) - a(0.0)).norm() < 1e-12);
    CHECK((glued(1.0) - c(1.0)).norm() < 1e-12);
    CHECK((glued(0.5) - a(1.0)).norm() < 1e-12);
  }
}

TEST_CASE("bigons") {
  Chart ch = square2();
  SUBCASE("linear interpolation of endpoint-sharing paths is a bigon") {
    Path a = Path::from_exprs(ch, {e("u - 0.5"), e("0")});
    Path b = Path::from_exprs(ch, {e("u - 0.5"), e("0.4*u*(1 - u)")});
    Bigon s = Bigon::linear_interpolation(a, b);
    CHECK(s.boundary_residual() < 1e-12);
  }
  SUBCASE("a drifting family is flagged") {
    Bigon bad = Bigon::from_exprs(ch, {e("t - 0.5 + 0.1*s"), e("0")});
    CHECK(bad.boundary_residual() > 1e-3);
    CHECK_THROWS_AS(bad.require_bigon(), NotABigon);
  }
  SUBCASE("constant map is a bigon with zero residual") {
    Bigon constant = Bigon::from_exprs(ch, {e("0.1"), e("0.2")});
    CHECK(constant.boundary_residual() == 0.0);
  }
  SUBCASE("edges and faces") {
    Bigon s = Bigon::from_exprs(ch, {e("t - 0.5"), e("0.3*s*t*(1-t)")});
    CHECK((s.source()(0.3) - s(0.0, 0.3)).norm() == 0.0);
    CHECK((s.target()(0.3) - s(1.0, 0.3)).norm() == 0.0);
    CHECK((s.left_edge()(0.7) - s(0.7, 0.0)).norm() == 0.0);
    CHECK((s.right_edge()(0.7) - s(0.7, 1.0)).norm() == 0.0);
  }
}

TEST_CASE("pullback along a chart diffeomorphism") {
  auto su2 = GroupDescriptor::su2();
  Chart ch = square2();
  OneForm A = OneForm::from_exprs(ch, su2, {{e("x2"), e("0"), e("0")},
                                            {e("0"), e("x1"), e("0")}});
  auto f = [](const Vec& p) {
    Vec q(2);
    q << 0.5 * p[0] + 0.1 * p[1] * p[1], 0.8 * p[1];
    return q;
  };
  // compare f^*A against the chain rule at a point
  Vec p = pt2(0.3, -0.4);
  Vec X = pt2(1.0, 0.5);
  OneForm pulled = pullback(A, f, ch);
  double h = 1e-6;
  Vec df = Vec((f(p + h * X) - f(p - h * X)) / (2 * h));
  Coef expected = A(f(p), df).coeffs;
  CHECK((pulled(p, X).coeffs - expected).norm() < 1e-6);
}
