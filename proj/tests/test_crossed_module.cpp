#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbe/crossed_module.hpp"
#include "oracles.hpp"

using namespace gerbe;

TEST_CASE("stock instances satisfy the crossed-module axioms") {
  for (auto name : {CrossedModuleName::ABELIAN_GERBE, CrossedModuleName::INNER_SU2,
                    CrossedModuleName::INNER_SO3, CrossedModuleName::SPIN}) {
    auto cm = instance(name);
    AxiomCheckReport rep = check_axioms(*cm, 100, 7);
    INFO(cm->name());
    CHECK(rep.pass(1e-8, 1e-5));
  }
}

TEST_CASE("INNER_SO3 axioms at 200 samples stay below 1e-8") {
  AxiomCheckReport rep = check_axioms(*instance(CrossedModuleName::INNER_SO3), 200, 11);
  CHECK(rep.residuals.at("t_homomorphism") < 1e-8);
  CHECK(rep.residuals.at("equivariance") < 1e-8);
  CHECK(rep.residuals.at("peiffer") < 1e-8);
}

TEST_CASE("a corrupted t is detected by the equivariance residual") {
  auto good = instance(CrossedModuleName::INNER_SU2);
  auto cm = std::make_shared<CrossedModule>(
      "corrupted", good->G(), good->H(), [](const Mat& h) { return Mat(1.01 * h); },
      [](const Mat& g, const Mat& h) { return Mat(g * h * g.inverse()); },
      Eigen::MatrixXd::Identity(3, 3),
      [good](const AlgebraElement& x, const AlgebraElement& y) { return bracket(x, y); },
      [good](const Mat& h, const AlgebraElement& x) {
        return AlgebraElement(good->G(), good->G()->expand(Mat(h.inverse() * x.matrix() * h - x.matrix())));
      },
      [good](const Mat& h, const AlgebraElement& x) {
        return AlgebraElement(good->G(), good->G()->expand(Mat(x.matrix() - h * x.matrix() * h.inverse())));
      },
      [good](const Mat& g, const AlgebraElement& y) {
        return AlgebraElement(good->G(), good->G()->expand(Mat(g * y.matrix() * g.inverse())));
      });
  AxiomCheckReport rep = check_axioms(*cm, 50, 3);
  // uniform scaling commutes with conjugation, so the failure shows up in
  // the homomorphism residual rather than the equivariance one
  CHECK(rep.residuals.at("t_homomorphism") > 1e-3);
  CHECK(rep.max_residual() > 1e-3);
}

TEST_CASE("abelian gerbe residuals vanish identically") {
  AxiomCheckReport rep = check_axioms(*instance(CrossedModuleName::ABELIAN_GERBE), 100, 5);
  CHECK(rep.residuals.at("t_homomorphism") == 0.0);
  CHECK(rep.residuals.at("equivariance") == 0.0);
  CHECK(rep.residuals.at("peiffer") < 1e-15);  // one rounding ulp from h h' h^{-1}
  // trivial homomorphism: t(h) = 1 for all h
  auto cm = instance(CrossedModuleName::ABELIAN_GERBE);
  Rng rng(1);
  CHECK(frob(Mat(cm->t(cm->random_h(rng)).matrix - mat_identity(1))) == 0.0);
}

TEST_CASE("SPIN covers SO3 twice") {
  auto cm = instance(CrossedModuleName::SPIN);
  Mat minus_i = Mat(-mat_identity(2));
  CHECK(frob(Mat(cm->t_matrix(minus_i) - mat_identity(3))) < 1e-12);
  // and t of a half-turn about e3 is the corresponding SO3 rotation
  Coef c = Coef::Zero(3);
  c[2] = 0.8;
  GroupElement h = exp_map(AlgebraElement(cm->H(), c));
  Eigen::Matrix3d expected = oracle::rodrigues(Eigen::Vector3d(0, 0, 1), 0.8);
  CHECK(frob(Mat(cm->t(h).matrix - Mat(expected.cast<cplx>()))) < 1e-10);
}

TEST_CASE("INNER conjugation satisfies the Peiffer identity exactly") {
  auto cm = instance(CrossedModuleName::INNER_SU2);
  Rng rng(2);
  GroupElement g = cm->random_g(rng), h = cm->random_h(rng);
  CHECK(frob(Mat(cm->alpha(g, h).matrix - g.matrix * h.matrix * g.matrix.inverse())) < 1e-13);
}

TEST_CASE("tilde_alpha") {
  auto cm = instance(CrossedModuleName::INNER_SU2);
  Rng rng(3);
  GroupElement g = cm->random_g(rng), h = cm->random_h(rng);
  GroupElement one_h = GroupElement::identity(cm->H());
  GroupElement one_g = GroupElement::identity(cm->G());
  CHECK(dist(cm->tilde_alpha(h, one_g), one_h) < 1e-13);
  CHECK(dist(cm->tilde_alpha(one_h, g), one_h) < 1e-13);
  Mat expected = Mat(h.matrix.inverse() * g.matrix * h.matrix * g.matrix.inverse());
  CHECK(frob(Mat(cm->tilde_alpha(h, g).matrix - expected)) < 1e-13);
}

TEST_CASE("differential maps") {
  SUBCASE("t_star of zero is zero") {
    auto dm = differential_maps(instance(CrossedModuleName::SPIN));
    auto cm = instance(CrossedModuleName::SPIN);
    CHECK(dm.t_star(AlgebraElement::zero(cm->H())).norm() == 0.0);
  }
  SUBCASE("SPIN t_star is an isomorphism") {
    auto cm = instance(CrossedModuleName::SPIN);
    CHECK(cm->t_star_invertible());
    CHECK(std::abs(cm->t_star_matrix().determinant()) > 0.5);
  }
  SUBCASE("INNER a1 equals the bracket") {
    auto cm = instance(CrossedModuleName::INNER_SO3);
    Rng rng(4);
    AlgebraElement x = cm->random_alg_g(rng), y = cm->random_alg_h(rng);
    CHECK((cm->a1(x, y).coeffs - bracket(x, y).coeffs).norm() < 1e-12);
  }
  SUBCASE("SPIN t_star composed with a2L recovers the adjoint differential") {
    auto cm = instance(CrossedModuleName::SPIN);
    Rng rng(5);
    // at h = 1 the left-translated action differential vanishes; the
    // statement with content: t_star(a2L(h, X)) = Ad_{t(h)^{-1}}(X) - X
    GroupElement h = cm->random_h(rng);
    AlgebraElement x = cm->random_alg_g(rng);
    Coef lhs = cm->t_star(cm->a2L(h.matrix, x)).coeffs;
    Mat th = cm->t_matrix(h.matrix);
    Coef rhs = Coef(cm->G()->expand(Mat(th.inverse() * x.matrix() * th)) - x.coeffs);
    CHECK((lhs - rhs).norm() < 1e-6);
  }
}

TEST_CASE("morphism source and target recompute") {
  auto cm = instance(CrossedModuleName::SPIN);
  Rng rng(6);
  TwoGroupMorphism m{cm, cm->random_h(rng), cm->random_g(rng)};
  CHECK(dist(m.source(), m.g) == 0.0);
  CHECK(dist(m.target(), mul(cm->t(m.h), m.g)) == 0.0);
}

TEST_CASE("vertical composition") {
  auto cm = instance(CrossedModuleName::INNER_SU2);
  Rng rng(7);
  TwoGroupMorphism m{cm, cm->random_h(rng), cm->random_g(rng)};
  SUBCASE("identity 2-cell is neutral") {
    TwoGroupMorphism id_cell = TwoGroupMorphism::identity(cm, m.target());
    CHECK(dist(mor_vcompose(id_cell, m), m) < 1e-12);
  }
  SUBCASE("vertical inverse") {
    TwoGroupMorphism inverse = mor_inverse_vertical(m);
    TwoGroupMorphism unit = mor_vcompose(inverse, m);
    CHECK(dist(unit.h, GroupElement::identity(cm->H())) < 1e-10);
    CHECK(dist(unit.g, m.g) < 1e-12);
  }
  SUBCASE("non-composable pairs are rejected") {
    TwoGroupMorphism other{cm, cm->random_h(rng), cm->random_g(rng)};
    CHECK_THROWS_AS(mor_vcompose(m, other), NonComposable);
  }
  SUBCASE("associative and unital on composable triples") {
    TwoGroupMorphism m2{cm, cm->random_h(rng), m.target()};
    TwoGroupMorphism m3{cm, cm->random_h(rng), m2.target()};
    TwoGroupMorphism left = mor_vcompose(m3, mor_vcompose(m2, m));
    TwoGroupMorphism right = mor_vcompose(mor_vcompose(m3, m2), m);
    CHECK(dist(left, right) < 1e-8);
  }
}

TEST_CASE("product structure") {
  auto cm = instance(CrossedModuleName::SPIN);
  Rng rng(8);
  TwoGroupMorphism m{cm, cm->random_h(rng), cm->random_g(rng)};
  SUBCASE("unit") {
    TwoGroupMorphism one{cm, GroupElement::identity(cm->H()), GroupElement::identity(cm->G())};
    CHECK(dist(mor_product(one, m), m) < 1e-12);
    CHECK(dist(mor_product(m, one), m) < 1e-12);
  }
  SUBCASE("abelian product is componentwise") {
    auto ab = instance(CrossedModuleName::ABELIAN_GERBE);
    Rng r2(9);
    TwoGroupMorphism a{ab, ab->random_h(r2), GroupElement::identity(ab->G())};
    TwoGroupMorphism b{ab, ab->random_h(r2), GroupElement::identity(ab->G())};
    TwoGroupMorphism p = mor_product(a, b);
    CHECK(frob(Mat(p.h.matrix - a.h.matrix * b.h.matrix)) < 1e-14);
  }
  SUBCASE("source and target are homomorphisms") {
    for (int i = 0; i < 20; ++i) {
      TwoGroupMorphism a{cm, cm->random_h(rng), cm->random_g(rng)};
      TwoGroupMorphism b{cm, cm->random_h(rng), cm->random_g(rng)};
      TwoGroupMorphism p = mor_product(a, b);
      CHECK(dist(p.source(), mul(a.source(), b.source())) < 1e-9);
      CHECK(dist(p.target(), mul(a.target(), b.target())) < 1e-9);
    }
  }
  SUBCASE("interchange law on random composable quadruples") {
    for (int i = 0; i < 20; ++i) {
      TwoGroupMorphism m1{cm, cm->random_h(rng), cm->random_g(rng)};
      TwoGroupMorphism m2{cm, cm->random_h(rng), m1.target()};
      TwoGroupMorphism n1{cm, cm->random_h(rng), cm->random_g(rng)};
      TwoGroupMorphism n2{cm, cm->random_h(rng), n1.target()};
      TwoGroupMorphism lhs = mor_product(mor_vcompose(m2, m1), mor_vcompose(n2, n1));
      TwoGroupMorphism rhs = mor_vcompose(mor_product(m2, n2), mor_product(m1, n1));
      CHECK(dist(lhs, rhs) < 1e-8);
    }
  }
}

TEST_CASE("check_axioms requires at least one sample") {
  CHECK_THROWS_AS(check_axioms(*instance(CrossedModuleName::SPIN), 0, 1), Error);
}

TEST_CASE("determinism of check_axioms given a seed") {
  auto cm = instance(CrossedModuleName::SPIN);
  AxiomCheckReport a = check_axioms(*cm, 50, 1234);
  AxiomCheckReport b = check_axioms(*cm, 50, 1234);
  CHECK(a.residuals == b.residuals);
}
