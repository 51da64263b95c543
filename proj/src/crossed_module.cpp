#include "gerbe/crossed_module.hpp"

#include <cmath>

namespace gerbe {

CrossedModule::CrossedModule(
    std::string name, DescriptorPtr G, DescriptorPtr H, TMap t, ActionMap alpha,
    Eigen::MatrixXd t_star,
    std::function<AlgebraElement(const AlgebraElement&, const AlgebraElement&)> a1,
    std::function<AlgebraElement(const Mat&, const AlgebraElement&)> a2L,
    std::function<AlgebraElement(const Mat&, const AlgebraElement&)> a2R,
    std::function<AlgebraElement(const Mat&, const AlgebraElement&)> act_alg)
    : name_(std::move(name)),
      G_(std::move(G)),
      H_(std::move(H)),
      t_(std::move(t)),
      alpha_(std::move(alpha)),
      t_star_(std::move(t_star)),
      a1_(std::move(a1)),
      a2L_(std::move(a2L)),
      a2R_(std::move(a2R)),
      act_alg_(std::move(act_alg)) {
  if (t_star_.rows() == t_star_.cols() && t_star_.rows() > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(t_star_);
    if (lu.isInvertible()) {
      t_star_invertible_ = true;
      t_star_inv_ = lu.inverse();
    }
  }
}

GroupElement CrossedModule::t(const GroupElement& h) const {
  return GroupElement(G_, t_(h.matrix));
}

GroupElement CrossedModule::alpha(const GroupElement& g, const GroupElement& h) const {
  return GroupElement(H_, alpha_(g.matrix, h.matrix));
}

GroupElement CrossedModule::tilde_alpha(const GroupElement& h, const GroupElement& g) const {
  return GroupElement(H_, Mat(h.matrix.inverse() * alpha_(g.matrix, h.matrix)));
}

AlgebraElement CrossedModule::t_star(const AlgebraElement& Y) const {
  Coef out(G_->algebra_dim());
  Eigen::VectorXd y = Eigen::VectorXd::Zero(H_->algebra_dim());
  for (int i = 0; i < y.size(); ++i) y[i] = Y.coeffs[i];
  Eigen::VectorXd x = t_star_ * y;
  for (int i = 0; i < out.size(); ++i) out[i] = x[i];
  return AlgebraElement(G_, out);
}

bool CrossedModule::t_star_invertible() const { return t_star_invertible_; }

AlgebraElement CrossedModule::t_star_inverse(const AlgebraElement& X) const {
  if (!t_star_invertible_) throw SingularTStar("t_star is not invertible for " + name_);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(G_->algebra_dim());
  for (int i = 0; i < x.size(); ++i) x[i] = X.coeffs[i];
  Eigen::VectorXd y = t_star_inv_ * x;
  Coef out(H_->algebra_dim());
  for (int i = 0; i < out.size(); ++i) out[i] = y[i];
  return AlgebraElement(H_, out);
}

namespace {

AlgebraElement random_alg(const DescriptorPtr& d, Rng& rng, double scale) {
  Coef c(d->algebra_dim());
  for (int i = 0; i < c.size(); ++i) c[i] = rng.uniform(-scale, scale);
  return AlgebraElement(d, c);
}

}  // namespace

GroupElement CrossedModule::random_g(Rng& rng, double scale) const {
  return exp_map(random_alg(G_, rng, scale));
}
GroupElement CrossedModule::random_h(Rng& rng, double scale) const {
  return exp_map(random_alg(H_, rng, scale));
}
AlgebraElement CrossedModule::random_alg_g(Rng& rng, double scale) const {
  return random_alg(G_, rng, scale);
}
AlgebraElement CrossedModule::random_alg_h(Rng& rng, double scale) const {
  return random_alg(H_, rng, scale);
}

// ---- instances -------------------------------------------------------------

namespace {

// Quaternion lift SO(3) -> SU(2) (Shepperd); either sign works since the
// conjugation action is insensitive to it.
Mat su2_lift_of_so3(const Mat& R) {
  double m[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = R(r, c).real();
  double tr = m[0][0] + m[1][1] + m[2][2];
  double w, x, y, z;
  if (tr > 0) {
    double s = std::sqrt(tr + 1.0) * 2;
    w = 0.25 * s;
    x = (m[2][1] - m[1][2]) / s;
    y = (m[0][2] - m[2][0]) / s;
    z = (m[1][0] - m[0][1]) / s;
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2;
    w = (m[2][1] - m[1][2]) / s;
    x = 0.25 * s;
    y = (m[0][1] + m[1][0]) / s;
    z = (m[0][2] + m[2][0]) / s;
  } else if (m[1][1] > m[2][2]) {
    double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2;
    w = (m[0][2] - m[2][0]) / s;
    x = (m[0][1] + m[1][0]) / s;
    y = 0.25 * s;
    z = (m[1][2] + m[2][1]) / s;
  } else {
    double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2;
    w = (m[1][0] - m[0][1]) / s;
    x = (m[0][2] + m[2][0]) / s;
    y = (m[1][2] + m[2][1]) / s;
    z = (m[2][1] - m[1][2]) / s;
  }
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n; x /= n; y /= n; z /= n;
  // U = w I - i (x s1 + y s2 + z s3)
  const cplx I(0, 1);
  Mat U(2, 2);
  U(0, 0) = w - I * z;
  U(0, 1) = -I * x - y;
  U(1, 0) = -I * x + y;
  U(1, 1) = w + I * z;
  return U;
}

CrossedModulePtr make_inner(const DescriptorPtr& G) {
  auto conj_action = [](const Mat& g, const Mat& h) { return Mat(g * h * g.inverse()); };
  int n = G->algebra_dim();
  auto a1 = [G](const AlgebraElement& X, const AlgebraElement& Y) { return bracket(X, Y); };
  auto a2L = [G](const Mat& h, const AlgebraElement& X) {
    Mat xm = X.matrix();
    return AlgebraElement(G, G->expand(Mat(h.inverse() * xm * h - xm)));
  };
  auto a2R = [G](const Mat& h, const AlgebraElement& X) {
    Mat xm = X.matrix();
    return AlgebraElement(G, G->expand(Mat(xm - h * xm * h.inverse())));
  };
  auto act = [G](const Mat& g, const AlgebraElement& Y) {
    return AlgebraElement(G, G->expand(Mat(g * Y.matrix() * g.inverse())));
  };
  std::string nm = G->name() == "SU2" ? "INNER_SU2" : "INNER_SO3";
  return std::make_shared<CrossedModule>(
      nm, G, G, [](const Mat& h) { return h; }, conj_action, Eigen::MatrixXd::Identity(n, n), a1,
      a2L, a2R, act);
}

CrossedModulePtr make_abelian_gerbe() {
  auto G = GroupDescriptor::trivial();
  auto H = GroupDescriptor::u1();
  auto t = [](const Mat&) { return mat_identity(1); };
  auto alpha = [](const Mat&, const Mat& h) { return h; };
  auto a1 = [H](const AlgebraElement&, const AlgebraElement&) { return AlgebraElement::zero(H); };
  auto a2 = [H](const Mat&, const AlgebraElement&) { return AlgebraElement::zero(H); };
  auto act = [](const Mat&, const AlgebraElement& Y) { return Y; };
  return std::make_shared<CrossedModule>("ABELIAN_GERBE", G, H, t, alpha,
                                         Eigen::MatrixXd::Zero(0, 1), a1, a2, a2, act);
}

CrossedModulePtr make_spin() {
  auto G = GroupDescriptor::so3();
  auto H = GroupDescriptor::su2();
  // t(h): columns are h e_k h^{-1} expanded over the su2 basis; with the
  // bases used here t_star is the identity on coefficients.
  auto t = [H](const Mat& h) {
    Mat R = mat_zero(3);
    for (int k = 0; k < 3; ++k) {
      Coef col = H->expand(Mat(h * H->basis()[k] * h.adjoint()));
      for (int j = 0; j < 3; ++j) R(j, k) = col[j];
    }
    return R;
  };
  auto alpha = [](const Mat& g, const Mat& h) {
    Mat lift = su2_lift_of_so3(g);
    return Mat(lift * h * lift.adjoint());
  };
  // lambda: so(3) coefficients reinterpreted over the su(2) basis.
  auto lift_alg = [H, G](const AlgebraElement& X) {
    Coef c = X.coeffs;
    return AlgebraElement(H, c);
  };
  auto a1 = [lift_alg](const AlgebraElement& X, const AlgebraElement& Y) {
    return bracket(lift_alg(X), Y);
  };
  auto a2L = [H, lift_alg](const Mat& h, const AlgebraElement& X) {
    Mat lm = lift_alg(X).matrix();
    return AlgebraElement(H, H->expand(Mat(h.adjoint() * lm * h - lm)));
  };
  auto a2R = [H, lift_alg](const Mat& h, const AlgebraElement& X) {
    Mat lm = lift_alg(X).matrix();
    return AlgebraElement(H, H->expand(Mat(lm - h * lm * h.adjoint())));
  };
  auto act = [H](const Mat& g, const AlgebraElement& Y) {
    Mat lift = su2_lift_of_so3(g);
    return AlgebraElement(H, H->expand(Mat(lift * Y.matrix() * lift.adjoint())));
  };
  return std::make_shared<CrossedModule>("SPIN", G, H, t, alpha, Eigen::MatrixXd::Identity(3, 3),
                                         a1, a2L, a2R, act);
}

}  // namespace

CrossedModuleName crossed_module_name_from_string(const std::string& s) {
  if (s == "ABELIAN_GERBE") return CrossedModuleName::ABELIAN_GERBE;
  if (s == "INNER_SU2") return CrossedModuleName::INNER_SU2;
  if (s == "INNER_SO3") return CrossedModuleName::INNER_SO3;
  if (s == "SPIN") return CrossedModuleName::SPIN;
  throw Error("unknown crossed module name '" + s + "'");
}

CrossedModulePtr instance(CrossedModuleName name) {
  switch (name) {
    case CrossedModuleName::ABELIAN_GERBE: {
      static CrossedModulePtr cm = make_abelian_gerbe();
      return cm;
    }
    case CrossedModuleName::INNER_SU2: {
      static CrossedModulePtr cm = make_inner(GroupDescriptor::su2());
      return cm;
    }
    case CrossedModuleName::INNER_SO3: {
      static CrossedModulePtr cm = make_inner(GroupDescriptor::so3());
      return cm;
    }
    case CrossedModuleName::SPIN: {
      static CrossedModulePtr cm = make_spin();
      return cm;
    }
  }
  throw Error("unknown crossed module");
}

CrossedModulePtr h_trivial_module(const DescriptorPtr& G) {
  auto H = GroupDescriptor::trivial();
  auto t = [n = G->dim()](const Mat&) { return mat_identity(n); };
  auto alpha = [](const Mat&, const Mat&) { return mat_identity(1); };
  auto a1 = [H](const AlgebraElement&, const AlgebraElement&) { return AlgebraElement::zero(H); };
  auto a2 = [H](const Mat&, const AlgebraElement&) { return AlgebraElement::zero(H); };
  auto act = [H](const Mat&, const AlgebraElement&) { return AlgebraElement::zero(H); };
  return std::make_shared<CrossedModule>("H_TRIVIAL_" + G->name(), G, H, t, alpha,
                                         Eigen::MatrixXd::Zero(G->algebra_dim(), 0), a1, a2, a2,
                                         act);
}

// ---- axiom checking --------------------------------------------------------

double AxiomCheckReport::max_residual() const {
  double m = 0;
  for (const auto& [k, v] : residuals) m = std::max(m, v);
  return m;
}

bool AxiomCheckReport::pass(double tol_axiom, double tol_fd) const {
  for (const auto& [k, v] : residuals) {
    double tol = (k.rfind("fd_", 0) == 0) ? tol_fd : tol_axiom;
    if (v > tol) return false;
  }
  return true;
}

AxiomCheckReport check_axioms(const CrossedModule& cm, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error("check_axioms: n_samples must be >= 1");
  Rng rng(seed);
  AxiomCheckReport rep;
  auto bump = [&rep](const std::string& key, double v) {
    auto [it, inserted] = rep.residuals.try_emplace(key, v);
    if (!inserted) it->second = std::max(it->second, v);
  };
  const double eps = 1e-6;  // central FD step for differentials
  for (int i = 0; i < n_samples; ++i) {
    GroupElement g = cm.random_g(rng), h1 = cm.random_h(rng), h2 = cm.random_h(rng);
    // t is a homomorphism
    bump("t_homomorphism",
         frob(cm.t_matrix(Mat(h1.matrix * h2.matrix)) - cm.t_matrix(h1.matrix) * cm.t_matrix(h2.matrix)));
    // equivariance: t(alpha(g, h)) = g t(h) g^{-1}
    bump("equivariance",
         frob(cm.t_matrix(cm.alpha_matrix(g.matrix, h1.matrix)) -
              g.matrix * cm.t_matrix(h1.matrix) * g.matrix.inverse()));
    // Peiffer: alpha(t(h), h') = h h' h^{-1}
    bump("peiffer", frob(cm.alpha_matrix(cm.t_matrix(h1.matrix), h2.matrix) -
                         h1.matrix * h2.matrix * h1.matrix.inverse()));

    // differentials vs central finite differences
    AlgebraElement X = cm.random_alg_g(rng), Y = cm.random_alg_h(rng);
    if (cm.H()->algebra_dim() > 0) {
      Mat hp = cm.H()->exp_matrix(Mat(eps * Y.matrix()));
      Mat hm = cm.H()->exp_matrix(Mat(-eps * Y.matrix()));
      Mat fd_t = Mat((cm.t_matrix(hp) - cm.t_matrix(hm)) / (2 * eps));
      bump("fd_t_star", frob(fd_t - cm.t_star(Y).matrix()));

      Mat fd_act = Mat((cm.alpha_matrix(g.matrix, hp) - cm.alpha_matrix(g.matrix, hm)) / (2 * eps));
      bump("fd_act_alg", frob(fd_act - cm.act_alg(g.matrix, Y).matrix()));
    }
    if (cm.G()->algebra_dim() > 0 && cm.H()->algebra_dim() > 0) {
      Mat gp = cm.G()->exp_matrix(Mat(eps * X.matrix()));
      Mat gm = cm.G()->exp_matrix(Mat(-eps * X.matrix()));
      Mat dda = Mat((cm.alpha_matrix(gp, h1.matrix) - cm.alpha_matrix(gm, h1.matrix)) / (2 * eps));
      bump("fd_a2L", frob(Mat(h1.matrix.inverse() * dda) - cm.a2L(h1.matrix, X).matrix()));
      bump("fd_a2R", frob(Mat(dda * h1.matrix.inverse()) - cm.a2R(h1.matrix, X).matrix()));

      // a1(X, Y) = d/de (alpha_{exp(eX)})_*(Y)
      Mat actp = cm.act_alg(gp, Y).matrix();
      Mat actm = cm.act_alg(gm, Y).matrix();
      bump("fd_a1", frob(Mat((actp - actm) / (2 * eps)) - cm.a1(X, Y).matrix()));
    }
  }
  return rep;
}

// ---- morphisms -------------------------------------------------------------

TwoGroupMorphism mor_vcompose(const TwoGroupMorphism& m2, const TwoGroupMorphism& m1) {
  if (m2.cm != m1.cm) throw DescriptorMismatch("mor_vcompose: different crossed modules");
  if (dist(m2.source(), m1.target()) > tols().group_constraint * 10)
    throw NonComposable("mor_vcompose: source(m2) != target(m1)");
  return {m1.cm, mul(m2.h, m1.h), m1.g};
}

TwoGroupMorphism mor_product(const TwoGroupMorphism& m2, const TwoGroupMorphism& m1) {
  if (m2.cm != m1.cm) throw DescriptorMismatch("mor_product: different crossed modules");
  return {m1.cm, mul(m2.h, m1.cm->alpha(m2.g, m1.h)), mul(m2.g, m1.g)};
}

TwoGroupMorphism mor_inverse_vertical(const TwoGroupMorphism& m) {
  return {m.cm, inv(m.h), m.target()};
}

double dist(const TwoGroupMorphism& a, const TwoGroupMorphism& b) {
  return dist(a.h, b.h) + dist(a.g, b.g);
}

DifferentialMaps differential_maps(const CrossedModulePtr& cm) {
  DifferentialMaps dm;
  dm.t_star = [cm](const AlgebraElement& Y) { return cm->t_star(Y); };
  dm.a1 = [cm](const AlgebraElement& X, const AlgebraElement& Y) { return cm->a1(X, Y); };
  dm.a2L = [cm](const Mat& h, const AlgebraElement& X) { return cm->a2L(h, X); };
  dm.a2R = [cm](const Mat& h, const AlgebraElement& X) { return cm->a2R(h, X); };
  return dm;
}

}  // namespace gerbe
