#include "gerbe/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gerbe/harness.hpp"

namespace gerbe {

namespace {

double clamp_fd(double x, double h) {
  if (x - h < 0.0) return h;
  if (x + h > 1.0) return 1.0 - h;
  return x;
}

template <typename F1, typename F2>
auto concat_halves(F1 first, F2 second) {
  return [first, second](double u) {
    if (u <= 0.5) return first(smooth_step(2.0 * u));
    return second(smooth_step(2.0 * u - 1.0));
  };
}

}  // namespace

// ---- TotalSpaceForms ----------------------------------------------------------

TotalSpaceForms::TotalSpaceForms(CrossedModulePtr cm, OneForm A, TwoForm B)
    : cm_(std::move(cm)), A_(std::move(A)), B_(std::move(B)) {}

AlgebraElement TotalSpaceForms::omega_a(const ObjPoint& p, const ObjTangent& t) const {
  // Ad_{g^{-1}}(A(v)) + g^* theta, with the group velocity xi g
  Mat inner = A_(p.m, t.v).matrix() + t.xi.matrix();
  return AlgebraElement(cm_->G(), cm_->G()->expand(Mat(p.g.inverse() * inner * p.g)));
}

AlgebraElement TotalSpaceForms::omega_b(const MorPoint& p, const MorTangent& t) const {
  // (alpha_{g^{-1}})_*( (tilde_alpha_h)_*(A(v)) + h^* theta )
  Mat inner = cm_->a2L(p.h, A_(p.m, t.v)).matrix() + p.h.inverse() * t.eta.matrix() * p.h;
  AlgebraElement inner_alg(cm_->H(), cm_->H()->expand(inner));
  return cm_->act_alg(Mat(p.g.inverse()), inner_alg);
}

AlgebraElement TotalSpaceForms::omega_c(const ObjPoint& p, const ObjTangent& t1,
                                        const ObjTangent& t2) const {
  AlgebraElement acted = cm_->act_alg(Mat(p.g.inverse()), B_(p.m, t1.v, t2.v));
  return AlgebraElement(cm_->H(), Coef(-acted.coeffs));
}

// ---- curves -------------------------------------------------------------------

GroupCurve GroupCurve::constant(const GroupElement& g) {
  Mat m = g.matrix;
  return GroupCurve{g.desc, [m](double) { return m; }};
}

GroupCurve GroupCurve::identity(const DescriptorPtr& d) {
  Mat m = mat_identity(d->dim());
  return GroupCurve{d, [m](double) { return m; }};
}

GroupCurve GroupCurve::from_generator(const DescriptorPtr& d, std::vector<ScalarExpr> coeffs) {
  if (int(coeffs.size()) != d->algebra_dim())
    throw LoadError("group curve generator needs one expression per basis element");
  auto comps = std::make_shared<std::vector<ScalarExpr>>(std::move(coeffs));
  DescriptorPtr desc = d;
  return GroupCurve{d, [comps, desc](double u) {
                      Env env;
                      env[Var::u] = u;
                      Coef c(desc->algebra_dim());
                      for (int k = 0; k < c.size(); ++k) c[k] = (*comps)[k].eval(env);
                      return desc->exp_matrix(AlgebraElement(desc, c).matrix());
                    }};
}

AlgebraElement GroupCurve::velocity(double u) const {
  double h = tols().curve_fd_step;
  double c = clamp_fd(u, h);
  Mat dg = Mat((eval(c + h) - eval(c - h)) / (2 * h));
  return AlgebraElement(desc, desc->expand(Mat(dg * eval(u).inverse())));
}

GroupCurve GroupCurve::pointwise_product(const GroupCurve& other) const {
  auto a = eval, b = other.eval;
  return GroupCurve{desc, [a, b](double u) { return Mat(a(u) * b(u)); }};
}

GroupCurve GroupCurve::pointwise_inverse() const {
  auto a = eval;
  return GroupCurve{desc, [a](double u) { return Mat(a(u).inverse()); }};
}

ObjPath ObjPath::acted(const GroupCurve& g) const {
  return ObjPath{base, fiber.pointwise_product(g)};
}

MorTangent MorPath::tangent(double u) const {
  return {base.velocity(u), fiber_h.velocity(u), fiber_g.velocity(u)};
}

ObjPath MorPath::source() const { return ObjPath{base, fiber_g}; }

ObjPath MorPath::target(const CrossedModulePtr& cm) const {
  auto h = fiber_h.eval, g = fiber_g.eval;
  auto t = [cm, h, g](double u) { return Mat(cm->t_matrix(h(u)) * g(u)); };
  return ObjPath{base, GroupCurve{cm->G(), t}};
}

MorPath identity_mor_path(const CrossedModulePtr& cm, const ObjPath& beta) {
  return MorPath{beta.base, GroupCurve::identity(cm->H()), beta.fiber};
}

MorPath MorPath::acted(const CrossedModulePtr& cm, const GroupCurve& hc,
                       const GroupCurve& gc) const {
  auto h0 = fiber_h.eval, g0 = fiber_g.eval, h = hc.eval, g = gc.eval;
  auto new_h = [cm, h0, g0, h](double u) { return Mat(h0(u) * cm->alpha_matrix(g0(u), h(u))); };
  auto new_g = [g0, g](double u) { return Mat(g0(u) * g(u)); };
  return MorPath{base, GroupCurve{fiber_h.desc, new_h}, GroupCurve{fiber_g.desc, new_g}};
}

MorPath MorPath::pointwise_inverse(const CrossedModulePtr& cm) const {
  auto h = fiber_h.eval, g = fiber_g.eval;
  auto new_h = [h](double u) { return Mat(h(u).inverse()); };
  auto new_g = [cm, h, g](double u) { return Mat(cm->t_matrix(h(u)) * g(u)); };
  return MorPath{base, GroupCurve{fiber_h.desc, new_h}, GroupCurve{fiber_g.desc, new_g}};
}

MorPath MorPath::pointwise_compose(const CrossedModulePtr& cm, const MorPath& rho1,
                                   const MorPath& rho2) {
  (void)cm;
  auto h1 = rho1.fiber_h.eval, h2 = rho2.fiber_h.eval;
  auto new_h = [h1, h2](double u) { return Mat(h1(u) * h2(u)); };
  return MorPath{rho2.base, GroupCurve{rho1.fiber_h.desc, new_h}, rho2.fiber_g};
}

MorPath MorPath::concatenated_with(const MorPath& next) const {
  auto b1 = base, b2 = next.base;
  Path base2(base.chart(), concat_halves([b1](double u) { return b1(u); },
                                         [b2](double u) { return b2(u); }));
  GroupCurve h2{fiber_h.desc, concat_halves(fiber_h.eval, next.fiber_h.eval)};
  GroupCurve g2{fiber_g.desc, concat_halves(fiber_g.eval, next.fiber_g.eval)};
  return MorPath{base2, h2, g2};
}

ObjBigon ObjBigon::from_section(const Bigon& sigma, const DescriptorPtr& G) {
  Mat one = mat_identity(G->dim());
  return ObjBigon{sigma, [one](double, double) { return one; }};
}

// ---- pullbacks ----------------------------------------------------------------

AlgebraElement pull_omega_a(const TotalSpaceForms& forms, const ObjPath& beta, double u) {
  return forms.omega_a(beta.at(u), beta.tangent(u));
}

AlgebraElement pull_omega_b(const TotalSpaceForms& forms, const MorPath& rho, double u) {
  return forms.omega_b(rho.at(u), rho.tangent(u));
}

// ---- equivariance -------------------------------------------------------------

EquivarianceReport check_equivariance(const TotalSpaceForms& forms, int n_samples,
                                      std::uint64_t seed) {
  Rng rng(seed);
  const CrossedModulePtr& cm = forms.cm();
  const Chart& chart = forms.A().chart();
  EquivarianceReport rep;
  const double eps = 1e-6;
  for (int it = 0; it < n_samples; ++it) {
    Vec m = random_interior_point(chart, rng);
    Vec v = random_tangent(chart, rng);
    Vec v2 = random_tangent(chart, rng);
    GroupElement g0 = cm->random_g(rng), gG = cm->random_g(rng);
    AlgebraElement xi0 = cm->random_alg_g(rng), xiG = cm->random_alg_g(rng);

    // Eq. (2.1): R^* omega_a = Ad_g^{-1}(p^* omega_a) + g^* theta
    {
      ObjPoint p{m, g0.matrix};
      ObjPoint img{m, Mat(g0.matrix * gG.matrix)};
      Mat pushed = xi0.matrix() + g0.matrix * xiG.matrix() * g0.matrix.inverse();
      ObjTangent tpush{v, AlgebraElement(cm->G(), cm->G()->expand(pushed))};
      Mat lhs = forms.omega_a(img, tpush).matrix();
      Mat base = forms.omega_a(p, ObjTangent{v, xi0}).matrix() + xiG.matrix();
      Mat rhs = Mat(gG.matrix.inverse() * base * gG.matrix);
      rep.eq_a = std::max(rep.eq_a, frob(Mat(lhs - rhs)));
    }
    // Eq. (2.3): R^* omega_c = (alpha_{g^{-1}})_*(p^* omega_c)
    {
      ObjPoint p{m, g0.matrix};
      ObjPoint img{m, Mat(g0.matrix * gG.matrix)};
      ObjTangent t1{v, xi0}, t2{v2, cm->random_alg_g(rng)};
      Mat lhs = forms.omega_c(img, t1, t2).matrix();
      Mat rhs = cm->act_alg(Mat(gG.matrix.inverse()), forms.omega_c(p, t1, t2)).matrix();
      rep.eq_c = std::max(rep.eq_c, frob(Mat(lhs - rhs)));
    }
    // Eq. (2.2) over Mor(P) x Mor(Gamma); the action pullback of the
    // H-component is a central finite difference along group curves.
    {
      GroupElement h0 = cm->random_h(rng), hG = cm->random_h(rng);
      AlgebraElement eta0 = cm->random_alg_h(rng), etaG = cm->random_alg_h(rng);
      MorPoint p{m, h0.matrix, g0.matrix};
      Mat img_h = Mat(h0.matrix * cm->alpha_matrix(g0.matrix, hG.matrix));
      MorPoint img{m, img_h, Mat(g0.matrix * gG.matrix)};
      auto h_curve = [&](double tau) {
        Mat h0t = Mat(cm->H()->exp_matrix(Mat(tau * eta0.matrix())) * h0.matrix);
        Mat g0t = Mat(cm->G()->exp_matrix(Mat(tau * xi0.matrix())) * g0.matrix);
        Mat hGt = Mat(cm->H()->exp_matrix(Mat(tau * etaG.matrix())) * hG.matrix);
        return Mat(h0t * cm->alpha_matrix(g0t, hGt));
      };
      Mat dWh = Mat((h_curve(eps) - h_curve(-eps)) / (2 * eps));
      AlgebraElement eta_push(cm->H(), cm->H()->expand(Mat(dWh * img_h.inverse())));
      Mat pushed_g = xi0.matrix() + g0.matrix * xiG.matrix() * g0.matrix.inverse();
      AlgebraElement xi_push(cm->G(), cm->G()->expand(pushed_g));
      Mat lhs = forms.omega_b(img, MorTangent{v, eta_push, xi_push}).matrix();

      Mat ob = forms.omega_b(p, MorTangent{v, eta0, xi0}).matrix();
      Mat oa = forms.omega_a(ObjPoint{m, g0.matrix}, ObjTangent{v, xi0}).matrix();
      Mat inner = hG.matrix.inverse() * ob * hG.matrix +
                  cm->a2L(hG.matrix, AlgebraElement(cm->G(), cm->G()->expand(oa))).matrix() +
                  hG.matrix.inverse() * etaG.matrix() * hG.matrix;
      Mat rhs = cm->act_alg(Mat(gG.matrix.inverse()),
                            AlgebraElement(cm->H(), cm->H()->expand(inner)))
                    .matrix();
      rep.eq_b = std::max(rep.eq_b, frob(Mat(lhs - rhs)));
    }
  }
  return rep;
}

// ---- horizontalization -----------------------------------------------------------

PrefixFlow horizontalize_object(const TotalSpaceForms& forms, const ObjPath& beta,
                                const IntegratorConfig& cfg) {
  cfg.validate();
  PrefixFlow flow;
  flow.desc = forms.cm()->G();
  flow.nodes = poe_prefix_core(
      flow.desc, [&](double u) { return pull_omega_a(forms, beta, u); }, cfg.n_steps, cfg.scheme);
  return flow;
}

namespace {

std::vector<Mat> h_flow_run(const CrossedModulePtr& cm,
                            const std::function<AlgebraElement(double)>& y_pull,
                            const std::function<AlgebraElement(double)>& x_pull, int n_steps) {
  const double dt = 1.0 / n_steps;
  const auto& H = cm->H();
  std::vector<Mat> nodes;
  nodes.reserve(n_steps + 1);
  Mat h = mat_identity(H->dim());
  nodes.push_back(h);
  for (int k = 0; k < n_steps; ++k) {
    double tm = (k + 0.5) * dt;
    AlgebraElement X = x_pull(tm);
    Mat Ym = y_pull(tm).matrix();
    Mat F0 = Mat(-(Ym + cm->a2R(h, X).matrix()));
    Mat h_half = Mat(H->exp_matrix(Mat((dt / 2) * F0)) * h);
    Mat F1 = Mat(-(Ym + cm->a2R(h_half, X).matrix()));
    h = Mat(H->exp_matrix(Mat(dt * F1)) * h);
    nodes.push_back(h);
  }
  return nodes;
}

}  // namespace

PrefixFlow horizontalize_morphism(const TotalSpaceForms& forms, const MorPath& rho,
                                  const IntegratorConfig& cfg) {
  cfg.validate();
  ObjPath src = rho.source();
  PrefixFlow flow;
  flow.desc = forms.cm()->H();
  flow.nodes = h_flow_run(
      forms.cm(), [&](double u) { return pull_omega_b(forms, rho, u); },
      [&](double u) { return pull_omega_a(forms, src, u); }, cfg.n_steps);
  return flow;
}

namespace {

double omega_a_residual_impl(const TotalSpaceForms& forms, const ObjPath& beta,
                             const std::vector<Mat>* nodes) {
  int n = nodes ? int(nodes->size()) - 1 : 256;
  double dt = 1.0 / n;
  const DescriptorPtr& G = forms.cm()->G();
  double worst = 0.0;
  for (int j = 1; j < n; ++j) {
    double u = j * dt;
    Vec v = beta.base.velocity(u);
    Mat q, dq;
    if (nodes) {
      q = Mat(beta.fiber(u) * (*nodes)[j]);
      dq = Mat((beta.fiber(u + dt) * (*nodes)[j + 1] - beta.fiber(u - dt) * (*nodes)[j - 1]) /
               (2 * dt));
    } else {
      q = beta.fiber(u);
      dq = Mat((beta.fiber(u + dt) - beta.fiber(u - dt)) / (2 * dt));
    }
    AlgebraElement xi(G, G->expand(Mat(dq * q.inverse())));
    worst = std::max(worst, forms.omega_a(ObjPoint{beta.base(u), q}, ObjTangent{v, xi}).norm());
  }
  return worst;
}

double omega_b_residual_impl(const TotalSpaceForms& forms, const MorPath& rho,
                             const std::vector<Mat>* nodes) {
  int n = nodes ? int(nodes->size()) - 1 : 256;
  double dt = 1.0 / n;
  const CrossedModulePtr& cm = forms.cm();
  double worst = 0.0;
  auto acted_h = [&](double u, const Mat& corr) {
    return Mat(rho.fiber_h(u) * cm->alpha_matrix(rho.fiber_g(u), corr));
  };
  for (int j = 1; j < n; ++j) {
    double u = j * dt;
    Vec v = rho.base.velocity(u);
    Mat q, dq;
    if (nodes) {
      q = acted_h(u, (*nodes)[j]);
      dq = Mat((acted_h(u + dt, (*nodes)[j + 1]) - acted_h(u - dt, (*nodes)[j - 1])) / (2 * dt));
    } else {
      q = rho.fiber_h(u);
      dq = Mat((rho.fiber_h(u + dt) - rho.fiber_h(u - dt)) / (2 * dt));
    }
    AlgebraElement eta(cm->H(), cm->H()->expand(Mat(dq * q.inverse())));
    AlgebraElement xi = rho.fiber_g.velocity(u);
    worst = std::max(
        worst,
        forms.omega_b(MorPoint{rho.base(u), q, rho.fiber_g(u)}, MorTangent{v, eta, xi}).norm());
  }
  return worst;
}

}  // namespace

double omega_a_residual(const TotalSpaceForms& forms, const ObjPath& beta,
                        const PrefixFlow& correction) {
  return omega_a_residual_impl(forms, beta, &correction.nodes);
}
double omega_a_residual(const TotalSpaceForms& forms, const ObjPath& beta) {
  return omega_a_residual_impl(forms, beta, nullptr);
}
double omega_b_residual(const TotalSpaceForms& forms, const MorPath& rho,
                        const PrefixFlow& correction) {
  return omega_b_residual_impl(forms, rho, &correction.nodes);
}
double omega_b_residual(const TotalSpaceForms& forms, const MorPath& rho) {
  return omega_b_residual_impl(forms, rho, nullptr);
}

GroupElement h_omega(const TotalSpaceForms& forms, const MorPath& rho,
                     const IntegratorConfig& cfg) {
  ObjPath src = rho.source();
  return hg_phi_core(
             forms.cm(), [&](double u) { return pull_omega_b(forms, rho, u); },
             [&](double u) { return pull_omega_a(forms, src, u); }, cfg)
      .h;
}

GroupElement poe_omega_a(const TotalSpaceForms& forms, const ObjPath& beta,
                         const IntegratorConfig& cfg) {
  return poe_core(forms.cm()->G(), [&](double u) { return pull_omega_a(forms, beta, u); }, cfg)
      .value;
}

GroupElement poe_omega_b(const TotalSpaceForms& forms, const MorPath& rho,
                         const IntegratorConfig& cfg) {
  return poe_core(forms.cm()->H(), [&](double u) { return pull_omega_b(forms, rho, u); }, cfg)
      .value;
}

GroupElement soe_total(const TotalSpaceForms& forms, const ObjBigon& sigma,
                       const IntegratorConfig& cfg, const SoeConventions& conv) {
  const CrossedModulePtr& cm = forms.cm();
  const DescriptorPtr& G = cm->G();
  double hfd = tols().curve_fd_step;
  auto fiber_xi_t = [&](double s, double t) {
    double c = clamp_fd(t, hfd);
    Mat dg = Mat((sigma.fiber(s, c + hfd) - sigma.fiber(s, c - hfd)) / (2 * hfd));
    return AlgebraElement(G, G->expand(Mat(dg * sigma.fiber(s, t).inverse())));
  };
  auto fiber_xi_s = [&](double s, double t) {
    double c = clamp_fd(s, hfd);
    Mat dg = Mat((sigma.fiber(c + hfd, t) - sigma.fiber(c - hfd, t)) / (2 * hfd));
    return AlgebraElement(G, G->expand(Mat(dg * sigma.fiber(s, t).inverse())));
  };
  auto a_pull = [&](double s, double t) {
    return forms.omega_a(sigma.at(s, t), ObjTangent{sigma.base.d_dt(s, t), fiber_xi_t(s, t)});
  };
  auto b_pull = [&](double s, double t) {
    AlgebraElement c = forms.omega_c(sigma.at(s, t),
                                     ObjTangent{sigma.base.d_dt(s, t), fiber_xi_t(s, t)},
                                     ObjTangent{sigma.base.d_ds(s, t), fiber_xi_s(s, t)});
    return AlgebraElement(cm->H(), Coef(-c.coeffs));  // the connection 2-form is -Omega^c
  };
  auto edge_a = [&](double s) {
    return forms.omega_a(sigma.at(s, 1.0),
                         ObjTangent{sigma.base.d_ds(s, 1.0), fiber_xi_s(s, 1.0)});
  };
  return soe_core(cm, a_pull, b_pull, edge_a, cfg, conv).value;
}

// ---- identity suite on the trivial bundle ---------------------------------------

GroupCurve random_group_curve(const DescriptorPtr& d, Rng& rng, double scale) {
  int n = d->algebra_dim();
  Coef a(n), b(n), c(n);
  for (int i = 0; i < n; ++i) {
    a[i] = rng.uniform(-scale, scale);
    b[i] = rng.uniform(-scale, scale);
    c[i] = rng.uniform(-scale, scale);
  }
  DescriptorPtr desc = d;
  return GroupCurve{d, [desc, a, b, c](double u) {
                      double w = smooth_step(u);
                      Coef k = a + w * b + (w * (1 - w)) * c;
                      return desc->exp_matrix(AlgebraElement(desc, k).matrix());
                    }};
}

namespace {

// Same but anchored: value(0) = base, generator vanishing at u = 0.
GroupCurve random_group_curve_from(const DescriptorPtr& d, Rng& rng, const Mat& base,
                                   double scale) {
  int n = d->algebra_dim();
  Coef b(n), c(n);
  for (int i = 0; i < n; ++i) {
    b[i] = rng.uniform(-scale, scale);
    c[i] = rng.uniform(-scale, scale);
  }
  DescriptorPtr desc = d;
  Mat base_m = base;
  return GroupCurve{d, [desc, b, c, base_m](double u) {
                      double w = smooth_step(u);
                      Coef k = w * b + (w * (1 - w)) * c;
                      return Mat(desc->exp_matrix(AlgebraElement(desc, k).matrix()) * base_m);
                    }};
}

}  // namespace

GroupCurve curve_from_flow(const PrefixFlow& flow) {
  auto nodes = std::make_shared<std::vector<Mat>>(flow.nodes);
  DescriptorPtr desc = flow.desc;
  return GroupCurve{desc, [nodes, desc](double u) {
                      int n = int(nodes->size()) - 1;
                      double x = std::clamp(u, 0.0, 1.0) * n;
                      int j = std::min(int(x), n - 1);
                      double f = x - j;
                      Mat m = Mat((1.0 - f) * (*nodes)[j] + f * (*nodes)[j + 1]);
                      return desc->project(m);
                    }};
}

std::map<std::string, double> trivial_bundle_suite(const TotalSpaceForms& forms,
                                                   const IntegratorConfig& cfg,
                                                   const SoeConventions& conv,
                                                   std::uint64_t seed) {
  std::map<std::string, double> rep;
  Rng rng(seed);
  const CrossedModulePtr& cm = forms.cm();
  const Chart& chart = forms.A().chart();
  auto bump = [&rep](const std::string& key, double v) {
    auto [it, inserted] = rep.try_emplace(key, v);
    if (!inserted) it->second = std::max(it->second, v);
  };

  // equivariance of the three components
  EquivarianceReport eq = check_equivariance(forms, 50, rng.next_u64());
  rep["equivariance_a"] = eq.eq_a;
  rep["equivariance_b"] = eq.eq_b;
  rep["equivariance_c"] = eq.eq_c;

  // -- object horizontalization ---------------------------------------------
  Path base = random_path(chart, rng);
  ObjPath beta{base, random_group_curve(cm->G(), rng)};
  PrefixFlow flow = horizontalize_object(forms, beta, cfg);
  bump("horizontalize_object_post", omega_a_residual(forms, beta, flow));

  // beta = (gamma, 1) reduces to the base path-transport initial value problem
  ObjPath beta_sec{base, GroupCurve::identity(cm->G())};
  PrefixFlow kappa = horizontalize_object(forms, beta_sec, cfg);
  bump("horizontalize_section_vs_poe",
       dist(kappa.value(), poe(forms.A(), base, cfg).value));

  // right-translation stability: a horizontal path stays horizontal under a
  // constant translation, so the new correction is the constant identity
  ObjPath beta_hor = beta.acted(curve_from_flow(flow));
  ObjPath beta_hor_g = beta_hor.acted(GroupCurve::constant(cm->random_g(rng)));
  PrefixFlow again = horizontalize_object(forms, beta_hor_g, cfg);
  double drift = 0.0;
  for (std::size_t j = 0; j < again.nodes.size(); j += 50)
    drift = std::max(drift, frob(Mat(again.nodes[j] - mat_identity(cm->G()->dim()))));
  bump("horizontalize_translation_stability", drift);

  // -- morphism horizontalization ---------------------------------------------
  MorPath rho0{random_path(chart, rng), random_group_curve(cm->H(), rng),
               random_group_curve(cm->G(), rng)};
  bump("identity_path_horizontal",
       omega_b_residual(forms, identity_mor_path(cm, ObjPath{rho0.base, rho0.fiber_g})));

  // make the source horizontal, then the morphism path itself
  PrefixFlow src_flow = horizontalize_object(forms, rho0.source(), cfg);
  MorPath rho1 = rho0.acted(cm, GroupCurve::identity(cm->H()), curve_from_flow(src_flow));
  PrefixFlow h_flow = horizontalize_morphism(forms, rho1, cfg);
  bump("horizontalize_morphism_post", omega_b_residual(forms, rho1, h_flow));
  MorPath rho_hor = rho1.acted(cm, curve_from_flow(h_flow), GroupCurve::identity(cm->G()));

  bump("horizontal_inverse", omega_b_residual(forms, rho_hor.pointwise_inverse(cm)));
  {
    MorPath rho_b{rho_hor.base, random_group_curve(cm->H(), rng),
                  rho_hor.target(cm).fiber};
    PrefixFlow f2 = horizontalize_object(forms, rho_b.source(), cfg);
    (void)f2;  // source of rho_b is t(rho_hor), horizontal by the exchange law
    PrefixFlow h2 = horizontalize_morphism(forms, rho_b, cfg);
    MorPath rho_b_hor = rho_b.acted(cm, curve_from_flow(h2), GroupCurve::identity(cm->G()));
    bump("horizontal_composition",
         omega_b_residual(forms, MorPath::pointwise_compose(cm, rho_b_hor, rho_hor)));
  }
  bump("horizontal_acted_constant",
       omega_b_residual(forms, rho_hor.acted(cm, GroupCurve::constant(cm->random_h(rng)),
                                             GroupCurve::constant(cm->random_g(rng)))));
  bump("horizontal_acted_gpath",
       omega_b_residual(forms, rho_hor.acted(cm, GroupCurve::identity(cm->H()),
                                             random_group_curve(cm->G(), rng))));
  // source/target horizontality exchange
  bump("horizontal_target_exchange", omega_a_residual(forms, rho_hor.target(cm)));

  // -- h_Omega laws -------------------------------------------------------------
  GroupElement h_rho0 = h_omega(forms, rho0, cfg);
  {
    GroupCurve gpath = random_group_curve(cm->G(), rng);
    GroupElement lhs =
        h_omega(forms, rho0.acted(cm, GroupCurve::identity(cm->H()), gpath), cfg);
    GroupElement rhs = cm->alpha(inv(GroupElement(cm->G(), gpath(1.0))), h_rho0);
    bump("h_omega_translation", dist(lhs, rhs));
  }
  bump("h_omega_inverse", dist(inv(h_rho0), h_omega(forms, rho0.pointwise_inverse(cm), cfg)));
  {
    MorPath rho_up{rho0.base, random_group_curve(cm->H(), rng), rho0.target(cm).fiber};
    GroupElement lhs = h_omega(forms, MorPath::pointwise_compose(cm, rho_up, rho0), cfg);
    GroupElement rhs = mul(h_omega(forms, rho_up, cfg), h_rho0);
    bump("h_omega_pointwise_compose", dist(lhs, rhs));
  }
  {
    // concatenation law along the path direction
    Vec z = random_interior_point(chart, rng, 40.0);
    MorPath rho_next{random_path_between(chart, rng, rho0.base(1.0), z),
                     random_group_curve_from(cm->H(), rng, rho0.fiber_h(1.0), 0.5),
                     random_group_curve_from(cm->G(), rng, rho0.fiber_g(1.0), 0.5)};
    GroupElement lhs = h_omega(forms, rho0.concatenated_with(rho_next), cfg);
    GroupElement poe_src = poe_omega_a(forms, rho_next.source(), cfg);
    GroupElement rhs = mul(h_omega(forms, rho_next, cfg), cm->alpha(poe_src, h_rho0));
    bump("h_omega_concatenation", dist(lhs, rhs));
  }
  bump("h_omega_poe_b",
       dist(h_omega(forms, rho1, cfg), poe_omega_b(forms, rho1, cfg)));
  {
    GroupCurve hpath = random_group_curve_from(cm->H(), rng, mat_identity(cm->H()->dim()), 0.5);
    MorPath acted = rho_hor.acted(cm, hpath, GroupCurve::identity(cm->G()));
    GroupElement expect = inv(GroupElement(cm->H(), hpath(1.0)));
    bump("h_omega_translated_horizontal", dist(h_omega(forms, acted, cfg), expect));
    bump("poe_b_translated_horizontal", dist(poe_omega_b(forms, acted, cfg), expect));
  }
  bump("h_omega_horizontal_is_one",
       dist(h_omega(forms, rho_hor, cfg), GroupElement::identity(cm->H())));

  // -- pullback poe laws ----------------------------------------------------------
  {
    GroupCurve gpath = random_group_curve_from(cm->G(), rng, mat_identity(cm->G()->dim()), 0.6);
    GroupElement lhs = poe_omega_a(forms, beta.acted(gpath), cfg);
    GroupElement rhs =
        mul(inv(GroupElement(cm->G(), gpath(1.0))), poe_omega_a(forms, beta, cfg));
    bump("poe_a_translation", dist(lhs, rhs));
  }
  bump("poe_b_identity_path",
       dist(poe_omega_b(forms, identity_mor_path(cm, beta), cfg),
            GroupElement::identity(cm->H())));

  // -- surface transports on the total space --------------------------------------
  Vec x = random_interior_point(chart, rng, 40.0);
  Vec y = random_interior_point(chart, rng, 40.0);
  Bigon sig = Bigon::linear_interpolation(random_path_between(chart, rng, x, y),
                                          random_path_between(chart, rng, x, y));
  {
    // the canonical section reproduces the chart-level surface transport
    ObjBigon lifted = ObjBigon::from_section(sig, cm->G());
    GroupElement total = soe_total(forms, lifted, cfg, conv);
    GroupElement chart_level = soe(cm, forms.A(), forms.B(), sig, cfg, conv).value;
    bump("soe_section_reduction", dist(total, chart_level));

    // constant translation acts through the action on H
    GroupElement g0 = cm->random_g(rng);
    Mat g0m = g0.matrix;
    ObjBigon translated{sig, [g0m](double, double) { return g0m; }};
    GroupElement lhs = soe_total(forms, translated, cfg, conv);
    GroupElement rhs = cm->alpha(inv(g0), chart_level);
    bump("soe_translation", dist(lhs, rhs));
  }
  {
    // the square tying h_Omega to the surface transport of source and target
    auto mk_profile = [&rng](int n) {
      Coef a(n), b(n);
      for (int i = 0; i < n; ++i) {
        a[i] = rng.uniform(-0.5, 0.5);
        b[i] = rng.uniform(-0.5, 0.5);
      }
      return std::make_pair(a, b);
    };
    auto [ah, bh] = mk_profile(cm->H()->algebra_dim());
    auto [ag, bg] = mk_profile(cm->G()->algebra_dim());
    auto [at, bt] = mk_profile(cm->G()->algebra_dim());
    DescriptorPtr Hd = cm->H(), Gd = cm->G();
    auto bump_fn = [](double s, double t) {
      return smooth_step(s) * t * (1.0 - t);
    };
    auto fiber_h = [Hd, ah = ah, bh = bh, bump_fn](double s, double t) {
      Coef k = ah * t + bh * bump_fn(s, t);
      return Hd->exp_matrix(AlgebraElement(Hd, k).matrix());
    };
    auto fiber_g = [Gd, ag = ag, bg = bg, bump_fn](double s, double t) {
      Coef k = ag * t + bg * bump_fn(s, t);
      return Gd->exp_matrix(AlgebraElement(Gd, k).matrix());
    };
    auto theta = [Gd, at = at, bt = bt, bump_fn](double s, double t) {
      Coef k = at * t + bt * bump_fn(s, t);
      return Gd->exp_matrix(AlgebraElement(Gd, k).matrix());
    };
    auto mor_path_at = [&](double s) {
      double ss = s;
      return MorPath{ss == 0.0 ? sig.source() : sig.target(),
                     GroupCurve{Hd, [fiber_h, ss](double t) { return fiber_h(ss, t); }},
                     GroupCurve{Gd, [fiber_g, ss](double t) { return fiber_g(ss, t); }}};
    };
    MorPath rho_bot = mor_path_at(0.0), rho_top = mor_path_at(1.0);
    ObjBigon source_acted{sig, [fiber_g, theta](double s, double t) {
                            return Mat(fiber_g(s, t) * theta(s, t).inverse());
                          }};
    ObjBigon target_bigon{sig, [cm, fiber_h, fiber_g](double s, double t) {
                            return Mat(cm->t_matrix(fiber_h(s, t)) * fiber_g(s, t));
                          }};
    GroupElement gamma1(Gd, theta(0.0, 1.0));
    GroupElement lhs = mul(cm->alpha(inv(gamma1), soe_total(forms, source_acted, cfg, conv)),
                           inv(h_omega(forms, rho_bot, cfg)));
    GroupElement rhs = mul(inv(h_omega(forms, rho_top, cfg)),
                           soe_total(forms, target_bigon, cfg, conv));
    bump("surface_square", dist(lhs, rhs));
  }

  return rep;
}

// ---- bundles -------------------------------------------------------------------

BundleData::BundleData(CrossedModulePtr cm, std::vector<CoverChart> charts,
                       std::vector<TransitionDatum> transitions, std::vector<Cocycle2> cocycles,
                       bool fake_flat_flag)
    : cm_(std::move(cm)),
      charts_(std::move(charts)),
      transitions_(std::move(transitions)),
      cocycles_(std::move(cocycles)),
      fake_flat_(fake_flat_flag) {
  for (const auto& c : charts_) {
    if (!by_id_.emplace(c.id, c.conn).second) throw LoadError("duplicate chart id " + c.id);
    patch_by_id_.emplace(c.id, c.patch);
    if (fake_flat_ &&
        !(c.conn->fake_flat_checked && *c.conn->fake_flat_checked < tols().fake_flat))
      throw LoadError("bundle flagged fake-flat but chart " + c.id + " is not");
  }
  for (const auto& t : transitions_) {
    if (t.from == t.to)
      throw LoadError("transitions must join distinct charts; g_ii = 1 is implicit");
    connection(t.from);
    connection(t.to);
    if (!trans_map_.emplace(std::make_pair(t.from, t.to), t.gt).second)
      throw LoadError("duplicate transition " + t.from + "->" + t.to);
  }
  for (const auto& t : transitions_) {
    auto key = std::make_pair(t.to, t.from);
    if (!trans_map_.count(key)) trans_map_.emplace(key, invert_gauge(t.gt));
  }
  for (const auto& c : cocycles_) {
    if (c.i == c.j || c.j == c.k || c.i == c.k)
      throw LoadError("cocycles with repeated charts are implicit under normalization");
    cocycle_map_[{c.i, c.j, c.k}] = &c;
  }
}

const ConnectionPtr& BundleData::connection(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw LoadError("unknown chart id " + id);
  return it->second;
}

const Chart& BundleData::patch(const std::string& id) const {
  auto it = patch_by_id_.find(id);
  if (it == patch_by_id_.end()) throw LoadError("unknown chart id " + id);
  return it->second;
}

GaugePtr BundleData::transition(const std::string& i, const std::string& j) const {
  if (i == j) return identity_gauge(connection(i));
  auto it = trans_map_.find(std::make_pair(i, j));
  if (it == trans_map_.end())
    throw MissingTransition("no transition between charts " + i + " and " + j);
  return it->second;
}

GroupElement BundleData::cocycle_at(const std::string& i, const std::string& j,
                                    const std::string& k, const Vec& x) const {
  if (i == j || j == k || i == k) return GroupElement::identity(cm_->H());
  auto it = cocycle_map_.find({i, j, k});
  if (it == cocycle_map_.end())
    throw MissingTransition("no cocycle datum for charts (" + i + "," + j + "," + k + ")");
  return GroupElement(cm_->H(), it->second->a.a(x));
}

double ValidationReport::max_residual() const {
  double m = 0;
  for (const auto& [k, v] : residuals) m = std::max(m, v);
  return m;
}

ValidationReport validate_bundle(const BundleData& bundle, int n_samples, std::uint64_t seed) {
  ValidationReport rep;
  for (const auto& c : bundle.charts()) {
    if (bundle.fake_flat())
      rep.residuals["fake_flat_" + c.id] = c.conn->fake_flat_checked.value_or(1.0);
  }
  for (const auto& t : bundle.transitions()) {
    GaugeCheckReport g = check_gauge(*t.gt, n_samples, seed, &t.overlap);
    rep.residuals["transition_" + t.from + t.to + "_eq1"] = g.eq1;
    rep.residuals["transition_" + t.from + t.to + "_eq2"] = g.eq2;
  }
  for (const auto& c : bundle.cocycles()) {
    const TransitionDatum* dij = nullptr;
    const TransitionDatum* djk = nullptr;
    for (const auto& t : bundle.transitions()) {
      if (t.from == c.i && t.to == c.j) dij = &t;
      if (t.from == c.j && t.to == c.k) djk = &t;
    }
    Chart region = dij ? dij->overlap : bundle.connection(c.i)->chart;
    if (djk) {
      for (int a = 0; a < region.dim; ++a) {
        region.box[a].lo = std::max(region.box[a].lo, djk->overlap.box[a].lo);
        region.box[a].hi = std::min(region.box[a].hi, djk->overlap.box[a].hi);
      }
    }
    Gauge2CheckReport g2 = check_gauge2(c.a, n_samples, seed, &region);
    rep.residuals["cocycle_" + c.i + c.j + c.k + "_g"] = g2.g_condition;
    rep.residuals["cocycle_" + c.i + c.j + c.k + "_phi"] = g2.phi_condition;
  }
  return rep;
}

// ---- path transport -------------------------------------------------------------

namespace {

void validate_itinerary(const Itinerary& itin) {
  if (itin.empty()) throw ItineraryGap("empty itinerary");
  if (std::abs(itin.front().t0) > 1e-9 || std::abs(itin.back().t1 - 1.0) > 1e-9)
    throw ItineraryGap("itinerary must cover [0, 1]");
  for (std::size_t k = 0; k < itin.size(); ++k) {
    if (itin[k].t1 <= itin[k].t0) throw ItineraryGap("degenerate itinerary leg");
    if (k + 1 < itin.size() && std::abs(itin[k].t1 - itin[k + 1].t0) > 1e-9)
      throw ItineraryGap("itinerary legs do not meet");
  }
}

void check_leg_in_chart(const Path& sub, const Chart& chart) {
  for (int i = 0; i <= 64; ++i)
    if (!chart.contains(sub(double(i) / 64), 1e-9))
      throw ItineraryGap("path leaves the chart of its itinerary leg");
}

}  // namespace

TransportWord transport_path(const BundleData& bundle, const Path& gamma,
                             const Itinerary& itinerary, const IntegratorConfig& cfg) {
  validate_itinerary(itinerary);
  TransportWord word;
  word.cm = bundle.cm();
  word.start_trivialization = itinerary.front().chart_id;
  word.end_trivialization = itinerary.back().chart_id;
  for (std::size_t k = 0; k < itinerary.size(); ++k) {
    const auto& leg = itinerary[k];
    const ConnectionPtr& conn = bundle.connection(leg.chart_id);
    Path sub = gamma.restrict(leg.t0, leg.t1);
    check_leg_in_chart(sub, bundle.patch(leg.chart_id));
    word.entries.push_back(
        WordSegment{leg.chart_id, leg.t0, leg.t1, poe(conn->A, sub, cfg).value});
    if (k + 1 < itinerary.size()) {
      const auto& next = itinerary[k + 1];
      Vec x = gamma(leg.t1);
      GaugePtr gt = bundle.transition(leg.chart_id, next.chart_id);
      TwoGroupMorphism cell{bundle.cm(), GroupElement::identity(bundle.cm()->H()),
                            GroupElement(bundle.cm()->G(), gt->g(x))};
      word.entries.push_back(WordJump{leg.chart_id, next.chart_id, leg.t1, x, cell});
    }
  }
  return word;
}

GroupElement TransportWord::normalize() const {
  GroupElement g = GroupElement::identity(cm->G());
  for (const auto& e : entries) {
    if (std::holds_alternative<WordSegment>(e))
      g = mul(std::get<WordSegment>(e).value, g);
    else
      g = mul(std::get<WordJump>(e).cell.g, g);
  }
  return g;
}

double TransportWord::adjacency_residual(const std::function<Vec(double)>& gamma) const {
  double worst = 0.0;
  double prev_t1 = 0.0;
  bool have_prev = false;
  for (const auto& e : entries) {
    if (std::holds_alternative<WordSegment>(e)) {
      const auto& seg = std::get<WordSegment>(e);
      if (have_prev) worst = std::max(worst, std::abs(seg.t0 - prev_t1));
      prev_t1 = seg.t1;
      have_prev = true;
    } else {
      const auto& j = std::get<WordJump>(e);
      worst = std::max(worst, std::abs(j.at_t - prev_t1));
      worst = std::max(worst, double((gamma(j.at_t) - j.at).norm()));
      worst = std::max(worst, dist(j.cell.target(), mul(cm->t(j.cell.h), j.cell.g)));
    }
  }
  return worst;
}

// ---- itinerary comparison ---------------------------------------------------------

namespace {

std::string chart_at(const Itinerary& itin, double t0, double t1) {
  double mid = 0.5 * (t0 + t1);
  for (const auto& leg : itin)
    if (mid >= leg.t0 - 1e-12 && mid <= leg.t1 + 1e-12) return leg.chart_id;
  throw ItineraryGap("refined piece not covered by itinerary");
}

}  // namespace

ItineraryComparison compare_itineraries(const BundleData& bundle, const Path& gamma,
                                        const Itinerary& itinA, const Itinerary& itinB,
                                        const IntegratorConfig& cfg) {
  validate_itinerary(itinA);
  validate_itinerary(itinB);
  const CrossedModulePtr& cm = bundle.cm();
  std::set<double> cuts{0.0, 1.0};
  for (const auto& leg : itinA) cuts.insert(leg.t1);
  for (const auto& leg : itinB) cuts.insert(leg.t1);
  std::vector<double> ts(cuts.begin(), cuts.end());

  GroupElement c = GroupElement::identity(cm->H());
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    double t0 = ts[k], t1 = ts[k + 1];
    std::string i = chart_at(itinA, t0, t1);
    std::string j = chart_at(itinB, t0, t1);
    Path sub = gamma.restrict(t0, t1);
    GroupElement poe_j = poe(bundle.connection(j)->A, sub, cfg).value;
    c = cm->alpha(poe_j, c);
    if (i != j) {
      GaugePtr gt = bundle.transition(i, j);
      GroupElement hk = hg_phi(cm, gt->phi, gt->target->A, sub, cfg).h;
      c = mul(c, inv(hk));
    }
    if (k + 2 < ts.size()) {
      double t2 = ts[k + 2];
      std::string inext = chart_at(itinA, t1, t2);
      std::string jnext = chart_at(itinB, t1, t2);
      Vec x = gamma(t1);
      GroupElement gjj = GroupElement(cm->G(), bundle.transition(j, jnext)->g(x));
      c = cm->alpha(gjj, c);
      c = mul(c, inv(bundle.cocycle_at(i, j, jnext, x)));
      c = mul(c, bundle.cocycle_at(i, inext, jnext, x));
    }
  }

  GroupElement gA = transport_path(bundle, gamma, itinA, cfg).normalize();
  GroupElement gB = transport_path(bundle, gamma, itinB, cfg).normalize();
  Vec x0 = gamma(0.0), y = gamma(1.0);
  GroupElement g_start(cm->G(),
                       bundle.transition(itinA.front().chart_id, itinB.front().chart_id)->g(x0));
  GroupElement g_end(cm->G(),
                     bundle.transition(itinA.back().chart_id, itinB.back().chart_id)->g(y));
  GroupElement source = mul(g_end, mul(gA, inv(g_start)));
  ItineraryComparison out{TwoGroupMorphism{cm, c, source}, 0.0};
  out.residual = dist(out.cell.target(), gB);
  return out;
}

// ---- bigon transport ----------------------------------------------------------------

TwoGroupMorphism transport_bigon(const BundleData& bundle, const Bigon& sigma,
                                 const Itinerary& strips, const IntegratorConfig& cfg,
                                 const SoeConventions& conv) {
  validate_itinerary(strips);
  sigma.require_bigon();
  if (!bundle.fake_flat()) throw Error("transport_bigon requires a fake-flat bundle");
  const CrossedModulePtr& cm = bundle.cm();
  GroupElement c = GroupElement::identity(cm->H());
  for (std::size_t k = 0; k < strips.size(); ++k) {
    const auto& leg = strips[k];
    const ConnectionPtr& conn = bundle.connection(leg.chart_id);
    Bigon strip = sigma.restrict_t(leg.t0, leg.t1);
    for (double ss : {0.0, 0.5, 1.0}) {
      Bigon strip_copy = strip;
      check_leg_in_chart(
          Path(sigma.chart(), [strip_copy, ss](double t) { return strip_copy(ss, t); }),
          bundle.patch(leg.chart_id));
    }
    GroupElement hk = soe_square(cm, conn->A, conn->B, strip, cfg, conv).value;
    GroupElement w_top = poe(conn->A, strip.target(), cfg).value;
    c = mul(cm->alpha(w_top, c), hk);
    if (k + 1 < strips.size()) {
      const auto& next = strips[k + 1];
      GaugePtr gt = bundle.transition(leg.chart_id, next.chart_id);
      Bigon sigma_copy = sigma;
      double t1 = leg.t1;
      Path junction(sigma.chart(), [sigma_copy, t1](double s) { return sigma_copy(s, t1); });
      GroupElement htr = hg_phi(cm, gt->phi, gt->target->A, junction, cfg).h;
      GroupElement j_top(cm->G(), gt->g(sigma(1.0, leg.t1)));
      c = mul(cm->alpha(j_top, c), htr);
    }
  }
  GroupElement source = transport_path(bundle, sigma.source(), strips, cfg).normalize();
  return TwoGroupMorphism{cm, c, source};
}

}  // namespace gerbe
