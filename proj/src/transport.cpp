#include "gerbe/transport.hpp"

#include <cmath>

namespace gerbe {

namespace {

// Inverse for elements that sit on a unitary/orthogonal group by
// construction (all stock structure groups do).
inline Mat group_inverse(const Mat& g) { return g.adjoint(); }

Mat poe_run(const DescriptorPtr& desc, const std::function<AlgebraElement(double)>& pull,
            int n_steps, Scheme scheme, std::vector<Mat>* prefix) {
  const double dt = 1.0 / n_steps;
  Mat g = mat_identity(desc->dim());
  if (prefix) {
    prefix->clear();
    prefix->reserve(n_steps + 1);
    prefix->push_back(g);
  }
  if (scheme == Scheme::cf_midpoint) {
    for (int k = 0; k < n_steps; ++k) {
      double tm = (k + 0.5) * dt;
      Mat step = desc->exp_matrix(Mat(-dt * pull(tm).matrix()));
      g = step * g;
      if (prefix) prefix->push_back(g);
    }
  } else {
    for (int k = 0; k < n_steps; ++k) {
      double t0 = k * dt;
      auto f = [&](double tau, const Mat& y) { return Mat(-pull(tau).matrix() * y); };
      Mat k1 = f(t0, g);
      Mat k2 = f(t0 + dt / 2, Mat(g + (dt / 2) * k1));
      Mat k3 = f(t0 + dt / 2, Mat(g + (dt / 2) * k2));
      Mat k4 = f(t0 + dt, Mat(g + dt * k3));
      g = desc->project(Mat(g + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)));
      if (prefix) prefix->push_back(g);
    }
  }
  return g;
}

struct HgState {
  Mat h, g;
};

HgState hg_run(const CrossedModulePtr& cm, const std::function<AlgebraElement(double)>& phi_pull,
               const std::function<AlgebraElement(double)>& a_pull, int n_steps) {
  const double dt = 1.0 / n_steps;
  const auto& H = cm->H();
  const auto& G = cm->G();
  HgState st{mat_identity(H->dim()), mat_identity(G->dim())};
  for (int k = 0; k < n_steps; ++k) {
    double tm = (k + 0.5) * dt;
    AlgebraElement X = a_pull(tm);
    Mat Xm = X.matrix();
    Mat Ym = phi_pull(tm).matrix();
    // g update is the plain path-ordered step
    st.g = G->exp_matrix(Mat(-dt * Xm)) * st.g;
    // h update: generator depends on h through the a2R coupling, so take a
    // midpoint predictor for h first.
    Mat F0 = Mat(-(Ym + cm->a2R(st.h, X).matrix()));
    Mat h_half = H->exp_matrix(Mat((dt / 2) * F0)) * st.h;
    Mat F1 = Mat(-(Ym + cm->a2R(h_half, X).matrix()));
    st.h = H->exp_matrix(Mat(dt * F1)) * st.h;
  }
  return st;
}

// One soe sweep (inner variable = t) at a fixed step count. The per-stage
// fiber integrals are independent of the outer state, so they are evaluated
// in parallel before the sequential outer fold.
Mat soe_run(const CrossedModulePtr& cm, const std::function<AlgebraElement(double, double)>& a_pull,
            const std::function<AlgebraElement(double, double)>& b_pull,
            const std::function<AlgebraElement(double)>& edge_a, int n_steps, int sign) {
  const double ds = 1.0 / n_steps;
  const double dt = 1.0 / n_steps;
  const auto& H = cm->H();
  const auto& G = cm->G();

  std::vector<Mat> a_sigmas(n_steps);
  std::vector<AlgebraElement> edges(n_steps);
  parallel_for_index(n_steps, [&](int k) {
    double sm = (k + 0.5) * ds;
    // transports along the t-curve at stage sm
    std::vector<Mat> prefix;
    prefix.reserve(n_steps + 1);
    Mat g = mat_identity(G->dim());
    prefix.push_back(g);
    for (int j = 0; j < n_steps; ++j) {
      double tm = (j + 0.5) * dt;
      g = G->exp_matrix(Mat(-dt * a_pull(sm, tm).matrix())) * prefix.back();
      prefix.push_back(g);
    }
    const Mat& W = prefix.back();
    // composite Simpson over the integrator nodes of the conjugated B term;
    // the conjugator is the remaining transport from t_j to the path end.
    Mat acc = mat_zero(H->dim());
    for (int j = 0; j <= n_steps; ++j) {
      double w = (j == 0 || j == n_steps) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      Mat conj = Mat(W * group_inverse(prefix[j]));
      acc += w * cm->act_alg(conj, b_pull(sm, double(j) * dt)).matrix();
    }
    a_sigmas[k] = Mat(double(sign) * (dt / 3.0) * acc);
    edges[k] = edge_a(sm);
  });

  Mat h = mat_identity(H->dim());
  for (int k = 0; k < n_steps; ++k) {
    // outer step of h' = -a_sigma h - a2R(h, edge) h, midpoint predictor on h
    Mat F0 = Mat(-(a_sigmas[k] + cm->a2R(h, edges[k]).matrix()));
    Mat h_half = H->exp_matrix(Mat((ds / 2) * F0)) * h;
    Mat F1 = Mat(-(a_sigmas[k] + cm->a2R(h_half, edges[k]).matrix()));
    h = H->exp_matrix(Mat(ds * F1)) * h;
  }
  return h;
}

AlgebraElement pull_one_form(const OneForm& omega, const Path& gamma, double tau) {
  return omega(gamma(tau), gamma.velocity(tau));
}

}  // namespace

// ---- cores -------------------------------------------------------------------

TransportResult poe_core(const DescriptorPtr& desc,
                         const std::function<AlgebraElement(double)>& pull,
                         const IntegratorConfig& cfg) {
  cfg.validate();
  Mat g = poe_run(desc, pull, cfg.n_steps, cfg.scheme, nullptr);
  TransportResult res{GroupElement(desc, g), 0.0};
  if (cfg.richardson) {
    Mat coarse = poe_run(desc, pull, cfg.n_steps / 2, cfg.scheme, nullptr);
    res.error_estimate = frob(g - coarse);
  }
  return res;
}

std::vector<Mat> poe_prefix_core(const DescriptorPtr& desc,
                                 const std::function<AlgebraElement(double)>& pull, int n_steps,
                                 Scheme scheme) {
  std::vector<Mat> prefix;
  poe_run(desc, pull, n_steps, scheme, &prefix);
  return prefix;
}

HgPhiResult hg_phi_core(const CrossedModulePtr& cm,
                        const std::function<AlgebraElement(double)>& phi_pull,
                        const std::function<AlgebraElement(double)>& a_pull,
                        const IntegratorConfig& cfg) {
  cfg.validate();
  HgState st = hg_run(cm, phi_pull, a_pull, cfg.n_steps);
  HgPhiResult res{GroupElement(cm->H(), st.h), GroupElement(cm->G(), st.g), 0.0};
  if (cfg.richardson) {
    HgState coarse = hg_run(cm, phi_pull, a_pull, cfg.n_steps / 2);
    res.error_estimate = frob(st.h - coarse.h) + frob(st.g - coarse.g);
  }
  return res;
}

TransportResult soe_core(const CrossedModulePtr& cm,
                         const std::function<AlgebraElement(double, double)>& a_pull,
                         const std::function<AlgebraElement(double, double)>& b_pull,
                         const std::function<AlgebraElement(double)>& edge_a,
                         const IntegratorConfig& cfg, const SoeConventions& conv) {
  cfg.validate();
  Mat h = soe_run(cm, a_pull, b_pull, edge_a, cfg.n_steps, conv.ode_sign);
  TransportResult res{GroupElement(cm->H(), h), 0.0};
  if (cfg.richardson) {
    Mat coarse = soe_run(cm, a_pull, b_pull, edge_a, cfg.n_steps / 2, conv.ode_sign);
    res.error_estimate = frob(h - coarse);
  }
  return res;
}

// ---- chart-level -------------------------------------------------------------

TransportResult poe(const OneForm& omega, const Path& gamma, const IntegratorConfig& cfg) {
  return poe_core(omega.algebra(),
                  [&](double tau) { return pull_one_form(omega, gamma, tau); }, cfg);
}

PrefixFlow poe_prefix(const OneForm& omega, const Path& gamma, const IntegratorConfig& cfg) {
  cfg.validate();
  PrefixFlow flow;
  flow.desc = omega.algebra();
  flow.nodes = poe_prefix_core(
      omega.algebra(), [&](double tau) { return pull_one_form(omega, gamma, tau); }, cfg.n_steps,
      cfg.scheme);
  return flow;
}

HgPhiResult hg_phi(const CrossedModulePtr& cm, const OneForm& phi, const OneForm& a_target,
                   const Path& gamma, const IntegratorConfig& cfg) {
  return hg_phi_core(
      cm, [&](double tau) { return pull_one_form(phi, gamma, tau); },
      [&](double tau) { return pull_one_form(a_target, gamma, tau); }, cfg);
}

double fake_flat_residual(const CrossedModulePtr& cm, const OneForm& A, const TwoForm& B,
                          int grid) {
  const Chart& ch = A.chart();
  double worst = 0.0;
  double margin = 4 * tols().fd_step;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      Vec p = Vec::Zero(ch.dim);
      double fi = (i + 0.5) / grid, fj = (j + 0.5) / grid;
      p[0] = ch.box[0].lo + margin + fi * (ch.box[0].hi - ch.box[0].lo - 2 * margin);
      if (ch.dim > 1) p[1] = ch.box[1].lo + margin + fj * (ch.box[1].hi - ch.box[1].lo - 2 * margin);
      if (ch.dim > 2) p[2] = 0.5 * (ch.box[2].lo + ch.box[2].hi);
      for (int a = 0; a < ch.dim; ++a)
        for (int b = a + 1; b < ch.dim; ++b) {
          AlgebraElement f = fake_curvature(*cm, A, B, p, unit_vec(ch.dim, a), unit_vec(ch.dim, b));
          worst = std::max(worst, f.norm());
        }
    }
  return worst;
}

namespace {

TransportResult soe_on_square(const CrossedModulePtr& cm, const OneForm& A, const TwoForm& B,
                              const Bigon& sq, const IntegratorConfig& cfg,
                              const SoeConventions& conv, bool include_edge) {
  const Bigon* work = &sq;
  Bigon transposed;
  if (conv.arg_order == SoeArgOrder::st) {
    transposed = sq.transposed();
    work = &transposed;
  }
  const Bigon& F = *work;
  auto a_pull = [&](double s, double t) { return A(F(s, t), F.d_dt(s, t)); };
  auto b_pull = [&](double s, double t) { return B(F(s, t), F.d_dt(s, t), F.d_ds(s, t)); };
  std::function<AlgebraElement(double)> edge_a;
  if (include_edge) {
    edge_a = [&](double s) { return A(F(s, 1.0), F.d_ds(s, 1.0)); };
  } else {
    DescriptorPtr G = cm->G();
    edge_a = [G](double) { return AlgebraElement::zero(G); };
  }
  return soe_core(cm, a_pull, b_pull, edge_a, cfg, conv);
}

}  // namespace

TransportResult soe(const CrossedModulePtr& cm, const OneForm& A, const TwoForm& B,
                    const Bigon& sigma, const IntegratorConfig& cfg, const SoeConventions& conv,
                    SoeInfo* info) {
  sigma.require_bigon();
  if (info) {
    info->fake_flat_probe = fake_flat_residual(cm, A, B);
    info->fake_flat_warning = info->fake_flat_probe > tols().fake_flat;
  }
  // Endpoints are fixed, so the right-edge correction vanishes; it is kept
  // off to avoid paying finite differences of a constant edge.
  return soe_on_square(cm, A, B, sigma, cfg, conv, false);
}

TransportResult soe_square(const CrossedModulePtr& cm, const OneForm& A, const TwoForm& B,
                           const Bigon& square, const IntegratorConfig& cfg,
                           const SoeConventions& conv) {
  return soe_on_square(cm, A, B, square, cfg, conv, true);
}

}  // namespace gerbe
