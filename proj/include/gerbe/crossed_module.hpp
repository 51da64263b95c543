#pragma once

#include <map>
#include <memory>
#include <string>

#include "gerbe/lie.hpp"

namespace gerbe {

// A Lie 2-group presented as a crossed module (G, H, t, alpha) together with
// all differentials the transport machinery needs:
//   t_star  : Lie(H) -> Lie(G), differential of t (coefficient matrix)
//   a1      : (X in Lie(G), Y in Lie(H)) -> Lie(H), the Lie-algebra action
//   a2L     : (h, X) -> h^{-1} d/de alpha(exp(eX), h)|_0      (left translate)
//   a2R     : (h, X) -> d/de alpha(exp(eX), h)|_0 h^{-1}      (right translate)
//   act_alg : (g, Y) -> d/de alpha(g, exp(eY))|_0, the automorphism (alpha_g)_*
class CrossedModule {
 public:
  using TMap = std::function<Mat(const Mat&)>;            // H matrix -> G matrix
  using ActionMap = std::function<Mat(const Mat&, const Mat&)>;  // (G, H) -> H

  CrossedModule(std::string name, DescriptorPtr G, DescriptorPtr H, TMap t, ActionMap alpha,
                Eigen::MatrixXd t_star,
                std::function<AlgebraElement(const AlgebraElement&, const AlgebraElement&)> a1,
                std::function<AlgebraElement(const Mat&, const AlgebraElement&)> a2L,
                std::function<AlgebraElement(const Mat&, const AlgebraElement&)> a2R,
                std::function<AlgebraElement(const Mat&, const AlgebraElement&)> act_alg);

  const std::string& name() const { return name_; }
  const DescriptorPtr& G() const { return G_; }
  const DescriptorPtr& H() const { return H_; }

  GroupElement t(const GroupElement& h) const;
  Mat t_matrix(const Mat& h) const { return t_(h); }
  GroupElement alpha(const GroupElement& g, const GroupElement& h) const;
  Mat alpha_matrix(const Mat& g, const Mat& h) const { return alpha_(g, h); }

  // tilde_alpha_h(g) := h^{-1} alpha(g, h)
  GroupElement tilde_alpha(const GroupElement& h, const GroupElement& g) const;

  const Eigen::MatrixXd& t_star_matrix() const { return t_star_; }
  AlgebraElement t_star(const AlgebraElement& Y) const;
  bool t_star_invertible() const;
  AlgebraElement t_star_inverse(const AlgebraElement& X) const;

  AlgebraElement a1(const AlgebraElement& X, const AlgebraElement& Y) const { return a1_(X, Y); }
  AlgebraElement a2L(const Mat& h, const AlgebraElement& X) const { return a2L_(h, X); }
  AlgebraElement a2R(const Mat& h, const AlgebraElement& X) const { return a2R_(h, X); }
  AlgebraElement act_alg(const Mat& g, const AlgebraElement& Y) const { return act_alg_(g, Y); }

  GroupElement random_g(Rng& rng, double scale = 1.0) const;
  GroupElement random_h(Rng& rng, double scale = 1.0) const;
  AlgebraElement random_alg_g(Rng& rng, double scale = 1.0) const;
  AlgebraElement random_alg_h(Rng& rng, double scale = 1.0) const;

 private:
  std::string name_;
  DescriptorPtr G_, H_;
  TMap t_;
  ActionMap alpha_;
  Eigen::MatrixXd t_star_;
  Eigen::MatrixXd t_star_inv_;
  bool t_star_invertible_ = false;
  std::function<AlgebraElement(const AlgebraElement&, const AlgebraElement&)> a1_;
  std::function<AlgebraElement(const Mat&, const AlgebraElement&)> a2L_, a2R_;
  std::function<AlgebraElement(const Mat&, const AlgebraElement&)> act_alg_;
};

using CrossedModulePtr = std::shared_ptr<const CrossedModule>;

enum class CrossedModuleName { ABELIAN_GERBE, INNER_SU2, INNER_SO3, SPIN };

CrossedModuleName crossed_module_name_from_string(const std::string& s);
CrossedModulePtr instance(CrossedModuleName name);

// H = {1} over the given base group; used by the reduction checks.
CrossedModulePtr h_trivial_module(const DescriptorPtr& G);

// Max residuals of the crossed-module axioms and of the analytic
// differentials against central finite differences, over sampled data.
struct AxiomCheckReport {
  std::map<std::string, double> residuals;
  double max_residual() const;
  bool pass(double tol_axiom, double tol_fd) const;
};
AxiomCheckReport check_axioms(const CrossedModule& cm, int n_samples, std::uint64_t seed);

struct TwoGroupMorphism {
  CrossedModulePtr cm;
  GroupElement h;  // in H
  GroupElement g;  // in G

  GroupElement source() const { return g; }
  GroupElement target() const { return mul(cm->t(h), g); }
  static TwoGroupMorphism identity(const CrossedModulePtr& cm, const GroupElement& g) {
    return {cm, GroupElement::identity(cm->H()), g};
  }
};

// Vertical composition (h2, g2) . (h1, g1) = (h2 h1, g1), defined when
// source(m2) = target(m1).
TwoGroupMorphism mor_vcompose(const TwoGroupMorphism& m2, const TwoGroupMorphism& m1);
// Group multiplication in Mor = H x G: (h2, g2)(h1, g1) = (h2 alpha(g2, h1), g2 g1).
TwoGroupMorphism mor_product(const TwoGroupMorphism& m2, const TwoGroupMorphism& m1);
TwoGroupMorphism mor_inverse_vertical(const TwoGroupMorphism& m);

double dist(const TwoGroupMorphism& a, const TwoGroupMorphism& b);

// The evaluator bundle of the operation differential_maps.
struct DifferentialMaps {
  std::function<AlgebraElement(const AlgebraElement&)> t_star;
  std::function<AlgebraElement(const AlgebraElement&, const AlgebraElement&)> a1;
  std::function<AlgebraElement(const Mat&, const AlgebraElement&)> a2L;
  std::function<AlgebraElement(const Mat&, const AlgebraElement&)> a2R;
};
DifferentialMaps differential_maps(const CrossedModulePtr& cm);

}  // namespace gerbe
