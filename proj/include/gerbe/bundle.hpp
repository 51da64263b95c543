#pragma once

#include <map>
#include <string>
#include <variant>

#include "gerbe/gauge.hpp"

namespace gerbe {

// ---- the trivial bundle M x Gamma -------------------------------------------

// Points and tangents of M x G and M x Mor(Gamma). Group tangents are kept in
// the right-translated representation: (xi, g) stands for the velocity xi g.
struct ObjPoint {
  Vec m;
  Mat g;
};
struct ObjTangent {
  Vec v;
  AlgebraElement xi;  // Lie(G), right-translated
};
struct MorPoint {
  Vec m;
  Mat h;
  Mat g;
};
struct MorTangent {
  Vec v;
  AlgebraElement eta;  // Lie(H)
  AlgebraElement xi;   // Lie(G)
};

// Closed-form evaluators of the connection the base data (A, B) induces on
// the trivial bundle: Omega^a on M x G, Omega^b on M x Mor(Gamma), Omega^c
// on M x G.
class TotalSpaceForms {
 public:
  TotalSpaceForms(CrossedModulePtr cm, OneForm A, TwoForm B);

  AlgebraElement omega_a(const ObjPoint& p, const ObjTangent& t) const;
  AlgebraElement omega_b(const MorPoint& p, const MorTangent& t) const;
  AlgebraElement omega_c(const ObjPoint& p, const ObjTangent& t1, const ObjTangent& t2) const;

  const CrossedModulePtr& cm() const { return cm_; }
  const OneForm& A() const { return A_; }
  const TwoForm& B() const { return B_; }

 private:
  CrossedModulePtr cm_;
  OneForm A_;
  TwoForm B_;
};

// Curves in the groups and in the total spaces.
struct GroupCurve {
  DescriptorPtr desc;
  std::function<Mat(double)> eval;

  static GroupCurve constant(const GroupElement& g);
  static GroupCurve identity(const DescriptorPtr& d);
  static GroupCurve from_generator(const DescriptorPtr& d, std::vector<ScalarExpr> coeffs);
  Mat operator()(double u) const { return eval(u); }
  AlgebraElement velocity(double u) const;  // right-translated
  GroupCurve pointwise_product(const GroupCurve& other) const;
  GroupCurve pointwise_inverse() const;
};

struct ObjPath {
  Path base;
  GroupCurve fiber;

  ObjPoint at(double u) const { return {base(u), fiber(u)}; }
  ObjTangent tangent(double u) const { return {base.velocity(u), fiber.velocity(u)}; }
  ObjPath acted(const GroupCurve& g) const;  // R(beta, g)
};

struct MorPath {
  Path base;
  GroupCurve fiber_h;
  GroupCurve fiber_g;

  MorPoint at(double u) const { return {base(u), fiber_h(u), fiber_g(u)}; }
  MorTangent tangent(double u) const;
  ObjPath source() const;
  ObjPath target(const CrossedModulePtr& cm) const;
  MorPath acted(const CrossedModulePtr& cm, const GroupCurve& h, const GroupCurve& g) const;
  MorPath pointwise_inverse(const CrossedModulePtr& cm) const;
  static MorPath pointwise_compose(const CrossedModulePtr& cm, const MorPath& rho1,
                                   const MorPath& rho2);  // rho1 after rho2
  MorPath concatenated_with(const MorPath& next) const;   // path composition
};

struct ObjBigon {
  Bigon base;
  std::function<Mat(double, double)> fiber;

  ObjPoint at(double s, double t) const { return {base(s, t), fiber(s, t)}; }
  // canonical section: fiber constantly the identity of G
  static ObjBigon from_section(const Bigon& sigma, const DescriptorPtr& G);
};

// The identity morphism path over an object path.
MorPath identity_mor_path(const CrossedModulePtr& cm, const ObjPath& beta);

// Pullbacks of omega_a / omega_b along total-space curves.
AlgebraElement pull_omega_a(const TotalSpaceForms& forms, const ObjPath& beta, double u);
AlgebraElement pull_omega_b(const TotalSpaceForms& forms, const MorPath& rho, double u);

// Equivariance residuals of the three defining conditions.
struct EquivarianceReport {
  double eq_a = 0.0, eq_b = 0.0, eq_c = 0.0;
  double max_residual() const { return std::max(eq_a, std::max(eq_b, eq_c)); }
};
EquivarianceReport check_equivariance(const TotalSpaceForms& forms, int n_samples,
                                      std::uint64_t seed);

// Horizontalization: the unique correction with value 1 at u = 0 making the
// acted path horizontal. Returned at the integrator nodes.
PrefixFlow horizontalize_object(const TotalSpaceForms& forms, const ObjPath& beta,
                                const IntegratorConfig& cfg = {});
PrefixFlow horizontalize_morphism(const TotalSpaceForms& forms, const MorPath& rho,
                                  const IntegratorConfig& cfg = {});

// Max |omega| along the acted path, with the correction sampled at the nodes.
double omega_a_residual(const TotalSpaceForms& forms, const ObjPath& beta,
                        const PrefixFlow& correction);
double omega_b_residual(const TotalSpaceForms& forms, const MorPath& rho,
                        const PrefixFlow& correction);
double omega_a_residual(const TotalSpaceForms& forms, const ObjPath& beta);  // no correction
double omega_b_residual(const TotalSpaceForms& forms, const MorPath& rho);

// h_Omega(rho): the H-component of the canonical gauge transport along rho.
GroupElement h_omega(const TotalSpaceForms& forms, const MorPath& rho,
                     const IntegratorConfig& cfg = {});

// soe of the (Omega^a, -Omega^c) connection along a square in M x G.
GroupElement soe_total(const TotalSpaceForms& forms, const ObjBigon& sigma,
                       const IntegratorConfig& cfg = {}, const SoeConventions& conv = {});

GroupElement poe_omega_a(const TotalSpaceForms& forms, const ObjPath& beta,
                         const IntegratorConfig& cfg = {});
GroupElement poe_omega_b(const TotalSpaceForms& forms, const MorPath& rho,
                         const IntegratorConfig& cfg = {});

// Smooth random curves for the identity suites (sitting-instant generators,
// so concatenations are smooth).
GroupCurve random_group_curve(const DescriptorPtr& d, Rng& rng, double scale = 0.6);
GroupCurve curve_from_flow(const PrefixFlow& flow);

// Identity suite on the trivial bundle: equivariance, horizontality calculus,
// the h_Omega laws, the pullback poe laws, the surface square, and the
// canonical-section reductions. Keys are named after what they check.
std::map<std::string, double> trivial_bundle_suite(const TotalSpaceForms& forms,
                                                   const IntegratorConfig& cfg,
                                                   const SoeConventions& conv, std::uint64_t seed);

// ---- principal 2-bundles as descent data -------------------------------------

struct CoverChart {
  std::string id;
  Chart patch;  // where transport may route through this chart
  ConnectionPtr conn;
};

struct TransitionDatum {
  std::string from, to;
  Chart overlap;
  GaugePtr gt;
};

struct Cocycle2 {
  std::string i, j, k;
  Gauge2Transformation a;  // (g_jk, phi_jk) o (g_ij, phi_ij) => (g_ik, phi_ik)
};

class BundleData {
 public:
  BundleData(CrossedModulePtr cm, std::vector<CoverChart> charts,
             std::vector<TransitionDatum> transitions, std::vector<Cocycle2> cocycles,
             bool fake_flat_flag);

  const CrossedModulePtr& cm() const { return cm_; }
  const std::vector<CoverChart>& charts() const { return charts_; }
  const std::vector<TransitionDatum>& transitions() const { return transitions_; }
  const std::vector<Cocycle2>& cocycles() const { return cocycles_; }
  bool fake_flat() const { return fake_flat_; }

  const ConnectionPtr& connection(const std::string& id) const;
  const Chart& patch(const std::string& id) const;
  // Transition from chart i to chart j; the inverse of a declared (j, i)
  // datum is synthesized, and (i, i) is the identity.
  GaugePtr transition(const std::string& i, const std::string& j) const;
  // H-valued cocycle map evaluated at a point; degenerate triples are the
  // identity under the load-time normalization.
  GroupElement cocycle_at(const std::string& i, const std::string& j, const std::string& k,
                          const Vec& x) const;

 private:
  CrossedModulePtr cm_;
  std::vector<CoverChart> charts_;
  std::vector<TransitionDatum> transitions_;
  std::vector<Cocycle2> cocycles_;
  bool fake_flat_ = false;
  std::map<std::string, ConnectionPtr> by_id_;
  std::map<std::string, Chart> patch_by_id_;
  std::map<std::pair<std::string, std::string>, GaugePtr> trans_map_;
  std::map<std::tuple<std::string, std::string, std::string>, const Cocycle2*> cocycle_map_;
};

struct ValidationReport {
  std::map<std::string, double> residuals;
  double max_residual() const;
};
ValidationReport validate_bundle(const BundleData& bundle, int n_samples, std::uint64_t seed);

// ---- global transport ---------------------------------------------------------

struct ItineraryLeg {
  std::string chart_id;
  double t0 = 0, t1 = 1;
};
using Itinerary = std::vector<ItineraryLeg>;

struct WordSegment {
  std::string chart_id;
  double t0, t1;
  GroupElement value;  // poe of the chart connection along the sub-path
};
struct WordJump {
  std::string from, to;
  double at_t;
  Vec at;
  TwoGroupMorphism cell;  // (1, g_{from,to}(at))
};

struct TransportWord {
  CrossedModulePtr cm;
  std::vector<std::variant<WordSegment, WordJump>> entries;  // path order
  std::string start_trivialization, end_trivialization;

  GroupElement normalize() const;  // right-to-left product
  double adjacency_residual(const std::function<Vec(double)>& gamma) const;
};

TransportWord transport_path(const BundleData& bundle, const Path& gamma,
                             const Itinerary& itinerary, const IntegratorConfig& cfg = {});

struct ItineraryComparison {
  TwoGroupMorphism cell;  // from the A-transport (in B's trivializations) to the B-transport
  double residual;        // | t(cell) source - target |
};
ItineraryComparison compare_itineraries(const BundleData& bundle, const Path& gamma,
                                        const Itinerary& itinA, const Itinerary& itinB,
                                        const IntegratorConfig& cfg = {});

// Surface transport over strip itineraries (t-intervals, constant in s).
TwoGroupMorphism transport_bigon(const BundleData& bundle, const Bigon& sigma,
                                 const Itinerary& strips, const IntegratorConfig& cfg = {},
                                 const SoeConventions& conv = {});

}  // namespace gerbe
