#pragma once

#include <map>

#include "gerbe/gauge.hpp"

namespace gerbe {

// Random cells of the path 2-groupoid at sample level, all on one chart.
// Generated paths have vanishing endpoint velocity so declared compositions
// are smooth, and all composabilities hold by construction.
struct SampleFamily {
  Chart chart;
  std::uint64_t seed = 0;
  std::vector<Path> paths;
  std::vector<std::pair<Path, Path>> composable_pairs;    // (first, second)
  std::vector<std::array<Path, 3>> composable_triples;
  std::vector<Bigon> bigons;
  std::vector<std::pair<Bigon, Bigon>> vertical_pairs;    // (bottom, top)
  std::vector<std::pair<Bigon, Bigon>> horizontal_pairs;  // (first, second)
};

SampleFamily make_sample_family(const Chart& chart, std::uint64_t seed, int n_paths = 4,
                                int n_pairs = 3, int n_bigons = 3);

Path random_path(const Chart& chart, Rng& rng);
Path random_path_between(const Chart& chart, Rng& rng, const Vec& x, const Vec& y);

struct AxiomReport {
  std::map<std::string, double> residuals;
  double tolerance = 1e-6;
  double max_residual() const;
  bool pass() const { return max_residual() <= tolerance; }
};

// The 2-functor on cells: paths to G, bigons to Mor(Gamma).
GroupElement f_path(const GammaConnection& conn, const Path& gamma,
                    const IntegratorConfig& cfg = {});
TwoGroupMorphism f_bigon(const GammaConnection& conn, const Bigon& sigma,
                         const IntegratorConfig& cfg = {}, const SoeConventions& conv = {});

// Pseudonaturality cell of a gauge transformation at a path:
// (h_{g,phi}(gamma)^{-1}, g(y) poe_A(gamma)).
TwoGroupMorphism rho_path(const GaugeTransformation& gt, const Path& gamma,
                          const IntegratorConfig& cfg = {});

// Modification cell of a gauge 2-transformation at a point: (a(x), g1(x)).
TwoGroupMorphism mod_point(const Gauge2Transformation& a2t, const Vec& x);

// Functor axioms F1-F4 plus the target-source matching of bigon cells.
AxiomReport run_axiom_suite(const GammaConnection& conn, const SampleFamily& family,
                            const IntegratorConfig& cfg = {}, const SoeConventions& conv = {});
// Pseudonaturality: composite pasting (T1) and the gauge square (T2).
AxiomReport run_axiom_suite(const GaugeTransformation& gt, const SampleFamily& family,
                            const IntegratorConfig& cfg = {}, const SoeConventions& conv = {});
// Modification axiom (M).
AxiomReport run_axiom_suite(const Gauge2Transformation& a2t, const SampleFamily& family,
                            const IntegratorConfig& cfg = {}, const SoeConventions& conv = {});

// Reparameterization / degenerate-homotopy invariance of poe and soe.
AxiomReport thin_invariance_suite(const GammaConnection& conn, const SampleFamily& family,
                                  const IntegratorConfig& cfg = {},
                                  const SoeConventions& conv = {});

}  // namespace gerbe
