#pragma once

#include <map>
#include <memory>
#include <optional>

#include "gerbe/transport.hpp"

namespace gerbe {

struct GammaConnection {
  CrossedModulePtr cm;
  Chart chart;
  OneForm A;  // Lie(G)-valued
  TwoForm B;  // Lie(H)-valued
  std::optional<double> fake_flat_checked;  // probe residual when checked

  bool is_fake_flat(double tol) const { return fake_flat_checked && *fake_flat_checked < tol; }
};

using ConnectionPtr = std::shared_ptr<const GammaConnection>;

ConnectionPtr make_connection(CrossedModulePtr cm, Chart chart, OneForm A, TwoForm B,
                              bool probe_fake_flatness = true);

// A 1-cell (g, phi) : source -> target of the bicategory of connections.
struct GaugeTransformation {
  GroupMap g;   // into G
  OneForm phi;  // Lie(H)-valued
  ConnectionPtr source;
  ConnectionPtr target;
};

using GaugePtr = std::shared_ptr<const GaugeTransformation>;

// A 2-cell a : source_gauge => target_gauge (both with the same connections).
struct Gauge2Transformation {
  GroupMap a;  // into H
  GaugePtr source;
  GaugePtr target;
};

// Builds the gauge-transformed connection from raw (g, phi) data; the result
// makes (g, phi) a valid gauge transformation from src by construction.
GaugePtr apply_gauge(const ConnectionPtr& src, const GroupMap& g, const OneForm& phi);

GaugePtr identity_gauge(const ConnectionPtr& conn);
GaugePtr compose_gauge(const GaugePtr& gt2, const GaugePtr& gt1);
GaugePtr invert_gauge(const GaugePtr& gt);

struct GaugeCheckReport {
  double eq1 = 0.0;  // A' + t_*(phi) = Ad_g(A) - g^* theta_bar
  double eq2 = 0.0;  // B' + alpha_*(A' ^ phi) + d phi + (1/2)[phi ^ phi] = (alpha_g)_* B
  double max_residual() const { return std::max(eq1, eq2); }
};
// region overrides the sampling domain (used for transition data on overlaps)
GaugeCheckReport check_gauge(const GaugeTransformation& gt, int n_samples, std::uint64_t seed,
                             const Chart* region = nullptr);

struct Gauge2CheckReport {
  double g_condition = 0.0;    // g2 = (t . a) g1
  double phi_condition = 0.0;  // phi2 + a2R(a, A') = Ad_a(phi1) - a^* theta_bar
  double max_residual() const { return std::max(g_condition, phi_condition); }
};
Gauge2CheckReport check_gauge2(const Gauge2Transformation& a2t, int n_samples, std::uint64_t seed,
                               const Chart* region = nullptr);

Gauge2Transformation identity_gauge2(const GaugePtr& gt);

// Builds the 2-cell with the given H-valued map out of a source 1-cell; the
// target 1-cell is derived from the 2-cell conditions.
Gauge2Transformation make_gauge2(const GaugePtr& source, const GroupMap& a);
Gauge2Transformation vcompose2(const Gauge2Transformation& a2, const Gauge2Transformation& a1);
Gauge2Transformation hcompose2(const Gauge2Transformation& a2, const Gauge2Transformation& a1);

// B := t_star^{-1}(dA + (1/2)[A ^ A]), so the fake-curvature closes to zero.
ConnectionPtr make_fake_flat(const CrossedModulePtr& cm, const OneForm& A);

// Sampling helpers shared by the residual checks and the harness.
Vec random_interior_point(const Chart& chart, Rng& rng, double margin_factor = 8.0);
Vec random_tangent(const Chart& chart, Rng& rng);

}  // namespace gerbe
