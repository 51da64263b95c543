#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gerbe/crossed_module.hpp"
#include "gerbe/expr.hpp"
#include "gerbe/lie.hpp"

namespace gerbe {

struct Interval {
  double lo = 0, hi = 1;
};

struct Chart {
  int dim = 2;
  std::array<Interval, 3> box{};

  bool contains(const Vec& p, double slack = 0.0) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < box[i].lo - slack || p[i] > box[i].hi + slack) return false;
    return true;
  }
  bool interior(const Vec& p, double margin) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < box[i].lo + margin || p[i] > box[i].hi - margin) return false;
    return true;
  }
};

// Algebra-valued 1-form on a chart. Expression-backed when loaded from a
// scenario; closure-backed when produced by gauge actions or pullbacks.
class OneForm {
 public:
  using Evaluator = std::function<AlgebraElement(const Vec&, const Vec&)>;

  OneForm() = default;
  OneForm(Chart chart, DescriptorPtr algebra, Evaluator eval);
  // components[i][k]: coefficient of basis k against dx_{i+1}
  static OneForm from_exprs(Chart chart, DescriptorPtr algebra,
                            std::vector<std::vector<ScalarExpr>> components);
  static OneForm zero(Chart chart, DescriptorPtr algebra);

  AlgebraElement operator()(const Vec& p, const Vec& X) const { return eval_(p, X); }
  const Chart& chart() const { return chart_; }
  const DescriptorPtr& algebra() const { return algebra_; }

 private:
  Chart chart_;
  DescriptorPtr algebra_;
  Evaluator eval_;
};

// Algebra-valued 2-form; stored via its strictly upper components when
// expression-backed, antisymmetrized on evaluation.
class TwoForm {
 public:
  using Evaluator = std::function<AlgebraElement(const Vec&, const Vec&, const Vec&)>;

  TwoForm() = default;
  TwoForm(Chart chart, DescriptorPtr algebra, Evaluator eval);
  // components e_{ij} keyed lexicographically (i < j), each algebra_dim exprs
  static TwoForm from_exprs(Chart chart, DescriptorPtr algebra,
                            std::vector<std::vector<ScalarExpr>> upper_components);
  static TwoForm zero(Chart chart, DescriptorPtr algebra);

  AlgebraElement operator()(const Vec& p, const Vec& X, const Vec& Y) const {
    return eval_(p, X, Y);
  }
  const Chart& chart() const { return chart_; }
  const DescriptorPtr& algebra() const { return algebra_; }

 private:
  Chart chart_;
  DescriptorPtr algebra_;
  Evaluator eval_;
};

// Smooth map chart -> group. Exp-parameterized when built from expressions
// (membership is structural); products/inverses stay closure-backed.
class GroupMap {
 public:
  using Evaluator = std::function<Mat(const Vec&)>;

  GroupMap() = default;
  GroupMap(Chart chart, DescriptorPtr group, Evaluator eval);
  static GroupMap from_generator(Chart chart, DescriptorPtr group,
                                 std::vector<ScalarExpr> algebra_coeffs);
  static GroupMap constant(Chart chart, const GroupElement& g);
  static GroupMap identity(Chart chart, DescriptorPtr group);

  Mat operator()(const Vec& p) const { return eval_(p); }
  GroupElement at(const Vec& p) const { return GroupElement(group_, eval_(p)); }
  const Chart& chart() const { return chart_; }
  const DescriptorPtr& group() const { return group_; }

  GroupMap pointwise_product(const GroupMap& other) const;
  GroupMap pointwise_inverse() const;

  // Maurer-Cartan pullbacks along direction X at p: left = g^{-1} dg,
  // right = dg g^{-1} (central differences in the chart).
  AlgebraElement theta(const Vec& p, const Vec& X) const;
  AlgebraElement theta_bar(const Vec& p, const Vec& X) const;

 private:
  Chart chart_;
  DescriptorPtr group_;
  Evaluator eval_;
};

// Smooth path [0,1] -> chart; closure-backed with expression factory.
class Path {
 public:
  using Evaluator = std::function<Vec(double)>;

  Path() = default;
  Path(Chart chart, Evaluator eval);
  static Path from_exprs(Chart chart, std::vector<ScalarExpr> components,
                         bool sitting_instants = false);
  static Path constant(Chart chart, const Vec& point);

  Vec operator()(double u) const { return eval_(u); }
  Vec velocity(double u) const;
  Vec start() const { return eval_(0.0); }
  Vec end() const { return eval_(1.0); }
  const Chart& chart() const { return chart_; }

  Path reparameterized() const;  // precomposed with the smooth step
  Path reversed() const;
  Path restrict(double a, double b) const;  // affine sub-path [a,b] -> [0,1]
  // Midpoint concatenation with sitting-instant smoothing in each half.
  static Path concatenate(const Path& first, const Path& second);

  // TYPE invariant: image inside the chart box at n sample points.
  void check_in_chart(int n = 512) const;

 private:
  Chart chart_;
  Evaluator eval_;
};

// Smooth [0,1]^2 -> chart with fixed endpoints in s: Sigma(s,0) and
// Sigma(s,1) constant. t is the path parameter, s the homotopy parameter.
class Bigon {
 public:
  using Evaluator = std::function<Vec(double, double)>;

  Bigon() = default;
  Bigon(Chart chart, Evaluator eval);
  static Bigon from_exprs(Chart chart, std::vector<ScalarExpr> components);
  // Linear interpolation between two paths sharing endpoints, smoothed in s.
  static Bigon linear_interpolation(const Path& bottom, const Path& top);

  Vec operator()(double s, double t) const { return eval_(s, t); }
  Vec d_dt(double s, double t) const;
  Vec d_ds(double s, double t) const;
  Path source() const;  // s = 0 path
  Path target() const;  // s = 1 path
  Path left_edge() const;   // t = 0 in s
  Path right_edge() const;  // t = 1 in s
  const Chart& chart() const { return chart_; }

  Bigon reparameterized_t() const;
  Bigon reparameterized_s() const;
  Bigon transposed() const;
  Bigon restrict_s(double a, double b) const;
  Bigon restrict_t(double a, double b) const;

  // Max endpoint drift over a grid (the boundary_check operation).
  double boundary_residual(int grid = 64) const;
  void require_bigon(double tol = 1e-9) const;

  static Bigon vertical_compose(const Bigon& bottom, const Bigon& top);
  static Bigon horizontal_compose(const Bigon& first, const Bigon& second);

 private:
  Chart chart_;
  Evaluator eval_;
};

// The boundary-flat reparameterizer sigma(t) = t - sin(2 pi t)/(2 pi).
double smooth_step(double t);

// ---- form calculus ----------------------------------------------------------

// Exterior derivative of a 1-form on constant frames, central differences.
AlgebraElement d_fd(const OneForm& form, const Vec& p, const Vec& X, const Vec& Y);

// [A ^ B](X, Y) = [A(X), B(Y)] - [A(Y), B(X)]
AlgebraElement wedge_bracket(const OneForm& A, const OneForm& B, const Vec& p, const Vec& X,
                             const Vec& Y);
// alpha_*(A ^ phi)(X, Y) = a1(A(X), phi(Y)) - a1(A(Y), phi(X))
AlgebraElement wedge_action(const CrossedModule& cm, const OneForm& A, const OneForm& phi,
                            const Vec& p, const Vec& X, const Vec& Y);

// fcurv = dA + (1/2)[A ^ A] - t_*(B), valued in Lie(G).
AlgebraElement fake_curvature(const CrossedModule& cm, const OneForm& A, const TwoForm& B,
                              const Vec& p, const Vec& X, const Vec& Y);

// curv = dB + alpha_*(A ^ B), valued in Lie(H).
AlgebraElement curvature3(const CrossedModule& cm, const OneForm& A, const TwoForm& B,
                          const Vec& p, const Vec& X, const Vec& Y, const Vec& Z);

// Pullback along a chart self-map f (Df by central differences).
OneForm pullback(const OneForm& form, const std::function<Vec(const Vec&)>& f, Chart new_chart);
TwoForm pullback(const TwoForm& form, const std::function<Vec(const Vec&)>& f, Chart new_chart);

Vec unit_vec(int dim, int axis);

}  // namespace gerbe
