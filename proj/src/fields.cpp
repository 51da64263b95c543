#include "gerbe/fields.hpp"

#include <cmath>

namespace gerbe {

namespace {
double clamp_fd(double x, double h, double lo = 0.0, double hi = 1.0) {
  if (x - h < lo) return lo + h;
  if (x + h > hi) return hi - h;
  return x;
}
}  // namespace

Vec unit_vec(int dim, int axis) {
  Vec v = Vec::Zero(dim);
  v[axis] = 1.0;
  return v;
}

double smooth_step(double t) { return t - std::sin(2.0 * M_PI * t) / (2.0 * M_PI); }

// ---- OneForm ----------------------------------------------------------------

OneForm::OneForm(Chart chart, DescriptorPtr algebra, Evaluator eval)
    : chart_(chart), algebra_(std::move(algebra)), eval_(std::move(eval)) {}

OneForm OneForm::from_exprs(Chart chart, DescriptorPtr algebra,
                            std::vector<std::vector<ScalarExpr>> components) {
  if (int(components.size()) != chart.dim)
    throw LoadError("1-form needs one component row per chart axis");
  for (auto& row : components)
    if (int(row.size()) != algebra->algebra_dim())
      throw LoadError("1-form component row size must equal the algebra dimension");
  auto comps = std::make_shared<std::vector<std::vector<ScalarExpr>>>(std::move(components));
  DescriptorPtr alg = algebra;
  auto eval = [comps, alg](const Vec& p, const Vec& X) {
    Env env;
    env.set_point(p);
    Coef c = Coef::Zero(alg->algebra_dim());
    for (int i = 0; i < X.size(); ++i) {
      if (X[i] == 0.0) continue;
      for (int k = 0; k < c.size(); ++k) c[k] += X[i] * (*comps)[i][k].eval(env);
    }
    return AlgebraElement(alg, c);
  };
  return OneForm(chart, algebra, eval);
}

OneForm OneForm::zero(Chart chart, DescriptorPtr algebra) {
  DescriptorPtr alg = algebra;
  return OneForm(chart, algebra,
                 [alg](const Vec&, const Vec&) { return AlgebraElement::zero(alg); });
}

// ---- TwoForm ----------------------------------------------------------------

TwoForm::TwoForm(Chart chart, DescriptorPtr algebra, Evaluator eval)
    : chart_(chart), algebra_(std::move(algebra)), eval_(std::move(eval)) {}

TwoForm TwoForm::from_exprs(Chart chart, DescriptorPtr algebra,
                            std::vector<std::vector<ScalarExpr>> upper_components) {
  int d = chart.dim;
  int expected = d * (d - 1) / 2;
  if (int(upper_components.size()) != expected)
    throw LoadError("2-form needs d(d-1)/2 upper components");
  for (auto& row : upper_components)
    if (int(row.size()) != algebra->algebra_dim())
      throw LoadError("2-form component row size must equal the algebra dimension");
  auto comps = std::make_shared<std::vector<std::vector<ScalarExpr>>>(std::move(upper_components));
  DescriptorPtr alg = algebra;
  auto eval = [comps, alg, d](const Vec& p, const Vec& X, const Vec& Y) {
    Env env;
    env.set_point(p);
    Coef c = Coef::Zero(alg->algebra_dim());
    int idx = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j, ++idx) {
        double w = X[i] * Y[j] - X[j] * Y[i];
        if (w == 0.0) continue;
        for (int k = 0; k < c.size(); ++k) c[k] += w * (*comps)[idx][k].eval(env);
      }
    return AlgebraElement(alg, c);
  };
  return TwoForm(chart, algebra, eval);
}

TwoForm TwoForm::zero(Chart chart, DescriptorPtr algebra) {
  DescriptorPtr alg = algebra;
  return TwoForm(chart, algebra,
                 [alg](const Vec&, const Vec&, const Vec&) { return AlgebraElement::zero(alg); });
}

// ---- GroupMap ---------------------------------------------------------------

GroupMap::GroupMap(Chart chart, DescriptorPtr group, Evaluator eval)
    : chart_(chart), group_(std::move(group)), eval_(std::move(eval)) {}

GroupMap GroupMap::from_generator(Chart chart, DescriptorPtr group,
                                  std::vector<ScalarExpr> algebra_coeffs) {
  if (int(algebra_coeffs.size()) != group->algebra_dim())
    throw LoadError("group map generator must have one expression per algebra basis element");
  auto comps = std::make_shared<std::vector<ScalarExpr>>(std::move(algebra_coeffs));
  DescriptorPtr grp = group;
  auto eval = [comps, grp](const Vec& p) {
    Env env;
    env.set_point(p);
    Coef c(grp->algebra_dim());
    for (int k = 0; k < c.size(); ++k) c[k] = (*comps)[k].eval(env);
    return grp->exp_matrix(AlgebraElement(grp, c).matrix());
  };
  return GroupMap(chart, group, eval);
}

GroupMap GroupMap::constant(Chart chart, const GroupElement& g) {
  Mat m = g.matrix;
  return GroupMap(chart, g.desc, [m](const Vec&) { return m; });
}

GroupMap GroupMap::identity(Chart chart, DescriptorPtr group) {
  Mat m = mat_identity(group->dim());
  return GroupMap(chart, group, [m](const Vec&) { return m; });
}

GroupMap GroupMap::pointwise_product(const GroupMap& other) const {
  if (group_ != other.group_) throw DescriptorMismatch("GroupMap product: different groups");
  auto a = eval_, b = other.eval_;
  return GroupMap(chart_, group_, [a, b](const Vec& p) { return Mat(a(p) * b(p)); });
}

GroupMap GroupMap::pointwise_inverse() const {
  auto a = eval_;
  return GroupMap(chart_, group_, [a](const Vec& p) { return Mat(a(p).inverse()); });
}

AlgebraElement GroupMap::theta(const Vec& p, const Vec& X) const {
  double h = tols().fd_step;
  Mat dg = Mat((eval_(p + h * X) - eval_(p - h * X)) / (2 * h));
  return AlgebraElement(group_, group_->expand(Mat(eval_(p).inverse() * dg)));
}

AlgebraElement GroupMap::theta_bar(const Vec& p, const Vec& X) const {
  double h = tols().fd_step;
  Mat dg = Mat((eval_(p + h * X) - eval_(p - h * X)) / (2 * h));
  return AlgebraElement(group_, group_->expand(Mat(dg * eval_(p).inverse())));
}

// ---- Path -------------------------------------------------------------------

Path::Path(Chart chart, Evaluator eval) : chart_(chart), eval_(std::move(eval)) {}

Path Path::from_exprs(Chart chart, std::vector<ScalarExpr> components, bool sitting_instants) {
  if (int(components.size()) != chart.dim)
    throw LoadError("path needs one component per chart axis");
  auto comps = std::make_shared<std::vector<ScalarExpr>>(std::move(components));
  int d = chart.dim;
  auto eval = [comps, d, sitting_instants](double u) {
    if (sitting_instants) u = smooth_step(u);
    Env env;
    env[Var::u] = u;
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = (*comps)[i].eval(env);
    return p;
  };
  return Path(chart, eval);
}

Path Path::constant(Chart chart, const Vec& point) {
  Vec p = point;
  return Path(chart, [p](double) { return p; });
}

Vec Path::velocity(double u) const {
  double h = tols().curve_fd_step;
  double c = clamp_fd(u, h);
  return Vec((eval_(c + h) - eval_(c - h)) / (2 * h));
}

Path Path::reparameterized() const {
  auto e = eval_;
  return Path(chart_, [e](double u) { return e(smooth_step(u)); });
}

Path Path::reversed() const {
  auto e = eval_;
  return Path(chart_, [e](double u) { return e(1.0 - u); });
}

Path Path::restrict(double a, double b) const {
  auto e = eval_;
  return Path(chart_, [e, a, b](double u) { return e(a + u * (b - a)); });
}

Path Path::concatenate(const Path& first, const Path& second) {
  if ((first.end() - second.start()).norm() > 1e-9)
    throw NonComposable("concatenate: endpoint mismatch");
  auto a = first.eval_, b = second.eval_;
  auto eval = [a, b](double u) {
    if (u <= 0.5) return a(smooth_step(2.0 * u));
    return b(smooth_step(2.0 * u - 1.0));
  };
  return Path(first.chart_, eval);
}

void Path::check_in_chart(int n) const {
  for (int i = 0; i <= n; ++i) {
    double u = double(i) / n;
    if (!chart_.contains(eval_(u), 1e-12))
      throw LoadError("path leaves its chart box at u=" + std::to_string(u));
  }
}

// ---- Bigon ------------------------------------------------------------------

Bigon::Bigon(Chart chart, Evaluator eval) : chart_(chart), eval_(std::move(eval)) {}

Bigon Bigon::from_exprs(Chart chart, std::vector<ScalarExpr> components) {
  if (int(components.size()) != chart.dim)
    throw LoadError("bigon needs one component per chart axis");
  auto comps = std::make_shared<std::vector<ScalarExpr>>(std::move(components));
  int d = chart.dim;
  auto eval = [comps, d](double s, double t) {
    Env env;
    env[Var::s] = s;
    env[Var::t] = t;
    Vec p(d);
    for (int i = 0; i < d; ++i) p[i] = (*comps)[i].eval(env);
    return p;
  };
  return Bigon(chart, eval);
}

Bigon Bigon::linear_interpolation(const Path& bottom, const Path& top) {
  auto a = bottom, b = top;
  auto eval = [a, b](double s, double t) {
    double w = smooth_step(s);
    return Vec((1.0 - w) * a(t) + w * b(t));
  };
  return Bigon(bottom.chart(), eval);
}

Vec Bigon::d_dt(double s, double t) const {
  double h = tols().curve_fd_step;
  double c = clamp_fd(t, h);
  return Vec((eval_(s, c + h) - eval_(s, c - h)) / (2 * h));
}

Vec Bigon::d_ds(double s, double t) const {
  double h = tols().curve_fd_step;
  double c = clamp_fd(s, h);
  return Vec((eval_(c + h, t) - eval_(c - h, t)) / (2 * h));
}

Path Bigon::source() const {
  auto e = eval_;
  return Path(chart_, [e](double t) { return e(0.0, t); });
}
Path Bigon::target() const {
  auto e = eval_;
  return Path(chart_, [e](double t) { return e(1.0, t); });
}
Path Bigon::left_edge() const {
  auto e = eval_;
  return Path(chart_, [e](double s) { return e(s, 0.0); });
}
Path Bigon::right_edge() const {
  auto e = eval_;
  return Path(chart_, [e](double s) { return e(s, 1.0); });
}

Bigon Bigon::reparameterized_t() const {
  auto e = eval_;
  return Bigon(chart_, [e](double s, double t) { return e(s, smooth_step(t)); });
}
Bigon Bigon::reparameterized_s() const {
  auto e = eval_;
  return Bigon(chart_, [e](double s, double t) { return e(smooth_step(s), t); });
}
Bigon Bigon::transposed() const {
  auto e = eval_;
  return Bigon(chart_, [e](double s, double t) { return e(t, s); });
}

Bigon Bigon::restrict_s(double a, double b) const {
  auto e = eval_;
  return Bigon(chart_, [e, a, b](double s, double t) { return e(a + s * (b - a), t); });
}

Bigon Bigon::restrict_t(double a, double b) const {
  auto e = eval_;
  return Bigon(chart_, [e, a, b](double s, double t) { return e(s, a + t * (b - a)); });
}

double Bigon::boundary_residual(int grid) const {
  Vec x = eval_(0.0, 0.0), y = eval_(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i <= grid; ++i) {
    double s = double(i) / grid;
    worst = std::max(worst, (eval_(s, 0.0) - x).norm());
    worst = std::max(worst, (eval_(s, 1.0) - y).norm());
  }
  return worst;
}

void Bigon::require_bigon(double tol) const {
  if (boundary_residual() > tol) throw NotABigon("bigon endpoints drift with s");
}

Bigon Bigon::vertical_compose(const Bigon& bottom, const Bigon& top) {
  auto a = bottom.eval_, b = top.eval_;
  auto eval = [a, b](double s, double t) {
    if (s <= 0.5) return a(smooth_step(2.0 * s), t);
    return b(smooth_step(2.0 * s - 1.0), t);
  };
  return Bigon(bottom.chart_, eval);
}

Bigon Bigon::horizontal_compose(const Bigon& first, const Bigon& second) {
  auto a = first.eval_, b = second.eval_;
  auto eval = [a, b](double s, double t) {
    if (t <= 0.5) return a(s, smooth_step(2.0 * t));
    return b(s, smooth_step(2.0 * t - 1.0));
  };
  return Bigon(first.chart_, eval);
}

// ---- form calculus ----------------------------------------------------------

AlgebraElement d_fd(const OneForm& form, const Vec& p, const Vec& X, const Vec& Y) {
  double h = tols().fd_step;
  if (!form.chart().interior(p, 2 * h))
    throw BoundaryProximity("d_fd: point too close to the chart boundary");
  Coef c = ((form(p + h * X, Y).coeffs - form(p - h * X, Y).coeffs) -
            (form(p + h * Y, X).coeffs - form(p - h * Y, X).coeffs)) /
           (2 * h);
  return AlgebraElement(form.algebra(), c);
}

AlgebraElement wedge_bracket(const OneForm& A, const OneForm& B, const Vec& p, const Vec& X,
                             const Vec& Y) {
  AlgebraElement ax = A(p, X), ay = A(p, Y), bx = B(p, X), by = B(p, Y);
  Coef c = bracket(ax, by).coeffs - bracket(ay, bx).coeffs;
  return AlgebraElement(A.algebra(), c);
}

AlgebraElement wedge_action(const CrossedModule& cm, const OneForm& A, const OneForm& phi,
                            const Vec& p, const Vec& X, const Vec& Y) {
  Coef c = cm.a1(A(p, X), phi(p, Y)).coeffs - cm.a1(A(p, Y), phi(p, X)).coeffs;
  return AlgebraElement(phi.algebra(), c);
}

AlgebraElement fake_curvature(const CrossedModule& cm, const OneForm& A, const TwoForm& B,
                              const Vec& p, const Vec& X, const Vec& Y) {
  AlgebraElement da = d_fd(A, p, X, Y);
  AlgebraElement half = bracket(A(p, X), A(p, Y));  // (1/2)[A^A](X,Y)
  AlgebraElement tb = cm.t_star(B(p, X, Y));
  return AlgebraElement(A.algebra(), Coef(da.coeffs + half.coeffs - tb.coeffs));
}

AlgebraElement curvature3(const CrossedModule& cm, const OneForm& A, const TwoForm& B,
                          const Vec& p, const Vec& X, const Vec& Y, const Vec& Z) {
  double h = tols().fd_step;
  if (!B.chart().interior(p, 2 * h))
    throw BoundaryProximity("curvature3: point too close to the chart boundary");
  // dB(X,Y,Z) = X[B(Y,Z)] - Y[B(X,Z)] + Z[B(X,Y)] on constant frames
  auto deriv = [&](const Vec& D, const Vec& U, const Vec& V) {
    return Coef((B(p + h * D, U, V).coeffs - B(p - h * D, U, V).coeffs) / (2 * h));
  };
  Coef db = deriv(X, Y, Z) - deriv(Y, X, Z) + deriv(Z, X, Y);
  Coef act = cm.a1(A(p, X), B(p, Y, Z)).coeffs - cm.a1(A(p, Y), B(p, X, Z)).coeffs +
             cm.a1(A(p, Z), B(p, X, Y)).coeffs;
  return AlgebraElement(B.algebra(), Coef(db + act));
}

OneForm pullback(const OneForm& form, const std::function<Vec(const Vec&)>& f, Chart new_chart) {
  auto base = form;
  return OneForm(new_chart, form.algebra(), [base, f](const Vec& p, const Vec& X) {
    double h = tols().fd_step;
    Vec df = Vec((f(p + h * X) - f(p - h * X)) / (2 * h));
    return base(f(p), df);
  });
}

TwoForm pullback(const TwoForm& form, const std::function<Vec(const Vec&)>& f, Chart new_chart) {
  auto base = form;
  return TwoForm(new_chart, form.algebra(), [base, f](const Vec& p, const Vec& X, const Vec& Y) {
    double h = tols().fd_step;
    Vec dfx = Vec((f(p + h * X) - f(p - h * X)) / (2 * h));
    Vec dfy = Vec((f(p + h * Y) - f(p - h * Y)) / (2 * h));
    return base(f(p), dfx, dfy);
  });
}

}  // namespace gerbe
