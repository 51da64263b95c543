#include "gerbe/lie.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace gerbe {

namespace {

Eigen::MatrixXd stack_real(const Mat& m) {
  int n2 = int(m.rows() * m.cols());
  Eigen::MatrixXd out(2 * n2, 1);
  int k = 0;
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r, ++k) {
      out(k, 0) = m(r, c).real();
      out(n2 + k, 0) = m(r, c).imag();
    }
  return out;
}

constexpr double kNearZero = 1e-12;

}  // namespace

GroupDescriptor::GroupDescriptor(std::string name, int matrix_dim, std::vector<Mat> algebra_basis,
                                 std::function<double(const Mat&)> constraint_residual,
                                 std::function<Mat(const Mat&)> project)
    : name_(std::move(name)),
      matrix_dim_(matrix_dim),
      basis_(std::move(algebra_basis)),
      constraint_residual_(std::move(constraint_residual)),
      project_(std::move(project)) {
  int k = int(basis_.size());
  int n2 = matrix_dim_ * matrix_dim_;
  Eigen::MatrixXd cols(2 * n2, k);
  for (int j = 0; j < k; ++j) cols.col(j) = stack_real(basis_[j]).col(0);
  if (k > 0) {
    expand_pinv_ = (cols.transpose() * cols).ldlt().solve(cols.transpose());
  } else {
    expand_pinv_ = Eigen::MatrixXd::Zero(0, 2 * n2);
  }
}

Mat GroupDescriptor::reconstruct(const Coef& coeffs) const {
  Mat out = mat_zero(matrix_dim_);
  for (int j = 0; j < coeffs.size(); ++j) out += coeffs[j] * basis_[j];
  return out;
}

Coef GroupDescriptor::expand(const Mat& m, double* residual) const {
  Coef c(algebra_dim());
  if (algebra_dim() > 0) {
    Eigen::VectorXd sol = expand_pinv_ * stack_real(m);
    for (int j = 0; j < c.size(); ++j) c[j] = sol[j];
  }
  if (residual) *residual = frob(reconstruct(c) - m);
  return c;
}

Mat GroupDescriptor::exp_matrix(const Mat& X) const {
  if (closed_exp_) return closed_exp_(X);
  Eigen::MatrixXcd dense = X;
  Eigen::MatrixXcd e = dense.exp();
  return Mat(e);
}

Mat GroupDescriptor::log_matrix(const Mat& g) const {
  if (closed_log_) return closed_log_(g);
  Eigen::MatrixXcd dense = g;
  Eigen::MatrixXcd l = dense.log();
  return Mat(l);
}

void GroupDescriptor::set_closed_forms(std::function<Mat(const Mat&)> exp_fn,
                                       std::function<Mat(const Mat&)> log_fn) {
  closed_exp_ = std::move(exp_fn);
  closed_log_ = std::move(log_fn);
}

void GroupDescriptor::validate() const {
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      Mat br = basis_[i] * basis_[j] - basis_[j] * basis_[i];
      double res = 0;
      expand(br, &res);
      if (res > tols().basis_closure)
        throw Error("algebra basis of " + name_ + " is not bracket-closed");
    }
    if (constraint_residual(exp_matrix(basis_[i])) > tols().basis_closure * 10)
      throw Error("exp of a basis element of " + name_ + " leaves the group");
  }
}

namespace {

// ---- stock descriptors ----------------------------------------------------

const cplx I(0.0, 1.0);

Mat pauli(int k) {
  Mat m(2, 2);
  switch (k) {
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -I, I, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

Mat su2_basis(int k) { return Mat(-0.5 * I * pauli(k)); }

Mat so3_basis(int k) {
  Mat m = mat_zero(3);
  // generator of rotations about axis k: (L_k)_{ij} = -epsilon_{kij}
  int a = ((k + 1) % 3), b = ((k + 2) % 3);
  m(b, a) = 1.0;
  m(a, b) = -1.0;
  return m;
}

double residual_special_unitary(const Mat& g) {
  return frob(g.adjoint() * g - mat_identity(int(g.rows()))) +
         std::abs(g.determinant() - cplx(1.0));
}

double residual_special_orthogonal(const Mat& g) {
  double imag = 0.0;
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c) imag += std::abs(g(r, c).imag());
  return frob(g.transpose() * g - mat_identity(int(g.rows()))) +
         std::abs(g.determinant() - cplx(1.0)) + imag;
}

// Polar projection with the determinant renormalized to 1.
Mat project_special(const Mat& m, bool realify) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(m),
                                         Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::MatrixXcd u = svd.matrixU() * svd.matrixV().adjoint();
  cplx det = u.determinant();
  int n = int(m.rows());
  double phase = std::arg(det);
  u *= std::polar(1.0, -phase / n);
  if (realify) u = u.real().cast<cplx>();
  return Mat(u);
}

Mat su2_exp(const Mat& X) {
  // Entries: X(0,0) = -(i/2)c3, X(0,1) = -(i/2)(c1 - i c2).
  double c1 = -2.0 * X(0, 1).imag();
  double c2 = 2.0 * X(0, 1).real();
  double c3 = -2.0 * X(0, 0).imag();
  double th = std::sqrt(c1 * c1 + c2 * c2 + c3 * c3);
  if (th < kNearZero) return Mat(mat_identity(2) + X + 0.5 * X * X);
  // X = (th/2) N with N^2 = -I, so exp(X) = cos(th/2) I + sin(th/2) N.
  Mat N = Mat(X * (2.0 / th));
  return Mat(std::cos(th / 2) * mat_identity(2) + std::sin(th / 2) * N);
}

Mat su2_log(const Mat& g) {
  // g = cos(a) I + sin(a) N with N = (X normalized); principal branch.
  double ca = 0.5 * (g(0, 0) + g(1, 1)).real();
  ca = std::min(1.0, std::max(-1.0, ca));
  double a = std::acos(ca);
  Mat N = Mat(0.5 * (g - g.adjoint()));  // sin(a) N for unitary g
  double sa = std::sin(a);
  if (std::abs(sa) < kNearZero) return Mat(N);  // a ~ 0: N ~ X already
  return Mat(N * (a / sa));
}

Mat so3_exp(const Mat& X) {
  double c1 = X(2, 1).real(), c2 = X(0, 2).real(), c3 = X(1, 0).real();
  double th = std::sqrt(c1 * c1 + c2 * c2 + c3 * c3);
  if (th < kNearZero) return Mat(mat_identity(3) + X + 0.5 * X * X);
  Mat K = Mat(X / th);
  return Mat(mat_identity(3) + std::sin(th) * K + (1.0 - std::cos(th)) * K * K);
}

Mat so3_log(const Mat& g) {
  double tr = (g(0, 0) + g(1, 1) + g(2, 2)).real();
  double ca = std::min(1.0, std::max(-1.0, (tr - 1.0) / 2.0));
  double th = std::acos(ca);
  Mat A = Mat(0.5 * (g - g.transpose()));
  if (th < kNearZero) return A;
  double s = std::sin(th);
  if (std::abs(s) < kNearZero) throw OutOfBranch("so3 log at angle pi");
  return Mat(A * (th / s));
}

DescriptorPtr make_su2() {
  auto d = std::make_shared<GroupDescriptor>(
      "SU2", 2, std::vector<Mat>{su2_basis(1), su2_basis(2), su2_basis(3)},
      residual_special_unitary, [](const Mat& m) { return project_special(m, false); });
  d->set_closed_forms(su2_exp, su2_log);
  return d;
}

DescriptorPtr make_so3() {
  auto d = std::make_shared<GroupDescriptor>(
      "SO3", 3, std::vector<Mat>{so3_basis(0), so3_basis(1), so3_basis(2)},
      residual_special_orthogonal, [](const Mat& m) { return project_special(m, true); });
  d->set_closed_forms(so3_exp, so3_log);
  return d;
}

DescriptorPtr make_u1() {
  Mat b(1, 1);
  b(0, 0) = I;
  auto d = std::make_shared<GroupDescriptor>(
      "U1", 1, std::vector<Mat>{b},
      [](const Mat& g) { return std::abs(std::abs(g(0, 0)) - 1.0); },
      [](const Mat& g) {
        Mat out(1, 1);
        double a = std::abs(g(0, 0));
        out(0, 0) = a < kNearZero ? cplx(1.0) : g(0, 0) / a;
        return out;
      });
  d->set_closed_forms(
      [](const Mat& X) {
        Mat out(1, 1);
        out(0, 0) = std::polar(1.0, X(0, 0).imag());
        return out;
      },
      [](const Mat& g) {
        Mat out(1, 1);
        out(0, 0) = cplx(0.0, std::arg(g(0, 0)));
        return out;
      });
  return d;
}

DescriptorPtr make_trivial() {
  auto d = std::make_shared<GroupDescriptor>(
      "Trivial", 1, std::vector<Mat>{},
      [](const Mat& g) { return std::abs(g(0, 0) - cplx(1.0)); },
      [](const Mat&) { return mat_identity(1); });
  d->set_closed_forms([](const Mat&) { return mat_identity(1); },
                      [](const Mat&) { return mat_zero(1); });
  return d;
}

}  // namespace

DescriptorPtr GroupDescriptor::su2() {
  static DescriptorPtr d = make_su2();
  return d;
}
DescriptorPtr GroupDescriptor::so3() {
  static DescriptorPtr d = make_so3();
  return d;
}
DescriptorPtr GroupDescriptor::u1() {
  static DescriptorPtr d = make_u1();
  return d;
}
DescriptorPtr GroupDescriptor::trivial() {
  static DescriptorPtr d = make_trivial();
  return d;
}

// ---- operations ------------------------------------------------------------

GroupElement mul(const GroupElement& a, const GroupElement& b) {
  if (a.desc != b.desc) throw DescriptorMismatch("mul: descriptor mismatch");
  return GroupElement(a.desc, a.desc->project(a.matrix * b.matrix));
}

GroupElement inv(const GroupElement& g) {
  Eigen::FullPivLU<Eigen::MatrixXcd> lu{Eigen::MatrixXcd(g.matrix)};
  if (!lu.isInvertible()) throw Error("inv: singular matrix (corrupted element)");
  return GroupElement(g.desc, g.desc->project(Mat(lu.inverse())));
}

GroupElement exp_map(const AlgebraElement& X) {
  return GroupElement(X.desc, X.desc->exp_matrix(X.matrix()));
}

AlgebraElement log_map(const GroupElement& g) {
  if (frob(g.matrix - mat_identity(g.desc->dim())) >= 1.0)
    throw OutOfBranch("log_map: element too far from the identity");
  Mat l = g.desc->log_matrix(g.matrix);
  double res = 0;
  Coef c = g.desc->expand(l, &res);
  return AlgebraElement(g.desc, c);
}

AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& X) {
  Mat m = g.matrix * X.matrix() * g.matrix.inverse();
  double res = 0;
  Coef c = X.desc->expand(m, &res);
  if (res > tols().reexpansion * 10)
    throw Error("adjoint: conjugate does not re-expand in the basis");
  return AlgebraElement(X.desc, c);
}

AlgebraElement bracket(const AlgebraElement& X, const AlgebraElement& Y) {
  if (X.desc != Y.desc) throw DescriptorMismatch("bracket: descriptor mismatch");
  Mat m = X.matrix() * Y.matrix() - Y.matrix() * X.matrix();
  double res = 0;
  Coef c = X.desc->expand(m, &res);
  if (res > tols().reexpansion * 10) throw Error("bracket: result leaves the algebra span");
  return AlgebraElement(X.desc, c);
}

AlgebraElement left_log_derivative(const DescriptorPtr& desc,
                                   const std::function<Mat(double)>& curve, double u,
                                   LogDerivativeSide side) {
  double h = tols().curve_fd_step;
  double lo = u - h, hi = u + h;
  if (lo < 0.0) { lo = 0.0; hi = 2.0 * h; }
  if (hi > 1.0) { hi = 1.0; lo = 1.0 - 2.0 * h; }
  Mat dg = Mat((curve(hi) - curve(lo)) / (hi - lo));
  Mat g = curve(u);
  Mat v = side == LogDerivativeSide::left ? Mat(g.inverse() * dg) : Mat(dg * g.inverse());
  return AlgebraElement(desc, desc->expand(v));
}

double dist(const GroupElement& a, const GroupElement& b) { return frob(a.matrix - b.matrix); }

}  // namespace gerbe
