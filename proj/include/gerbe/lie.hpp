#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gerbe/numerics.hpp"

namespace gerbe {

// A matrix Lie group together with a real basis of its Lie algebra, a
// constraint residual that vanishes on the group, and a projection retraction
// that returns integrator drift to the group. Closed-form exp/log shortcuts
// are installed for the stock groups; anything else falls back to dense
// Pade/inverse-scaling routines.
class GroupDescriptor {
 public:
  GroupDescriptor(std::string name, int matrix_dim, std::vector<Mat> algebra_basis,
                  std::function<double(const Mat&)> constraint_residual,
                  std::function<Mat(const Mat&)> project);

  const std::string& name() const { return name_; }
  int dim() const { return matrix_dim_; }
  int algebra_dim() const { return int(basis_.size()); }
  const std::vector<Mat>& basis() const { return basis_; }

  double constraint_residual(const Mat& m) const { return constraint_residual_(m); }
  Mat project(const Mat& m) const { return project_(m); }

  Mat reconstruct(const Coef& coeffs) const;
  // Least-squares expansion of m over the basis; *residual (if given) receives
  // the Frobenius distance between m and the reconstruction.
  Coef expand(const Mat& m, double* residual = nullptr) const;

  Mat exp_matrix(const Mat& X) const;
  Mat log_matrix(const Mat& g) const;

  void set_closed_forms(std::function<Mat(const Mat&)> exp_fn,
                        std::function<Mat(const Mat&)> log_fn);

  // Checks the TYPE invariants: basis independence and bracket closure, and
  // exp of basis elements staying on the group.
  void validate() const;

  // Stock descriptors (shared, immutable).
  static std::shared_ptr<const GroupDescriptor> su2();
  static std::shared_ptr<const GroupDescriptor> so3();
  static std::shared_ptr<const GroupDescriptor> u1();
  static std::shared_ptr<const GroupDescriptor> trivial();

 private:
  std::string name_;
  int matrix_dim_;
  std::vector<Mat> basis_;
  std::function<double(const Mat&)> constraint_residual_;
  std::function<Mat(const Mat&)> project_;
  std::function<Mat(const Mat&)> closed_exp_;
  std::function<Mat(const Mat&)> closed_log_;
  // Pseudo-inverse of the (2*dim^2) x algebra_dim real matrix stacking
  // [Re(vec(basis_k)); Im(vec(basis_k))] column-wise.
  Eigen::MatrixXd expand_pinv_;
};

using DescriptorPtr = std::shared_ptr<const GroupDescriptor>;

struct GroupElement {
  DescriptorPtr desc;
  Mat matrix;

  GroupElement() = default;
  GroupElement(DescriptorPtr d, Mat m) : desc(std::move(d)), matrix(std::move(m)) {}
  static GroupElement identity(const DescriptorPtr& d) {
    return GroupElement(d, mat_identity(d->dim()));
  }
  double constraint_residual() const { return desc->constraint_residual(matrix); }
};

struct AlgebraElement {
  DescriptorPtr desc;
  Coef coeffs;

  AlgebraElement() = default;
  AlgebraElement(DescriptorPtr d, Coef c) : desc(std::move(d)), coeffs(std::move(c)) {}
  static AlgebraElement zero(const DescriptorPtr& d) {
    return AlgebraElement(d, Coef::Zero(d->algebra_dim()));
  }
  Mat matrix() const { return desc->reconstruct(coeffs); }
  double norm() const { return coeffs.norm(); }
};

GroupElement mul(const GroupElement& a, const GroupElement& b);
GroupElement inv(const GroupElement& g);
GroupElement exp_map(const AlgebraElement& X);
AlgebraElement log_map(const GroupElement& g);  // principal branch; throws OutOfBranch
AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& X);
AlgebraElement bracket(const AlgebraElement& X, const AlgebraElement& Y);

// Left (g^{-1} g') and right (g' g^{-1}) logarithmic derivatives of a sampled
// group-valued curve on [0, 1], by central differences in the parameter.
enum class LogDerivativeSide { left, right };
AlgebraElement left_log_derivative(const DescriptorPtr& desc,
                                   const std::function<Mat(double)>& curve, double u,
                                   LogDerivativeSide side = LogDerivativeSide::left);

double dist(const GroupElement& a, const GroupElement& b);

}  // namespace gerbe
