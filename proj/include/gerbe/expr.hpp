#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "gerbe/numerics.hpp"

namespace gerbe {

// Variable slots available to field expressions. Chart coordinates are
// x1..x3; u parameterizes paths, (s, t) parameterize bigons.
enum class Var : int { x1 = 0, x2 = 1, x3 = 2, u = 3, s = 4, t = 5 };
constexpr int kNumVars = 6;

struct Env {
  std::array<double, kNumVars> v{};
  double& operator[](Var w) { return v[int(w)]; }
  double operator[](Var w) const { return v[int(w)]; }
  void set_point(const Vec& p) {
    for (int i = 0; i < p.size(); ++i) v[i] = p[i];
  }
};

// Scalar expression over +,-,*,/,^ (right-assoc), unary -, sin, cos, exp,
// sqrt, pi, numeric literals and the variables above. Immutable after parse;
// evaluation runs on a flat postfix program.
class ScalarExpr {
 public:
  ScalarExpr();  // the zero literal

  static ScalarExpr parse(const std::string& text);
  static ScalarExpr constant(double value);

  double eval(const Env& env) const;
  std::string str() const;
  bool is_literal_zero() const;

  bool uses(Var v) const;

  struct Node;

 private:
  explicit ScalarExpr(std::shared_ptr<const Node> root);
  void compile();

  std::shared_ptr<const Node> root_;

  // Postfix program: op stream plus operand payloads.
  struct Op {
    enum Kind : unsigned char { PushConst, PushVar, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt } kind;
    double value;  // PushConst payload
    int var;       // PushVar payload
  };
  std::vector<Op> program_;
  int stack_need_ = 0;
};

}  // namespace gerbe
