#include "gerbe/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace gerbe {

struct ScalarExpr::Node {
  enum Kind { Lit, Variable, Unary, Binary, Call } kind;
  double value = 0.0;              // Lit
  Var var = Var::x1;               // Variable
  char op = 0;                     // Unary ('-') / Binary ('+','-','*','/','^')
  std::string func;                // Call
  std::shared_ptr<const Node> a, b;
};

namespace {

using Node = ScalarExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make_lit(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Lit;
  n->value = v;
  return n;
}

struct Token {
  enum Kind { Num, Ident, Op, LParen, RParen, End } kind;
  double num = 0.0;
  std::string text;
  char op = 0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) {}

  Token next() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    Token t;
    t.offset = pos_;
    if (pos_ >= s_.size()) {
      t.kind = Token::End;
      return t;
    }
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      try {
        t.num = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        throw ParseError("malformed number", pos_);
      }
      pos_ += used;
      t.kind = Token::Num;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      t.kind = Token::Ident;
      t.text = s_.substr(start, pos_ - start);
      return t;
    }
    if (c == '(') {
      ++pos_;
      t.kind = Token::LParen;
      return t;
    }
    if (c == ')') {
      ++pos_;
      t.kind = Token::RParen;
      return t;
    }
    if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      ++pos_;
      t.kind = Token::Op;
      t.op = c;
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) { advance(); }

  NodePtr parse() {
    NodePtr e = parse_sum();
    if (cur_.kind != Token::End) throw ParseError("trailing input", cur_.offset);
    return e;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    while (cur_.kind == Token::Op && (cur_.op == '+' || cur_.op == '-')) {
      char op = cur_.op;
      advance();
      NodePtr rhs = parse_product();
      lhs = binary(op, lhs, rhs);
    }
    return lhs;
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    while (cur_.kind == Token::Op && (cur_.op == '*' || cur_.op == '/')) {
      char op = cur_.op;
      advance();
      NodePtr rhs = parse_unary();
      lhs = binary(op, lhs, rhs);
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (cur_.kind == Token::Op && cur_.op == '-') {
      advance();
      NodePtr inner = parse_unary();
      auto n = std::make_shared<Node>();
      n->kind = Node::Unary;
      n->op = '-';
      n->a = inner;
      return n;
    }
    if (cur_.kind == Token::Op && cur_.op == '+') {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  // '^' binds tighter than unary minus and associates to the right.
  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (cur_.kind == Token::Op && cur_.op == '^') {
      advance();
      NodePtr expo = (cur_.kind == Token::Op && cur_.op == '-') ? parse_unary() : parse_power();
      return binary('^', base, expo);
    }
    return base;
  }

  NodePtr parse_atom() {
    if (cur_.kind == Token::Num) {
      NodePtr n = make_lit(cur_.num);
      advance();
      return n;
    }
    if (cur_.kind == Token::LParen) {
      advance();
      NodePtr e = parse_sum();
      if (cur_.kind != Token::RParen) throw ParseError("expected ')'", cur_.offset);
      advance();
      return e;
    }
    if (cur_.kind == Token::Ident) {
      std::string name = cur_.text;
      std::size_t off = cur_.offset;
      advance();
      if (name == "pi") return make_lit(M_PI);
      if (name == "sin" || name == "cos" || name == "exp" || name == "sqrt") {
        if (cur_.kind != Token::LParen) throw ParseError("expected '(' after " + name, cur_.offset);
        advance();
        NodePtr arg = parse_sum();
        if (cur_.kind != Token::RParen) throw ParseError("expected ')'", cur_.offset);
        advance();
        auto n = std::make_shared<Node>();
        n->kind = Node::Call;
        n->func = name;
        n->a = arg;
        return n;
      }
      Var v;
      if (name == "x1") v = Var::x1;
      else if (name == "x2") v = Var::x2;
      else if (name == "x3") v = Var::x3;
      else if (name == "u") v = Var::u;
      else if (name == "s") v = Var::s;
      else if (name == "t") v = Var::t;
      else throw ParseError("unknown identifier '" + name + "'", off);
      auto n = std::make_shared<Node>();
      n->kind = Node::Variable;
      n->var = v;
      return n;
    }
    throw ParseError("expected expression", cur_.offset);
  }

  static NodePtr binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Binary;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  Lexer lex_;
  Token cur_;
};

void print_node(const Node& n, std::ostream& os) {
  switch (n.kind) {
    case Node::Lit: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.value;
      os << tmp.str();
      break;
    }
    case Node::Variable: {
      static const char* names[kNumVars] = {"x1", "x2", "x3", "u", "s", "t"};
      os << names[int(n.var)];
      break;
    }
    case Node::Unary:
      os << "(-";
      print_node(*n.a, os);
      os << ")";
      break;
    case Node::Binary:
      os << "(";
      print_node(*n.a, os);
      os << " " << n.op << " ";
      print_node(*n.b, os);
      os << ")";
      break;
    case Node::Call:
      os << n.func << "(";
      print_node(*n.a, os);
      os << ")";
      break;
  }
}

bool node_uses(const Node& n, Var v) {
  switch (n.kind) {
    case Node::Lit: return false;
    case Node::Variable: return n.var == v;
    case Node::Unary:
    case Node::Call: return node_uses(*n.a, v);
    case Node::Binary: return node_uses(*n.a, v) || node_uses(*n.b, v);
  }
  return false;
}

}  // namespace

ScalarExpr::ScalarExpr() : root_(make_lit(0.0)) { compile(); }

ScalarExpr::ScalarExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) { compile(); }

ScalarExpr ScalarExpr::parse(const std::string& text) {
  Parser p(text);
  return ScalarExpr(p.parse());
}

ScalarExpr ScalarExpr::constant(double value) { return ScalarExpr(make_lit(value)); }

void ScalarExpr::compile() {
  program_.clear();
  int depth = 0, peak = 0;
  auto push = [&](Op op) {
    switch (op.kind) {
      case Op::PushConst:
      case Op::PushVar: ++depth; break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow: --depth; break;
      default: break;  // unary ops keep depth
    }
    peak = std::max(peak, depth);
    program_.push_back(op);
  };
  std::function<void(const Node&)> emit = [&](const Node& n) {
    switch (n.kind) {
      case Node::Lit: push({Op::PushConst, n.value, 0}); break;
      case Node::Variable: push({Op::PushVar, 0.0, int(n.var)}); break;
      case Node::Unary:
        emit(*n.a);
        push({Op::Neg, 0.0, 0});
        break;
      case Node::Binary:
        emit(*n.a);
        emit(*n.b);
        switch (n.op) {
          case '+': push({Op::Add, 0.0, 0}); break;
          case '-': push({Op::Sub, 0.0, 0}); break;
          case '*': push({Op::Mul, 0.0, 0}); break;
          case '/': push({Op::Div, 0.0, 0}); break;
          case '^': push({Op::Pow, 0.0, 0}); break;
        }
        break;
      case Node::Call:
        emit(*n.a);
        if (n.func == "sin") push({Op::Sin, 0.0, 0});
        else if (n.func == "cos") push({Op::Cos, 0.0, 0});
        else if (n.func == "exp") push({Op::Exp, 0.0, 0});
        else push({Op::Sqrt, 0.0, 0});
        break;
    }
  };
  emit(*root_);
  stack_need_ = peak;
  if (stack_need_ > 32) throw ParseError("expression nests too deeply", 0);
}

double ScalarExpr::eval(const Env& env) const {
  double stack[32];
  int top = -1;
  for (const Op& op : program_) {
    switch (op.kind) {
      case Op::PushConst: stack[++top] = op.value; break;
      case Op::PushVar: stack[++top] = env.v[op.var]; break;
      case Op::Add: --top; stack[top] += stack[top + 1]; break;
      case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
      case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
      case Op::Div: --top; stack[top] /= stack[top + 1]; break;
      case Op::Pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Sin: stack[top] = std::sin(stack[top]); break;
      case Op::Cos: stack[top] = std::cos(stack[top]); break;
      case Op::Exp: stack[top] = std::exp(stack[top]); break;
      case Op::Sqrt: stack[top] = std::sqrt(stack[top]); break;
    }
  }
  return stack[0];
}

std::string ScalarExpr::str() const {
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

bool ScalarExpr::is_literal_zero() const {
  return root_->kind == Node::Lit && root_->value == 0.0;
}

bool ScalarExpr::uses(Var v) const { return node_uses(*root_, v); }

}  // namespace gerbe
