#include "fsub/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace finsub {

enum class Op { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow, kFn };
enum class Fn { kSin, kCos, kSqrt, kExp, kLog };

struct Expr::Node {
  Op op;
  double constant = 0.0;
  int var = -1;
  Fn fn = Fn::kSin;
  std::shared_ptr<const Node> a, b;
};

namespace {

struct Parser {
  const std::string& text;
  size_t pos = 0;
  int nvars;

  using NodePtr = std::shared_ptr<const Expr::Node>;

  void skip() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip();
    return pos < text.size() ? text[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ExprError(what + " at position " + std::to_string(pos) + " in '" +
                    text + "'");
  }

  NodePtr make(Expr::Node n) {
    return std::make_shared<const Expr::Node>(std::move(n));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = make({Op::kAdd, 0, -1, Fn::kSin, lhs, term()});
      } else if (eat('-')) {
        lhs = make({Op::kSub, 0, -1, Fn::kSin, lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = make({Op::kMul, 0, -1, Fn::kSin, lhs, unary()});
      } else if (eat('/')) {
        lhs = make({Op::kDiv, 0, -1, Fn::kSin, lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (eat('-')) return make({Op::kNeg, 0, -1, Fn::kSin, unary(), nullptr});
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (eat('^'))
      return make({Op::kPow, 0, -1, Fn::kSin, base, unary()});
    return base;
  }

  NodePtr atom() {
    skip();
    if (eat('(')) {
      NodePtr e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end;
      double v = std::stod(text.substr(pos), &end);
      pos += end;
      return make({Op::kConst, v, -1, Fn::kSin, nullptr, nullptr});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) ||
              text[pos] == '_'))
        ++pos;
      std::string name = text.substr(start, pos - start);
      if (name == "pi")
        return make({Op::kConst, M_PI, -1, Fn::kSin, nullptr, nullptr});
      if (name.size() >= 2 && name[0] == 'x') {
        int idx = 0;
        try {
          idx = std::stoi(name.substr(1));
        } catch (...) {
          fail("unknown identifier '" + name + "'");
        }
        if (idx < 1 || idx > nvars)
          fail("variable '" + name + "' out of range (1.." +
               std::to_string(nvars) + ")");
        return make({Op::kVar, 0, idx - 1, Fn::kSin, nullptr, nullptr});
      }
      Fn fn;
      if (name == "sin") fn = Fn::kSin;
      else if (name == "cos") fn = Fn::kCos;
      else if (name == "sqrt") fn = Fn::kSqrt;
      else if (name == "exp") fn = Fn::kExp;
      else if (name == "log") fn = Fn::kLog;
      else fail("unknown function '" + name + "'");
      if (!eat('(')) fail("expected '(' after function name");
      NodePtr arg = expr();
      if (!eat(')')) fail("missing ')'");
      return make({Op::kFn, 0, -1, fn, arg, nullptr});
    }
    fail("unexpected character");
  }
};

Jet eval_node(const Expr::Node& n, const JetVec& x);

Jet eval_fn(Fn f, const Jet& a) {
  switch (f) {
    case Fn::kSin: return sin(a);
    case Fn::kCos: return cos(a);
    case Fn::kSqrt: return sqrt(a);
    case Fn::kExp: return exp(a);
    case Fn::kLog: return log(a);
  }
  throw ExprError("unreachable function kind");
}

Jet eval_node(const Expr::Node& n, const JetVec& x) {
  switch (n.op) {
    case Op::kConst: {
      return Jet::constant(x[0].nvars(), x[0].order(), n.constant);
    }
    case Op::kVar:
      return x[n.var];
    case Op::kAdd:
      return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Op::kSub:
      return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Op::kMul:
      return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Op::kDiv:
      return eval_node(*n.a, x) / eval_node(*n.b, x);
    case Op::kNeg:
      return -eval_node(*n.a, x);
    case Op::kPow: {
      Jet base = eval_node(*n.a, x);
      Jet ex = eval_node(*n.b, x);
      bool constant_exp = true;
      for (size_t i = 1; i < ex.coeffs().size(); ++i)
        if (ex.coeffs()[i] != 0.0) constant_exp = false;
      if (!constant_exp)
        throw ExprError("exponent must be a constant expression");
      double p = ex.value();
      if (p == std::round(p) && std::abs(p) < 64)
        return pow(base, static_cast<int>(std::round(p)));
      return pow(base, p);
    }
    case Op::kFn:
      return eval_fn(n.fn, eval_node(*n.a, x));
  }
  throw ExprError("unreachable node kind");
}

}  // namespace

Expr Expr::parse(const std::string& text, int nvars) {
  Parser p{text, 0, nvars};
  Expr e;
  e.root_ = p.expr();
  e.nvars_ = nvars;
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return e;
}

Jet Expr::eval(const JetVec& x) const {
  if (static_cast<int>(x.size()) != nvars_)
    throw ExprError("wrong number of variables in evaluation");
  return eval_node(*root_, x);
}

double Expr::value(std::span<const double> x) const {
  JetVec xj;
  for (double xi : x) xj.push_back(Jet(xi));
  return eval(xj).value();
}

}  // namespace finsub
