#pragma once

// Small recursive-descent expression parser for coefficient fields in custom
// fixture files.  Expressions are functions of the chart coordinates
// x1..xn, evaluated on jets.
//
// Grammar (loosest binding first):
//   expr   := term  (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ['^' unary]                 (right associative)
//   atom   := number | 'pi' | 'x'<k> | fn '(' expr ')' | '(' expr ')'
//   fn     := sin | cos | sqrt | exp | log
// so '^' binds tighter than unary minus, which binds tighter than '*'/'/'.

#include <memory>
#include <string>

#include "fsub/jets.hpp"

namespace finsub {

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Expr {
 public:
  // Parses `text` with variables x1..x`nvars`.
  static Expr parse(const std::string& text, int nvars);

  Jet eval(const JetVec& x) const;
  double value(std::span<const double> x) const;

  struct Node;  // AST node, defined in the implementation

 private:
  std::shared_ptr<const Node> root_;
  int nvars_ = 0;
};

}  // namespace finsub
