#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsub/expr.hpp"

using namespace finsub;

namespace {
double at(const Expr& e, std::initializer_list<double> xs) {
  std::vector<double> v(xs);
  return e.value(v);
}
}  // namespace

TEST_CASE("precedence and associativity") {
  Expr e1 = Expr::parse("2 + 3 * 4 ^ 2", 1);
  CHECK(at(e1, {0.0}) == doctest::Approx(50.0));
  // unary minus binds looser than the power
  Expr e2 = Expr::parse("-2^2", 1);
  CHECK(at(e2, {0.0}) == doctest::Approx(-4.0));
  // right-associative power
  Expr e3 = Expr::parse("2^3^2", 1);
  CHECK(at(e3, {0.0}) == doctest::Approx(512.0));
  Expr e4 = Expr::parse("(2 + 3) * 4 - 6 / 3", 1);
  CHECK(at(e4, {0.0}) == doctest::Approx(18.0));
  Expr e5 = Expr::parse("2 - 3 - 4", 1);
  CHECK(at(e5, {0.0}) == doctest::Approx(-5.0));
}

TEST_CASE("variables, constants and functions") {
  Expr e = Expr::parse("sin(x1) * x2^2 + pi", 2);
  CHECK(at(e, {0.5, 3.0}) ==
        doctest::Approx(std::sin(0.5) * 9.0 + M_PI).epsilon(1e-15));
  Expr f = Expr::parse("sqrt(x1 + exp(x2)) - log(x1)", 2);
  CHECK(at(f, {2.0, 0.3}) ==
        doctest::Approx(std::sqrt(2.0 + std::exp(0.3)) - std::log(2.0))
            .epsilon(1e-15));
}

TEST_CASE("expressions evaluate exactly on jets") {
  Expr e = Expr::parse("x1^2 * cos(x2)", 2);
  JetVec x;
  x.push_back(Jet::variable(2, 3, 0, 1.3));
  x.push_back(Jet::variable(2, 3, 1, -0.4));
  Jet j = e.eval(x);
  CHECK(j.value() == doctest::Approx(1.3 * 1.3 * std::cos(-0.4)).epsilon(1e-15));
  std::vector<int> d10{1, 0}, d01{0, 1};
  CHECK(j.partial(d10) ==
        doctest::Approx(2 * 1.3 * std::cos(-0.4)).epsilon(1e-14));
  CHECK(j.partial(d01) ==
        doctest::Approx(-1.3 * 1.3 * std::sin(-0.4)).epsilon(1e-14));
}

TEST_CASE("parse errors are reported with positions") {
  CHECK_THROWS_AS(Expr::parse("2 +", 1), ExprError);
  CHECK_THROWS_AS(Expr::parse("sin 3", 1), ExprError);
  CHECK_THROWS_AS(Expr::parse("(1 + 2", 1), ExprError);
  CHECK_THROWS_AS(Expr::parse("x3", 2), ExprError);
  CHECK_THROWS_AS(Expr::parse("foo(1)", 1), ExprError);
  CHECK_THROWS_AS(Expr::parse("1 2", 1), ExprError);
  // jets in the exponent are rejected
  Expr e = Expr::parse("2^x1", 1);
  JetVec x{Jet::variable(1, 2, 0, 1.0)};
  CHECK_THROWS_AS(e.eval(x), ExprError);
}
