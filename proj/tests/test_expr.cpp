#include <doctest.h>

#include "mframe/expr.hpp"
#include "mframe/parse.hpp"

using namespace mf;

namespace {
Expr E(const char* s) { return parse_expr(s); }
const Expr x(base::x()), u(base::u()), p(base::p()), q(base::q());
}  // namespace

TEST_CASE("canonical form cancels common factors") {
  CHECK((p - q) / (p - q) == Expr(1L));
  CHECK((x * x - Expr(1L)) / (x - Expr(1L)) == x + Expr(1L));
  CHECK((x * u + x) / (u * x * x + x * x) == Expr(1L) / x);
  CHECK(E("(x^2 - u^2)/(x + u)") == x - u);
}

TEST_CASE("arithmetic identities") {
  const Expr a = E("x^2*u + 3/4*p"), b = E("q - 1/x");
  CHECK(a + b - b == a);
  CHECK((a * b) / b == a);
  CHECK((a + b) * (a - b) == a * a - b * b);
  CHECK(a.pow(3) == a * a * a);
  CHECK(a.pow(-2) * a * a == Expr(1L));
  CHECK(Expr(Q(1, 3)) + Expr(Q(2, 3)) == Expr(1L));
}

TEST_CASE("canonical form is unique") {
  CHECK(E("1/(x - 1) - 1/(x + 1)") == E("2/(x^2 - 1)"));
  CHECK(E("(2*x)/(4*u)") == E("x/(2*u)"));
  CHECK(E("x/(-u)") == E("-x/u"));
}

TEST_CASE("division by zero is an error") {
  CHECK_THROWS_AS(x / Expr(), DivisionByZero);
  CHECK_THROWS_AS(Expr().inverse(), DivisionByZero);
  CHECK_THROWS_AS(evaluate(Expr(1L) / x, {{base::x(), Q(0)}}), DivisionByZero);
}

TEST_CASE("differentiation and evaluation") {
  const Expr F = E("p*q/x");
  const Expr Fxq = differentiate(differentiate(F, base::x()), base::q());
  CHECK(Fxq == E("-p/x^2"));
  CHECK(evaluate(Fxq, {{base::x(), Q(2)}, {base::p(), Q(3)}}) == Q(-3, 4));
  CHECK(differentiate(E("1/(x^2 + u)"), base::u()) == E("-1/(x^2 + u)^2"));
}

TEST_CASE("substitution is simultaneous") {
  const Expr e = x + Expr(2L) * u;
  CHECK(substitute(e, {{base::x(), u}, {base::u(), x}}) == u + Expr(2L) * x);
  CHECK_THROWS_AS(substitute(Expr(1L) / (x - u), {{base::x(), u}}), DivisionByZero);
}

TEST_CASE("term cap guards expression growth") {
  TermCapGuard guard(3);
  CHECK_THROWS_AS((x + u + p + q).pow(3), ExprSizeError);
}

TEST_CASE("coefficients in one symbol") {
  const auto c = coefficients_in(E("3*q^2 + x*q - 1"), base::q());
  REQUIRE(c.size() == 3);
  CHECK(c[0] == Expr(-1L));
  CHECK(c[1] == x);
  CHECK(c[2] == Expr(3L));
}
