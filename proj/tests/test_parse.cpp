#include <doctest.h>

#include <sstream>

#include "mframe/jet.hpp"
#include "mframe/parse.hpp"

using namespace mf;

namespace {
const Expr x(base::x()), u(base::u()), p(base::p()), q(base::q());

std::size_t error_offset(const char* text) {
  try {
    parse_expr(text);
  } catch (const ParseError& e) {
    return e.offset;
  }
  FAIL("no parse error for " << text);
  return 0;
}

// Random canonical expression over x, u, p, q with small rational coefficients.
Expr random_expr(RationalSampler& s) {
  const Expr vars[4] = {x, u, p, q};
  auto poly = [&](int terms) {
    Expr e;
    for (int t = 0; t < terms; ++t) {
      Expr m(s.next());
      for (int k = 0; k < 4; ++k) m *= vars[k].pow(static_cast<int>(s.integer(0, 2)));
      e += m;
    }
    return e;
  };
  Expr num = poly(static_cast<int>(s.integer(1, 4)));
  if (s.integer(0, 1) == 0) return num;
  Expr den = poly(static_cast<int>(s.integer(1, 3)));
  if (den.is_zero()) return num;
  return num / den;
}
}  // namespace

TEST_CASE("grammar examples") {
  CHECK(parse_expr("q^2 + p*u") == q * q + p * u);
  CHECK(parse_expr("y2^2") == q * q);
  CHECK(parse_expr("y1 + y") == p + u);
  CHECK(parse_expr("(p - q)/(p - q)") == Expr(1L));
}

TEST_CASE("precedence and associativity") {
  CHECK(parse_expr("-x^2") == -(x * x));
  CHECK(parse_expr("2^3^2") == Expr(512L));
  CHECK(parse_expr("8/4/2") == Expr(1L));
  CHECK(parse_expr("1 - 2 - 3") == Expr(-4L));
  CHECK(parse_expr("2*x^-1") == Expr(2L) / x);
  CHECK(parse_expr("3/4*p") == Expr(Q(3, 4)) * p);
  CHECK(parse_expr("(x + u)^2") == x * x + Expr(2L) * x * u + u * u);
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK(error_offset("x y") == 2);
  CHECK(error_offset("2x") == 1);
  CHECK(error_offset("x + ") == 4);
  CHECK(error_offset("sin(x)") == 0);
  CHECK(error_offset("x + z") == 4);
  CHECK(error_offset("x^(1/2)") == 2);
  CHECK(error_offset("1.5*x") == 0);
  CHECK_THROWS_AS(parse_expr("(x + u"), ParseError);
  CHECK_THROWS_AS(parse_expr("r"), ParseError);
}

TEST_CASE("corpus parsing") {
  auto one = parse_corpus_text("flat: 0");
  REQUIRE(one.size() == 1);
  CHECK(one[0].name == "flat");
  CHECK(one[0].rhs.is_zero());

  auto w = parse_corpus_text("# comment\n\nw: q^2");
  REQUIRE(w.size() == 1);
  CHECK(w[0].name == "w");
  CHECK(w[0].rhs == q * q);

  auto crlf = parse_corpus_text("a: p\r\nb: q # trailing\r\n");
  REQUIRE(crlf.size() == 2);
  CHECK(crlf[1].rhs == q);

  CHECK(parse_corpus_text("").empty());
}

TEST_CASE("corpus errors are aggregated with line numbers") {
  try {
    parse_corpus_text("a: p\na: q\nb: x +\nc p\n");
    FAIL("expected a corpus error");
  } catch (const CorpusError& e) {
    REQUIRE(e.errors.size() == 3);
    CHECK(e.errors[0].line == 2);
    CHECK(e.errors[0].message.find("duplicate") != std::string::npos);
    CHECK(e.errors[1].line == 3);
    CHECK(e.errors[2].line == 4);
  }
}

TEST_CASE("renderers") {
  CHECK(render_text(q * q) == "q^2");
  CHECK(parse_expr(render_text(q * q)) == q * q);
  const Expr half_p = Expr(Q(1, 2)) * p;
  CHECK(parse_expr(render_latex(half_p)) == half_p);
  CHECK(render(Expr(), Format::machine) == R"({"num":[],"den":[["1",{}]]})");
  CHECK(render(half_p, Format::machine) == render(half_p, Format::machine));
}

TEST_CASE("text and latex round-trip on 1000 random expressions") {
  RationalSampler s(11);
  for (int i = 0; i < 1000; ++i) {
    const Expr e = random_expr(s);
    REQUIRE(parse_expr(render_text(e)) == e);
    REQUIRE(parse_expr(render_latex(e)) == e);
  }
}
