#include <doctest.h>

#include "mframe/jet.hpp"
#include "mframe/parse.hpp"
#include "mframe/vfield.hpp"

using namespace mf;

namespace {
Expr E(const char* s) { return parse_expr(s); }
const Expr x(base::x()), u(base::u()), p(base::p()), q(base::q()), r(base::r());

VectorField random_field(RationalSampler& s) {
  VectorField v;
  for (int k = 0; k <= 3; ++k) v.alpha += Expr(s.next()) * x.pow(k);
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; i + j <= 3; ++j) v.beta += Expr(s.next()) * x.pow(i) * u.pow(j);
  return v;
}
}  // namespace

TEST_CASE("prolongation examples") {
  const ProlongedField t = prolong({Expr(1L), Expr()});
  CHECK(t.gamma.is_zero());
  CHECK(t.tau.is_zero());
  CHECK(t.varsigma.is_zero());

  const ProlongedField s = prolong({x, Expr()});
  CHECK(s.gamma == -p);
  CHECK(s.tau == Expr(-2L) * q);
  CHECK(s.varsigma == Expr(-3L) * r);
  CHECK(check_determining(s).ok);

  const ProlongedField v = prolong({Expr(), u});
  CHECK(v.gamma == p);
  CHECK(v.tau == q);
  CHECK(v.varsigma == r);

  const ProlongedField w = prolong({x * x, Expr()});
  CHECK(w.gamma == E("-2*x*p"));
  CHECK(w.tau == E("-2*p - 4*x*q"));
  CHECK(w.varsigma == Expr(-6L) * q - Expr(6L) * x * r);
  const DeterminingCheck dc = check_determining(w);
  CHECK(dc.ok);
  for (const auto& res : dc.residuals) CHECK(res.is_zero());
}

TEST_CASE("a corrupted field fails in the tau slot") {
  ProlongedField w = prolong({x * x, Expr()});
  w.tau += Expr(1L);
  const DeterminingCheck dc = check_determining(w);
  CHECK_FALSE(dc.ok);
  CHECK(dc.residuals[0].is_zero());
  CHECK((dc.residuals[1] == Expr(1L) || dc.residuals[1] == Expr(-1L)));
  CHECK(dc.residuals[2].is_zero());
}

TEST_CASE("formal prolongation coefficients") {
  const ProlongedField g = symbolic_prolong_generic();
  CHECK(check_determining(g).ok);
  const Expr ax(alpha_symbol(1)), bu(beta_symbol(0, 1)), buu(beta_symbol(0, 2)), bx(beta_symbol(1, 0));
  CHECK(coefficients_in(g.gamma, base::p())[1] == bu - ax);
  CHECK(coefficients_in(g.gamma, base::p())[0] == bx);
  CHECK(coefficients_in(g.varsigma, base::r())[1] == bu - Expr(3L) * ax);
  const Expr pq = coefficients_in(coefficients_in(g.varsigma, base::p())[1], base::q())[1];
  CHECK(pq == Expr(3L) * buu);
  // The p coefficient involves beta_xxu, not beta_xuu.
  const Expr p1 = coefficients_in(coefficients_in(coefficients_in(g.varsigma, base::r())[0], base::q())[0],
                                  base::p())[1];
  CHECK(p1 == Expr(3L) * Expr(beta_symbol(2, 1)) - Expr(alpha_symbol(3)));
}

TEST_CASE("the printed determining system differs only in the logged coefficient") {
  const auto closed = determining_closed_forms({Expr(alpha_symbol(0)), Expr(beta_symbol(0, 0))});
  const auto shown = determining_display_forms();
  CHECK(shown[0] == closed[0]);
  CHECK(shown[1] == closed[1]);
  CHECK(shown[2] - closed[2] == Expr(3L) * p * (Expr(beta_symbol(1, 2)) - Expr(beta_symbol(2, 1))));
}

TEST_CASE("prolongation is linear") {
  RationalSampler s(3);
  for (int i = 0; i < 10; ++i) {
    const VectorField a = random_field(s), b = random_field(s);
    const Q c = s.next();
    const ProlongedField pa = prolong(a), pb = prolong(b);
    const ProlongedField sum = prolong({a.alpha + b.alpha, a.beta + b.beta});
    CHECK(sum.gamma == pa.gamma + pb.gamma);
    CHECK(sum.tau == pa.tau + pb.tau);
    CHECK(sum.varsigma == pa.varsigma + pb.varsigma);
    const ProlongedField sc = prolong({Expr(c) * a.alpha, Expr(c) * a.beta});
    CHECK(sc.varsigma == Expr(c) * pa.varsigma);
  }
}

TEST_CASE("the fiber-preserving class is closed under commutators") {
  RationalSampler s(9);
  for (int i = 0; i < 10; ++i) {
    const VectorField c = commutator(random_field(s), random_field(s));
    for (Sym sym : {base::u(), base::p(), base::q(), base::r()}) CHECK_FALSE(c.alpha.depends_on(sym));
    for (Sym sym : {base::p(), base::q(), base::r()}) CHECK_FALSE(c.beta.depends_on(sym));
  }
}
