#include <doctest.h>

#include "mframe/jet.hpp"
#include "mframe/parse.hpp"

using namespace mf;

namespace {
Expr E(const char* s) { return parse_expr(s); }
const Expr x(base::x()), u(base::u()), p(base::p()), q(base::q());
}  // namespace

TEST_CASE("build_fjet examples") {
  const FJet zero = build_fjet(Expr(), 3);
  for (const auto& [s, e] : zero.partials) CHECK(e.is_zero());
  CHECK(zero.partials.size() == multi_indices(3).size());

  const FJet sq = build_fjet(q * q, 1);
  CHECK(sq.at({0, 0, 0, 1}) == Expr(2L) * q);
  CHECK(sq.at({1, 0, 0, 0}).is_zero());
  CHECK(sq.at({0, 1, 0, 0}).is_zero());
  CHECK(sq.at({0, 0, 1, 0}).is_zero());

  const FJet r = build_fjet(E("p*q/x"), 2);
  CHECK(r.at({1, 0, 0, 1}) == E("-p/x^2"));
  CHECK(evaluate(r.at({1, 0, 0, 1}), {{base::x(), Q(2)}, {base::p(), Q(3)}}) == Q(-3, 4));
}

TEST_CASE("cross partials are consistent") {
  const FJet f = build_fjet(E("u^2*q/(x + p) + x*p^3"), 3);
  const Sym axes[4] = {base::x(), base::u(), base::p(), base::q()};
  for (const auto& s : multi_indices(2))
    for (int a = 0; a < 4; ++a) CHECK(f.at(shifted(s, a)) == differentiate(f.at(s), axes[a]));
}

TEST_CASE("total derivative on the equation manifold") {
  const FJet formal = FJet::formal(3);
  CHECK(total_derivative_on_equation(u, formal) == p);
  CHECK(total_derivative_on_equation(p * q, formal) == q * q + p * Expr(fjet_symbol({0, 0, 0, 0})));

  const FJet sq = build_fjet(q * q, 3);
  const Expr dq = total_derivative_on_equation(q, sq);
  CHECK(dq == q * q);
  const Expr ddq = total_derivative_on_equation(dq, sq);
  CHECK(ddq == Expr(2L) * q.pow(3));
  CHECK(evaluate(ddq, {{base::q(), Q(1)}}) == Q(2));
}

TEST_CASE("formal F-jet symbols advance by the chain rule") {
  const FJet formal = FJet::formal(3);
  const Expr F(fjet_symbol({0, 0, 0, 0}));
  const Expr got = total_derivative_on_equation(Expr(fjet_symbol({0, 0, 0, 1})), formal);
  const Expr want = Expr(fjet_symbol({1, 0, 0, 1})) + p * Expr(fjet_symbol({0, 1, 0, 1})) +
                    q * Expr(fjet_symbol({0, 0, 1, 1})) + F * Expr(fjet_symbol({0, 0, 0, 2}));
  CHECK(got == want);
}

TEST_CASE("total derivative matches differentiation along cubic solutions of the flat equation") {
  const FJet flat = build_fjet(Expr(), 3);
  RationalSampler s(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Q a = s.next(), b = s.next(), c = s.next();
    const Expr sol = Expr(a) + Expr(b) * x + Expr(c) * x * x / Expr(2L);
    const Bindings along{{base::u(), sol}, {base::p(), differentiate(sol, base::x())},
                         {base::q(), differentiate(differentiate(sol, base::x()), base::x())}};
    const Expr e = Expr(s.next()) * x * u * u + Expr(s.next()) * p * q + Expr(s.next()) * q * q * u;
    const Q x0 = s.next();
    const Q curve = evaluate(differentiate(substitute(e, along), base::x()), {{base::x(), x0}});
    Point pt{{base::x(), x0}};
    for (const auto& [sym, val] : along) pt[sym] = evaluate(val, {{base::x(), x0}});
    CHECK(evaluate(total_derivative_on_equation(e, flat), pt) == curve);
  }
}

TEST_CASE("sampling") {
  const FJet zero = build_fjet(Expr(), 2);
  const JetPoint a = sample_point(zero, {}, 3);
  const JetPoint b = sample_point(zero, {}, 3);
  CHECK(a.base == b.base);

  const FJet inv = build_fjet(E("1/x"), 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(sgn(sample_point(inv, {x}, seed).base[0]) != 0);

  CHECK_THROWS_AS(sample_point(zero, {x - x}, 0), SampleError);
  CHECK_THROWS_AS(jet_at(inv, {Q(0), Q(1), Q(1), Q(1)}), DivisionByZero);
}
