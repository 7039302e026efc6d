#include <doctest.h>

#include "mframe/action.hpp"
#include "mframe/parse.hpp"
#include "mframe/suites.hpp"
#include "mframe/vfield.hpp"

using namespace mf;

namespace {
Expr E(const char* s) { return parse_expr(s); }
const Expr x(base::x()), u(base::u()), p(base::p()), q(base::q()), r(base::r());

void check_equal(const Prolonged& a, const Prolonged& b) {
  CHECK(a.X == b.X);
  CHECK(a.U == b.U);
  CHECK(a.P == b.P);
  CHECK(a.Q == b.Q);
  CHECK(a.R == b.R);
}
}  // namespace

TEST_CASE("helper functions") {
  const Helpers id = helpers(GroupJet::identity(3));
  CHECK(id.delta == p);
  CHECK(id.epsilon.is_zero());
  CHECK(id.psi == q);
  CHECK(id.chi == -r);

  const Helpers sc = helpers(GroupJet::of_map(Expr(2L) * x, u, 3));
  CHECK(sc.delta == p);
  CHECK(sc.epsilon.is_zero());
  CHECK(sc.psi == Expr(2L) * q);
  CHECK(sc.chi == Expr(-4L) * r);

  const Helpers sh = helpers(GroupJet::of_map(x, u + x, 3));
  CHECK(sh.delta == p + Expr(1L));
  CHECK(sh.psi == q);
  CHECK(sh.chi == -r);
}

TEST_CASE("prolonged action examples") {
  check_equal(evaluate_action(GroupJet::identity(3), 1, 2, 3, 4, 5),
              {Expr(1L), Expr(2L), Expr(3L), Expr(4L), Expr(5L)});
  check_equal(prolonged_action(GroupJet::of_map(Expr(2L) * x, u, 3)),
              {Expr(2L) * x, u, p / Expr(2L), q / Expr(4L), r / Expr(8L)});
  check_equal(prolonged_action(GroupJet::of_map(x, u + x, 3)), {x, u + x, p + Expr(1L), q, r});
}

TEST_CASE("closed form agrees with the chain rule") {
  check_equal(prolonged_action(GroupJet::formal(3)), chain_rule_action(GroupJet::formal(3)));
  check_equal(prolonged_action(GroupJet::of_map(E("x^2 + 2*x"), E("x*u^2 + u"), 3)),
              chain_rule_action(GroupJet::of_map(E("x^2 + 2*x"), E("x*u^2 + u"), 3)));
}

TEST_CASE("local diffeomorphism conditions") {
  CHECK_THROWS_AS(GroupJet::of_map(Expr(1L), u, 3).check_local_diffeomorphism(), ActionError);
  CHECK_THROWS_AS(GroupJet::of_map(x, x, 3).check_local_diffeomorphism(), ActionError);
  CHECK_THROWS_AS(GroupJet::of_map(u, u, 3), ActionError);
  CHECK_THROWS_AS(GroupJet::of_map(x, p, 3), ActionError);
}

TEST_CASE("group law on 25 random compositions") {
  for (std::uint64_t seed : {0u, 7u}) {
    const SuiteResult r = run_group_law(seed, 25);
    REQUIRE(r.reports.size() == 1);
    CHECK(r.reports[0].checks.size() == 25);
    CHECK(r.ok());
  }
}

TEST_CASE("first-order term of the action is the prolonged vector field") {
  const Sym t = symbol("t", SymKind::formal);
  const Expr T(t);
  const Expr alpha = E("x^2 + 3*x"), beta = E("x*u^2 - u + x^3");
  GroupJet g;
  g.order = 3;
  Expr d = x + T * alpha;
  const Bindings at{{base::x(), Expr(2L)}, {base::u(), Expr(3L)}};
  for (int k = 0; k <= 3; ++k, d = differentiate(d, base::x())) g.xi.emplace(k, substitute(d, at));
  Expr row = u + T * beta;
  for (int i = 0; i <= 3; ++i, row = differentiate(row, base::x())) {
    Expr c = row;
    for (int j = 0; i + j <= 3; ++j, c = differentiate(c, base::u())) g.phi.emplace(std::make_pair(i, j), substitute(c, at));
  }
  const Prolonged a = prolonged_action(g);
  const ProlongedField v = prolong({alpha, beta});
  auto first = [&](const Expr& e) { return substitute(differentiate(e, t), {{t, Expr()}}); };
  CHECK(first(a.P) == substitute(v.gamma, at));
  CHECK(first(a.Q) == substitute(v.tau, at));
  CHECK(first(a.R) == substitute(v.varsigma, at));
}

TEST_CASE("lifted operators are dual to the lifted coordinates") {
  const FJet fj = build_fjet(E("q^2 + u*p"), 3);
  const LiftedOperators ops(GroupJet::of_map(E("x + x^2"), E("2*u + x*u^2"), 5), fj);
  const Expr coords[4] = {ops.lifted().X, ops.lifted().U, ops.lifted().P, ops.lifted().Q};
  for (int i = 0; i < 4; ++i) {
    const auto row = ops.apply(coords[i]);
    const auto tri = ops.apply_triangular(coords[i]);
    for (int j = 0; j < 4; ++j) {
      CHECK(row[j] == Expr(i == j ? 1L : 0L));
      CHECK(tri[j] == row[j]);
    }
  }
  CHECK(ops.apply(ops.lifted().X)[1].is_zero());
}

TEST_CASE("lifted invariant examples") {
  const GroupJet id = GroupJet::identity(5);
  CHECK(lifted_invariant(id, build_fjet(Expr(), 4), "Q").value.is_zero());
  CHECK(lifted_invariant(id, build_fjet(q * q, 4), "Q").value == Expr(2L) * q);
  const FJet formal = FJet::formal(4);
  CHECK(lifted_invariant(id, formal, "Q").value == Expr(fjet_symbol({0, 0, 0, 1})));
  CHECK(lifted_invariant(id, formal, "").value == Expr(fjet_symbol({0, 0, 0, 0})));
  CHECK(valid_word("XPQ"));
  CHECK_FALSE(valid_word("XRQ"));
}

TEST_CASE("lifted operators commute on the equation manifold") {
  const GroupJet g = GroupJet::of_map(E("x + x^3"), E("u + x*u^2"), 6);
  const FJet fj = build_fjet(E("q^2 + x*p"), 4);
  CHECK(lifted_invariant(g, fj, "XQ").value == lifted_invariant(g, fj, "QX").value);
  CHECK(lifted_invariant(g, fj, "XPQ").value == lifted_invariant(g, fj, "PQX").value);
}

TEST_CASE("the printed helper table differs by the logged misprints") {
  const GroupJet g = GroupJet::formal(3);
  const Helpers h = helpers(g), hd = helpers_display(g);
  CHECK(h.delta == hd.delta);
  CHECK(h.epsilon == hd.epsilon);
  CHECK(h.psi == hd.psi);
  const Expr xi1(xi_symbol(1)), xi2(xi_symbol(2)), phx(phi_symbol(1, 0));
  const Expr puu(phi_symbol(0, 2)), pxuu(phi_symbol(1, 2)), pxxu(phi_symbol(2, 1));
  const Expr expected = Expr(3L) * xi1 * xi1 *
                            (p * p * (pxuu - puu) + p * (pxxu - pxuu)) -
                        Expr(3L) * (xi1 * xi1 - xi2 * xi2) * phx;
  CHECK(hd.chi - h.chi == expected);
}
