#include <doctest.h>

#include "mframe/frame.hpp"
#include "mframe/parse.hpp"
#include "oracle.hpp"

using namespace mf;

namespace {
InvariantReport run(const std::string& F, std::uint64_t seed = 0) {
  InvariantOptions opt;
  opt.seed = seed;
  return invariants(parse_expr(F), opt);
}

bool all_zero(const InvariantReport& r) {
  for (const auto& f : r.frames)
    for (const char* w : {"QQ", "XPQ", "XXQ"})
      if (f.reference(w) != Q(0)) return false;
  return true;
}

bool all_nonzero(const InvariantReport& r) {
  for (const auto& f : r.frames)
    for (const char* w : {"QQ", "XPQ", "XXQ"})
      if (f.reference(w) == Q(0)) return false;
  return true;
}
}  // namespace

TEST_CASE("cross-section and residual parameters") {
  CHECK(cross_section().size() >= 10);
  for (const auto& eq : cross_section()) CHECK(eq.value >= 0);
  CHECK_FALSE(residual_parameters().empty());
  CHECK(generic_stage(true).front().word == "XXPQ");
  CHECK(generic_stage(false).front().word == "XPQ");
}

TEST_CASE("flat equations are linearizable") {
  for (const char* F : {"0", "6", "x*u - x*u"}) {
    const auto r = run(F);
    CHECK(r.frames.size() == 10);
    CHECK(all_zero(r));
    CHECK(r.verdict == Verdict::linearizable);
    CHECK(r.branch.kind == Branch::wunschmann_flat);
    for (const auto& f : r.frames) CHECK_FALSE(f.generic);
    CHECK(oracle::flat_equivalence(parse_expr(F)).flat);
  }
}

TEST_CASE("q^2 lies on the generic branch") {
  const auto r = run("q^2");
  CHECK(r.verdict == Verdict::not_linearizable);
  CHECK(r.branch.kind == Branch::generic);
  CHECK_FALSE(oracle::flat_equivalence(parse_expr("q^2")).flat);
  int generic_points = 0;
  for (const auto& f : r.frames) {
    if (f.branch.kind != Branch::generic) continue;
    ++generic_points;
    REQUIRE(f.generic);
    for (const auto& s : f.stages) CHECK(s.residual.is_zero());
    for (const auto& res : f.generic->residuals_in_extension)
      CHECK(res.substr(res.size() - 11) == ": [0, 0, 0]");
    for (const auto& [w, v] : f.generic->extras) CHECK(v.cube() == v.coeff * v.coeff * v.coeff * (v.power == 0 ? Q(1) : v.power == 1 ? v.radicand : v.radicand * v.radicand));
  }
  CHECK(generic_points >= 8);
}

TEST_CASE("branch examples") {
  CHECK(run("x*q").branch.str() == "non-generic(R_QQ=0,R_XPQ=0,R_XXQ!=0)");
  CHECK(run("p^3").branch.str() == "non-generic(R_QQ=0,R_XPQ=0,R_XXQ!=0)");
  CHECK(run("u*q").branch.kind == Branch::generic);
  CHECK(run("q^3").verdict == Verdict::not_linearizable);
}

TEST_CASE("pointwise runs are deterministic in the seed") {
  const auto a = run("u*q", 3), b = run("u*q", 3);
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(a.frames[i].point.base == b.frames[i].point.base);
    for (const char* w : {"QQ", "XPQ", "XXQ", "PP"}) CHECK(a.frames[i].reference(w) == b.frames[i].reference(w));
  }
}

TEST_CASE("verdict agrees with the flatness oracle across the corpus") {
  for (const char* F : {"0", "6", "-3*q/x", "q^2", "x*q", "u*q", "p^3", "u*p*q/x"}) {
    const auto r = run(F);
    const bool flat = oracle::flat_equivalence(parse_expr(F)).flat;
    CHECK_MESSAGE((r.verdict == Verdict::linearizable) == flat, F);
  }
}

TEST_CASE("symbolic mode") {
  InvariantOptions opt;
  const auto r = symbolic_report(parse_expr("q^2"), 20000, opt);
  CHECK(r.mode == "symbolic");
  CHECK(r.closed_forms.size() >= 3);
  CHECK(r.verdict == run("q^2").verdict);
  const auto z = symbolic_report(parse_expr("0"), 20000, opt);
  for (const auto& [w, e] : z.closed_forms)
    if (w != "PP") CHECK_MESSAGE(e.is_zero(), w);
  CHECK_THROWS_AS(symbolic_report(parse_expr("q^2"), 5, opt), BudgetExceeded);
}

TEST_CASE("pullback and equivalence") {
  const Expr x(base::x()), u(base::u());
  CHECK(pullback(Expr(6L), x, u + x.pow(3)).is_zero());
  InvariantOptions opt;
  CHECK(equivalence_signature(Expr(), Expr(6L), std::nullopt, opt).verdict == Equivalence::consistent);
  CHECK(equivalence_signature(Expr(), Expr(6L), MapHint{x, u + x.pow(3)}, opt).verdict ==
        Equivalence::verified_by_hint);
  CHECK(equivalence_signature(Expr(), parse_expr("q^2"), std::nullopt, opt).verdict ==
        Equivalence::necessarily_inequivalent);
  const Expr w = parse_expr("u*q");
  CHECK(equivalence_signature(w, w, MapHint{x, u}, opt).verdict == Equivalence::verified_by_hint);
}

TEST_CASE("branch is invariant under a fiber-preserving map") {
  const Expr x(base::x()), u(base::u());
  const Expr B = parse_expr("q^2");
  const Expr A = pullback(B, Expr(2L) * x + Expr(1L), Expr(3L) * u + x * u);
  InvariantOptions opt;
  const auto ra = invariants(A, opt);
  CHECK(ra.branch == invariants(B, opt).branch);
  CHECK(ra.verdict == Verdict::not_linearizable);
}
