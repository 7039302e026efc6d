#pragma once

#include <map>
#include <string>

#include "mframe/expr.hpp"

namespace mf::oracle {

// Closed-form conditions for u''' = F to be mapped to u''' = 0 by a
// fiber-preserving transformation. F must have the normal form
// A3 p^3 + A2 p^2 + A1 p + A0 + (B1 p + B0) q with coefficients in (x, u);
// the remaining conditions are differential identities in those coefficients.
struct Result {
  bool normal_form = false;  // F has the cubic-in-p, linear-in-q shape
  bool flat = false;         // every condition vanishes
  std::map<std::string, Expr> conditions;
};

inline Result flat_equivalence(const Expr& F) {
  using namespace base;
  const auto d = [](const Expr& e, Sym s, int n = 1) {
    Expr r = e;
    for (int i = 0; i < n; ++i) r = differentiate(r, s);
    return r;
  };
  const auto at0 = [](const Expr& e, Sym s) { return substitute(e, {{s, Expr()}}); };
  Result out;
  auto& c = out.conditions;
  c["S1"] = d(F, q(), 2);
  if (!c["S1"].is_zero()) return out;
  const Expr A = at0(F, q());
  const Expr B = d(F, q());
  c["S2"] = d(B, p(), 2);
  c["S3"] = d(A, p(), 4);
  if (!c["S2"].is_zero() || !c["S3"].is_zero()) return out;
  out.normal_form = true;
  const Expr A3 = d(A, p(), 3) / Expr(6L);
  const Expr A2 = at0(d(A, p(), 2), p()) / Expr(2L);
  const Expr A1 = at0(d(A, p()), p());
  const Expr A0 = at0(A, p());
  const Expr B1 = d(B, p());
  const Expr B0 = at0(B, p());
  c["C1"] = d(B1, x()) - d(B0, u());
  c["C2"] = A3 - d(B1, u()) / Expr(3L) + B1 * B1 / Expr(9L);
  c["C3"] = A2 - d(B1, x()) + B0 * B1 / Expr(3L);
  const Expr b = A1 - d(B0, x()) + B0 * B0 / Expr(3L);
  c["C4"] = d(b, u());
  const Expr E = d(A0, u()) - B1 * A0 / Expr(3L) + A1 * B0 / Expr(3L) - d(B0, x(), 2) / Expr(3L) +
                 Expr(Q(2, 27)) * B0.pow(3);
  c["C5"] = d(E, u());
  c["C6"] = E - d(b, x()) / Expr(2L);
  out.flat = true;
  for (const auto& [k, v] : c) out.flat = out.flat && v.is_zero();
  return out;
}

}  // namespace mf::oracle
