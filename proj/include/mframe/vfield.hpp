#pragma once

#include <array>

#include "mframe/expr.hpp"

namespace mf {

// v = alpha(x) d/dx + beta(x, u) d/du
struct VectorField {
  Expr alpha;
  Expr beta;
};

struct ProlongedField {
  Expr alpha, beta;
  Expr gamma, tau, varsigma;  // coefficients of d/dp, d/dq, d/dr
};

struct FieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Formal jet symbols alpha, alpha_x, ..., beta_xu, ...
Sym alpha_symbol(int k);
Sym beta_symbol(int i, int j);

ProlongedField prolong(const VectorField& v);
ProlongedField symbolic_prolong_generic();

struct DeterminingCheck {
  bool ok = false;
  std::array<Expr, 3> residuals;  // gamma, tau, varsigma slots
};

// Compares against the closed-form infinitesimal determining system.
DeterminingCheck check_determining(const ProlongedField& pv);

// Closed forms of gamma, tau, varsigma for the field's jets.
std::array<Expr, 3> determining_closed_forms(const VectorField& v);
// The same table exactly as printed in the source display, misprint included.
std::array<Expr, 3> determining_display_forms();

VectorField commutator(const VectorField& a, const VectorField& b);

}  // namespace mf
