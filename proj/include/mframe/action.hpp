#pragma once

#include <array>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>

#include "mframe/expr.hpp"
#include "mframe/jet.hpp"

namespace mf {

// Group-jet symbols: xi, xi_x, xi_xx, ... and phi, phi_x, phi_u, phi_xu, ...
Sym xi_symbol(int k);
Sym phi_symbol(int i, int j);

struct GroupIndex {
  bool is_xi;
  int i;  // x-derivatives
  int j;  // u-derivatives (always 0 for xi)
};
std::optional<GroupIndex> group_index(Sym s);

struct ActionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroupJet {
  int order = 0;
  std::map<int, Expr> xi;
  std::map<std::pair<int, int>, Expr> phi;

  const Expr& xi_at(int k) const;
  const Expr& phi_at(int i, int j) const;

  static GroupJet formal(int order);
  static GroupJet identity(int order);
  // Jets of X = xi(x), U = phi(x, u) as functions of x and u.
  static GroupJet of_map(const Expr& X, const Expr& U, int order);

  // Formal group-jet symbol -> stored value.
  Bindings bindings() const;
  // xi_x and phi_u must be nonzero.
  void check_local_diffeomorphism() const;
};

struct Helpers {
  Expr delta, epsilon, psi, chi;
};
Helpers helpers(const GroupJet& g);
// The helper table exactly as printed in the source display.
Helpers helpers_display(const GroupJet& g);

struct Prolonged {
  Expr X, U, P, Q, R;
};

// Closed form through the helper functions; p, q, r stay symbolic.
Prolonged prolonged_action(const GroupJet& g);
// Independent construction by the chain rule P = D_x U / D_x X and so on.
Prolonged chain_rule_action(const GroupJet& g);
// R exactly as printed in the source display.
Expr displayed_R(const GroupJet& g);

Prolonged evaluate_action(const GroupJet& g, const Q& x, const Q& u, const Q& p, const Q& q,
                          const Q& r);

// Partial derivative along a coordinate of the equation manifold (axis 0..3 =
// x, u, p, q). Group jets and F-jet symbols are shifted as jets of functions.
Expr graph_partial(const Expr& e, int axis);

// Lifted invariant differential operators D_X, D_U, D_P, D_Q on the equation
// manifold, dual to the lifted coordinates (X, U, P, Q).
class LiftedOperators {
 public:
  LiftedOperators(const GroupJet& g, const FJet& fjet);

  // Formal group jets and formal F-jets; shared, with a cache of invariants.
  static const LiftedOperators& formal();

  const Prolonged& lifted() const { return z_; }
  const std::array<std::array<Expr, 4>, 4>& jacobian() const { return jac_; }

  // (D_X f, D_U f, D_P f, D_Q f) by inverting the Jacobian.
  std::array<Expr, 4> apply(const Expr& f) const;
  // The same operators from the triangular solved form.
  std::array<Expr, 4> apply_triangular(const Expr& f) const;

  // R_word; the leftmost letter is applied last. Cached.
  Expr invariant(const std::string& word) const;

 private:
  Prolonged z_;
  Helpers h_;
  Expr xi1_, phiu_, phix_;
  std::array<std::array<Expr, 4>, 4> jac_;
  std::array<Expr, 4> diag_inv_;
  mutable std::shared_mutex mu_;
  mutable std::map<std::string, Expr> cache_;
};

struct LiftedExpr {
  Expr value;
  std::string word;
};

// R_word for the given group jets and equation, by specializing the formal
// lifted invariant.
LiftedExpr lifted_invariant(const GroupJet& g, const FJet& fjet, const std::string& word);

bool valid_word(const std::string& word);

}  // namespace mf
