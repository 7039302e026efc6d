#include <mutex>

#include "mframe/action.hpp"

namespace mf {

Sym xi_symbol(int k) {
  return symbol(k == 0 ? "xi" : "xi_" + std::string(static_cast<std::size_t>(k), 'x'),
                SymKind::group);
}

Sym phi_symbol(int i, int j) {
  std::string n = "phi";
  if (i + j > 0)
    n += "_" + std::string(static_cast<std::size_t>(i), 'x') +
         std::string(static_cast<std::size_t>(j), 'u');
  return symbol(n, SymKind::group);
}

std::optional<GroupIndex> group_index(Sym s) {
  if (sym_kind(s) != SymKind::group) return std::nullopt;
  const std::string& n = sym_name(s);
  GroupIndex g{n.rfind("xi", 0) == 0, 0, 0};
  std::size_t start = g.is_xi ? 2 : 3;
  for (std::size_t k = start + 1; k < n.size(); ++k) {
    if (n[k] == 'x') ++g.i;
    else if (n[k] == 'u') ++g.j;
  }
  return g;
}

// ---------------------------------------------------------------------------
// GroupJet

const Expr& GroupJet::xi_at(int k) const {
  auto it = xi.find(k);
  if (it == xi.end())
    throw ActionError("group jet xi of order " + std::to_string(k) + " is not available");
  return it->second;
}

const Expr& GroupJet::phi_at(int i, int j) const {
  auto it = phi.find({i, j});
  if (it == phi.end())
    throw ActionError("group jet phi of order " + std::to_string(i + j) + " is not available");
  return it->second;
}

GroupJet GroupJet::formal(int order) {
  GroupJet g;
  g.order = order;
  for (int k = 0; k <= order; ++k) g.xi.emplace(k, Expr(xi_symbol(k)));
  for (int i = 0; i <= order; ++i)
    for (int j = 0; i + j <= order; ++j) g.phi.emplace(std::make_pair(i, j), Expr(phi_symbol(i, j)));
  return g;
}

GroupJet GroupJet::of_map(const Expr& X, const Expr& U, int order) {
  for (Sym s : X.symbols())
    if (s != base::x()) throw ActionError("X must depend on x only (fiber preservation)");
  for (Sym s : U.symbols())
    if (s != base::x() && s != base::u()) throw ActionError("U must depend on x and u only");
  GroupJet g;
  g.order = order;
  Expr d = X;
  for (int k = 0; k <= order; ++k) {
    g.xi.emplace(k, d);
    d = differentiate(d, base::x());
  }
  Expr row = U;
  for (int i = 0; i <= order; ++i) {
    Expr c = row;
    for (int j = 0; i + j <= order; ++j) {
      g.phi.emplace(std::make_pair(i, j), c);
      c = differentiate(c, base::u());
    }
    row = differentiate(row, base::x());
  }
  return g;
}

GroupJet GroupJet::identity(int order) {
  return of_map(Expr(base::x()), Expr(base::u()), order);
}

Bindings GroupJet::bindings() const {
  Bindings b;
  for (const auto& [k, v] : xi) b.emplace(xi_symbol(k), v);
  for (const auto& [ij, v] : phi) b.emplace(phi_symbol(ij.first, ij.second), v);
  return b;
}

void GroupJet::check_local_diffeomorphism() const {
  if (xi_at(1).is_zero()) throw ActionError("xi_x vanishes: not a local diffeomorphism");
  if (phi_at(0, 1).is_zero()) throw ActionError("phi_u vanishes: not a local diffeomorphism");
}

// ---------------------------------------------------------------------------
// Helpers and the prolonged action

namespace {

struct Jets {
  Expr x1, x2, x3;
  Expr fx, fu, fxx, fxu, fuu, fxxx, fxxu, fxuu, fuuu;
  explicit Jets(const GroupJet& g)
      : x1(g.xi_at(1)), x2(g.xi_at(2)), x3(g.xi_at(3)),
        fx(g.phi_at(1, 0)), fu(g.phi_at(0, 1)), fxx(g.phi_at(2, 0)), fxu(g.phi_at(1, 1)),
        fuu(g.phi_at(0, 2)), fxxx(g.phi_at(3, 0)), fxxu(g.phi_at(2, 1)), fxuu(g.phi_at(1, 2)),
        fuuu(g.phi_at(0, 3)) {}
};

Expr psi_of(const Jets& J) {
  const Expr p(base::p()), q(base::q());
  return J.x1 * J.fuu * p * p - (J.x2 * J.fu - 2 * J.x1 * J.fxu) * p + J.fu * J.x1 * q -
         J.x2 * J.fx + J.x1 * J.fxx;
}

// The three flags select the printed variants of the p^2, p and last terms.
Expr chi_of(const Jets& J, bool p2_typo, bool p1_typo, bool tail_typo) {
  const Expr p(base::p()), q(base::q()), r(base::r());
  Expr p2 = 3 * J.x1 * (J.x2 * J.fuu - J.x1 * (p2_typo ? J.fuu : J.fxuu));
  Expr p1 = 6 * J.x2 * J.x1 * J.fxu + J.x3 * J.x1 * J.fu - 3 * J.x2 * J.x2 * J.fu -
            3 * J.x1 * J.x1 * (p1_typo ? J.fxuu : J.fxxu);
  Expr tail = 3 * J.x2 * J.x1 * J.fxx + J.x3 * J.x1 * J.fx - J.x1 * J.x1 * J.fxxx -
              3 * (tail_typo ? J.x1 * J.x1 : J.x2 * J.x2) * J.fx;
  return -(J.x1 * J.x1) * J.fuuu * p.pow(3) + p2 * p * p + p1 * p +
         3 * J.x1 * (J.fu * J.x2 - J.fxu * J.x1) * q - 3 * J.x1 * J.x1 * J.fuu * p * q -
         J.fu * J.x1 * J.x1 * r + tail;
}

}  // namespace

Helpers helpers(const GroupJet& g) {
  Jets J(g);
  const Expr p(base::p());
  return {p * J.fu + J.fx, J.x2 / J.x1, psi_of(J), chi_of(J, false, false, false)};
}

Helpers helpers_display(const GroupJet& g) {
  Jets J(g);
  const Expr p(base::p());
  return {p * J.fu + J.fx, J.x2 / J.x1, psi_of(J), chi_of(J, true, true, true)};
}

Prolonged prolonged_action(const GroupJet& g) {
  g.check_local_diffeomorphism();
  Helpers h = helpers(g);
  const Expr& x1 = g.xi_at(1);
  return {g.xi_at(0), g.phi_at(0, 0), h.delta / x1, h.psi / x1.pow(3), -h.chi / x1.pow(5)};
}

Expr displayed_R(const GroupJet& g) {
  Jets J(g);
  return -chi_of(J, false, true, false) / J.x1.pow(5);
}

namespace {

// Total derivative with free r acting on jets of xi and phi.
Expr chain_dx(const Expr& e) {
  const Expr p(base::p()), q(base::q()), r(base::r());
  std::map<Sym, Expr> img;
  img.emplace(base::x(), Expr(1L));
  img.emplace(base::u(), p);
  img.emplace(base::p(), q);
  img.emplace(base::q(), r);
  for (Sym s : e.symbols()) {
    if (s == base::r()) throw ActionError("chain rule beyond third order is not supported");
    if (auto gi = group_index(s)) {
      if (gi->is_xi)
        img.emplace(s, Expr(xi_symbol(gi->i + 1)));
      else
        img.emplace(s, Expr(phi_symbol(gi->i + 1, gi->j)) + p * Expr(phi_symbol(gi->i, gi->j + 1)));
    }
  }
  return derivation(e, [&](Sym s) -> const Expr* {
    auto it = img.find(s);
    return it == img.end() ? nullptr : &it->second;
  });
}

}  // namespace

Prolonged chain_rule_action(const GroupJet& g) {
  g.check_local_diffeomorphism();
  Expr X = g.xi_at(0);
  Expr U = g.phi_at(0, 0);
  Expr dX = chain_dx(X);
  Expr P = chain_dx(U) / dX;
  Expr Qv = chain_dx(P) / dX;
  Expr R = chain_dx(Qv) / dX;
  return {X, U, P, Qv, R};
}

Prolonged evaluate_action(const GroupJet& g, const Q& x, const Q& u, const Q& p, const Q& q,
                          const Q& r) {
  Prolonged a = prolonged_action(g);
  Point pt{{base::x(), x}, {base::u(), u}, {base::p(), p}, {base::q(), q}, {base::r(), r}};
  auto ev = [&](const Expr& e) { return Expr(evaluate(e, pt)); };
  return {ev(a.X), ev(a.U), ev(a.P), ev(a.Q), ev(a.R)};
}

// ---------------------------------------------------------------------------
// Lifted operators

Expr graph_partial(const Expr& e, int axis) {
  static const Sym axes[4] = {base::x(), base::u(), base::p(), base::q()};
  const Expr one(1L);
  std::map<Sym, Expr> img;
  for (Sym s : e.symbols()) {
    if (s == base::r()) throw ActionError("r is not a coordinate of the equation manifold");
    if (s == axes[axis]) {
      img.emplace(s, one);
    } else if (auto gi = group_index(s)) {
      if (axis == 0)
        img.emplace(s, Expr(gi->is_xi ? xi_symbol(gi->i + 1) : phi_symbol(gi->i + 1, gi->j)));
      else if (axis == 1 && !gi->is_xi)
        img.emplace(s, Expr(phi_symbol(gi->i, gi->j + 1)));
    } else if (auto fi = fjet_index(s)) {
      img.emplace(s, Expr(fjet_symbol(shifted(*fi, axis))));
    }
  }
  return derivation(e, [&](Sym s) -> const Expr* {
    auto it = img.find(s);
    return it == img.end() ? nullptr : &it->second;
  });
}

LiftedOperators::LiftedOperators(const GroupJet& g, const FJet& fjet) {
  z_ = prolonged_action(g);
  z_.R = substitute(z_.R, {{base::r(), fjet.rhs()}});
  h_ = helpers(g);
  xi1_ = g.xi_at(1);
  phiu_ = g.phi_at(0, 1);
  phix_ = g.phi_at(1, 0);
  const std::array<const Expr*, 4> Z{&z_.X, &z_.U, &z_.P, &z_.Q};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) jac_[i][j] = graph_partial(*Z[j], i);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < i; ++j)
      if (!jac_[i][j].is_zero()) throw ActionError("lifted Jacobian is not triangular");
    if (jac_[i][i].is_zero())
      throw ActionError("lifted Jacobian is singular (non-transversal point)");
    diag_inv_[i] = jac_[i][i].inverse();
  }
}

const LiftedOperators& LiftedOperators::formal() {
  static const LiftedOperators ops(GroupJet::formal(3), FJet::formal(0));
  return ops;
}

std::array<Expr, 4> LiftedOperators::apply(const Expr& f) const {
  std::array<Expr, 4> D;
  for (int i = 3; i >= 0; --i) {
    Expr s = graph_partial(f, i);
    for (int j = i + 1; j < 4; ++j)
      if (!jac_[i][j].is_zero() && !D[j].is_zero()) s -= jac_[i][j] * D[j];
    D[i] = s * diag_inv_[i];
  }
  return D;
}

std::array<Expr, 4> LiftedOperators::apply_triangular(const Expr& f) const {
  const Expr& d = h_.delta;
  const Expr& eps = h_.epsilon;
  const Expr& psi = h_.psi;
  Expr DQ = xi1_.pow(2) / phiu_ * graph_partial(f, 3);
  Expr DP = (xi1_ * graph_partial(f, 2) - graph_partial(psi, 2) / xi1_.pow(2) * DQ) / phiu_;
  Expr DU = (graph_partial(f, 1) - graph_partial(d, 1) / xi1_ * DP -
             graph_partial(psi, 1) / xi1_.pow(3) * DQ) /
            phiu_;
  Expr DX = (graph_partial(f, 0) - phix_ * DU - (graph_partial(d, 0) - d * eps) / xi1_ * DP -
             (graph_partial(psi, 0) - 3 * psi * eps) / xi1_.pow(3) * DQ) /
            xi1_;
  return {DX, DU, DP, DQ};
}

Expr LiftedOperators::invariant(const std::string& word) const {
  if (!valid_word(word)) throw ActionError("invalid invariant word '" + word + "'");
  if (word.empty()) return z_.R;
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(word);
    if (it != cache_.end()) return it->second;
  }
  std::string rest = word.substr(1);
  Expr inner = invariant(rest);
  auto D = apply(inner);
  static const char letters[4] = {'X', 'U', 'P', 'Q'};
  std::unique_lock lock(mu_);
  for (int k = 0; k < 4; ++k) cache_.emplace(letters[k] + rest, std::move(D[k]));
  return cache_.at(word);
}

bool valid_word(const std::string& word) {
  for (char c : word)
    if (c != 'X' && c != 'U' && c != 'P' && c != 'Q') return false;
  return true;
}

LiftedExpr lifted_invariant(const GroupJet& g, const FJet& fjet, const std::string& word) {
  Expr formal = LiftedOperators::formal().invariant(word);
  Bindings gb = g.bindings();
  Bindings b;
  for (Sym s : formal.symbols()) {
    if (group_index(s)) {
      auto it = gb.find(s);
      if (it == gb.end())
        throw ActionError("R_" + word + " needs group jet " + sym_name(s) +
                          " beyond the available order " + std::to_string(g.order));
      b.emplace(s, it->second);
    } else if (auto fi = fjet_index(s)) {
      b.emplace(s, fjet.at(*fi));
    }
  }
  return {substitute(formal, b), word};
}

}  // namespace mf
