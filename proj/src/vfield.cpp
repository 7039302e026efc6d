#include <functional>

#include "mframe/vfield.hpp"

namespace mf {

Sym alpha_symbol(int k) {
  return symbol(k == 0 ? "alpha" : "alpha_" + std::string(static_cast<std::size_t>(k), 'x'),
                SymKind::formal);
}

Sym beta_symbol(int i, int j) {
  std::string n = "beta";
  if (i + j > 0)
    n += "_" + std::string(static_cast<std::size_t>(i), 'x') + std::string(static_cast<std::size_t>(j), 'u');
  return symbol(n, SymKind::formal);
}

namespace {

constexpr int kFormalOrder = 6;

struct FormalIndex {
  bool is_alpha;
  int i, j;
};

std::optional<FormalIndex> formal_index(Sym s) {
  for (int k = 0; k <= kFormalOrder; ++k)
    if (alpha_symbol(k) == s) return FormalIndex{true, k, 0};
  for (int i = 0; i <= kFormalOrder; ++i)
    for (int j = 0; i + j <= kFormalOrder; ++j)
      if (beta_symbol(i, j) == s) return FormalIndex{false, i, j};
  return std::nullopt;
}

bool is_formal_field(const VectorField& v) {
  for (const Expr* e : {&v.alpha, &v.beta})
    for (Sym s : e->symbols())
      if (sym_kind(s) == SymKind::formal) return true;
  return false;
}

// Total derivative with r free, extended to the formal alpha/beta jets.
Expr total_x(const Expr& e) {
  const Expr p(base::p()), q(base::q()), r(base::r());
  std::map<Sym, Expr> img;
  img.emplace(base::x(), Expr(1L));
  img.emplace(base::u(), p);
  img.emplace(base::p(), q);
  img.emplace(base::q(), r);
  for (Sym s : e.symbols()) {
    if (s == base::r()) throw FieldError("prolongation beyond third order is not supported");
    if (auto f = formal_index(s)) {
      if (f->is_alpha)
        img.emplace(s, Expr(alpha_symbol(f->i + 1)));
      else
        img.emplace(s, Expr(beta_symbol(f->i + 1, f->j)) + p * Expr(beta_symbol(f->i, f->j + 1)));
    }
  }
  return derivation(e, [&](Sym s) -> const Expr* {
    auto it = img.find(s);
    return it == img.end() ? nullptr : &it->second;
  });
}

void validate(const VectorField& v) {
  for (Sym s : v.alpha.symbols()) {
    if (sym_kind(s) == SymKind::formal) {
      auto f = formal_index(s);
      if (!f || !f->is_alpha) throw FieldError("alpha may depend only on x");
    } else if (s != base::x()) {
      throw FieldError("alpha may depend only on x");
    }
  }
  for (Sym s : v.beta.symbols()) {
    if (sym_kind(s) == SymKind::formal) continue;
    if (s != base::x() && s != base::u()) throw FieldError("beta may depend only on x and u");
  }
}

// Jets of alpha and beta, formal or by differentiation.
struct FieldJets {
  std::function<Expr(int)> a;
  std::function<Expr(int, int)> b;
};

FieldJets jets_of(const VectorField& v) {
  if (is_formal_field(v)) {
    return {[](int k) { return Expr(alpha_symbol(k)); },
            [](int i, int j) { return Expr(beta_symbol(i, j)); }};
  }
  return {[v](int k) {
            Expr e = v.alpha;
            for (int t = 0; t < k; ++t) e = differentiate(e, base::x());
            return e;
          },
          [v](int i, int j) {
            Expr e = v.beta;
            for (int t = 0; t < i; ++t) e = differentiate(e, base::x());
            for (int t = 0; t < j; ++t) e = differentiate(e, base::u());
            return e;
          }};
}

}  // namespace

ProlongedField prolong(const VectorField& v) {
  validate(v);
  const Expr p(base::p()), q(base::q()), r(base::r());
  Expr dalpha = total_x(v.alpha);
  ProlongedField pv{v.alpha, v.beta, {}, {}, {}};
  pv.gamma = total_x(v.beta) - p * dalpha;
  pv.tau = total_x(pv.gamma) - q * dalpha;
  pv.varsigma = total_x(pv.tau) - r * dalpha;
  return pv;
}

ProlongedField symbolic_prolong_generic() {
  return prolong(VectorField{Expr(alpha_symbol(0)), Expr(beta_symbol(0, 0))});
}

std::array<Expr, 3> determining_closed_forms(const VectorField& v) {
  FieldJets J = jets_of(v);
  const Expr p(base::p()), q(base::q()), r(base::r());
  Expr gamma = (J.b(0, 1) - J.a(1)) * p + J.b(1, 0);
  Expr tau = J.b(0, 2) * p * p + (2 * J.b(1, 1) - J.a(2)) * p + (J.b(0, 1) - 2 * J.a(1)) * q +
             J.b(2, 0);
  Expr vs = J.b(0, 3) * p.pow(3) + 3 * J.b(1, 2) * p * p + (3 * J.b(2, 1) - J.a(3)) * p +
            3 * (J.b(1, 1) - J.a(2)) * q + (J.b(0, 1) - 3 * J.a(1)) * r + 3 * J.b(0, 2) * p * q +
            J.b(3, 0);
  return {gamma, tau, vs};
}

std::array<Expr, 3> determining_display_forms() {
  auto a = [](int k) { return Expr(alpha_symbol(k)); };
  auto b = [](int i, int j) { return Expr(beta_symbol(i, j)); };
  const Expr p(base::p()), q(base::q()), r(base::r());
  Expr gamma = (b(0, 1) - a(1)) * p + b(1, 0);
  Expr tau = b(0, 2) * p * p + (2 * b(1, 1) - a(2)) * p + (b(0, 1) - 2 * a(1)) * q + b(2, 0);
  Expr vs = b(0, 3) * p.pow(3) + 3 * b(1, 2) * p * p + (3 * b(1, 2) - a(3)) * p +
            3 * (b(1, 1) - a(2)) * q + (b(0, 1) - 3 * a(1)) * r + 3 * b(0, 2) * p * q + b(3, 0);
  return {gamma, tau, vs};
}

DeterminingCheck check_determining(const ProlongedField& pv) {
  auto closed = determining_closed_forms(VectorField{pv.alpha, pv.beta});
  DeterminingCheck out;
  out.residuals = {pv.gamma - closed[0], pv.tau - closed[1], pv.varsigma - closed[2]};
  out.ok = out.residuals[0].is_zero() && out.residuals[1].is_zero() && out.residuals[2].is_zero();
  return out;
}

VectorField commutator(const VectorField& a, const VectorField& b) {
  const Sym x = base::x(), u = base::u();
  Expr alpha = a.alpha * differentiate(b.alpha, x) - b.alpha * differentiate(a.alpha, x);
  Expr beta = a.alpha * differentiate(b.beta, x) + a.beta * differentiate(b.beta, u) -
              b.alpha * differentiate(a.beta, x) - b.beta * differentiate(a.beta, u);
  return {alpha, beta};
}

}  // namespace mf
