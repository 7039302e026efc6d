#include <algorithm>
#include <mutex>
#include <set>
#include <shared_mutex>

#include "mframe/action.hpp"
#include "mframe/forms.hpp"
#include "mframe/parse.hpp"
#include "mframe/vfield.hpp"

namespace mf {

// ---------------------------------------------------------------------------
// Generators

namespace {

std::shared_mutex g_gen_mu;
std::set<std::uint32_t>& generator_ids() {
  static std::set<std::uint32_t> ids;
  return ids;
}
std::map<std::uint32_t, Sym>& contact_sources() {
  static std::map<std::uint32_t, Sym> m;
  return m;
}
std::map<std::uint32_t, MuIndex>& mu_indices() {
  static std::map<std::uint32_t, MuIndex> m;
  return m;
}

const char* kAxisNames = "xupqr";
const char* kLiftedNames = "XUPQR";

}  // namespace

Sym generator(const std::string& name) {
  Sym s = symbol(name, SymKind::formal);
  std::unique_lock lock(g_gen_mu);
  generator_ids().insert(s.id);
  return s;
}

bool is_generator(Sym s) {
  std::shared_lock lock(g_gen_mu);
  return generator_ids().count(s.id) != 0;
}

Sym coordinate_differential(int axis) {
  if (axis < 0 || axis > 4) throw FormError("coordinate axis out of range");
  return generator(std::string("d") + kAxisNames[axis]);
}

Sym group_contact(Sym g) {
  if (!group_index(g)) throw FormError(sym_name(g) + " is not a group jet");
  Sym s = generator("Y(" + sym_name(g) + ")");
  std::unique_lock lock(g_gen_mu);
  contact_sources().emplace(s.id, g);
  return s;
}

std::optional<Sym> group_contact_source(Sym gen) {
  std::shared_lock lock(g_gen_mu);
  auto it = contact_sources().find(gen.id);
  if (it == contact_sources().end()) return std::nullopt;
  return it->second;
}

Sym mu_x(int i) {
  Sym s = generator(i == 0 ? "mu^x" : "mu^x_" + std::string(static_cast<std::size_t>(i), 'X'));
  std::unique_lock lock(g_gen_mu);
  mu_indices().emplace(s.id, MuIndex{true, i, 0});
  return s;
}

Sym mu_u(int i, int j) {
  std::string n = "mu^u";
  if (i + j > 0)
    n += "_" + std::string(static_cast<std::size_t>(i), 'U') + std::string(static_cast<std::size_t>(j), 'X');
  Sym s = generator(n);
  std::unique_lock lock(g_gen_mu);
  mu_indices().emplace(s.id, MuIndex{false, i, j});
  return s;
}

std::optional<MuIndex> mu_index(Sym s) {
  std::shared_lock lock(g_gen_mu);
  auto it = mu_indices().find(s.id);
  if (it == mu_indices().end()) return std::nullopt;
  return it->second;
}

Sym omega(int axis) {
  if (axis < 0 || axis > 4) throw FormError("coordinate axis out of range");
  return generator(std::string("omega^") + kAxisNames[axis]);
}

Sym lifted_coordinate(int axis) {
  if (axis < 2 || axis > 4) throw FormError("lifted coordinate axis out of range");
  if (axis == 4) return invariant_symbol({0, 0, 0, 0});
  return symbol(std::string(1, kLiftedNames[axis]), SymKind::formal);
}

std::string invariant_word(const std::array<int, 4>& c) {
  std::string w;
  for (int a = 0; a < 4; ++a) w.append(static_cast<std::size_t>(c[a]), kLiftedNames[a]);
  return w;
}

Sym invariant_symbol(const std::array<int, 4>& c) {
  std::string w = invariant_word(c);
  return symbol(w.empty() ? "R" : "R_" + w, SymKind::formal);
}

// ---------------------------------------------------------------------------
// DiffForm

DiffForm DiffForm::function(const Expr& f) {
  DiffForm a(0);
  if (!f.is_zero()) a.terms_.emplace(Word{}, f);
  return a;
}

DiffForm DiffForm::gen(Sym g, const Expr& c) {
  if (!is_generator(g)) throw FormError(sym_name(g) + " is not a form generator");
  DiffForm a(1);
  if (!c.is_zero()) a.terms_.emplace(Word{g}, c);
  return a;
}

DiffForm DiffForm::from_linear(const Expr& e) {
  DiffForm a(1);
  Bindings zero;
  for (Sym s : e.symbols()) {
    if (!is_generator(s)) continue;
    Expr c = differentiate(e, s);
    for (Sym t : c.symbols())
      if (is_generator(t)) throw FormError("expression is not linear in the generators");
    a.add({s}, c);
    zero.emplace(s, Expr());
  }
  if (!substitute(e, zero).is_zero()) throw FormError("1-form expression has a function part");
  return a;
}

Expr DiffForm::coefficient(const Word& w) const {
  Word s = w;
  int sign = 1;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j + 1 < s.size() - i; ++j)
      if (s[j + 1] < s[j]) {
        std::swap(s[j], s[j + 1]);
        sign = -sign;
      }
  auto it = terms_.find(s);
  if (it == terms_.end()) return Expr();
  return sign > 0 ? it->second : -it->second;
}

void DiffForm::add(Word w, const Expr& c) {
  if (c.is_zero()) return;
  if (static_cast<int>(w.size()) != degree_)
    throw FormError("adding a term of degree " + std::to_string(w.size()) + " to a " +
                    std::to_string(degree_) + "-form");
  int sign = 1;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j + 1 < w.size() - i; ++j) {
      if (w[j] == w[j + 1]) return;
      if (w[j + 1] < w[j]) {
        std::swap(w[j], w[j + 1]);
        sign = -sign;
      }
    }
  for (std::size_t j = 0; j + 1 < w.size(); ++j)
    if (w[j] == w[j + 1]) return;
  auto it = terms_.find(w);
  Expr v = sign > 0 ? c : -c;
  if (it == terms_.end()) {
    terms_.emplace(std::move(w), v);
  } else {
    it->second += v;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

DiffForm operator+(const DiffForm& a, const DiffForm& b) {
  if (a.is_zero() && a.degree_ != b.degree_) return b;
  if (b.is_zero() && a.degree_ != b.degree_) return a;
  if (a.degree_ != b.degree_) throw FormError("adding forms of different degree");
  DiffForm r = a;
  for (const auto& [w, c] : b.terms_) r.add(w, c);
  return r;
}

DiffForm DiffForm::operator-() const {
  DiffForm r(degree_);
  for (const auto& [w, c] : terms_) r.terms_.emplace(w, -c);
  return r;
}

DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }

DiffForm operator*(const Expr& c, const DiffForm& a) {
  DiffForm r(a.degree_);
  if (c.is_zero()) return r;
  for (const auto& [w, v] : a.terms_) r.add(w, c * v);
  return r;
}

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  DiffForm r(a.degree_ + b.degree_);
  for (const auto& [wa, ca] : a.terms_)
    for (const auto& [wb, cb] : b.terms_) {
      DiffForm::Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      r.add(std::move(w), ca * cb);
    }
  return r;
}

DiffForm DiffForm::map_coefficients(const std::function<Expr(const Expr&)>& f) const {
  DiffForm r(degree_);
  for (const auto& [w, c] : terms_) r.add(w, f(c));
  return r;
}

DiffForm DiffForm::substitute_generators(const std::map<Sym, DiffForm>& images) const {
  DiffForm r(degree_);
  for (const auto& [w, c] : terms_) {
    DiffForm acc = DiffForm::function(c);
    for (Sym g : w) {
      auto it = images.find(g);
      if (it == images.end()) {
        acc = wedge(acc, DiffForm::gen(g));
      } else {
        if (it->second.degree() != 1 && !it->second.is_zero())
          throw FormError("generator images must be 1-forms");
        DiffForm img = it->second;
        if (img.is_zero()) img = DiffForm(1);
        acc = wedge(acc, img);
      }
    }
    r = r + acc;
  }
  return r;
}

std::vector<Sym> DiffForm::generators() const {
  std::set<Sym> s;
  for (const auto& [w, c] : terms_) s.insert(w.begin(), w.end());
  return {s.begin(), s.end()};
}

// ---------------------------------------------------------------------------
// Exterior derivative

namespace {

// Total derivative along a coordinate of the 5-dimensional jet space; group
// jets are shifted as jets of xi(x) and phi(x, u).
Expr total(const Expr& e, int axis) {
  static const std::array<Sym, 5> axes{base::x(), base::u(), base::p(), base::q(), base::r()};
  std::map<Sym, Expr> img;
  for (Sym s : e.symbols()) {
    if (s == axes[static_cast<std::size_t>(axis)]) {
      img.emplace(s, Expr(1L));
    } else if (auto gi = group_index(s)) {
      if (axis == 0)
        img.emplace(s, Expr(gi->is_xi ? xi_symbol(gi->i + 1) : phi_symbol(gi->i + 1, gi->j)));
      else if (axis == 1 && !gi->is_xi)
        img.emplace(s, Expr(phi_symbol(gi->i, gi->j + 1)));
    }
  }
  return derivation(e, [&](Sym s) -> const Expr* {
    auto it = img.find(s);
    return it == img.end() ? nullptr : &it->second;
  });
}

DiffForm d_generator(Sym g, const DifferentialRules& rules) {
  auto it = rules.generators.find(g);
  if (it != rules.generators.end()) return it->second;
  for (int a = 0; a < 5; ++a)
    if (g == coordinate_differential(a)) return DiffForm(2);
  if (auto src = group_contact_source(g)) {
    auto gi = *group_index(*src);
    DiffForm r(2);
    Sym dx = coordinate_differential(0), du = coordinate_differential(1);
    if (gi.is_xi) {
      r.add({dx, group_contact(xi_symbol(gi.i + 1))}, Expr(1L));
    } else {
      r.add({dx, group_contact(phi_symbol(gi.i + 1, gi.j))}, Expr(1L));
      r.add({du, group_contact(phi_symbol(gi.i, gi.j + 1))}, Expr(1L));
    }
    return r;
  }
  throw FormError("no exterior derivative declared for generator " + sym_name(g));
}

}  // namespace

DiffForm horizontal_differential(const Expr& f) {
  DiffForm r(1);
  for (int a = 0; a < 5; ++a) r.add({coordinate_differential(a)}, total(f, a));
  return r;
}

DiffForm group_differential(const Expr& f) {
  DiffForm r(1);
  for (Sym s : f.symbols())
    if (group_index(s)) r.add({group_contact(s)}, differentiate(f, s));
  return r;
}

DiffForm d_of(const Expr& f, const DifferentialRules& rules) {
  DiffForm r(1);
  for (Sym s : f.symbols()) {
    Expr c = differentiate(f, s);
    auto it = rules.functions.find(s);
    if (it != rules.functions.end()) {
      r = r + c * it->second;
    } else if (sym_kind(s) == SymKind::base) {
      static const std::array<Sym, 5> axes{base::x(), base::u(), base::p(), base::q(), base::r()};
      for (int a = 0; a < 5; ++a)
        if (s == axes[static_cast<std::size_t>(a)]) r.add({coordinate_differential(a)}, c);
    } else if (auto gi = group_index(s)) {
      r.add({coordinate_differential(0)},
            c * Expr(gi->is_xi ? xi_symbol(gi->i + 1) : phi_symbol(gi->i + 1, gi->j)));
      if (!gi->is_xi) r.add({coordinate_differential(1)}, c * Expr(phi_symbol(gi->i, gi->j + 1)));
      r.add({group_contact(s)}, c);
    } else {
      throw FormError("no differential declared for " + sym_name(s));
    }
  }
  return r;
}

DiffForm ext_derivative(const DiffForm& a, const DifferentialRules& rules) {
  DiffForm r(a.degree() + 1);
  for (const auto& [w, c] : a.terms()) {
    DiffForm tail(static_cast<int>(w.size()));
    tail.add(w, Expr(1L));
    r = r + wedge(d_of(c, rules), tail);
    for (std::size_t k = 0; k < w.size(); ++k) {
      DiffForm pre(static_cast<int>(k));
      pre.add(DiffForm::Word(w.begin(), w.begin() + static_cast<long>(k)), Expr(1L));
      DiffForm post(static_cast<int>(w.size() - k - 1));
      post.add(DiffForm::Word(w.begin() + static_cast<long>(k) + 1, w.end()), Expr(1L));
      DiffForm piece = wedge(wedge(pre, d_generator(w[k], rules)), post);
      r = r + ((k % 2 == 0 ? c : -c) * piece);
    }
  }
  return r;
}

std::string render_form(const DiffForm& a) {
  if (a.is_zero()) return "0";
  std::string out;
  for (const auto& [w, c] : a.terms()) {
    if (!out.empty()) out += " + ";
    std::string word;
    for (Sym g : w) {
      if (!word.empty()) word += "^";
      word += sym_name(g);
    }
    std::string coef = render_text(c);
    if (word.empty())
      out += coef;
    else if (coef == "1")
      out += word;
    else
      out += "(" + coef + ")*" + word;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Invariant derivations on group-contact forms

namespace {

Expr inv_dx_fn(const Expr& c) {
  const Expr xi1(xi_symbol(1)), phix(phi_symbol(1, 0)), phiu(phi_symbol(0, 1));
  return (total(c, 0) - phix / phiu * total(c, 1)) / xi1;
}

Expr inv_du_fn(const Expr& c) { return total(c, 1) / Expr(phi_symbol(0, 1)); }

template <class OnFn, class OnGen>
DiffForm derive(const DiffForm& a, OnFn on_fn, OnGen on_gen) {
  DiffForm r(a.degree());
  for (const auto& [w, c] : a.terms()) {
    r.add(w, on_fn(c));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const DiffForm img = on_gen(w[k]);
      for (const auto& [g, gc] : img.terms()) {
        DiffForm::Word nw = w;
        nw[k] = g.front();
        r.add(std::move(nw), c * gc);
      }
    }
  }
  return r;
}

DiffForm contact_shift(Sym g, int axis) {
  auto src = group_contact_source(g);
  if (!src) throw FormError("invariant derivations act on group-contact forms only");
  auto gi = *group_index(*src);
  if (axis == 0)
    return DiffForm::gen(group_contact(gi.is_xi ? xi_symbol(gi.i + 1) : phi_symbol(gi.i + 1, gi.j)));
  if (gi.is_xi) return DiffForm(1);
  return DiffForm::gen(group_contact(phi_symbol(gi.i, gi.j + 1)));
}

}  // namespace

DiffForm invariant_dx(const DiffForm& a) {
  const Expr xi1(xi_symbol(1)), phix(phi_symbol(1, 0)), phiu(phi_symbol(0, 1));
  const Expr ratio = phix / phiu;
  return derive(a, inv_dx_fn, [&](Sym g) {
    DiffForm sx = contact_shift(g, 0), su = contact_shift(g, 1);
    return xi1.inverse() * (sx - ratio * su);
  });
}

DiffForm invariant_du(const DiffForm& a) {
  const Expr inv = Expr(phi_symbol(0, 1)).inverse();
  return derive(a, inv_du_fn, [&](Sym g) { return inv * contact_shift(g, 1); });
}

// ---------------------------------------------------------------------------
// Explicit Maurer-Cartan forms

namespace {
std::mutex g_explicit_mu;
}

ExplicitMc::ExplicitMc() {
  Prolonged z = prolonged_action(GroupJet::formal(3));
  z_ = {z.X, z.U, z.P, z.Q, z.R};
  for (int a = 0; a < 5; ++a) sigma_[static_cast<std::size_t>(a)] = horizontal_differential(z_[static_cast<std::size_t>(a)]);
}

const ExplicitMc& ExplicitMc::shared() {
  static const ExplicitMc m;
  return m;
}

const DiffForm& ExplicitMc::mu_x(int i) const {
  {
    std::lock_guard lock(g_explicit_mu);
    auto it = mx_.find(i);
    if (it != mx_.end()) return it->second;
  }
  DiffForm v = i == 0 ? DiffForm::gen(group_contact(xi_symbol(0))) : invariant_dx(mu_x(i - 1));
  std::lock_guard lock(g_explicit_mu);
  return mx_.emplace(i, std::move(v)).first->second;
}

const DiffForm& ExplicitMc::mu_u(int i, int j) const {
  {
    std::lock_guard lock(g_explicit_mu);
    auto it = mu_.find({i, j});
    if (it != mu_.end()) return it->second;
  }
  DiffForm v;
  if (i == 0 && j == 0)
    v = DiffForm::gen(group_contact(phi_symbol(0, 0)));
  else if (i > 0)
    v = invariant_du(mu_u(i - 1, j));
  else
    v = invariant_dx(mu_u(0, j - 1));
  std::lock_guard lock(g_explicit_mu);
  return mu_.emplace(std::make_pair(i, j), std::move(v)).first->second;
}

Expr ExplicitMc::lifted(int axis) const { return z_.at(static_cast<std::size_t>(axis)); }
const DiffForm& ExplicitMc::sigma(int axis) const { return sigma_.at(static_cast<std::size_t>(axis)); }

DiffForm ExplicitMc::instantiate(const Expr& linear) const {
  Bindings coords{{lifted_coordinate(2), z_[2]}, {lifted_coordinate(3), z_[3]},
                  {lifted_coordinate(4), z_[4]}};
  DiffForm formal = DiffForm::from_linear(linear);
  DiffForm r(1);
  for (const auto& [w, c] : formal.terms()) {
    auto mi = mu_index(w.front());
    if (!mi) throw FormError("cannot instantiate generator " + sym_name(w.front()));
    const DiffForm& m = mi->is_x ? mu_x(mi->i) : mu_u(mi->i, mi->j);
    r = r + substitute(c, coords) * m;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Maurer-Cartan relations

namespace {

Expr lift_field_jets(const Expr& e) {
  Bindings b;
  for (Sym s : e.symbols()) {
    const std::string& n = sym_name(s);
    if (s == base::p()) {
      b.emplace(s, Expr(lifted_coordinate(2)));
    } else if (s == base::q()) {
      b.emplace(s, Expr(lifted_coordinate(3)));
    } else if (s == base::r()) {
      b.emplace(s, Expr(lifted_coordinate(4)));
    } else if (n.rfind("alpha", 0) == 0) {
      int k = n == "alpha" ? 0 : static_cast<int>(n.size() - 6);
      b.emplace(s, Expr(mu_x(k)));
    } else if (n.rfind("beta", 0) == 0) {
      int i = 0, j = 0;
      if (n != "beta")
        for (char ch : n.substr(5)) (ch == 'x' ? i : j)++;
      b.emplace(s, Expr(mu_u(j, i)));
    } else {
      throw FormError("unexpected symbol " + n + " in a determining equation");
    }
  }
  return substitute(e, b);
}

McRelationSet relation_set(const std::array<Expr, 3>& det) {
  McRelationSet m;
  auto put = [&](const std::string& k, const Expr& v) {
    m.order.push_back(k);
    m.relations.emplace(k, v);
  };
  for (const char* k : {"mu^x_U", "mu^x_P", "mu^x_Q", "mu^x_R", "mu^u_P", "mu^u_Q", "mu^u_R"})
    put(k, Expr());
  put("mu^p", lift_field_jets(det[0]));
  put("mu^q", lift_field_jets(det[1]));
  put("mu^r", lift_field_jets(det[2]));
  return m;
}

}  // namespace

McRelationSet mc_relations() {
  VectorField v{Expr(alpha_symbol(0)), Expr(beta_symbol(0, 0))};
  return relation_set(determining_closed_forms(v));
}

McRelationSet mc_relations_display() {
  const Expr P(lifted_coordinate(2)), Q(lifted_coordinate(3)), R(lifted_coordinate(4));
  auto mx = [](int i) { return Expr(mu_x(i)); };
  auto mu = [](int i, int j) { return Expr(mu_u(i, j)); };
  McRelationSet m = relation_set({Expr(), Expr(), Expr()});
  m.relations["mu^p"] = P * (mu(1, 0) - mx(1)) + mu(0, 1);
  m.relations["mu^q"] =
      mu(2, 0) * P * P + (2 * mu(1, 1) - mx(2)) * P + (mu(1, 0) - 2 * mx(1)) * Q + mu(0, 2);
  m.relations["mu^r"] = mu(3, 0) * P.pow(3) + 3 * mu(2, 1) * P * P + (3 * mu(1, 2) - mx(3)) * P +
                        3 * (mu(1, 1) - mx(2)) * Q + (mu(1, 0) - 3 * mx(1)) * R +
                        3 * mu(2, 0) * P * Q + mu(0, 2);
  return m;
}

Expr formal_shift(const Expr& e, int axis) {
  if (axis >= 2) return differentiate(e, lifted_coordinate(axis));
  std::map<Sym, Expr> img;
  for (Sym s : e.symbols()) {
    auto mi = mu_index(s);
    if (!mi) continue;
    if (axis == 0)
      img.emplace(s, Expr(mi->is_x ? mu_x(mi->i + 1) : mu_u(mi->i, mi->j + 1)));
    else if (!mi->is_x)
      img.emplace(s, Expr(mu_u(mi->i + 1, mi->j)));
  }
  return derivation(e, [&](Sym s) -> const Expr* {
    auto it = img.find(s);
    return it == img.end() ? nullptr : &it->second;
  });
}

namespace {

Expr base_relation(int a) {
  static const McRelationSet rel = mc_relations();
  switch (a) {
    case 0: return Expr(mu_x(0));
    case 1: return Expr(mu_u(0, 0));
    case 2: return rel.relations.at("mu^p");
    case 3: return rel.relations.at("mu^q");
    case 4: return rel.relations.at("mu^r");
  }
  throw FormError("axis out of range");
}

}  // namespace

Expr mu_component(int a, int b) { return formal_shift(base_relation(a), b); }

std::optional<Expr> mu_component_display(int a, int b) {
  const Expr P(lifted_coordinate(2)), Q(lifted_coordinate(3)), R(lifted_coordinate(4));
  auto mx = [](int i) { return Expr(mu_x(i)); };
  auto mu = [](int i, int j) { return Expr(mu_u(i, j)); };
  if (a == 2) {
    if (b == 0) return P * (mu(1, 1) - mx(2)) + mu(0, 2);
    if (b == 1) return P * mu(2, 0) + mu(1, 1);
    if (b == 2) return mu(1, 0) - mx(1);
  } else if (a == 3) {
    if (b == 0)
      return mu(2, 1) * P * P + (2 * mu(1, 2) - mx(2)) * P + (mu(1, 1) - 2 * mx(2)) * Q + mu(0, 2);
    if (b == 1) return mu(3, 0) * P * P + 2 * mu(2, 1) * P + mu(2, 0) * Q + mu(1, 2);
    if (b == 2) return 2 * mu(2, 0) * P + 2 * mu(1, 1) - mx(2);
    if (b == 3) return mu(1, 0) - 2 * mu(0, 2);
  } else if (a == 4) {
    if (b == 0)
      return mu(3, 1) * P.pow(3) + 3 * mu(2, 2) * P * P + (3 * mu(1, 3) - mx(2)) * P +
             3 * (mu(1, 2) - mx(2)) * Q + (mu(1, 1) - 3 * mx(2)) * R + 3 * mu(2, 1) * P * Q +
             mu(0, 3);
    if (b == 1)
      return mu(4, 0) * P.pow(3) + 3 * mu(3, 1) * P * P + 3 * mu(2, 2) * P + 3 * mu(2, 1) * Q +
             mu(2, 0) * R + 3 * mu(2, 0) * P * Q + mu(1, 2);
    if (b == 2)
      return 3 * mu(3, 0) * P * P + 6 * mu(2, 1) * P + 3 * mu(1, 2) - mx(2) + 3 * mu(2, 0) * Q;
    if (b == 3) return 3 * (mu(2, 0) * P + mu(1, 1) - mx(2));
    if (b == 4) return mu(1, 0) - 3 * mx(2);
  }
  return std::nullopt;
}

}  // namespace mf
