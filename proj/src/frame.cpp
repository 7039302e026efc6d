#include <algorithm>
#include <future>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "mframe/frame.hpp"
#include "mframe/parse.hpp"

namespace mf {

// ---------------------------------------------------------------------------
// Cross-section tables

const std::vector<StageEquation>& cross_section() {
  static const std::vector<StageEquation> eqs = {
      {"stage-1", "Q", 0, xi_symbol(2)},       {"stage-1", "PQ", 0, phi_symbol(0, 2)},
      {"stage-1", "P", 0, xi_symbol(3)},       {"stage-1", "XQ", 0, phi_symbol(2, 1)},
      {"stage-1", "U", 0, phi_symbol(3, 1)},   {"stage-1", "X", 0, phi_symbol(4, 0)},
      {"stage-tail", "XP", 0, xi_symbol(4)},   {"stage-tail", "XX", 0, phi_symbol(5, 0)},
      {"stage-tail", "XU", 0, phi_symbol(4, 1)}, {"stage-tail", "UU", 0, phi_symbol(3, 2)},
      {"stage-tail", "XXP", 0, xi_symbol(5)},  {"stage-tail", "UP", 0, phi_symbol(2, 2)},
      {"stage-2", "UQ", 0, phi_symbol(1, 2)},
  };
  return eqs;
}

const std::vector<StageEquation>& generic_stage(bool qq_vanishes) {
  static const std::vector<StageEquation> flat_qq = {
      {"generic", "XXPQ", 0, phi_symbol(1, 1)},
      {"generic", "XXQ", 1, xi_symbol(1)},
      {"generic", "XPQ", 1, phi_symbol(0, 1)},
  };
  static const std::vector<StageEquation> curved_qq = {
      {"generic", "XPQ", 0, phi_symbol(1, 1)},
      {"generic", "XXQ", 1, xi_symbol(1)},
      {"generic", "QQ", 1, phi_symbol(0, 1)},
  };
  return qq_vanishes ? flat_qq : curved_qq;
}

const std::vector<std::pair<Sym, Q>>& residual_parameters() {
  static const std::vector<std::pair<Sym, Q>> r = {
      {xi_symbol(1), Q(1)}, {phi_symbol(0, 1), Q(1)}, {phi_symbol(1, 1), Q(0)}};
  return r;
}

namespace {

const std::vector<std::string> kFundamental = {"QQ", "XPQ", "XXQ"};
const std::vector<std::string> kAuxiliary = {"PP"};
const std::vector<std::string> kExtras = {"QQ", "XPQ", "XXXQ", "XXUQ", "XXPQ", "XXQQ"};

bool is_residual(Sym s) {
  for (const auto& [r, v] : residual_parameters())
    if (r == s) return true;
  return false;
}

Point reference_point() {
  Point pt;
  for (const auto& [s, v] : residual_parameters()) pt.emplace(s, v);
  return pt;
}

std::string word_of(const MultiIndex& s) {
  std::string w;
  w.append(static_cast<std::size_t>(s[0]), 'X');
  w.append(static_cast<std::size_t>(s[1]), 'U');
  w.append(static_cast<std::size_t>(s[2]), 'P');
  w.append(static_cast<std::size_t>(s[3]), 'Q');
  return w;
}

template <class Map, class Key, class Make>
const Expr& cached(Map& cache, std::shared_mutex& mu, const Key& key, Make make) {
  {
    std::shared_lock lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  Expr v = make();
  std::unique_lock lock(mu);
  return cache.emplace(key, std::move(v)).first->second;
}

Poly truncate(const Poly& p, int n) {
  std::vector<Term> keep;
  for (const auto& t : p.terms())
    if (t.m.degree() <= n) keep.push_back(t);
  return Poly::from_terms(std::move(keep));
}

}  // namespace

const Expr& origin_invariant(const std::string& word) {
  static std::map<std::string, Expr> cache;
  static std::shared_mutex mu;
  return cached(cache, mu, word, [&] {
    Expr e = LiftedOperators::formal().invariant(word);
    Bindings b{{base::p(), Expr()},         {base::q(), Expr()},
               {xi_symbol(0), Expr()},      {phi_symbol(0, 0), Expr()},
               {phi_symbol(1, 0), Expr()},  {phi_symbol(2, 0), Expr()},
               {phi_symbol(3, 0), Expr()},  {fjet_symbol({0, 0, 0, 0}), Expr()}};
    return substitute(e, b);
  });
}

const Expr& transported_symbolic(const MultiIndex& s) {
  static std::map<MultiIndex, Expr> cache;
  static std::shared_mutex mu;
  return cached(cache, mu, s, [&] {
    Expr e = LiftedOperators::formal().invariant(word_of(s));
    Bindings b;
    for (Sym g : e.symbols()) {
      auto gi = group_index(g);
      if (!gi) continue;
      Expr v;
      if (gi->is_xi && gi->i == 1) v = Expr(1L);
      else if (!gi->is_xi && gi->i == 0 && gi->j == 1) v = Expr(1L);
      else if (!gi->is_xi && gi->j == 0 && gi->i == 1) v = -Expr(base::p());
      else if (!gi->is_xi && gi->j == 0 && gi->i == 2) v = -Expr(base::q());
      else if (!gi->is_xi && gi->j == 0 && gi->i == 3) v = -Expr(fjet_symbol({0, 0, 0, 0}));
      b.emplace(g, v);
    }
    return substitute(e, b);
  });
}

std::map<MultiIndex, Q> transported_jet(const JetPoint& pt, int order) {
  const Q& p0 = pt.base[2];
  const Q& q0 = pt.base[3];
  const Q& F0 = pt.value({0, 0, 0, 0});
  Poly X = Poly::var(base::x()), U = Poly::var(base::u()), P = Poly::var(base::p()),
       Qv = Poly::var(base::q());
  std::array<Poly, 4> shift = {
      X,
      U + X.scaled(p0) + X.pow(2).scaled(q0 / 2) + X.pow(3).scaled(F0 / 6),
      P + X.scaled(q0) + X.pow(2).scaled(F0 / 2),
      Qv + X.scaled(F0)};
  std::array<std::vector<Poly>, 4> powers;
  for (int a = 0; a < 4; ++a) {
    powers[a].push_back(Poly(Q(1)));
    for (int k = 1; k <= order; ++k)
      powers[a].push_back(truncate(powers[a].back() * shift[a], order));
  }
  Poly taylor;
  for (const auto& s : multi_indices(order)) {
    const Q& v = pt.value(s);
    if (sgn(v) == 0) continue;
    Q fact = 1;
    for (int a = 0; a < 4; ++a)
      for (int k = 2; k <= s[a]; ++k) fact *= k;
    Poly term(v / fact);
    for (int a = 0; a < 4; ++a)
      if (s[a] > 0) term = truncate(term * powers[a][s[a]], order);
    taylor = taylor + term;
  }
  std::map<MultiIndex, Q> out;
  const std::array<Sym, 4> axes{base::x(), base::u(), base::p(), base::q()};
  for (const auto& s : multi_indices(order)) {
    Monomial m;
    Q fact = 1;
    for (int a = 0; a < 4; ++a) {
      if (s[a]) m = m * Monomial::var(axes[a], s[a]);
      for (int k = 2; k <= s[a]; ++k) fact *= k;
    }
    Q c = 0;
    for (const auto& t : taylor.terms())
      if (t.m == m) c = t.c;
    out.emplace(s, total_order(s) == 0 ? Q(0) : c * fact);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact arithmetic in Q(theta), theta^3 = v

namespace {

struct Cubic {
  std::array<Q, 3> a{Q(0), Q(0), Q(0)};
  std::optional<Q> v;

  Cubic() = default;
  explicit Cubic(const Q& c) { a[0] = c; }
  static Cubic theta(const Q& rad) {
    Cubic t;
    t.a[1] = 1;
    t.v = rad;
    return t;
  }
  bool is_zero() const { return sgn(a[0]) == 0 && sgn(a[1]) == 0 && sgn(a[2]) == 0; }
  static std::optional<Q> field(const Cubic& x, const Cubic& y) { return x.v ? x.v : y.v; }

  friend Cubic operator+(const Cubic& x, const Cubic& y) {
    Cubic r;
    r.v = field(x, y);
    for (int i = 0; i < 3; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
  }
  friend Cubic operator-(const Cubic& x, const Cubic& y) {
    Cubic r;
    r.v = field(x, y);
    for (int i = 0; i < 3; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
  }
  friend Cubic operator*(const Cubic& x, const Cubic& y) {
    Cubic r;
    r.v = field(x, y);
    std::array<Q, 5> c{Q(0), Q(0), Q(0), Q(0), Q(0)};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i + j] += x.a[i] * y.a[j];
    Q vv = r.v ? *r.v : Q(0);
    if ((sgn(c[3]) != 0 || sgn(c[4]) != 0) && !r.v) throw FrameError("cubic extension without radicand");
    r.a = {c[0] + vv * c[3], c[1] + vv * c[4], c[2]};
    return r;
  }
  Cubic inverse() const {
    if (sgn(a[1]) == 0 && sgn(a[2]) == 0) {
      if (sgn(a[0]) == 0) throw DivisionByZero("division by zero in Q(cbrt v)");
      Cubic r(1 / a[0]);
      r.v = v;
      return r;
    }
    const Q& vv = *v;
    Q n = a[0] * a[0] * a[0] + vv * a[1] * a[1] * a[1] + vv * vv * a[2] * a[2] * a[2] -
          3 * vv * a[0] * a[1] * a[2];
    if (sgn(n) == 0) throw DivisionByZero("zero norm in Q(cbrt v)");
    Cubic r;
    r.v = v;
    r.a = {(a[0] * a[0] - vv * a[1] * a[2]) / n, (vv * a[2] * a[2] - a[0] * a[1]) / n,
           (a[1] * a[1] - a[0] * a[2]) / n};
    return r;
  }
  friend Cubic operator/(const Cubic& x, const Cubic& y) { return x * y.inverse(); }
  std::string str() const {
    return "[" + q_to_string(a[0]) + ", " + q_to_string(a[1]) + ", " + q_to_string(a[2]) + "]";
  }
};

std::optional<Q> rational_cube_root(const Q& v) {
  auto root = [](const mpz_class& z) -> std::optional<mpz_class> {
    mpz_class r;
    mpz_class az = abs(z);
    if (mpz_root(r.get_mpz_t(), az.get_mpz_t(), 3) == 0) return std::nullopt;
    return sgn(z) < 0 ? mpz_class(-r) : r;
  };
  auto n = root(v.get_num());
  auto d = root(v.get_den());
  if (!n || !d) return std::nullopt;
  Q r(*n, *d);
  r.canonicalize();
  return r;
}

Q qpow(const Q& b, int e) {
  Q r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= b;
  return e < 0 ? Q(1 / r) : r;
}

int floor_div3(int k) { return k >= 0 ? k / 3 : -((-k + 2) / 3); }

}  // namespace

Q CubicValue::cube() const { return coeff * coeff * coeff * qpow(radicand, power); }

std::string CubicValue::str() const {
  if (power == 0 || sgn(coeff) == 0) return q_to_string(coeff);
  std::string t = "cbrt(" + q_to_string(radicand) + ")";
  if (power == 2) t += "^2";
  return coeff == 1 ? t : q_to_string(coeff) + "*" + t;
}

bool operator==(const CubicValue& a, const CubicValue& b) {
  if (sgn(a.coeff) == 0 || sgn(b.coeff) == 0) return sgn(a.coeff) == sgn(b.coeff);
  // Equal real numbers have equal cubes and equal signs.
  return sgn(a.coeff) == sgn(b.coeff) && a.cube() == b.cube();
}

std::string BranchTag::str() const {
  switch (kind) {
    case Branch::generic: return "generic";
    case Branch::wunschmann_flat: return "wunschmann-flat";
    case Branch::non_generic: return "non-generic(" + detail + ")";
  }
  return "?";
}

std::string verdict_str(Verdict v) {
  switch (v) {
    case Verdict::linearizable: return "linearizable";
    case Verdict::not_linearizable: return "not-linearizable";
    case Verdict::non_generic_partial: return "non-generic-partial";
  }
  return "?";
}

std::string equivalence_str(Equivalence e) {
  switch (e) {
    case Equivalence::necessarily_inequivalent: return "necessarily-inequivalent";
    case Equivalence::consistent: return "consistent";
    case Equivalence::verified_by_hint: return "verified-by-hint";
  }
  return "?";
}

Q FrameSolution::reference(const std::string& word) const {
  return evaluate(fundamental.at(word), reference_point());
}

// ---------------------------------------------------------------------------
// The normalization cascade

namespace {

using Coefficients = std::function<Expr(const std::string&)>;

// Solves one affine stage equation and back-substitutes into earlier solutions.
StageRecord solve_stage(const StageEquation& eq, const Coefficients& coef,
                        std::map<Sym, Expr>& solved) {
  Expr E = substitute(coef(eq.word), solved) - Expr(static_cast<long>(eq.value));
  const std::string target = sym_name(eq.target);
  if (!E.depends_on(eq.target)) {
    if (!origin_invariant(eq.word).depends_on(eq.target))
      throw FrameError("triangularity violation: R_" + eq.word + " does not involve " + target);
    throw DegeneratePoint("R_" + eq.word + " has a vanishing coefficient of " + target +
                              " at this point",
                          eq.word);
  }
  if (E.den().depends_on(eq.target))
    throw FrameError("R_" + eq.word + " is not affine in " + target);
  auto cs = coefficients_in(E, eq.target);
  if (cs.size() != 2) throw FrameError("R_" + eq.word + " is not affine in " + target);
  if (cs[1].is_zero())
    throw DegeneratePoint("R_" + eq.word + " has a vanishing leading coefficient", eq.word);
  Expr value = -cs[0] / cs[1];
  Bindings one{{eq.target, value}};
  for (auto& [s, e] : solved) e = substitute(e, one);
  solved[eq.target] = value;
  return {eq.stage, eq.word, eq.value, target, cs[1], Expr()};
}

struct Cascade {
  std::map<Sym, Expr> solved;
  std::vector<StageRecord> stages;
  std::map<std::string, Expr> fundamental;
};

Cascade run_cascade(const Coefficients& coef) {
  Cascade c;
  for (const auto& eq : cross_section()) c.stages.push_back(solve_stage(eq, coef, c.solved));
  for (const auto& [s, e] : c.solved)
    for (Sym t : e.symbols())
      if (group_index(t) && !is_residual(t))
        throw FrameError("solution for " + sym_name(s) + " still involves " + sym_name(t));
  for (auto& st : c.stages) {
    const StageEquation* eq = nullptr;
    for (const auto& e : cross_section())
      if (e.word == st.word) eq = &e;
    st.residual = substitute(coef(st.word), c.solved) - Expr(static_cast<long>(eq->value));
    if (!st.residual.is_zero())
      throw FrameError("cross-section residual of R_" + st.word + " is not zero");
  }
  for (const auto& w : kFundamental) c.fundamental[w] = substitute(coef(w), c.solved);
  for (const auto& w : kAuxiliary) c.fundamental[w] = substitute(coef(w), c.solved);
  return c;
}

BranchTag classify_values(bool qq, bool xpq, bool xxq) {
  if (!qq && !xpq && !xxq) return {Branch::wunschmann_flat, ""};
  if (xpq && xxq) return {Branch::generic, ""};
  std::string d;
  auto add = [&](const char* n, bool nz) {
    if (!d.empty()) d += ",";
    d += std::string(n) + (nz ? "!=0" : "=0");
  };
  add("R_QQ", qq);
  add("R_XPQ", xpq);
  add("R_XXQ", xxq);
  return {Branch::non_generic, d};
}

// Reads c * xi_x^a * phi_u^b off a single-term expression in the residual parameters.
struct MonomialForm {
  Q c;
  int a = 0, b = 0;
};

std::optional<MonomialForm> monomial_form(const Expr& e) {
  if (e.is_zero()) return MonomialForm{Q(0), 0, 0};
  if (!e.has_monomial_den() || e.num().size() != 1) return std::nullopt;
  auto terms = e.laurent_terms();
  const Term& t = terms.front();
  MonomialForm f{t.c, 0, 0};
  for (const auto& [id, k] : t.m.entries()) {
    if (Sym{id} == xi_symbol(1)) f.a = k;
    else if (Sym{id} == phi_symbol(0, 1)) f.b = k;
    else return std::nullopt;
  }
  return f;
}

void solve_generic(FrameSolution& fs, const Coefficients& coef) {
  const bool qq_vanishes = fs.fundamental.at("QQ").is_zero();
  const auto& eqs = generic_stage(qq_vanishes);
  FrameSolution::Generic g;
  g.phi_xu_word = eqs[0].word;
  g.phi_u_word = eqs[2].word;
  std::map<Sym, Expr> solved = fs.solved;
  g.stages.push_back(solve_stage(eqs[0], coef, solved));
  g.phi_xu = solved.at(phi_symbol(1, 1));
  auto scale = monomial_form(substitute(coef(eqs[1].word), solved));
  auto unit = monomial_form(substitute(coef(eqs[2].word), solved));
  if (!scale || !unit || scale->a != -3 || scale->b != 0 || std::abs(unit->b) != 1)
    throw FrameError("unexpected weights of R_" + eqs[1].word + " / R_" + eqs[2].word +
                     " in the generic branch");
  if (sgn(scale->c) == 0 || sgn(unit->c) == 0)
    throw DegeneratePoint("generic normalization is singular", eqs[1].word);
  g.radicand = scale->c;
  // unit->c * theta^a * phi_u^b = 1 with b = +-1.
  if (unit->b == -1) {
    g.phi_u_scale = unit->c;
    g.phi_u_power = unit->a;
  } else {
    g.phi_u_scale = 1 / unit->c;
    g.phi_u_power = -unit->a;
  }
  g.stages.push_back({"generic", eqs[1].word, 1, sym_name(xi_symbol(1)), Expr(g.radicand), Expr()});
  g.stages.push_back({"generic", eqs[2].word, 1, sym_name(phi_symbol(0, 1)), Expr(unit->c), Expr()});

  auto rational_root = rational_cube_root(g.radicand);
  for (const auto& w : kExtras) {
    auto f = monomial_form(substitute(coef(w), solved));
    if (!f) throw FrameError("R_" + w + " is not a relative invariant after normalization");
    int k = f->a + g.phi_u_power * f->b;
    int m = floor_div3(k);
    CubicValue cv{f->c * qpow(g.phi_u_scale, f->b) * qpow(g.radicand, m), k - 3 * m, g.radicand};
    if (rational_root) {
      cv.coeff *= qpow(*rational_root, cv.power);
      cv.power = 0;
    }
    if (cv.power == 0 || sgn(cv.coeff) == 0) cv = CubicValue{cv.coeff, 0, Q(1)};
    g.extras.emplace(w, cv);
  }

  // Substitute the full frame back, computing in Q(theta).
  Cubic theta = rational_root ? Cubic(*rational_root) : Cubic::theta(g.radicand);
  Cubic theta_pow(Q(1));
  for (int i = 0; i < std::abs(g.phi_u_power); ++i) theta_pow = theta_pow * theta;
  if (g.phi_u_power < 0) theta_pow = Cubic(Q(1)) / theta_pow;
  Cubic phiu = Cubic(g.phi_u_scale) * theta_pow;
  auto lookup_base = [&](Sym s) -> Cubic {
    if (s == xi_symbol(1)) return theta;
    if (s == phi_symbol(0, 1)) return phiu;
    throw FrameError("unexpected symbol " + sym_name(s) + " in the generic frame");
  };
  Cubic phixu = evaluate_as<Cubic>(g.phi_xu, lookup_base);
  std::map<Sym, Cubic> frame_values;
  for (const auto& [s, e] : fs.solved) {
    frame_values.emplace(s, evaluate_as<Cubic>(e, [&](Sym t) -> Cubic {
                           if (t == phi_symbol(1, 1)) return phixu;
                           return lookup_base(t);
                         }));
  }
  auto full_lookup = [&](Sym s) -> Cubic {
    if (s == phi_symbol(1, 1)) return phixu;
    if (s == xi_symbol(1) || s == phi_symbol(0, 1)) return lookup_base(s);
    auto it = frame_values.find(s);
    if (it == frame_values.end()) throw FrameError("unsolved group jet " + sym_name(s));
    return it->second;
  };
  auto check = [&](const std::string& word, int target) {
    Cubic v = evaluate_as<Cubic>(coef(word), full_lookup) - Cubic(Q(target));
    g.residuals_in_extension.push_back("R_" + word + ": " + v.str());
    if (!v.is_zero()) throw FrameError("generic-branch residual of R_" + word + " is not zero");
  };
  for (const auto& eq : cross_section()) check(eq.word, eq.value);
  for (const auto& eq : eqs) check(eq.word, eq.value);
  fs.generic = std::move(g);
}

}  // namespace

FrameSolution solve_at_jet(const JetPoint& point, int max_order) {
  if (max_order < 3) throw FrameError("the cross-section needs invariants of order 3");
  FrameSolution fs;
  fs.point = point;
  fs.transported = transported_jet(point, max_order);
  Point fvals;
  for (const auto& [s, v] : fs.transported) fvals.emplace(fjet_symbol(s), v);
  std::map<std::string, Expr> local;
  Coefficients coef = [&](const std::string& w) -> Expr {
    auto it = local.find(w);
    if (it != local.end()) return it->second;
    Expr e = partial_evaluate(origin_invariant(w), fvals);
    local.emplace(w, e);
    return e;
  };
  Cascade c = run_cascade(coef);
  fs.solved = std::move(c.solved);
  fs.stages = std::move(c.stages);
  fs.fundamental = std::move(c.fundamental);
  fs.branch = classify_values(!fs.fundamental.at("QQ").is_zero(),
                              !fs.fundamental.at("XPQ").is_zero(),
                              !fs.fundamental.at("XXQ").is_zero());
  if (fs.branch.kind == Branch::generic && max_order >= 4) solve_generic(fs, coef);
  return fs;
}

FrameSolution solve_cross_section(const FJet& fjet, const JetPoint& point, int max_order) {
  if (fjet.order < max_order)
    throw FrameError("F-jet order " + std::to_string(fjet.order) + " is below the requested order " +
                     std::to_string(max_order));
  JetPoint jp = point;
  if (jp.values.size() < fjet.partials.size()) jp = jet_at(fjet, point.base);
  return solve_at_jet(jp, max_order);
}

// ---------------------------------------------------------------------------
// Classification over sampled points

namespace {

std::uint64_t slot_seed(std::uint64_t seed, std::uint64_t slot, std::uint64_t attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(slot), static_cast<std::uint32_t>(attempt)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

void prewarm(int order) {
  for (const auto& eq : cross_section()) origin_invariant(eq.word);
  for (const auto& w : kFundamental) origin_invariant(w);
  for (const auto& w : kAuxiliary) origin_invariant(w);
  if (order >= 4)
    for (const auto& w : kExtras) origin_invariant(w);
}

// Runs f(i) for i in [0, n), possibly concurrently; results stay in index order.
template <class T, class F>
std::vector<T> parallel_map(int n, F f) {
  std::vector<T> out(static_cast<std::size_t>(n));
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(i);
    return out;
  }
  std::size_t cap = term_cap();
  std::vector<std::future<T>> futs;
  for (int i = 0; i < n; ++i)
    futs.push_back(std::async(std::launch::async, [&, i] {
      TermCapGuard guard(cap);
      return f(i);
    }));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = futs[static_cast<std::size_t>(i)].get();
  return out;
}

struct SlotResult {
  std::optional<FrameSolution> frame;
  std::string failure;
};

SlotResult solve_slot(const FJet& fjet, const InvariantOptions& opt, int slot) {
  std::string last;
  for (int attempt = 0; attempt < opt.resamples; ++attempt) {
    std::uint64_t s = slot_seed(opt.seed, static_cast<std::uint64_t>(slot),
                                static_cast<std::uint64_t>(attempt));
    JetPoint jp;
    try {
      jp = sample_point(fjet, {}, s, SampleOptions{opt.box, 256});
    } catch (const SampleError& e) {
      return {std::nullopt, "point " + std::to_string(slot) + ": " + e.what()};
    }
    try {
      return {solve_at_jet(jp, opt.order), ""};
    } catch (const DegeneratePoint& e) {
      last = e.what();
    }
  }
  return {std::nullopt, "point " + std::to_string(slot) + ": resample budget of " +
                            std::to_string(opt.resamples) + " exhausted (" + last + ")"};
}

void finish_report(InvariantReport& rep) {
  bool any_nonzero = false;
  for (const auto& f : rep.frames)
    for (const auto& w : kFundamental)
      if (!f.fundamental.at(w).is_zero()) any_nonzero = true;
  if (any_nonzero)
    rep.verdict = Verdict::not_linearizable;
  else if (!rep.failures.empty() || rep.frames.empty())
    rep.verdict = Verdict::non_generic_partial;
  else
    rep.verdict = Verdict::linearizable;
  if (rep.frames.empty()) {
    rep.branch = {Branch::non_generic, "no frame could be solved"};
    return;
  }
  // A fundamental invariant vanishes identically only if it vanishes at every point.
  bool nz[3] = {false, false, false};
  for (const auto& f : rep.frames)
    for (int k = 0; k < 3; ++k) nz[k] = nz[k] || !f.fundamental.at(kFundamental[k]).is_zero();
  rep.branch = classify_values(nz[0], nz[1], nz[2]);
  for (const auto& eq : cross_section())
    rep.stage_order.push_back("R_" + eq.word + "=" + std::to_string(eq.value) + " -> " +
                              sym_name(eq.target));
}

}  // namespace

InvariantReport invariants(const FJet& fjet, const InvariantOptions& opt) {
  if (opt.points < 1) throw FrameError("at least one sample point is required");
  if (opt.order < 3 || opt.order > 4) throw FrameError("supported invariant orders are 3 and 4");
  if (fjet.order < opt.order) throw FrameError("F-jet order is below the requested order");
  prewarm(opt.order);
  auto slots = parallel_map<SlotResult>(opt.points, [&](int i) { return solve_slot(fjet, opt, i); });
  InvariantReport rep;
  for (auto& s : slots) {
    if (s.frame)
      rep.frames.push_back(std::move(*s.frame));
    else
      rep.failures.push_back(s.failure);
  }
  finish_report(rep);
  return rep;
}

InvariantReport invariants(const Expr& F, const InvariantOptions& opt) {
  return invariants(build_fjet(F, opt.order), opt);
}

// ---------------------------------------------------------------------------
// Symbolic mode

namespace {

Cascade formal_cascade() {
  std::map<std::string, Expr> local;
  Coefficients coef = [&](const std::string& w) -> Expr {
    auto it = local.find(w);
    if (it != local.end()) return it->second;
    const Expr& e = origin_invariant(w);
    Bindings b;
    for (Sym s : e.symbols())
      if (auto fi = fjet_index(s)) b.emplace(s, transported_symbolic(*fi));
    Expr v = substitute(e, b);
    local.emplace(w, v);
    return v;
  };
  return run_cascade(coef);
}

}  // namespace

SymbolicInvariants symbolic_invariants(const FJet* fjet, std::size_t budget) {
  static std::mutex mu;
  static std::optional<std::map<std::string, Expr>> formal_forms;
  std::map<std::string, Expr> forms;
  TermCapGuard guard(budget);
  try {
    {
      std::lock_guard lock(mu);
      if (!formal_forms) {
        Cascade c = formal_cascade();
        std::map<std::string, Expr> f;
        for (const auto& w : kFundamental) f[w] = c.fundamental.at(w);
        formal_forms = std::move(f);
      }
      forms = *formal_forms;
    }
    std::size_t biggest = 0;
    for (const auto& [w, e] : forms) biggest = std::max(biggest, e.size());
    if (budget != 0 && biggest > budget)
      throw ExprSizeError("closed form of size " + std::to_string(biggest) + " exceeds the budget");
    if (fjet != nullptr) {
      for (auto& [w, e] : forms) {
        Bindings b;
        for (Sym s : e.symbols())
          if (auto fi = fjet_index(s)) b.emplace(s, fjet->at(*fi));
        e = substitute(e, b);
      }
    }
  } catch (const ExprSizeError& e) {
    throw BudgetExceeded(std::string("symbolic budget exceeded: ") + e.what());
  }
  return {forms};
}

InvariantReport symbolic_report(const Expr& F, std::size_t budget, const InvariantOptions& opt) {
  FJet fjet = build_fjet(F, opt.order);
  SymbolicInvariants si = symbolic_invariants(&fjet, budget);
  InvariantReport rep = invariants(fjet, opt);
  rep.mode = "symbolic";
  rep.closed_forms = si.forms;
  for (const auto& f : rep.frames) {
    Point pt = f.point.as_point();
    for (const auto& [s, v] : residual_parameters()) pt[s] = v;
    for (const auto& w : kFundamental)
      if (evaluate(si.forms.at(w), pt) != f.reference(w))
        throw FrameError("closed form of R_" + w + " disagrees with the pointwise frame");
  }
  bool qq = !si.forms.at("QQ").is_zero();
  bool xpq = !si.forms.at("XPQ").is_zero();
  bool xxq = !si.forms.at("XXQ").is_zero();
  rep.verdict = (qq || xpq || xxq) ? Verdict::not_linearizable : Verdict::linearizable;
  rep.branch = classify_values(qq, xpq, xxq);
  return rep;
}

// ---------------------------------------------------------------------------
// Maps and equivalence

Expr pullback(const Expr& G, const Expr& X, const Expr& U) {
  GroupJet g = GroupJet::of_map(X, U, 3);
  g.check_local_diffeomorphism();
  Prolonged a = prolonged_action(g);
  Expr Gs = substitute(G, {{base::x(), X}, {base::u(), U}, {base::p(), a.P}, {base::q(), a.Q}});
  Expr chi0 = substitute(helpers(g).chi, {{base::r(), Expr()}});
  const Expr& x1 = g.xi_at(1);
  return (x1.pow(5) * Gs + chi0) / (g.phi_at(0, 1) * x1.pow(2));
}

std::array<Q, 4> map_point(const GroupJet& g, const std::array<Q, 4>& z) {
  Prolonged a = evaluate_action(g, z[0], z[1], z[2], z[3], Q(0));
  return {*a.X.constant(), *a.U.constant(), *a.P.constant(), *a.Q.constant()};
}

EquivalenceResult equivalence_signature(const Expr& A, const Expr& B,
                                        const std::optional<MapHint>& hint,
                                        const InvariantOptions& opt) {
  InvariantReport ra = invariants(A, opt);
  InvariantReport rb = invariants(B, opt);
  if (ra.verdict != rb.verdict)
    return {Equivalence::necessarily_inequivalent,
            "verdicts differ: " + verdict_str(ra.verdict) + " vs " + verdict_str(rb.verdict), 0};
  if (!(ra.branch == rb.branch))
    return {Equivalence::necessarily_inequivalent,
            "branches differ: " + ra.branch.str() + " vs " + rb.branch.str(), 0};
  if (!hint) return {Equivalence::consistent, "no invariant separates the equations", 0};

  GroupJet g = GroupJet::of_map(hint->X, hint->U, 3);
  g.check_local_diffeomorphism();
  if (pullback(B, hint->X, hint->U) != A)
    return {Equivalence::consistent, "the hint does not map the first equation to the second", 0};

  FJet fa = build_fjet(A, opt.order);
  FJet fb = build_fjet(B, opt.order);
  int matched = 0;
  const int wanted = std::max(5, opt.points);
  for (int slot = 0; slot < wanted * opt.resamples && matched < wanted; ++slot) {
    JetPoint ja;
    std::array<Q, 4> zb;
    JetPoint jb;
    try {
      ja = sample_point(fa, {}, slot_seed(opt.seed ^ 0x5eed, static_cast<std::uint64_t>(slot), 0),
                        SampleOptions{opt.box, 256});
      Point pt{{base::x(), ja.base[0]}, {base::u(), ja.base[1]}};
      if (sgn(evaluate(g.xi_at(1), pt)) == 0 || sgn(evaluate(g.phi_at(0, 1), pt)) == 0) continue;
      zb = map_point(g, ja.base);
      jb = jet_at(fb, zb);
    } catch (const DivisionByZero&) {
      continue;
    } catch (const SampleError&) {
      break;
    }
    std::optional<FrameSolution> sa, sb;
    try {
      sa = solve_at_jet(ja, opt.order);
      sb = solve_at_jet(jb, opt.order);
    } catch (const DegeneratePoint&) {
      continue;
    }
    if (!(sa->branch == sb->branch))
      return {Equivalence::necessarily_inequivalent, "branch tags differ at a mapped point pair",
              matched};
    for (const auto& w : kFundamental)
      if (sa->fundamental.at(w).is_zero() != sb->fundamental.at(w).is_zero())
        return {Equivalence::necessarily_inequivalent,
                "R_" + w + " vanishes at only one of a mapped point pair", matched};
    if (sa->generic && sb->generic)
      for (const auto& [w, v] : sa->generic->extras)
        if (!(sb->generic->extras.at(w) == v))
          return {Equivalence::necessarily_inequivalent,
                  "absolute invariant R_" + w + " differs at a mapped point pair", matched};
    ++matched;
  }
  if (matched < 5)
    return {Equivalence::consistent, "too few mapped point pairs could be compared", matched};
  return {Equivalence::verified_by_hint,
          "the hint maps the first equation to the second and the invariants agree at " +
              std::to_string(matched) + " mapped point pairs",
          matched};
}

}  // namespace mf
