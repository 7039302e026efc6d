#include <algorithm>
#include <unordered_map>

#include "mframe/expr.hpp"

namespace mf {

namespace {

using Accum = std::unordered_map<Monomial, Q, MonomialHash>;

bool is_laurent(const Expr& e) { return e.has_monomial_den(); }

void accumulate(Accum& acc, const Monomial& m, const Q& c) {
  auto [it, fresh] = acc.try_emplace(m);
  if (fresh)
    it->second = c;
  else
    it->second += c;
}

std::vector<Term> drain(Accum& acc) {
  std::vector<Term> out;
  out.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (sgn(c) != 0) out.push_back(Term{m, std::move(c)});
  return out;
}

Expr laurent_sum(const Expr& a, const Expr& b) {
  std::vector<Term> t = a.laurent_terms();
  auto tb = b.laurent_terms();
  t.reserve(t.size() + tb.size());
  for (auto& x : tb) t.push_back(std::move(x));
  return Expr::from_laurent(std::move(t));
}

Expr laurent_product(const Expr& a, const Expr& b) {
  // The denominators are monomials, so no gcd is needed.
  Poly n = a.num() * b.num();
  const Term& da = a.den().lead();
  const Term& db = b.den().lead();
  Monomial dm = da.m * db.m;
  Monomial common = Monomial::gcd(n.min_monomial(), dm);
  if (!common.is_one()) {
    n = divide_exact(n, Poly::monomial(common));
    dm = dm / common;
  }
  return Expr::from_parts(std::move(n), Poly::monomial(dm));
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

Expr::Expr() : num_(), den_(Q(1)) {}
Expr::Expr(long v) : num_(Q(v)), den_(Q(1)) {}
Expr::Expr(const Q& v) : num_(v), den_(Q(1)) {}
Expr::Expr(Sym s) : num_(Poly::var(s)), den_(Q(1)) {}

Expr Expr::from_poly(Poly p) {
  Expr e;
  e.num_ = std::move(p);
  return e;
}

Expr Expr::from_parts(Poly num, Poly den) {
  if (den.is_zero()) throw DivisionByZero("division by zero");
  Expr e;
  if (num.is_zero()) return e;
  if (den.is_constant()) {
    Q c = den.lead().c;
    e.num_ = c == 1 ? std::move(num) : num.scaled(1 / c);
    return e;
  }
  if (den.is_single_term()) {
    Monomial common = Monomial::gcd(num.min_monomial(), den.lead().m);
    Monomial dm = den.lead().m;
    Q c = den.lead().c;
    if (!common.is_one()) {
      num = divide_exact(num, Poly::monomial(common));
      dm = dm / common;
    }
    e.num_ = c == 1 ? std::move(num) : num.scaled(1 / c);
    e.den_ = Poly::monomial(dm);
    return e;
  }
  Poly g = gcd(num, den);
  if (!g.is_one()) {
    num = divide_exact(num, g);
    den = divide_exact(den, g);
  }
  Q c = den.lead().c;
  if (c != 1) {
    num = num.scaled(1 / c);
    den = den.scaled(1 / c);
  }
  e.num_ = std::move(num);
  e.den_ = std::move(den);
  return e;
}

Expr Expr::from_laurent(std::vector<Term> terms) {
  Poly raw = Poly::from_terms(std::move(terms));
  if (raw.is_zero()) return Expr();
  Monomial low = raw.min_monomial();
  // Keep only the negative part of the gcd monomial as the denominator.
  Monomial shift;
  for (const auto& [v, e] : low.entries())
    if (e < 0) shift = shift * Monomial::var(Sym{v}, e);
  Expr out;
  if (shift.is_one()) {
    out.num_ = std::move(raw);
    return out;
  }
  Monomial den = Monomial() / shift;
  out.num_ = raw.times(den);
  out.den_ = Poly::monomial(den);
  return out;
}

std::optional<Q> Expr::constant() const {
  if (!is_constant()) return std::nullopt;
  return num_.constant_term();
}

std::vector<Sym> Expr::symbols() const {
  auto a = num_.symbols();
  auto b = den_.symbols();
  std::vector<Sym> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool Expr::depends_on(Sym s) const { return num_.depends_on(s) || den_.depends_on(s); }

std::vector<Term> Expr::laurent_terms() const {
  if (!den_.is_single_term()) throw ExprError("laurent_terms: denominator is not a monomial");
  const Term& d = den_.lead();
  std::vector<Term> out;
  out.reserve(num_.size());
  for (const auto& t : num_.terms()) out.push_back(Term{t.m / d.m, t.c / d.c});
  return out;
}

// ---------------------------------------------------------------------------
// Arithmetic

Expr Expr::operator-() const {
  Expr r = *this;
  r.num_ = -r.num_;
  return r;
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.den_.is_one() && b.den_.is_one()) return Expr::from_poly(a.num_ + b.num_);
  if (a.den_ == b.den_) return Expr::from_parts(a.num_ + b.num_, a.den_);
  if (is_laurent(a) && is_laurent(b)) return laurent_sum(a, b);
  Poly g = gcd(a.den_, b.den_);
  Poly ca = divide_exact(b.den_, g);
  Poly cb = divide_exact(a.den_, g);
  return Expr::from_parts(a.num_ * ca + b.num_ * cb, a.den_ * ca);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  return a + (-b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.den_.is_one() && b.den_.is_one()) return Expr::from_poly(a.num_ * b.num_);
  if (is_laurent(a) && is_laurent(b)) return laurent_product(a, b);
  Poly g1 = gcd(a.num_, b.den_);
  Poly g2 = gcd(b.num_, a.den_);
  Poly n1 = g1.is_one() ? a.num_ : divide_exact(a.num_, g1);
  Poly d2 = g1.is_one() ? b.den_ : divide_exact(b.den_, g1);
  Poly n2 = g2.is_one() ? b.num_ : divide_exact(b.num_, g2);
  Poly d1 = g2.is_one() ? a.den_ : divide_exact(a.den_, g2);
  Expr out;
  out.num_ = n1 * n2;
  out.den_ = d1 * d2;
  Q c = out.den_.lead().c;
  if (c != 1) {
    out.num_ = out.num_.scaled(1 / c);
    out.den_ = out.den_.scaled(1 / c);
  }
  return out;
}

Expr Expr::inverse() const {
  if (is_zero()) throw DivisionByZero("division by an expression equal to zero");
  return from_parts(den_, num_);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw DivisionByZero("division by an expression equal to zero");
  return a * b.inverse();
}

Expr Expr::pow(int n) const {
  if (n < 0) return inverse().pow(-n);
  Expr out;
  out.num_ = num_.pow(static_cast<unsigned>(n));
  out.den_ = den_.pow(static_cast<unsigned>(n));
  return out;
}

// ---------------------------------------------------------------------------
// Calculus and substitution

Expr differentiate(const Expr& e, Sym s) {
  if (!e.depends_on(s)) return Expr();
  if (e.is_polynomial()) return Expr::from_poly(e.num().derivative(s));
  if (e.has_monomial_den()) {
    std::vector<Term> out;
    for (auto& t : e.laurent_terms()) {
      std::int32_t k = t.m.exponent(s);
      if (k == 0) continue;
      out.push_back(Term{t.m / Monomial::var(s), t.c * k});
    }
    return Expr::from_laurent(std::move(out));
  }
  const Poly& n = e.num();
  const Poly& d = e.den();
  return Expr::from_parts(n.derivative(s) * d - n * d.derivative(s), d * d);
}

Expr derivation(const Expr& e, const DerivationImage& image) {
  Expr acc;
  std::vector<Expr> parts;
  for (Sym s : e.symbols()) {
    const Expr* img = image(s);
    if (img == nullptr || img->is_zero()) continue;
    parts.push_back(differentiate(e, s) * *img);
  }
  if (parts.empty()) return acc;
  bool laurent = std::all_of(parts.begin(), parts.end(),
                             [](const Expr& x) { return x.has_monomial_den(); });
  if (laurent) {
    std::vector<Term> all;
    for (const auto& x : parts)
      for (auto& t : x.laurent_terms()) all.push_back(std::move(t));
    return Expr::from_laurent(std::move(all));
  }
  for (const auto& x : parts) acc += x;
  return acc;
}

namespace {

// Image of one polynomial under a substitution whose images are all Laurent.
std::vector<Term> substitute_laurent(const Poly& p, const Bindings& b) {
  std::map<std::pair<std::uint32_t, std::int32_t>, std::vector<Term>> powers;
  auto power = [&](std::uint32_t id, std::int32_t e) -> const std::vector<Term>& {
    auto key = std::make_pair(id, e);
    auto it = powers.find(key);
    if (it != powers.end()) return it->second;
    Expr v = b.at(Sym{id}).pow(e);
    return powers.emplace(key, v.laurent_terms()).first->second;
  };
  Accum acc;
  for (const auto& t : p.terms()) {
    std::vector<Term> cur{Term{Monomial(), t.c}};
    for (const auto& [id, e] : t.m.entries()) {
      auto it = b.find(Sym{id});
      if (it == b.end()) {
        for (auto& c : cur) c.m = c.m * Monomial::var(Sym{id}, e);
        continue;
      }
      const auto& pw = power(id, e);
      std::vector<Term> next;
      next.reserve(cur.size() * pw.size());
      if (cur.size() * pw.size() > 1) {
        Accum local;
        for (const auto& x : cur)
          for (const auto& y : pw) accumulate(local, x.m * y.m, x.c * y.c);
        next = drain(local);
      } else {
        for (const auto& x : cur)
          for (const auto& y : pw) next.push_back(Term{x.m * y.m, x.c * y.c});
      }
      cur = std::move(next);
      if (cur.empty()) break;
    }
    for (const auto& c : cur) accumulate(acc, c.m, c.c);
    std::size_t cap = term_cap();
    if (cap != 0 && acc.size() > 2 * cap + 16)
      throw ExprSizeError("substitution exceeds the term cap " + std::to_string(cap));
  }
  return drain(acc);
}

// Common-denominator image of a polynomial under general rational images.
std::pair<Poly, Poly> substitute_general(const Poly& p, const Bindings& b) {
  std::map<std::uint32_t, std::int32_t> maxdeg;
  for (const auto& t : p.terms())
    for (const auto& [id, e] : t.m.entries())
      if (b.count(Sym{id})) maxdeg[id] = std::max(maxdeg[id], e);
  std::map<std::pair<std::uint32_t, std::int32_t>, Poly> npow, dpow;
  auto get = [&](auto& cache, std::uint32_t id, std::int32_t e, bool numer) -> const Poly& {
    auto key = std::make_pair(id, e);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const Expr& img = b.at(Sym{id});
    Poly v = (numer ? img.num() : img.den()).pow(static_cast<unsigned>(e));
    return cache.emplace(key, std::move(v)).first->second;
  };
  Poly den(Q(1));
  for (const auto& [id, d] : maxdeg) den = den * get(dpow, id, d, false);
  Poly num;
  std::vector<Term> free_part;
  for (const auto& t : p.terms()) {
    Monomial rest;
    Poly cur(t.c);
    for (const auto& [id, e] : t.m.entries())
      if (!b.count(Sym{id})) rest = rest * Monomial::var(Sym{id}, e);
    cur = cur.times(rest);
    for (const auto& [id, d] : maxdeg) {
      std::int32_t e = t.m.exponent(Sym{id});
      if (e > 0) cur = cur * get(npow, id, e, true);
      if (d - e > 0) cur = cur * get(dpow, id, d - e, false);
    }
    num = num + cur;
  }
  return {std::move(num), std::move(den)};
}

bool touches(const Poly& p, const Bindings& b) {
  for (const auto& t : p.terms())
    for (const auto& [id, e] : t.m.entries())
      if (b.count(Sym{id})) return true;
  return false;
}

}  // namespace

Expr substitute(const Expr& e, const Bindings& b) {
  if (b.empty() || (!touches(e.num(), b) && !touches(e.den(), b))) return e;
  bool laurent = true;
  for (const auto& [s, img] : b)
    if (!img.has_monomial_den()) laurent = false;
  if (laurent) {
    Expr n = Expr::from_laurent(substitute_laurent(e.num(), b));
    if (e.den().is_one()) return n;
    Expr d = Expr::from_laurent(substitute_laurent(e.den(), b));
    if (d.is_zero()) throw DivisionByZero("substitution makes a denominator vanish");
    return n / d;
  }
  auto [nn, nd] = substitute_general(e.num(), b);
  if (e.den().is_one()) return Expr::from_parts(std::move(nn), std::move(nd));
  auto [dn, dd] = substitute_general(e.den(), b);
  if (dn.is_zero()) throw DivisionByZero("substitution makes a denominator vanish");
  return Expr::from_parts(nn, nd) / Expr::from_parts(dn, dd);
}

namespace {

std::string describe(const Point& pt) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : pt) {
    if (!first) s += ", ";
    first = false;
    s += sym_name(k) + "=" + q_to_string(v);
  }
  return s + "}";
}

}  // namespace

Q evaluate(const Expr& e, const Point& pt) {
  auto lookup = [&](Sym s) -> Q {
    auto it = pt.find(s);
    if (it == pt.end()) throw EvalError("symbol '" + sym_name(s) + "' is not bound");
    return it->second;
  };
  Q d = evaluate_poly_as<Q>(e.den(), lookup);
  if (sgn(d) == 0) throw DivisionByZero("denominator vanishes at " + describe(pt));
  Q n = evaluate_poly_as<Q>(e.num(), lookup);
  return n / d;
}

Expr partial_evaluate(const Expr& e, const Point& pt) {
  Bindings b;
  for (const auto& [s, v] : pt) b.emplace(s, Expr(v));
  return substitute(e, b);
}

std::vector<Expr> coefficients_in(const Expr& e, Sym s) {
  if (e.den().depends_on(s))
    throw ExprError("coefficients_in: denominator depends on " + sym_name(s));
  auto cs = e.num().coefficients_in(s);
  std::vector<Expr> out;
  out.reserve(cs.size());
  for (auto& c : cs) out.push_back(Expr::from_parts(std::move(c), e.den()));
  return out;
}

std::string q_to_string(const Q& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

}  // namespace mf
