#include <algorithm>
#include <atomic>
#include <unordered_map>

#include "mframe/expr.hpp"

namespace mf {

// ---------------------------------------------------------------------------
// Term cap

namespace {
std::atomic<std::size_t> g_default_cap{4'000'000};
thread_local std::size_t t_cap = static_cast<std::size_t>(-1);
}  // namespace

std::size_t term_cap() {
  return t_cap == static_cast<std::size_t>(-1) ? g_default_cap.load() : t_cap;
}

TermCapGuard::TermCapGuard(std::size_t cap) : saved_(t_cap) { t_cap = cap; }
TermCapGuard::~TermCapGuard() { t_cap = saved_; }

// ---------------------------------------------------------------------------
// Monomial

void Monomial::recompute() {
  deg_ = 0;
  for (const auto& [v, e] : e_) deg_ += e;
}

Monomial Monomial::var(Sym s, std::int32_t e) {
  Monomial m;
  if (e != 0) m.e_.emplace_back(s.id, e);
  m.deg_ = e;
  return m;
}

std::int32_t Monomial::exponent(Sym s) const {
  for (const auto& [v, e] : e_)
    if (v == s.id) return e;
  return 0;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r;
  r.e_.reserve(e_.size() + o.e_.size());
  std::size_t i = 0, j = 0;
  while (i < e_.size() || j < o.e_.size()) {
    if (j == o.e_.size() || (i < e_.size() && e_[i].first < o.e_[j].first)) {
      r.e_.push_back(e_[i++]);
    } else if (i == e_.size() || o.e_[j].first < e_[i].first) {
      r.e_.push_back(o.e_[j++]);
    } else {
      std::int32_t s = e_[i].second + o.e_[j].second;
      if (s != 0) r.e_.emplace_back(e_[i].first, s);
      ++i;
      ++j;
    }
  }
  r.deg_ = deg_ + o.deg_;
  return r;
}

Monomial Monomial::operator/(const Monomial& o) const {
  Monomial inv;
  inv.e_ = o.e_;
  for (auto& [v, e] : inv.e_) e = -e;
  inv.deg_ = -o.deg_;
  return *this * inv;
}

bool Monomial::divides(const Monomial& o) const {
  std::size_t j = 0;
  for (const auto& [v, e] : e_) {
    while (j < o.e_.size() && o.e_[j].first < v) ++j;
    if (j == o.e_.size() || o.e_[j].first != v || o.e_[j].second < e) return false;
  }
  return true;
}

bool Monomial::nonnegative() const {
  for (const auto& [v, e] : e_)
    if (e < 0) return false;
  return true;
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b) {
  Monomial r;
  std::size_t i = 0, j = 0;
  while (i < a.e_.size() && j < b.e_.size()) {
    if (a.e_[i].first < b.e_[j].first) {
      if (a.e_[i].second < 0) r.e_.push_back(a.e_[i]);
      ++i;
    } else if (b.e_[j].first < a.e_[i].first) {
      if (b.e_[j].second < 0) r.e_.push_back(b.e_[j]);
      ++j;
    } else {
      r.e_.emplace_back(a.e_[i].first, std::min(a.e_[i].second, b.e_[j].second));
      ++i;
      ++j;
    }
  }
  for (; i < a.e_.size(); ++i)
    if (a.e_[i].second < 0) r.e_.push_back(a.e_[i]);
  for (; j < b.e_.size(); ++j)
    if (b.e_[j].second < 0) r.e_.push_back(b.e_[j]);
  r.recompute();
  return r;
}

Monomial Monomial::lcm(const Monomial& a, const Monomial& b) {
  Monomial r;
  std::size_t i = 0, j = 0;
  while (i < a.e_.size() || j < b.e_.size()) {
    if (j == b.e_.size() || (i < a.e_.size() && a.e_[i].first < b.e_[j].first)) {
      if (a.e_[i].second > 0) r.e_.push_back(a.e_[i]);
      ++i;
    } else if (i == a.e_.size() || b.e_[j].first < a.e_[i].first) {
      if (b.e_[j].second > 0) r.e_.push_back(b.e_[j]);
      ++j;
    } else {
      r.e_.emplace_back(a.e_[i].first, std::max(a.e_[i].second, b.e_[j].second));
      ++i;
      ++j;
    }
  }
  r.recompute();
  return r;
}

std::int32_t Monomial::take(Sym s, Monomial& rest) const {
  rest.e_.clear();
  std::int32_t found = 0;
  for (const auto& en : e_) {
    if (en.first == s.id)
      found = en.second;
    else
      rest.e_.push_back(en);
  }
  rest.deg_ = deg_ - found;
  return found;
}

std::size_t Monomial::hash() const {
  std::size_t h = 1469598103934665603ull;
  for (const auto& [v, e] : e_) {
    h ^= (static_cast<std::size_t>(v) << 20) ^ static_cast<std::size_t>(e + 1000);
    h *= 1099511628211ull;
  }
  return h;
}

int compare(const Monomial& a, const Monomial& b) {
  if (a.degree() != b.degree()) return a.degree() > b.degree() ? 1 : -1;
  const auto& x = a.entries();
  const auto& y = b.entries();
  std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i].first != y[i].first) return x[i].first < y[i].first ? 1 : -1;
    if (x[i].second != y[i].second) return x[i].second > y[i].second ? 1 : -1;
  }
  if (x.size() != y.size()) return x.size() > y.size() ? 1 : -1;
  return 0;
}

// ---------------------------------------------------------------------------
// Poly

namespace {

bool term_greater(const Term& a, const Term& b) { return compare(a.m, b.m) > 0; }

using Accum = std::unordered_map<Monomial, Q, MonomialHash>;

std::vector<Term> drain(Accum& acc) {
  std::vector<Term> out;
  out.reserve(acc.size());
  for (auto& [m, c] : acc)
    if (sgn(c) != 0) out.push_back(Term{m, std::move(c)});
  std::sort(out.begin(), out.end(), term_greater);
  return out;
}

}  // namespace

void Poly::check_cap() const {
  std::size_t cap = term_cap();
  if (cap != 0 && t_.size() > cap)
    throw ExprSizeError("polynomial size " + std::to_string(t_.size()) +
                        " exceeds the term cap " + std::to_string(cap));
}

Poly::Poly(const Q& c) {
  if (sgn(c) != 0) t_.push_back(Term{Monomial(), c});
}

Poly Poly::var(Sym s) { return monomial(Monomial::var(s)); }

Poly Poly::monomial(const Monomial& m, const Q& c) {
  Poly p;
  if (sgn(c) != 0) p.t_.push_back(Term{m, c});
  return p;
}

Poly Poly::from_terms(std::vector<Term> terms) {
  Poly p;
  if (terms.empty()) return p;
  std::sort(terms.begin(), terms.end(), term_greater);
  for (auto& t : terms) {
    if (!p.t_.empty() && p.t_.back().m == t.m) {
      p.t_.back().c += t.c;
    } else {
      if (!p.t_.empty() && sgn(p.t_.back().c) == 0) p.t_.pop_back();
      p.t_.push_back(std::move(t));
    }
  }
  if (!p.t_.empty() && sgn(p.t_.back().c) == 0) p.t_.pop_back();
  p.check_cap();
  return p;
}

bool Poly::is_constant() const {
  return t_.empty() || (t_.size() == 1 && t_[0].m.is_one());
}

bool Poly::is_one() const {
  return t_.size() == 1 && t_[0].m.is_one() && t_[0].c == 1;
}

Q Poly::constant_term() const {
  if (!t_.empty() && t_.back().m.is_one()) return t_.back().c;
  return Q(0);
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& t : r.t_) t.c = -t.c;
  return r;
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly r;
  r.t_.reserve(a.t_.size() + b.t_.size());
  std::size_t i = 0, j = 0;
  while (i < a.t_.size() && j < b.t_.size()) {
    int c = compare(a.t_[i].m, b.t_[j].m);
    if (c > 0) {
      r.t_.push_back(a.t_[i++]);
    } else if (c < 0) {
      r.t_.push_back(b.t_[j++]);
    } else {
      Q s = a.t_[i].c + b.t_[j].c;
      if (sgn(s) != 0) r.t_.push_back(Term{a.t_[i].m, std::move(s)});
      ++i;
      ++j;
    }
  }
  for (; i < a.t_.size(); ++i) r.t_.push_back(a.t_[i]);
  for (; j < b.t_.size(); ++j) r.t_.push_back(b.t_[j]);
  r.check_cap();
  return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  if (b.t_.size() == 1) return a.times(b.t_[0].m, b.t_[0].c);
  if (a.t_.size() == 1) return b.times(a.t_[0].m, a.t_[0].c);
  std::size_t cap = term_cap();
  Accum acc;
  acc.reserve(std::min<std::size_t>(a.t_.size() * b.t_.size(), 1u << 20));
  for (const auto& x : a.t_) {
    for (const auto& y : b.t_) {
      auto [it, fresh] = acc.try_emplace(x.m * y.m);
      if (fresh)
        it->second = x.c * y.c;
      else
        it->second += x.c * y.c;
    }
    if (cap != 0 && acc.size() > 2 * cap + 16)
      throw ExprSizeError("product exceeds the term cap " + std::to_string(cap));
  }
  Poly r;
  r.t_ = drain(acc);
  r.check_cap();
  return r;
}

Poly Poly::scaled(const Q& c) const {
  if (sgn(c) == 0) return Poly();
  Poly r = *this;
  for (auto& t : r.t_) t.c *= c;
  return r;
}

Poly Poly::times(const Monomial& m, const Q& c) const {
  if (sgn(c) == 0) return Poly();
  Poly r;
  r.t_.reserve(t_.size());
  // Multiplying by a monomial preserves the order.
  for (const auto& t : t_) r.t_.push_back(Term{t.m * m, t.c * c});
  return r;
}

Poly Poly::pow(unsigned n) const {
  Poly result(Q(1));
  Poly base = *this;
  while (n) {
    if (n & 1u) result = result * base;
    n >>= 1u;
    if (n) base = base * base;
  }
  return result;
}

bool operator==(const Poly& a, const Poly& b) {
  if (a.t_.size() != b.t_.size()) return false;
  for (std::size_t i = 0; i < a.t_.size(); ++i)
    if (!(a.t_[i].m == b.t_[i].m) || a.t_[i].c != b.t_[i].c) return false;
  return true;
}

std::vector<Sym> Poly::symbols() const {
  std::vector<std::uint32_t> ids;
  for (const auto& t : t_)
    for (const auto& [v, e] : t.m.entries()) ids.push_back(v);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<Sym> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(Sym{id});
  return out;
}

bool Poly::depends_on(Sym s) const {
  for (const auto& t : t_)
    if (t.m.exponent(s) != 0) return true;
  return false;
}

std::int32_t Poly::degree_in(Sym s) const {
  std::int32_t d = 0;
  for (const auto& t : t_) d = std::max(d, t.m.exponent(s));
  return d;
}

Monomial Poly::min_monomial() const {
  if (t_.empty()) return Monomial();
  Monomial g = t_[0].m;
  for (std::size_t i = 1; i < t_.size() && !g.is_one(); ++i) g = Monomial::gcd(g, t_[i].m);
  return g;
}

Poly Poly::derivative(Sym s) const {
  std::vector<Term> out;
  for (const auto& t : t_) {
    std::int32_t e = t.m.exponent(s);
    if (e == 0) continue;
    out.push_back(Term{t.m / Monomial::var(s), t.c * e});
  }
  return from_terms(std::move(out));
}

Poly Poly::monic() const {
  if (t_.empty()) return *this;
  Q inv = 1 / t_[0].c;
  return scaled(inv);
}

std::vector<Poly> Poly::coefficients_in(Sym s) const {
  std::vector<std::vector<Term>> buckets(static_cast<std::size_t>(degree_in(s)) + 1);
  Monomial rest;
  for (const auto& t : t_) {
    std::int32_t e = t.m.take(s, rest);
    buckets[static_cast<std::size_t>(e)].push_back(Term{rest, t.c});
  }
  std::vector<Poly> out;
  out.reserve(buckets.size());
  for (auto& b : buckets) {
    Poly p;
    p.t_ = std::move(b);  // relative order is preserved after removing s
    std::sort(p.t_.begin(), p.t_.end(), term_greater);
    out.push_back(std::move(p));
  }
  return out;
}

Poly Poly::from_coefficients(Sym s, const std::vector<Poly>& c) {
  std::vector<Term> all;
  for (std::size_t k = 0; k < c.size(); ++k) {
    Monomial m = Monomial::var(s, static_cast<std::int32_t>(k));
    for (const auto& t : c[k].terms()) all.push_back(Term{t.m * m, t.c});
  }
  return from_terms(std::move(all));
}

// ---------------------------------------------------------------------------
// Division

std::optional<Poly> try_divide(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw DivisionByZero("polynomial division by zero");
  if (a.is_zero()) return Poly();
  if (b.is_single_term()) {
    const Term& d = b.lead();
    std::vector<Term> out;
    out.reserve(a.size());
    for (const auto& t : a.terms()) {
      if (!d.m.divides(t.m)) return std::nullopt;
      out.push_back(Term{t.m / d.m, t.c / d.c});
    }
    return Poly::from_terms(std::move(out));
  }
  const Term& lt = b.lead();
  Poly rem = a;
  std::vector<Term> quot;
  while (!rem.is_zero()) {
    const Term& r0 = rem.lead();
    if (!lt.m.divides(r0.m)) return std::nullopt;
    Monomial m = r0.m / lt.m;
    Q c = r0.c / lt.c;
    quot.push_back(Term{m, c});
    rem = rem - b.times(m, c);
  }
  return Poly::from_terms(std::move(quot));
}

Poly divide_exact(const Poly& a, const Poly& b) {
  auto q = try_divide(a, b);
  if (!q) throw ExprError("inexact polynomial division");
  return *q;
}

// ---------------------------------------------------------------------------
// GCD

namespace {

Poly gcd_rec(const Poly& a, const Poly& b);

Poly content_in(const std::vector<Poly>& coeffs) {
  Poly g;
  for (const auto& c : coeffs) {
    if (c.is_zero()) continue;
    g = g.is_zero() ? c.monic() : gcd(g, c);
    if (g.is_one()) break;
  }
  return g;
}

void trim(std::vector<Poly>& u) {
  while (!u.empty() && u.back().is_zero()) u.pop_back();
}

// Pseudo-remainder of univariate polynomials with polynomial coefficients.
std::vector<Poly> prem(std::vector<Poly> a, const std::vector<Poly>& b) {
  std::size_t db = b.size() - 1;
  const Poly& lb = b.back();
  trim(a);
  while (!a.empty() && a.size() - 1 >= db) {
    std::size_t da = a.size() - 1;
    Poly la = a.back();
    for (auto& c : a) c = c * lb;
    for (std::size_t k = 0; k <= db; ++k) a[k + da - db] = a[k + da - db] - la * b[k];
    trim(a);
    if (!a.empty() && a.size() - 1 == da) throw ExprError("pseudo-remainder did not reduce degree");
  }
  return a;
}

std::vector<Poly> primitive(std::vector<Poly> u) {
  Poly c = content_in(u);
  if (!c.is_one() && !c.is_zero())
    for (auto& x : u) x = divide_exact(x, c);
  // Normalize the sign and scale of the leading coefficient.
  Q lc = u.back().lead().c;
  if (lc != 1)
    for (auto& x : u) x = x.scaled(1 / lc);
  return u;
}

Poly gcd_rec(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.is_constant() || b.is_constant()) return Poly(Q(1));
  auto va = a.symbols();
  auto vb = b.symbols();
  std::vector<Sym> common;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(common));
  if (common.empty()) return Poly(Q(1));
  // Variables present in only one operand can be eliminated through the content.
  for (Sym s : va) {
    if (!b.depends_on(s)) return gcd(content_in(a.coefficients_in(s)), b);
  }
  for (Sym s : vb) {
    if (!a.depends_on(s)) return gcd(a, content_in(b.coefficients_in(s)));
  }
  Sym v = common.front();
  auto ua = a.coefficients_in(v);
  auto ub = b.coefficients_in(v);
  Poly ca = content_in(ua);
  Poly cb = content_in(ub);
  for (auto& x : ua) x = divide_exact(x, ca);
  for (auto& x : ub) x = divide_exact(x, cb);
  Poly cg = gcd(ca, cb);
  if (ua.size() < ub.size()) std::swap(ua, ub);
  ua = primitive(ua);
  ub = primitive(ub);
  while (true) {
    auto r = prem(ua, ub);
    if (r.empty()) break;
    if (r.size() == 1) {
      ub = {Poly(Q(1))};
      break;
    }
    ua = std::move(ub);
    ub = primitive(std::move(r));
  }
  Poly g = Poly::from_coefficients(v, ub);
  return (g * cg).monic();
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.is_constant() || b.is_constant()) return Poly(Q(1));
  Monomial ma = a.min_monomial();
  Monomial mb = b.min_monomial();
  Monomial gm = Monomial::gcd(ma, mb);
  if (a.is_single_term() || b.is_single_term()) return Poly::monomial(gm);
  Poly a1 = ma.is_one() ? a : divide_exact(a, Poly::monomial(ma));
  Poly b1 = mb.is_one() ? b : divide_exact(b, Poly::monomial(mb));
  if (a1 == b1) return a1.monic().times(gm);
  Poly g = gcd_rec(a1, b1);
  return g.times(gm).monic();
}

}  // namespace mf
