#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mf {

using Q = mpq_class;

// ---------------------------------------------------------------------------
// Symbols

enum class SymKind : std::uint8_t { base, fjet, group, formal };

struct Sym {
  std::uint32_t id = 0;
  friend bool operator==(Sym a, Sym b) { return a.id == b.id; }
  friend bool operator!=(Sym a, Sym b) { return a.id != b.id; }
  friend bool operator<(Sym a, Sym b) { return a.id < b.id; }
};

// Interns a symbol. Creation order defines the monomial order, so the base
// coordinates x, u, p, q, r always come first.
Sym symbol(std::string_view name, SymKind kind);
std::optional<Sym> lookup_symbol(std::string_view name);
const std::string& sym_name(Sym s);
SymKind sym_kind(Sym s);

namespace base {
Sym x();
Sym u();
Sym p();
Sym q();
Sym r();
}  // namespace base

// ---------------------------------------------------------------------------
// Errors

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivisionByZero : ExprError {
  using ExprError::ExprError;
};
struct ExprSizeError : ExprError {
  using ExprError::ExprError;
};
struct EvalError : ExprError {
  using ExprError::ExprError;
};

// Term cap for every polynomial the kernel produces. 0 disables the cap.
std::size_t term_cap();

class TermCapGuard {
 public:
  explicit TermCapGuard(std::size_t cap);
  ~TermCapGuard();
  TermCapGuard(const TermCapGuard&) = delete;
  TermCapGuard& operator=(const TermCapGuard&) = delete;

 private:
  std::size_t saved_;
};

// ---------------------------------------------------------------------------
// Monomials: sparse (variable, exponent) pairs sorted by variable id.
// Exponents may go negative inside Laurent intermediates only.

class Monomial {
 public:
  using Entry = std::pair<std::uint32_t, std::int32_t>;

  Monomial() = default;
  static Monomial var(Sym s, std::int32_t e = 1);

  const std::vector<Entry>& entries() const { return e_; }
  bool is_one() const { return e_.empty(); }
  std::int32_t degree() const { return deg_; }
  std::int32_t exponent(Sym s) const;

  Monomial operator*(const Monomial& o) const;
  // Plain exponent subtraction; callers check divisibility when it matters.
  Monomial operator/(const Monomial& o) const;
  bool divides(const Monomial& o) const;
  bool nonnegative() const;

  static Monomial gcd(const Monomial& a, const Monomial& b);
  static Monomial lcm(const Monomial& a, const Monomial& b);

  // Removes variable s and returns its exponent.
  std::int32_t take(Sym s, Monomial& rest) const;

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.e_ == b.e_;
  }
  std::size_t hash() const;

 private:
  friend class MonomialBuilder;
  std::vector<Entry> e_;
  std::int32_t deg_ = 0;
  void recompute();
};

struct MonomialHash {
  std::size_t operator()(const Monomial& m) const { return m.hash(); }
};

// Graded lexicographic order over symbol-creation order; >0 when a > b.
int compare(const Monomial& a, const Monomial& b);

struct Term {
  Monomial m;
  Q c;
};

// ---------------------------------------------------------------------------
// Polynomials: terms sorted in decreasing monomial order, no zero coefficients.

class Poly {
 public:
  Poly() = default;
  Poly(const Q& c);  // NOLINT
  static Poly var(Sym s);
  static Poly monomial(const Monomial& m, const Q& c = Q(1));
  // Takes arbitrary terms, merges duplicates, drops zeros, sorts.
  static Poly from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return t_; }
  std::size_t size() const { return t_.size(); }
  bool is_zero() const { return t_.empty(); }
  bool is_constant() const;
  bool is_one() const;
  bool is_single_term() const { return t_.size() == 1; }
  Q constant_term() const;
  const Term& lead() const { return t_.front(); }

  Poly operator-() const;
  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly scaled(const Q& c) const;
  Poly times(const Monomial& m, const Q& c = Q(1)) const;
  Poly pow(unsigned n) const;

  friend bool operator==(const Poly& a, const Poly& b);
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  std::vector<Sym> symbols() const;
  bool depends_on(Sym s) const;
  std::int32_t degree_in(Sym s) const;
  Monomial min_monomial() const;  // gcd of all monomials

  Poly derivative(Sym s) const;
  Poly monic() const;

  // Coefficients of powers of s: result[k] is the coefficient of s^k.
  std::vector<Poly> coefficients_in(Sym s) const;
  static Poly from_coefficients(Sym s, const std::vector<Poly>& c);

 private:
  std::vector<Term> t_;
  void check_cap() const;
};

// Exact division; throws ExprError when b does not divide a.
Poly divide_exact(const Poly& a, const Poly& b);
std::optional<Poly> try_divide(const Poly& a, const Poly& b);
// Monic greatest common divisor.
Poly gcd(const Poly& a, const Poly& b);

// ---------------------------------------------------------------------------
// Canonical rational functions.

class Expr {
 public:
  Expr();
  Expr(long v);  // NOLINT
  Expr(const Q& v);  // NOLINT
  explicit Expr(Sym s);
  static Expr from_poly(Poly p);
  // Reduces by the gcd and makes the denominator monic.
  static Expr from_parts(Poly num, Poly den);
  // Terms with possibly negative exponents.
  static Expr from_laurent(std::vector<Term> terms);

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  std::optional<Q> constant() const;
  bool is_polynomial() const { return den_.is_one(); }
  bool has_monomial_den() const { return den_.is_single_term(); }
  std::size_t size() const { return num_.size() + den_.size(); }

  std::vector<Sym> symbols() const;
  bool depends_on(Sym s) const;

  Expr operator-() const;
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }
  Expr& operator/=(const Expr& o) { return *this = *this / o; }
  Expr pow(int n) const;
  Expr inverse() const;

  friend bool operator==(const Expr& a, const Expr& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  // Laurent view: numerator terms divided by the monomial denominator.
  std::vector<Term> laurent_terms() const;

 private:
  Poly num_;
  Poly den_;
};

Expr differentiate(const Expr& e, Sym s);

// Simultaneous substitution.
using Bindings = std::map<Sym, Expr>;
Expr substitute(const Expr& e, const Bindings& b);

using Point = std::map<Sym, Q>;
Q evaluate(const Expr& e, const Point& pt);
Expr partial_evaluate(const Expr& e, const Point& pt);

// Sum over symbols s of (d e / d s) * image(s); symbols with no image are
// treated as constants.
using DerivationImage = std::function<const Expr*(Sym)>;
Expr derivation(const Expr& e, const DerivationImage& image);

// Degree and coefficients in one symbol, for a polynomial numerator.
// Throws when the denominator depends on s.
std::vector<Expr> coefficients_in(const Expr& e, Sym s);

// Evaluation in any field-like type K constructible from Q.
template <class K, class Lookup>
K evaluate_poly_as(const Poly& p, const Lookup& lookup) {
  K acc = K(Q(0));
  for (const auto& t : p.terms()) {
    K v = K(t.c);
    for (const auto& [id, e] : t.m.entries()) {
      K base_val = lookup(Sym{id});
      for (std::int32_t i = 0; i < e; ++i) v = v * base_val;
    }
    acc = acc + v;
  }
  return acc;
}

template <class K, class Lookup>
K evaluate_as(const Expr& e, const Lookup& lookup) {
  K n = evaluate_poly_as<K>(e.num(), lookup);
  K d = evaluate_poly_as<K>(e.den(), lookup);
  return n / d;
}

std::string q_to_string(const Q& q);

}  // namespace mf
