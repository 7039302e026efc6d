#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mframe/expr.hpp"

namespace mf {

// Derivative counts in (x, u, p, q).
using MultiIndex = std::array<int, 4>;

int total_order(const MultiIndex& s);
MultiIndex shifted(MultiIndex s, int axis, int by = 1);
// "xxq" for (2,0,0,1); empty for F itself.
std::string multi_index_name(const MultiIndex& s);
// All indices of total order <= n, by order and then lexicographically.
std::vector<MultiIndex> multi_indices(int n);

// Symbol for a partial of F: F, F_x, F_xxq, ...
Sym fjet_symbol(const MultiIndex& s);
std::optional<MultiIndex> fjet_index(Sym s);

struct JetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FJet {
  int order = 0;
  std::map<MultiIndex, Expr> partials;

  const Expr& at(const MultiIndex& s) const;
  const Expr& rhs() const { return at({0, 0, 0, 0}); }
  // Partials are the F-jet symbols themselves.
  static FJet formal(int order);
};

FJet build_fjet(const Expr& F, int order);

// D_x = d_x + p d_u + q d_p + F d_q, with F-jet symbols advanced by the chain rule.
Expr total_derivative_on_equation(const Expr& e, const FJet& fjet);

struct JetPoint {
  std::array<Q, 4> base;  // x, u, p, q
  std::map<MultiIndex, Q> values;

  const Q& value(const MultiIndex& s) const;
  // Binds x, u, p, q and every stored F-jet symbol.
  Point as_point() const;
};

struct SampleOptions {
  int box = 7;
  int retries = 256;
};

struct SampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact jet of F at a given base point; throws DivisionByZero off the domain.
JetPoint jet_at(const FJet& fjet, const std::array<Q, 4>& base);

JetPoint sample_point(const FJet& fjet, const std::vector<Expr>& avoid, std::uint64_t seed,
                      const SampleOptions& opt = {});

// Seeded rational generator shared by the sampler and the property checks.
class RationalSampler {
 public:
  explicit RationalSampler(std::uint64_t seed, int box = 7);
  Q next();
  Q next_nonzero();
  std::int64_t integer(std::int64_t lo, std::int64_t hi);

 private:
  std::mt19937_64 gen_;
  int box_;
};

}  // namespace mf
