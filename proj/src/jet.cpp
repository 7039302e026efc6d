#include <algorithm>
#include <mutex>

#include "mframe/jet.hpp"
#include "mframe/parse.hpp"

namespace mf {

namespace {
constexpr char kAxis[4] = {'x', 'u', 'p', 'q'};

Sym axis_symbol(int a) {
  switch (a) {
    case 0: return base::x();
    case 1: return base::u();
    case 2: return base::p();
    default: return base::q();
  }
}
}  // namespace

int total_order(const MultiIndex& s) { return s[0] + s[1] + s[2] + s[3]; }

MultiIndex shifted(MultiIndex s, int axis, int by) {
  s[static_cast<std::size_t>(axis)] += by;
  return s;
}

std::string multi_index_name(const MultiIndex& s) {
  std::string n;
  for (int a = 0; a < 4; ++a) n.append(static_cast<std::size_t>(s[a]), kAxis[a]);
  return n;
}

std::vector<MultiIndex> multi_indices(int n) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= n; ++k)
    for (int a = k; a >= 0; --a)
      for (int b = k - a; b >= 0; --b)
        for (int c = k - a - b; c >= 0; --c) out.push_back({a, b, c, k - a - b - c});
  return out;
}

Sym fjet_symbol(const MultiIndex& s) {
  std::string n = multi_index_name(s);
  return symbol(n.empty() ? "F" : "F_" + n, SymKind::fjet);
}

std::optional<MultiIndex> fjet_index(Sym s) {
  if (sym_kind(s) != SymKind::fjet) return std::nullopt;
  const std::string& n = sym_name(s);
  MultiIndex m{0, 0, 0, 0};
  for (std::size_t i = 2; i < n.size(); ++i) {
    auto it = std::find(std::begin(kAxis), std::end(kAxis), n[i]);
    if (it == std::end(kAxis)) return std::nullopt;
    ++m[static_cast<std::size_t>(it - std::begin(kAxis))];
  }
  return m;
}

const Expr& FJet::at(const MultiIndex& s) const {
  auto it = partials.find(s);
  if (it == partials.end())
    throw JetError("F-jet entry F_" + multi_index_name(s) + " exceeds the available order " +
                   std::to_string(order));
  return it->second;
}

FJet FJet::formal(int order) {
  FJet j;
  j.order = order;
  for (const auto& s : multi_indices(order)) j.partials.emplace(s, Expr(fjet_symbol(s)));
  return j;
}

FJet build_fjet(const Expr& F, int order) {
  if (order < 0) throw JetError("negative jet order");
  for (Sym s : F.symbols())
    if (sym_kind(s) != SymKind::base || s == base::r())
      throw JetError("F may only depend on x, u, p, q (found '" + sym_name(s) + "')");
  FJet j;
  j.order = order;
  for (const auto& s : multi_indices(order)) {
    if (total_order(s) == 0) {
      j.partials.emplace(s, F);
      continue;
    }
    int a = 0;
    while (s[static_cast<std::size_t>(a)] == 0) ++a;
    const Expr& prev = j.partials.at(shifted(s, a, -1));
    j.partials.emplace(s, differentiate(prev, axis_symbol(a)));
  }
  return j;
}

Expr total_derivative_on_equation(const Expr& e, const FJet& fjet) {
  const Expr one(1L);
  const Expr p(base::p());
  const Expr q(base::q());
  std::map<Sym, Expr> images;
  images.emplace(base::x(), one);
  images.emplace(base::u(), p);
  images.emplace(base::p(), q);
  images.emplace(base::q(), fjet.rhs());
  for (Sym s : e.symbols()) {
    if (s == base::r()) throw JetError("the equation manifold has no free r coordinate");
    auto idx = fjet_index(s);
    if (!idx) continue;
    if (total_order(*idx) + 1 > fjet.order)
      throw JetError("total derivative of " + sym_name(s) + " needs F-jet order " +
                     std::to_string(total_order(*idx) + 1));
    images.emplace(s, fjet.at(shifted(*idx, 0)) + p * fjet.at(shifted(*idx, 1)) +
                          q * fjet.at(shifted(*idx, 2)) + fjet.rhs() * fjet.at(shifted(*idx, 3)));
  }
  return derivation(e, [&](Sym s) -> const Expr* {
    auto it = images.find(s);
    return it == images.end() ? nullptr : &it->second;
  });
}

const Q& JetPoint::value(const MultiIndex& s) const {
  auto it = values.find(s);
  if (it == values.end()) throw JetError("jet point lacks F_" + multi_index_name(s));
  return it->second;
}

Point JetPoint::as_point() const {
  Point pt;
  for (int a = 0; a < 4; ++a) pt.emplace(axis_symbol(a), base[static_cast<std::size_t>(a)]);
  for (const auto& [s, v] : values) pt.emplace(fjet_symbol(s), v);
  return pt;
}

JetPoint jet_at(const FJet& fjet, const std::array<Q, 4>& b) {
  JetPoint jp;
  jp.base = b;
  Point pt;
  for (int a = 0; a < 4; ++a) pt.emplace(axis_symbol(a), b[static_cast<std::size_t>(a)]);
  for (const auto& [s, e] : fjet.partials) jp.values.emplace(s, evaluate(e, pt));
  return jp;
}

RationalSampler::RationalSampler(std::uint64_t seed, int box) : gen_(seed), box_(box) {}

std::int64_t RationalSampler::integer(std::int64_t lo, std::int64_t hi) {
  auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(gen_() % span);
}

Q RationalSampler::next() {
  Q v(integer(-box_, box_), integer(1, box_));
  v.canonicalize();
  return v;
}

Q RationalSampler::next_nonzero() {
  Q v(0);
  while (sgn(v) == 0) v = next();
  return v;
}

JetPoint sample_point(const FJet& fjet, const std::vector<Expr>& avoid, std::uint64_t seed,
                      const SampleOptions& opt) {
  for (std::size_t i = 0; i < avoid.size(); ++i)
    if (avoid[i].is_zero())
      throw SampleError("constraint unsatisfiable: avoid-expression #" + std::to_string(i) +
                        " is identically zero");
  RationalSampler rs(seed, opt.box);
  std::string last = "none";
  for (int attempt = 0; attempt < opt.retries; ++attempt) {
    std::array<Q, 4> b{rs.next(), rs.next(), rs.next(), rs.next()};
    JetPoint jp;
    try {
      jp = jet_at(fjet, b);
    } catch (const DivisionByZero&) {
      last = "a denominator of the F-jet vanishes";
      continue;
    }
    Point pt = jp.as_point();
    bool ok = true;
    for (std::size_t i = 0; i < avoid.size() && ok; ++i) {
      try {
        if (sgn(evaluate(avoid[i], pt)) == 0) {
          ok = false;
          last = "avoid-expression #" + std::to_string(i) + " (" + render_text(avoid[i]) +
                 ") vanishes";
        }
      } catch (const DivisionByZero&) {
        ok = false;
        last = "avoid-expression #" + std::to_string(i) + " is undefined";
      }
    }
    if (ok) return jp;
  }
  throw SampleError("retry budget of " + std::to_string(opt.retries) +
                    " exhausted; last violated constraint: " + last);
}

}  // namespace mf
