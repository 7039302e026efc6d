#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mframe/expr.hpp"

namespace mf {

struct FormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exterior generators. Every generator is a symbol registered here; products
// are kept as strictly increasing words in symbol order.
Sym generator(const std::string& name);
bool is_generator(Sym s);

// dx, du, dp, dq, dr
Sym coordinate_differential(int axis);
// Group-contact form of a group jet: d(g) minus its horizontal part.
Sym group_contact(Sym group_jet);
std::optional<Sym> group_contact_source(Sym gen);

// Formal Maurer-Cartan generators mu_i = mu^x_{X^i}, mu_{i,j} = mu^u_{U^i X^j}
// and the lifted horizontal forms omega^a.
Sym mu_x(int i);
Sym mu_u(int i, int j);
Sym omega(int axis);  // 0..4 = x, u, p, q, r
struct MuIndex {
  bool is_x;
  int i, j;
};
std::optional<MuIndex> mu_index(Sym s);

// Lifted coordinates P, Q, R and formal invariants R_{XXQ}, indexed by
// derivative counts in (X, U, P, Q).
Sym lifted_coordinate(int axis);  // 2..4 = P, Q, R
Sym invariant_symbol(const std::array<int, 4>& counts);
std::string invariant_word(const std::array<int, 4>& counts);

class DiffForm {
 public:
  using Word = std::vector<Sym>;

  DiffForm() = default;
  explicit DiffForm(int degree) : degree_(degree) {}
  static DiffForm function(const Expr& f);
  static DiffForm gen(Sym g, const Expr& c = Expr(1L));
  // Reads a 1-form from an expression linear in generator symbols.
  static DiffForm from_linear(const Expr& e);

  int degree() const { return degree_; }
  const std::map<Word, Expr>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Expr coefficient(const Word& w) const;

  // Adds c * (g_1 ^ ... ^ g_k), reordering the word with sign.
  void add(Word w, const Expr& c);

  friend DiffForm operator+(const DiffForm& a, const DiffForm& b);
  friend DiffForm operator-(const DiffForm& a, const DiffForm& b);
  DiffForm operator-() const;
  friend DiffForm operator*(const Expr& c, const DiffForm& a);
  friend DiffForm wedge(const DiffForm& a, const DiffForm& b);
  friend bool operator==(const DiffForm& a, const DiffForm& b) {
    return a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }

  DiffForm map_coefficients(const std::function<Expr(const Expr&)>& f) const;
  // Replaces 1-form generators by 1-forms.
  DiffForm substitute_generators(const std::map<Sym, DiffForm>& images) const;
  std::vector<Sym> generators() const;

 private:
  int degree_ = 0;
  std::map<Word, Expr> terms_;
};

DiffForm wedge(const DiffForm& a, const DiffForm& b);

// Exterior derivative. Coordinates x, u, p, q, r and group jets have their
// natural differentials; group-contact generators satisfy
// d Y(xi_k) = dx ^ Y(xi_{k+1}), d Y(phi_ij) = dx ^ Y(phi_{i+1,j}) + du ^ Y(phi_{i,j+1}).
// Other generators and symbols need an entry in `rules`.
struct DifferentialRules {
  std::map<Sym, DiffForm> functions;   // d of a coefficient symbol (a 1-form)
  std::map<Sym, DiffForm> generators;  // d of a 1-form generator (a 2-form)
};
DiffForm ext_derivative(const DiffForm& a, const DifferentialRules& rules = {});
DiffForm d_of(const Expr& f, const DifferentialRules& rules = {});

// Horizontal and group parts of df on the diffeomorphism jets.
DiffForm horizontal_differential(const Expr& f);
DiffForm group_differential(const Expr& f);

std::string render_form(const DiffForm& a);

// ---------------------------------------------------------------------------
// Maurer-Cartan relations of the fiber-preserving pseudo-group

struct McRelationSet {
  // Dependent symbol -> expression linear in the basis mu_i, mu_{i,j}, with
  // coefficients in the lifted coordinates P, Q, R.
  std::map<std::string, Expr> relations;
  std::vector<std::string> order;
};

McRelationSet mc_relations();
// The relations as printed in the source display.
McRelationSet mc_relations_display();

// Formal derivative of a lifted relation along X, U, P, Q or R (axis 0..4).
Expr formal_shift(const Expr& e, int axis);

// mu^a_b for a, b in {x, u, p, q, r}, from the relations.
Expr mu_component(int a, int b);
// The same table as printed in the source display (a in p, q, r).
std::optional<Expr> mu_component_display(int a, int b);

// Explicit group-contact expansions of the basis forms.
class ExplicitMc {
 public:
  static const ExplicitMc& shared();
  const DiffForm& mu_x(int i) const;
  const DiffForm& mu_u(int i, int j) const;
  DiffForm instantiate(const Expr& linear) const;  // formal mu/P/Q/R -> explicit
  Expr lifted(int axis) const;                      // X, U, P, Q, R
  const DiffForm& sigma(int axis) const;            // d_M of the lifted coordinate

 private:
  ExplicitMc();
  mutable std::map<int, DiffForm> mx_;
  mutable std::map<std::pair<int, int>, DiffForm> mu_;
  std::array<Expr, 5> z_;
  std::array<DiffForm, 5> sigma_;
};

// Invariant derivations D_X, D_U of the base coframe acting on forms.
DiffForm invariant_dx(const DiffForm& a);
DiffForm invariant_du(const DiffForm& a);

// ---------------------------------------------------------------------------
// Verification reports

struct Check {
  std::string name;
  bool ok = false;
  std::string residual;                // canonical text of the residual
  std::vector<std::string> absorbed;   // terms declared absorbed by "≡"
  std::vector<std::string> display;    // deviations of the printed form, with ledger ids
};

struct StructureReport {
  std::string level;
  std::vector<Check> checks;
  bool ok() const;
};

enum class StructureLevel { horizontal, maurer_cartan, prolonged_coframe, generic_branch };
std::string level_str(StructureLevel l);
std::optional<StructureLevel> parse_level(const std::string& s);

StructureReport verify_structure(StructureLevel level);
StructureReport verify_recurrence();
StructureReport verify_mc_relations();

// Lifted correction term of the prolonged generator for the invariant R_J.
Expr lifted_correction(const std::array<int, 4>& counts);

}  // namespace mf
