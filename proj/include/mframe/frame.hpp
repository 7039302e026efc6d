#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mframe/action.hpp"
#include "mframe/jet.hpp"

namespace mf {

struct FrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A stage equation is degenerate at this point; the caller may resample.
struct DegeneratePoint : FrameError {
  DegeneratePoint(const std::string& msg, std::string stage_word)
      : FrameError(msg), word(std::move(stage_word)) {}
  std::string word;
};
struct BudgetExceeded : FrameError {
  using FrameError::FrameError;
};

// One normalization: R_word = value, solved for the group jet `target`.
struct StageEquation {
  std::string stage;
  std::string word;
  int value;
  Sym target;
};

const std::vector<StageEquation>& cross_section();
// Generic-branch normalizations; the first one depends on whether R_QQ vanishes.
const std::vector<StageEquation>& generic_stage(bool qq_vanishes);
// Free group jets left by the cross-section, with their reference values.
const std::vector<std::pair<Sym, Q>>& residual_parameters();

enum class Branch { generic, wunschmann_flat, non_generic };

struct BranchTag {
  Branch kind = Branch::non_generic;
  std::string detail;
  std::string str() const;
  friend bool operator==(const BranchTag& a, const BranchTag& b) {
    return a.kind == b.kind && a.detail == b.detail;
  }
};

// Exact element c * theta^k of Q(theta), theta the real cube root of v.
struct CubicValue {
  Q coeff;
  int power = 0;  // 0, 1 or 2
  Q radicand = 1;
  Q cube() const;  // coeff^3 * radicand^power
  std::string str() const;
  friend bool operator==(const CubicValue& a, const CubicValue& b);
};

struct StageRecord {
  std::string stage;
  std::string word;
  int value = 0;
  std::string target;
  Expr leading;   // coefficient of the target
  Expr residual;  // R_word - value after back-substitution
};

struct FrameSolution {
  JetPoint point;
  std::map<MultiIndex, Q> transported;  // partials of the transported equation at the origin
  std::map<Sym, Expr> solved;           // in terms of the residual parameters
  std::vector<StageRecord> stages;
  // QQ, XPQ, XXQ and the auxiliary PP, in terms of the residual parameters.
  std::map<std::string, Expr> fundamental;
  BranchTag branch;  // from identical vanishing in the residual parameters

  struct Generic {
    std::string phi_xu_word;  // XXPQ when R_QQ vanishes, XPQ otherwise
    std::string phi_u_word;   // XPQ when R_QQ vanishes, QQ otherwise
    Expr phi_xu;
    Q radicand;           // v with xi_x^3 = v
    Q phi_u_scale;        // phi_u = phi_u_scale * theta^phi_u_power
    int phi_u_power = 0;
    std::map<std::string, CubicValue> extras;
    std::vector<StageRecord> stages;
    std::vector<std::string> residuals_in_extension;  // textual residuals, all "0"
  };
  std::optional<Generic> generic;

  Q reference(const std::string& word) const;  // fundamental value at the reference frame
};

// Partials (up to order) at the origin of the equation moved by the
// translation that sends the point to the origin with P = Q = 0.
std::map<MultiIndex, Q> transported_jet(const JetPoint& pt, int order);
// The same quantities as symbolic expressions in p, q and the formal F-jet.
const Expr& transported_symbolic(const MultiIndex& s);

// R_word at the origin with the translation part absorbed (formal F-jets).
const Expr& origin_invariant(const std::string& word);

FrameSolution solve_cross_section(const FJet& fjet, const JetPoint& point, int max_order);
FrameSolution solve_at_jet(const JetPoint& point, int max_order);

enum class Verdict { linearizable, not_linearizable, non_generic_partial };
std::string verdict_str(Verdict v);

struct InvariantOptions {
  int points = 10;
  std::uint64_t seed = 0;
  int order = 4;
  int resamples = 32;
  int box = 7;
};

struct InvariantReport {
  std::string mode = "pointwise";
  std::vector<FrameSolution> frames;  // one per point, by point index
  std::vector<std::string> failures;  // point slots that exhausted the resample budget
  BranchTag branch;
  Verdict verdict = Verdict::non_generic_partial;
  std::vector<std::string> stage_order;
  // Symbolic mode only: closed forms over the residual parameters.
  std::map<std::string, Expr> closed_forms;
};

InvariantReport invariants(const FJet& fjet, const InvariantOptions& opt);
InvariantReport invariants(const Expr& F, const InvariantOptions& opt);

struct SymbolicInvariants {
  std::map<std::string, Expr> forms;  // QQ, XPQ, XXQ over the residual parameters
};
// Closed forms over the formal F-jet (fjet == nullptr) or specialized to fjet.
SymbolicInvariants symbolic_invariants(const FJet* fjet, std::size_t budget);
InvariantReport symbolic_report(const Expr& F, std::size_t budget, const InvariantOptions& opt);

// Equation u''' = F_A whose image under (X, U) = map is U''' = G.
Expr pullback(const Expr& G, const Expr& X, const Expr& U);

enum class Equivalence { necessarily_inequivalent, consistent, verified_by_hint };
std::string equivalence_str(Equivalence e);

struct MapHint {
  Expr X;
  Expr U;
};

struct EquivalenceResult {
  Equivalence verdict;
  std::string note;
  int matched_points = 0;
};

EquivalenceResult equivalence_signature(const Expr& A, const Expr& B,
                                        const std::optional<MapHint>& hint,
                                        const InvariantOptions& opt);

// Image of the point (x, u, p, q) under the prolonged map.
std::array<Q, 4> map_point(const GroupJet& g, const std::array<Q, 4>& z);

}  // namespace mf
