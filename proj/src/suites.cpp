#include "mframe/suites.hpp"

#include <array>
#include <sstream>

#include "mframe/action.hpp"
#include "mframe/jet.hpp"
#include "mframe/parse.hpp"
#include "mframe/vfield.hpp"

namespace mf {

bool SuiteResult::ok() const {
  for (const auto& r : reports)
    if (!r.ok()) return false;
  return true;
}

namespace {

const char* const kSlots[3] = {"gamma", "tau", "varsigma"};
const char* const kComponents[5] = {"X", "U", "P", "Q", "R"};

std::string join_residuals(const std::vector<std::pair<std::string, Expr>>& parts) {
  std::string out;
  for (const auto& [name, e] : parts) {
    if (e.is_zero()) continue;
    if (!out.empty()) out += "; ";
    out += name + ": " + render_text(e);
  }
  return out.empty() ? "0" : out;
}

Check exact_check(std::string name, const std::vector<std::pair<std::string, Expr>>& parts) {
  Check c;
  c.name = std::move(name);
  c.residual = join_residuals(parts);
  c.ok = c.residual == "0";
  return c;
}

// Display deviations of one table against its derived form.
void note_display(Check& c, const std::string& slot, const Expr& derived, const Expr& shown,
                  const std::string& ids) {
  Expr diff = shown - derived;
  if (diff.is_zero()) return;
  c.display.push_back(slot + ": printed minus derived = " + render_text(diff) + " [" + ids + "]");
}

StructureReport determining_report() {
  StructureReport rep;
  rep.level = "determining";

  const ProlongedField pv = symbolic_prolong_generic();
  const DeterminingCheck dc = check_determining(pv);
  std::vector<std::pair<std::string, Expr>> parts;
  for (int k = 0; k < 3; ++k) parts.emplace_back(kSlots[k], dc.residuals[k]);
  Check formal = exact_check("formal-prolongation", parts);
  formal.ok = formal.ok && dc.ok;
  const auto closed = determining_closed_forms(VectorField{Expr(alpha_symbol(0)), Expr(beta_symbol(0, 0))});
  const auto shown = determining_display_forms();
  for (int k = 0; k < 3; ++k) note_display(formal, kSlots[k], closed[k], shown[k], "varsigma-p1");
  rep.checks.push_back(std::move(formal));

  const GroupJet g = GroupJet::formal(3);
  const Prolonged a = prolonged_action(g);
  const Prolonged b = chain_rule_action(g);
  Check action = exact_check("prolonged-action",
                             {{"X", a.X - b.X}, {"U", a.U - b.U}, {"P", a.P - b.P},
                              {"Q", a.Q - b.Q}, {"R", a.R - b.R}});
  const Helpers h = helpers(g);
  const Helpers hd = helpers_display(g);
  note_display(action, "delta", h.delta, hd.delta, "none");
  note_display(action, "epsilon", h.epsilon, hd.epsilon, "none");
  note_display(action, "psi", h.psi, hd.psi, "none");
  note_display(action, "chi", h.chi, hd.chi, "chi-p2, chi-p1, chi-tail, chi-pq");
  note_display(action, "R", a.R, displayed_R(g), "chi-p1");
  rep.checks.push_back(std::move(action));
  return rep;
}

Expr random_xi(RationalSampler& s) {
  const Expr x(base::x());
  Expr e;
  for (int k = 0; k <= 3; ++k) e += Expr(s.next()) * x.pow(k);
  return e;
}

Expr random_phi(RationalSampler& s) {
  const Expr x(base::x()), u(base::u());
  Expr e;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j) e += Expr(s.next()) * x.pow(i) * u.pow(j);
  return e;
}

// The jet of g at the base point (x, u) with exact rational entries.
GroupJet jet_at_point(const GroupJet& g, const Q& x, const Q& u) {
  const Point pt{{base::x(), x}, {base::u(), u}};
  GroupJet out;
  out.order = g.order;
  for (const auto& [k, e] : g.xi) out.xi.emplace(k, Expr(evaluate(e, pt)));
  for (const auto& [ij, e] : g.phi) out.phi.emplace(ij, Expr(evaluate(e, pt)));
  return out;
}

bool invertible_at(const GroupJet& g, const Q& x, const Q& u) {
  const Point pt{{base::x(), x}, {base::u(), u}};
  return sgn(evaluate(g.xi_at(1), pt)) != 0 && sgn(evaluate(g.phi_at(0, 1), pt)) != 0;
}

std::array<Q, 5> apply(const GroupJet& g, const std::array<Q, 5>& z) {
  const Prolonged a = evaluate_action(jet_at_point(g, z[0], z[1]), z[0], z[1], z[2], z[3], z[4]);
  return {*a.X.constant(), *a.U.constant(), *a.P.constant(), *a.Q.constant(), *a.R.constant()};
}

StructureReport group_law_report(std::uint64_t seed, int count) {
  StructureReport rep;
  rep.level = "group-law";
  RationalSampler s(seed);
  const Expr x(base::x()), u(base::u());
  for (int k = 0; k < count; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 64) throw ActionError("group-law sampling exhausted its retry budget");
      const Expr X1 = random_xi(s), U1 = random_phi(s);
      const Expr X2 = random_xi(s), U2 = random_phi(s);
      const GroupJet g1 = GroupJet::of_map(X1, U1, 3);
      const GroupJet g2 = GroupJet::of_map(X2, U2, 3);
      const Expr X21 = substitute(X2, {{base::x(), X1}});
      const Expr U21 = substitute(U2, {{base::x(), X1}, {base::u(), U1}});
      const GroupJet g21 = GroupJet::of_map(X21, U21, 3);
      const std::array<Q, 5> z{s.next(), s.next(), s.next(), s.next(), s.next()};
      if (!invertible_at(g1, z[0], z[1])) continue;
      const std::array<Q, 5> z1 = apply(g1, z);
      if (!invertible_at(g2, z1[0], z1[1])) continue;
      const std::array<Q, 5> lhs = apply(g21, z);
      const std::array<Q, 5> rhs = apply(g2, z1);
      std::vector<std::pair<std::string, Expr>> parts;
      for (int c = 0; c < 5; ++c) parts.emplace_back(kComponents[c], Expr(Q(lhs[c] - rhs[c])));
      std::ostringstream name;
      name << "composition-" << (k + 1) << " at (" << q_to_string(z[0]);
      for (int c = 1; c < 5; ++c) name << ", " << q_to_string(z[c]);
      name << ")";
      rep.checks.push_back(exact_check(name.str(), parts));
      break;
    }
  }
  return rep;
}

}  // namespace

SuiteResult run_determining() { return {"determining", {determining_report()}}; }

SuiteResult run_group_law(std::uint64_t seed, int count) {
  return {"group-law", {group_law_report(seed, count)}};
}

SuiteResult run_structure() {
  SuiteResult r{"structure", {}};
  for (auto l : {StructureLevel::horizontal, StructureLevel::maurer_cartan,
                 StructureLevel::prolonged_coframe, StructureLevel::generic_branch})
    r.reports.push_back(verify_structure(l));
  return r;
}

SuiteResult run_recurrence() { return {"recurrence", {verify_recurrence(), verify_mc_relations()}}; }

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"determining", "group-law", "structure", "recurrence",
                                              "all"};
  return names;
}

bool valid_suite(const std::string& name) {
  for (const auto& n : suite_names())
    if (n == name) return true;
  return false;
}

std::vector<SuiteResult> run_suites(const std::string& name, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  const bool all = name == "all";
  if (all || name == "determining") out.push_back(run_determining());
  if (all || name == "group-law") out.push_back(run_group_law(seed));
  if (all || name == "structure") out.push_back(run_structure());
  if (all || name == "recurrence") out.push_back(run_recurrence());
  return out;
}

}  // namespace mf
