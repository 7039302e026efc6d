#include <doctest.h>

#include <chrono>

#include "mframe/forms.hpp"
#include "mframe/ledger.hpp"
#include "mframe/suites.hpp"

using namespace mf;

namespace {
const Check& find(const StructureReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  FAIL("missing check " << name);
  throw std::logic_error("unreachable");
}

bool mentions(const Check& c, const std::string& id) {
  for (const auto& d : c.display)
    if (d.find(id) != std::string::npos) return true;
  return false;
}
}  // namespace

TEST_CASE("levels round-trip through their names") {
  for (auto l : {StructureLevel::horizontal, StructureLevel::maurer_cartan,
                 StructureLevel::prolonged_coframe, StructureLevel::generic_branch})
    CHECK(parse_level(level_str(l)) == l);
  CHECK_FALSE(parse_level("nonsense"));
}

TEST_CASE("horizontal coframe equations hold exactly") {
  const StructureReport r = verify_structure(StructureLevel::horizontal);
  CHECK(r.ok());
  CHECK(find(r, "d sigma^x = sum_b mu^x_b ^ sigma^b").residual == "0");
  CHECK(find(r, "d sigma^x at the identity jet").ok);
  CHECK(mentions(find(r, "d sigma^q = sum_b mu^q_b ^ sigma^b"), "mc-qQ"));
  CHECK(mentions(find(r, "d sigma^r = sum_b mu^r_b ^ sigma^b"), "mc-rR"));
}

TEST_CASE("Maurer-Cartan structure equations hold for i, i + j <= 3") {
  const StructureReport r = verify_structure(StructureLevel::maurer_cartan);
  CHECK(r.ok());
  CHECK(r.checks.size() == 14);
  CHECK(find(r, "d mu_0").residual == "0");
  CHECK(find(r, "d mu_0,0").display.empty());
  CHECK(mentions(find(r, "d mu_0,1"), "mc-dmu"));
}

TEST_CASE("prolonged coframe: derived identities hold") {
  const StructureReport r = verify_structure(StructureLevel::prolonged_coframe);
  CHECK(find(r, "d o d = 0 on the formal recurrence algebra").ok);
  CHECK(find(r, "normalizations of the prolonged coframe").ok);
  CHECK(find(r, "normalized forms are closed under d").ok);
  for (const char* n : {"d omega^x", "d omega^u", "d omega^p"}) CHECK(find(r, n).ok);
  const Check& dq = find(r, "d omega^q");
  CHECK(dq.ok);
  CHECK(mentions(dq, "coframe-q"));
  CHECK(dq.absorbed.size() == 4);
}

TEST_CASE("prolonged coframe: printed d mu lines are not reproduced") {
  const StructureReport r = verify_structure(StructureLevel::prolonged_coframe);
  CHECK_FALSE(r.ok());
  const Check& a = find(r, "d mu^x_X");
  CHECK_FALSE(a.ok);
  CHECK(a.residual == "(-3/2*R_XXQ)*mu^x_X^omega^x + (-1)*mu^u_UX^omega^x");
  CHECK(mentions(a, "coframe-mu"));
  CHECK(mentions(a, "cs-constants"));
  const Check& b = find(r, "d mu^u_U");
  CHECK(b.residual ==
        "(-3/2*R_XXQ)*mu^x_X^omega^x + (-1/3)*mu^u_U^omega^u + (1/3*R_QQ)*mu^u_UX^omega^u + "
        "(-1)*mu^u_UX^omega^x");
  CHECK_FALSE(find(r, "d mu^u_UX").ok);
}

TEST_CASE("generic branch: normalizations hold, printed forms are not reproduced") {
  const StructureReport r = verify_structure(StructureLevel::generic_branch);
  CHECK(find(r, "normalizations of the generic branch (R_QQ = 0)").ok);
  CHECK(find(r, "normalized forms are closed under d").ok);
  const Check& m = find(r, "normalized mu^x_X");
  CHECK_FALSE(m.ok);
  CHECK(m.residual ==
        "(1/6*R_XXUQ - R_XUP)*omega^u + (1/6*R_XXXQ)*omega^x + (2/3*R_XUQ - R_XPP)*omega^p + "
        "(-R_PP - 1/2)*omega^q");
  CHECK(mentions(m, "generic-branch"));
  CHECK(mentions(m, "generic-QQ"));
}

TEST_CASE("every display note names a ledger entry") {
  std::vector<StructureReport> reps{verify_recurrence(), verify_mc_relations()};
  for (const auto& s : run_structure().reports) reps.push_back(s);
  for (const auto& r : reps)
    for (const auto& c : r.checks)
      for (const auto& d : c.display) {
        const auto sp = d.find(' ');
        const std::string id = d.substr(0, sp);
        bool known = false;
        for (const auto& e : typo_ledger()) known = known || e.id == id;
        const bool derived_note = d.rfind("lifted correction", 0) == 0 || d.rfind("arbitrated", 0) == 0 ||
                                  d.find(": mu") != std::string::npos || d.find(": mu^") != std::string::npos;
        CHECK_MESSAGE((known || derived_note), d);
      }
}

TEST_CASE("the structure suite runs well under two minutes") {
  const auto t0 = std::chrono::steady_clock::now();
  run_structure();
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(120));
}
