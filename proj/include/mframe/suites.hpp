#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mframe/forms.hpp"

namespace mf {

// One verification suite, made of reports whose checks carry residuals.
struct SuiteResult {
  std::string suite;
  std::vector<StructureReport> reports;
  bool ok() const;
};

// Formal prolongation against the closed-form determining system, the helper
// table and the chain-rule construction of the prolonged action.
SuiteResult run_determining();
// Prolonged action of a composition against the composition of actions.
SuiteResult run_group_law(std::uint64_t seed, int count = 25);
SuiteResult run_structure();
// Recurrence formulae and the Maurer-Cartan relations.
SuiteResult run_recurrence();

const std::vector<std::string>& suite_names();  // determining ... all
bool valid_suite(const std::string& name);
std::vector<SuiteResult> run_suites(const std::string& name, std::uint64_t seed);

}  // namespace mf
