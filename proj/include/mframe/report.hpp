#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mframe/frame.hpp"
#include "mframe/parse.hpp"
#include "mframe/suites.hpp"

namespace mf {

std::string tool_version();

struct RunConfig {
  std::string command;
  std::vector<std::string> odes;  // --ode texts
  std::string corpus;             // corpus path, when given
  int points = 10;
  std::uint64_t seed = 0;
  int order = 4;
  std::string mode = "pointwise";
  Format format = Format::text;
  std::size_t budget = 20000;  // term cap in symbolic mode
  std::string suite = "all";
  std::string hint_x, hint_u;  // equivalent --map-x / --map-u
};

std::string format_str(Format f);
Json config_json(const RunConfig& cfg);
// {tool-version, typo-ledger-version, config, results, suite-residuals}
Json envelope(const RunConfig& cfg, Json results, Json suites);

Json invariant_json(const OdeInput& ode, const InvariantReport& rep);
std::string invariant_text(const OdeInput& ode, const InvariantReport& rep);
std::string invariant_latex(const OdeInput& ode, const InvariantReport& rep);

// Classification rows report the invariants at the first sampled point.
struct ClassifyRow {
  OdeInput ode;
  InvariantReport report;
};
Json classify_json(const ClassifyRow& row);
std::string classify_text(const std::vector<ClassifyRow>& rows);
std::string classify_latex(const std::vector<ClassifyRow>& rows);

Json equivalence_json(const OdeInput& a, const OdeInput& b, const EquivalenceResult& r);
std::string equivalence_text(const OdeInput& a, const OdeInput& b, const EquivalenceResult& r);

Json check_json(const Check& c);
Json suite_json(const SuiteResult& s);
std::string suite_text(const SuiteResult& s);

}  // namespace mf
