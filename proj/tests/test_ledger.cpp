#include <doctest.h>

#include <set>
#include <stdexcept>

#include "mframe/ledger.hpp"

using namespace mf;

TEST_CASE("ledger contents") {
  CHECK(typo_ledger_version() == "2026.10-1");
  CHECK(typo_ledger().size() == 22);
  std::set<std::string> ids;
  for (const auto& e : typo_ledger()) {
    CHECK(ids.insert(e.id).second);
    CHECK_FALSE(e.location.empty());
    CHECK(e.displayed != e.derived);
  }
  CHECK(ledger_entry("chi-p2").id == "chi-p2");
  CHECK_THROWS_AS(ledger_entry("no-such-entry"), std::out_of_range);
}
