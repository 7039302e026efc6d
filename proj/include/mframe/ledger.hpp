#pragma once

#include <string>
#include <vector>

namespace mf {

struct LedgerEntry {
  std::string id;
  std::string location;
  std::string displayed;
  std::string derived;
  std::string note;
};

const std::vector<LedgerEntry>& typo_ledger();
std::string typo_ledger_version();
// Throws std::out_of_range for unknown ids.
const LedgerEntry& ledger_entry(const std::string& id);

}  // namespace mf
