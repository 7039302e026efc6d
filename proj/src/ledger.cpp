#include "mframe/ledger.hpp"

#include <json.hpp>
#include <stdexcept>

namespace mf {

namespace detail {
extern const char* const kTypoLedgerJson;
}

namespace {

struct Ledger {
  std::string version;
  std::vector<LedgerEntry> entries;
};

const Ledger& ledger() {
  static const Ledger l = [] {
    auto j = nlohmann::json::parse(detail::kTypoLedgerJson);
    Ledger out;
    out.version = j.at("version").get<std::string>();
    for (const auto& e : j.at("entries"))
      out.entries.push_back({e.at("id").get<std::string>(), e.at("location").get<std::string>(),
                             e.at("displayed").get<std::string>(), e.at("derived").get<std::string>(),
                             e.at("note").get<std::string>()});
    return out;
  }();
  return l;
}

}  // namespace

const std::vector<LedgerEntry>& typo_ledger() { return ledger().entries; }

std::string typo_ledger_version() { return ledger().version; }

const LedgerEntry& ledger_entry(const std::string& id) {
  for (const auto& e : ledger().entries)
    if (e.id == id) return e;
  throw std::out_of_range("unknown ledger entry " + id);
}

}  // namespace mf
