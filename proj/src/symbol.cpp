#include <deque>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "mframe/expr.hpp"

namespace mf {
namespace {

struct SymbolTable {
  std::shared_mutex mu;
  std::deque<std::string> names;
  std::vector<SymKind> kinds;
  std::unordered_map<std::string, std::uint32_t> index;

  SymbolTable() {
    for (const char* n : {"x", "u", "p", "q", "r"}) {
      index.emplace(n, static_cast<std::uint32_t>(names.size()));
      names.emplace_back(n);
      kinds.push_back(SymKind::base);
    }
  }
};

SymbolTable& table() {
  static SymbolTable t;
  return t;
}

const char* kind_name(SymKind k) {
  switch (k) {
    case SymKind::base: return "base-coordinate";
    case SymKind::fjet: return "f-jet";
    case SymKind::group: return "group-jet";
    case SymKind::formal: return "formal";
  }
  return "?";
}

}  // namespace

Sym symbol(std::string_view name, SymKind kind) {
  auto& t = table();
  std::string key(name);
  {
    std::shared_lock lock(t.mu);
    auto it = t.index.find(key);
    if (it != t.index.end()) {
      if (t.kinds[it->second] != kind)
        throw ExprError("symbol '" + key + "' already exists as " +
                        kind_name(t.kinds[it->second]));
      return Sym{it->second};
    }
  }
  std::unique_lock lock(t.mu);
  auto it = t.index.find(key);
  if (it != t.index.end()) {
    if (t.kinds[it->second] != kind)
      throw ExprError("symbol '" + key + "' already exists as " +
                      kind_name(t.kinds[it->second]));
    return Sym{it->second};
  }
  auto id = static_cast<std::uint32_t>(t.names.size());
  t.names.push_back(key);
  t.kinds.push_back(kind);
  t.index.emplace(std::move(key), id);
  return Sym{id};
}

std::optional<Sym> lookup_symbol(std::string_view name) {
  auto& t = table();
  std::shared_lock lock(t.mu);
  auto it = t.index.find(std::string(name));
  if (it == t.index.end()) return std::nullopt;
  return Sym{it->second};
}

const std::string& sym_name(Sym s) {
  auto& t = table();
  std::shared_lock lock(t.mu);
  return t.names.at(s.id);
}

SymKind sym_kind(Sym s) {
  auto& t = table();
  std::shared_lock lock(t.mu);
  return t.kinds.at(s.id);
}

namespace base {
Sym x() { return Sym{0}; }
Sym u() { return Sym{1}; }
Sym p() { return Sym{2}; }
Sym q() { return Sym{3}; }
Sym r() { return Sym{4}; }
}  // namespace base

}  // namespace mf
