#pragma once

#include <map>
#include <string>

#include "kvar/parse.hpp"

namespace kvar::testing {

// Fixed test variable table: fiber variables first, then base variables.
inline const std::map<std::string, VarId>& table() {
  static const std::map<std::string, VarId> t{
      {"a", 0}, {"b", 1}, {"c", 2}, {"d", 3}, {"x", 4}, {"y", 5}, {"z", 6}, {"e", 7},
      {"q", 8}, {"t", kBaseVarOffset}, {"s", kBaseVarOffset + 1}};
  return t;
}

inline VarId names_id(std::string_view n) {
  auto it = table().find(std::string(n));
  if (it == table().end()) throw ParseError("unknown test variable '" + std::string(n) + "'");
  return it->second;
}

inline std::string names(VarId v) {
  for (const auto& [n, id] : table())
    if (id == v) return n;
  return default_var_name(v);
}

inline Poly P(std::string_view s) { return parse_poly(s, names_id); }

}  // namespace kvar::testing

using kvar::testing::names_id;
