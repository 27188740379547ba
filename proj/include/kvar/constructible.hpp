#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kvar/poly.hpp"

namespace kvar {

/// Affine base of a family: named coordinates plus nonvanishing conditions.
/// Base variable k has id kBaseVarOffset + k. An empty chart is the point.
struct Chart {
  std::string label;
  std::vector<std::string> base_names;
  std::vector<Poly> domain;

  VarId base_var(std::size_t k) const { return kBaseVarOffset + static_cast<VarId>(k); }
  VarId base_var(std::string_view name) const;
  bool is_point() const { return base_names.empty(); }
  std::string var_name(VarId v) const;
  friend bool operator==(const Chart& a, const Chart& b) {
    return a.label == b.label && a.base_names == b.base_names && a.domain == b.domain;
  }
};

/// X(V, F, G) over a chart: fiber variables V, equations F = 0, inequations G != 0.
struct ConstructibleSet {
  Chart chart;
  std::vector<VarId> fiber;               // ascending ids, all below kBaseVarOffset
  std::vector<Poly> eqs;
  std::vector<Poly> neqs;
  std::map<VarId, std::string> fiber_names;  // display only

  std::string var_name(VarId v) const;
  VarId fresh_var() const;
  // Adds a fiber variable with the next free id.
  VarId add_var(const std::string& name);
  std::vector<VarId> variables_in_use() const;
  void sort_fiber();
};

/// Line-oriented text format:
///   chart: C3
///   base: t, s
///   domain: t, t-1, s, s-1, t-s
///   vars: a, b
///   eq: a^2 - t; b^2 - s
///   neq: a
/// Polynomial lists accept ',' or ';' as separators; '#' starts a comment.
ConstructibleSet parse_vset(std::string_view text);
std::string to_vset(const ConstructibleSet& x);

/// Deterministic key that ignores the order of F and G and renames fiber
/// variables to v1..vm in increasing id order. Used for memoization.
std::string memo_key(const ConstructibleSet& x);

/// Key additionally invariant under any permutation of the fiber variables
/// (minimum over permutations, recomputing the Groebner basis for each order)
/// when there are at most kCanonicalPermutationLimit fiber variables.
inline constexpr std::size_t kCanonicalPermutationLimit = 5;
std::string canonical_key(const ConstructibleSet& x);

/// Rebuilds a set from a key produced by memo_key or canonical_key.
ConstructibleSet set_from_key(std::string_view key);

std::string unit_key(const Chart& chart);

}  // namespace kvar
