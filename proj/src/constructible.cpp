#include "kvar/constructible.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "kvar/algebra.hpp"
#include "kvar/parse.hpp"

namespace kvar {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_any(std::string_view s, std::string_view seps) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || seps.find(s[i]) != std::string_view::npos) {
      std::string item = trim(s.substr(start, i - start));
      if (!item.empty()) out.push_back(std::move(item));
      start = i + 1;
    }
  }
  return out;
}

bool valid_identifier(const std::string& n) {
  if (n.empty() || !std::isalpha(static_cast<unsigned char>(n[0]))) return false;
  return std::all_of(n.begin(), n.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> sorted_prints(const std::vector<Poly>& polys, const NameFn& names, bool normalize) {
  std::set<std::string> seen;
  for (const auto& p : polys) {
    if (p.is_zero()) continue;
    seen.insert((normalize ? p.primitive() : p).str(names));
  }
  return {seen.begin(), seen.end()};
}

std::string key_of(const Chart& chart, std::size_t nvars, const std::vector<Poly>& eqs,
                   const std::vector<Poly>& neqs) {
  // Fiber variables must already be renamed to ids 0..nvars-1.
  NameFn names = [&](VarId v) {
    if (is_base_var(v)) return chart.var_name(v);
    return "v" + std::to_string(v + 1);
  };
  std::string k = "chart=" + chart.label;
  k += "|base=" + join(chart.base_names, ",");
  k += "|domain=" + join(sorted_prints(chart.domain, names, true), ",");
  k += "|vars=" + std::to_string(nvars);
  k += "|eq=" + join(sorted_prints(eqs, names, false), ",");
  k += "|neq=" + join(sorted_prints(neqs, names, true), ",");
  return k;
}

std::vector<Poly> renamed(const std::vector<Poly>& polys, const std::function<VarId(VarId)>& f) {
  std::vector<Poly> out;
  out.reserve(polys.size());
  for (const auto& p : polys) out.push_back(p.rename(f));
  return out;
}

}  // namespace

VarId Chart::base_var(std::string_view name) const {
  for (std::size_t k = 0; k < base_names.size(); ++k)
    if (base_names[k] == name) return base_var(k);
  throw ParseError("unknown base variable '" + std::string(name) + "'");
}

std::string Chart::var_name(VarId v) const {
  if (is_base_var(v)) {
    std::size_t k = v - kBaseVarOffset;
    if (k < base_names.size()) return base_names[k];
  }
  return default_var_name(v);
}

std::string ConstructibleSet::var_name(VarId v) const {
  if (is_base_var(v)) return chart.var_name(v);
  auto it = fiber_names.find(v);
  if (it != fiber_names.end()) return it->second;
  return default_var_name(v);
}

VarId ConstructibleSet::fresh_var() const {
  VarId next = 0;
  for (VarId v : fiber) next = std::max(next, v + 1);
  for (const auto* list : {&eqs, &neqs})
    for (const auto& p : *list)
      for (VarId v : p.variables())
        if (!is_base_var(v)) next = std::max(next, v + 1);
  return next;
}

VarId ConstructibleSet::add_var(const std::string& name) {
  VarId v = fresh_var();
  fiber.push_back(v);
  if (!name.empty()) fiber_names[v] = name;
  return v;
}

std::vector<VarId> ConstructibleSet::variables_in_use() const {
  std::set<VarId> used;
  for (const auto* list : {&eqs, &neqs})
    for (const auto& p : *list)
      for (VarId v : p.variables())
        if (!is_base_var(v)) used.insert(v);
  return {used.begin(), used.end()};
}

void ConstructibleSet::sort_fiber() {
  std::sort(fiber.begin(), fiber.end());
  fiber.erase(std::unique(fiber.begin(), fiber.end()), fiber.end());
}

ConstructibleSet parse_vset(std::string_view text) {
  ConstructibleSet x;
  std::map<std::string, VarId> ids;
  std::vector<std::pair<std::string, std::string>> poly_lines;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto declare = [&](const std::string& n, VarId id) {
    if (!valid_identifier(n)) throw ParseError("line " + std::to_string(lineno) + ": bad variable name '" + n + "'");
    if (n == "q") throw ParseError("line " + std::to_string(lineno) + ": 'q' is reserved");
    if (!ids.emplace(n, id).second)
      throw ParseError("line " + std::to_string(lineno) + ": variable '" + n + "' declared twice");
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::string l = trim(line);
    if (l.empty()) continue;
    auto colon = l.find(':');
    if (colon == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected 'key: value'");
    std::string key = trim(std::string_view(l).substr(0, colon));
    std::string value = trim(std::string_view(l).substr(colon + 1));
    if (key == "chart") {
      x.chart.label = value;
    } else if (key == "base") {
      for (auto& n : split_any(value, ",;")) {
        declare(n, x.chart.base_var(x.chart.base_names.size()));
        x.chart.base_names.push_back(n);
      }
    } else if (key == "vars") {
      for (auto& n : split_any(value, ",;")) {
        VarId v = static_cast<VarId>(x.fiber.size());
        declare(n, v);
        x.fiber.push_back(v);
        x.fiber_names[v] = n;
      }
    } else if (key == "domain" || key == "eq" || key == "neq") {
      for (auto& p : split_any(value, ",;")) poly_lines.emplace_back(key, p);
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  auto lookup = [&](std::string_view n) {
    auto it = ids.find(std::string(n));
    if (it == ids.end()) throw ParseError("undeclared variable '" + std::string(n) + "'");
    return it->second;
  };
  for (const auto& [key, src] : poly_lines) {
    Poly p = parse_poly(src, lookup);
    if (key == "domain") {
      if (p.has_fiber_vars()) throw ParseError("domain inequation uses fiber variables: '" + src + "'");
      x.chart.domain.push_back(p);
    } else if (key == "eq") {
      x.eqs.push_back(p);
    } else {
      x.neqs.push_back(p);
    }
  }
  return x;
}

std::string to_vset(const ConstructibleSet& x) {
  NameFn names = [&](VarId v) { return x.var_name(v); };
  auto polys = [&](const std::vector<Poly>& ps) {
    std::vector<std::string> s;
    for (const auto& p : ps) s.push_back(p.str(names));
    return join(s, "; ");
  };
  std::vector<std::string> vars;
  for (VarId v : x.fiber) vars.push_back(x.var_name(v));
  std::string out;
  if (!x.chart.label.empty()) out += "chart: " + x.chart.label + "\n";
  if (!x.chart.base_names.empty()) out += "base: " + join(x.chart.base_names, ", ") + "\n";
  if (!x.chart.domain.empty()) out += "domain: " + polys(x.chart.domain) + "\n";
  if (!vars.empty()) out += "vars: " + join(vars, ", ") + "\n";
  if (!x.eqs.empty()) out += "eq: " + polys(x.eqs) + "\n";
  if (!x.neqs.empty()) out += "neq: " + polys(x.neqs) + "\n";
  return out;
}

std::string memo_key(const ConstructibleSet& x) {
  std::vector<VarId> order = x.fiber;
  std::sort(order.begin(), order.end());
  std::map<VarId, VarId> to;
  for (std::size_t i = 0; i < order.size(); ++i) to[order[i]] = static_cast<VarId>(i);
  auto f = [&](VarId v) { return is_base_var(v) ? v : to.at(v); };
  return key_of(x.chart, order.size(), renamed(x.eqs, f), renamed(x.neqs, f));
}

std::string canonical_key(const ConstructibleSet& x) {
  std::vector<VarId> order = x.fiber;
  std::sort(order.begin(), order.end());
  std::size_t m = order.size();
  if (m < 2 || m > kCanonicalPermutationLimit) return memo_key(x);
  std::vector<VarId> perm(m);
  std::iota(perm.begin(), perm.end(), VarId{0});
  std::string best;
  do {
    std::map<VarId, VarId> to;
    for (std::size_t i = 0; i < m; ++i) to[order[i]] = perm[i];
    auto f = [&](VarId v) { return is_base_var(v) ? v : to.at(v); };
    std::vector<Poly> eqs = renamed(x.eqs, f);
    std::vector<Poly> gb = reduced_groebner(eqs);
    std::vector<Poly> neqs;
    for (const auto& g : renamed(x.neqs, f)) neqs.push_back(gb.empty() ? g : normal_form(g, gb));
    std::string k = key_of(x.chart, m, gb, neqs);
    if (best.empty() || k < best) best = std::move(k);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ConstructibleSet set_from_key(std::string_view key) {
  std::map<std::string, std::string> fields;
  for (const auto& part : split_any(key, "|")) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw ParseError("malformed key field '" + part + "'");
    fields[part.substr(0, eq)] = part.substr(eq + 1);
  }
  for (const char* f : {"chart", "base", "domain", "vars", "eq", "neq"})
    if (!fields.count(f)) throw ParseError(std::string("key lacks field '") + f + "'");
  ConstructibleSet x;
  x.chart.label = fields["chart"];
  x.chart.base_names = split_any(fields["base"], ",");
  std::size_t m = std::stoul(fields["vars"]);
  for (std::size_t i = 0; i < m; ++i) x.fiber.push_back(static_cast<VarId>(i));
  auto lookup = [&](std::string_view n) -> VarId {
    if (n.size() > 1 && n[0] == 'v' && std::all_of(n.begin() + 1, n.end(), ::isdigit)) {
      std::size_t k = std::stoul(std::string(n.substr(1)));
      if (k >= 1 && k <= m) return static_cast<VarId>(k - 1);
    }
    return x.chart.base_var(n);
  };
  for (const auto& p : split_any(fields["domain"], ",")) x.chart.domain.push_back(parse_poly(p, lookup));
  for (const auto& p : split_any(fields["eq"], ",")) x.eqs.push_back(parse_poly(p, lookup));
  for (const auto& p : split_any(fields["neq"], ",")) x.neqs.push_back(parse_poly(p, lookup));
  return x;
}

std::string unit_key(const Chart& chart) { return key_of(chart, 0, {}, {}); }

}  // namespace kvar
