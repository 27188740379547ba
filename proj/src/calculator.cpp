#include "kvar/calculator.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "kvar/algebra.hpp"

namespace kvar {

// ---- VirtualClass ----

VirtualClass::VirtualClass(const SymbolId& s, QPoly c) { add(s, c); }

void VirtualClass::add(const SymbolId& s, const QPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.emplace(s, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

std::optional<QPoly> VirtualClass::multiple_of(const SymbolId& s) const {
  if (terms_.empty()) return QPoly{};
  if (terms_.size() == 1 && terms_.begin()->first == s) return terms_.begin()->second;
  return std::nullopt;
}

QPoly VirtualClass::coeff(const SymbolId& s) const {
  auto it = terms_.find(s);
  return it == terms_.end() ? QPoly{} : it->second;
}

VirtualClass& VirtualClass::operator+=(const VirtualClass& o) {
  for (const auto& [s, c] : o.terms_) add(s, c);
  return *this;
}

VirtualClass& VirtualClass::operator-=(const VirtualClass& o) {
  for (const auto& [s, c] : o.terms_) add(s, -c);
  return *this;
}

VirtualClass VirtualClass::scaled(const QPoly& c) const {
  VirtualClass r;
  for (const auto& [s, k] : terms_) r.add(s, k * c);
  return r;
}

// ---- SymbolRegistry ----

namespace {

std::string fnv_label(const std::string& key) {
  std::uint32_t h = 2166136261u;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 16777619u;
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "X%08x", h);
  return buf;
}

}  // namespace

SymbolId SymbolRegistry::intern(const std::string& key, const std::string& chart_label, bool* created) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = symbols_.emplace(key, SymbolInfo{});
  if (inserted) it->second.chart = chart_label;
  if (created) *created = inserted;
  return it->first;
}

SymbolId SymbolRegistry::unit(const Chart& chart) {
  std::string key = unit_key(chart);
  std::lock_guard lock(mu_);
  auto [it, inserted] = symbols_.emplace(key, SymbolInfo{});
  if (inserted) {
    it->second.chart = chart.label;
    it->second.unit = true;
  }
  return it->first;
}

void SymbolRegistry::set_label(const SymbolId& id, const std::string& label) {
  std::lock_guard lock(mu_);
  auto& info = symbols_.at(id);
  info.label = label;
  info.generator = true;
}

bool SymbolRegistry::contains(const SymbolId& id) const {
  std::lock_guard lock(mu_);
  return symbols_.count(id) > 0;
}

SymbolInfo SymbolRegistry::info(const SymbolId& id) const {
  std::lock_guard lock(mu_);
  auto it = symbols_.find(id);
  if (it != symbols_.end()) return it->second;
  // Unknown ids still print: they are keys of sets.
  SymbolInfo s;
  s.chart = set_from_key(id).chart.label;
  return s;
}

std::string SymbolRegistry::label(const SymbolId& id) const {
  SymbolInfo s = info(id);
  if (!s.label.empty()) return s.label;
  if (s.unit || id == unit_key(set_from_key(id).chart)) return s.chart.empty() ? "" : "1@" + s.chart;
  std::string l = fnv_label(id);
  return s.chart.empty() ? l : l + "@" + s.chart;
}

std::optional<SymbolId> SymbolRegistry::find_label(const std::string& label) const {
  std::lock_guard lock(mu_);
  for (const auto& [id, s] : symbols_)
    if (s.label == label) return id;
  return std::nullopt;
}

std::vector<SymbolId> SymbolRegistry::ids() const {
  std::lock_guard lock(mu_);
  std::vector<SymbolId> out;
  for (const auto& [id, s] : symbols_) out.push_back(id);
  return out;
}

std::size_t SymbolRegistry::size() const {
  std::lock_guard lock(mu_);
  return symbols_.size();
}

// ---- MemoCache ----

std::optional<VirtualClass> MemoCache::lookup(const std::string& key) {
  std::lock_guard lock(mu_);
  auto it = table_.find(key);
  if (it == table_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void MemoCache::store(const std::string& key, const VirtualClass& value) {
  std::lock_guard lock(mu_);
  table_[key] = value;
}

std::size_t MemoCache::size() const {
  std::lock_guard lock(mu_);
  return table_.size();
}

std::map<std::string, VirtualClass> MemoCache::snapshot() const {
  std::lock_guard lock(mu_);
  return {table_.begin(), table_.end()};
}

void MemoCache::clear() {
  std::lock_guard lock(mu_);
  table_.clear();
  hits_ = 0;
  misses_ = 0;
}

// ---- simplification ----

namespace {

std::vector<Poly> domain_factors(const Chart& chart) {
  std::set<Poly> out;
  for (const auto& d : chart.domain)
    for (const auto& [f, m] : factor(d).factors) out.insert(f.primitive());
  return {out.begin(), out.end()};
}

bool contains_poly(const std::vector<Poly>& v, const Poly& p) {
  return std::find(v.begin(), v.end(), p) != v.end();
}

// Variables known to be nonzero on the set: fiber variables that are members
// of G and base variables excluded by the chart domain.
std::set<VarId> nonzero_vars(const ConstructibleSet& s, const std::vector<Poly>& dom) {
  std::set<VarId> out;
  auto scan = [&](const Poly& p) {
    if (p.size() == 1 && p.lead_mono().degree() == 1) out.insert(p.lead_mono().factors()[0].first);
  };
  for (const auto& g : s.neqs) scan(g);
  for (const auto& d : dom) scan(d);
  return out;
}

using Exps = std::map<VarId, int>;

Exps exps_of(const Monomial& m) {
  Exps e;
  for (const auto& [v, k] : m.factors()) e[v] = static_cast<int>(k);
  return e;
}

// Polynomial from terms with integer (possibly negative) exponents; every
// variable is shifted up so its smallest exponent is zero.
Poly from_laurent(std::vector<std::pair<Exps, Rational>> terms) {
  Exps shift;
  for (const auto& [e, c] : terms)
    for (const auto& [v, k] : e)
      if (k < 0) shift[v] = std::max(shift[v], -k);
  std::vector<Term> out;
  for (auto& [e, c] : terms) {
    for (const auto& [v, k] : shift) e[v] += k;
    std::vector<Monomial::Factor> f;
    for (const auto& [v, k] : e)
      if (k > 0) f.emplace_back(v, static_cast<std::uint32_t>(k));
    out.push_back({Monomial::from_factors(std::move(f)), c});
  }
  return Poly::from_terms(std::move(out));
}

// Divides p by the largest monomial in nonvanishing variables that divides it.
Poly strip_units(const Poly& p, const std::set<VarId>& nz) {
  if (p.is_zero()) return p;
  std::vector<std::pair<Exps, Rational>> terms;
  for (const auto& t : p.terms()) terms.emplace_back(exps_of(t.mono), t.coeff);
  for (VarId v : nz) {
    int low = std::numeric_limits<int>::max();
    for (auto& [e, c] : terms) low = std::min(low, e.count(v) ? e[v] : 0);
    if (low > 0)
      for (auto& [e, c] : terms)
        if ((e[v] -= low) == 0) e.erase(v);
  }
  return from_laurent(std::move(terms));
}

// p at y -> lambda*y*mu for a Laurent monomial mu, times a monomial making it
// a polynomial.
Poly rescale(const Poly& p, VarId y, const Rational& lambda, const Exps& mu) {
  std::vector<std::pair<Exps, Rational>> terms;
  for (const auto& t : p.terms()) {
    Exps e = exps_of(t.mono);
    const int k = static_cast<int>(t.mono.exponent(y));
    Rational c = t.coeff;
    for (int i = 0; i < k; ++i) c *= lambda;
    for (const auto& [v, mk] : mu) {
      int val = (e.count(v) ? e[v] : 0) + k * mk;
      if (val) e[v] = val; else e.erase(v);
    }
    terms.emplace_back(std::move(e), c);
  }
  return from_laurent(std::move(terms));
}

// nonzero_vars plus fiber variables some equation forces to be nonzero:
// f restricted to y = 0 is a product of nonvanishing factors.
std::set<VarId> forced_nonzero(const ConstructibleSet& s, const std::vector<Poly>& dom) {
  std::set<VarId> nz = nonzero_vars(s, dom);
  auto unit = [&](const Poly& r) {
    if (r.is_zero()) return false;
    for (const auto& [g, m] : factor(r).factors) {
      Poly p = g.primitive();
      if (contains_poly(dom, p) || contains_poly(s.neqs, p)) continue;
      if (p.size() == 1 && p.lead_mono().degree() == 1 && nz.count(p.lead_mono().factors()[0].first)) continue;
      return false;
    }
    return true;
  };
  for (bool grew = true; grew;) {
    grew = false;
    for (VarId y : s.fiber) {
      if (nz.count(y)) continue;
      for (const auto& f : s.eqs)
        if (f.contains(y) && unit(f.substitute(y, Poly(0)))) {
          nz.insert(y);
          grew = true;
          break;
        }
    }
  }
  return nz;
}

struct Measure {
  std::size_t deg = 0, vars = 0, bits = 0;
};

Measure measure(const std::vector<Poly>& eqs) {
  Measure m;
  for (const auto& f : eqs) {
    m.deg += f.total_degree();
    m.vars += f.variables().size();
    for (const auto& t : f.terms())
      m.bits += mpz_sizeinbase(t.coeff.get_num_mpz_t(), 2) + mpz_sizeinbase(t.coeff.get_den_mpz_t(), 2);
  }
  return m;
}

// Neither degree nor variable count grows, and something shrinks.
bool improves(const Measure& a, const Measure& b) {
  if (a.deg > b.deg || a.vars > b.vars) return false;
  return a.deg < b.deg || a.vars < b.vars || a.bits < b.bits;
}

// Largest lambda > 0 with lambda^d dividing n.
Integer root_part(Integer n, std::uint32_t d) {
  Integer out = 1;
  for (Integer p = 2; p * p <= n && p < 100000; ++p) {
    std::uint32_t e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (std::uint32_t i = 0; i < e / d; ++i) out *= p;
  }
  return out;
}

// Substitutes y = lambda*y'*mu, mu a Laurent monomial in nonvanishing
// variables: an isomorphism, applied when the equations get simpler.
// Candidates for y: from each equation c*y^d*m + h with a single y-term, the
// mu clearing the nonvanishing part of h against m, and the constant lambda
// clearing d-th powers from the coefficients of h; then mu = z or 1/z for
// each other nonvanishing fiber variable z.
bool apply_scaling(ConstructibleSet& s, const std::vector<Poly>& dom) {
  const std::set<VarId> nz = forced_nonzero(s, dom);
  const Measure before = measure(s.eqs);
  auto attempt = [&](VarId y, const Rational& lambda, const Exps& mu) {
    ConstructibleSet t = s;
    const std::set<VarId> explicit_nz = nonzero_vars(s, dom);
    for (VarId v : nz)
      if (!is_base_var(v) && !explicit_nz.count(v)) t.neqs.push_back(Poly::var(v));
    std::vector<Poly> gens;
    for (const auto& f : t.eqs) gens.push_back(strip_units(rescale(f, y, lambda, mu), nz));
    std::vector<Poly> eqs;
    for (const auto& f : reduced_groebner(gens)) eqs.push_back(strip_units(f, nz).monic());
    if (!improves(measure(eqs), before)) return false;
    for (auto& g : t.neqs) g = rescale(g, y, lambda, mu);
    t.eqs = std::move(eqs);
    s = std::move(t);
    return true;
  };
  for (VarId y : s.fiber) {
    if (std::none_of(s.eqs.begin(), s.eqs.end(), [&](const Poly& f) { return f.contains(y); })) continue;
    for (const auto& f : s.eqs) {
      const Term* yterm = nullptr;
      int yterms = 0;
      for (const auto& t : f.terms())
        if (t.mono.exponent(y) > 0) {
          yterm = &t;
          ++yterms;
        }
      if (yterms != 1 || f.size() < 2) continue;
      const int d = static_cast<int>(yterm->mono.exponent(y));
      Exps m = exps_of(yterm->mono.without(y));
      if (std::any_of(m.begin(), m.end(), [&](const auto& vk) { return !nz.count(vk.first); })) continue;
      Exps g;
      for (VarId v : nz) {
        int low = std::numeric_limits<int>::max();
        for (const auto& t : f.terms())
          if (&t != yterm) low = std::min(low, static_cast<int>(t.mono.exponent(v)));
        if (low > 0) g[v] = low;
      }
      Exps mu;
      std::set<VarId> keys;
      for (const auto& [v, k] : m) keys.insert(v);
      for (const auto& [v, k] : g) keys.insert(v);
      for (VarId v : keys) {
        int diff = (g.count(v) ? g[v] : 0) - (m.count(v) ? m[v] : 0);
        int e = diff >= 0 ? diff / d : -((-diff + d - 1) / d);
        if (e != 0) mu[v] = e;
      }
      if (!mu.empty() && attempt(y, 1, mu)) return true;
      Integer content = 0;
      bool integral = true;
      for (const auto& t : f.terms()) {
        if (&t == yterm) continue;
        Rational r = t.coeff / yterm->coeff;
        if (r.get_den() != 1) integral = false;
        content = gcd(content, Integer(abs(r.get_num())));
      }
      if (integral && content > 1) {
        Integer lambda = root_part(content, static_cast<std::uint32_t>(d));
        if (lambda > 1 && attempt(y, Rational(lambda), {})) return true;
      }
    }
  }
  for (VarId y : s.fiber) {
    std::set<VarId> near{y};  // linked to y through equations, base variables included
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& f : s.eqs) {
        const auto vs = f.variables();
        if (std::any_of(vs.begin(), vs.end(), [&](VarId v) { return near.count(v); }))
          for (VarId v : vs) grew = near.insert(v).second || grew;
      }
    }
    if (near.size() == 1) continue;
    for (VarId z : nz)
      if (z != y && !is_base_var(z) && near.count(z))
        for (int e : {1, -1})
          if (attempt(y, 1, Exps{{z, e}})) return true;
  }
  return false;
}

std::string print_key(const Poly& p) { return p.str(); }

bool top_level_sum(const std::string& s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth == 0 && i > 0 && (s[i] == '+' || s[i] == '-')) return true;
  }
  return false;
}

}  // namespace

SimplifyResult Calculator::simplify(const ConstructibleSet& x) const {
  SimplifyResult res;
  ConstructibleSet s = x;
  s.sort_fiber();
  const std::vector<Poly> dom = domain_factors(s.chart);
  std::set<std::string> seen;
  for (unsigned guard = 0;; ++guard) {
    if (guard > 10000) throw NonTerminating("simplification did not reach a fixed point");
    std::vector<Poly> gens;
    for (const auto& f : s.eqs)
      if (!f.is_zero()) gens.push_back(f);
    s.eqs = reduced_groebner(gens);
    if (s.eqs.size() == 1 && s.eqs[0].is_constant()) {
      res.empty = true;
      return res;
    }
    if (!s.eqs.empty())
      for (const auto& d : dom)
        if (normal_form(d, s.eqs).is_zero()) {
          res.empty = true;
          return res;
        }

    // Step 1(b): eliminate y when some f = c*y + u with c constant.
    bool changed = false;
    for (std::size_t i = 0; i < s.eqs.size() && !changed; ++i) {
      const Poly f = s.eqs[i];
      for (VarId y : f.variables()) {
        if (is_base_var(y) || f.degree_in(y) != 1) continue;
        auto cs = f.coeffs_in(y);
        if (!cs[1].is_constant()) continue;
        Poly value = cs[0].scaled(-1 / cs[1].constant_value());
        s.eqs.erase(s.eqs.begin() + static_cast<std::ptrdiff_t>(i));
        for (auto& e : s.eqs) e = e.substitute(y, value);
        for (auto& g : s.neqs) g = g.substitute(y, value);
        s.fiber.erase(std::remove(s.fiber.begin(), s.fiber.end(), y), s.fiber.end());
        s.fiber_names.erase(y);
        changed = true;
        break;
      }
    }
    if (changed) continue;

    // Step 1(c): square-free parts.
    for (auto& f : s.eqs) {
      Poly sf = squarefree_part(f);
      if (sf.total_degree() < f.total_degree()) {
        f = sf.monic();
        changed = true;
      }
    }
    if (changed) continue;

    // Step 2: reduce G modulo F and keep it factored.
    std::vector<Poly> neqs;
    for (const auto& g : s.neqs) {
      Poly r = s.eqs.empty() ? g : normal_form(g, s.eqs);
      if (r.is_zero()) {
        res.empty = true;
        return res;
      }
      if (r.is_constant()) continue;
      for (const auto& [u, mult] : factor(r).factors) {
        Poly p = u.primitive();
        if (!s.eqs.empty() && normal_form(p, s.eqs).is_constant()) continue;
        if (p.only_base_vars() && contains_poly(dom, p)) continue;
        if (!contains_poly(neqs, p)) neqs.push_back(p);
      }
    }
    std::sort(neqs.begin(), neqs.end(), [](const Poly& a, const Poly& b) { return b < a; });
    s.neqs = std::move(neqs);

    // Step 2b: divide equations by factors known not to vanish.
    for (auto& f : s.eqs) {
      for (const std::vector<Poly>* list : {&dom, static_cast<const std::vector<Poly>*>(&s.neqs)})
        for (const auto& u : *list)
          while (!f.is_constant())
            if (auto q = divide_exact(f, u)) {
              f = *q;
              changed = true;
            } else {
              break;
            }
      if (f.is_constant()) {
        res.empty = true;
        return res;
      }
    }
    if (changed) continue;

    // Scalings are invertible, so a later one can undo an earlier one; a
    // repeated state ends the loop.
    if (opt_.scaling && seen.insert(memo_key(s)).second && apply_scaling(s, dom)) continue;
    break;
  }
  res.set = std::move(s);
  return res;
}

// ---- recursion ----

std::vector<Poly> Calculator::ordered(std::vector<Poly> polys, const ConstructibleSet&) const {
  std::vector<std::pair<std::tuple<std::uint32_t, std::size_t, std::string>, Poly>> keyed;
  for (auto& p : polys) keyed.push_back({{p.total_degree(), p.size(), print_key(p)}, std::move(p)});
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (opt_.strategy == Strategy::kLargest) std::reverse(keyed.begin(), keyed.end());
  std::vector<Poly> out;
  for (auto& [k, p] : keyed) out.push_back(std::move(p));
  return out;
}

namespace {

std::vector<ConstructibleSet> components(const ConstructibleSet& s, std::size_t& free_vars) {
  std::vector<VarId> used = s.variables_in_use();
  free_vars = s.fiber.size() - used.size();
  std::map<VarId, VarId> parent;
  for (VarId v : used) parent[v] = v;
  std::function<VarId(VarId)> find = [&](VarId v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
  auto link_poly = [&](const Poly& p) {
    std::optional<VarId> first;
    for (VarId v : p.variables()) {
      if (is_base_var(v)) continue;
      if (!first)
        first = v;
      else
        parent[find(v)] = find(*first);
    }
  };
  for (const auto& f : s.eqs) link_poly(f);
  for (const auto& g : s.neqs) link_poly(g);
  std::map<VarId, std::size_t> index;
  std::vector<ConstructibleSet> comps;
  for (VarId v : used) {
    VarId r = find(v);
    if (!index.count(r)) {
      index[r] = comps.size();
      ConstructibleSet c;
      c.chart = s.chart;
      comps.push_back(std::move(c));
    }
    comps[index[r]].fiber.push_back(v);
  }
  auto owner = [&](const Poly& p) -> std::size_t {
    for (VarId v : p.variables())
      if (!is_base_var(v)) return index.at(find(v));
    return 0;
  };
  if (comps.empty()) {
    ConstructibleSet c;
    c.chart = s.chart;
    comps.push_back(std::move(c));
  }
  for (const auto& f : s.eqs) comps[owner(f)].eqs.push_back(f);
  for (const auto& g : s.neqs) comps[owner(g)].neqs.push_back(g);
  return comps;
}

ConstructibleSet with(const ConstructibleSet& s, std::vector<Poly> add_eqs, std::vector<Poly> add_neqs) {
  ConstructibleSet r = s;
  for (auto& p : add_eqs) r.eqs.push_back(std::move(p));
  for (auto& p : add_neqs) r.neqs.push_back(std::move(p));
  return r;
}

}  // namespace

VirtualClass Calculator::class_of(const ConstructibleSet& x) {
  for (VarId v : x.variables_in_use())
    if (std::find(x.fiber.begin(), x.fiber.end(), v) == x.fiber.end())
      throw KvarError("variable " + default_var_name(v) + " is not a declared fiber variable");
  for (const auto* list : {&x.eqs, &x.neqs})
    for (const auto& p : *list)
      for (VarId v : p.variables())
        if (is_base_var(v) && v - kBaseVarOffset >= x.chart.base_names.size())
          throw KvarError("base variable outside the chart");
  return class_rec(x, 0, true);
}

VirtualClass Calculator::class_rec(const ConstructibleSet& x, unsigned depth, bool split_components) {
  if (depth > opt_.max_depth)
    throw NonTerminating("recursion depth bound " + std::to_string(opt_.max_depth) + " exceeded at " + to_vset(x));
  auto product_of = [&](const std::vector<ConstructibleSet>& comps, std::size_t free_vars, const Chart& chart) {
    VirtualClass acc(registry_.unit(chart), QPoly::q(static_cast<unsigned>(free_vars)));
    for (const auto& c : comps) {
      VirtualClass k = class_rec(c, depth + 1, true);
      if (k.is_zero()) return VirtualClass{};
      acc = product_rec(acc, k, depth + 1);
    }
    return acc;
  };
  // Independent blocks are simplified separately; elimination across them only costs time.
  if (split_components) {
    std::size_t free_vars = 0;
    auto comps = components(x, free_vars);
    if (comps.size() > 1) return product_of(comps, free_vars, x.chart);
  }
  SimplifyResult sr = simplify(x);
  if (sr.empty) return {};
  const ConstructibleSet& s = sr.set;
  for (const auto& f : s.eqs)
    if (f.only_base_vars())
      throw BaseRestrictedClass("equation in base variables only: " +
                                f.str([&](VarId v) { return s.var_name(v); }));

  // Step 4: affine space over the chart.
  if (s.eqs.empty() && s.neqs.empty())
    return VirtualClass(registry_.unit(s.chart), QPoly::q(static_cast<unsigned>(s.fiber.size())));

  // Step 5: product of connected components.
  if (split_components) {
    std::size_t free_vars = 0;
    auto comps = components(s, free_vars);
    if (comps.size() > 1 || free_vars > 0) return product_of(comps, free_vars, s.chart);
  }

  std::string key = (opt_.strategy == Strategy::kLargest ? "L|" : "S|") + memo_key(s);
  if (opt_.use_cache)
    if (auto hit = cache_.lookup(key)) return *hit;
  VirtualClass r = decompose(s, depth);
  if (opt_.use_cache) cache_.store(key, r);
  return r;
}

VirtualClass Calculator::decompose(const ConstructibleSet& s, unsigned depth) {
  const std::vector<Poly> F = ordered(s.eqs, s);

  // Step 6: univariate equation with rational roots.
  for (const auto& f : F) {
    auto vars = f.variables();
    if (vars.size() != 1 || is_base_var(vars[0])) continue;
    UnivariateSplit sp = split_univariate(f, vars[0]);
    if (!sp.fully_split) continue;
    VirtualClass acc;
    for (const auto& [root, mult] : sp.roots)
      acc += class_rec(with(s, {Poly::var(vars[0]) - Poly(root)}, {}), depth + 1, true);
    return acc;
  }

  // Step 7: f = u*v. X = X(F+u) + X(F+v, G+u).
  auto split_on = [&](const Poly& f) -> std::optional<VirtualClass> {
    Factorization fac = factor(f);
    unsigned count = 0;
    std::vector<Poly> parts;
    for (const auto& [g, m] : fac.factors) {
      count += m;
      parts.push_back(g);
    }
    if (count < 2) return std::nullopt;
    std::vector<Poly> fiber_parts;
    for (const auto& g : parts)
      if (g.has_fiber_vars()) fiber_parts.push_back(g);
    std::vector<Poly> pick = ordered(fiber_parts.empty() ? parts : fiber_parts, s);
    const Poly& u = pick.front();
    Poly v = *divide_exact(f, u);
    return class_rec(with(s, {u}, {}), depth + 1, true) + class_rec(with(s, {v}, {u}), depth + 1, true);
  };
  for (const auto& f : F)
    if (auto r = split_on(f)) return *r;

  // Step 7b: a difference of two equations that factors.
  for (std::size_t i = 0; i < F.size(); ++i)
    for (std::size_t j = i + 1; j < F.size(); ++j) {
      Poly d = F[i] - F[j];
      if (d.is_zero() || d.only_base_vars()) continue;
      if (auto r = split_on(d)) return *r;
    }

  // Step 7c: on a binomial equation a*y^d + b*t, with t a base variable, the
  // other equations may factor once t is written as -a/b*y^d.
  for (const auto& g : F) {
    if (g.size() != 2) continue;
    auto single = [](const Monomial& m) { return m.factors().size() == 1 ? m.factors()[0] : Monomial::Factor{0, 0}; };
    const bool flip = single(g.terms()[0].mono).second == 1 && is_base_var(single(g.terms()[0].mono).first);
    const Term& t0 = g.terms()[flip ? 1 : 0];
    const Term& t1 = g.terms()[flip ? 0 : 1];
    auto [yv, d] = single(t0.mono);
    auto [tv, e] = single(t1.mono);
    if (d == 0 || e != 1 || is_base_var(yv) || !is_base_var(tv)) continue;
    const Poly value = Poly::monomial(t0.mono, -t0.coeff / t1.coeff);
    for (const auto& f : F) {
      if (&f == &g || !f.contains(tv)) continue;
      const Poly h = f.substitute(tv, value);
      Factorization fac = factor(h);
      unsigned count = 0;
      std::vector<Poly> parts;
      for (const auto& [u, m] : fac.factors) {
        count += m;
        if (u.has_fiber_vars()) parts.push_back(u);
      }
      if (count < 2 || parts.empty()) continue;
      const Poly u = ordered(parts, s).front();
      const Poly v = *divide_exact(h, u);
      return class_rec(with(s, {u}, {}), depth + 1, true) + class_rec(with(s, {v}, {u}), depth + 1, true);
    }
  }

  // Step 8: f = y*u + v, linear in a fiber variable y.
  {
    const std::vector<Poly> dom = domain_factors(s.chart);
    auto implied_nonzero = [&](const Poly& u) {
      if (u.is_constant()) return !u.is_zero();
      for (const auto& [g, m] : factor(u).factors) {
        Poly p = g.primitive();
        if (!contains_poly(dom, p) && !contains_poly(s.neqs, p)) return false;
      }
      return true;
    };
    struct Cand {
      int rank;
      std::size_t fi;
      VarId y;
    };
    std::optional<Cand> best;
    for (std::size_t fi = 0; fi < F.size(); ++fi)
      for (VarId y : F[fi].variables()) {
        if (is_base_var(y) || F[fi].degree_in(y) != 1) continue;
        Cand c{implied_nonzero(F[fi].coeffs_in(y)[1]) ? 0 : 1, fi, y};
        if (!best || c.rank < best->rank) best = c;
      }
    if (best) {
      const Poly& f = F[best->fi];
      VarId y = best->y;
      auto cs = f.coeffs_in(y);
      const Poly& u = cs[1];
      const Poly& v = cs[0];
      VirtualClass acc;
      if (best->rank != 0) acc += class_rec(with(s, {u, v}, {}), depth + 1, true);
      ConstructibleSet x2 = s;
      x2.eqs.clear();
      for (const auto& e : s.eqs)
        if (e != f) x2.eqs.push_back(substitute_homogenize(e, y, u, v));
      for (auto& g : x2.neqs) g = substitute_homogenize(g, y, u, v);
      x2.neqs.push_back(u);
      x2.fiber.erase(std::remove(x2.fiber.begin(), x2.fiber.end(), y), x2.fiber.end());
      x2.fiber_names.erase(y);
      acc += class_rec(x2, depth + 1, true);
      return acc;
    }
  }

  // Step 8c: f of degree two in the fiber whose quadratic part factors into
  // linear forms L1*L2. Taking L1 as a coordinate makes f linear in a variable.
  {
    auto fiber_degree = [](const Monomial& m) {
      std::uint32_t d = 0;
      for (const auto& [v, k] : m.factors())
        if (!is_base_var(v)) d += k;
      return d;
    };
    for (const auto& f : F) {
      std::vector<Term> quad;
      bool ok = true;
      for (const auto& t : f.terms()) {
        const std::uint32_t d = fiber_degree(t.mono);
        if (d > 2) ok = false;
        if (d == 2) quad.push_back(t);
      }
      if (!ok || quad.empty()) continue;
      Factorization fac = factor(Poly::from_terms(quad));
      std::vector<Poly> linear;
      for (const auto& [g, m] : fac.factors)
        if (g.has_fiber_vars()) linear.push_back(g);
      if (linear.empty() || std::any_of(linear.begin(), linear.end(), [&](const Poly& g) {
            return std::any_of(g.terms().begin(), g.terms().end(),
                               [&](const Term& t) { return fiber_degree(t.mono) != 1; });
          }))
        continue;
      for (const auto& l1 : ordered(linear, s))
        for (VarId y : l1.variables()) {
          if (is_base_var(y) || l1.degree_in(y) != 1) continue;
          auto cs = l1.coeffs_in(y);
          if (!cs[1].is_constant()) continue;
          // old y = (new y - rest) / alpha
          Poly value = (Poly::var(y) - cs[0]).scaled(1 / cs[1].constant_value());
          Poly g = f.substitute(y, value);
          auto vars = g.variables();
          if (std::none_of(vars.begin(), vars.end(), [&](VarId v) { return !is_base_var(v) && g.degree_in(v) == 1; }))
            continue;
          ConstructibleSet x = s;
          for (auto& e : x.eqs) e = e.substitute(y, value);
          for (auto& n : x.neqs) n = n.substitute(y, value);
          return class_rec(x, depth + 1, true);
        }
    }
  }

  // Step 8d: complete the square in f = a*y^2 + b*y + c, a a unit of the
  // chart, b nonzero and y in no other equation; the new coordinate is
  // a*y + b/2.
  {
    const std::vector<Poly> dom = domain_factors(s.chart);
    auto chart_unit = [&](const Poly& a) {
      if (a.is_constant()) return !a.is_zero();
      if (!a.only_base_vars()) return false;
      for (const auto& [g, m] : factor(a).factors)
        if (!contains_poly(dom, g.primitive())) return false;
      return true;
    };
    for (const auto& f : F)
      for (VarId y : f.variables()) {
        if (is_base_var(y) || f.degree_in(y) != 2) continue;
        if (std::count_if(s.eqs.begin(), s.eqs.end(), [&](const Poly& e) { return e.contains(y); }) != 1) continue;
        auto cs = f.coeffs_in(y);
        if (cs[1].is_zero() || !chart_unit(cs[2])) continue;
        const Poly a = cs[2], half_b = cs[1].scaled(Rational(1, 2));
        // p at y -> (y - b/2)/a, times a^deg
        auto shift = [&](const Poly& p) {
          if (!p.contains(y)) return p;
          auto ps = p.coeffs_in(y);
          const std::size_t n = ps.size() - 1;
          const Poly lin = Poly::var(y) - half_b;
          Poly out, lin_k(1);
          std::vector<Poly> a_pow{Poly(1)};
          for (std::size_t k = 1; k <= n; ++k) a_pow.push_back(a_pow.back() * a);
          for (std::size_t k = 0; k <= n; ++k) {
            out += ps[k] * lin_k * a_pow[n - k];
            lin_k = lin_k * lin;
          }
          return out;
        };
        ConstructibleSet x = s;
        for (auto& e : x.eqs) e = shift(e);
        for (auto& g : x.neqs) g = shift(g);
        return class_rec(x, depth + 1, true);
      }
  }

  // Step 8b: f = c*y^d*m + z^d*h' with m nonvanishing and z a fiber variable
  // that may vanish. Splitting on z = 0 lets scaling remove z from f.
  {
    const std::set<VarId> nz = nonzero_vars(s, domain_factors(s.chart));
    for (const auto& f : F)
      for (VarId y : f.variables()) {
        if (is_base_var(y)) continue;
        if (std::count_if(s.eqs.begin(), s.eqs.end(), [&](const Poly& e) { return e.contains(y); }) != 1) continue;
        std::vector<const Term*> yt, h;
        for (const auto& t : f.terms()) (t.mono.exponent(y) ? yt : h).push_back(&t);
        if (yt.size() != 1 || h.empty()) continue;
        const std::uint32_t d = yt[0]->mono.exponent(y);
        Monomial m = yt[0]->mono.without(y);
        if (std::any_of(m.factors().begin(), m.factors().end(), [&](const auto& vk) { return !nz.count(vk.first); }))
          continue;
        for (VarId z : s.fiber) {
          if (z == y || nz.count(z)) continue;
          if (!std::all_of(h.begin(), h.end(), [&](const Term* t) { return t->mono.exponent(z) >= d; })) continue;
          ConstructibleSet probe = with(s, {}, {Poly::var(z)});
          if (apply_scaling(probe, domain_factors(s.chart)))
            return class_rec(with(s, {Poly::var(z)}, {}), depth + 1, true) +
                   class_rec(with(s, {}, {Poly::var(z)}), depth + 1, true);
        }
      }
  }

  // Step 9: X = X(G - g) - X(F + g, G - g).
  {
    std::vector<Poly> gs;
    for (const auto& g : s.neqs)
      if (g.has_fiber_vars()) gs.push_back(g);
    for (const Poly& g : ordered(gs, s)) {
      ConstructibleSet x1 = s;
      x1.neqs.erase(std::find(x1.neqs.begin(), x1.neqs.end(), g));
      ConstructibleSet x2 = with(x1, {g}, {});
      // A g that simplification restores (a variable forced nonzero by F) would loop.
      if (auto back = simplify(x1); !back.empty && memo_key(back.set) == memo_key(s)) continue;
      return class_rec(x1, depth + 1, true) - class_rec(x2, depth + 1, true);
    }
  }

  // Step 10: a symbol.
  if (!opt_.create_symbols) throw KvarError("no decomposition step applies and symbol creation is disabled");
  std::string key = canonical_key(s);
  return VirtualClass(registry_.intern(key, s.chart.label), QPoly(1));
}

VirtualClass Calculator::product_rec(const VirtualClass& a, const VirtualClass& b, unsigned depth) {
  VirtualClass acc;
  for (const auto& [sa, ca] : a.terms())
    for (const auto& [sb, cb] : b.terms()) acc += symbol_product(sa, sb, depth).scaled(ca * cb);
  return acc;
}

VirtualClass Calculator::symbol_product(const SymbolId& a, const SymbolId& b, unsigned depth) {
  ConstructibleSet xa = set_from_key(a), xb = set_from_key(b);
  if (!(xa.chart == xb.chart)) throw KvarError("product of classes over different charts");
  if (xa.fiber.empty() && xa.eqs.empty() && xa.neqs.empty()) return VirtualClass(b, QPoly(1));
  if (xb.fiber.empty() && xb.eqs.empty() && xb.neqs.empty()) return VirtualClass(a, QPoly(1));
  std::string key = (opt_.strategy == Strategy::kLargest ? "LP|" : "SP|") + std::min(a, b) + "||" + std::max(a, b);
  if (opt_.use_cache)
    if (auto hit = cache_.lookup(key)) return *hit;
  ConstructibleSet u = xa;
  VarId shift = static_cast<VarId>(xa.fiber.size());
  auto f = [&](VarId v) { return is_base_var(v) ? v : v + shift; };
  for (VarId v : xb.fiber) u.fiber.push_back(f(v));
  for (const auto& e : xb.eqs) u.eqs.push_back(e.rename(f));
  for (const auto& g : xb.neqs) u.neqs.push_back(g.rename(f));
  VirtualClass r = class_rec(u, depth + 1, false);
  if (opt_.use_cache) cache_.store(key, r);
  return r;
}

VirtualClass Calculator::fiber_product(const VirtualClass& a, const VirtualClass& b) { return product_rec(a, b, 0); }

SymbolId Calculator::register_generator(const std::string& label, const ConstructibleSet& x) {
  VirtualClass c = class_of(x);
  if (c.terms().size() != 1 || c.terms().begin()->second != QPoly(1))
    throw NotPrime("generator " + label + " has class " + print(c));
  SymbolId id = c.terms().begin()->first;
  registry_.set_label(id, label);
  return id;
}

std::vector<SymbolId> Calculator::unregistered_symbols(const VirtualClass& c) const {
  std::vector<SymbolId> out;
  for (const auto& [s, k] : c.terms()) {
    SymbolInfo info = registry_.info(s);
    if (!info.unit && !info.generator) out.push_back(s);
  }
  return out;
}

std::string Calculator::print(const VirtualClass& c) const {
  if (c.is_zero()) return "0";
  std::vector<std::pair<std::string, QPoly>> items;
  for (const auto& [s, k] : c.terms()) items.emplace_back(registry_.label(s), k);
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out;
  for (const auto& [label, k] : items) {
    std::string term;
    if (label.empty()) {
      term = k.str();
    } else if (k == QPoly(1)) {
      term = label;
    } else if (k == QPoly(-1)) {
      term = "-" + label;
    } else {
      std::string cs = k.factored_str();
      term = (top_level_sum(cs) ? "(" + cs + ")" : cs) + "*" + label;
    }
    if (out.empty())
      out = term;
    else if (term.front() == '-')
      out += " - " + term.substr(1);
    else
      out += " + " + term;
  }
  return out;
}

// ---- point counting ----

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1 % p;
  b %= p;
  while (e) {
    if (e & 1) r = mulmod(r, b, p);
    b = mulmod(b, b, p);
    e >>= 1;
  }
  return r;
}

std::uint64_t reduce_mod(const Integer& z, std::uint64_t p) {
  Integer r = z % static_cast<unsigned long>(p);
  if (r < 0) r += static_cast<unsigned long>(p);
  return r.get_ui();
}

struct ModPoly {
  struct T {
    std::uint64_t c;
    std::vector<std::pair<std::size_t, std::uint32_t>> f;
  };
  std::vector<T> terms;
  std::uint64_t eval(const std::vector<std::uint64_t>& val, std::uint64_t p) const {
    std::uint64_t acc = 0;
    for (const auto& t : terms) {
      std::uint64_t m = t.c;
      for (const auto& [slot, e] : t.f) m = mulmod(m, powmod(val[slot], e, p), p);
      acc = (acc + m) % p;
    }
    return acc;
  }
};

}  // namespace

std::uint64_t count_points(const ConstructibleSet& x, std::uint64_t p, double bound) {
  std::map<VarId, std::size_t> slot;
  for (std::size_t k = 0; k < x.chart.base_names.size(); ++k) slot[x.chart.base_var(k)] = slot.size();
  for (VarId v : x.fiber) slot.emplace(v, slot.size());
  const std::size_t n = slot.size();
  auto convert = [&](const Poly& poly) {
    ModPoly mp;
    for (const auto& t : poly.terms()) {
      std::uint64_t den = reduce_mod(t.coeff.get_den(), p);
      if (den == 0) throw KvarError("coefficient denominator divisible by p");
      std::uint64_t c = mulmod(reduce_mod(t.coeff.get_num(), p), powmod(den, p - 2, p), p);
      ModPoly::T mt{c, {}};
      for (const auto& [v, e] : t.mono.factors()) {
        auto it = slot.find(v);
        if (it == slot.end()) throw KvarError("polynomial uses an undeclared variable");
        mt.f.emplace_back(it->second, e);
      }
      mp.terms.push_back(std::move(mt));
    }
    return mp;
  };
  std::vector<ModPoly> eqs, neqs;
  for (const auto& f : x.eqs) eqs.push_back(convert(f));
  for (const auto& g : x.neqs) neqs.push_back(convert(g));
  for (const auto& d : x.chart.domain) neqs.push_back(convert(d));

  // The count is a product over groups of variables linked by shared polynomials.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto first_slot = [](const ModPoly& m) -> std::optional<std::size_t> {
    for (const auto& t : m.terms)
      if (!t.f.empty()) return t.f.front().first;
    return std::nullopt;
  };
  for (const auto* list : {&eqs, &neqs})
    for (const auto& m : *list)
      if (auto a = first_slot(m))
        for (const auto& t : m.terms)
          for (const auto& [v, e] : t.f) parent[find(v)] = find(*a);

  std::vector<std::uint64_t> val(n, 0);
  // Polynomials without variables decide emptiness outright.
  for (const auto& f : eqs)
    if (!first_slot(f) && f.eval(val, p) != 0) return 0;
  for (const auto& g : neqs)
    if (!first_slot(g) && g.eval(val, p) == 0) return 0;

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::uint64_t total = 1;
  for (const auto& [root, vars] : groups) {
    double size = 1;
    for (std::size_t i = 0; i < vars.size(); ++i) size *= static_cast<double>(p);
    if (size > bound)
      throw TooLarge("enumeration of " + std::to_string(p) + "^" + std::to_string(vars.size()) + " points");
    std::vector<const ModPoly*> ge, gn;
    for (const auto& f : eqs)
      if (auto a = first_slot(f); a && find(*a) == root) ge.push_back(&f);
    for (const auto& g : neqs)
      if (auto a = first_slot(g); a && find(*a) == root) gn.push_back(&g);
    std::uint64_t count = 0;
    while (true) {
      bool ok = true;
      for (const auto* g : gn)
        if (g->eval(val, p) == 0) {
          ok = false;
          break;
        }
      if (ok)
        for (const auto* f : ge)
          if (f->eval(val, p) != 0) {
            ok = false;
            break;
          }
      if (ok) ++count;
      std::size_t i = 0;
      while (i < vars.size() && ++val[vars[i]] == p) val[vars[i++]] = 0;
      if (i == vars.size()) break;
    }
    if (count == 0) return 0;
    total *= count;
  }
  return total;
}

Integer count_class(const VirtualClass& c, std::uint64_t p, double bound) {
  Rational acc = 0;
  for (const auto& [s, k] : c.terms())
    acc += k.evaluate(Rational(static_cast<unsigned long>(p))) *
           Rational(Integer(static_cast<unsigned long>(count_points(set_from_key(s), p, bound))));
  if (acc.get_den() != 1) throw KvarError("non-integral point count");
  return acc.get_num();
}

}  // namespace kvar
