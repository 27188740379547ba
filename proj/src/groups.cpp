#include "kvar/groups.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "kvar/algebra.hpp"
#include "kvar/parse.hpp"

namespace kvar {

// ---- Frac ----

Frac::Frac(Poly n, Poly d) : num_(std::move(n)), den_(std::move(d)) {
  if (den_.is_zero()) throw std::domain_error("fraction with zero denominator");
  reduce();
}

void Frac::reduce() {
  if (num_.is_zero()) {
    den_ = Poly(1);
    return;
  }
  if (!den_.is_constant()) {
    Poly g = gcd(num_, den_);
    if (!g.is_constant()) {
      num_ = *divide_exact(num_, g);
      den_ = *divide_exact(den_, g);
    }
  }
  Rational l = den_.lead_coeff();
  if (l != 1) {
    num_ = num_.scaled(1 / l);
    den_ = den_.scaled(1 / l);
  }
}

Frac operator+(const Frac& a, const Frac& b) {
  if (a.den_ == b.den_) return Frac(a.num_ + b.num_, a.den_);
  return Frac(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Frac operator*(const Frac& a, const Frac& b) {
  if (a.is_zero() || b.is_zero()) return Frac();
  return Frac(a.num_ * b.num_, a.den_ * b.den_);
}

Frac operator/(const Frac& a, const Frac& b) {
  if (b.is_zero()) throw std::domain_error("division by zero fraction");
  return Frac(a.num_ * b.den_, a.den_ * b.num_);
}

Frac Frac::pow(unsigned e) const { return Frac(num_.pow(e), den_.pow(e)); }

std::string Frac::str(const NameFn& names) const {
  if (den_ == Poly(1)) return num_.str(names);
  return "(" + num_.str(names) + ")/(" + den_.str(names) + ")";
}

Frac evaluate(const Poly& p, const std::function<Frac(VarId)>& value) {
  std::map<VarId, Frac> cache;
  Frac acc;
  for (const auto& t : p.terms()) {
    Frac m = Frac(Poly(t.coeff));
    for (const auto& [v, e] : t.mono.factors()) {
      auto it = cache.find(v);
      if (it == cache.end()) it = cache.emplace(v, value(v)).first;
      m = m * it->second.pow(e);
    }
    acc = acc + m;
  }
  return acc;
}

// ---- matrices ----

FracMatrix identity_matrix(std::size_t n) {
  FracMatrix m(n, std::vector<Frac>(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = Frac(1);
  return m;
}

FracMatrix operator*(const FracMatrix& a, const FracMatrix& b) {
  std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  FracMatrix r(n, std::vector<Frac>(m));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != k) throw std::invalid_argument("matrix dimension mismatch");
    for (std::size_t j = 0; j < m; ++j) {
      Frac acc;
      for (std::size_t l = 0; l < k; ++l)
        if (!a[i][l].is_zero() && !b[l][j].is_zero()) acc = acc + a[i][l] * b[l][j];
      r[i][j] = acc;
    }
  }
  return r;
}

namespace {

FracMatrix minor_of(const FracMatrix& m, std::size_t row, std::size_t col) {
  FracMatrix r;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i == row) continue;
    std::vector<Frac> line;
    for (std::size_t j = 0; j < m.size(); ++j)
      if (j != col) line.push_back(m[i][j]);
    r.push_back(std::move(line));
  }
  return r;
}

}  // namespace

Frac determinant(const FracMatrix& m) {
  if (m.empty()) return Frac(1);
  if (m.size() == 1) return m[0][0];
  Frac acc;
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (m[0][j].is_zero()) continue;
    Frac term = m[0][j] * determinant(minor_of(m, 0, j));
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

FracMatrix inverse(const FracMatrix& m) {
  Frac det = determinant(m);
  if (det.is_zero()) throw std::domain_error("singular matrix");
  std::size_t n = m.size();
  FracMatrix r(n, std::vector<Frac>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Frac c = determinant(minor_of(m, j, i)) / det;
      r[i][j] = ((i + j) % 2 == 0) ? c : -c;
    }
  return r;
}

FracMatrix map_entries(const FracMatrix& m, const std::function<Frac(const Frac&)>& f) {
  FracMatrix r = m;
  for (auto& row : r)
    for (auto& e : row) e = f(e);
  return r;
}

// ---- GroupSpec ----

std::size_t GroupSpec::coord_index(std::string_view n) const {
  for (std::size_t k = 0; k < coords.size(); ++k)
    if (coords[k] == n) return k;
  throw StratError("unknown coordinate '" + std::string(n) + "'");
}

std::pair<std::size_t, std::size_t> GroupSpec::position(std::size_t coord) const {
  for (std::size_t i = 0; i < pattern.size(); ++i)
    for (std::size_t j = 0; j < pattern[i].size(); ++j)
      if (pattern[i][j] == coords[coord]) return {i, j};
  throw StratError("coordinate '" + coords[coord] + "' missing from the matrix pattern");
}

FracMatrix GroupSpec::element(const std::function<Frac(std::size_t)>& value) const {
  FracMatrix m(size(), std::vector<Frac>(size()));
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j) {
      const std::string& p = pattern[i][j];
      if (p == "0")
        m[i][j] = Frac(0);
      else if (p == "1")
        m[i][j] = Frac(1);
      else
        m[i][j] = value(coord_index(p));
    }
  return m;
}

FracMatrix GroupSpec::generic(VarId first_var) const {
  return element([&](std::size_t k) { return Frac(Poly::var(first_var + static_cast<VarId>(k))); });
}

std::vector<Frac> GroupSpec::coordinates(const FracMatrix& m) const {
  std::vector<Frac> out;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    auto [i, j] = position(k);
    out.push_back(m[i][j]);
  }
  return out;
}

std::vector<std::size_t> GroupSpec::nonzero_indices() const {
  std::vector<std::size_t> out;
  for (const auto& n : nonzero) out.push_back(coord_index(n));
  return out;
}

// ---- Stratum ----

void Stratum::membership(const std::vector<Frac>& coords, std::vector<Poly>& eqs_out,
                         std::vector<Poly>& neqs_out) const {
  auto value = [&](VarId v) -> Frac {
    if (is_base_var(v) || v >= coords.size()) throw StratError("stratum condition outside the coordinates");
    return coords[v];
  };
  for (const auto& e : eqs) eqs_out.push_back(evaluate(e, value).num());
  for (const auto& g : neqs) neqs_out.push_back(evaluate(g, value).num());
}

std::vector<Poly> Stratum::ties(const std::vector<Frac>& coords, const std::function<Poly(std::size_t)>& chart_var) const {
  std::vector<Poly> out;
  for (const auto& [k, c] : proj) out.push_back((coords[c] - Frac(chart_var(k))).num());
  return out;
}

// ---- Stratification ----

std::size_t Stratification::basis_size() const {
  std::size_t n = 0;
  for (const auto& s : strata) n += s.generators.size();
  return n;
}

std::vector<std::string> Stratification::basis_labels() const {
  std::vector<std::string> out;
  for (const auto& s : strata)
    for (const auto& g : s.generators) out.push_back(g.name);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> Stratification::basis() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < strata.size(); ++i)
    for (std::size_t g = 0; g < strata[i].generators.size(); ++g) out.emplace_back(i, g);
  return out;
}

std::string Stratification::coord_name(VarId v) const {
  if (!is_base_var(v) && v < group.coords.size()) return group.coords[v];
  return default_var_name(v);
}

// ---- .strat parsing ----

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      std::string item = trim(s.substr(start, i - start));
      if (!item.empty()) out.push_back(std::move(item));
      start = i + 1;
    }
  return out;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto& part : split(s, ';'))
    for (auto& item : split(part, ',')) out.push_back(std::move(item));
  return out;
}

struct Block {
  std::string kind, name;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<Block> children;  // generators of a stratum
  std::vector<std::string> values(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries)
      if (k == key) out.push_back(v);
    return out;
  }
  std::string single(const std::string& key) const {
    auto v = values(key);
    if (v.size() > 1) throw ParseError(kind + " " + name + ": key '" + key + "' given twice");
    return v.empty() ? std::string() : v[0];
  }
};

Frac parse_frac(std::string_view text, const std::function<Frac(std::string_view)>& var) {
  ExprParser<Frac> p(var, [](const Rational& c) { return Frac(Poly(c)); },
                     [](const Frac& a, const Frac& b) {
                       if (b.is_zero()) throw ParseError("division by zero");
                       return a / b;
                     });
  return p.parse(text);
}

FracMatrix parse_matrix(const std::string& text, std::size_t n, const std::function<Frac(std::string_view)>& var) {
  FracMatrix m;
  for (const auto& row : split(text, ';')) {
    std::vector<Frac> line;
    for (const auto& e : split(row, ',')) line.push_back(parse_frac(e, var));
    if (line.size() != n) throw ParseError("matrix row '" + row + "' does not have " + std::to_string(n) + " entries");
    m.push_back(std::move(line));
  }
  if (m.size() != n) throw ParseError("matrix '" + text + "' does not have " + std::to_string(n) + " rows");
  return m;
}

void check_keys(const Block& b, std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : b.entries)
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw ParseError("line " + std::to_string(b.line) + ": key '" + k + "' not allowed in " + b.kind + " block");
}

}  // namespace

Stratification parse_strat(std::string_view text) {
  std::vector<Block> blocks;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  Block* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::string l = trim(line);
    if (l.empty()) continue;
    auto colon = l.find(':');
    if (colon == std::string::npos) {
      auto words = split(l, ' ');
      if (words.size() != 2 || (words[0] != "group" && words[0] != "stratum" && words[0] != "generator"))
        throw ParseError("line " + std::to_string(lineno) + ": expected a block header or 'key: value'");
      Block b{words[0], words[1], lineno, {}, {}};
      if (b.kind == "generator") {
        if (blocks.empty() || blocks.back().kind != "stratum")
          throw ParseError("line " + std::to_string(lineno) + ": generator outside a stratum");
        blocks.back().children.push_back(std::move(b));
        current = &blocks.back().children.back();
      } else {
        blocks.push_back(std::move(b));
        current = &blocks.back();
      }
      continue;
    }
    if (!current) throw ParseError("line " + std::to_string(lineno) + ": entry before any block header");
    current->entries.emplace_back(trim(std::string_view(l).substr(0, colon)),
                                  trim(std::string_view(l).substr(colon + 1)));
  }
  if (blocks.empty() || blocks[0].kind != "group") throw ParseError("a .strat file starts with a group block");

  Stratification st;
  const Block& gb = blocks[0];
  check_keys(gb, {"coords", "matrix", "nonzero"});
  st.group.name = gb.name;
  st.group.coords = split_list(gb.single("coords"));
  for (const auto& row : split(gb.single("matrix"), ';')) st.group.pattern.push_back(split(row, ','));
  st.group.nonzero = split_list(gb.single("nonzero"));
  std::size_t n = st.group.pattern.size();
  if (n == 0) throw ParseError("group " + gb.name + " has an empty matrix");
  for (const auto& row : st.group.pattern)
    if (row.size() != n) throw ParseError("group matrix is not square");
  for (const auto& row : st.group.pattern)
    for (const auto& e : row)
      if (e != "0" && e != "1") st.group.coord_index(e);
  for (std::size_t k = 0; k < st.group.coords.size(); ++k) st.group.position(k);
  st.group.nonzero_indices();

  auto coord_var = [&](std::string_view name) -> std::optional<VarId> {
    for (std::size_t k = 0; k < st.group.coords.size(); ++k)
      if (st.group.coords[k] == name) return static_cast<VarId>(k);
    return std::nullopt;
  };

  for (std::size_t bi = 1; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    if (b.kind != "stratum") throw ParseError("line " + std::to_string(b.line) + ": unexpected " + b.kind + " block");
    check_keys(b, {"chart", "base", "domain", "eq", "neq", "proj", "sigma", "conj"});
    Stratum s;
    s.name = b.name;
    s.chart.label = b.single("chart");
    if (s.chart.label.empty()) s.chart.label = "C" + b.name;
    for (const auto& v : b.values("base"))
      for (auto& name : split_list(v)) {
        if (coord_var(name)) throw ParseError("chart variable '" + name + "' clashes with a coordinate");
        s.chart.base_names.push_back(name);
      }
    auto base_lookup = [&](std::string_view name) { return s.chart.base_var(name); };
    auto coord_lookup = [&](std::string_view name) -> VarId {
      if (auto v = coord_var(name)) return *v;
      throw ParseError("unknown coordinate '" + std::string(name) + "' in stratum " + s.name);
    };
    for (const auto& v : b.values("domain"))
      for (const auto& p : split_list(v)) s.chart.domain.push_back(parse_poly(p, base_lookup));
    for (const auto& v : b.values("eq"))
      for (const auto& p : split_list(v)) s.eqs.push_back(parse_poly(p, coord_lookup));
    for (const auto& v : b.values("neq"))
      for (const auto& p : split_list(v)) s.neqs.push_back(parse_poly(p, coord_lookup));
    for (const auto& v : b.values("proj"))
      for (const auto& item : split_list(v)) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("proj entry '" + item + "' is not 'chartvar = coordinate'");
        VarId t = s.chart.base_var(trim(std::string_view(item).substr(0, eq)));
        s.proj.emplace_back(t - kBaseVarOffset, st.group.coord_index(trim(std::string_view(item).substr(eq + 1))));
      }
    if (s.proj.size() != s.chart.base_names.size())
      throw ParseError("stratum " + s.name + ": every chart variable needs a proj entry");
    std::string sigma = b.single("sigma"), conj = b.single("conj");
    if (sigma.empty() || conj.empty()) throw ParseError("stratum " + s.name + " needs sigma and conj");
    s.sigma = parse_matrix(sigma, n, [&](std::string_view name) { return Frac(Poly::var(base_lookup(name))); });
    // Chart variables inside the conjugator stand for the coordinates they project from.
    s.conj = parse_matrix(conj, n, [&](std::string_view name) -> Frac {
      if (auto v = coord_var(name)) return Frac(Poly::var(*v));
      VarId t = base_lookup(name);
      for (const auto& [k, c] : s.proj)
        if (s.chart.base_var(k) == t) return Frac(Poly::var(static_cast<VarId>(c)));
      throw ParseError("chart variable '" + std::string(name) + "' has no projection");
    });
    for (const auto& g : b.children) {
      check_keys(g, {"vars", "eq"});
      Generator gen;
      gen.name = g.name;
      gen.set.chart = s.chart;
      std::map<std::string, VarId> cover;
      for (const auto& v : g.values("vars"))
        for (auto& name : split_list(v)) {
          VarId id = static_cast<VarId>(cover.size());
          cover.emplace(name, id);
          gen.set.fiber.push_back(id);
          gen.set.fiber_names[id] = name;
        }
      auto lookup = [&](std::string_view name) -> VarId {
        auto it = cover.find(std::string(name));
        if (it != cover.end()) return it->second;
        return s.chart.base_var(name);
      };
      for (const auto& v : g.values("eq"))
        for (const auto& p : split_list(v)) gen.set.eqs.push_back(parse_poly(p, lookup));
      s.generators.push_back(std::move(gen));
    }
    if (s.generators.empty()) throw ParseError("stratum " + s.name + " declares no generator");
    st.strata.push_back(std::move(s));
  }
  if (st.strata.empty()) throw ParseError("no strata");
  return st;
}

Stratification builtin_stratification(std::string_view name) { return parse_strat(builtin_strat_text(name)); }

// ---- verification ----

namespace {

ConstructibleSet group_set(const Stratification& s) {
  ConstructibleSet x;
  for (std::size_t k = 0; k < s.group.coords.size(); ++k) {
    x.fiber.push_back(static_cast<VarId>(k));
    x.fiber_names[static_cast<VarId>(k)] = s.group.coords[k];
  }
  for (std::size_t k : s.group.nonzero_indices()) x.neqs.push_back(Poly::var(static_cast<VarId>(k)));
  return x;
}

QPoly pure_class(Calculator& calc, const ConstructibleSet& x, const std::string& what) {
  VirtualClass c = calc.class_of(x);
  auto p = c.multiple_of(calc.registry().unit(x.chart));
  if (!p) throw StratError(what + " has a non-polynomial class " + calc.print(c));
  return *p;
}

std::vector<Frac> generic_coords(const Stratification& s) {
  std::vector<Frac> out;
  for (std::size_t k = 0; k < s.group.coords.size(); ++k) out.emplace_back(Poly::var(static_cast<VarId>(k)));
  return out;
}

// Every factor of p is a nonzero constant or excluded by the chart.
bool nonvanishing_on_chart(const Poly& p, const Chart& chart) {
  if (p.is_zero()) return false;
  std::vector<Poly> dom;
  for (const auto& d : chart.domain)
    for (const auto& [f, m] : factor(d).factors) dom.push_back(f.primitive());
  for (const auto& [f, m] : factor(p).factors)
    if (std::find(dom.begin(), dom.end(), f.primitive()) == dom.end()) return false;
  return true;
}

}  // namespace

ConstructibleSet stratum_set(const Stratification& s, std::size_t i) {
  ConstructibleSet x = group_set(s);
  for (const auto& e : s.strata[i].eqs) x.eqs.push_back(e);
  for (const auto& g : s.strata[i].neqs) x.neqs.push_back(g);
  return x;
}

QPoly group_class(const Stratification& s, Calculator& calc) { return pure_class(calc, group_set(s), "group"); }

QPoly stratum_class(const Stratification& s, std::size_t i, Calculator& calc) {
  return pure_class(calc, stratum_set(s, i), "stratum " + s.strata[i].name);
}

QPoly fiber_class(const Stratification& s, std::size_t i, Calculator& calc) {
  ConstructibleSet x = stratum_set(s, i);
  const Stratum& st = s.strata[i];
  for (auto p : st.ties(generic_coords(s), [](std::size_t k) { return Poly(static_cast<long>(k + 2)); }))
    x.eqs.push_back(p);
  return pure_class(calc, x, "fiber of stratum " + st.name);
}

bool StratReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

StratReport verify_stratification(const Stratification& s, Calculator& calc) {
  StratReport rep;
  NameFn names = [&](VarId v) { return s.coord_name(v); };
  const std::size_t n = s.group.size();

  // (1) sections: pi(sigma(t)) = t and sigma(t) lies in the stratum.
  {
    CheckResult r{"section", true, {}};
    for (const auto& st : s.strata) {
      NameFn chart_names = [&](VarId v) { return st.chart.var_name(v); };
      std::vector<Frac> sc = s.group.coordinates(st.sigma);
      for (std::size_t i = 0; i < n && r.passed; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::string& p = s.group.pattern[i][j];
          if ((p == "0" && !st.sigma[i][j].is_zero()) || (p == "1" && !(st.sigma[i][j] == Frac(1)))) {
            r.passed = false;
            r.witness += "stratum " + st.name + ": sigma breaks the group pattern; ";
            break;
          }
        }
      for (const auto& [k, c] : st.proj)
        if (!(sc[c] == Frac(Poly::var(st.chart.base_var(k))))) {
          r.passed = false;
          r.witness += "stratum " + st.name + ": pi(sigma) differs from " + st.chart.base_names[k] + "; ";
        }
      std::vector<Poly> eqs, neqs;
      st.membership(sc, eqs, neqs);
      for (std::size_t k : s.group.nonzero_indices()) neqs.push_back(sc[k].num());
      for (const auto& e : eqs)
        if (!e.is_zero()) {
          r.passed = false;
          r.witness += "stratum " + st.name + ": sigma violates " + e.str(chart_names) + " = 0; ";
        }
      for (const auto& g : neqs)
        if (!nonvanishing_on_chart(g, st.chart)) {
          r.passed = false;
          r.witness += "stratum " + st.name + ": sigma may violate " + g.str(chart_names) + " != 0; ";
        }
    }
    rep.checks.push_back(r);
  }

  // (2) g = c(g) sigma(pi(g)) c(g)^-1 on the stratum, with c(g) invertible there.
  {
    CheckResult r{"conjugator", true, {}};
    FracMatrix g = s.group.generic(0);
    for (std::size_t i = 0; i < s.strata.size(); ++i) {
      const Stratum& st = s.strata[i];
      std::vector<Poly> gb = reduced_groebner(st.eqs);
      auto in_ideal = [&](const Poly& p) { return gb.empty() ? p.is_zero() : normal_form(p, gb).is_zero(); };
      // sigma(pi(g)): chart variables become the projected coordinates.
      FracMatrix sp = map_entries(st.sigma, [&](const Frac& e) {
        auto val = [&](VarId v) -> Frac {
          for (const auto& [k, c] : st.proj)
            if (st.chart.base_var(k) == v) return Frac(Poly::var(static_cast<VarId>(c)));
          return Frac(Poly::var(v));
        };
        return evaluate(e.num(), val) / evaluate(e.den(), val);
      });
      std::vector<Poly> must_vanish_free;
      Frac det = determinant(st.conj);
      must_vanish_free.push_back(det.num());
      for (const auto& row : st.conj)
        for (const auto& e : row) must_vanish_free.push_back(e.den());
      bool invertible = true;
      for (const auto& p : must_vanish_free)
        for (const auto& [f, m] : factor(p).factors) {
          ConstructibleSet x = stratum_set(s, i);
          x.eqs.push_back(f);
          if (!calc.class_of(x).is_zero()) {
            invertible = false;
            r.passed = false;
            r.witness += "stratum " + st.name + ": conjugator degenerates where " + f.str(names) + " = 0; ";
          }
        }
      if (!invertible) continue;
      FracMatrix rhs = st.conj * sp * inverse(st.conj);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          Poly diff = (rhs[a][b] - g[a][b]).num();
          if (!in_ideal(diff)) {
            r.passed = false;
            r.witness += "stratum " + st.name + ": entry (" + std::to_string(a + 1) + "," + std::to_string(b + 1) +
                         ") of c*sigma*c^-1 is " + rhs[a][b].str(names) + "; ";
          }
        }
    }
    rep.checks.push_back(r);
  }

  // (3) pairwise disjointness.
  {
    CheckResult r{"disjoint", true, {}};
    for (std::size_t i = 0; i < s.strata.size(); ++i)
      for (std::size_t j = i + 1; j < s.strata.size(); ++j) {
        ConstructibleSet x = stratum_set(s, i);
        for (const auto& e : s.strata[j].eqs) x.eqs.push_back(e);
        for (const auto& g : s.strata[j].neqs) x.neqs.push_back(g);
        VirtualClass c = calc.class_of(x);
        if (!c.is_zero()) {
          r.passed = false;
          r.witness += "strata " + s.strata[i].name + " and " + s.strata[j].name + " meet in a set of class " +
                       calc.print(c) + "; ";
        }
      }
    rep.checks.push_back(r);
  }

  // (4) covering.
  {
    CheckResult r{"covering", true, {}};
    QPoly total;
    for (std::size_t i = 0; i < s.strata.size(); ++i) total += stratum_class(s, i, calc);
    QPoly g = group_class(s, calc);
    if (total != g) {
      r.passed = false;
      r.witness = "sum of strata is " + total.str() + " but [G] = " + g.str();
    }
    rep.checks.push_back(r);
  }

  // (5) eta invertible.
  {
    CheckResult r{"eta", true, {}};
    for (std::size_t i = 0; i < s.strata.size(); ++i)
      if (fiber_class(s, i, calc).is_zero()) {
        r.passed = false;
        r.witness += "stratum " + s.strata[i].name + " has zero fiber class; ";
      }
    rep.checks.push_back(r);
  }
  return rep;
}

}  // namespace kvar
