#include "kvar/tqft.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "kvar/parse.hpp"

namespace kvar {

std::string to_string(Bordism b) { return b == Bordism::kN ? "N" : "L"; }

// ---- matrices over Q(q) ----

RMatrix identity_rmatrix(std::size_t n) {
  RMatrix m(n, std::vector<RatFunc>(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = RatFunc(1);
  return m;
}

RMatrix multiply(const RMatrix& a, const RMatrix& b) {
  std::size_t k = b.size(), cols = b.empty() ? 0 : b[0].size();
  RMatrix r(a.size(), std::vector<RatFunc>(cols));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != k) throw std::invalid_argument("matrix dimension mismatch");
    for (std::size_t j = 0; j < cols; ++j) {
      RatFunc acc;
      for (std::size_t l = 0; l < k; ++l)
        if (!a[i][l].is_zero() && !b[l][j].is_zero()) acc += a[i][l] * b[l][j];
      r[i][j] = acc;
    }
  }
  return r;
}

RMatrix power(const RMatrix& m, unsigned e) {
  RMatrix result = identity_rmatrix(m.size()), base = m;
  while (e) {
    if (e & 1) result = multiply(result, base);
    e >>= 1;
    if (e) base = multiply(base, base);
  }
  return result;
}

namespace {

QPoly quot(const QPoly& a, const QPoly& b) {
  QPoly q, r;
  QPoly::divmod(a, b, q, r);
  return q;
}

}  // namespace

std::size_t rank(const RMatrix& m) {
  if (m.empty()) return 0;
  // Clear denominators row by row, then eliminate with exact divisions.
  std::vector<std::vector<QPoly>> a;
  for (const auto& row : m) {
    QPoly l(1);
    for (const auto& e : row) l = l * quot(e.den(), QPoly::gcd(l, e.den()));
    std::vector<QPoly> line;
    for (const auto& e : row) line.push_back(e.num() * quot(l, e.den()));
    a.push_back(std::move(line));
  }
  std::size_t rows = a.size(), cols = a[0].size(), r = 0;
  QPoly prev(1);
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = r;
    while (piv < rows && a[piv][c].is_zero()) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        QPoly quot, rem;
        QPoly::divmod(a[r][c] * a[i][j] - a[i][c] * a[r][j], prev, quot, rem);
        if (!rem.is_zero()) throw std::logic_error("inexact Bareiss step");
        a[i][j] = quot;
      }
      a[i][c] = QPoly();
    }
    prev = a[r][c];
    ++r;
  }
  return r;
}

RMatrix transpose(const RMatrix& m) {
  if (m.empty()) return {};
  RMatrix t(m[0].size(), std::vector<RatFunc>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  return t;
}

std::vector<RatFunc> column(const RMatrix& m, std::size_t j) {
  std::vector<RatFunc> out;
  for (const auto& row : m) out.push_back(row.at(j));
  return out;
}

std::size_t TqftMatrix::index(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::invalid_argument("no basis label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

unsigned default_workers() {
  if (const char* env = std::getenv("KVAR_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---- entry sets ----

TqftContext::TqftContext(Stratification strat, SymbolRegistry& registry, MemoCache& cache, TqftOptions options)
    : strat_(std::move(strat)), registry_(registry), cache_(cache), opt_(options) {
  Calculator calc = calculator();
  for (std::size_t i = 0; i < strat_.strata.size(); ++i) {
    for (const auto& g : strat_.strata[i].generators) gen_ids_.push_back(calc.register_generator(g.label(), g.set));
    fibers_.push_back(fiber_class(strat_, i, calc));
    if (fibers_.back().is_zero())
      throw StratError("stratum " + strat_.strata[i].name + " has zero fiber class; eta is not invertible");
  }
}

VarId TqftContext::tail_offset(std::size_t source) const {
  auto [j, g] = strat_.basis().at(source);
  return static_cast<VarId>(strat_.strata[j].generators[g].set.fiber.size() + strat_.group.coords.size());
}

ConstructibleSet TqftContext::entry_frame(std::size_t source, std::size_t target, const FracMatrix& tail,
                                          const std::vector<std::string>& tail_names,
                                          const std::vector<Poly>& tail_neqs) const {
  auto [j, g] = strat_.basis().at(source);
  const Stratum& sj = strat_.strata[j];
  const Stratum& si = strat_.strata.at(target);
  const Generator& gen = sj.generators[g];
  const std::size_t m = gen.set.fiber.size(), n = strat_.group.coords.size();

  ConstructibleSet x;
  x.chart = si.chart;
  auto add_var = [&](VarId v, const std::string& name) {
    x.fiber.push_back(v);
    x.fiber_names[v] = name;
  };
  for (std::size_t k = 0; k < m; ++k) add_var(static_cast<VarId>(k), gen.set.var_name(gen.set.fiber[k]));
  for (std::size_t k = 0; k < n; ++k) add_var(static_cast<VarId>(m + k), "B" + strat_.group.coords[k]);
  for (std::size_t k = 0; k < tail_names.size(); ++k) add_var(static_cast<VarId>(m + n + k), tail_names[k]);

  // Generator conditions: cover variables renumbered, chart variables become B's coordinates.
  std::map<VarId, VarId> cover;
  for (std::size_t k = 0; k < m; ++k) cover[gen.set.fiber[k]] = static_cast<VarId>(k);
  auto lift = [&](const Poly& p) {
    Poly r = p.rename([&](VarId v) { return is_base_var(v) ? v : cover.at(v); });
    for (const auto& [k, c] : sj.proj) r = r.substitute(sj.chart.base_var(k), Poly::var(static_cast<VarId>(m + c)));
    return r;
  };
  for (const auto& e : gen.set.eqs) x.eqs.push_back(lift(e));
  for (const auto& e : gen.set.neqs) x.neqs.push_back(lift(e));
  for (const auto& d : sj.chart.domain) x.neqs.push_back(lift(d));

  std::vector<Frac> bc;
  for (std::size_t k = 0; k < n; ++k) bc.emplace_back(Poly::var(static_cast<VarId>(m + k)));
  sj.membership(bc, x.eqs, x.neqs);
  for (std::size_t k : strat_.group.nonzero_indices()) x.neqs.push_back(bc[k].num());
  for (const auto& p : tail_neqs) x.neqs.push_back(p);

  FracMatrix b = strat_.group.element([&](std::size_t k) { return bc[k]; });
  std::vector<Frac> wc = strat_.group.coordinates(b * tail);
  si.membership(wc, x.eqs, x.neqs);
  for (auto& p : si.ties(wc, [&](std::size_t k) { return Poly::var(si.chart.base_var(k)); })) x.eqs.push_back(p);
  std::erase_if(x.eqs, [](const Poly& p) { return p.is_zero(); });
  x.sort_fiber();
  return x;
}

ConstructibleSet TqftContext::build_entry_set(Bordism b, std::size_t source, std::size_t target) const {
  const GroupSpec& grp = strat_.group;
  const std::size_t n = grp.coords.size();
  VarId off = tail_offset(source);
  std::vector<std::string> names;
  std::vector<Poly> neqs;
  auto generic = [&](VarId first, const std::string& prefix) {
    for (std::size_t k = 0; k < n; ++k) names.push_back(prefix + grp.coords[k]);
    for (std::size_t k : grp.nonzero_indices()) neqs.push_back(Poly::var(first + static_cast<VarId>(k)));
    return grp.generic(first);
  };
  if (b == Bordism::kN) {
    FracMatrix a = generic(off, "A");
    return entry_frame(source, target, a * a, names, neqs);
  }
  FracMatrix a1 = generic(off, "A");
  FracMatrix b1 = generic(off + static_cast<VarId>(n), "C");
  return entry_frame(source, target, a1 * b1 * inverse(a1) * inverse(b1), names, neqs);
}

ConstructibleSet TqftContext::build_split_piece(std::size_t source, std::size_t target, std::size_t k) const {
  const Stratum& sk = strat_.strata.at(k);
  VarId off = tail_offset(source);
  std::vector<std::string> names;
  std::vector<Poly> neqs;
  auto zvar = [&](VarId v) -> Frac {
    if (!is_base_var(v)) throw StratError("section entry outside the chart variables");
    return Frac(Poly::var(off + (v - kBaseVarOffset)));
  };
  for (const auto& name : sk.chart.base_names) names.push_back("z" + name);
  for (const auto& d : sk.chart.domain) neqs.push_back(evaluate(d, zvar).num());
  FracMatrix s = map_entries(sk.sigma, [&](const Frac& e) { return evaluate(e.num(), zvar) / evaluate(e.den(), zvar); });
  return entry_frame(source, target, s * s, names, neqs);
}

VirtualClass TqftContext::entry_class(Bordism b, std::size_t source, std::size_t target, Calculator& calc) const {
  if (b == Bordism::kN && opt_.fiber_split) {
    VirtualClass total;
    for (std::size_t k = 0; k < strat_.strata.size(); ++k)
      total += calc.class_of(build_split_piece(source, target, k)).scaled(fibers_[k]);
    return total;
  }
  return calc.class_of(build_entry_set(b, source, target));
}

std::vector<QPoly> TqftContext::decompose(const VirtualClass& c, std::size_t source, std::size_t target) const {
  auto basis = strat_.basis();
  std::vector<std::size_t> positions;
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (basis[k].first == target) positions.push_back(k);
  std::vector<QPoly> out(positions.size());
  for (const auto& [id, coeff] : c.terms()) {
    auto it = std::find_if(positions.begin(), positions.end(), [&](std::size_t k) { return gen_ids_[k] == id; });
    if (it == positions.end())
      throw BasisClosureError("entry " + strat_.basis_labels()[source] + " -> stratum " + strat_.strata[target].name +
                              " has residual symbol " + registry_.label(id) + " with coefficient " +
                              coeff.factored_str());
    out[static_cast<std::size_t>(it - positions.begin())] = coeff;
  }
  return out;
}

TqftMatrix TqftContext::compute_Zpi(Bordism b) const {
  const std::size_t dim = strat_.basis_size(), nstrata = strat_.strata.size();
  std::vector<std::vector<QPoly>> results(dim * nstrata);
  std::vector<std::exception_ptr> errors(dim * nstrata);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    Calculator calc = calculator();
    for (std::size_t t; (t = next++) < results.size();) {
      std::size_t source = t / nstrata, target = t % nstrata;
      try {
        results[t] = decompose(entry_class(b, source, target, calc), source, target);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  unsigned workers = opt_.workers ? opt_.workers : default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, results.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  // Report the first failing entry in task order, independent of scheduling.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  TqftMatrix z{strat_.basis_labels(), RMatrix(dim, std::vector<RatFunc>(dim)), true};
  auto basis = strat_.basis();
  for (std::size_t source = 0; source < dim; ++source)
    for (std::size_t target = 0; target < nstrata; ++target) {
      std::size_t g = 0;
      for (std::size_t row = 0; row < dim; ++row)
        if (basis[row].first == target) z.m[row][source] = RatFunc(results[source * nstrata + target][g++]);
    }
  return z;
}

TqftMatrix TqftContext::compute_eta() const {
  const std::size_t dim = strat_.basis_size();
  TqftMatrix eta{strat_.basis_labels(), RMatrix(dim, std::vector<RatFunc>(dim)), false};
  auto basis = strat_.basis();
  for (std::size_t k = 0; k < dim; ++k) eta.m[k][k] = RatFunc(fibers_[basis[k].first]);
  return eta;
}

// ---- reduced matrices and classes ----

TqftMatrix reduce(const TqftMatrix& zpi, const TqftMatrix& eta) {
  if (zpi.size() != eta.size() || zpi.labels != eta.labels) throw std::invalid_argument("basis mismatch in reduce");
  TqftMatrix out = zpi;
  for (std::size_t i = 0; i < eta.size(); ++i)
    for (std::size_t j = 0; j < eta.size(); ++j)
      if (i != j && !eta.m[i][j].is_zero()) throw std::invalid_argument("eta is not diagonal");
  for (std::size_t j = 0; j < eta.size(); ++j) {
    if (eta.m[j][j].is_zero()) throw std::domain_error("eta is singular at " + eta.labels[j]);
    RatFunc inv = eta.m[j][j].inverse();
    for (std::size_t i = 0; i < out.size(); ++i) out.m[i][j] = out.m[i][j] * inv;
  }
  return out;
}

QPoly rep_variety_class(const TqftMatrix& reduced_n, unsigned r) {
  if (reduced_n.size() == 0) throw std::invalid_argument("empty matrix");
  RatFunc v = power(reduced_n.m, r)[0][0];
  if (!v.is_polynomial())
    throw NonPolynomialResult("(T1,T1) entry of the power " + std::to_string(r) + " is " + v.str());
  return v.num().scaled(1 / v.den().lead());
}

QPoly closed_form(std::string_view group, unsigned r) {
  if (r == 0) throw std::invalid_argument("r must be positive");
  const RatFunc q(QPoly::q()), q1 = q - RatFunc(1);
  const int n = static_cast<int>(r);
  RatFunc v;
  if (group == "u2t") {
    v = q.pow(n - 1) * q1 * (RatFunc(2) * q1.pow(n - 2) + RatFunc(1));
  } else if (group == "u3t") {
    v = RatFunc(2) * q.pow(2 * n - 1) * q1.pow(n) + q.pow(3 * n - 3) * q1.pow(2) +
        RatFunc(4) * q.pow(3 * n - 3) * q1.pow(n) + RatFunc(4) * q.pow(3 * n - 3) * q1.pow(2 * n - 2);
  } else if (group == "gm") {
    v = RatFunc(2) * q1.pow(n - 1);
  } else if (group == "u2") {
    v = RatFunc(4) * q.pow(n - 1) * q1.pow(2 * n - 2) + RatFunc(2) * q.pow(n - 1) * q1.pow(n);
  } else if (group == "u3") {
    v = RatFunc(4) * q.pow(2 * n - 1) * q1.pow(2 * n - 1) + RatFunc(2) * q.pow(3 * n - 3) * q1.pow(n + 1) +
        RatFunc(8) * q.pow(3 * n - 3) * q1.pow(2 * n - 1) + RatFunc(8) * q.pow(3 * n - 3) * q1.pow(3 * n - 3);
  } else {
    throw std::invalid_argument("no closed form for group '" + std::string(group) + "'");
  }
  if (!v.is_polynomial()) throw NonPolynomialResult("closed form for " + std::string(group) + " is " + v.str());
  return v.num().scaled(1 / v.den().lead());
}

DiagReport verify_diagonalization(const RMatrix& m, const RMatrix& p, const RMatrix& d,
                                  const std::vector<std::string>& labels) {
  DiagReport rep;
  RMatrix lhs = multiply(m, p), rhs = multiply(p, d);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    for (std::size_t j = 0; j < lhs[i].size(); ++j)
      if (lhs[i][j] != rhs[i][j]) {
        rep.passed = false;
        std::string row = i < labels.size() ? labels[i] : std::to_string(i + 1);
        rep.mismatches.push_back("(" + row + ", column " + std::to_string(j + 1) + "): M*P = " + lhs[i][j].str() +
                                 " but P*D = " + rhs[i][j].str());
      }
  return rep;
}

// ---- finite-field oracle ----

GroupSpec rep_group(std::string_view name) {
  if (name == "u2") return GroupSpec{"u2", {"a", "b", "c"}, {{"a", "b"}, {"0", "c"}}, {"a", "c"}};
  if (name == "u3")
    return GroupSpec{
        "u3", {"a", "b", "c", "d", "e", "f"}, {{"a", "b", "c"}, {"0", "d", "e"}, {"0", "0", "f"}}, {"a", "d", "f"}};
  return builtin_stratification(name).group;
}

std::uint64_t oracle_rep_count(const GroupSpec& g, unsigned r, std::uint64_t p) {
  const std::size_t k = g.coords.size(), n = g.size();
  std::size_t space = 1;
  for (std::size_t i = 0; i < k; ++i) {
    space *= p;
    if (space > 5'000'000) throw TooLarge("group too large to enumerate over F_" + std::to_string(p));
  }
  std::vector<bool> nonzero(k, false);
  for (std::size_t i : g.nonzero_indices()) nonzero[i] = true;
  std::vector<std::pair<std::size_t, std::size_t>> pos;
  for (std::size_t i = 0; i < k; ++i) pos.push_back(g.position(i));

  using Mat = std::vector<std::uint64_t>;  // row-major n x n, entries mod p
  auto decode = [&](std::size_t code, std::vector<std::uint64_t>& c) {
    for (std::size_t i = 0; i < k; ++i, code /= p) c[i] = code % p;
  };
  auto encode = [&](const Mat& m) {
    std::size_t code = 0;
    for (std::size_t i = k; i-- > 0;) code = code * p + m[pos[i].first * n + pos[i].second];
    return code;
  };
  auto to_matrix = [&](const std::vector<std::uint64_t>& c) {
    Mat m(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const std::string& e = g.pattern[i][j];
        m[i * n + j] = e == "0" ? 0 : e == "1" ? 1 : c[g.coord_index(e)];
      }
    return m;
  };
  auto mul = [&](const Mat& a, const Mat& b) {
    Mat c(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        std::uint64_t acc = 0;
        for (std::size_t l = 0; l < n; ++l) acc = (acc + a[i * n + l] * b[l * n + j]) % p;
        c[i * n + j] = acc;
      }
    return c;
  };

  std::vector<std::size_t> elems;
  std::vector<Mat> mats(space);
  std::vector<std::uint64_t> c(k);
  for (std::size_t code = 0; code < space; ++code) {
    decode(code, c);
    bool ok = true;
    for (std::size_t i = 0; i < k; ++i)
      if (nonzero[i] && c[i] == 0) ok = false;
    if (!ok) continue;
    elems.push_back(code);
    mats[code] = to_matrix(c);
  }
  // squares[s] = number of A with A^2 = s
  std::vector<std::uint64_t> squares(space, 0);
  for (std::size_t e : elems) ++squares[encode(mul(mats[e], mats[e]))];

  std::vector<std::uint64_t> dist(space, 0);
  Mat id(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) id[i * n + i] = 1;
  const std::size_t identity = encode(id);
  dist[identity] = 1;
  for (unsigned step = 0; step < r; ++step) {
    std::vector<std::uint64_t> next(space, 0);
    for (std::size_t a : elems) {
      if (!dist[a]) continue;
      for (std::size_t s : elems)
        if (squares[s]) next[encode(mul(mats[a], mats[s]))] += dist[a] * squares[s];
    }
    dist = std::move(next);
  }
  return dist[identity];
}

// ---- fixtures ----

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  Fixture fx;
  fx.group = j.value("group", "");
  fx.labels = j.at("labels").get<std::vector<std::string>>();
  for (const auto& [name, mj] : j.at("matrices").items()) {
    TqftMatrix m;
    m.labels = fx.labels;
    m.g_factor = mj.at("gFactor").get<bool>();
    for (const auto& row : mj.at("entries")) {
      std::vector<RatFunc> line;
      for (const auto& e : row) line.push_back(parse_ratfunc(e.get<std::string>()));
      m.m.push_back(std::move(line));
    }
    fx.matrices.emplace(name, std::move(m));
  }
  if (j.contains("repClasses"))
    for (const auto& e : j.at("repClasses")) fx.rep_classes.push_back(parse_qpoly(e.get<std::string>()));
  return fx;
}

Fixture builtin_fixture(std::string_view group) {
  const char* env = std::getenv("KVAR_DATA_DIR");
  std::string dir = env && *env ? env : KVAR_DATA_DIR;
  return load_fixture(dir + "/fixtures/" + std::string(group) + ".json");
}

std::vector<std::string> compare_matrices(const TqftMatrix& got, const TqftMatrix& want) {
  std::vector<std::string> out;
  if (got.m.size() != want.m.size()) return {"dimension " + std::to_string(got.m.size()) + " vs " +
                                             std::to_string(want.m.size())};
  if (got.g_factor != want.g_factor) out.push_back("[G] factor flag differs");
  for (std::size_t i = 0; i < got.m.size(); ++i)
    for (std::size_t j = 0; j < got.m[i].size(); ++j)
      if (got.m[i][j] != want.m[i][j]) {
        const auto& l = got.labels;
        out.push_back("(" + (i < l.size() ? l[i] : std::to_string(i)) + "," + (j < l.size() ? l[j] : std::to_string(j)) +
                      "): got " + got.m[i][j].str() + ", want " + want.m[i][j].str());
      }
  return out;
}

}  // namespace kvar
