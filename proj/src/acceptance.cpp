#include "kvar/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace kvar {

namespace {

struct Spec {
  const char* name;
  const char* provenance;
  double limit;  // seconds
};

const Spec kSpecs[kCriteria] = {
    {"u2t unreduced N matrix", "fixture u2t.json: Zpi_N", 10},
    {"u2t reduced N and L matrices, eta", "fixture u2t.json: Zred_N, Zred_L, eta", 10},
    {"u2t matrix identities and rank", "bordism relations NL = LN, NL = N^3; rank 2", 5},
    {"u2t diagonalization", "fixture u2t.json: P, D", 5},
    {"u2t representation variety classes r = 1..10", "fixture u2t.json: repClasses; closed form", 10},
    {"u2 = u2t * gm closed forms r = 1..10", "closed forms; gm factor 2(q - 1)^(r - 1)", 1},
    {"u3t reduced N matrix", "fixture u3t.json: Zred_N", 3600},
    {"u3t diagonalization and rank", "fixture u3t.json: P, D; rank 5", 60},
    {"u3t representation variety classes r = 1..5", "fixture u3t.json: repClasses; closed form", 60},
    {"stratification verifier on u2t and u3t", "stratification data files", 60},
    {"finite-field oracle at p = 2, 3, 5", "brute-force enumeration over F_p", 120},
    {"randomized calculator properties", "randomized constructible sets", 300},
    {"span relations", "computed class of {x : x^2 != 0, 1}; rank over Q(q)", 60},
};

bool has_symbols(const VirtualClass& c, const SymbolRegistry& reg) {
  for (const auto& [s, k] : c.terms())
    if (!reg.info(s).unit) return true;
  return false;
}

std::string join(const std::vector<std::string>& parts, std::size_t limit = 4) {
  std::string out;
  for (std::size_t i = 0; i < parts.size() && i < limit; ++i) out += (i ? "; " : "") + parts[i];
  if (parts.size() > limit) out += "; ... (" + std::to_string(parts.size()) + " total)";
  return out;
}

CheckOutcome verdict(std::vector<std::string> failures, const std::string& ok_detail) {
  CheckOutcome c;
  c.passed = failures.empty();
  c.detail = c.passed ? ok_detail : join(failures);
  return c;
}

Integer to_integer(std::uint64_t v) { return Integer(static_cast<unsigned long>(v)); }

// Value at q = p, which must be an integer.
Integer at(const QPoly& f, std::uint64_t p) {
  Rational v = f.evaluate(Rational(static_cast<unsigned long>(p)));
  if (v.get_den() != 1) throw KvarError("non-integral value at q = " + std::to_string(p));
  return v.get_num();
}

// ---- random sets for the property criterion ----

Poly random_poly(std::mt19937& rng, VarId first, int nvars) {
  std::uniform_int_distribution<int> sign(0, 1), exp(0, 2), nterms(1, 3), var(0, nvars - 1);
  // Distinct monomials with unit coefficients: no prime divides a coefficient.
  std::vector<Term> terms;
  std::set<std::vector<Monomial::Factor>> used;
  const int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    std::vector<Monomial::Factor> f;
    std::set<VarId> seen;
    for (int k = 0; k < 2; ++k) {
      VarId v = first + static_cast<VarId>(var(rng));
      int e = exp(rng);
      if (e > 0 && seen.insert(v).second) f.emplace_back(v, e);
    }
    std::sort(f.begin(), f.end());
    const Rational c(sign(rng) ? 1 : -1);
    if (used.insert(f).second) terms.push_back({Monomial::from_factors(f), c});
  }
  return Poly::from_terms(std::move(terms));
}

ConstructibleSet random_set(std::mt19937& rng, VarId first) {
  ConstructibleSet x;
  x.fiber = {first, first + 1, first + 2};
  std::uniform_int_distribution<int> count(0, 2);
  const int a = count(rng), b = count(rng);
  for (int i = 0; i < a; ++i) x.eqs.push_back(random_poly(rng, first, 3));
  for (int i = 0; i < b; ++i) x.neqs.push_back(random_poly(rng, first, 3));
  return x;
}

}  // namespace

std::vector<int> suite_criteria(std::string_view suite) {
  if (suite == "u2") return {1, 2, 3, 4, 5, 6, 10, 11, 13};
  if (suite == "u3") return {7, 8, 9, 10, 13};
  if (suite == "appendix") return {12};
  if (suite == "all") {
    std::vector<int> all;
    for (int i = 1; i <= kCriteria; ++i) all.push_back(i);
    return all;
  }
  throw std::invalid_argument("unknown suite '" + std::string(suite) + "' (expected u2, u3, appendix or all)");
}

std::string criterion_name(int id) {
  if (id < 1 || id > kCriteria) throw std::out_of_range("criterion " + std::to_string(id));
  return kSpecs[id - 1].name;
}

struct AcceptanceRunner::Group {
  SymbolRegistry reg;
  MemoCache cache;
  TqftContext ctx;
  Fixture fixture;
  Group(std::string_view name, TqftOptions opt)
      : ctx(builtin_stratification(name), reg, cache, opt), fixture(builtin_fixture(name)) {}
};

AcceptanceRunner::AcceptanceRunner(AcceptanceOptions options) : opt_(options) {}
AcceptanceRunner::~AcceptanceRunner() = default;

AcceptanceRunner::Group& AcceptanceRunner::u2() {
  if (!u2_) {
    TqftOptions o;
    o.workers = opt_.workers;
    u2_ = std::make_unique<Group>("u2t", o);
  }
  return *u2_;
}

AcceptanceRunner::Group& AcceptanceRunner::u3() {
  if (!u3_) {
    TqftOptions o;
    o.workers = opt_.workers;
    o.fiber_split = true;
    u3_ = std::make_unique<Group>("u3t", o);
  }
  return *u3_;
}

const TqftMatrix& AcceptanceRunner::u2_zpi_n() {
  if (!u2_zpi_n_) u2_zpi_n_ = u2().ctx.compute_Zpi(Bordism::kN);
  return *u2_zpi_n_;
}
const TqftMatrix& AcceptanceRunner::u2_zpi_l() {
  if (!u2_zpi_l_) u2_zpi_l_ = u2().ctx.compute_Zpi(Bordism::kL);
  return *u2_zpi_l_;
}
const TqftMatrix& AcceptanceRunner::u2_eta() {
  if (!u2_eta_) u2_eta_ = u2().ctx.compute_eta();
  return *u2_eta_;
}
const TqftMatrix& AcceptanceRunner::u3_zred_n() {
  if (!u3_zred_n_) u3_zred_n_ = reduce(u3().ctx.compute_Zpi(Bordism::kN), u3().ctx.compute_eta());
  return *u3_zred_n_;
}

CheckOutcome AcceptanceRunner::run(int id) {
  if (id < 1 || id > kCriteria) throw std::out_of_range("criterion " + std::to_string(id));
  const Spec& spec = kSpecs[id - 1];
  CheckOutcome out;
  try {
    // Criteria stated "given" an earlier matrix get it outside their clock.
    if (id == 3 || id == 4 || id == 5) {
      u2_zpi_n();
      u2_zpi_l();
      u2_eta();
    }
    if (id == 8 || id == 9 || id == 13) u3_zred_n();
    if (id == 13) u2_zpi_n();

    auto start = std::chrono::steady_clock::now();
    switch (id) {
      case 1: out = c1(); break;
      case 2: out = c2(); break;
      case 3: out = c3(); break;
      case 4: out = c4(); break;
      case 5: out = c5(); break;
      case 6: out = c6(); break;
      case 7: out = c7(); break;
      case 8: out = c8(); break;
      case 9: out = c9(); break;
      case 10: out = c10(); break;
      case 11: out = c11(); break;
      case 12: out = c12(); break;
      default: out = c13(); break;
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.passed && out.seconds > spec.limit) {
      out.passed = false;
      std::ostringstream s;
      s << "took " << out.seconds << " s, bound " << spec.limit << " s";
      out.detail = s.str();
    }
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail = std::string("error: ") + e.what();
  }
  out.id = id;
  out.name = spec.name;
  out.provenance = spec.provenance;
  return out;
}

CheckOutcome AcceptanceRunner::c1() {
  return verdict(compare_matrices(u2_zpi_n(), u2().fixture.matrices.at("Zpi_N")), "9 entries equal");
}

CheckOutcome AcceptanceRunner::c2() {
  const auto& fx = u2().fixture.matrices;
  std::vector<std::string> bad;
  auto check = [&](const std::string& what, const TqftMatrix& got, const TqftMatrix& want) {
    for (const auto& d : compare_matrices(got, want)) bad.push_back(what + " " + d);
  };
  check("Zred_N", reduce(u2_zpi_n(), u2_eta()), fx.at("Zred_N"));
  check("Zred_L", reduce(u2_zpi_l(), u2_eta()), fx.at("Zred_L"));
  check("eta", u2_eta(), fx.at("eta"));
  return verdict(bad, "Zred_N, Zred_L and eta = diag(1, q - 1, q) equal");
}

CheckOutcome AcceptanceRunner::c3() {
  const RMatrix n = reduce(u2_zpi_n(), u2_eta()).m, l = reduce(u2_zpi_l(), u2_eta()).m;
  std::vector<std::string> bad;
  const RMatrix nl = multiply(n, l);
  if (nl != multiply(l, n)) bad.push_back("N L != L N");
  if (nl != power(n, 3)) bad.push_back("N L != N^3");
  const std::size_t rk = rank(n);
  if (rk != 2) bad.push_back("rank " + std::to_string(rk) + ", want 2");
  return verdict(bad, "NL = LN, NL = N^3, rank 2");
}

CheckOutcome AcceptanceRunner::c4() {
  const auto& fx = u2().fixture.matrices;
  const TqftMatrix n = reduce(u2_zpi_n(), u2_eta());
  DiagReport r = verify_diagonalization(n.m, fx.at("P").m, fx.at("D").m, n.labels);
  return verdict(r.mismatches, "M P = P D");
}

CheckOutcome AcceptanceRunner::c5() {
  const TqftMatrix n = reduce(u2_zpi_n(), u2_eta());
  const auto& want = u2().fixture.rep_classes;
  std::vector<std::string> bad;
  if (want.size() < 10) bad.push_back("fixture lists " + std::to_string(want.size()) + " classes");
  for (unsigned r = 1; r <= 10 && r <= want.size(); ++r) {
    QPoly got = rep_variety_class(n, r);
    if (got != want[r - 1]) bad.push_back("r=" + std::to_string(r) + ": " + got.factored_str() + " vs listed " +
                                          want[r - 1].factored_str());
    if (got != closed_form("u2t", r))
      bad.push_back("r=" + std::to_string(r) + ": closed form " + closed_form("u2t", r).factored_str());
  }
  return verdict(bad, "r = 1..10 equal the listed values and the closed form (r = 1 gives q + 1)");
}

CheckOutcome AcceptanceRunner::c6() {
  std::vector<std::string> bad;
  const QPoly q1 = QPoly::q() - QPoly(1);
  for (unsigned r = 1; r <= 10; ++r) {
    const QPoly gm = QPoly(2) * q1.pow(r - 1);
    if (closed_form("gm", r) != gm) bad.push_back("gm r=" + std::to_string(r));
    if (closed_form("u2", r) != closed_form("u2t", r) * gm) bad.push_back("u2 r=" + std::to_string(r));
    if (closed_form("u3", r) != closed_form("u3t", r) * gm) bad.push_back("u3 r=" + std::to_string(r));
  }
  return verdict(bad, "u2 = u2t * 2(q - 1)^(r - 1) and u3 = u3t * 2(q - 1)^(r - 1); the exponent r - 1, not r");
}

CheckOutcome AcceptanceRunner::c7() {
  return verdict(compare_matrices(u3_zred_n(), u3().fixture.matrices.at("Zred_N")), "144 entries equal");
}

CheckOutcome AcceptanceRunner::c8() {
  const auto& fx = u3().fixture.matrices;
  const TqftMatrix& n = u3_zred_n();
  std::vector<std::string> bad = verify_diagonalization(n.m, fx.at("P").m, fx.at("D").m, n.labels).mismatches;
  const std::size_t rk = rank(n.m);
  if (rk != 5) bad.push_back("rank " + std::to_string(rk) + ", want 5");
  return verdict(bad, "M P = P D, rank 5");
}

CheckOutcome AcceptanceRunner::c9() {
  const auto& want = u3().fixture.rep_classes;
  std::vector<std::string> bad;
  if (want.size() < 5) bad.push_back("fixture lists " + std::to_string(want.size()) + " classes");
  for (unsigned r = 1; r <= 5 && r <= want.size(); ++r) {
    QPoly got = rep_variety_class(u3_zred_n(), r);
    if (got != want[r - 1]) bad.push_back("r=" + std::to_string(r) + ": " + got.factored_str());
    if (got != closed_form("u3t", r)) bad.push_back("r=" + std::to_string(r) + " differs from the closed form");
  }
  return verdict(bad, "r = 1..5 equal the listed values and the closed form");
}

CheckOutcome AcceptanceRunner::c10() {
  std::vector<std::string> bad;
  for (const char* g : {"u2t", "u3t"}) {
    SymbolRegistry reg;
    MemoCache cache;
    Calculator calc(reg, cache);
    StratReport r = verify_stratification(builtin_stratification(g), calc);
    for (const auto& c : r.checks)
      if (!c.passed) bad.push_back(std::string(g) + " " + c.name + ": " + c.witness);
    if (r.checks.size() != 5) bad.push_back(std::string(g) + ": " + std::to_string(r.checks.size()) + " checks");
  }
  return verdict(bad, "section, conjugator, disjoint, covering and eta checks pass for u2t and u3t");
}

CheckOutcome AcceptanceRunner::c11() {
  std::vector<std::string> bad;
  Group& g = u2();
  Calculator calc = g.ctx.calculator();
  const Stratification& s = g.ctx.strat();
  const TqftMatrix n = reduce(u2_zpi_n(), u2_eta());
  const auto& labels = s.basis_labels();
  for (std::uint64_t p : {2u, 3u, 5u}) {
    const std::string at_p = "p=" + std::to_string(p) + " ";
    for (std::size_t j = 0; j < labels.size(); ++j)
      for (std::size_t i = 0; i < labels.size(); ++i) {
        ConstructibleSet x = g.ctx.build_entry_set(Bordism::kN, j, i);
        const Integer count = to_integer(count_points(x, p));
        const Integer value = count_class(calc.class_of(x), p);
        if (count != value)
          bad.push_back(at_p + "entry " + labels[j] + "->" + labels[i] + ": count " + count.get_str() + ", class " +
                        value.get_str());
      }
    for (unsigned r = 1; r <= 3; ++r) {
      const Integer count = to_integer(oracle_rep_count(s.group, r, p));
      const Integer value = at(rep_variety_class(n, r), p);
      if (count != value)
        bad.push_back(at_p + "N_" + std::to_string(r) + ": count " + count.get_str() + ", class " + value.get_str());
    }
    for (std::size_t i = 0; i < s.strata.size(); ++i) {
      const Integer count = to_integer(count_points(stratum_set(s, i), p));
      const Integer value = at(stratum_class(s, i, calc), p);
      if (count != value)
        bad.push_back(at_p + "stratum " + s.strata[i].name + ": count " + count.get_str() + ", class " +
                      value.get_str());
    }
  }
  CheckOutcome c = verdict(bad, "entry sets, N_1..N_3 and strata agree at p = 2, 3, 5");
  if (!c.passed) {
    const bool only_two = std::all_of(bad.begin(), bad.end(), [](const std::string& b) { return b.rfind("p=2 ", 0) == 0; });
    c.detail = std::to_string(bad.size()) + " disagreements" +
               (only_two ? ", all at p = 2 (bad reduction; p = 3, 5 agree)" : "") + ": " + c.detail;
  }
  return c;
}

CheckOutcome AcceptanceRunner::c12() {
  SymbolRegistry reg;
  MemoCache c1, c2, c3;
  Calculator primary(reg, c1);
  CalcOptions alt_opt;
  alt_opt.strategy = Strategy::kLargest;
  Calculator alternate(reg, c2, alt_opt);
  CalcOptions nocache_opt;
  nocache_opt.use_cache = false;
  Calculator uncached(reg, c3, nocache_opt);

  std::vector<std::string> bad;
  // Point counts of symbols are compared at primes large enough to avoid the
  // bad reduction that small coefficients from elimination cause at 3..19.
  constexpr std::uint64_t kPrimes[] = {29, 31, 37};
  // Classes with fresh symbols may name different symbols, so those are compared by point counts.
  auto same = [&](const VirtualClass& a, const VirtualClass& b) {
    if (!has_symbols(a, reg) && !has_symbols(b, reg)) return a == b;
    unsigned compared = 0;
    for (std::uint64_t p : kPrimes) {
      try {
        if (count_class(a, p) != count_class(b, p)) return false;
        ++compared;
      } catch (const TooLarge&) {
        return false;
      } catch (const KvarError&) {
        // p divides a denominator in some symbol's equations
      }
    }
    return compared > 0;
  };
  std::mt19937 rng(opt_.seed);
  unsigned symbol_free = 0;
  for (unsigned k = 0; k < opt_.property_sets; ++k) {
    const ConstructibleSet x = random_set(rng, 0);
    std::string text = to_vset(x);
    std::replace(text.begin(), text.end(), '\n', ' ');
    const std::string tag = "set " + std::to_string(k) + " {" + text + "}";
    const VirtualClass c = primary.class_of(x);

    const Poly h = random_poly(rng, 0, 3);
    ConstructibleSet with_h = x, without_h = x;
    with_h.eqs.push_back(h);
    without_h.neqs.push_back(h);
    if (!same(c, primary.class_of(with_h) + primary.class_of(without_h))) bad.push_back("scissor: " + tag);

    ConstructibleSet y = random_set(rng, 3);
    ConstructibleSet xy = x;
    xy.fiber.insert(xy.fiber.end(), y.fiber.begin(), y.fiber.end());
    xy.eqs.insert(xy.eqs.end(), y.eqs.begin(), y.eqs.end());
    xy.neqs.insert(xy.neqs.end(), y.neqs.begin(), y.neqs.end());
    if (!same(primary.class_of(xy), primary.fiber_product(c, primary.class_of(y)))) bad.push_back("product: " + tag);

    if (!same(c, alternate.class_of(x))) bad.push_back("strategy: " + tag);
    if (c != uncached.class_of(x)) bad.push_back("cache: " + tag);

    if (auto poly = c.multiple_of(reg.unit(x.chart)); poly || c.is_zero()) {
      ++symbol_free;
      const QPoly f = poly ? *poly : QPoly();
      for (std::uint64_t p : kPrimes)
        if (to_integer(count_points(x, p)) != at(f, p)) bad.push_back("oracle p=" + std::to_string(p) + ": " + tag);
    }
  }
  std::ostringstream ok;
  ok << opt_.property_sets << " sets (seed " << opt_.seed << "), " << symbol_free
     << " symbol-free: scissor, product, strategy, cache and oracle hold";
  return verdict(bad, ok.str());
}

CheckOutcome AcceptanceRunner::c13() {
  std::vector<std::string> bad;
  // [{x : x^2 != 0, 1}], computed rather than assumed.
  ConstructibleSet xs;
  xs.fiber = {0};
  xs.neqs = {Poly::var(0, 2), Poly::var(0, 2) - Poly(1)};
  Calculator calc = u2().ctx.calculator();
  auto factor = calc.class_of(xs).multiple_of(calc.registry().unit(xs.chart));
  if (!factor) return verdict({"class of {x : x^2 != 0, 1} is not a polynomial"}, "");
  const TqftMatrix& z = u2_zpi_n();
  auto holds = [&](const QPoly& f) {
    for (std::size_t i = 0; i < 3; ++i)
      if (z.m[i][2] != RatFunc(f) * (z.m[i][0] + z.m[i][1])) return false;
    return true;
  };
  // The relation is checked with the stated factor q - 2; the computed class
  // is reported alongside.
  const QPoly stated = QPoly::q() - QPoly(2);
  if (!holds(stated))
    bad.push_back("u2t: Z_pi(N)(S) != (q - 2) (Z_pi(N)(T1) + Z_pi(N)(T2))" +
                  std::string(holds(*factor) ? "; it holds with " + factor->factored_str() +
                                                   " = [{x : x^2 != 0, 1}]"
                                             : ""));

  const TqftMatrix& m = u3_zred_n();
  RMatrix first(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) first[i].assign(m.m[i].begin(), m.m[i].begin() + 5);
  const std::size_t r5 = rank(first), rall = rank(m.m);
  if (r5 != rall)
    bad.push_back("u3t: rank of T1..T5 columns " + std::to_string(r5) + " < " + std::to_string(rall));
  else if (!bad.empty())
    bad.push_back("u3t span holds (rank " + std::to_string(rall) + ")");

  return verdict(bad, "u2t: Z_pi(N)(S) = (q - 2) (Z_pi(N)(T1) + Z_pi(N)(T2)); u3t: columns S6..D12 lie in the span of "
                      "T1..T5 (rank " + std::to_string(rall) + ")");
}

}  // namespace kvar
