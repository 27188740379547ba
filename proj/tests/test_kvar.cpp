#include <gtest/gtest.h>
#include <algorithm>

#include <random>
#include <thread>

#include "kvar/calculator.hpp"
#include "test_util.hpp"

using namespace kvar;
using kvar::testing::P;

namespace {

Chart c3() {
  Chart c;
  c.label = "C3";
  c.base_names = {"t"};
  c.domain = {P("t"), P("t - 1")};
  return c;
}

Chart c12() {
  Chart c;
  c.label = "C12";
  c.base_names = {"t", "s"};
  c.domain = {P("t"), P("t - 1"), P("s"), P("s - 1"), P("t - s")};
  return c;
}

ConstructibleSet make(const Chart& chart, std::vector<VarId> vars, std::vector<std::string> eqs,
                      std::vector<std::string> neqs = {}) {
  ConstructibleSet x;
  x.chart = chart;
  x.fiber = std::move(vars);
  for (const auto& e : eqs) x.eqs.push_back(P(e));
  for (const auto& g : neqs) x.neqs.push_back(P(g));
  return x;
}

struct Env {
  SymbolRegistry reg;
  MemoCache cache;
  Calculator calc{reg, cache};
};

QPoly Q(const std::string& s) { return parse_qpoly(s); }

bool has_symbols(const VirtualClass& c, const SymbolRegistry& reg) {
  for (const auto& [s, k] : c.terms())
    if (!reg.info(s).unit) return true;
  return false;
}

std::optional<QPoly> pure(const VirtualClass& c, SymbolRegistry& reg, const Chart& chart) {
  return c.multiple_of(reg.unit(chart));
}

}  // namespace

TEST(Simplify, SuccessiveLinearEliminations) {
  Env env;
  auto r = env.calc.simplify(make(Chart{}, {0, 1}, {"b - a^2", "a - 1"}));
  ASSERT_FALSE(r.empty);
  EXPECT_TRUE(r.set.fiber.empty());
  EXPECT_TRUE(r.set.eqs.empty());
  EXPECT_TRUE(r.set.neqs.empty());
}

TEST(Simplify, ScalingSubstitution) {
  Env env;
  auto r = env.calc.simplify(make(c3(), {0, 4}, {"a^2*x^2 - t"}, {"x"}));
  ASSERT_FALSE(r.empty);
  ASSERT_EQ(r.set.eqs.size(), 1u);
  EXPECT_EQ(r.set.eqs[0], P("a^2 - t"));
  // a != 0 is forced by the equation and becomes explicit.
  std::vector<Poly> neqs = r.set.neqs;
  std::sort(neqs.begin(), neqs.end());
  std::vector<Poly> want{P("a"), P("x")};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(neqs, want);
}

TEST(Simplify, Idempotent) {
  Env env;
  for (auto x : {make(c3(), {0, 4}, {"a^2*x^2 - t"}, {"x"}),
                 make(Chart{}, {0, 1, 2, 3}, {}, {"a*d - b*c"}),
                 make(c3(), {0, 1}, {"a^2 - t", "b^2 - t", "a*b - t"}, {"a + b", "2*a"})}) {
    auto once = env.calc.simplify(x);
    auto twice = env.calc.simplify(once.set);
    ASSERT_FALSE(once.empty);
    EXPECT_EQ(memo_key(once.set), memo_key(twice.set));
  }
}

TEST(Simplify, EmptyDetection) {
  Env env;
  EXPECT_TRUE(env.calc.simplify(make(Chart{}, {0}, {"1"})).empty);
  EXPECT_TRUE(env.calc.simplify(make(Chart{}, {0}, {"a"}, {"a"})).empty);
  // a^2 = t and a = 0 force t = 0, excluded by the chart.
  EXPECT_TRUE(env.calc.simplify(make(c3(), {0}, {"a^2 - t", "a"})).empty);
}

TEST(Keys, RenamingInvariance) {
  auto k1 = canonical_key(make(c3(), {0}, {"a^2 - t"}));
  auto k2 = canonical_key(make(c3(), {1}, {"b^2 - t"}));
  EXPECT_EQ(k1, k2);
  EXPECT_NE(k1, canonical_key(make(c3(), {0}, {"a^3 - t"})));
  // Reordering of F and G, and swapping variable roles.
  auto k3 = canonical_key(make(c12(), {0, 1}, {"a^2 - t", "b^2 - s"}, {"a", "b"}));
  auto k4 = canonical_key(make(c12(), {0, 1}, {"b^2 - t", "a^2 - s"}, {"b", "a"}));
  EXPECT_EQ(k3, k4);
}

TEST(Keys, StableText) {
  EXPECT_EQ(canonical_key(make(c3(), {5}, {"y^2 - t"})), "chart=C3|base=t|domain=t,t - 1|vars=1|eq=v1^2 - t|neq=");
}

TEST(Keys, RoundTrip) {
  auto x = make(c12(), {0, 1}, {"a^2 - t", "b^2 - 1/2*s"}, {"a - b"});
  std::string k = memo_key(x);
  EXPECT_EQ(memo_key(set_from_key(k)), k);
}

TEST(ClassOf, MultiplicativeGroup) {
  Env env;
  auto c = env.calc.class_of(make(Chart{}, {0}, {}, {"a"}));
  EXPECT_EQ(pure(c, env.reg, Chart{}), Q("q - 1"));
  EXPECT_EQ(env.calc.print(c), "q - 1");
}

TEST(ClassOf, GeneralLinearGroup) {
  Env env;
  auto x = make(Chart{}, {0, 1, 2, 3}, {}, {"a*d - b*c"});
  auto c = env.calc.class_of(x);
  EXPECT_EQ(pure(c, env.reg, Chart{}), Q("q^4 - q^3 - q^2 + q"));
  for (std::uint64_t p : {2u, 3u, 5u}) EXPECT_EQ(count_points(x, p), (p * p - 1) * (p * p - p));
}

TEST(ClassOf, SquareRootSymbol) {
  Env env;
  SymbolId s = env.calc.register_generator("S@C3", make(c3(), {0}, {"a^2 - t"}));
  EXPECT_EQ(env.calc.class_of(make(c3(), {4}, {"x^2 - t"})), VirtualClass(s, 1));
  auto two = env.calc.class_of(make(c3(), {0, 1}, {"a^2 - t", "b^2 - t"}));
  EXPECT_EQ(two, VirtualClass(s, 2));
  EXPECT_EQ(env.calc.print(two), "2*S@C3");
  EXPECT_EQ(env.calc.fiber_product(VirtualClass(s, 1), VirtualClass(s, 1)), VirtualClass(s, 2));
}

TEST(ClassOf, ScaledSquareLandsOnSymbol) {
  Env env;
  SymbolId s = env.calc.register_generator("S@C3", make(c3(), {0}, {"a^2 - t"}));
  auto c = env.calc.class_of(make(c3(), {0, 4}, {"a^2*x^2 - t"}, {"x"}));
  EXPECT_EQ(c, VirtualClass(s, Q("q - 1")));
  EXPECT_EQ(env.calc.print(c), "(q - 1)*S@C3");
}

// Each reduction below ends on registered generators; point counts confirm it.
namespace {

void expect_counts_agree(const VirtualClass& c, const ConstructibleSet& x) {
  for (std::uint64_t p : {5u, 7u, 11u})
    EXPECT_EQ(count_class(c, p), Integer(static_cast<unsigned long>(count_points(x, p)))) << to_vset(x) << " p=" << p;
}

}  // namespace

TEST(ClassOf, ConstantRescaling) {
  Env env;
  SymbolId s = env.calc.register_generator("S@C3", make(c3(), {0}, {"a^2 - t"}));
  auto x = make(c3(), {4}, {"x^2 - 4*t"});
  EXPECT_EQ(env.calc.class_of(x), VirtualClass(s, 1));
  expect_counts_agree(VirtualClass(s, 1), x);
}

TEST(ClassOf, RescalingThroughAnotherFiberVariable) {
  Env env;
  SymbolId d = env.calc.register_generator("D12", make(c12(), {0, 1}, {"a^2 - t", "b^2 - s"}));
  auto x = make(c12(), {0, 1}, {"a^2 - t*s", "b^2 - t"});
  EXPECT_EQ(env.calc.class_of(x), VirtualClass(d, 1));
  auto y = make(c12(), {0, 1, 2}, {"a^2*t - b^2*s", "a^2*c^2 - s", "b^2*c^2 - t"});
  EXPECT_EQ(env.calc.class_of(y), VirtualClass(d, Q("q - 1")));
  expect_counts_agree(VirtualClass(d, Q("q - 1")), y);
}

TEST(ClassOf, ConeSplitsAtTheApex) {
  Env env;
  SymbolId s = env.calc.register_generator("S@C3", make(c3(), {0}, {"a^2 - t"}));
  auto x = make(c3(), {0, 1}, {"t*a^2 - b^2"});
  VirtualClass want = VirtualClass(env.reg.unit(c3()), Q("1")) + VirtualClass(s, Q("q - 1"));
  EXPECT_EQ(env.calc.class_of(x), want);
  expect_counts_agree(want, x);
}

TEST(ClassOf, SplitQuadricBecomesLinear) {
  Env env;
  auto x = make(c3(), {1, 2}, {"b^2 - c^2 + 2*c*t - 2*c"});
  EXPECT_EQ(pure(env.calc.class_of(x), env.reg, c3()), Q("q - 1"));
}

TEST(ClassOf, CompletingTheSquare) {
  Env env;
  SymbolId s = env.calc.register_generator("S@C3", make(c3(), {0}, {"a^2 - t"}));
  auto x = make(c3(), {1}, {"(t - 1)*b^2 - 2*t*b + t"});
  EXPECT_EQ(env.calc.class_of(x), VirtualClass(s, 1));
  // Over a square root of t the same quadric splits into two sections.
  auto y = make(c3(), {0, 1}, {"a^2 - t", "(t - 1)*b^2 - 2*t*b + t"});
  EXPECT_EQ(env.calc.class_of(y), VirtualClass(s, 2));
  expect_counts_agree(VirtualClass(s, 2), y);
}

// Both variables are forced nonzero; the scalings x1 -> x1*x2^(+-1) undo each
// other and must not cycle.
TEST(ClassOf, InverseScalingsTerminate) {
  Env env;
  auto x = make(Chart{}, {0, 1}, {"a^4 + 2*a^2*b^2 + b^4 - a*b^2 - b^2", "a^3*b + a^2*b - 1"});
  auto c = env.calc.class_of(x);
  for (std::uint64_t p : {29u, 31u, 37u})
    EXPECT_EQ(count_class(c, p), Integer(static_cast<unsigned long>(count_points(x, p)))) << "p=" << p;
}

// Unrelated blocks are simplified one at a time.
TEST(ClassOf, IndependentBlocks) {
  Env env;
  auto x = make(Chart{}, {0, 1, 2, 3, 4, 5},
                {"a*b^2 - a - 1", "a^2*c - b^2 - b*c", "d*x^2 + d + 1", "d^2 - y"}, {"y^2"});
  auto c = env.calc.class_of(x);
  for (std::uint64_t p : {29u, 31u})
    EXPECT_EQ(count_class(c, p), Integer(static_cast<unsigned long>(count_points(x, p)))) << "p=" << p;
}

TEST(ClassOf, ProductGenerator) {
  Env env;
  SymbolId d = env.calc.register_generator("D12", make(c12(), {0, 1}, {"a^2 - t", "b^2 - s"}));
  EXPECT_EQ(env.reg.label(d), "D12");
  EXPECT_EQ(env.calc.class_of(make(c12(), {4, 5}, {"y^2 - t", "x^2 - s"})), VirtualClass(d, 1));
}

TEST(ClassOf, UnitGenerators) {
  Env env;
  Chart point;
  point.label = "C1";
  SymbolId t1 = env.calc.register_generator("T1", make(point, {}, {}));
  EXPECT_EQ(t1, env.reg.unit(point));
  EXPECT_THROW(env.calc.register_generator("bad", make(Chart{}, {0}, {"a^2 - 1"})), NotPrime);
}

TEST(ClassOf, FiberProductIdentities) {
  Env env;
  SymbolId s = env.calc.register_generator("S@C3", make(c3(), {0}, {"a^2 - t"}));
  SymbolId u = env.reg.unit(c3());
  VirtualClass qs(s, Q("q"));
  EXPECT_EQ(env.calc.fiber_product(VirtualClass(u, 1), qs), qs);
  EXPECT_EQ(env.calc.fiber_product(VirtualClass(u, Q("q")), VirtualClass(u, Q("q"))), VirtualClass(u, Q("q^2")));
}

TEST(ClassOf, Errors) {
  Env env;
  EXPECT_THROW(env.calc.class_of(make(c3(), {}, {"t - 2"})), BaseRestrictedClass);
  CalcOptions o;
  o.max_depth = 1;
  Calculator shallow(env.reg, env.cache, o);
  EXPECT_THROW(shallow.class_of(make(Chart{}, {0, 1, 2, 3}, {}, {"a*d - b*c"})), NonTerminating);
}

TEST(CountPoints, Examples) {
  EXPECT_EQ(count_points(make(Chart{}, {0, 1}, {}, {"a"}), 3), 6u);
  auto inv = make(Chart{}, {0, 1}, {"a^2 - 1", "a*b + b"}, {"a"});
  EXPECT_EQ(count_points(inv, 3), 4u);
  Env env;
  EXPECT_EQ(pure(env.calc.class_of(inv), env.reg, Chart{}), Q("q + 1"));
  EXPECT_EQ(count_points(make(Chart{}, {0}, {"1"}), 5), 0u);
  // Unlinked variables are counted one at a time; a linked block of nine is refused.
  EXPECT_EQ(count_points(make(Chart{}, {0, 1, 2, 3, 4, 5, 6, 7, 8}, {}), 11), 2357947691u);
  EXPECT_EQ(count_points(make(Chart{}, {0, 1, 2, 3, 5}, {"a*b - c*d"}, {"a", "y"}), 5), 400u);
  EXPECT_THROW(count_points(make(Chart{}, {0, 1, 2, 3, 4, 5, 6, 7, 8}, {"a + b + c + d + x + y + z + e + q"}), 11),
               TooLarge);
}

TEST(CountPoints, SymbolicClasses) {
  Env env;
  env.calc.register_generator("S@C3", make(c3(), {0}, {"a^2 - t"}));
  auto x = make(c3(), {0, 1, 4}, {"a^2*x^2 - t", "b^2 - t"}, {"x"});
  auto c = env.calc.class_of(x);
  for (std::uint64_t p : {3u, 5u, 7u}) EXPECT_EQ(count_class(c, p), Integer(static_cast<unsigned long>(count_points(x, p))));
}

TEST(Vset, ParseAndPrint) {
  auto x = parse_vset(
      "# double cover\nchart: C3\nbase: t\ndomain: t, t-1\nvars: a, b\neq: a^2 - t; b^2 - t\nneq: a\n");
  EXPECT_EQ(x.chart.label, "C3");
  EXPECT_EQ(x.fiber.size(), 2u);
  EXPECT_EQ(x.eqs.size(), 2u);
  EXPECT_EQ(x.var_name(1), "b");
  auto y = parse_vset(to_vset(x));
  EXPECT_EQ(memo_key(x), memo_key(y));
  EXPECT_THROW(parse_vset("vars: a\neq: a - z\n"), ParseError);
  EXPECT_THROW(parse_vset("vars: a\nfoo: a\n"), ParseError);
  EXPECT_THROW(parse_vset("base: t\nvars: a\ndomain: a\n"), ParseError);
  EXPECT_THROW(parse_vset("vars: a, a\n"), ParseError);
}

// ---- properties on random sets ----

namespace {

Poly random_poly(std::mt19937& rng, int nvars) {
  std::uniform_int_distribution<int> coeff(-2, 2), exp(0, 2), nterms(1, 3), var(0, nvars - 1);
  std::vector<Term> terms;
  int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    std::vector<Monomial::Factor> f;
    std::set<VarId> seen;
    for (int k = 0; k < 2; ++k) {
      VarId v = static_cast<VarId>(var(rng));
      int e = exp(rng);
      if (e > 0 && seen.insert(v).second) f.emplace_back(v, e);
    }
    std::sort(f.begin(), f.end());
    // Unit coefficients keep every prime of good reduction for the oracle.
    terms.push_back({Monomial::from_factors(f), Rational(coeff(rng) < 0 ? -1 : 1)});
  }
  return Poly::from_terms(std::move(terms));
}

ConstructibleSet random_set(std::mt19937& rng) {
  ConstructibleSet x;
  x.fiber = {0, 1, 2};
  std::uniform_int_distribution<int> ne(0, 2), ng(0, 2);
  int a = ne(rng), b = ng(rng);
  for (int i = 0; i < a; ++i) x.eqs.push_back(random_poly(rng, 3));
  for (int i = 0; i < b; ++i) x.neqs.push_back(random_poly(rng, 3));
  return x;
}

std::vector<ConstructibleSet> corpus(unsigned n, unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<ConstructibleSet> out;
  for (unsigned i = 0; i < n; ++i) out.push_back(random_set(rng));
  return out;
}

void expect_same_class(const VirtualClass& a, const VirtualClass& b, SymbolRegistry& reg, const std::string& what) {
  if (!has_symbols(a, reg) && !has_symbols(b, reg)) {
    EXPECT_EQ(a, b) << what;
    return;
  }
  for (std::uint64_t p : {5u, 7u, 11u}) {
    try {
      EXPECT_EQ(count_class(a, p), count_class(b, p)) << what << " p=" << p;
    } catch (const KvarError&) {
      // p divides a denominator of some symbol's equations.
    }
  }
}

}  // namespace

TEST(Properties, OracleSpecialization) {
  Env env;
  int pure_count = 0;
  for (const auto& x : corpus(60, 11)) {
    auto c = env.calc.class_of(x);
    auto poly = pure(c, env.reg, Chart{});
    if (poly) {
      ++pure_count;
      // p = 2 is skipped: x^2 - y^2 becomes a square there, so random sets
      // often have bad reduction at 2.
      for (std::uint64_t p : {3u, 5u, 7u})
        EXPECT_EQ(Rational(static_cast<unsigned long>(count_points(x, p))), poly->evaluate(Rational(static_cast<unsigned long>(p))))
            << to_vset(x) << " p=" << p;
    } else {
      for (std::uint64_t p : {5u, 7u, 11u}) {
        try {
          EXPECT_EQ(count_class(c, p), Integer(static_cast<unsigned long>(count_points(x, p)))) << to_vset(x);
        } catch (const KvarError&) {
        }
      }
    }
  }
  EXPECT_GT(pure_count, 30);
}

TEST(Properties, ScissorRelation) {
  Env env;
  std::mt19937 rng(5);
  for (const auto& x : corpus(40, 23)) {
    Poly h = random_poly(rng, 3);
    ConstructibleSet x1 = x, x2 = x;
    x1.eqs.push_back(h);
    x2.neqs.push_back(h);
    auto whole = env.calc.class_of(x);
    auto parts = env.calc.class_of(x1) + env.calc.class_of(x2);
    expect_same_class(whole, parts, env.reg, to_vset(x) + " h=" + h.str());
  }
}

TEST(Properties, StrategyIndependenceAndCacheSoundness) {
  SymbolRegistry reg;
  MemoCache c1, c2, c3;
  Calculator primary(reg, c1);
  CalcOptions alt;
  alt.strategy = Strategy::kLargest;
  Calculator alternate(reg, c2, alt);
  CalcOptions nocache;
  nocache.use_cache = false;
  Calculator uncached(reg, c3, nocache);
  for (const auto& x : corpus(40, 37)) {
    auto a = primary.class_of(x);
    expect_same_class(a, alternate.class_of(x), reg, to_vset(x));
    EXPECT_EQ(a, uncached.class_of(x)) << to_vset(x);
  }
  // Recomputing every cached entry without the cache gives the stored value.
  EXPECT_EQ(c3.size(), 0u);
}

TEST(Properties, ComponentProduct) {
  Env env;
  std::mt19937 rng(9);
  auto xs = corpus(15, 41);
  for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
    const auto& x = xs[i];
    ConstructibleSet y = xs[i + 1];
    auto shift = [](VarId v) { return v + 3; };
    ConstructibleSet prod = x;
    for (VarId v : y.fiber) prod.fiber.push_back(shift(v));
    for (const auto& e : y.eqs) prod.eqs.push_back(e.rename(shift));
    for (const auto& g : y.neqs) prod.neqs.push_back(g.rename(shift));
    auto lhs = env.calc.class_of(prod);
    auto rhs = env.calc.fiber_product(env.calc.class_of(x), env.calc.class_of(y));
    expect_same_class(lhs, rhs, env.reg, to_vset(prod));
  }
}

TEST(Properties, ConcurrentSharedCache) {
  auto xs = corpus(24, 53);
  SymbolRegistry reg;
  MemoCache serial_cache, shared;
  Calculator serial(reg, serial_cache);
  std::vector<VirtualClass> expected;
  for (const auto& x : xs) expected.push_back(serial.class_of(x));
  std::vector<VirtualClass> got(xs.size());
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < 4; ++w)
    workers.emplace_back([&, w] {
      Calculator calc(reg, shared);
      for (std::size_t i = w; i < xs.size(); i += 4) got[i] = calc.class_of(xs[i]);
    });
  for (auto& t : workers) t.join();
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(got[i], expected[i]) << to_vset(xs[i]);
}
