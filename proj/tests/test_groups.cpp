#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "kvar/groups.hpp"
#include "kvar/parse.hpp"
#include "test_util.hpp"

using namespace kvar;
using kvar::testing::P;

namespace {

struct Env {
  SymbolRegistry reg;
  MemoCache cache;
  Calculator calc{reg, cache};
};

QPoly Q(std::string_view s) { return parse_qpoly(s); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Replaces the first occurrence of `from` inside the builtin text.
std::string patched(std::string_view group, const std::string& from, const std::string& to) {
  std::string text = builtin_strat_text(group);
  auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

const CheckResult& check(const StratReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("no check " + name);
}

}  // namespace

TEST(Frac, ArithmeticReduces) {
  Frac t(P("t")), one(1);
  Frac a = t / (t - one) + one / (one - t);
  EXPECT_EQ(a, Frac(1));
  EXPECT_EQ(a.den(), Poly(1));
  Frac b = Frac(P("t^2 - 1"), P("2*t - 2"));
  EXPECT_EQ(b.num(), P("1/2*t + 1/2"));
  EXPECT_EQ(b.den(), Poly(1));
  EXPECT_EQ((t / (t + one)).pow(2), Frac(P("t^2"), P("t^2 + 2*t + 1")));
  EXPECT_THROW(Frac(P("t"), Poly(0)), std::domain_error);
}

TEST(Frac, MatrixInverseAndDeterminant) {
  Frac a(P("a")), b(P("b")), c(P("c")), t(P("t"));
  FracMatrix m{{a, b, c}, {Frac(0), t, Frac(1)}, {Frac(0), Frac(0), Frac(1)}};
  EXPECT_EQ(determinant(m), a * t);
  EXPECT_EQ(m * inverse(m), identity_matrix(3));
  EXPECT_EQ(inverse(m) * m, identity_matrix(3));
  FracMatrix sing{{a, b}, {a, b}};
  EXPECT_THROW(inverse(sing), std::domain_error);
}

TEST(Strat, BuiltinShapes) {
  Stratification u2 = builtin_stratification("u2t");
  EXPECT_EQ(u2.basis_labels(), (std::vector<std::string>{"T1", "T2", "S"}));
  EXPECT_EQ(u2.strata[2].generators[0].label(), "S@C3");
  Stratification u3 = builtin_stratification("u3t");
  EXPECT_EQ(u3.basis_labels(), (std::vector<std::string>{"T1", "T2", "T3", "T4", "T5", "S6", "S7", "S8", "S9",
                                                          "S10", "S11", "D12"}));
  EXPECT_EQ(u3.group.size(), 3u);
  EXPECT_EQ(u3.strata[11].chart.base_names, (std::vector<std::string>{"t", "s"}));
  Stratification gm = builtin_stratification("gm");
  EXPECT_EQ(gm.basis_size(), 2u);
  EXPECT_THROW(builtin_stratification("sl2"), StratError);
}

TEST(Strat, EmbeddedTextMatchesDataFiles) {
  for (const char* g : {"u2t", "u3t", "gm"})
    EXPECT_EQ(builtin_strat_text(g), slurp(std::string(KVAR_DATA_DIR) + "/strat/" + g + ".strat")) << g;
}

TEST(Strat, ParseErrors) {
  EXPECT_THROW(parse_strat("stratum 1\nchart: C1\n"), ParseError);
  EXPECT_THROW(parse_strat(patched("u2t", "eq: a - 1, b", "eq: a - 1, z")), ParseError);
  EXPECT_THROW(parse_strat(patched("u2t", "proj: t = a", "")), ParseError);
  EXPECT_THROW(parse_strat(patched("u2t", "sigma: t, 0; 0, 1", "sigma: t, 0, 0; 0, 1")), ParseError);
  EXPECT_THROW(parse_strat(patched("u2t", "chart: C2", "colour: C2")), ParseError);
  EXPECT_THROW(parse_strat(patched("u2t", "generator T1\n", "")), ParseError);
}

TEST(Strat, U2tClasses) {
  Env env;
  Stratification s = builtin_stratification("u2t");
  EXPECT_EQ(group_class(s, env.calc), Q("q^2 - q"));
  EXPECT_EQ(stratum_class(s, 0, env.calc), Q("1"));
  EXPECT_EQ(stratum_class(s, 1, env.calc), Q("q - 1"));
  EXPECT_EQ(stratum_class(s, 2, env.calc), Q("q*(q - 2)"));
  EXPECT_EQ(fiber_class(s, 0, env.calc), Q("1"));
  EXPECT_EQ(fiber_class(s, 1, env.calc), Q("q - 1"));
  EXPECT_EQ(fiber_class(s, 2, env.calc), Q("q"));
}

TEST(Strat, U3tFiberClasses) {
  Env env;
  Stratification s = builtin_stratification("u3t");
  EXPECT_EQ(group_class(s, env.calc), Q("q^3*(q - 1)^2"));
  std::vector<std::string> want{"1",   "q*(q - 1)^2", "q*(q - 1)", "q*(q - 1)", "q - 1",   "q^2",
                                "q^2*(q - 1)", "q^2", "q^2*(q - 1)", "q^2", "q^2*(q - 1)", "q^3"};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(fiber_class(s, i, env.calc), Q(want[i])) << i;
}

TEST(Strat, StratumCountsSumToGroupOrder) {
  for (const char* g : {"u2t", "u3t", "gm"}) {
    Stratification s = builtin_stratification(g);
    for (std::uint64_t p : {3u, 5u}) {
      ConstructibleSet all = stratum_set(s, 0);
      all.eqs.clear();
      all.neqs.clear();
      for (std::size_t k : s.group.nonzero_indices()) all.neqs.push_back(Poly::var(static_cast<VarId>(k)));
      std::uint64_t total = 0;
      for (std::size_t i = 0; i < s.strata.size(); ++i) total += count_points(stratum_set(s, i), p);
      EXPECT_EQ(total, count_points(all, p)) << g << " p=" << p;
    }
  }
}

TEST(Verify, BuiltinsPass) {
  for (const char* g : {"gm", "u2t", "u3t"}) {
    Env env;
    StratReport r = verify_stratification(builtin_stratification(g), env.calc);
    ASSERT_EQ(r.checks.size(), 5u);
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << g << " " << c.name << ": " << c.witness;
  }
}

TEST(Verify, WrongConjugatorIsCaught) {
  Env env;
  Stratification s = parse_strat(patched("u2t", "conj: b, 0; 0, 1", "conj: 1, 0; 0, 1"));
  StratReport r = verify_stratification(s, env.calc);
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(check(r, "conjugator").passed);
  EXPECT_TRUE(check(r, "section").passed);
  EXPECT_NE(check(r, "conjugator").witness.find("stratum 2"), std::string::npos);
}

TEST(Verify, DegenerateConjugatorIsCaught) {
  Env env;
  Stratification s = parse_strat(patched("u2t", "conj: b, 0; 0, 1", "conj: b - 1, 0; 0, 1"));
  EXPECT_FALSE(check(verify_stratification(s, env.calc), "conjugator").passed);
}

TEST(Verify, OverlapAndGapAreCaught) {
  Env env;
  Stratification overlap = parse_strat(patched("u2t", "eq: a - 1\nneq: b", "eq: a - 1"));
  StratReport r = verify_stratification(overlap, env.calc);
  EXPECT_FALSE(check(r, "disjoint").passed);
  EXPECT_FALSE(check(r, "covering").passed);

  Stratification gap = parse_strat(patched("u2t", "neq: a - 1\n", "neq: a - 1, a + 1\n"));
  StratReport r2 = verify_stratification(gap, env.calc);
  EXPECT_TRUE(check(r2, "disjoint").passed);
  EXPECT_FALSE(check(r2, "covering").passed);
}

TEST(Verify, BadSectionIsCaught) {
  Env env;
  Stratification s = parse_strat(patched("u2t", "sigma: t, 0; 0, 1", "sigma: t^2, 0; 0, 1"));
  StratReport r = verify_stratification(s, env.calc);
  EXPECT_FALSE(check(r, "section").passed);
  Stratification s2 = parse_strat(patched("u2t", "sigma: 1, 1; 0, 1", "sigma: 1, 0; 0, 1"));
  EXPECT_FALSE(check(verify_stratification(s2, env.calc), "section").passed);
}

TEST(Verify, EmptyFiberIsCaught) {
  Env env;
  // Stratum 3 shrunk to a = -1 has an empty fiber over t = 2.
  Stratification s = parse_strat(patched("u2t", "neq: a - 1\n", "eq: a + 1\nneq: a - 1\n"));
  EXPECT_FALSE(check(verify_stratification(s, env.calc), "eta").passed);
}
