#include <gtest/gtest.h>

#include "kvar/parse.hpp"
#include "kvar/tqft.hpp"

using namespace kvar;

namespace {

QPoly Q(std::string_view s) { return parse_qpoly(s); }
RatFunc R(std::string_view s) { return parse_ratfunc(s); }

struct Env {
  SymbolRegistry reg;
  MemoCache cache;
  TqftContext ctx;
  explicit Env(std::string_view group, TqftOptions opt = {})
      : ctx(builtin_stratification(group), reg, cache, opt) {}
};

const std::vector<std::string> kU2tRepClasses{
    "q + 1",
    "3*q*(q - 1)",
    "q^2*(q - 1)*(2*q - 1)",
    "q^3*(q - 1)*(2*q^2 - 4*q + 3)",
    "q^4*(q - 1)*(2*q^3 - 6*q^2 + 6*q - 1)",
    "q^5*(q - 1)*(2*q^4 - 8*q^3 + 12*q^2 - 8*q + 3)",
    "q^6*(q - 1)*(2*q^5 - 10*q^4 + 20*q^3 - 20*q^2 + 10*q - 1)",
    "q^7*(q - 1)*(2*q^6 - 12*q^5 + 30*q^4 - 40*q^3 + 30*q^2 - 12*q + 3)",
    "q^8*(q - 1)*(2*q^7 - 14*q^6 + 42*q^5 - 70*q^4 + 70*q^3 - 42*q^2 + 14*q - 1)",
    "q^9*(q - 1)*(2*q^8 - 16*q^7 + 56*q^6 - 112*q^5 + 140*q^4 - 112*q^3 + 56*q^2 - 16*q + 3)",
};

void expect_matrix(const TqftMatrix& got, const TqftMatrix& want) {
  EXPECT_EQ(got.labels, want.labels);
  EXPECT_EQ(got.g_factor, want.g_factor);
  auto diffs = compare_matrices(got, want);
  for (const auto& d : diffs) ADD_FAILURE() << d;
}

}  // namespace

TEST(RMatrixOps, PowerRankTranspose) {
  RMatrix m{{R("q"), R("1")}, {R("0"), R("1/q")}};
  EXPECT_EQ(power(m, 0), identity_rmatrix(2));
  EXPECT_EQ(power(m, 3), multiply(m, multiply(m, m)));
  EXPECT_EQ(rank(m), 2u);
  RMatrix singular{{R("q"), R("q^2")}, {R("1/q"), R("1")}};
  EXPECT_EQ(rank(singular), 1u);
  EXPECT_EQ(rank(RMatrix{{R("0"), R("0")}, {R("0"), R("0")}}), 0u);
  EXPECT_EQ(transpose(m)[0][1], R("0"));
  EXPECT_EQ(column(m, 1), (std::vector<RatFunc>{R("1"), R("1/q")}));
  EXPECT_THROW(multiply(m, RMatrix{{R("1")}}), std::invalid_argument);
}

TEST(ClosedForm, KnownValues) {
  EXPECT_EQ(closed_form("u2t", 1), Q("q + 1"));
  EXPECT_EQ(closed_form("u2t", 3), Q("q^2*(q - 1)*(2*q - 1)"));
  EXPECT_EQ(closed_form("u3t", 1), Q("3*q^2 + 1"));
  EXPECT_EQ(closed_form("u3t", 2), Q("11*q^3*(q - 1)^2"));
  EXPECT_EQ(closed_form("gm", 1), Q("2"));
  EXPECT_EQ(closed_form("gm", 2), Q("2*(q - 1)"));
  for (unsigned r = 1; r <= 10; ++r) {
    EXPECT_EQ(closed_form("u2", r), closed_form("u2t", r) * closed_form("gm", r)) << r;
    EXPECT_EQ(closed_form("u3", r), closed_form("u3t", r) * closed_form("gm", r)) << r;
  }
  EXPECT_THROW(closed_form("sl2", 1), std::invalid_argument);
  EXPECT_THROW(closed_form("u2t", 0), std::invalid_argument);
}

TEST(Oracle, RepCountsSmall) {
  Stratification u2 = builtin_stratification("u2t");
  EXPECT_EQ(oracle_rep_count(u2.group, 2, 3), 18u);
  EXPECT_EQ(oracle_rep_count(builtin_stratification("gm").group, 1, 5), 2u);
  for (std::uint64_t p : {3u, 5u})
    for (unsigned r = 1; r <= 3; ++r)
      EXPECT_EQ(Rational(oracle_rep_count(u2.group, r, p)), closed_form("u2t", r).evaluate(Rational(p)))
          << "p=" << p << " r=" << r;
  Stratification u3 = builtin_stratification("u3t");
  for (unsigned r = 1; r <= 2; ++r)
    EXPECT_EQ(Rational(oracle_rep_count(u3.group, r, 3)), closed_form("u3t", r).evaluate(Rational(3)));
}

// Squaring is injective in characteristic 2, so A^2 = 1 has fewer solutions
// than q + 1 predicts: the classes do not specialize at p = 2.
TEST(Oracle, CharacteristicTwoDiffers) {
  Stratification u2 = builtin_stratification("u2t");
  EXPECT_EQ(oracle_rep_count(u2.group, 1, 2), 2u);
  EXPECT_EQ(closed_form("u2t", 1).evaluate(Rational(2)), Rational(3));
}

TEST(Tqft, EntrySetExamples) {
  Env env("u2t");
  Calculator calc = env.ctx.calculator();
  ConstructibleSet x = env.ctx.build_entry_set(Bordism::kN, 0, 0);
  EXPECT_TRUE(x.chart.is_point());
  EXPECT_EQ(calc.class_of(x), VirtualClass(env.ctx.generator_ids()[0], Q("q + 1")));
  auto t2_to_s = env.ctx.decompose(env.ctx.entry_class(Bordism::kN, 1, 2, calc), 1, 2);
  EXPECT_EQ(t2_to_s, (std::vector<QPoly>{Q("q*(q - 1)")}));
  auto s_to_t1 = env.ctx.decompose(env.ctx.entry_class(Bordism::kN, 2, 0, calc), 2, 0);
  EXPECT_EQ(s_to_t1, (std::vector<QPoly>{Q("2*q*(q - 3)")}));
}

TEST(Tqft, U2tMatricesMatchFixture) {
  Env env("u2t");
  Fixture fx = builtin_fixture("u2t");
  TqftMatrix zpi = env.ctx.compute_Zpi(Bordism::kN);
  expect_matrix(zpi, fx.matrices.at("Zpi_N"));
  TqftMatrix eta = env.ctx.compute_eta();
  expect_matrix(eta, fx.matrices.at("eta"));
  TqftMatrix zn = reduce(zpi, eta);
  expect_matrix(zn, fx.matrices.at("Zred_N"));
  TqftMatrix zl = reduce(env.ctx.compute_Zpi(Bordism::kL), eta);
  expect_matrix(zl, fx.matrices.at("Zred_L"));

  EXPECT_EQ(multiply(zn.m, zl.m), multiply(zl.m, zn.m));
  EXPECT_EQ(multiply(zn.m, zl.m), power(zn.m, 3));
  EXPECT_EQ(rank(zn.m), 2u);
  EXPECT_TRUE(verify_diagonalization(zn.m, fx.matrices.at("P").m, fx.matrices.at("D").m, zn.labels).passed);

  TqftMatrix id{zn.labels, identity_rmatrix(3), false};
  expect_matrix(reduce(zn, id), zn);
}

TEST(Tqft, DiagonalizationDetectsPerturbation) {
  Fixture fx = builtin_fixture("u2t");
  RMatrix d = fx.matrices.at("D").m;
  d[1][1] += RatFunc(1);
  DiagReport r = verify_diagonalization(fx.matrices.at("Zred_N").m, fx.matrices.at("P").m, d, fx.labels);
  EXPECT_FALSE(r.passed);
  ASSERT_FALSE(r.mismatches.empty());
  EXPECT_NE(r.mismatches[0].find("T"), std::string::npos);
}

TEST(Tqft, U2tRepClasses) {
  Env env("u2t");
  TqftMatrix zn = reduce(env.ctx.compute_Zpi(Bordism::kN), env.ctx.compute_eta());
  for (unsigned r = 1; r <= 10; ++r) {
    QPoly got = rep_variety_class(zn, r);
    EXPECT_EQ(got, Q(kU2tRepClasses[r - 1])) << r;
    EXPECT_EQ(got, closed_form("u2t", r)) << r;
  }
}

TEST(Tqft, GmRepClasses) {
  Env env("gm");
  TqftMatrix eta = env.ctx.compute_eta();
  EXPECT_EQ(eta.m, identity_rmatrix(2));
  TqftMatrix zn = reduce(env.ctx.compute_Zpi(Bordism::kN), eta);
  for (unsigned r = 1; r <= 10; ++r) EXPECT_EQ(rep_variety_class(zn, r), closed_form("gm", r)) << r;
}

TEST(Tqft, SpanRelationU2t) {
  Env env("u2t");
  TqftMatrix zpi = env.ctx.compute_Zpi(Bordism::kN);
  // Factor: class of {x : x^2 != 0, 1}.
  ConstructibleSet xs;
  xs.fiber = {0};
  xs.neqs = {Poly::var(0), Poly::var(0, 2) - Poly(1)};
  Calculator calc = env.ctx.calculator();
  auto factor = calc.class_of(xs).multiple_of(calc.registry().unit(xs.chart));
  ASSERT_TRUE(factor);
  EXPECT_EQ(*factor, Q("q - 3"));
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(zpi.m[i][2], RatFunc(*factor) * (zpi.m[i][0] + zpi.m[i][1])) << i;
}

TEST(Tqft, FiberSplitMatchesDirect) {
  for (const char* g : {"u2t", "gm"}) {
    Env direct(g);
    TqftOptions opt;
    opt.fiber_split = true;
    Env split(g, opt);
    EXPECT_EQ(split.ctx.compute_Zpi(Bordism::kN).m, direct.ctx.compute_Zpi(Bordism::kN).m) << g;
  }
}

TEST(Tqft, WorkerCountDoesNotChangeResult) {
  TqftOptions one, four;
  one.workers = 1;
  four.workers = 4;
  Env a("u2t", one), b("u2t", four);
  EXPECT_EQ(a.ctx.compute_Zpi(Bordism::kL).m, b.ctx.compute_Zpi(Bordism::kL).m);
}

TEST(Tqft, EntryCountsMatchClassesOverFiniteFields) {
  Env env("u2t");
  Calculator calc = env.ctx.calculator();
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) {
      ConstructibleSet x = env.ctx.build_entry_set(Bordism::kN, j, i);
      VirtualClass c = calc.class_of(x);
      for (std::uint64_t p : {3u, 5u})
        EXPECT_EQ(Integer(count_points(x, p)), count_class(c, p)) << j << "->" << i << " p=" << p;
    }
}

TEST(Tqft, BasisClosureErrorOnForeignGenerator) {
  std::string text = builtin_strat_text("gm");
  auto pos = text.find("eq: x^2 - t");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 11, "eq: x^3 - t");
  SymbolRegistry reg;
  MemoCache cache;
  TqftContext ctx(parse_strat(text), reg, cache);
  EXPECT_THROW(ctx.compute_Zpi(Bordism::kN), BasisClosureError);
}

TEST(Tqft, NonPolynomialRepClass) {
  TqftMatrix m{{"T1"}, {{R("1/q")}}, true};
  EXPECT_THROW(rep_variety_class(m, 1), NonPolynomialResult);
}

TEST(Tqft, FixtureLoader) {
  Fixture u3 = builtin_fixture("u3t");
  EXPECT_EQ(u3.labels.size(), 12u);
  EXPECT_EQ(u3.matrices.at("Zred_N").at("T1", "T1"), R("3*q^2 + 1"));
  EXPECT_TRUE(verify_diagonalization(u3.matrices.at("Zred_N").m, u3.matrices.at("P").m, u3.matrices.at("D").m,
                                     u3.labels)
                  .passed);
  EXPECT_EQ(rank(u3.matrices.at("Zred_N").m), 5u);
  EXPECT_THROW(load_fixture("/nonexistent.json"), std::runtime_error);
}

TEST(Tqft, U3tReducedMatrixAndRepClasses) {
  TqftOptions opt;
  opt.fiber_split = true;
  Env env("u3t", opt);
  Fixture fx = builtin_fixture("u3t");
  TqftMatrix zn = reduce(env.ctx.compute_Zpi(Bordism::kN), env.ctx.compute_eta());
  expect_matrix(zn, fx.matrices.at("Zred_N"));
  EXPECT_TRUE(verify_diagonalization(zn.m, fx.matrices.at("P").m, fx.matrices.at("D").m, zn.labels).passed);
  EXPECT_EQ(rank(zn.m), 5u);

  // Columns S6..D12 lie in the span of T1..T5.
  RMatrix first(zn.size());
  for (std::size_t i = 0; i < zn.size(); ++i) first[i].assign(zn.m[i].begin(), zn.m[i].begin() + 5);
  EXPECT_EQ(rank(first), 5u);

  const std::vector<std::string> expected{
      "3*q^2 + 1",
      "11*q^3*(q - 1)^2",
      "q^5*(q - 1)^2*(4*q^3 - 4*q^2 + 3*q - 2)",
      "q^7*(q - 1)^2*(4*q^6 - 16*q^5 + 28*q^4 - 24*q^3 + 11*q^2 - 4*q + 2)",
      "q^9*(q - 1)^2*(4*q^9 - 24*q^8 + 60*q^7 - 76*q^6 + 48*q^5 - 12*q^4 + 3*q^3 - 6*q^2 + 6*q - 2)",
  };
  for (unsigned r = 1; r <= 5; ++r) {
    QPoly got = rep_variety_class(zn, r);
    EXPECT_EQ(got, Q(expected[r - 1])) << r;
    EXPECT_EQ(got, closed_form("u3t", r)) << r;
  }
}
