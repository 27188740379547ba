#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "kvar/algebra.hpp"
#include "kvar/parse.hpp"
#include "test_util.hpp"

using namespace kvar;
using kvar::testing::P;
using kvar::testing::names;

namespace {

// Independent Groebner criterion: every S-polynomial of the basis reduces to zero.
bool all_spolys_reduce(const std::vector<Poly>& basis) {
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      Monomial l = Monomial::lcm(basis[i].lead_mono(), basis[j].lead_mono());
      Poly s = basis[i].times(l / basis[i].lead_mono(), 1 / basis[i].lead_coeff()) -
               basis[j].times(l / basis[j].lead_mono(), 1 / basis[j].lead_coeff());
      if (!remainder(s, basis).is_zero()) return false;
    }
  return true;
}

bool same_ideal(const std::vector<Poly>& a, const std::vector<Poly>& b) {
  auto ga = reduced_groebner(a);
  auto gb = reduced_groebner(b);
  for (const auto& f : a)
    if (!remainder(f, gb).is_zero()) return false;
  for (const auto& f : b)
    if (!remainder(f, ga).is_zero()) return false;
  return true;
}

Poly random_poly(std::mt19937& rng, const std::vector<VarId>& vars, int max_deg, int max_terms) {
  std::uniform_int_distribution<int> nterms(1, max_terms), coef(-3, 3), deg(0, max_deg);
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  std::vector<Term> terms;
  int n = nterms(rng);
  for (int k = 0; k < n; ++k) {
    std::vector<Monomial::Factor> fs;
    int d = deg(rng);
    for (int e = 0; e < d; ++e) fs.emplace_back(vars[pick(rng)], 1);
    int c = coef(rng);
    if (c == 0) c = 1;
    terms.push_back({Monomial::from_factors(fs), Rational(c)});
  }
  return Poly::from_terms(std::move(terms));
}

}  // namespace

TEST(Poly, CanonicalPrinting) {
  EXPECT_EQ(P("2*q^2 - 3*q + 1").str(names), "2*q^2 - 3*q + 1");
  EXPECT_EQ(P("-a + 1").str(names), "-a + 1");
  EXPECT_EQ(P("(a+1)*(a-1)").str(names), "a^2 - 1");
  EXPECT_EQ(P("3/2*a").str(names), "3/2*a");
  EXPECT_EQ(P("0").str(names), "0");
}

TEST(Poly, DegrevlexOrder) {
  // Degree first, then the smaller exponent on the last variable wins.
  EXPECT_EQ(P("b^2 + a*c + a*b").str(names), "a*b + b^2 + a*c");
  // Base variables sort after fiber variables.
  EXPECT_EQ(P("t + a").str(names), "a + t");
}

TEST(Poly, RingOps) {
  EXPECT_EQ(P("(a+1)*(a-1)"), P("a^2 - 1"));
  EXPECT_EQ(gcd(P("a^2 - 1"), P("a^2 - 2*a + 1")), P("a - 1"));
  EXPECT_EQ(P("a^2*x^2 - t").derivative(names_id("a")), P("2*a*x^2"));
  EXPECT_EQ(*divide_exact(P("a^2 - 1"), P("a + 1")), P("a - 1"));
  EXPECT_FALSE(divide_exact(P("a^2 + 1"), P("a + 1")).has_value());
}

TEST(Poly, GcdMultivariate) {
  Poly g = gcd(P("(a*b + c)*(a - b)^2"), P("(a*b + c)*(a + b)"));
  EXPECT_EQ(g, P("a*b + c"));
  EXPECT_EQ(gcd(P("6*a^2*b"), P("4*a*b^3")), P("a*b"));
  EXPECT_EQ(gcd(P("-2*a + 2"), P("a^2 - 1")), P("a - 1"));
}

TEST(Groebner, Examples) {
  auto g1 = reduced_groebner(std::vector<Poly>{P("a^2 - t"), P("b^2 - t")});
  EXPECT_TRUE(all_spolys_reduce(g1));
  EXPECT_TRUE(same_ideal(g1, {P("a^2 - t"), P("b^2 - t")}));
  EXPECT_EQ(g1, (std::vector<Poly>{P("a^2 - t"), P("b^2 - t")}));

  auto g2 = reduced_groebner(std::vector<Poly>{P("a - 1"), P("a^2 - t")});
  EXPECT_TRUE(same_ideal(g2, {P("a - 1"), P("t - 1")}));
  EXPECT_EQ(g2, (std::vector<Poly>{P("a - 1"), P("t - 1")}));

  EXPECT_TRUE(reduced_groebner(std::vector<Poly>{}).empty());
  EXPECT_EQ(reduced_groebner(std::vector<Poly>{P("2")}), std::vector<Poly>{P("1")});
}

TEST(Groebner, NormalForm) {
  std::vector<Poly> gb{P("a^2 - t")};
  EXPECT_EQ(normal_form(P("a^2"), gb), P("t"));
  EXPECT_EQ(normal_form(P("a^2 - t"), gb), Poly{});
  EXPECT_EQ(normal_form(P("a*b + 1"), std::vector<Poly>{}), P("a*b + 1"));
}

TEST(Groebner, RandomIdealsProperty) {
  std::mt19937 rng(12345);
  std::vector<VarId> vars{names_id("a"), names_id("b"), names_id("c"), names_id("t")};
  for (int iter = 0; iter < 60; ++iter) {
    std::vector<Poly> F;
    int n = 1 + iter % 3;
    for (int k = 0; k < n; ++k) F.push_back(random_poly(rng, vars, 2, 3));
    auto G = reduced_groebner(F);
    for (const auto& f : F) EXPECT_TRUE(normal_form(f, G).is_zero());
    EXPECT_TRUE(all_spolys_reduce(G));
    // Self-reduced: no term of a generator is divisible by another leading term.
    for (std::size_t i = 0; i < G.size(); ++i)
      for (std::size_t j = 0; j < G.size(); ++j) {
        if (i == j) continue;
        for (const auto& t : G[i].terms()) EXPECT_FALSE(G[j].lead_mono().divides(t.mono));
      }
    auto Fp = F;
    std::reverse(Fp.begin(), Fp.end());
    EXPECT_EQ(reduced_groebner(Fp), G);
  }
}

TEST(Factor, SquarefreePart) {
  EXPECT_EQ(squarefree_part(P("(a-1)^2*(a+1)")), P("(a-1)*(a+1)"));
  EXPECT_EQ(squarefree_part(P("a^2 - t")), P("a^2 - t"));
  EXPECT_EQ(squarefree_part(P("a^2*b^4")), P("a*b"));
  EXPECT_EQ(squarefree_part(P("(a*b - 1)^3*(b + c)")), P("(a*b - 1)*(b + c)"));
}

TEST(Factor, Examples) {
  auto f1 = factor(P("a^2*x^2 - 1"));
  ASSERT_EQ(f1.factors.size(), 2u);
  EXPECT_EQ(f1.factors[0].first, P("a*x - 1"));
  EXPECT_EQ(f1.factors[1].first, P("a*x + 1"));

  auto f2 = factor(P("b^2 - a^2"));
  ASSERT_EQ(f2.factors.size(), 2u);
  EXPECT_EQ(f2.expand(), P("b^2 - a^2"));
  std::vector<Poly> got{f2.factors[0].first, f2.factors[1].first};
  std::sort(got.begin(), got.end());
  std::vector<Poly> want{P("b - a"), P("b + a")};
  for (auto& w : want) w = w.primitive();
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);

  auto f3 = factor(P("(a+1)*b + x"));
  ASSERT_EQ(f3.factors.size(), 1u);
  EXPECT_EQ(f3.factors[0].second, 1u);

  auto f4 = factor(P("6*a^3*b - 6*a*b"));
  EXPECT_EQ(f4.expand(), P("6*a^3*b - 6*a*b"));
  EXPECT_EQ(f4.factors.size(), 4u);  // a, b, a-1, a+1
}

TEST(Factor, ProductProperty) {
  std::mt19937 rng(99);
  std::vector<VarId> vars{names_id("a"), names_id("b"), names_id("x")};
  for (int iter = 0; iter < 80; ++iter) {
    Poly f = random_poly(rng, vars, 2, 3) * random_poly(rng, vars, 1, 2);
    if (f.is_constant()) continue;
    auto fac = factor(f);
    EXPECT_EQ(fac.expand(), f) << f.str(names);
    for (const auto& [g, m] : fac.factors) EXPECT_TRUE(divide_exact(f, g).has_value());
    Poly s = squarefree_part(f);
    EXPECT_TRUE(divide_exact(f, s).has_value());
    EXPECT_EQ(squarefree_part(s), s);
  }
}

TEST(Factor, SplitUnivariate) {
  VarId a = names_id("a");
  auto s1 = split_univariate(P("a^2 - 1"), a);
  EXPECT_TRUE(s1.fully_split);
  ASSERT_EQ(s1.roots.size(), 2u);
  EXPECT_EQ(s1.roots[0].first, 1);
  EXPECT_EQ(s1.roots[1].first, -1);

  auto s2 = split_univariate(P("a^2 - 2"), a);
  EXPECT_FALSE(s2.fully_split);
  EXPECT_TRUE(s2.roots.empty());

  auto s3 = split_univariate(P("a^3 - a^2"), a);
  EXPECT_TRUE(s3.fully_split);
  ASSERT_EQ(s3.roots.size(), 2u);
  EXPECT_EQ(s3.roots[0], (std::pair<Rational, unsigned>{1, 1}));
  EXPECT_EQ(s3.roots[1], (std::pair<Rational, unsigned>{0, 2}));

  auto s4 = split_univariate(P("4*a^2 - 1"), a);
  EXPECT_TRUE(s4.fully_split);
}

TEST(SubstituteHomogenize, Examples) {
  VarId d = names_id("d"), b = names_id("b"), y = names_id("y");
  EXPECT_EQ(substitute_homogenize(P("d - 1"), d, P("a"), P("-b*c")), P("b*c - a"));
  EXPECT_EQ(substitute_homogenize(P("a + x"), y, P("a"), P("x")), P("a + x"));
  EXPECT_EQ(substitute_homogenize(P("(a+1)*b + x"), b, P("a + 1"), P("x")), Poly{});
}

TEST(SubstituteHomogenize, AgreesWithRationalSubstitution) {
  std::mt19937 rng(7);
  std::vector<VarId> vars{names_id("a"), names_id("b"), names_id("y")};
  std::vector<VarId> others{names_id("a"), names_id("b")};
  VarId y = names_id("y");
  std::uniform_int_distribution<int> val(-4, 4);
  for (int iter = 0; iter < 50; ++iter) {
    Poly f = random_poly(rng, vars, 3, 4);
    Poly u = random_poly(rng, others, 1, 2);
    Poly v = random_poly(rng, others, 1, 2);
    Poly h = substitute_homogenize(f, y, u, v);
    EXPECT_FALSE(h.contains(y));
    for (int k = 0; k < 5; ++k) {
      std::map<VarId, Rational> pt{{names_id("a"), val(rng)}, {names_id("b"), val(rng)}};
      auto at = [&](VarId x) { return pt.at(x); };
      Rational uv = u.evaluate(at);
      if (sgn(uv) == 0) continue;
      Rational yv = -v.evaluate(at) / uv;
      pt[y] = yv;
      Rational direct = f.evaluate(at);
      Rational scale = 1;
      for (unsigned e = 0; e < f.degree_in(y); ++e) scale *= uv;
      EXPECT_EQ(h.evaluate(at), direct * scale);
    }
  }
}

TEST(Parse, Errors) {
  EXPECT_THROW(P("a +"), ParseError);
  EXPECT_THROW(P("a ^ b"), ParseError);
  EXPECT_THROW(P("a / b"), ParseError);
  EXPECT_THROW(P("zz"), ParseError);
}

TEST(QPoly, RatFuncArithmetic) {
  RatFunc r = parse_ratfunc("(q^2 - 1)/(q - 1)");
  EXPECT_TRUE(r.is_polynomial());
  EXPECT_EQ(r.num(), parse_qpoly("q + 1"));
  RatFunc s = parse_ratfunc("-q + 4 - 3/q");
  EXPECT_EQ(s.den(), QPoly::q());
  EXPECT_EQ(s * RatFunc(QPoly::q()), RatFunc(parse_qpoly("-q^2 + 4*q - 3")));
  EXPECT_EQ(parse_qpoly("q^2*(q - 1)*(2*q - 1)").factored_str(), "q^2*(q - 1)*(2*q - 1)");
  EXPECT_EQ(parse_qpoly("3*q^2 - 3*q").factored_str(), "3*q*(q - 1)");
  EXPECT_EQ(parse_qpoly("2").factored_str(), "2");
  EXPECT_EQ(parse_qpoly("q + 1").factored_str(), "q + 1");
  EXPECT_EQ(parse_qpoly("-q - 1").factored_str(), "-(q + 1)");
  EXPECT_EQ(parse_qpoly("2*q^2 - 3*q + 1").str(), "2*q^2 - 3*q + 1");
}
