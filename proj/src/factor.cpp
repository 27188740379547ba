#include <algorithm>
#include <map>
#include <stdexcept>

#include "kvar/algebra.hpp"

namespace kvar {

namespace {

Poly content_in(const Poly& p, VarId x);

// Leading coefficient of p viewed as a polynomial in x.
Poly lead_in(const Poly& p, VarId x) { return p.coeffs_in(x).back(); }

Poly pseudo_remainder(Poly a, const Poly& b, VarId x) {
  const std::uint32_t db = b.degree_in(x);
  const Poly lb = lead_in(b, x);
  while (!a.is_zero() && a.degree_in(x) >= db) {
    std::uint32_t da = a.degree_in(x);
    Poly la = lead_in(a, x);
    a = a * lb - (la * b).times(Monomial(x, da - db));
    if (!a.is_zero()) a = a.primitive();
  }
  return a;
}

Poly gcd_impl(const Poly& a, const Poly& b);

Poly content_in(const Poly& p, VarId x) {
  Poly g;
  for (const auto& c : p.coeffs_in(x)) {
    if (c.is_zero()) continue;
    g = gcd_impl(g, c);
    if (g.is_constant()) return Poly(1);
  }
  return g;
}

Poly gcd_impl(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.is_zero() ? Poly{} : b.primitive();
  if (b.is_zero()) return a.primitive();
  if (a.is_constant() || b.is_constant()) return Poly(1);
  if (a.size() == 1 || b.size() == 1) {
    Monomial m = Monomial::gcd(a.monomial_content(), b.monomial_content());
    return Poly::monomial(m);
  }
  if (a == b) return a.primitive();

  auto va = a.variables();
  auto vb = b.variables();
  VarId x = std::min(va.front(), vb.front());
  bool a_has = a.contains(x), b_has = b.contains(x);
  if (!a_has) return gcd_impl(a, content_in(b, x));
  if (!b_has) return gcd_impl(content_in(a, x), b);

  Poly ca = content_in(a, x), cb = content_in(b, x);
  Poly pa = *divide_exact(a, ca);
  Poly pb = *divide_exact(b, cb);
  Poly gc = gcd_impl(ca, cb);
  if (pa.degree_in(x) < pb.degree_in(x)) std::swap(pa, pb);
  while (true) {
    Poly r = pseudo_remainder(pa, pb, x);
    if (r.is_zero()) break;
    if (r.degree_in(x) == 0) {
      pb = Poly(1);
      break;
    }
    pa = pb;
    pb = *divide_exact(r, content_in(r, x));
  }
  return (gc * pb).primitive();
}

std::vector<Integer> divisors(Integer n) {
  if (n < 0) n = -n;
  std::vector<Integer> out;
  if (n == 0) return out;
  if (n > Integer("1000000000000")) return {Integer(1)};
  for (Integer d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) out.push_back(n / d);
    }
  }
  return out;
}

bool rational_sqrt(const Rational& r, Rational& out) {
  if (sgn(r) < 0) return false;
  const Integer& n = r.get_num();
  const Integer& d = r.get_den();
  if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return false;
  Integer sn, sd;
  mpz_sqrt(sn.get_mpz_t(), n.get_mpz_t());
  mpz_sqrt(sd.get_mpz_t(), d.get_mpz_t());
  out = Rational(sn, sd);
  out.canonicalize();
  return true;
}

void factor_primitive(const Poly& g, std::vector<Poly>& out);

bool try_content_split(const Poly& g, std::vector<Poly>& out) {
  for (VarId x : g.variables()) {
    Poly c = content_in(g, x);
    if (c.is_constant()) continue;
    Poly rest = *divide_exact(g, c);
    factor_primitive(c.primitive(), out);
    factor_primitive(rest.primitive(), out);
    return true;
  }
  return false;
}

bool try_quadratic_split(const Poly& g, std::vector<Poly>& out) {
  for (VarId y : g.variables()) {
    if (g.degree_in(y) != 2) continue;
    auto cs = g.coeffs_in(y);
    const Poly& c = cs[0];
    const Poly& b = cs[1];
    const Poly& a = cs[2];
    Poly disc = b * b - (a * c).scaled(4);
    auto root = poly_sqrt(disc);
    if (!root) continue;
    Poly base = a.scaled(2).times(Monomial(y)) + b;
    Poly p1 = base - *root;
    Poly c1 = content_in(p1, y);
    Poly f1 = (*divide_exact(p1, c1)).primitive();
    auto rest = divide_exact(g, f1);
    if (!rest || rest->is_constant() || f1.is_constant()) continue;
    factor_primitive(f1, out);
    factor_primitive(rest->primitive(), out);
    return true;
  }
  return false;
}

bool try_rational_roots(const Poly& g, std::vector<Poly>& out) {
  auto vars = g.variables();
  if (vars.size() != 1) return false;
  VarId x = vars.front();
  auto split = split_univariate(g, x);
  if (split.roots.empty()) return false;
  Poly rest = g;
  for (const auto& [r, m] : split.roots) {
    Poly lin = (Poly::var(x) - Poly(r)).primitive();
    for (unsigned k = 0; k < m; ++k) {
      out.push_back(lin);
      rest = *divide_exact(rest, lin);
    }
  }
  if (!rest.is_constant()) factor_primitive(rest.primitive(), out);
  return true;
}

void factor_primitive(const Poly& g, std::vector<Poly>& out) {
  if (g.is_constant()) return;
  Monomial m = g.monomial_content();
  if (!m.is_one()) {
    for (const auto& [v, e] : m.factors())
      for (std::uint32_t k = 0; k < e; ++k) out.push_back(Poly::var(v));
    factor_primitive((*divide_exact(g, Poly::monomial(m))).primitive(), out);
    return;
  }
  if (g.total_degree() == 1) {
    out.push_back(g.primitive());
    return;
  }
  if (try_content_split(g, out)) return;
  if (try_rational_roots(g, out)) return;
  if (try_quadratic_split(g, out)) return;
  out.push_back(g.primitive());
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) { return gcd_impl(a, b); }

Poly squarefree_part(const Poly& f) {
  if (f.is_constant()) return f.is_zero() ? f : Poly(1);
  Poly result(1);
  for (VarId x : f.variables()) {
    Poly g = gcd(f, f.derivative(x));
    Poly part = *divide_exact(f, g);
    // lcm(result, part)
    Poly common = gcd(result, part);
    result = (*divide_exact(result * part, common)).primitive();
  }
  return result;
}

std::optional<Poly> poly_sqrt(const Poly& p) {
  if (p.is_zero()) return Poly{};
  Rational lc;
  if (!rational_sqrt(p.lead_coeff(), lc)) return std::nullopt;
  std::vector<Monomial::Factor> half;
  for (const auto& [v, e] : p.lead_mono().factors()) {
    if (e % 2 != 0) return std::nullopt;
    half.emplace_back(v, e / 2);
  }
  Monomial lm = Monomial::from_factors(std::move(half));
  Poly root = Poly::monomial(lm, lc);
  Poly rem = p - root * root;
  std::size_t guard = p.size() + 4;
  while (!rem.is_zero()) {
    if (guard-- == 0) return std::nullopt;
    if (!lm.divides(rem.lead_mono())) return std::nullopt;
    if (compare_degrevlex(rem.lead_mono(), lm * lm) >= 0) return std::nullopt;
    root += Poly::monomial(rem.lead_mono() / lm, rem.lead_coeff() / (2 * lc));
    rem = p - root * root;
  }
  return root;
}

Poly Factorization::expand() const {
  Poly r(unit);
  for (const auto& [f, m] : factors) r *= f.pow(m);
  return r;
}

Factorization factor(const Poly& f) {
  Factorization out;
  if (f.is_zero()) {
    out.unit = 0;
    return out;
  }
  if (f.is_constant()) {
    out.unit = f.constant_value();
    return out;
  }
  Rational c = f.content();
  std::vector<Poly> parts;
  factor_primitive(f.scaled(1 / c), parts);
  std::sort(parts.begin(), parts.end());
  for (auto& p : parts) {
    if (!out.factors.empty() && out.factors.back().first == p)
      ++out.factors.back().second;
    else
      out.factors.emplace_back(std::move(p), 1u);
  }
  // Fix the rational constant so that unit * prod == f exactly.
  Poly prod(1);
  for (const auto& [g, m] : out.factors) prod *= g.pow(m);
  out.unit = f.lead_coeff() / prod.lead_coeff();
  return out;
}

UnivariateSplit split_univariate(const Poly& f, VarId x) {
  UnivariateSplit out;
  for (VarId v : f.variables())
    if (v != x) throw std::invalid_argument("split_univariate: polynomial is not univariate");
  Poly rest = f.primitive();
  if (rest.is_constant()) {
    out.fully_split = true;
    return out;
  }
  auto take_root = [&](const Rational& r) {
    Poly lin = Poly::var(x) - Poly(r);
    unsigned m = 0;
    while (rest.degree_in(x) > 0) {
      auto q = divide_exact(rest, lin);
      if (!q) break;
      rest = *q;
      ++m;
    }
    if (m > 0) out.roots.emplace_back(r, m);
  };
  if (rest.degree_in(x) > 0 && sgn(rest.coeffs_in(x)[0].constant_value()) == 0) take_root(0);
  if (rest.degree_in(x) > 0) {
    rest = rest.primitive();
    auto cs = rest.coeffs_in(x);
    Integer a0 = cs.front().constant_value().get_num();
    Integer an = cs.back().constant_value().get_num();
    auto ps = divisors(a0);
    auto qs = divisors(an);
    std::vector<Rational> cands;
    for (const auto& p : ps)
      for (const auto& q : qs) {
        Rational r(p, q);
        r.canonicalize();
        cands.push_back(r);
        cands.push_back(-r);
      }
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    for (const auto& r : cands) {
      if (rest.degree_in(x) == 0) break;
      if (sgn(rest.evaluate([&](VarId) { return r; })) == 0) take_root(r);
    }
  }
  if (rest.degree_in(x) == 2) {
    // Quadratic remainder with rational discriminant square roots.
    auto cs = rest.coeffs_in(x);
    Rational a = cs[2].constant_value(), b = cs[1].constant_value(), c = cs[0].constant_value();
    Rational s;
    if (rational_sqrt(b * b - 4 * a * c, s)) {
      Rational r1 = (-b - s) / (2 * a), r2 = (-b + s) / (2 * a);
      take_root(r1);
      if (r2 != r1) take_root(r2);
    }
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  out.fully_split = rest.degree_in(x) == 0;
  return out;
}

Poly substitute_homogenize(const Poly& f, VarId y, const Poly& u, const Poly& v) {
  if (!f.contains(y)) return f;
  auto cs = f.coeffs_in(y);
  std::size_t d = cs.size() - 1;
  Poly neg_v = -v;
  Poly out;
  Poly vpow(1);
  std::vector<Poly> upow(d + 1);
  upow[0] = Poly(1);
  for (std::size_t k = 1; k <= d; ++k) upow[k] = upow[k - 1] * u;
  for (std::size_t k = 0; k <= d; ++k) {
    if (!cs[k].is_zero()) out += cs[k] * vpow * upow[d - k];
    vpow *= neg_v;
  }
  return out;
}

std::vector<Poly> substitute_homogenize(std::span<const Poly> polys, VarId y, const Poly& u, const Poly& v) {
  std::vector<Poly> out;
  out.reserve(polys.size());
  for (const auto& f : polys) out.push_back(substitute_homogenize(f, y, u, v));
  return out;
}

}  // namespace kvar
