#include "kvar/poly.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace kvar {

std::string to_string(const Rational& r) { return r.get_str(); }

std::string default_var_name(VarId v) {
  if (is_base_var(v)) return "t" + std::to_string(v - kBaseVarOffset);
  return "x" + std::to_string(v);
}

// ---- Monomial ----

Monomial::Monomial(VarId v, std::uint32_t e) {
  if (e > 0) {
    factors_.emplace_back(v, e);
    degree_ = e;
  }
}

Monomial Monomial::from_factors(std::vector<Factor> factors) {
  std::sort(factors.begin(), factors.end());
  Monomial m;
  for (const auto& [v, e] : factors) {
    if (e == 0) continue;
    if (!m.factors_.empty() && m.factors_.back().first == v)
      m.factors_.back().second += e;
    else
      m.factors_.emplace_back(v, e);
    m.degree_ += e;
  }
  return m;
}

std::uint32_t Monomial::exponent(VarId v) const {
  auto it = std::lower_bound(factors_.begin(), factors_.end(), Factor{v, 0});
  if (it != factors_.end() && it->first == v) return it->second;
  return 0;
}

bool Monomial::divides(const Monomial& other) const {
  if (degree_ > other.degree_) return false;
  std::size_t j = 0;
  for (const auto& [v, e] : factors_) {
    while (j < other.factors_.size() && other.factors_[j].first < v) ++j;
    if (j == other.factors_.size() || other.factors_[j].first != v || other.factors_[j].second < e)
      return false;
  }
  return true;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r;
  r.factors_.reserve(factors_.size() + o.factors_.size());
  std::size_t i = 0, j = 0;
  while (i < factors_.size() || j < o.factors_.size()) {
    if (j == o.factors_.size() || (i < factors_.size() && factors_[i].first < o.factors_[j].first)) {
      r.factors_.push_back(factors_[i++]);
    } else if (i == factors_.size() || o.factors_[j].first < factors_[i].first) {
      r.factors_.push_back(o.factors_[j++]);
    } else {
      r.factors_.emplace_back(factors_[i].first, factors_[i].second + o.factors_[j].second);
      ++i;
      ++j;
    }
  }
  r.degree_ = degree_ + o.degree_;
  return r;
}

Monomial Monomial::operator/(const Monomial& o) const {
  Monomial r;
  std::size_t j = 0;
  for (const auto& [v, e] : factors_) {
    std::uint32_t sub = 0;
    if (j < o.factors_.size() && o.factors_[j].first == v) sub = o.factors_[j++].second;
    assert(sub <= e);
    if (e > sub) r.factors_.emplace_back(v, e - sub);
  }
  r.degree_ = degree_ - o.degree_;
  return r;
}

Monomial Monomial::without(VarId v) const {
  Monomial r;
  for (const auto& f : factors_)
    if (f.first != v) {
      r.factors_.push_back(f);
      r.degree_ += f.second;
    }
  return r;
}

Monomial Monomial::lcm(const Monomial& a, const Monomial& b) {
  std::vector<Factor> f;
  std::size_t i = 0, j = 0;
  while (i < a.factors_.size() || j < b.factors_.size()) {
    if (j == b.factors_.size() || (i < a.factors_.size() && a.factors_[i].first < b.factors_[j].first)) {
      f.push_back(a.factors_[i++]);
    } else if (i == a.factors_.size() || b.factors_[j].first < a.factors_[i].first) {
      f.push_back(b.factors_[j++]);
    } else {
      f.emplace_back(a.factors_[i].first, std::max(a.factors_[i].second, b.factors_[j].second));
      ++i;
      ++j;
    }
  }
  return from_factors(std::move(f));
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b) {
  std::vector<Factor> f;
  for (const auto& [v, e] : a.factors_) {
    auto eb = b.exponent(v);
    if (eb > 0) f.emplace_back(v, std::min(e, eb));
  }
  return from_factors(std::move(f));
}

bool Monomial::coprime(const Monomial& a, const Monomial& b) {
  std::size_t i = 0, j = 0;
  while (i < a.factors_.size() && j < b.factors_.size()) {
    if (a.factors_[i].first == b.factors_[j].first) return false;
    if (a.factors_[i].first < b.factors_[j].first)
      ++i;
    else
      ++j;
  }
  return true;
}

std::size_t Monomial::hash() const {
  std::size_t h = 1469598103934665603ull;
  for (const auto& [v, e] : factors_) {
    h ^= (static_cast<std::size_t>(v) << 8) ^ e;
    h *= 1099511628211ull;
  }
  return h;
}

int compare_degrevlex(const Monomial& a, const Monomial& b) {
  if (a.degree() != b.degree()) return a.degree() > b.degree() ? 1 : -1;
  const auto& fa = a.factors();
  const auto& fb = b.factors();
  std::ptrdiff_t i = static_cast<std::ptrdiff_t>(fa.size()) - 1;
  std::ptrdiff_t j = static_cast<std::ptrdiff_t>(fb.size()) - 1;
  while (i >= 0 && j >= 0) {
    if (fa[i].first == fb[j].first) {
      if (fa[i].second != fb[j].second) return fa[i].second < fb[j].second ? 1 : -1;
      --i;
      --j;
    } else if (fa[i].first > fb[j].first) {
      return -1;
    } else {
      return 1;
    }
  }
  if (i >= 0) return -1;
  if (j >= 0) return 1;
  return 0;
}

// ---- Poly ----

Poly::Poly(long c) {
  if (c != 0) terms_.push_back({Monomial{}, Rational(c)});
}

Poly::Poly(const Rational& c) {
  if (sgn(c) != 0) terms_.push_back({Monomial{}, c});
}

Poly Poly::var(VarId v, std::uint32_t e) { return monomial(Monomial(v, e)); }

Poly Poly::monomial(const Monomial& m, const Rational& c) {
  Poly p;
  if (sgn(c) != 0) p.terms_.push_back({m, c});
  return p;
}

Poly Poly::from_terms(std::vector<Term> terms) {
  Poly p;
  p.terms_ = std::move(terms);
  p.normalize();
  return p;
}

void Poly::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return compare_degrevlex(a.mono, b.mono) > 0; });
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (auto& t : terms_) {
    if (!out.empty() && out.back().mono == t.mono)
      out.back().coeff += t.coeff;
    else
      out.push_back(std::move(t));
  }
  std::erase_if(out, [](const Term& t) { return sgn(t.coeff) == 0; });
  terms_ = std::move(out);
}

Rational Poly::constant_value() const {
  if (terms_.empty()) return 0;
  return terms_.front().coeff;
}

std::uint32_t Poly::total_degree() const { return terms_.empty() ? 0 : terms_.front().mono.degree(); }

std::uint32_t Poly::degree_in(VarId v) const {
  std::uint32_t d = 0;
  for (const auto& t : terms_) d = std::max(d, t.mono.exponent(v));
  return d;
}

std::vector<VarId> Poly::variables() const {
  std::vector<VarId> vs;
  for (const auto& t : terms_)
    for (const auto& f : t.mono.factors()) vs.push_back(f.first);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

bool Poly::contains(VarId v) const {
  for (const auto& t : terms_)
    if (t.mono.exponent(v) > 0) return true;
  return false;
}

bool Poly::only_base_vars() const {
  for (const auto& t : terms_)
    for (const auto& f : t.mono.factors())
      if (!is_base_var(f.first)) return false;
  return true;
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& t : r.terms_) t.coeff = -t.coeff;
  return r;
}

namespace {

std::vector<Term> merge(const std::vector<Term>& a, const std::vector<Term>& b, bool subtract) {
  std::vector<Term> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    int c;
    if (i == a.size())
      c = -1;
    else if (j == b.size())
      c = 1;
    else
      c = compare_degrevlex(a[i].mono, b[j].mono);
    if (c > 0) {
      out.push_back(a[i++]);
    } else if (c < 0) {
      out.push_back(b[j]);
      if (subtract) out.back().coeff = -out.back().coeff;
      ++j;
    } else {
      Rational s = subtract ? Rational(a[i].coeff - b[j].coeff) : Rational(a[i].coeff + b[j].coeff);
      if (sgn(s) != 0) out.push_back({a[i].mono, std::move(s)});
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

Poly& Poly::operator+=(const Poly& o) {
  if (o.terms_.empty()) return *this;
  terms_ = merge(terms_, o.terms_, false);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.terms_.empty()) return *this;
  terms_ = merge(terms_, o.terms_, true);
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly{};
  if (a.terms_.size() < b.terms_.size()) return b * a;
  Poly acc;
  for (const auto& t : b.terms_) acc += a.times(t.mono, t.coeff);
  return acc;
}

Poly& Poly::operator*=(const Poly& o) {
  *this = *this * o;
  return *this;
}

Poly Poly::scaled(const Rational& c) const {
  if (sgn(c) == 0) return Poly{};
  Poly r = *this;
  for (auto& t : r.terms_) t.coeff *= c;
  return r;
}

Poly Poly::times(const Monomial& m, const Rational& c) const {
  if (sgn(c) == 0) return Poly{};
  Poly r;
  r.terms_.reserve(terms_.size());
  // Multiplying by a monomial preserves the degrevlex order.
  for (const auto& t : terms_) r.terms_.push_back({t.mono * m, t.coeff * c});
  return r;
}

Poly Poly::pow(unsigned e) const {
  Poly result(1);
  Poly base = *this;
  while (e > 0) {
    if (e & 1u) result *= base;
    e >>= 1u;
    if (e) base *= base;
  }
  return result;
}

bool operator==(const Poly& a, const Poly& b) {
  if (a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i)
    if (!(a.terms_[i].mono == b.terms_[i].mono) || a.terms_[i].coeff != b.terms_[i].coeff) return false;
  return true;
}

bool operator<(const Poly& a, const Poly& b) {
  std::size_t n = std::min(a.terms_.size(), b.terms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare_degrevlex(a.terms_[i].mono, b.terms_[i].mono);
    if (c != 0) return c < 0;
    int cc = cmp(a.terms_[i].coeff, b.terms_[i].coeff);
    if (cc != 0) return cc < 0;
  }
  return a.terms_.size() < b.terms_.size();
}

std::size_t Poly::hash() const {
  std::size_t h = 0xcbf29ce484222325ull;
  for (const auto& t : terms_) {
    h ^= t.mono.hash();
    h *= 1099511628211ull;
    h ^= std::hash<std::string>{}(t.coeff.get_str());
    h *= 1099511628211ull;
  }
  return h;
}

Poly Poly::derivative(VarId v) const {
  std::vector<Term> out;
  for (const auto& t : terms_) {
    auto e = t.mono.exponent(v);
    if (e == 0) continue;
    out.push_back({t.mono / Monomial(v, 1), t.coeff * e});
  }
  return from_terms(std::move(out));
}

std::vector<Poly> Poly::coeffs_in(VarId v) const {
  std::vector<std::vector<Term>> buckets(degree_in(v) + 1);
  for (const auto& t : terms_) {
    auto e = t.mono.exponent(v);
    buckets[e].push_back({t.mono.without(v), t.coeff});
  }
  std::vector<Poly> out;
  out.reserve(buckets.size());
  for (auto& b : buckets) out.push_back(from_terms(std::move(b)));
  return out;
}

Poly Poly::from_coeffs(VarId v, std::span<const Poly> coeffs) {
  Poly r;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    if (!coeffs[k].is_zero()) r += coeffs[k].times(Monomial(v, static_cast<std::uint32_t>(k)));
  return r;
}

Poly Poly::substitute(VarId v, const Poly& value) const {
  if (!contains(v)) return *this;
  auto cs = coeffs_in(v);
  // Horner evaluation in v.
  Poly r = cs.back();
  for (std::size_t k = cs.size() - 1; k-- > 0;) r = r * value + cs[k];
  return r;
}

Poly Poly::rename(const std::function<VarId(VarId)>& f) const {
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    std::vector<Monomial::Factor> fs;
    for (const auto& [v, e] : t.mono.factors()) fs.emplace_back(f(v), e);
    out.push_back({Monomial::from_factors(std::move(fs)), t.coeff});
  }
  return from_terms(std::move(out));
}

Rational Poly::evaluate(const std::function<Rational(VarId)>& value) const {
  Rational sum = 0;
  std::map<VarId, Rational> cache;
  for (const auto& t : terms_) {
    Rational prod = t.coeff;
    for (const auto& [v, e] : t.mono.factors()) {
      auto it = cache.find(v);
      if (it == cache.end()) it = cache.emplace(v, value(v)).first;
      Rational pw = 1;
      for (std::uint32_t k = 0; k < e; ++k) pw *= it->second;
      prod *= pw;
    }
    sum += prod;
  }
  return sum;
}

Poly Poly::monic() const {
  if (is_zero()) return *this;
  Rational inv = 1 / lead_coeff();
  return scaled(inv);
}

Rational Poly::content() const {
  if (is_zero()) return 0;
  Integer num_gcd = 0, den_lcm = 1;
  for (const auto& t : terms_) {
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), t.coeff.get_num_mpz_t());
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), t.coeff.get_den_mpz_t());
  }
  Rational c(num_gcd, den_lcm);
  c.canonicalize();
  if (sgn(lead_coeff()) < 0) c = -c;
  return c;
}

Poly Poly::primitive() const {
  if (is_zero()) return *this;
  return scaled(1 / content());
}

Monomial Poly::monomial_content() const {
  if (is_zero()) return Monomial{};
  Monomial g = terms_.front().mono;
  for (const auto& t : terms_) g = Monomial::gcd(g, t.mono);
  return g;
}

std::string Poly::str(const NameFn& names) const {
  if (is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : terms_) {
    Rational c = t.coeff;
    bool neg = sgn(c) < 0;
    if (neg) c = -c;
    if (first) {
      if (neg) out += "-";
    } else {
      out += neg ? " - " : " + ";
    }
    first = false;
    std::string mono;
    for (const auto& [v, e] : t.mono.factors()) {
      if (!mono.empty()) mono += "*";
      mono += names(v);
      if (e > 1) mono += "^" + std::to_string(e);
    }
    if (mono.empty()) {
      out += to_string(c);
    } else if (c == 1) {
      out += mono;
    } else {
      out += to_string(c) + "*" + mono;
    }
  }
  return out;
}

std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw std::invalid_argument("division by zero polynomial");
  if (a.is_zero()) return Poly{};
  if (b.is_constant()) return a.scaled(1 / b.constant_value());
  Poly r = a;
  std::vector<Term> q;
  const auto& lm = b.lead_mono();
  const Rational& lc = b.lead_coeff();
  while (!r.is_zero()) {
    if (!lm.divides(r.lead_mono())) return std::nullopt;
    Monomial m = r.lead_mono() / lm;
    Rational c = r.lead_coeff() / lc;
    q.push_back({m, c});
    r -= b.times(m, c);
  }
  return Poly::from_terms(std::move(q));
}

Poly remainder(const Poly& f, std::span<const Poly> divisors) {
  Poly p = f;
  std::vector<Term> rem;
  while (!p.is_zero()) {
    bool divided = false;
    for (const auto& g : divisors) {
      if (g.is_zero()) continue;
      if (g.lead_mono().divides(p.lead_mono())) {
        Monomial m = p.lead_mono() / g.lead_mono();
        Rational c = p.lead_coeff() / g.lead_coeff();
        p -= g.times(m, c);
        divided = true;
        break;
      }
    }
    if (!divided) {
      rem.push_back(p.lead());
      p -= Poly::monomial(p.lead_mono(), p.lead_coeff());
    }
  }
  return Poly::from_terms(std::move(rem));
}

}  // namespace kvar
