#include "kvar/qpoly.hpp"

#include <stdexcept>

#include "kvar/algebra.hpp"

namespace kvar {

QPoly::QPoly(long c) {
  if (c != 0) c_.emplace_back(c);
}

QPoly::QPoly(const Rational& c) {
  if (sgn(c) != 0) c_.push_back(c);
}

QPoly::QPoly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

QPoly QPoly::q(unsigned e) {
  std::vector<Rational> c(e + 1, Rational(0));
  c[e] = 1;
  return QPoly(std::move(c));
}

void QPoly::trim() {
  while (!c_.empty() && sgn(c_.back()) == 0) c_.pop_back();
}

QPoly QPoly::operator-() const {
  QPoly r = *this;
  for (auto& c : r.c_) c = -c;
  return r;
}

QPoly& QPoly::operator+=(const QPoly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  trim();
  return *this;
}

QPoly& QPoly::operator-=(const QPoly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Rational(0));
  for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  trim();
  return *this;
}

QPoly operator*(const QPoly& a, const QPoly& b) {
  if (a.is_zero() || b.is_zero()) return QPoly{};
  std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.c_.size(); ++i) {
    if (sgn(a.c_[i]) == 0) continue;
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  }
  return QPoly(std::move(c));
}

QPoly QPoly::scaled(const Rational& s) const {
  if (sgn(s) == 0) return QPoly{};
  QPoly r = *this;
  for (auto& c : r.c_) c *= s;
  return r;
}

QPoly QPoly::pow(unsigned e) const {
  QPoly r(1), b = *this;
  while (e) {
    if (e & 1u) r *= b;
    e >>= 1u;
    if (e) b *= b;
  }
  return r;
}

Rational QPoly::evaluate(const Rational& x) const {
  Rational r = 0;
  for (std::size_t k = c_.size(); k-- > 0;) r = r * x + c_[k];
  return r;
}

bool QPoly::has_integer_coeffs() const {
  for (const auto& c : c_)
    if (c.get_den() != 1) return false;
  return true;
}

void QPoly::divmod(const QPoly& a, const QPoly& b, QPoly& quot, QPoly& rem) {
  if (b.is_zero()) throw std::domain_error("QPoly division by zero");
  rem = a;
  std::vector<Rational> q;
  if (a.degree() >= b.degree()) q.assign(a.degree() - b.degree() + 1, Rational(0));
  while (!rem.is_zero() && rem.degree() >= b.degree()) {
    int shift = rem.degree() - b.degree();
    Rational c = rem.lead() / b.lead();
    q[shift] = c;
    for (int k = 0; k <= b.degree(); ++k) rem.c_[k + shift] -= c * b.c_[k];
    rem.trim();
  }
  quot = QPoly(std::move(q));
}

QPoly QPoly::monic() const {
  if (is_zero()) return *this;
  return scaled(1 / lead());
}

QPoly QPoly::gcd(const QPoly& a, const QPoly& b) {
  QPoly x = a, y = b;
  while (!y.is_zero()) {
    QPoly qq, r;
    divmod(x, y, qq, r);
    x = std::move(y);
    y = std::move(r);
  }
  return x.monic();
}

Poly QPoly::to_poly(VarId q) const {
  std::vector<Term> t;
  for (std::size_t k = 0; k < c_.size(); ++k)
    if (sgn(c_[k]) != 0) t.push_back({Monomial(q, static_cast<std::uint32_t>(k)), c_[k]});
  return Poly::from_terms(std::move(t));
}

QPoly QPoly::from_poly(const Poly& p, VarId q) {
  std::vector<Rational> c(p.degree_in(q) + 1, Rational(0));
  for (const auto& t : p.terms()) {
    for (const auto& f : t.mono.factors())
      if (f.first != q) throw std::invalid_argument("polynomial is not univariate in q");
    c[t.mono.exponent(q)] += t.coeff;
  }
  return QPoly(std::move(c));
}

std::string QPoly::str() const {
  return to_poly(0).str([](VarId) { return std::string("q"); });
}

std::string QPoly::factored_str() const {
  if (is_zero()) return "0";
  if (is_constant()) return to_string(c_[0]);
  Poly p = to_poly(0);
  Factorization f = factor(p);
  auto name = [](VarId) { return std::string("q"); };
  std::string out;
  if (f.unit == -1)
    out = "-";
  else if (f.unit != 1)
    out = to_string(f.unit) + "*";
  bool first = true;
  for (const auto& [g, m] : f.factors) {
    if (!first) out += "*";
    first = false;
    std::string s = g.str(name);
    const bool alone = f.factors.size() == 1 && m == 1 && f.unit == 1;
    if (g.size() > 1 && !alone) s = "(" + s + ")";
    out += s;
    if (m > 1) out += "^" + std::to_string(m);
  }
  return out;
}

// ---- RatFunc ----

RatFunc::RatFunc(QPoly n, QPoly d) : num_(std::move(n)), den_(std::move(d)) {
  if (den_.is_zero()) throw std::domain_error("rational function with zero denominator");
  normalize();
}

void RatFunc::normalize() {
  if (num_.is_zero()) {
    den_ = QPoly(1);
    return;
  }
  if (den_.degree() > 0) {
    QPoly g = QPoly::gcd(num_, den_);
    if (g.degree() > 0) {
      QPoly q1, r1, q2, r2;
      QPoly::divmod(num_, g, q1, r1);
      QPoly::divmod(den_, g, q2, r2);
      num_ = std::move(q1);
      den_ = std::move(q2);
    }
  }
  Rational l = den_.lead();
  if (l != 1) {
    num_ = num_.scaled(1 / l);
    den_ = den_.scaled(1 / l);
  }
}

RatFunc operator+(const RatFunc& a, const RatFunc& b) {
  if (a.den_ == b.den_) return RatFunc(a.num_ + b.num_, a.den_);
  return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator*(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero() || b.is_zero()) return RatFunc{};
  return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
}

RatFunc RatFunc::inverse() const {
  if (is_zero()) throw std::domain_error("inverse of zero rational function");
  return RatFunc(den_, num_);
}

RatFunc operator/(const RatFunc& a, const RatFunc& b) { return a * b.inverse(); }

RatFunc RatFunc::pow(int e) const {
  if (e < 0) return inverse().pow(-e);
  return RatFunc(num_.pow(static_cast<unsigned>(e)), den_.pow(static_cast<unsigned>(e)));
}

std::string RatFunc::str() const {
  if (den_.is_constant()) return num_.str();
  std::string n = num_.str();
  if (num_.coeffs().size() > 1 && num_.str().find_first_of("+-", 1) != std::string::npos) n = "(" + n + ")";
  return n + "/(" + den_.str() + ")";
}

}  // namespace kvar
