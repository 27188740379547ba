#pragma once

#include <string>
#include <vector>

#include "kvar/poly.hpp"

namespace kvar {

/// Dense univariate polynomial in q with rational coefficients.
class QPoly {
 public:
  QPoly() = default;
  QPoly(long c);  // NOLINT(google-explicit-constructor)
  explicit QPoly(const Rational& c);
  explicit QPoly(std::vector<Rational> coeffs);
  static QPoly q(unsigned e = 1);

  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  Rational coeff(std::size_t k) const { return k < c_.size() ? c_[k] : Rational(0); }
  const Rational& lead() const { return c_.back(); }
  const std::vector<Rational>& coeffs() const { return c_; }

  QPoly operator-() const;
  QPoly& operator+=(const QPoly& o);
  QPoly& operator-=(const QPoly& o);
  friend QPoly operator+(QPoly a, const QPoly& b) { return a += b; }
  friend QPoly operator-(QPoly a, const QPoly& b) { return a -= b; }
  friend QPoly operator*(const QPoly& a, const QPoly& b);
  QPoly& operator*=(const QPoly& o) { return *this = *this * o; }
  QPoly scaled(const Rational& c) const;
  QPoly pow(unsigned e) const;
  friend bool operator==(const QPoly& a, const QPoly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const QPoly& a, const QPoly& b) { return !(a == b); }

  Rational evaluate(const Rational& x) const;
  bool has_integer_coeffs() const;

  // Quotient and remainder; divisor nonzero.
  static void divmod(const QPoly& a, const QPoly& b, QPoly& quot, QPoly& rem);
  static QPoly gcd(const QPoly& a, const QPoly& b);  // monic
  QPoly monic() const;

  Poly to_poly(VarId q) const;
  static QPoly from_poly(const Poly& p, VarId q);  // p must be univariate in q

  // Canonical expanded form, e.g. "2*q^2 - 3*q + 1".
  std::string str() const;
  // Factored form over Q: "q^2*(q - 1)*(2*q - 1)".
  std::string factored_str() const;

 private:
  std::vector<Rational> c_;
  void trim();
};

/// Element of Q(q): reduced fraction with monic denominator.
class RatFunc {
 public:
  RatFunc() : num_(0), den_(1) {}
  RatFunc(long c) : num_(c), den_(1) {}  // NOLINT(google-explicit-constructor)
  RatFunc(QPoly n) : num_(std::move(n)), den_(1) {}  // NOLINT(google-explicit-constructor)
  RatFunc(QPoly n, QPoly d);

  const QPoly& num() const { return num_; }
  const QPoly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }

  RatFunc operator-() const { return RatFunc(-num_, den_); }
  friend RatFunc operator+(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) { return a + (-b); }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b);
  RatFunc& operator+=(const RatFunc& o) { return *this = *this + o; }
  RatFunc& operator-=(const RatFunc& o) { return *this = *this - o; }
  RatFunc& operator*=(const RatFunc& o) { return *this = *this * o; }
  RatFunc pow(int e) const;
  RatFunc inverse() const;
  friend bool operator==(const RatFunc& a, const RatFunc& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator!=(const RatFunc& a, const RatFunc& b) { return !(a == b); }

  std::string str() const;

 private:
  QPoly num_, den_;
  void normalize();
};

}  // namespace kvar
