#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kvar {

using Rational = mpq_class;
using Integer = mpz_class;
using VarId = std::uint32_t;

// Variables with ids at or above this offset are base variables. Under
// degrevlex they are ordered after every fiber variable.
inline constexpr VarId kBaseVarOffset = 1u << 20;

inline bool is_base_var(VarId v) { return v >= kBaseVarOffset; }

std::string to_string(const Rational& r);

class Monomial {
 public:
  using Factor = std::pair<VarId, std::uint32_t>;

  Monomial() = default;
  explicit Monomial(VarId v, std::uint32_t e = 1);
  static Monomial from_factors(std::vector<Factor> factors);

  std::uint32_t degree() const { return degree_; }
  std::uint32_t exponent(VarId v) const;
  bool is_one() const { return factors_.empty(); }
  const std::vector<Factor>& factors() const { return factors_; }

  bool divides(const Monomial& other) const;
  // Exact quotient; caller guarantees divisibility.
  Monomial operator/(const Monomial& other) const;
  Monomial operator*(const Monomial& other) const;
  Monomial without(VarId v) const;

  static Monomial lcm(const Monomial& a, const Monomial& b);
  static Monomial gcd(const Monomial& a, const Monomial& b);
  static bool coprime(const Monomial& a, const Monomial& b);

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }
  std::size_t hash() const;

 private:
  std::vector<Factor> factors_;  // sorted by variable, exponents positive
  std::uint32_t degree_ = 0;
};

// Returns >0 when a > b in degree reverse lexicographic order, <0 when a < b.
int compare_degrevlex(const Monomial& a, const Monomial& b);

struct Term {
  Monomial mono;
  Rational coeff;
};

using NameFn = std::function<std::string(VarId)>;
std::string default_var_name(VarId v);

class Poly {
 public:
  Poly() = default;
  Poly(long c);  // NOLINT(google-explicit-constructor)
  explicit Poly(const Rational& c);
  static Poly var(VarId v, std::uint32_t e = 1);
  static Poly monomial(const Monomial& m, const Rational& c = 1);
  // Terms may be unsorted and contain duplicates; they are combined.
  static Poly from_terms(std::vector<Term> terms);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.is_one()); }
  Rational constant_value() const;  // valid when is_constant()
  std::size_t size() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }

  const Term& lead() const { return terms_.front(); }
  const Monomial& lead_mono() const { return terms_.front().mono; }
  const Rational& lead_coeff() const { return terms_.front().coeff; }

  std::uint32_t total_degree() const;
  std::uint32_t degree_in(VarId v) const;
  std::vector<VarId> variables() const;
  bool contains(VarId v) const;
  bool only_base_vars() const;
  bool has_fiber_vars() const { return !only_base_vars(); }

  Poly operator-() const;
  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Poly& o);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly scaled(const Rational& c) const;
  Poly times(const Monomial& m, const Rational& c = 1) const;
  Poly pow(unsigned e) const;

  friend bool operator==(const Poly& a, const Poly& b);
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }
  // Total order used for canonical sorting: by leading monomials, then coefficients.
  friend bool operator<(const Poly& a, const Poly& b);
  std::size_t hash() const;

  Poly derivative(VarId v) const;
  // Coefficients c_k with this = sum_k c_k * v^k.
  std::vector<Poly> coeffs_in(VarId v) const;
  static Poly from_coeffs(VarId v, std::span<const Poly> coeffs);
  Poly substitute(VarId v, const Poly& value) const;
  Poly rename(const std::function<VarId(VarId)>& f) const;
  // Evaluates every variable through the callback.
  Rational evaluate(const std::function<Rational(VarId)>& value) const;

  Poly monic() const;
  // Integer coefficients with gcd 1 and positive leading coefficient.
  Poly primitive() const;
  // Largest rational c such that this / c has integer coprime coefficients (sign of lead).
  Rational content() const;
  Monomial monomial_content() const;

  std::string str(const NameFn& names = default_var_name) const;

 private:
  std::vector<Term> terms_;  // strictly descending degrevlex, nonzero coefficients
  void normalize();
};

// Exact quotient when b divides a, nullopt otherwise. b must be nonzero.
std::optional<Poly> divide_exact(const Poly& a, const Poly& b);

// Multivariate division remainder by the given divisors (leading terms under degrevlex).
Poly remainder(const Poly& f, std::span<const Poly> divisors);

struct PolyHash {
  std::size_t operator()(const Poly& p) const { return p.hash(); }
};

}  // namespace kvar
