#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kvar/poly.hpp"

namespace kvar {

/// Reduced Groebner basis under degrevlex: monic, self-reduced, sorted by
/// descending leading monomial. The unit ideal gives {1}; the empty input gives {}.
std::vector<Poly> reduced_groebner(std::span<const Poly> generators);

/// Remainder of f on division by a reduced Groebner basis. Zero iff f is in the ideal.
Poly normal_form(const Poly& f, std::span<const Poly> basis);

/// Polynomial gcd, primitive with integer coefficients and positive leading coefficient.
/// gcd(0, 0) = 0.
Poly gcd(const Poly& a, const Poly& b);

/// Product of the distinct irreducible factors, up to a rational constant.
/// Computed as f / gcd(f, df/dx) over each variable in turn.
Poly squarefree_part(const Poly& f);

/// Exact square root if p is a perfect square in Q[vars].
std::optional<Poly> poly_sqrt(const Poly& p);

struct Factorization {
  Rational unit = 1;
  std::vector<std::pair<Poly, unsigned>> factors;  // primitive, non-constant
  Poly expand() const;
};

/// Partial factorization: rational and monomial content, content with respect
/// to each variable, rational roots of univariate polynomials and quadratics
/// (in some variable) whose discriminant is a perfect square. Factors that no
/// rule splits are returned whole.
Factorization factor(const Poly& f);

struct UnivariateSplit {
  std::vector<std::pair<Rational, unsigned>> roots;
  bool fully_split = false;
};

/// Rational roots (with multiplicity) of a polynomial in the single variable x.
UnivariateSplit split_univariate(const Poly& f, VarId x);

/// Replaces y by -v/u in every polynomial, multiplied by u^deg_y(f) so the
/// result stays polynomial. u and v must not contain y.
std::vector<Poly> substitute_homogenize(std::span<const Poly> polys, VarId y, const Poly& u, const Poly& v);
Poly substitute_homogenize(const Poly& f, VarId y, const Poly& u, const Poly& v);

}  // namespace kvar
