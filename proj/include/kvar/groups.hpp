#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kvar/calculator.hpp"
#include "kvar/constructible.hpp"

namespace kvar {

/// Quotient of polynomials, kept with gcd-reduced numerator and denominator.
class Frac {
 public:
  Frac() : num_(0), den_(1) {}
  Frac(Poly n) : num_(std::move(n)), den_(1) {}  // NOLINT(google-explicit-constructor)
  Frac(long c) : num_(c), den_(1) {}             // NOLINT(google-explicit-constructor)
  Frac(Poly n, Poly d);

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }

  Frac operator-() const { return Frac(-num_, den_); }
  friend Frac operator+(const Frac& a, const Frac& b);
  friend Frac operator-(const Frac& a, const Frac& b) { return a + (-b); }
  friend Frac operator*(const Frac& a, const Frac& b);
  friend Frac operator/(const Frac& a, const Frac& b);
  Frac pow(unsigned e) const;
  friend bool operator==(const Frac& a, const Frac& b) { return a.num_ * b.den_ == b.num_ * a.den_; }

  std::string str(const NameFn& names = default_var_name) const;

 private:
  Poly num_, den_;
  void reduce();
};

/// Value of p with every variable replaced through the callback.
Frac evaluate(const Poly& p, const std::function<Frac(VarId)>& value);

using FracMatrix = std::vector<std::vector<Frac>>;

FracMatrix identity_matrix(std::size_t n);
FracMatrix operator*(const FracMatrix& a, const FracMatrix& b);
Frac determinant(const FracMatrix& m);
// Adjugate over the determinant. Throws when the determinant is zero.
FracMatrix inverse(const FracMatrix& m);
FracMatrix map_entries(const FracMatrix& m, const std::function<Frac(const Frac&)>& f);

class StratError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix group given by an entry pattern of coordinates and constants.
/// Coordinate k is fiber variable k when matrices are built generically.
struct GroupSpec {
  std::string name;
  std::vector<std::string> coords;
  std::vector<std::vector<std::string>> pattern;  // coordinate name, "0" or "1"
  std::vector<std::string> nonzero;

  std::size_t size() const { return pattern.size(); }
  std::size_t coord_index(std::string_view name) const;
  std::pair<std::size_t, std::size_t> position(std::size_t coord) const;
  // Matrix whose coordinate k entry is value(k).
  FracMatrix element(const std::function<Frac(std::size_t)>& value) const;
  FracMatrix generic(VarId first_var) const;
  // Coordinate values read off a matrix in the group's pattern.
  std::vector<Frac> coordinates(const FracMatrix& m) const;
  std::vector<std::size_t> nonzero_indices() const;
};

struct Generator {
  std::string name;        // basis label, e.g. "S6"
  ConstructibleSet set;    // over the stratum chart; cover variables are fiber variables
  std::string label() const { return name + "@" + set.chart.label; }
};

/// Conjugacy-closed stratum. Equations use coordinate k as variable k.
struct Stratum {
  std::string name;
  Chart chart;
  std::vector<Poly> eqs, neqs;
  std::vector<std::pair<std::size_t, std::size_t>> proj;  // (chart variable, coordinate)
  FracMatrix sigma;  // entries in chart variables
  FracMatrix conj;   // entries in coordinates
  std::vector<Generator> generators;

  // Membership conditions for an element with the given coordinate values:
  // numerators of the equations and inequations.
  void membership(const std::vector<Frac>& coords, std::vector<Poly>& eqs_out, std::vector<Poly>& neqs_out) const;
  // Numerators of coordinate - chart variable for the projection, with chart
  // variable k mapped to chart_var(k).
  std::vector<Poly> ties(const std::vector<Frac>& coords, const std::function<Poly(std::size_t)>& chart_var) const;
};

struct Stratification {
  GroupSpec group;
  std::vector<Stratum> strata;

  std::size_t basis_size() const;
  std::vector<std::string> basis_labels() const;
  // (stratum, generator) for each basis position.
  std::vector<std::pair<std::size_t, std::size_t>> basis() const;
  std::string coord_name(VarId v) const;
};

/// Parses the .strat block format (see data/strat).
Stratification parse_strat(std::string_view text);
/// "u2t", "u3t" or "gm".
Stratification builtin_stratification(std::string_view name);
std::string builtin_strat_text(std::string_view name);

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string witness;
};

struct StratReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Section, conjugator, disjointness, covering and fiber-class checks.
StratReport verify_stratification(const Stratification& s, Calculator& calc);

/// Class of the group itself.
QPoly group_class(const Stratification& s, Calculator& calc);
/// Class of a stratum as a subset of the group.
QPoly stratum_class(const Stratification& s, std::size_t i, Calculator& calc);
/// Class of the fiber of pi_i over t = 2 (and s = 3 for two chart variables).
QPoly fiber_class(const Stratification& s, std::size_t i, Calculator& calc);
/// Set of elements of stratum i (over the point) with coordinates as fiber variables.
ConstructibleSet stratum_set(const Stratification& s, std::size_t i);

}  // namespace kvar
