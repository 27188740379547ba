#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "kvar/calculator.hpp"
#include "kvar/groups.hpp"
#include "kvar/qpoly.hpp"

namespace kvar {

enum class Bordism { kN, kL };

std::string to_string(Bordism b);

/// An entry class has a symbol outside the generators of its target stratum.
class BasisClosureError : public KvarError {
 public:
  using KvarError::KvarError;
};

/// A quantity that must be a polynomial in q kept a denominator.
class NonPolynomialResult : public KvarError {
 public:
  using KvarError::KvarError;
};

using RMatrix = std::vector<std::vector<RatFunc>>;

RMatrix identity_rmatrix(std::size_t n);
RMatrix multiply(const RMatrix& a, const RMatrix& b);
RMatrix power(const RMatrix& m, unsigned e);
// Rank over Q(q) by fraction-free (Bareiss) elimination.
std::size_t rank(const RMatrix& m);
RMatrix transpose(const RMatrix& m);
// Column j of m, as a vector.
std::vector<RatFunc> column(const RMatrix& m, std::size_t j);

/// Square matrix over Q(q) in a labelled generator basis. Rows are targets,
/// columns sources. With g_factor set the matrix stands for [G] * m.
struct TqftMatrix {
  std::vector<std::string> labels;
  RMatrix m;
  bool g_factor = false;

  std::size_t size() const { return labels.size(); }
  std::size_t index(std::string_view label) const;
  const RatFunc& at(std::string_view row, std::string_view col) const { return m[index(row)][index(col)]; }
};

struct TqftOptions {
  CalcOptions calc;
  bool fiber_split = false;
  unsigned workers = 0;  // 0: KVAR_WORKERS, else the hardware concurrency
};

unsigned default_workers();

/// Entry sets and transfer matrices for one stratification. Registers the
/// generators of every stratum on construction.
class TqftContext {
 public:
  TqftContext(Stratification strat, SymbolRegistry& registry, MemoCache& cache, TqftOptions options = {});

  const Stratification& strat() const { return strat_; }
  const std::vector<SymbolId>& generator_ids() const { return gen_ids_; }
  Calculator calculator() const { return Calculator(registry_, cache_, opt_.calc); }
  const TqftOptions& options() const { return opt_; }

  // {(generator cover, B, A...) : B in stratum of the source generator,
  //  w in target stratum}, over the chart of the target stratum.
  ConstructibleSet build_entry_set(Bordism b, std::size_t source, std::size_t target) const;
  // The pieces Y_k of the fiber-split form of an N entry, one per stratum k.
  ConstructibleSet build_split_piece(std::size_t source, std::size_t target, std::size_t k) const;

  VirtualClass entry_class(Bordism b, std::size_t source, std::size_t target, Calculator& calc) const;
  // Coefficients of the target stratum's generators; BasisClosureError otherwise.
  std::vector<QPoly> decompose(const VirtualClass& c, std::size_t source, std::size_t target) const;

  TqftMatrix compute_Zpi(Bordism b) const;
  TqftMatrix compute_eta() const;

 private:
  Stratification strat_;
  SymbolRegistry& registry_;
  MemoCache& cache_;
  TqftOptions opt_;
  std::vector<SymbolId> gen_ids_;
  std::vector<QPoly> fibers_;  // fiber class per stratum

  // First variable after the cover and B coordinates of the source.
  VarId tail_offset(std::size_t source) const;
  // Shared part of an entry set: word = B * tail, tail in variables from tail_offset on.
  ConstructibleSet entry_frame(std::size_t source, std::size_t target, const FracMatrix& tail,
                               const std::vector<std::string>& tail_names, const std::vector<Poly>& tail_neqs) const;
};

/// Z_pi * eta^-1, column by column.
TqftMatrix reduce(const TqftMatrix& zpi, const TqftMatrix& eta);

/// (T1, T1) entry of M^r, where M is the stored reduced N matrix.
QPoly rep_variety_class(const TqftMatrix& reduced_n, unsigned r);

/// Closed forms for "u2t", "u3t", "gm", "u2", "u3".
QPoly closed_form(std::string_view group, unsigned r);

struct DiagReport {
  bool passed = true;
  std::vector<std::string> mismatches;  // "(row,col): lhs != rhs"
};

/// Checks M P = P D entrywise.
DiagReport verify_diagonalization(const RMatrix& m, const RMatrix& p, const RMatrix& d,
                                  const std::vector<std::string>& labels);

/// Group pattern behind a rep-variety name: the builtin groups, plus "u2"
/// and "u3", the full upper triangular groups.
GroupSpec rep_group(std::string_view name);

/// Number of tuples (A_1, ..., A_r) in G(F_p) with A_1^2 ... A_r^2 = 1.
std::uint64_t oracle_rep_count(const GroupSpec& g, unsigned r, std::uint64_t p);

/// Fixture file: labels plus named matrices of expression strings.
struct Fixture {
  std::string group;
  std::vector<std::string> labels;
  std::map<std::string, TqftMatrix> matrices;
  std::vector<QPoly> rep_classes;  // r = 1, 2, ...
};

Fixture load_fixture(const std::string& path);
/// data/fixtures/<group>.json under the configured data directory.
Fixture builtin_fixture(std::string_view group);

/// Entries where a and b differ, as "(row,col): got != want".
std::vector<std::string> compare_matrices(const TqftMatrix& got, const TqftMatrix& want);

}  // namespace kvar
