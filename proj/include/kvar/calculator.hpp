#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "kvar/constructible.hpp"
#include "kvar/qpoly.hpp"

namespace kvar {

class KvarError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An equation purely in base variables survived simplification.
class BaseRestrictedClass : public KvarError {
 public:
  using KvarError::KvarError;
};

class NonTerminating : public KvarError {
 public:
  using KvarError::KvarError;
};

/// A would-be basis generator whose class is not a single symbol.
class NotPrime : public KvarError {
 public:
  using KvarError::KvarError;
};

class TooLarge : public KvarError {
 public:
  using KvarError::KvarError;
};

/// Symbols are identified by the canonical key of the set they stand for.
using SymbolId = std::string;

/// Finite sum of q-polynomial multiples of symbols.
class VirtualClass {
 public:
  VirtualClass() = default;
  VirtualClass(const SymbolId& s, QPoly c);

  const std::map<SymbolId, QPoly>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  // The coefficient when the class is a multiple of the single symbol s (or zero).
  std::optional<QPoly> multiple_of(const SymbolId& s) const;
  QPoly coeff(const SymbolId& s) const;

  VirtualClass& operator+=(const VirtualClass& o);
  VirtualClass& operator-=(const VirtualClass& o);
  friend VirtualClass operator+(VirtualClass a, const VirtualClass& b) { return a += b; }
  friend VirtualClass operator-(VirtualClass a, const VirtualClass& b) { return a -= b; }
  VirtualClass scaled(const QPoly& c) const;
  friend bool operator==(const VirtualClass& a, const VirtualClass& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const VirtualClass& a, const VirtualClass& b) { return !(a == b); }

 private:
  std::map<SymbolId, QPoly> terms_;
  void add(const SymbolId& s, const QPoly& c);
};

struct SymbolInfo {
  std::string label;   // display label, e.g. "S@C3"; empty for the unit of the point
  std::string chart;   // chart label
  bool unit = false;
  bool generator = false;  // labelled through register_generator
};

/// Thread-safe table of symbols keyed by canonical set key.
class SymbolRegistry {
 public:
  // Returns the existing symbol for the key or creates a fresh one.
  SymbolId intern(const std::string& key, const std::string& chart_label, bool* created = nullptr);
  SymbolId unit(const Chart& chart);
  void set_label(const SymbolId& id, const std::string& label);
  bool contains(const SymbolId& id) const;
  SymbolInfo info(const SymbolId& id) const;
  std::string label(const SymbolId& id) const;
  std::optional<SymbolId> find_label(const std::string& label) const;
  ConstructibleSet set_of(const SymbolId& id) const { return set_from_key(id); }
  std::vector<SymbolId> ids() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<SymbolId, SymbolInfo> symbols_;
};

/// Thread-safe memo table. Concurrent writers store identical values.
class MemoCache {
 public:
  std::optional<VirtualClass> lookup(const std::string& key);
  void store(const std::string& key, const VirtualClass& value);
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  std::size_t size() const;
  std::map<std::string, VirtualClass> snapshot() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, VirtualClass> table_;
  std::atomic<std::size_t> hits_{0}, misses_{0};
};

enum class Strategy {
  kSmallest,  // first candidate by (degree, terms, print)
  kLargest,
};

/// Changes whenever a change to the decomposition can alter cached classes
/// or symbol keys; persisted caches with another stamp are ignored.
inline constexpr const char* kAlgorithmRevision = "kvar-calc-7";

struct CalcOptions {
  Strategy strategy = Strategy::kSmallest;
  bool use_cache = true;
  bool scaling = true;
  bool create_symbols = true;
  unsigned max_depth = 512;
};

struct SimplifyResult {
  bool empty = false;
  ConstructibleSet set;
};

class Calculator {
 public:
  Calculator(SymbolRegistry& registry, MemoCache& cache, CalcOptions options = {})
      : registry_(registry), cache_(cache), opt_(options) {}

  SimplifyResult simplify(const ConstructibleSet& x) const;
  VirtualClass class_of(const ConstructibleSet& x);
  VirtualClass fiber_product(const VirtualClass& a, const VirtualClass& b);
  SymbolId register_generator(const std::string& label, const ConstructibleSet& x);

  // Symbols of the class that were created by the calculator rather than registered.
  std::vector<SymbolId> unregistered_symbols(const VirtualClass& c) const;
  std::string print(const VirtualClass& c) const;

  const CalcOptions& options() const { return opt_; }
  SymbolRegistry& registry() { return registry_; }
  MemoCache& cache() { return cache_; }

 private:
  SymbolRegistry& registry_;
  MemoCache& cache_;
  CalcOptions opt_;

  VirtualClass class_rec(const ConstructibleSet& x, unsigned depth, bool split_components);
  VirtualClass decompose(const ConstructibleSet& x, unsigned depth);
  VirtualClass product_rec(const VirtualClass& a, const VirtualClass& b, unsigned depth);
  VirtualClass symbol_product(const SymbolId& a, const SymbolId& b, unsigned depth);
  std::vector<Poly> ordered(std::vector<Poly> polys, const ConstructibleSet& x) const;
};

/// Brute-force count of F_p points of the total space (base and fiber).
std::uint64_t count_points(const ConstructibleSet& x, std::uint64_t p, double bound = 1e8);

/// Sum of coeff(p) times the point count of each symbol's set.
Integer count_class(const VirtualClass& c, std::uint64_t p, double bound = 1e8);

}  // namespace kvar
