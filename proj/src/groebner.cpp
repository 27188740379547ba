#include <algorithm>
#include <vector>

#include "kvar/algebra.hpp"

namespace kvar {

namespace {

struct Pair {
  std::size_t i, j;
  Monomial lcm;
};

Poly s_polynomial(const Poly& f, const Poly& g, const Monomial& lcm) {
  Poly a = f.times(lcm / f.lead_mono(), 1 / f.lead_coeff());
  Poly b = g.times(lcm / g.lead_mono(), 1 / g.lead_coeff());
  return a - b;
}

// Top-reduction followed by tail reduction; result is monic.
Poly reduce_full(const Poly& f, const std::vector<Poly>& basis, const std::vector<bool>& active) {
  Poly p = f;
  std::vector<Term> rem;
  while (!p.is_zero()) {
    bool divided = false;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (!active[k]) continue;
      const Poly& g = basis[k];
      if (g.lead_mono().divides(p.lead_mono())) {
        p -= g.times(p.lead_mono() / g.lead_mono(), p.lead_coeff() / g.lead_coeff());
        divided = true;
        break;
      }
    }
    if (!divided) {
      rem.push_back(p.lead());
      p -= Poly::monomial(p.lead_mono(), p.lead_coeff());
    }
  }
  return Poly::from_terms(std::move(rem)).monic();
}

}  // namespace

Poly normal_form(const Poly& f, std::span<const Poly> basis) { return remainder(f, basis); }

std::vector<Poly> reduced_groebner(std::span<const Poly> generators) {
  std::vector<Poly> basis;
  std::vector<bool> active;
  for (const auto& g : generators) {
    if (g.is_zero()) continue;
    if (g.is_constant()) return {Poly(1)};
    basis.push_back(g.monic());
    active.push_back(true);
  }
  if (basis.empty()) return {};
  std::sort(basis.begin(), basis.end(), [](const Poly& a, const Poly& b) { return a < b; });

  // Inter-reduce the input first so the pair set starts small.
  {
    std::vector<Poly> input = std::move(basis);
    basis.clear();
    active.clear();
    for (auto& g : input) {
      Poly r = reduce_full(g, basis, active);
      if (r.is_zero()) continue;
      if (r.is_constant()) return {Poly(1)};
      basis.push_back(std::move(r));
      active.push_back(true);
    }
  }

  std::vector<Pair> pairs;
  std::vector<std::vector<bool>> done;  // done[j][i] for i < j, pair already handled
  auto add_element = [&](Poly g) {
    std::size_t n = basis.size();
    basis.push_back(std::move(g));
    active.push_back(true);
    done.emplace_back(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) {
        done[n][i] = true;
        continue;
      }
      pairs.push_back({i, n, Monomial::lcm(basis[i].lead_mono(), basis[n].lead_mono())});
    }
    // Elements whose leading monomial is a multiple of the new one become redundant
    // for pair generation but stay available for reduction.
  };

  {
    std::vector<Poly> start = std::move(basis);
    basis.clear();
    active.clear();
    for (auto& g : start) add_element(std::move(g));
  }

  auto is_done = [&](std::size_t a, std::size_t b) {
    if (a == b) return true;
    if (a > b) std::swap(a, b);
    return static_cast<bool>(done[b][a]);
  };

  while (!pairs.empty()) {
    // Normal selection strategy: smallest lcm first.
    auto it = std::min_element(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
      return compare_degrevlex(x.lcm, y.lcm) < 0;
    });
    Pair p = *it;
    pairs.erase(it);
    done[p.j][p.i] = true;

    const Poly& f = basis[p.i];
    const Poly& g = basis[p.j];
    if (Monomial::coprime(f.lead_mono(), g.lead_mono())) continue;

    // Chain criterion.
    bool skip = false;
    for (std::size_t k = 0; k < basis.size() && !skip; ++k) {
      if (k == p.i || k == p.j) continue;
      if (!basis[k].lead_mono().divides(p.lcm)) continue;
      if (is_done(p.i, k) && is_done(p.j, k)) skip = true;
    }
    if (skip) continue;

    std::vector<bool> all(basis.size(), true);
    Poly r = reduce_full(s_polynomial(f, g, p.lcm), basis, all);
    if (r.is_zero()) continue;
    if (r.is_constant()) return {Poly(1)};
    add_element(std::move(r));
  }

  // Minimalize.
  std::vector<Poly> minimal;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    bool redundant = false;
    for (std::size_t k = 0; k < basis.size() && !redundant; ++k) {
      if (k == i) continue;
      const auto& mk = basis[k].lead_mono();
      const auto& mi = basis[i].lead_mono();
      if (mk.divides(mi) && (!(mk == mi) || k < i)) redundant = true;
    }
    if (!redundant) minimal.push_back(basis[i]);
  }
  // Interreduce tails.
  std::vector<Poly> reduced;
  reduced.reserve(minimal.size());
  for (std::size_t i = 0; i < minimal.size(); ++i) {
    std::vector<Poly> others;
    for (std::size_t k = 0; k < minimal.size(); ++k)
      if (k != i) others.push_back(minimal[k]);
    const Poly& g = minimal[i];
    Poly tail = g - Poly::monomial(g.lead_mono(), g.lead_coeff());
    Poly r = Poly::monomial(g.lead_mono(), g.lead_coeff()) + remainder(tail, others);
    reduced.push_back(r.monic());
  }
  std::sort(reduced.begin(), reduced.end(),
            [](const Poly& a, const Poly& b) { return compare_degrevlex(a.lead_mono(), b.lead_mono()) > 0; });
  return reduced;
}

}  // namespace kvar
