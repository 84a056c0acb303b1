#pragma once

// Shared helpers for unit and acceptance tests: seeded random formula
// generation, exhaustive trace enumeration, DFA well-formedness checks.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fondrec/dfa.hpp"
#include "fondrec/ltl.hpp"

namespace testutil {

inline std::uint64_t pick(std::mt19937_64 &rng, std::uint64_t n) {
  // Unbiased enough for tests; n is tiny.
  return rng() % n;
}

inline fondrec::FormulaPtr random_formula(std::mt19937_64 &rng, int depth,
                                          fondrec::Dialect dialect,
                                          const std::vector<std::string> &atoms) {
  using namespace fondrec;
  if (depth <= 0 || pick(rng, 5) == 0) {
    std::uint64_t c = pick(rng, atoms.size() + 2);
    if (c == atoms.size()) return f_tt();
    if (c == atoms.size() + 1) return f_ff();
    return f_atom(Atom{atoms[c], {}}, dialect);
  }
  static const FKind future_ops[] = {FKind::not_,     FKind::and_,
                                     FKind::or_,      FKind::next,
                                     FKind::weak_next, FKind::until,
                                     FKind::eventually, FKind::always};
  static const FKind past_ops[] = {FKind::not_,   FKind::and_, FKind::or_,
                                   FKind::before, FKind::since, FKind::once,
                                   FKind::historically};
  FKind k = dialect == Dialect::ltlf ? future_ops[pick(rng, 8)]
                                     : past_ops[pick(rng, 7)];
  FormulaPtr l = random_formula(rng, depth - 1, dialect, atoms);
  switch (k) {
    case FKind::not_:
      return f_not(l);
    case FKind::and_:
    case FKind::or_:
    case FKind::until:
    case FKind::since:
      return f_binary(k, l, random_formula(rng, depth - 1, dialect, atoms));
    default:
      return f_unary(k, l);
  }
}

inline std::vector<fondrec::Trace> all_traces(const std::vector<std::string> &atoms,
                                              int max_len) {
  using namespace fondrec;
  std::vector<Step> steps;
  std::size_t k = atoms.size();
  for (std::uint32_t m = 0; m < (1u << k); ++m) {
    Step s;
    for (std::size_t i = 0; i < k; ++i)
      if ((m >> i) & 1) s.insert(atoms[i]);
    steps.push_back(std::move(s));
  }
  std::vector<Trace> out;
  std::vector<Trace> level;
  for (const Step &s : steps) level.push_back(Trace{s});
  for (int len = 1; len <= max_len; ++len) {
    for (const Trace &t : level) out.push_back(t);
    if (len == max_len) break;
    std::vector<Trace> next;
    next.reserve(level.size() * steps.size());
    for (const Trace &t : level)
      for (const Step &s : steps) {
        Trace n = t;
        n.push_back(s);
        next.push_back(std::move(n));
      }
    level = std::move(next);
  }
  return out;
}

// Totality + determinism: for each state, over the state's own guard atoms,
// exactly one guard fires per valuation (unmentioned atoms cannot matter).
inline bool dfa_well_formed(const fondrec::Dfa &d, std::string *why = nullptr) {
  using namespace fondrec;
  for (int s = 0; s < d.num_states(); ++s) {
    std::vector<Atom> atoms;
    for (const auto &[g, t] : d.trans[s]) {
      std::vector<Atom> ga;
      const std::function<void(const Guard &)> walk = [&](const Guard &g2) {
        if (g2.k == Guard::K::atom) ga.push_back(g2.atom);
        for (const Guard &kid : g2.kids) walk(kid);
      };
      walk(g);
      for (const Atom &a : ga)
        if (std::find(atoms.begin(), atoms.end(), a) == atoms.end())
          atoms.push_back(a);
    }
    std::size_t k = atoms.size();
    for (std::uint32_t m = 0; m < (1u << k); ++m) {
      Step step;
      for (std::size_t i = 0; i < k; ++i)
        if ((m >> i) & 1) step.insert(atoms[i].key());
      int fired = 0;
      for (const auto &[g, t] : d.trans[s])
        if (g.eval(step)) ++fired;
      if (fired != 1) {
        if (why)
          *why = "state " + std::to_string(s) + ": " + std::to_string(fired) +
                 " guards fired";
        return false;
      }
    }
  }
  return true;
}

}  // namespace testutil
