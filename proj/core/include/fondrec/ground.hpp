#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fondrec/pddl.hpp"

namespace fondrec {

struct ground_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A state is a fixed-width bitset over the interned atom universe.
using State = std::vector<std::uint64_t>;

struct StateHash {
  std::size_t operator()(const State &s) const {
    std::size_t h = 1469598103934665603ull;
    for (std::uint64_t w : s) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return h;
  }
};

inline bool state_test(const State &s, int i) {
  return (s[i >> 6] >> (i & 63)) & 1;
}
inline void state_set(State &s, int i) { s[i >> 6] |= 1ull << (i & 63); }
inline void state_reset(State &s, int i) { s[i >> 6] &= ~(1ull << (i & 63)); }

struct AtomTable {
  std::vector<std::string> names;  // id -> canonical key, e.g. "vAt(51)"
  std::unordered_map<std::string, int> ids;

  int intern(const std::string &key) {
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(names.size());
    names.push_back(key);
    ids.emplace(key, id);
    return id;
  }
  int find(const std::string &key) const {
    auto it = ids.find(key);
    return it == ids.end() ? -1 : it->second;
  }
  int size() const { return static_cast<int>(names.size()); }
};

// Condition compiled to atom ids for fast evaluation against states. Atoms
// absent from the universe are constantly false.
struct GroundCond {
  enum class K { tt, ff, atom, not_, and_, or_ };
  K k = K::tt;
  int atom = -1;
  std::vector<GroundCond> kids;

  bool eval(const State &s) const;
};

GroundCond compile_cond(const Cond &c, AtomTable &atoms);

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  std::vector<int> pre_pos, pre_neg;
  struct CEff {
    GroundCond cond;  // tt for unconditional effects
    std::vector<int> add, del;
  };
  std::vector<std::vector<CEff>> alts;  // effect alternatives, source order

  // Display form "(move 11 21)".
  std::string text() const;
};

struct FondModel {
  AtomTable atoms;
  std::vector<GroundAction> actions;
  State init;
  GroundCond goal;

  int nwords() const { return static_cast<int>(init.size()); }
  State empty_state() const { return State(init.size(), 0); }
  bool applicable(const State &s, int a) const;
  // Successor under alternative k alone; no applicability check.
  State apply_alt(const State &s, int a, int k) const;
  // One successor per effect alternative; duplicates removed, first
  // occurrence order kept. Throws if a is inapplicable.
  std::vector<State> apply(const State &s, int a) const;
  bool is_goal(const State &s) const { return goal.eval(s); }
  int action_id(const std::string &text) const;  // -1 if absent
  Step to_step(const State &s) const;            // ground-atom key set
};

// Typed instantiation of every schema, relaxed-reachability pruning,
// deterministic ordering.
FondModel ground(const DomainModel &d, const ProblemModel &p);

}  // namespace fondrec
