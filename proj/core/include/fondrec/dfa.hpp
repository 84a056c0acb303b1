#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fondrec/ltl.hpp"

namespace fondrec {

struct dfa_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Boolean formula over atoms, no temporal operators. Guards label DFA
// transitions and become PDDL when-conditions unchanged.
struct Guard {
  enum class K { tt, ff, atom, not_, and_, or_ };
  K k = K::tt;
  Atom atom;               // k == atom
  std::vector<Guard> kids; // not_: 1, and_/or_: >= 2

  bool eval(const Step &step) const;
  std::string text() const;
  bool operator==(const Guard &) const = default;
};

Guard g_tt();
Guard g_ff();
Guard g_atom(Atom a);
Guard g_not(Guard g);
Guard g_and(std::vector<Guard> kids);
Guard g_or(std::vector<Guard> kids);

struct Dfa {
  int initial = 0;
  std::vector<char> accepting;
  // Per state: mutually exclusive, exhaustive guards.
  std::vector<std::vector<std::pair<Guard, int>>> trans;
  // Alphabet atoms mentioned by any guard, sorted by key.
  std::vector<Atom> atoms;

  int num_states() const { return static_cast<int>(accepting.size()); }
};

struct DfaOptions {
  int state_cap = 10000;
  // Max distinct boolean atoms handled per state (truth-table width).
  int width_cap = 18;
};

// Exact construction: progression for the future dialect, subformula-value
// tracking for the past one. Result is total, deterministic, trimmed, and
// minimized.
Dfa compile_to_dfa(const FormulaPtr &f, const DfaOptions &opts = {});

bool accepts(const Dfa &d, const Trace &t);

// Language-equivalent minimum-state automaton (over non-empty traces; the
// empty trace's acceptance is not preserved, it is outside Trace semantics).
Dfa minimize(const Dfa &d, const DfaOptions &opts = {});

// object symbol -> variable symbol, insertion-ordered, injective both ways.
struct ObjectMapping {
  std::vector<std::pair<std::string, std::string>> pairs;

  const std::string *var_of(const std::string &obj) const;
  const std::string *obj_of(const std::string &var) const;
};

struct Pdfa {
  Dfa dfa;              // guards carry variable terms
  ObjectMapping mapping;
  std::vector<std::string> params; // variable tuple, mapping order
};

Pdfa lift_to_pdfa(const Dfa &d, const ObjectMapping &m);
Dfa ground_pdfa(const Pdfa &p, const std::map<std::string, std::string> &binding);

std::string to_dot(const Dfa &d, const std::string &name = "dfa");

}  // namespace fondrec
