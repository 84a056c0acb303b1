#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fondrec/dfa.hpp"
#include "fondrec/ltl.hpp"

namespace fondrec {

struct pddl_error : std::runtime_error {
  int line = 0, col = 0;
  pddl_error(const std::string &msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

struct unsupported_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct type_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// PDDL name with an optional type ("object" when omitted).
struct TypedName {
  std::string name;
  std::string type = "object";
  bool operator==(const TypedName &) const = default;
};

struct Predicate {
  std::string name;
  std::vector<TypedName> params;
  bool operator==(const Predicate &) const = default;
};

struct Literal {
  Atom atom;
  bool positive = true;
  bool operator==(const Literal &) const = default;
};

// Conditions (preconditions, when-guards, goals) reuse the automata guard
// representation: boolean structure over atoms. DFA guards drop into `when`
// clauses unchanged.
using Cond = Guard;

// Effect tree. `oneof` is only legal at the top level (possibly under and);
// `when` holds literal effects only.
struct Eff {
  enum class K { lit, and_, oneof, when };
  K k = K::and_;
  Literal lit;           // k == lit
  Cond cond;             // k == when
  std::vector<Eff> kids; // and_/oneof children; when: then-effects
  bool operator==(const Eff &) const = default;
};

Eff e_lit(Literal l);
Eff e_and(std::vector<Eff> kids);
Eff e_oneof(std::vector<Eff> kids);
Eff e_when(Cond c, std::vector<Eff> then_lits);

struct ActionSchema {
  std::string name;
  std::vector<TypedName> params;
  Cond pre;  // conjunction of literals
  Eff eff;
  bool operator==(const ActionSchema &) const = default;
};

struct DomainModel {
  std::string name;
  std::vector<std::string> requirements;
  std::vector<TypedName> types;      // name + parent type
  std::vector<TypedName> constants;
  std::vector<Predicate> predicates;
  std::vector<ActionSchema> actions;
  bool operator==(const DomainModel &) const = default;
};

struct ProblemModel {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<Atom> init;  // ground atoms
  Cond goal;               // conjunction of ground literals, plus at most
                           // one disjunction node (compiled goals)
  bool operator==(const ProblemModel &) const = default;
};

DomainModel parse_domain(const std::string &text);
ProblemModel parse_problem(const std::string &text);

// Reflexive-transitive check against d.types; "object" is the universal
// supertype. Throws type_error on a cyclic hierarchy.
bool is_subtype(const DomainModel &d, const std::string &sub,
                const std::string &super);

std::string print_domain(const DomainModel &d);
std::string print_problem(const ProblemModel &p);

// S-expression forms of conditions/atoms, e.g. "(not (vAt ?x))".
std::string print_cond_sexpr(const Cond &c);
std::string print_atom_sexpr(const Atom &a);

}  // namespace fondrec
