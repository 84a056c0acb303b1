#pragma once

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fondrec {

// A term is an object constant ("51") or, inside lifted automata only, a
// variable ("x").
struct Term {
  std::string name;
  bool is_var = false;

  bool operator==(const Term &o) const {
    return is_var == o.is_var && name == o.name;
  }
  bool operator<(const Term &o) const {
    if (is_var != o.is_var) return is_var < o.is_var;
    return name < o.name;
  }
};

struct Atom {
  std::string name;
  std::vector<Term> args;

  bool operator==(const Atom &o) const {
    return name == o.name && args == o.args;
  }
  bool operator<(const Atom &o) const {
    if (name != o.name) return name < o.name;
    return args < o.args;
  }
  // Canonical text form: "vAt(51)", "handempty". Used as the trace/guard key.
  std::string key() const;
};

enum class Dialect { ltlf, ppltl };

enum class FKind {
  tt,
  ff,
  atom,
  not_,
  and_,
  or_,
  next,
  weak_next,
  until,
  eventually,
  always,
  before,
  since,
  once,
  historically,
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FKind kind = FKind::tt;
  Atom atom;             // kind == atom
  FormulaPtr lhs, rhs;   // unary ops use lhs only
  Dialect dialect = Dialect::ltlf;
};

FormulaPtr f_tt();
FormulaPtr f_ff();
FormulaPtr f_atom(Atom a, Dialect d = Dialect::ltlf);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_and(FormulaPtr l, FormulaPtr r);
FormulaPtr f_or(FormulaPtr l, FormulaPtr r);
FormulaPtr f_unary(FKind k, FormulaPtr f);
FormulaPtr f_binary(FKind k, FormulaPtr l, FormulaPtr r);

bool equal(const FormulaPtr &a, const FormulaPtr &b);

// One trace step: the set of true ground atoms, by Atom::key().
using Step = std::set<std::string>;
using Trace = std::vector<Step>;

struct parse_error : std::runtime_error {
  std::size_t pos;
  parse_error(const std::string &msg, std::size_t pos_)
      : std::runtime_error(msg), pos(pos_) {}
};

// Mixed-tense formulas, wrong-dialect operators, empty traces.
struct semantic_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grammar (ASCII): atoms [a-zA-Z_][a-zA-Z0-9_-]* with optional (arg,...);
// future ops ! & | X WX U F G, past ops Y S O H; keywords true/false;
// precedence unary > U/S > & > |, U/S right-associative.
FormulaPtr parse_formula(const std::string &text, Dialect dialect);

std::string print_formula(const FormulaPtr &f);

// Rewrites to core operators only: {atom,true,false,not,and,next,until} for
// the future dialect, {atom,true,false,not,and,before,since} for the past.
FormulaPtr desugar(const FormulaPtr &f);

bool holds_at(const FormulaPtr &f, const Trace &t, std::size_t i);

// Future formulas are evaluated at position 0, past formulas at the last.
bool holds(const FormulaPtr &f, const Trace &t);

// All atoms occurring in f, in first-occurrence order.
std::vector<Atom> formula_atoms(const FormulaPtr &f);

// Object constants occurring in f's atom arguments, first-occurrence order,
// deduplicated. These are the compilation's "objects of interest".
std::vector<std::string> formula_objects(const FormulaPtr &f);

}  // namespace fondrec
