#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fondrec/dfa.hpp"
#include "fondrec/ltl.hpp"
#include "fondrec/pddl.hpp"
#include "fondrec/planner.hpp"

namespace fondrec {

// Formula/domain mismatches, reserved-name collisions, broken alternation.
// Automaton construction limits surface as dfa_error.
struct compile_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompileOptions {
  DfaOptions dfa;
  // Skip lifting: 0-ary state fluents and a parameterless trans. The default
  // replaces each object of interest with a fresh variable.
  bool ground_only = false;
};

// Augmented planning problem plus everything needed to interpret its
// solutions back in the source world.
struct CompiledProblem {
  DomainModel domain;    // gated originals + trans
  ProblemModel problem;  // init', goal'
  FormulaPtr formula;    // source temporal goal
  Pdfa pdfa;             // mapping is empty in ground-only mode
  std::vector<std::string> objects;  // objects of interest, formula order
  std::vector<std::string> vars;     // fresh variables, same order (empty in
                                     // ground-only mode)
  std::vector<std::string> state_fluents;  // q0..qn, automaton state order
  bool ground_only = false;
};

// Fuses the formula's automaton into domain/problem: automaton-state fluents
// plus turnDomain alternate one original action with one trans step; init'
// starts the automaton on the initial state's symbol; goal' asks for an
// accepting fluent with turnDomain set.
CompiledProblem compile(const DomainModel &d, const ProblemModel &p,
                        const FormulaPtr &f, const CompileOptions &opts = {});

// Drop the trans steps from a compiled action sequence (display forms like
// "(move 11 21)"). The sequence must alternate original/trans starting with
// an original action; trailing trans optional, prefixes allowed.
std::vector<std::string> strip(const std::vector<std::string> &actions);

// Source-world trace induced by one compiled execution: the states where
// turnDomain holds (the initial one included), automaton fluents projected
// away. mc must be ground(cp.domain, cp.problem).
Trace induced_trace(const CompiledProblem &cp, const FondModel &mc,
                    const Execution &e);

// Grounds the compiled problem, validates the policy as strong-cyclic,
// enumerates its executions, and model-checks every induced trace against
// the source formula. Capped enumeration counts as failure.
bool check_policy_satisfies(const CompiledProblem &cp, const Policy &policy,
                            int loop_bound = 1);

}  // namespace fondrec
