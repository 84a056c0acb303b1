#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "fondrec/ground.hpp"

namespace fondrec {

struct planner_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Partial map state -> action id. Goal states are never mapped.
struct Policy {
  std::unordered_map<State, int, StateHash> act;

  bool defined_at(const State &s) const { return act.count(s) > 0; }
  int action_at(const State &s) const {
    auto it = act.find(s);
    return it == act.end() ? -1 : it->second;
  }
};

enum class PolicyMode { strong, strong_cyclic };

struct PlannerOptions {
  std::size_t state_cap = 1u << 20;  // interned states before giving up
  int max_repairs = 20000;           // weak-plan rounds before the exhaustive
                                     // fallback takes over
};

// Iterative determinize-plan-repair with an exhaustive fixpoint fallback.
// nullopt means proven unsolvable.
std::optional<Policy> solve_strong_cyclic(const FondModel &m,
                                          const PlannerOptions &opts = {});
// Least-fixpoint strong planning over the explicit reachable space.
std::optional<Policy> solve_strong(const FondModel &m,
                                   const PlannerOptions &opts = {});

// Exhaustive check of the policy graph from the initial state: every
// reachable non-goal state mapped to an applicable action, goal reachable
// from every node; strong mode additionally rejects cycles.
bool validate(const FondModel &m, const Policy &pi, PolicyMode mode);

struct Execution {
  std::vector<State> states;  // s0 .. sk
  std::vector<int> actions;   // one per transition
};

struct ExecutionSet {
  std::vector<Execution> execs;
  bool capped = false;  // enumeration hit the execution or step cap
};

struct EnumOptions {
  int loop_bound = 1;         // max extra traversals of any state on a path
  std::size_t cap = 100000;   // raw executions before giving up
  bool until_undefined = false;  // end executions where the policy has no
                                 // entry instead of at goal states
};

// Depth-first policy unrolling from the initial state; alternatives in
// declaration order; resulting set deduplicated by action sequence.
ExecutionSet enumerate_executions(const FondModel &m, const Policy &pi,
                                  const EnumOptions &opts = {});

// JSON forms. Policies: {"space": ..., "policy": [{"state": [atoms...],
// "action": {"name":..., "args": [...]}}]}, entries sorted by state.
// Executions: list of action-record lists.
std::string policy_to_json(const FondModel &m, const Policy &pi,
                           const std::string &space = "original");
Policy policy_from_json(const FondModel &m, const std::string &text,
                        std::string *space = nullptr);
std::string executions_to_json(const FondModel &m, const ExecutionSet &es);

}  // namespace fondrec
