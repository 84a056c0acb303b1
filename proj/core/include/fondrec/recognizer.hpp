#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fondrec/compile.hpp"
#include "fondrec/ground.hpp"
#include "fondrec/ltl.hpp"
#include "fondrec/pddl.hpp"
#include "fondrec/planner.hpp"

namespace fondrec {

// Malformed recognition inputs: empty hypothesis or observation lists,
// duplicate ids, observations that are not ground actions, bad priors or
// external policies. Compilation and planning failures keep their own types.
struct recognizer_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One candidate temporal goal.
struct Hypothesis {
  std::string id;
  FormulaPtr formula;
};

// A recognition instance: the source FOND problem supplies the initial state
// and objects (its own goal field is ignored), hypotheses are the candidate
// goals, observations are ground action texts like "(move 11 21)" in
// execution order. true_goal names the hidden goal when known; evaluation
// uses it, inference never does.
struct RecognitionProblem {
  DomainModel domain;
  ProblemModel problem;
  std::vector<Hypothesis> hypotheses;
  std::string true_goal;
  std::vector<std::string> observations;
};

// Per-goal distance table: mean number of actions remaining after each
// action across the goal's executions. Actions outside the table cost the
// miss distance.
struct DistanceTable {
  std::map<std::string, double> d;
  double miss = std::exp(5.0);

  double at(const std::string &action) const {
    auto it = d.find(action);
    return it == d.end() ? miss : it->second;
  }
};

// Pairs (a, b) such that a occurs strictly before b in at least one
// execution of the goal's policy.
using OrderRelation = std::set<std::pair<std::string, std::string>>;

// Everything the scoring stage needs about one hypothesis, produced by the
// planning stage once and reused for every observation prefix.
struct GoalTables {
  std::string id;
  DistanceTable dist;
  OrderRelation order;
  std::vector<std::vector<std::string>> executions;  // source-world sequences
  bool solvable = true;
  std::vector<std::string> warnings;
};

DistanceTable average_distances(
    const std::vector<std::vector<std::string>> &executions);
OrderRelation order_relation(
    const std::vector<std::vector<std::string>> &executions);

// 1 when a preceding observation exists and the pair never appears in
// order, else 0.
int penalty(const std::optional<std::string> &o_prev, const std::string &o_curr,
            const OrderRelation &order);

// e^penalty * d_gi(o_curr) / sum over all goals of d(o_curr). A zero
// denominator (every goal ends on o_curr) scores 0.
double estimated_score(std::size_t gi, const std::optional<std::string> &o_prev,
                       const std::string &o_curr,
                       const std::vector<GoalTables> &tables);

// Mean estimated score over the observation sequence; empty sequences have
// no defined average and throw.
double average_estimated_score(std::size_t gi,
                               const std::vector<std::string> &observations,
                               const std::vector<GoalTables> &tables);

inline double likelihood(double avg_score) { return 1.0 / (1.0 + avg_score); }

// Bayes step: posterior_i proportional to likelihood_i * prior_i. Empty
// priors mean uniform; scaling all priors by a positive constant leaves the
// result unchanged.
std::vector<double> normalize_posterior(const std::vector<double> &likelihoods,
                                        std::vector<double> priors = {});

struct RecognizeOptions {
  CompileOptions compile;
  PlannerOptions planner;
  int loop_bound = 1;              // executions re-enter a loop at most once
  std::size_t max_executions = 100000;
  std::vector<double> priors;      // hypothesis order; empty = uniform
  // Externally supplied policies by hypothesis id, as policy JSON. Space
  // "original" policies are unrolled until undefined and filtered by
  // model-checking each induced trace; space "compiled" policies must solve
  // the compiled problem. Hypotheses without an entry are planned for.
  std::map<std::string, std::string> policies;
  int jobs = 1;                    // parallel per-hypothesis pipelines
};

// Planning stage for one hypothesis: compile, solve, enumerate, strip, and
// summarize into distance and order tables. Unsolvable hypotheses come back
// with empty tables (every lookup misses) and a warning, not an error.
GoalTables build_goal_tables(const RecognitionProblem &t, const Hypothesis &h,
                             const RecognizeOptions &opts = {});

struct GoalResult {
  std::string id;
  bool solvable = true;
  double avg_score = 0.0;
  double likelihood = 0.0;
  double prior = 0.0;      // normalized
  double posterior = 0.0;
  std::vector<double> scores;  // one per observation
  std::vector<int> penalties;  // one per observation, 0 or 1
};

struct RecognitionResult {
  std::vector<GoalResult> goals;    // hypothesis order
  std::vector<std::string> argmax;  // ids sharing the top posterior
  std::vector<std::string> warnings;
};

struct OnlineStep {
  int prefix = 0;  // observations revealed so far
  std::vector<double> likelihoods;
  std::vector<double> posteriors;
  std::vector<std::string> argmax;
};

struct OnlineResult {
  std::vector<std::string> ids;
  std::vector<OnlineStep> steps;  // one per prefix 1..|Obs|
  std::vector<std::string> warnings;
};

// All observations at once: one ranking over the hypotheses.
RecognitionResult recognize_offline(const RecognitionProblem &t,
                                    const RecognizeOptions &opts = {});

// Observations revealed one at a time: a ranking per prefix. The planning
// stage runs once and is shared across prefixes.
OnlineResult recognize_online(const RecognitionProblem &t,
                              const RecognizeOptions &opts = {});

std::string result_to_json(const RecognitionResult &r);
std::string online_to_json(const OnlineResult &r);

}  // namespace fondrec
