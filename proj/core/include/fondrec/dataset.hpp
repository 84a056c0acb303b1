#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fondrec/recognizer.hpp"

namespace fondrec {

// Template misuse, unusable domains, exhausted resample budgets.
struct dataset_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Goal shapes the generator draws from. Propositional slots fill the family
// skeleton:
//   conjunctive        s1 & s2            (past dialect: holds at the end)
//   eventually         F s1
//   ordered-eventually F(s1 & X(F s2))
//   until              s1 U s2
//   once               s1 & O(s2)
//   since              s1 & (!s2 S s3)
enum class Family {
  conjunctive,
  eventually,
  ordered_eventually,
  until,
  once,
  since,
};

std::string family_name(Family f);
Family family_from_name(const std::string &name);  // throws dataset_error

struct GoalTemplate {
  Family family = Family::eventually;
  std::vector<FormulaPtr> slots;  // ground propositional formulas
};

// Builds the family formula from the slots. Throws dataset_error when the
// slot count does not match the family (1 for eventually, 3 for since, 2
// otherwise); temporal operators inside slots surface as semantic_error.
FormulaPtr instantiate_template(const GoalTemplate &t);

// Order-preserving random subsequence holding round-half-up(level% of the
// actions), never fewer than one; level 100 is the identity. Deterministic
// in the seed across platforms.
std::vector<std::string> sample_observations(
    const std::vector<std::string> &execution, int level, std::uint64_t seed);

inline const std::vector<int> &observability_levels() {
  static const std::vector<int> levels = {10, 30, 50, 70, 100};
  return levels;
}

struct DatasetOptions {
  int hypotheses = 4;   // per problem, >= 4
  int max_tries = 400;  // resample attempts per problem
  CompileOptions compile;
  PlannerOptions planner;
  int loop_bound = 1;
  std::size_t max_executions = 100000;
};

// One generated recognition problem. The embedded RecognitionProblem keeps
// its observations field empty; pick a level from the map and copy it in to
// recognize at that observability.
struct DatasetEntry {
  RecognitionProblem problem;
  std::map<int, std::vector<std::string>> observations;  // level -> actions
  std::uint64_t seed = 0;  // entry seed everything above derives from
};

struct Dataset {
  std::string domain_name;
  Family family = Family::eventually;
  std::uint64_t seed = 0;
  std::vector<DatasetEntry> entries;
};

// Samples `count` recognition problems of one family: similar hypotheses
// over achievable atoms (order-sensitive families get swapped pairs), a
// hidden goal, one execution of its policy, and observations at every
// level. Problems where any hypothesis is unsolvable are discarded and
// redrawn; throws dataset_error when a problem exhausts its tries.
Dataset generate_dataset(const DomainModel &d, const ProblemModel &p,
                         Family family, int count, std::uint64_t seed,
                         const DatasetOptions &opts = {});

}  // namespace fondrec
