#pragma once

#include <string>
#include <vector>

#include "fondrec/dataset.hpp"
#include "fondrec/recognizer.hpp"

namespace fondrec {

// One recognition problem's outcome for confusion accounting.
struct Outcome {
  std::string true_goal;
  std::vector<std::string> argmax;  // goals sharing the top posterior
  int hypothesis_count = 0;
};

// Aggregated rates. A goal counts as recognized iff it is in the argmax
// set, so ties inflate the false-positive side. Rates whose denominator is
// zero are reported as 0 and named in zero_denominator.
struct MetricRates {
  double tpr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;  // always exactly 1 - tpr when defined
  double f1 = 0.0;
  std::vector<std::string> zero_denominator;
};

MetricRates metric_rates(const std::vector<Outcome> &outcomes);

// Fraction of steps whose unique top-1 goal is the hidden one; ties count
// as not-first. Throws dataset_error on an empty ranking list.
double ranked_first(const std::vector<OnlineStep> &steps,
                    const std::string &true_goal);

}  // namespace fondrec
