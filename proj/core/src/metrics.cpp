#include "fondrec/metrics.hpp"

#include <algorithm>

namespace fondrec {

MetricRates metric_rates(const std::vector<Outcome> &outcomes) {
  if (outcomes.empty()) throw dataset_error("no outcomes to score");
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (const Outcome &o : outcomes) {
    if (o.hypothesis_count < 1)
      throw dataset_error("outcome needs a positive hypothesis count");
    if (static_cast<int>(o.argmax.size()) > o.hypothesis_count)
      throw dataset_error("argmax set larger than the hypothesis set");
    bool hit = std::find(o.argmax.begin(), o.argmax.end(), o.true_goal) !=
               o.argmax.end();
    tp += hit ? 1 : 0;
    fn += hit ? 0 : 1;
    fp += static_cast<double>(o.argmax.size()) - (hit ? 1 : 0);
    tn += static_cast<double>(o.hypothesis_count - 1) -
          (static_cast<double>(o.argmax.size()) - (hit ? 1 : 0));
  }
  MetricRates r;
  if (tp + fn > 0) {
    r.tpr = tp / (tp + fn);
    r.fnr = 1.0 - r.tpr;
  } else {
    r.zero_denominator.push_back("tpr");
    r.zero_denominator.push_back("fnr");
  }
  if (fp + tn > 0)
    r.fpr = fp / (fp + tn);
  else
    r.zero_denominator.push_back("fpr");
  if (tp + fp > 0 && tp + fn > 0) {
    double prec = tp / (tp + fp);
    double rec = tp / (tp + fn);
    if (prec + rec > 0)
      r.f1 = 2.0 * prec * rec / (prec + rec);
    else
      r.zero_denominator.push_back("f1");
  } else {
    r.zero_denominator.push_back("f1");
  }
  return r;
}

double ranked_first(const std::vector<OnlineStep> &steps,
                    const std::string &true_goal) {
  if (steps.empty()) throw dataset_error("no online steps to score");
  std::size_t hits = 0;
  for (const OnlineStep &s : steps)
    if (s.argmax.size() == 1 && s.argmax[0] == true_goal) ++hits;
  return static_cast<double>(hits) / static_cast<double>(steps.size());
}

}  // namespace fondrec
