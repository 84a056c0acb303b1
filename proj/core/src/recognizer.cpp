#include "fondrec/recognizer.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "json.hpp"

namespace fondrec {

namespace {

using nlohmann::json;

void check_problem(const RecognitionProblem &t, const RecognizeOptions &opts) {
  if (t.hypotheses.empty()) throw recognizer_error("no hypotheses");
  std::set<std::string> ids;
  for (const Hypothesis &h : t.hypotheses) {
    if (h.id.empty()) throw recognizer_error("hypothesis with empty id");
    if (!h.formula)
      throw recognizer_error("hypothesis " + h.id + " has no formula");
    if (!ids.insert(h.id).second)
      throw recognizer_error("duplicate hypothesis id " + h.id);
  }
  if (!t.true_goal.empty() && !ids.count(t.true_goal))
    throw recognizer_error("true goal " + t.true_goal +
                           " is not among the hypotheses");
  if (t.observations.empty())
    throw recognizer_error("no observations; the average score is undefined");
  if (!opts.priors.empty()) {
    if (opts.priors.size() != t.hypotheses.size())
      throw recognizer_error("got " + std::to_string(opts.priors.size()) +
                             " priors for " +
                             std::to_string(t.hypotheses.size()) +
                             " hypotheses");
    double sum = 0.0;
    for (double p : opts.priors) {
      if (p < 0.0) throw recognizer_error("negative prior");
      sum += p;
    }
    if (sum <= 0.0) throw recognizer_error("priors sum to zero");
  }
  for (const auto &kv : opts.policies)
    if (!ids.count(kv.first))
      throw recognizer_error("policy supplied for unknown hypothesis " +
                             kv.first);
  // Observations must name ground actions of the source problem.
  FondModel m = ground(t.domain, t.problem);
  for (const std::string &o : t.observations)
    if (m.action_id(o) < 0)
      throw recognizer_error("observation " + o +
                             " is not a ground action of the problem");
}

std::vector<std::string> action_texts(const FondModel &m, const Execution &e) {
  std::vector<std::string> out;
  out.reserve(e.actions.size());
  for (int a : e.actions) out.push_back(m.actions[a].text());
  return out;
}

// Planning stage via an externally supplied policy instead of the built-in
// planner. Original-space policies are unrolled to wherever they go
// undefined, and only executions whose state trace satisfies the hypothesis
// survive; compiled-space policies must be strong-cyclic solutions of the
// compiled problem and go through the usual strip.
void tables_from_policy(const RecognitionProblem &t, const Hypothesis &h,
                        const RecognizeOptions &opts, const std::string &text,
                        GoalTables &out,
                        std::vector<std::vector<std::string>> &seqs) {
  std::string space;
  try {
    json j = json::parse(text);
    space = j.value("space", std::string("original"));
  } catch (const json::exception &ex) {
    throw recognizer_error("policy for " + h.id + ": " + ex.what());
  }
  EnumOptions eo;
  eo.loop_bound = opts.loop_bound;
  eo.cap = opts.max_executions;
  if (space == "original") {
    FondModel m = ground(t.domain, t.problem);
    Policy pi = policy_from_json(m, text);
    eo.until_undefined = true;
    ExecutionSet es = enumerate_executions(m, pi, eo);
    if (es.capped)
      out.warnings.push_back("execution enumeration capped for " + h.id);
    for (const Execution &e : es.execs) {
      Trace tr;
      tr.reserve(e.states.size());
      for (const State &s : e.states) tr.push_back(m.to_step(s));
      if (!holds(h.formula, tr)) continue;
      seqs.push_back(action_texts(m, e));
    }
    if (seqs.empty()) {
      out.solvable = false;
      out.warnings.push_back("no execution of the supplied policy satisfies " +
                             h.id + "; scored with the miss distance");
    }
  } else if (space == "compiled") {
    CompiledProblem cp = compile(t.domain, t.problem, h.formula, opts.compile);
    FondModel m = ground(cp.domain, cp.problem);
    Policy pi = policy_from_json(m, text);
    if (!validate(m, pi, PolicyMode::strong_cyclic))
      throw recognizer_error("policy for " + h.id +
                             " does not solve the compiled problem");
    ExecutionSet es = enumerate_executions(m, pi, eo);
    if (es.capped)
      out.warnings.push_back("execution enumeration capped for " + h.id);
    for (const Execution &e : es.execs)
      seqs.push_back(strip(action_texts(m, e)));
  } else {
    throw recognizer_error("policy for " + h.id + " has unknown space \"" +
                           space + "\"");
  }
}

std::vector<GoalTables> build_all(const RecognitionProblem &t,
                                  const RecognizeOptions &opts) {
  std::size_t n = t.hypotheses.size();
  std::vector<GoalTables> out(n);
  int jobs = std::max(1, opts.jobs);
  if (jobs == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = build_goal_tables(t, t.hypotheses[i], opts);
    return out;
  }
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = build_goal_tables(t, t.hypotheses[i], opts);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < std::min<std::size_t>(jobs, n); ++k)
    pool.emplace_back(worker);
  for (std::thread &th : pool) th.join();
  for (std::size_t i = 0; i < n; ++i)
    if (errs[i]) std::rethrow_exception(errs[i]);
  return out;
}

std::vector<std::string> argmax_ids(const std::vector<std::string> &ids,
                                    const std::vector<double> &post) {
  double best = post[0];
  for (double v : post) best = std::max(best, v);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < post.size(); ++i)
    if (post[i] == best) out.push_back(ids[i]);
  return out;
}

}  // namespace

DistanceTable average_distances(
    const std::vector<std::vector<std::string>> &executions) {
  DistanceTable out;
  std::map<std::string, std::pair<double, int>> acc;  // sum, occurrences
  for (const std::vector<std::string> &e : executions)
    for (std::size_t i = 0; i < e.size(); ++i) {
      auto &slot = acc[e[i]];
      slot.first += static_cast<double>(e.size() - 1 - i);
      slot.second += 1;
    }
  for (const auto &kv : acc)
    out.d[kv.first] = kv.second.first / kv.second.second;
  return out;
}

OrderRelation order_relation(
    const std::vector<std::vector<std::string>> &executions) {
  OrderRelation out;
  for (const std::vector<std::string> &e : executions)
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::size_t j = i + 1; j < e.size(); ++j)
        out.insert({e[i], e[j]});
  return out;
}

int penalty(const std::optional<std::string> &o_prev, const std::string &o_curr,
            const OrderRelation &order) {
  if (!o_prev) return 0;
  return order.count({*o_prev, o_curr}) ? 0 : 1;
}

double estimated_score(std::size_t gi, const std::optional<std::string> &o_prev,
                       const std::string &o_curr,
                       const std::vector<GoalTables> &tables) {
  double den = 0.0;
  for (const GoalTables &g : tables) den += g.dist.at(o_curr);
  if (den == 0.0) return 0.0;
  int p = penalty(o_prev, o_curr, tables[gi].order);
  return std::exp(static_cast<double>(p)) * tables[gi].dist.at(o_curr) / den;
}

double average_estimated_score(std::size_t gi,
                               const std::vector<std::string> &observations,
                               const std::vector<GoalTables> &tables) {
  if (observations.empty())
    throw recognizer_error("no observations; the average score is undefined");
  double sum = 0.0;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    std::optional<std::string> prev;
    if (i > 0) prev = observations[i - 1];
    sum += estimated_score(gi, prev, observations[i], tables);
  }
  return sum / static_cast<double>(observations.size());
}

std::vector<double> normalize_posterior(const std::vector<double> &likelihoods,
                                        std::vector<double> priors) {
  if (likelihoods.empty()) throw recognizer_error("no likelihoods");
  if (priors.empty())
    priors.assign(likelihoods.size(), 1.0 / likelihoods.size());
  if (priors.size() != likelihoods.size())
    throw recognizer_error("prior count does not match likelihood count");
  std::vector<double> out(likelihoods.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (priors[i] < 0.0) throw recognizer_error("negative prior");
    out[i] = likelihoods[i] * priors[i];
    sum += out[i];
  }
  if (sum <= 0.0) throw recognizer_error("priors give every hypothesis zero weight");
  for (double &v : out) v /= sum;
  return out;
}

GoalTables build_goal_tables(const RecognitionProblem &t, const Hypothesis &h,
                             const RecognizeOptions &opts) {
  GoalTables out;
  out.id = h.id;
  std::vector<std::vector<std::string>> seqs;
  auto ext = opts.policies.find(h.id);
  if (ext != opts.policies.end()) {
    tables_from_policy(t, h, opts, ext->second, out, seqs);
  } else {
    CompiledProblem cp = compile(t.domain, t.problem, h.formula, opts.compile);
    FondModel m = ground(cp.domain, cp.problem);
    std::optional<Policy> pi = solve_strong_cyclic(m, opts.planner);
    if (!pi) {
      out.solvable = false;
      out.warnings.push_back("hypothesis " + h.id +
                             " admits no strong-cyclic policy; scored with "
                             "the miss distance");
    } else {
      EnumOptions eo;
      eo.loop_bound = opts.loop_bound;
      eo.cap = opts.max_executions;
      ExecutionSet es = enumerate_executions(m, *pi, eo);
      if (es.capped)
        out.warnings.push_back("execution enumeration capped for " + h.id);
      for (const Execution &e : es.execs)
        seqs.push_back(strip(action_texts(m, e)));
    }
  }
  out.dist = average_distances(seqs);
  out.order = order_relation(seqs);
  out.executions = std::move(seqs);
  return out;
}

RecognitionResult recognize_offline(const RecognitionProblem &t,
                                    const RecognizeOptions &opts) {
  check_problem(t, opts);
  std::vector<GoalTables> tables = build_all(t, opts);
  std::size_t n = t.hypotheses.size();
  std::size_t m = t.observations.size();

  RecognitionResult res;
  res.goals.resize(n);
  std::vector<double> lik(n);
  for (std::size_t gi = 0; gi < n; ++gi) {
    GoalResult &r = res.goals[gi];
    r.id = tables[gi].id;
    r.solvable = tables[gi].solvable;
    for (std::size_t i = 0; i < m; ++i) {
      std::optional<std::string> prev;
      if (i > 0) prev = t.observations[i - 1];
      r.scores.push_back(
          estimated_score(gi, prev, t.observations[i], tables));
      r.penalties.push_back(penalty(prev, t.observations[i], tables[gi].order));
    }
    r.avg_score = average_estimated_score(gi, t.observations, tables);
    r.likelihood = likelihood(r.avg_score);
    lik[gi] = r.likelihood;
    for (const std::string &w : tables[gi].warnings)
      res.warnings.push_back(w);
  }

  std::vector<double> priors = opts.priors;
  if (priors.empty()) priors.assign(n, 1.0 / n);
  double psum = 0.0;
  for (double p : priors) psum += p;
  std::vector<double> post = normalize_posterior(lik, opts.priors);
  std::vector<std::string> ids;
  for (std::size_t gi = 0; gi < n; ++gi) {
    res.goals[gi].prior = priors[gi] / psum;
    res.goals[gi].posterior = post[gi];
    ids.push_back(res.goals[gi].id);
  }
  res.argmax = argmax_ids(ids, post);
  return res;
}

OnlineResult recognize_online(const RecognitionProblem &t,
                              const RecognizeOptions &opts) {
  check_problem(t, opts);
  std::vector<GoalTables> tables = build_all(t, opts);
  std::size_t n = t.hypotheses.size();
  std::size_t m = t.observations.size();

  OnlineResult res;
  for (const GoalTables &g : tables) {
    res.ids.push_back(g.id);
    for (const std::string &w : g.warnings) res.warnings.push_back(w);
  }

  // Per-observation scores do not depend on the prefix length, so compute
  // them once and average over growing prefixes.
  std::vector<std::vector<double>> scores(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    std::optional<std::string> prev;
    if (i > 0) prev = t.observations[i - 1];
    for (std::size_t gi = 0; gi < n; ++gi)
      scores[gi][i] = estimated_score(gi, prev, t.observations[i], tables);
  }

  std::vector<double> running(n, 0.0);
  for (std::size_t k = 1; k <= m; ++k) {
    OnlineStep step;
    step.prefix = static_cast<int>(k);
    for (std::size_t gi = 0; gi < n; ++gi) {
      running[gi] += scores[gi][k - 1];
      step.likelihoods.push_back(
          likelihood(running[gi] / static_cast<double>(k)));
    }
    step.posteriors = normalize_posterior(step.likelihoods, opts.priors);
    step.argmax = argmax_ids(res.ids, step.posteriors);
    res.steps.push_back(std::move(step));
  }
  return res;
}

std::string result_to_json(const RecognitionResult &r) {
  json goals = json::array();
  for (const GoalResult &g : r.goals)
    goals.push_back(json{{"id", g.id},
                         {"solvable", g.solvable},
                         {"avg_score", g.avg_score},
                         {"likelihood", g.likelihood},
                         {"prior", g.prior},
                         {"posterior", g.posterior},
                         {"scores", g.scores},
                         {"penalties", g.penalties}});
  json j{{"goals", goals}, {"argmax", r.argmax}, {"warnings", r.warnings}};
  return j.dump(2);
}

std::string online_to_json(const OnlineResult &r) {
  json steps = json::array();
  for (const OnlineStep &s : r.steps)
    steps.push_back(json{{"prefix", s.prefix},
                         {"likelihoods", s.likelihoods},
                         {"posteriors", s.posteriors},
                         {"argmax", s.argmax}});
  json j{{"ids", r.ids}, {"steps", steps}, {"warnings", r.warnings}};
  return j.dump(2);
}

}  // namespace fondrec
