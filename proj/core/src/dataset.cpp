#include "fondrec/dataset.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace fondrec {

namespace {

// Deterministic draws: std::uniform_int_distribution is
// implementation-defined, so index with the raw engine instead.
std::size_t roll(std::mt19937_64 &rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

// First k of a Fisher-Yates shuffle over a copy of the pool.
std::vector<std::string> draw(std::vector<std::string> pool, std::size_t k,
                              std::mt19937_64 &rng) {
  if (pool.size() < k) throw dataset_error("not enough candidate atoms");
  for (std::size_t i = 0; i + 1 < pool.size() && i < k; ++i)
    std::swap(pool[i], pool[i + roll(rng, pool.size() - i)]);
  pool.resize(k);
  return pool;
}

struct Pools {
  std::vector<std::string> achievable;       // added by some action
  std::vector<std::string> fresh;            // achievable and false at s0
  std::vector<std::string> initial_dynamic;  // true at s0, touched by actions
  std::map<std::string, std::vector<std::string>> by_pred;  // over fresh
};

Pools make_pools(const FondModel &m) {
  std::set<std::string> adds, touched;
  for (const GroundAction &a : m.actions)
    for (const auto &alt : a.alts)
      for (const auto &ce : alt) {
        for (int id : ce.add) {
          adds.insert(m.atoms.names[id]);
          touched.insert(m.atoms.names[id]);
        }
        for (int id : ce.del) touched.insert(m.atoms.names[id]);
      }
  Pools out;
  std::set<std::string> initial;
  for (int i = 0; i < m.atoms.size(); ++i)
    if (state_test(m.init, i)) initial.insert(m.atoms.names[i]);
  for (const std::string &k : adds) {
    out.achievable.push_back(k);
    if (!initial.count(k)) {
      out.fresh.push_back(k);
      out.by_pred[k.substr(0, k.find('('))].push_back(k);
    }
  }
  for (const std::string &k : initial)
    if (touched.count(k)) out.initial_dynamic.push_back(k);
  return out;
}

// Largest same-predicate pool that can cover the draw; similar goals come
// from one predicate whenever possible.
const std::vector<std::string> &similar_pool(const Pools &pools,
                                             std::size_t need) {
  const std::vector<std::string> *best = nullptr;
  for (const auto &kv : pools.by_pred)
    if (kv.second.size() >= need && (!best || kv.second.size() > best->size()))
      best = &kv.second;
  return best ? *best : pools.fresh;
}

std::vector<std::string> minus(std::vector<std::string> pool,
                               const std::vector<std::string> &drop) {
  pool.erase(std::remove_if(pool.begin(), pool.end(),
                            [&](const std::string &s) {
                              return std::find(drop.begin(), drop.end(), s) !=
                                     drop.end();
                            }),
             pool.end());
  return pool;
}

// Slot tuples for k hypotheses of one family. Order-sensitive families
// alternate a pivot atom with each partner in both roles, so every partner
// contributes a swapped pair.
std::vector<std::vector<std::string>> family_slots(Family fam, int k,
                                                   const Pools &pools,
                                                   std::mt19937_64 &rng) {
  std::vector<std::vector<std::string>> out;
  std::size_t half = (static_cast<std::size_t>(k) + 1) / 2;
  switch (fam) {
    case Family::eventually: {
      for (const std::string &a : draw(similar_pool(pools, k), k, rng))
        out.push_back({a});
      break;
    }
    case Family::conjunctive: {
      std::size_t m = 2;
      while (m * (m - 1) / 2 < static_cast<std::size_t>(k)) ++m;
      std::vector<std::string> atoms = draw(similar_pool(pools, m), m, rng);
      for (std::size_t j = 1; j < atoms.size() && out.size() < static_cast<std::size_t>(k); ++j)
        for (std::size_t i = 0; i < j && out.size() < static_cast<std::size_t>(k); ++i)
          out.push_back({atoms[i], atoms[j]});
      break;
    }
    case Family::until: {
      if (pools.initial_dynamic.empty())
        throw dataset_error("no initially true dynamic atom for until goals");
      std::string a = draw(pools.initial_dynamic, 1, rng)[0];
      std::vector<std::string> partners =
          draw(minus(similar_pool(pools, half + 1), {a}), half, rng);
      for (int t = 0; t < k; ++t) {
        const std::string &p = partners[t / 2];
        out.push_back(t % 2 == 0 ? std::vector<std::string>{a, p}
                                 : std::vector<std::string>{p, a});
      }
      break;
    }
    case Family::ordered_eventually:
    case Family::once: {
      std::vector<std::string> atoms =
          draw(similar_pool(pools, half + 1), half + 1, rng);
      std::string a = atoms[0];
      for (int t = 0; t < k; ++t) {
        const std::string &p = atoms[1 + t / 2];
        out.push_back(t % 2 == 0 ? std::vector<std::string>{a, p}
                                 : std::vector<std::string>{p, a});
      }
      break;
    }
    case Family::since: {
      std::vector<std::string> atoms =
          draw(similar_pool(pools, half + 3), half + 3, rng);
      std::string avoid = atoms[0];
      std::string a = atoms[1];
      for (int t = 0; t < k; ++t) {
        const std::string &p = atoms[2 + t / 2];
        out.push_back(t % 2 == 0 ? std::vector<std::string>{a, avoid, p}
                                 : std::vector<std::string>{p, avoid, a});
      }
      break;
    }
  }
  return out;
}

Dialect family_dialect(Family f) {
  switch (f) {
    case Family::conjunctive:
    case Family::once:
    case Family::since:
      return Dialect::ppltl;
    default:
      return Dialect::ltlf;
  }
}

std::uint64_t obs_seed(std::uint64_t entry_seed, int level) {
  return entry_seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(level));
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::conjunctive: return "conjunctive";
    case Family::eventually: return "eventually";
    case Family::ordered_eventually: return "ordered-eventually";
    case Family::until: return "until";
    case Family::once: return "once";
    case Family::since: return "since";
  }
  throw dataset_error("unknown family");
}

Family family_from_name(const std::string &name) {
  for (Family f : {Family::conjunctive, Family::eventually,
                   Family::ordered_eventually, Family::until, Family::once,
                   Family::since})
    if (family_name(f) == name) return f;
  throw dataset_error("unknown goal family " + name);
}

FormulaPtr instantiate_template(const GoalTemplate &t) {
  std::size_t want = 2;
  if (t.family == Family::eventually) want = 1;
  if (t.family == Family::since) want = 3;
  if (t.slots.size() != want)
    throw dataset_error(family_name(t.family) + " takes " +
                        std::to_string(want) + " slots, got " +
                        std::to_string(t.slots.size()));
  std::vector<std::string> s;
  for (const FormulaPtr &f : t.slots) s.push_back("(" + print_formula(f) + ")");
  std::string text;
  switch (t.family) {
    case Family::conjunctive: text = s[0] + " & " + s[1]; break;
    case Family::eventually: text = "F" + s[0]; break;
    case Family::ordered_eventually:
      text = "F(" + s[0] + " & X(F" + s[1] + "))";
      break;
    case Family::until: text = s[0] + " U " + s[1]; break;
    case Family::once: text = s[0] + " & O" + s[1]; break;
    case Family::since: text = s[0] + " & (!" + s[1] + " S " + s[2]; text += ")"; break;
  }
  return parse_formula(text, family_dialect(t.family));
}

std::vector<std::string> sample_observations(
    const std::vector<std::string> &execution, int level, std::uint64_t seed) {
  if (execution.empty()) throw dataset_error("cannot sample an empty execution");
  const std::vector<int> &levels = observability_levels();
  if (std::find(levels.begin(), levels.end(), level) == levels.end())
    throw dataset_error("unsupported observability level " +
                        std::to_string(level));
  if (level == 100) return execution;
  std::size_t n = execution.size();
  std::size_t k = (n * static_cast<std::size_t>(level) + 50) / 100;
  if (k < 1) k = 1;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i + 1 < n && i < k; ++i)
    std::swap(idx[i], idx[i + roll(rng, n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i : idx) out.push_back(execution[i]);
  return out;
}

Dataset generate_dataset(const DomainModel &d, const ProblemModel &p,
                         Family family, int count, std::uint64_t seed,
                         const DatasetOptions &opts) {
  if (count < 1) throw dataset_error("dataset size must be positive");
  if (opts.hypotheses < 4)
    throw dataset_error("need at least 4 hypotheses per problem");

  Dataset out;
  out.domain_name = d.name;
  out.family = family;
  out.seed = seed;

  FondModel m0 = ground(d, p);
  Pools pools = make_pools(m0);
  if (pools.fresh.empty())
    throw dataset_error("domain offers no achievable atoms to build goals from");

  for (int e = 0; e < count; ++e) {
    std::uint64_t entry_seed = seed + static_cast<std::uint64_t>(e);
    std::mt19937_64 rng(entry_seed);
    bool made = false;
    for (int attempt = 0; attempt < opts.max_tries && !made; ++attempt) {
      std::vector<std::vector<std::string>> slot_sets =
          family_slots(family, opts.hypotheses, pools, rng);

      DatasetEntry entry;
      entry.seed = entry_seed;
      entry.problem.domain = d;
      entry.problem.problem = p;
      bool ok = true;
      for (std::size_t i = 0; i < slot_sets.size(); ++i) {
        GoalTemplate t;
        t.family = family;
        for (const std::string &atom : slot_sets[i])
          t.slots.push_back(parse_formula(atom, Dialect::ltlf));
        entry.problem.hypotheses.push_back(
            {"phi" + std::to_string(i), instantiate_template(t)});
      }

      // Every hypothesis must admit a strong-cyclic policy.
      std::vector<FondModel> models;
      std::vector<Policy> policies;
      for (const Hypothesis &h : entry.problem.hypotheses) {
        CompiledProblem cp = compile(d, p, h.formula, opts.compile);
        FondModel m = ground(cp.domain, cp.problem);
        std::optional<Policy> pi = solve_strong_cyclic(m, opts.planner);
        if (!pi || !validate(m, *pi, PolicyMode::strong_cyclic)) {
          ok = false;
          break;
        }
        models.push_back(std::move(m));
        policies.push_back(std::move(*pi));
      }
      if (!ok) continue;

      // Hidden goal: any hypothesis whose policy yields a non-empty
      // observable execution.
      std::vector<std::size_t> order(entry.problem.hypotheses.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = 0; i + 1 < order.size(); ++i)
        std::swap(order[i], order[i + roll(rng, order.size() - i)]);

      for (std::size_t idx : order) {
        EnumOptions eo;
        eo.loop_bound = opts.loop_bound;
        eo.cap = opts.max_executions;
        ExecutionSet es = enumerate_executions(models[idx], policies[idx], eo);
        std::vector<std::vector<std::string>> seqs;
        for (const Execution &ex : es.execs) {
          std::vector<std::string> texts;
          for (int a : ex.actions)
            texts.push_back(models[idx].actions[a].text());
          std::vector<std::string> stripped = strip(texts);
          if (!stripped.empty()) seqs.push_back(std::move(stripped));
        }
        if (seqs.empty()) continue;
        const std::vector<std::string> &exec = seqs[roll(rng, seqs.size())];
        entry.problem.true_goal = entry.problem.hypotheses[idx].id;
        for (int level : observability_levels())
          entry.observations[level] =
              level == 100 ? exec
                           : sample_observations(exec, level,
                                                 obs_seed(entry_seed, level));
        break;
      }
      if (entry.problem.true_goal.empty()) continue;

      out.entries.push_back(std::move(entry));
      made = true;
    }
    if (!made)
      throw dataset_error("resample budget exhausted for problem " +
                          std::to_string(e) + " of family " +
                          family_name(family));
  }
  return out;
}

}  // namespace fondrec
