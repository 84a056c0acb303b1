#include "fondrec/planner.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <tuple>

#include "json.hpp"

namespace fondrec {

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

// Lazily interned state space shared by one planner run.
struct Space {
  const FondModel &m;
  std::size_t cap;
  std::vector<State> states;
  std::unordered_map<State, int, StateHash> ids;

  Space(const FondModel &m_, std::size_t cap_) : m(m_), cap(cap_) {}

  int id(const State &s) {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    if (states.size() >= cap) throw planner_error("planner state cap exceeded");
    int v = static_cast<int>(states.size());
    states.push_back(s);
    ids.emplace(s, v);
    return v;
  }
};

// h-add over the delete relaxation: effect conditions and negative
// preconditions are dropped, every add is optimistic.
struct Hadd {
  const FondModel &m;
  std::vector<int> cost;

  explicit Hadd(const FondModel &m_) : m(m_) {}

  int tree(const GroundCond &g) const {
    switch (g.k) {
      case GroundCond::K::tt: return 0;
      case GroundCond::K::ff: return kInf;
      case GroundCond::K::atom:
        return g.atom >= 0 && g.atom < static_cast<int>(cost.size())
                   ? cost[g.atom]
                   : kInf;
      case GroundCond::K::not_: return 0;
      case GroundCond::K::and_: {
        long long sum = 0;
        for (const GroundCond &kid : g.kids) {
          sum += tree(kid);
          if (sum >= kInf) return kInf;
        }
        return static_cast<int>(sum);
      }
      case GroundCond::K::or_: {
        int best = kInf;
        for (const GroundCond &kid : g.kids) best = std::min(best, tree(kid));
        return best;
      }
    }
    return kInf;
  }

  int operator()(const State &s) {
    int n = m.atoms.size();
    cost.assign(n, kInf);
    for (int i = 0; i < n; ++i)
      if (state_test(s, i)) cost[i] = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const GroundAction &a : m.actions) {
        long long base = 1;
        bool ok = true;
        for (int p : a.pre_pos) {
          if (cost[p] >= kInf) {
            ok = false;
            break;
          }
          base += cost[p];
        }
        if (!ok) continue;
        if (base > kInf) base = kInf;
        for (const auto &alt : a.alts)
          for (const auto &ce : alt)
            for (int ad : ce.add)
              if (cost[ad] > base) {
                cost[ad] = static_cast<int>(base);
                changed = true;
              }
      }
    }
    return tree(m.goal);
  }
};

// One determinize-plan-repair run.
struct PrpRun {
  const FondModel &m;
  PlannerOptions opts;
  Space sp;
  Hadd hadd;
  std::vector<char> dead;                    // by state id
  std::unordered_map<int, int> pol;          // state id -> action id
  std::unordered_map<int, std::vector<std::pair<int, std::vector<int>>>>
      succs_cache;  // state id -> (action, outcome ids) for applicable acts

  PrpRun(const FondModel &m_, const PlannerOptions &o)
      : m(m_), opts(o), sp(m_, o.state_cap), hadd(m_) {}

  bool goal(int s) const { return m.is_goal(sp.states[s]); }

  void ensure(int s) {
    if (static_cast<int>(dead.size()) <= s) dead.resize(s + 1, 0);
  }

  const std::vector<std::pair<int, std::vector<int>>> &succs(int s) {
    auto it = succs_cache.find(s);
    if (it != succs_cache.end()) return it->second;
    std::vector<std::pair<int, std::vector<int>>> out;
    State st = sp.states[s];  // copy: interning outcomes may reallocate
    for (std::size_t a = 0; a < m.actions.size(); ++a) {
      if (!m.applicable(st, static_cast<int>(a))) continue;
      std::vector<int> outs;
      for (const State &t : m.apply(st, static_cast<int>(a))) {
        int u = sp.id(t);
        ensure(u);
        outs.push_back(u);
      }
      out.emplace_back(static_cast<int>(a), std::move(outs));
    }
    return succs_cache.emplace(s, std::move(out)).first->second;
  }

  // Weak plan on the all-outcomes determinization from `from` to a goal or
  // an already-mapped state, avoiding dead states. A* with h-add, ties by
  // insertion order (which follows ascending action ids on expansion).
  std::optional<std::vector<std::pair<int, int>>> weak_plan(int from) {
    struct Node {
      int f, h;
      long long tick;
      int s;
      bool operator>(const Node &o) const {
        return std::tie(f, h, tick) > std::tie(o.f, o.h, o.tick);
      }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    std::unordered_map<int, int> g;
    std::unordered_map<int, std::pair<int, int>> parent;  // s -> (prev, act)
    long long tick = 0;

    int h0 = hadd(sp.states[from]);
    if (h0 >= kInf) return std::nullopt;
    open.push({h0, h0, tick++, from});
    g[from] = 0;

    while (!open.empty()) {
      Node n = open.top();
      open.pop();
      auto git = g.find(n.s);
      if (git != g.end() && n.f - n.h > git->second) continue;  // stale
      if (goal(n.s) || (n.s != from && pol.count(n.s))) {
        std::vector<std::pair<int, int>> plan;
        int cur = n.s;
        while (cur != from) {
          auto [prev, act] = parent.at(cur);
          plan.emplace_back(prev, act);
          cur = prev;
        }
        std::reverse(plan.begin(), plan.end());
        return plan;
      }
      int gs = g.at(n.s);
      for (const auto &[a, outs] : succs(n.s)) {
        for (int u : outs) {
          if (dead[u]) continue;
          auto it = g.find(u);
          if (it != g.end() && it->second <= gs + 1) continue;
          int hu = hadd(sp.states[u]);
          if (hu >= kInf) continue;
          g[u] = gs + 1;
          parent[u] = {n.s, a};
          open.push({gs + 1 + hu, hu, tick++, u});
        }
      }
    }
    return std::nullopt;
  }

  // Restrict to states reachable from s0 under the policy and convert ids
  // back to states.
  Policy extract(int s0) const {
    Policy out;
    std::vector<int> stack = {s0};
    std::set<int> seen = {s0};
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      if (goal(s)) continue;
      auto it = pol.find(s);
      if (it == pol.end()) continue;
      out.act.emplace(sp.states[s], it->second);
      auto sit = succs_cache.find(s);
      if (sit == succs_cache.end()) continue;
      for (const auto &[a, outs] : sit->second) {
        if (a != it->second) continue;
        for (int u : outs)
          if (seen.insert(u).second) stack.push_back(u);
      }
    }
    return out;
  }
};

// Explicit reachable graph for the exhaustive algorithms.
struct Graph {
  std::vector<State> states;
  std::unordered_map<State, int, StateHash> ids;
  std::vector<char> goal;
  // Per state: (action id, outcome state ids), applicable actions only.
  std::vector<std::vector<std::pair<int, std::vector<int>>>> succ;
};

Graph expand_all(const FondModel &m, std::size_t cap) {
  Graph g;
  auto intern = [&](const State &s) {
    auto it = g.ids.find(s);
    if (it != g.ids.end()) return it->second;
    if (g.states.size() >= cap) throw planner_error("planner state cap exceeded");
    int v = static_cast<int>(g.states.size());
    g.states.push_back(s);
    g.ids.emplace(s, v);
    g.goal.push_back(m.is_goal(s));
    g.succ.emplace_back();
    return v;
  };
  intern(m.init);
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    State cur = g.states[s];  // copy: g.states may reallocate while expanding
    for (std::size_t a = 0; a < m.actions.size(); ++a) {
      if (!m.applicable(cur, static_cast<int>(a))) continue;
      std::vector<int> outs;
      for (const State &t : m.apply(cur, static_cast<int>(a)))
        outs.push_back(intern(t));
      g.succ[s].emplace_back(static_cast<int>(a), std::move(outs));
    }
  }
  return g;
}

// Policy extraction shared by the exhaustive solvers: optimistic distance
// to the goal over the surviving pairs, ties by smallest action id.
Policy extract_from_pairs(const FondModel &m, const Graph &g,
                          const std::vector<std::vector<char>> &alive) {
  int n = static_cast<int>(g.states.size());
  std::vector<int> dist(n, kInf), choice(n, -1);
  for (int s = 0; s < n; ++s)
    if (g.goal[s]) dist[s] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int s = 0; s < n; ++s) {
      if (g.goal[s]) continue;
      for (std::size_t i = 0; i < g.succ[s].size(); ++i) {
        if (!alive[s][i]) continue;
        int best_out = kInf;
        for (int u : g.succ[s][i].second) best_out = std::min(best_out, dist[u]);
        if (best_out >= kInf) continue;
        int v = best_out + 1;
        int a = g.succ[s][i].first;
        if (v < dist[s] || (v == dist[s] && choice[s] >= 0 && a < choice[s])) {
          dist[s] = v;
          choice[s] = a;
          changed = true;
        }
      }
    }
  }
  Policy out;
  std::vector<int> stack = {0};
  std::set<int> seen = {0};
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    if (g.goal[s] || choice[s] < 0) continue;
    out.act.emplace(g.states[s], choice[s]);
    for (std::size_t i = 0; i < g.succ[s].size(); ++i) {
      if (g.succ[s][i].first != choice[s] || !alive[s][i]) continue;
      for (int u : g.succ[s][i].second)
        if (seen.insert(u).second) stack.push_back(u);
    }
  }
  return out;
}

// Strong-cyclic fixpoint: alternate outgoing- and connectedness-pruning on
// the full pair set until stable.
std::optional<Policy> exhaustive_strong_cyclic(const FondModel &m,
                                               const PlannerOptions &opts) {
  Graph g = expand_all(m, opts.state_cap);
  int n = static_cast<int>(g.states.size());
  if (g.goal[0]) return Policy{};

  std::vector<std::vector<char>> alive(n);
  for (int s = 0; s < n; ++s) alive[s].assign(g.succ[s].size(), !g.goal[s]);

  auto has_pair = [&](int s) {
    for (char c : alive[s])
      if (c) return true;
    return false;
  };

  bool outer_changed = true;
  while (outer_changed) {
    outer_changed = false;

    // Prune pairs with an outcome outside goal + mapped-state set.
    bool changed = true;
    while (changed) {
      changed = false;
      for (int s = 0; s < n; ++s)
        for (std::size_t i = 0; i < g.succ[s].size(); ++i) {
          if (!alive[s][i]) continue;
          for (int u : g.succ[s][i].second)
            if (!g.goal[u] && !has_pair(u)) {
              alive[s][i] = 0;
              changed = true;
              outer_changed = true;
              break;
            }
        }
    }

    // Keep only pairs connected to the goal through surviving pairs.
    std::vector<std::vector<char>> connected(n);
    for (int s = 0; s < n; ++s) connected[s].assign(g.succ[s].size(), 0);
    std::vector<char> reach(n, 0);
    for (int s = 0; s < n; ++s) reach[s] = g.goal[s];
    changed = true;
    while (changed) {
      changed = false;
      for (int s = 0; s < n; ++s)
        for (std::size_t i = 0; i < g.succ[s].size(); ++i) {
          if (!alive[s][i] || connected[s][i]) continue;
          for (int u : g.succ[s][i].second)
            if (reach[u]) {
              connected[s][i] = 1;
              if (!reach[s]) {
                reach[s] = 1;
              }
              changed = true;
              break;
            }
        }
    }
    for (int s = 0; s < n; ++s)
      for (std::size_t i = 0; i < g.succ[s].size(); ++i)
        if (alive[s][i] && !connected[s][i]) {
          alive[s][i] = 0;
          outer_changed = true;
        }
  }

  if (!g.goal[0] && !has_pair(0)) return std::nullopt;
  return extract_from_pairs(m, g, alive);
}

}  // namespace

std::optional<Policy> solve_strong_cyclic(const FondModel &m,
                                          const PlannerOptions &opts) {
  if (m.is_goal(m.init)) return Policy{};

  PrpRun run(m, opts);
  int s0 = run.sp.id(m.init);
  run.ensure(s0);
  std::vector<int> open = {s0};
  int repairs = 0;

  while (!open.empty()) {
    if (++repairs > opts.max_repairs) return exhaustive_strong_cyclic(m, opts);
    int s = open.back();
    open.pop_back();
    if (run.dead[s] || run.pol.count(s) || run.goal(s)) continue;

    auto plan = run.weak_plan(s);
    if (!plan) {
      run.dead[s] = 1;
      if (s == s0) return std::nullopt;
      // Re-open states whose chosen action can now land in a dead state.
      std::vector<int> reopened;
      for (auto it = run.pol.begin(); it != run.pol.end();) {
        auto [t, a] = *it;
        bool hits_dead = false;
        for (const auto &[act, outs] : run.succs(t)) {
          if (act != a) continue;
          for (int u : outs)
            if (run.dead[u]) hits_dead = true;
        }
        if (hits_dead) {
          reopened.push_back(t);
          it = run.pol.erase(it);
        } else {
          ++it;
        }
      }
      for (int t : reopened) open.push_back(t);
      continue;
    }

    for (auto [t, a] : *plan) {
      if (run.pol.count(t)) continue;
      run.pol.emplace(t, a);
      for (const auto &[act, outs] : run.succs(t)) {
        if (act != a) continue;
        for (int u : outs)
          if (!run.goal(u) && !run.pol.count(u) && !run.dead[u])
            open.push_back(u);
      }
    }
  }

  Policy out = run.extract(s0);
  if (validate(m, out, PolicyMode::strong_cyclic)) return out;
  // Incorporation went stale somewhere; the exhaustive pass is complete.
  return exhaustive_strong_cyclic(m, opts);
}

std::optional<Policy> solve_strong(const FondModel &m,
                                   const PlannerOptions &opts) {
  if (m.is_goal(m.init)) return Policy{};
  Graph g = expand_all(m, opts.state_cap);
  int n = static_cast<int>(g.states.size());

  std::vector<char> win(n, 0);
  std::vector<int> choice(n, -1);
  for (int s = 0; s < n; ++s) win[s] = g.goal[s];
  bool changed = true;
  while (changed) {
    changed = false;
    for (int s = 0; s < n; ++s) {
      if (win[s]) continue;
      for (const auto &[a, outs] : g.succ[s]) {
        bool all_win = true;
        for (int u : outs)
          if (!win[u]) {
            all_win = false;
            break;
          }
        if (all_win) {
          win[s] = 1;
          choice[s] = a;  // first qualifying action: smallest id this layer
          changed = true;
          break;
        }
      }
    }
  }
  if (!win[0]) return std::nullopt;

  Policy out;
  std::vector<int> stack = {0};
  std::set<int> seen = {0};
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    if (g.goal[s]) continue;
    out.act.emplace(g.states[s], choice[s]);
    for (const auto &[a, outs] : g.succ[s]) {
      if (a != choice[s]) continue;
      for (int u : outs)
        if (seen.insert(u).second) stack.push_back(u);
    }
  }
  return out;
}

bool validate(const FondModel &m, const Policy &pi, PolicyMode mode) {
  // Expand the policy graph from the initial state.
  std::vector<State> states;
  std::unordered_map<State, int, StateHash> ids;
  std::vector<char> goal;
  std::vector<std::vector<int>> next;
  auto intern = [&](const State &s) {
    auto it = ids.find(s);
    if (it != ids.end()) return it->second;
    int v = static_cast<int>(states.size());
    states.push_back(s);
    ids.emplace(s, v);
    goal.push_back(m.is_goal(s));
    next.emplace_back();
    return v;
  };
  intern(m.init);
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (goal[s]) continue;
    State cur = states[s];
    int a = pi.action_at(cur);
    if (a < 0 || a >= static_cast<int>(m.actions.size())) return false;
    if (!m.applicable(cur, a)) return false;
    for (const State &t : m.apply(cur, a)) {
      int u = intern(t);  // interning may grow `next`; index afterwards
      next[s].push_back(u);
    }
  }

  int n = static_cast<int>(states.size());
  // Goal must be reachable from every node of the policy graph.
  std::vector<std::vector<int>> rev(n);
  for (int s = 0; s < n; ++s)
    for (int u : next[s]) rev[u].push_back(s);
  std::vector<char> back(n, 0);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s)
    if (goal[s]) {
      back[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int u : rev[s])
      if (!back[u]) {
        back[u] = 1;
        stack.push_back(u);
      }
  }
  for (int s = 0; s < n; ++s)
    if (!back[s]) return false;

  if (mode == PolicyMode::strong) {
    // Reject any cycle among non-goal nodes.
    std::vector<int> color(n, 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::pair<int, std::size_t>> dfs;
    for (int root = 0; root < n; ++root) {
      if (color[root] != 0 || goal[root]) continue;
      dfs.emplace_back(root, 0);
      color[root] = 1;
      while (!dfs.empty()) {
        auto &[s, i] = dfs.back();
        if (i >= next[s].size()) {
          color[s] = 2;
          dfs.pop_back();
          continue;
        }
        int u = next[s][i++];
        if (goal[u]) continue;
        if (color[u] == 1) return false;
        if (color[u] == 0) {
          color[u] = 1;
          dfs.emplace_back(u, 0);
        }
      }
    }
  }
  return true;
}

ExecutionSet enumerate_executions(const FondModel &m, const Policy &pi,
                                  const EnumOptions &opts) {
  ExecutionSet out;
  constexpr long long kStepCap = 10000000;
  long long steps = 0;
  bool stop = false;

  std::vector<State> path_states;
  std::vector<int> path_actions;
  std::unordered_map<State, int, StateHash> count;

  auto record = [&]() {
    if (out.execs.size() >= opts.cap) {
      out.capped = true;
      stop = true;
      return;
    }
    out.execs.push_back({path_states, path_actions});
  };

  std::function<void(const State &)> visit = [&](const State &s) {
    if (stop) return;
    if (++steps > kStepCap || path_actions.size() > 30000) {
      out.capped = true;
      stop = true;
      return;
    }
    bool terminal = opts.until_undefined ? !pi.defined_at(s) : m.is_goal(s);
    if (terminal) {
      record();
      return;
    }
    int a = pi.action_at(s);
    if (a < 0)
      throw planner_error("policy undefined at reachable non-goal state");
    if (!m.applicable(s, a))
      throw planner_error("policy action inapplicable: " + m.actions[a].text());
    path_actions.push_back(a);
    for (const State &u : m.apply(s, a)) {
      if (stop) break;
      int &c = count[u];
      if (c > opts.loop_bound) continue;  // would re-enter too often
      ++c;
      path_states.push_back(u);
      visit(u);
      path_states.pop_back();
      --c;
    }
    path_actions.pop_back();
  };

  path_states.push_back(m.init);
  count[m.init] = 1;
  visit(m.init);

  // Deduplicate by action sequence, keeping first (canonical DFS) order.
  std::set<std::vector<int>> seen;
  std::vector<Execution> unique;
  for (Execution &e : out.execs)
    if (seen.insert(e.actions).second) unique.push_back(std::move(e));
  out.execs = std::move(unique);
  return out;
}

std::string policy_to_json(const FondModel &m, const Policy &pi,
                           const std::string &space) {
  std::vector<std::pair<std::vector<std::string>, int>> rows;
  for (const auto &[s, a] : pi.act) {
    Step st = m.to_step(s);
    rows.emplace_back(std::vector<std::string>(st.begin(), st.end()), a);
  }
  std::sort(rows.begin(), rows.end());
  nlohmann::json entries = nlohmann::json::array();
  for (const auto &[atoms, a] : rows) {
    nlohmann::json e;
    e["state"] = atoms;
    e["action"] = {{"name", m.actions[a].name}, {"args", m.actions[a].args}};
    entries.push_back(std::move(e));
  }
  nlohmann::json root;
  root["space"] = space;
  root["policy"] = std::move(entries);
  return root.dump(2);
}

Policy policy_from_json(const FondModel &m, const std::string &text,
                        std::string *space) {
  nlohmann::json root = nlohmann::json::parse(text);
  nlohmann::json entries;
  if (root.is_array()) {
    entries = root;
    if (space) *space = "original";
  } else {
    if (!root.contains("policy") || !root["policy"].is_array())
      throw planner_error("policy json: missing \"policy\" array");
    entries = root["policy"];
    if (space) *space = root.value("space", "original");
  }

  Policy out;
  for (const auto &e : entries) {
    State s(m.init.size(), 0);
    for (const auto &atom : e.at("state")) {
      int id = m.atoms.find(atom.get<std::string>());
      if (id < 0)
        throw planner_error("policy json: unknown atom " +
                            atom.get<std::string>());
      state_set(s, id);
    }
    const auto &act = e.at("action");
    std::string txt;
    if (act.is_string()) {
      txt = act.get<std::string>();
    } else {
      txt = "(" + act.at("name").get<std::string>();
      for (const auto &arg : act.value("args", nlohmann::json::array()))
        txt += " " + arg.get<std::string>();
      txt += ")";
    }
    int a = m.action_id(txt);
    if (a < 0) throw planner_error("policy json: unknown action " + txt);
    out.act[s] = a;
  }
  return out;
}

std::string executions_to_json(const FondModel &m, const ExecutionSet &es) {
  nlohmann::json root = nlohmann::json::array();
  for (const Execution &e : es.execs) {
    nlohmann::json seq = nlohmann::json::array();
    for (int a : e.actions)
      seq.push_back({{"name", m.actions[a].name}, {"args", m.actions[a].args}});
    root.push_back(std::move(seq));
  }
  return root.dump(2);
}

}  // namespace fondrec
