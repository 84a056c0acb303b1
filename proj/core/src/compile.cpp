#include "fondrec/compile.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fondrec/ground.hpp"

namespace fondrec {

namespace {

const TypedName *find_object(const DomainModel &d, const ProblemModel &p,
                             const std::string &name) {
  for (const TypedName &c : d.constants)
    if (c.name == name) return &c;
  for (const TypedName &o : p.objects)
    if (o.name == name) return &o;
  return nullptr;
}

void validate_formula(const DomainModel &d, const ProblemModel &p,
                      const FormulaPtr &f) {
  for (const Atom &a : formula_atoms(f)) {
    const Predicate *pred = nullptr;
    for (const Predicate &q : d.predicates)
      if (q.name == a.name) {
        pred = &q;
        break;
      }
    if (!pred)
      throw compile_error("formula atom " + a.key() +
                          " names no domain predicate");
    if (pred->params.size() != a.args.size())
      throw compile_error(
          "formula atom " + a.key() + " has arity " +
          std::to_string(a.args.size()) + ", predicate " + a.name +
          " expects " + std::to_string(pred->params.size()));
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      const Term &t = a.args[i];
      if (t.is_var)
        throw compile_error("formula atom " + a.key() + " is not ground");
      const TypedName *obj = find_object(d, p, t.name);
      if (!obj)
        throw compile_error("formula atom " + a.key() +
                            " mentions unknown object " + t.name);
      if (!is_subtype(d, obj->type, pred->params[i].type))
        throw compile_error("formula atom " + a.key() + ": object " + t.name +
                            " of type " + obj->type + " cannot fill a " +
                            pred->params[i].type + " parameter");
    }
  }
}

// Disjunctive normal form of a guard: list of conjunctions, each a list of
// literal guards. tt -> one empty conjunction, ff -> no conjunctions.
std::vector<std::vector<Guard>> dnf(const Guard &g) {
  switch (g.k) {
    case Guard::K::tt:
      return {{}};
    case Guard::K::ff:
      return {};
    case Guard::K::atom:
      return {{g}};
    case Guard::K::not_: {
      const Guard &kid = g.kids[0];
      if (kid.k == Guard::K::atom) return {{g}};
      if (kid.k == Guard::K::tt) return {};
      if (kid.k == Guard::K::ff) return {{}};
      if (kid.k == Guard::K::not_) return dnf(kid.kids[0]);
      std::vector<Guard> flipped;
      for (const Guard &k : kid.kids) flipped.push_back(g_not(k));
      return kid.k == Guard::K::and_ ? dnf(g_or(std::move(flipped)))
                                     : dnf(g_and(std::move(flipped)));
    }
    case Guard::K::and_: {
      std::vector<std::vector<Guard>> acc = {{}};
      for (const Guard &k : g.kids) {
        std::vector<std::vector<Guard>> kd = dnf(k);
        std::vector<std::vector<Guard>> next;
        for (const auto &a : acc)
          for (const auto &b : kd) {
            std::vector<Guard> merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            next.push_back(std::move(merged));
          }
        acc = std::move(next);
      }
      return acc;
    }
    case Guard::K::or_: {
      std::vector<std::vector<Guard>> acc;
      for (const Guard &k : g.kids)
        for (auto &c : dnf(k)) acc.push_back(std::move(c));
      return acc;
    }
  }
  return {};
}

// Conjunction that flattens into an existing and-node instead of nesting.
Cond conjoin(Cond a, Cond b) {
  if (a.k == Guard::K::tt) return b;
  if (b.k == Guard::K::tt) return a;
  if (a.k == Guard::K::and_) {
    a.kids.push_back(std::move(b));
    return a;
  }
  return g_and({std::move(a), std::move(b)});
}

std::string action_name_of(const std::string &text) {
  std::size_t b = text.find_first_not_of("( ");
  if (b == std::string::npos) return "";
  std::size_t e = text.find_first_of(" )", b);
  return text.substr(b, e == std::string::npos ? std::string::npos : e - b);
}

}  // namespace

CompiledProblem compile(const DomainModel &d, const ProblemModel &p,
                        const FormulaPtr &f, const CompileOptions &opts) {
  validate_formula(d, p, f);

  CompiledProblem cp;
  cp.formula = f;
  cp.ground_only = opts.ground_only;
  cp.objects = formula_objects(f);

  Dfa dfa = compile_to_dfa(f, opts.dfa);
  int n = dfa.num_states();

  for (int i = 0; i < n; ++i)
    cp.state_fluents.push_back("q" + std::to_string(i));

  std::set<std::string> reserved(cp.state_fluents.begin(),
                                 cp.state_fluents.end());
  reserved.insert("turnDomain");
  for (const Predicate &q : d.predicates)
    if (reserved.count(q.name))
      throw compile_error("domain predicate " + q.name +
                          " collides with a compilation fluent");
  for (const ActionSchema &a : d.actions)
    if (a.name == "trans")
      throw compile_error("domain action trans collides with the "
                          "synchronization action");

  if (opts.ground_only) {
    cp.pdfa = Pdfa{dfa, {}, {}};
  } else {
    ObjectMapping m;
    for (std::size_t i = 0; i < cp.objects.size(); ++i) {
      std::string v = i == 0   ? "x"
                      : i == 1 ? "y"
                      : i == 2 ? "z"
                               : "x" + std::to_string(i + 1);
      m.pairs.emplace_back(cp.objects[i], v);
      cp.vars.push_back(v);
    }
    cp.pdfa = lift_to_pdfa(dfa, m);
  }

  std::vector<TypedName> var_params;
  for (std::size_t i = 0; i < cp.vars.size(); ++i) {
    const TypedName *obj = find_object(d, p, cp.objects[i]);
    var_params.push_back(TypedName{cp.vars[i], obj->type});
  }

  Atom td{"turnDomain", {}};
  auto q_vars = [&](int i) {
    Atom a{cp.state_fluents[i], {}};
    for (const std::string &v : cp.vars) a.args.push_back(Term{v, true});
    return a;
  };
  auto q_objs = [&](int i) {
    Atom a{cp.state_fluents[i], {}};
    for (std::size_t j = 0; j < cp.vars.size(); ++j)
      a.args.push_back(Term{cp.objects[j], false});
    return a;
  };

  DomainModel dd = d;
  for (const char *req : {":conditional-effects", ":negative-preconditions"})
    if (std::find(dd.requirements.begin(), dd.requirements.end(), req) ==
        dd.requirements.end())
      dd.requirements.push_back(req);

  for (int i = 0; i < n; ++i)
    dd.predicates.push_back(Predicate{cp.state_fluents[i], var_params});
  dd.predicates.push_back(Predicate{"turnDomain", {}});

  for (ActionSchema &a : dd.actions) {
    a.pre = conjoin(std::move(a.pre), g_atom(td));
    Eff unset = e_lit(Literal{td, false});
    if (a.eff.k == Eff::K::and_)
      a.eff.kids.push_back(std::move(unset));
    else
      a.eff = e_and({std::move(a.eff), std::move(unset)});
  }

  ActionSchema trans;
  trans.name = "trans";
  trans.params = var_params;
  trans.pre = g_not(g_atom(td));
  std::vector<Eff> whens;
  for (int t = 0; t < n; ++t) {
    std::vector<Guard> disjuncts;
    for (int s = 0; s < n; ++s)
      for (const auto &[g, tgt] : cp.pdfa.dfa.trans[s]) {
        if (tgt != t) continue;
        for (auto &conj : dnf(g)) {
          std::vector<Guard> kids;
          kids.push_back(g_atom(q_vars(s)));
          for (Guard &lit : conj) kids.push_back(std::move(lit));
          disjuncts.push_back(g_and(std::move(kids)));
        }
      }
    if (disjuncts.empty()) continue;
    std::vector<Eff> then;
    then.push_back(e_lit(Literal{q_vars(t), true}));
    for (int u = 0; u < n; ++u)
      if (u != t) then.push_back(e_lit(Literal{q_vars(u), false}));
    then.push_back(e_lit(Literal{td, true}));
    whens.push_back(e_when(g_or(std::move(disjuncts)), std::move(then)));
  }
  trans.eff = e_and(std::move(whens));
  dd.actions.push_back(std::move(trans));

  ProblemModel pp = p;
  // Start the automaton on the initial state's symbol so the induced trace
  // includes the initial state.
  Step s0;
  for (const Atom &a : p.init) s0.insert(a.key());
  int q_init = -1;
  for (const auto &[g, tgt] : dfa.trans[dfa.initial])
    if (g.eval(s0)) {
      q_init = tgt;
      break;
    }
  if (q_init < 0)
    throw compile_error("automaton guards are not total at the initial state");
  pp.init.push_back(q_objs(q_init));
  pp.init.push_back(td);

  std::vector<Guard> acc;
  for (int i = 0; i < n; ++i)
    if (dfa.accepting[i]) acc.push_back(g_atom(q_objs(i)));
  pp.goal = g_and({g_or(std::move(acc)), g_atom(td)});

  cp.domain = std::move(dd);
  cp.problem = std::move(pp);
  return cp;
}

std::vector<std::string> strip(const std::vector<std::string> &actions) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    bool is_trans = action_name_of(actions[i]) == "trans";
    bool trans_turn = i % 2 == 1;
    if (is_trans && !trans_turn)
      throw compile_error(i == 0 ? "sequence starts with trans"
                                 : "two consecutive trans actions at index " +
                                       std::to_string(i));
    if (!is_trans && trans_turn)
      throw compile_error("two consecutive domain actions at index " +
                          std::to_string(i));
    if (!is_trans) out.push_back(actions[i]);
  }
  return out;
}

Trace induced_trace(const CompiledProblem &cp, const FondModel &mc,
                    const Execution &e) {
  int td = mc.atoms.find("turnDomain");
  if (td < 0)
    throw compile_error("model lacks turnDomain; not a compiled grounding");
  std::set<std::string> drop(cp.state_fluents.begin(), cp.state_fluents.end());
  drop.insert("turnDomain");
  Trace tr;
  for (const State &s : e.states) {
    if (!state_test(s, td)) continue;
    Step step;
    for (const std::string &key : mc.to_step(s)) {
      if (!drop.count(key.substr(0, key.find('(')))) step.insert(key);
    }
    tr.push_back(std::move(step));
  }
  return tr;
}

bool check_policy_satisfies(const CompiledProblem &cp, const Policy &policy,
                            int loop_bound) {
  FondModel mc = ground(cp.domain, cp.problem);
  if (!validate(mc, policy, PolicyMode::strong_cyclic)) return false;
  EnumOptions eo;
  eo.loop_bound = loop_bound;
  ExecutionSet es = enumerate_executions(mc, policy, eo);
  if (es.capped) return false;
  for (const Execution &e : es.execs)
    if (!holds(cp.formula, induced_trace(cp, mc, e))) return false;
  return true;
}

}  // namespace fondrec
