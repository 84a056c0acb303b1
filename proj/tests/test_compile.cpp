#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "fondrec/compile.hpp"
#include "fondrec/ground.hpp"
#include "fondrec/planner.hpp"

using namespace fondrec;

namespace {

CompiledProblem compile_tire(const char *problem_text, const std::string &phi,
                             Dialect d = Dialect::ltlf,
                             CompileOptions opts = {}) {
  DomainModel dom = parse_domain(fixtures::kTireDomain);
  ProblemModel prob = parse_problem(problem_text);
  return compile(dom, prob, parse_formula(phi, d), opts);
}

// Ground atom key of state fluent i for the objects-of-interest tuple.
std::string q_key(const CompiledProblem &cp, int i) {
  std::string k = cp.state_fluents[i];
  if (!cp.vars.empty()) {
    k += '(';
    for (std::size_t j = 0; j < cp.vars.size(); ++j) {
      if (j) k += ',';
      k += cp.objects[j];
    }
    k += ')';
  }
  return k;
}

std::vector<State> reachable_states(const FondModel &m) {
  std::vector<State> out;
  std::set<State> seen{m.init};
  std::vector<State> stack{m.init};
  while (!stack.empty()) {
    State s = stack.back();
    stack.pop_back();
    out.push_back(s);
    for (int a = 0; a < static_cast<int>(m.actions.size()); ++a) {
      if (!m.applicable(s, a)) continue;
      for (const State &t : m.apply(s, a))
        if (seen.insert(t).second) stack.push_back(t);
    }
  }
  return out;
}

std::vector<std::string> action_seq(const FondModel &m, const Execution &e) {
  std::vector<std::string> out;
  for (int a : e.actions) out.push_back(m.actions[a].text());
  return out;
}

}  // namespace

TEST_CASE("compile: trans operator matches the eventually-vAt shape") {
  CompiledProblem cp = compile_tire(fixtures::kTireProblem5Row, "F vAt(51)");

  CHECK(cp.objects == std::vector<std::string>{"51"});
  CHECK(cp.vars == std::vector<std::string>{"x"});
  CHECK(cp.state_fluents == std::vector<std::string>{"q0", "q1"});

  const ActionSchema &trans = cp.domain.actions.back();
  CHECK(trans.name == "trans");
  REQUIRE(trans.params.size() == 1);
  CHECK(trans.params[0] == TypedName{"x", "location"});
  CHECK(print_cond_sexpr(trans.pre) == "(not (turnDomain))");

  REQUIRE(trans.eff.k == Eff::K::and_);
  REQUIRE(trans.eff.kids.size() == 2);
  const Eff &w0 = trans.eff.kids[0];
  const Eff &w1 = trans.eff.kids[1];
  REQUIRE(w0.k == Eff::K::when);
  REQUIRE(w1.k == Eff::K::when);
  CHECK(print_cond_sexpr(w0.cond) == "(and (q0 ?x) (not (vAt ?x)))");
  CHECK(print_cond_sexpr(w1.cond) == "(or (and (q0 ?x) (vAt ?x)) (q1 ?x))");

  // then-branches: target fluent, the other unset, turnDomain last
  REQUIRE(w0.kids.size() == 3);
  CHECK(w0.kids[0].lit == Literal{Atom{"q0", {Term{"x", true}}}, true});
  CHECK(w0.kids[1].lit == Literal{Atom{"q1", {Term{"x", true}}}, false});
  CHECK(w0.kids[2].lit == Literal{Atom{"turnDomain", {}}, true});
  REQUIRE(w1.kids.size() == 3);
  CHECK(w1.kids[0].lit == Literal{Atom{"q1", {Term{"x", true}}}, true});
  CHECK(w1.kids[1].lit == Literal{Atom{"q0", {Term{"x", true}}}, false});
  CHECK(w1.kids[2].lit == Literal{Atom{"turnDomain", {}}, true});
}

TEST_CASE("compile: fluents, gating, and requirements") {
  DomainModel dom = parse_domain(fixtures::kTireDomain);
  ProblemModel prob = parse_problem(fixtures::kTireProblem5Row);
  CompiledProblem cp = compile(dom, prob, parse_formula("F vAt(51)", Dialect::ltlf));

  // new predicates appended: q0, q1, then turnDomain
  std::size_t np = cp.domain.predicates.size();
  REQUIRE(np == dom.predicates.size() + 3);
  CHECK(cp.domain.predicates[np - 3] ==
        Predicate{"q0", {TypedName{"x", "location"}}});
  CHECK(cp.domain.predicates[np - 2] ==
        Predicate{"q1", {TypedName{"x", "location"}}});
  CHECK(cp.domain.predicates[np - 1] == Predicate{"turnDomain", {}});

  // every original action gains the turnDomain gate
  const ActionSchema &move = cp.domain.actions[0];
  CHECK(move.name == "move");
  CHECK(print_cond_sexpr(move.pre) ==
        "(and (vAt ?from) (road ?from ?to) (not (flat)) (turnDomain))");
  REQUIRE(move.eff.k == Eff::K::and_);
  CHECK(move.eff.kids[0].k == Eff::K::oneof);
  CHECK(move.eff.kids.back().lit == Literal{Atom{"turnDomain", {}}, false});

  const ActionSchema &ct = cp.domain.actions[1];
  CHECK(ct.name == "changetire");
  CHECK(print_cond_sexpr(ct.pre) ==
        "(and (vAt ?loc) (spare-in ?loc) (flat) (turnDomain))");
  CHECK(ct.eff.kids.back().lit == Literal{Atom{"turnDomain", {}}, false});

  // requirements gain conditional effects, keep the existing negation flag
  const auto &reqs = cp.domain.requirements;
  CHECK(std::count(reqs.begin(), reqs.end(), ":conditional-effects") == 1);
  CHECK(std::count(reqs.begin(), reqs.end(), ":negative-preconditions") == 1);
}

TEST_CASE("compile: initial and goal conditions") {
  CompiledProblem cp = compile_tire(fixtures::kTireProblem5Row, "F vAt(51)");

  // init' appends the started automaton state and turnDomain
  std::size_t ni = cp.problem.init.size();
  ProblemModel orig = parse_problem(fixtures::kTireProblem5Row);
  REQUIRE(ni == orig.init.size() + 2);
  CHECK(cp.problem.init[ni - 2] == Atom{"q0", {Term{"51", false}}});
  CHECK(cp.problem.init[ni - 1] == Atom{"turnDomain", {}});

  CHECK(print_cond_sexpr(cp.problem.goal) == "(and (q1 51) (turnDomain))");
}

TEST_CASE("compile: init starts the automaton on the initial symbol") {
  // vAt(11) already holds, so the automaton begins in its accepting state
  CompiledProblem cp = compile_tire(fixtures::kTireProblem3Row, "F vAt(11)");
  std::size_t ni = cp.problem.init.size();
  CHECK(cp.problem.init[ni - 2] == Atom{"q1", {Term{"11", false}}});

  // the compiled problem is then solved by the empty policy
  FondModel mc = ground(cp.domain, cp.problem);
  CHECK(mc.is_goal(mc.init));
  CHECK(check_policy_satisfies(cp, Policy{}));
}

TEST_CASE("compile: emitted PDDL reparses to the same models") {
  CompiledProblem cp = compile_tire(fixtures::kTireProblem5Row, "F vAt(51)");
  CHECK(parse_domain(print_domain(cp.domain)) == cp.domain);
  CHECK(parse_problem(print_problem(cp.problem)) == cp.problem);

  // compilation is deterministic
  CompiledProblem again = compile_tire(fixtures::kTireProblem5Row, "F vAt(51)");
  CHECK(print_domain(again.domain) == print_domain(cp.domain));
  CHECK(print_problem(again.problem) == print_problem(cp.problem));
}

TEST_CASE("compile: alternation and state-fluent exclusion hold everywhere") {
  CompiledProblem cp = compile_tire(fixtures::kTireProblem5Row, "F vAt(51)");
  FondModel mc = ground(cp.domain, cp.problem);
  int td = mc.atoms.find("turnDomain");
  REQUIRE(td >= 0);

  // only the objects-of-interest binding survives grounding
  int ntrans = 0;
  for (const auto &a : mc.actions)
    if (a.name == "trans") ++ntrans;
  CHECK(ntrans == 1);
  CHECK(mc.action_id("(trans 51)") >= 0);

  // ids of every ground automaton-state fluent, any binding
  std::vector<int> q_ids;
  for (int i = 0; i < mc.atoms.size(); ++i) {
    const std::string &key = mc.atoms.names[i];
    std::string name = key.substr(0, key.find('('));
    if (std::find(cp.state_fluents.begin(), cp.state_fluents.end(), name) !=
        cp.state_fluents.end())
      q_ids.push_back(i);
  }

  std::vector<State> space = reachable_states(mc);
  CHECK(space.size() > 10);
  for (const State &s : space) {
    int nq = 0;
    for (int id : q_ids) nq += state_test(s, id);
    CHECK(nq == 1);
    bool domain_turn = state_test(s, td);
    for (int a = 0; a < static_cast<int>(mc.actions.size()); ++a) {
      if (!mc.applicable(s, a)) continue;
      CHECK((mc.actions[a].name == "trans") == !domain_turn);
    }
  }
}

TEST_CASE("compile: solved five-row problem satisfies the formula") {
  CompiledProblem cp = compile_tire(fixtures::kTireProblem5Row, "F vAt(51)");
  FondModel mc = ground(cp.domain, cp.problem);

  auto pi = solve_strong_cyclic(mc);
  REQUIRE(pi.has_value());
  CHECK(validate(mc, *pi, PolicyMode::strong_cyclic));
  CHECK(check_policy_satisfies(cp, *pi));

  // the road to 51 forks only on flats: four moves, final fork merged
  ExecutionSet es = enumerate_executions(mc, *pi);
  CHECK(!es.capped);
  CHECK(es.execs.size() == 8);

  // executions alternate and strip back to pure domain actions
  for (const Execution &e : es.execs) {
    std::vector<std::string> seq = action_seq(mc, e);
    std::vector<std::string> bare = strip(seq);
    CHECK(bare.size() * 2 == seq.size());
    for (const std::string &a : bare) CHECK(a.substr(0, 6) != "(trans");
  }

  // a strong policy exists too (spares make the space acyclic) and passes
  auto ps = solve_strong(mc);
  REQUIRE(ps.has_value());
  CHECK(check_policy_satisfies(cp, *ps));
}

TEST_CASE("compile: reachability goals stay solvable after compilation") {
  DomainModel dom = parse_domain(fixtures::kTireDomain);
  ProblemModel prob = parse_problem(fixtures::kTireProblem3Row);

  // the original reachability problem is solvable
  FondModel m0 = ground(dom, prob);
  REQUIRE(solve_strong_cyclic(m0).has_value());

  // so is the compiled eventually-goal version
  CompiledProblem cp = compile(dom, prob, parse_formula("F vAt(22)", Dialect::ltlf));
  FondModel mc = ground(cp.domain, cp.problem);
  auto pi = solve_strong_cyclic(mc);
  REQUIRE(pi.has_value());
  CHECK(check_policy_satisfies(cp, *pi));

  // no-flat execution: move, sync, move, sync
  ExecutionSet es = enumerate_executions(mc, *pi);
  bool found = false;
  for (const Execution &e : es.execs) {
    std::vector<std::string> seq = action_seq(mc, e);
    if (seq == std::vector<std::string>{"(move 11 21)", "(trans 22)",
                                        "(move 21 22)", "(trans 22)"}) {
      found = true;
      Trace t = induced_trace(cp, mc, e);
      REQUIRE(t.size() == 3);
      CHECK(t[0].count("vAt(11)") == 1);
      CHECK(t[1].count("vAt(21)") == 1);
      CHECK(t[2].count("vAt(22)") == 1);
      for (const Step &st : t) {
        CHECK(st.count("turnDomain") == 0);
        for (const std::string &k : st) CHECK(k.substr(0, 1) != "q");
      }
    }
  }
  CHECK(found);
}

TEST_CASE("compile: unachievable formulas make the problem unsolvable") {
  // no action ever adds a spare
  CompiledProblem cp = compile_tire(fixtures::kTireProblem3Row, "F spare-in(11)");
  FondModel mc = ground(cp.domain, cp.problem);
  CHECK(!solve_strong_cyclic(mc).has_value());

  // and an always-false goal compiles to an empty goal disjunct
  CompiledProblem cf = compile_tire(fixtures::kTireProblem3Row, "false");
  CHECK(print_cond_sexpr(cf.problem.goal) == "(and (or) (turnDomain))");
  FondModel mf = ground(cf.domain, cf.problem);
  CHECK(!solve_strong_cyclic(mf).has_value());
}

TEST_CASE("compile: next-true pins pre-progression and when skipping") {
  // X true: three automaton states, none loops back to q0
  CompiledProblem cp = compile_tire(fixtures::kTireProblem3Row, "X true");
  CHECK(cp.objects.empty());
  CHECK(cp.vars.empty());
  CHECK(cp.state_fluents == std::vector<std::string>{"q0", "q1", "q2"});

  const ActionSchema &trans = cp.domain.actions.back();
  CHECK(trans.params.empty());
  REQUIRE(trans.eff.kids.size() == 2);  // q0 has no incoming edge: no when
  CHECK(print_cond_sexpr(trans.eff.kids[0].cond) == "(q0)");
  CHECK(print_cond_sexpr(trans.eff.kids[1].cond) == "(or (q1) (q2))");

  // init' reflects one symbol already read
  std::size_t ni = cp.problem.init.size();
  CHECK(cp.problem.init[ni - 2] == Atom{"q1", {}});
  CHECK(print_cond_sexpr(cp.problem.goal) == "(and (q2) (turnDomain))");

  // one domain action suffices, whatever it is
  FondModel mc = ground(cp.domain, cp.problem);
  auto pi = solve_strong_cyclic(mc);
  REQUIRE(pi.has_value());
  CHECK(check_policy_satisfies(cp, *pi));
  ExecutionSet es = enumerate_executions(mc, *pi);
  for (const Execution &e : es.execs) CHECK(e.actions.size() == 2);
}

TEST_CASE("compile: past dialect goals run through the same pipeline") {
  CompiledProblem cp =
      compile_tire(fixtures::kTireProblem3Row, "O vAt(22)", Dialect::ppltl);
  FondModel mc = ground(cp.domain, cp.problem);
  auto pi = solve_strong_cyclic(mc);
  REQUIRE(pi.has_value());
  CHECK(check_policy_satisfies(cp, *pi));
}

TEST_CASE("compile: several objects of interest get successive variables") {
  CompiledProblem cp =
      compile_tire(fixtures::kTireProblem3Row, "F vAt(21) & F vAt(22)");
  CHECK(cp.objects == std::vector<std::string>{"21", "22"});
  CHECK(cp.vars == std::vector<std::string>{"x", "y"});
  const ActionSchema &trans = cp.domain.actions.back();
  REQUIRE(trans.params.size() == 2);
  CHECK(trans.params[0] == TypedName{"x", "location"});
  CHECK(trans.params[1] == TypedName{"y", "location"});

  FondModel mc = ground(cp.domain, cp.problem);
  auto pi = solve_strong_cyclic(mc);
  REQUIRE(pi.has_value());
  CHECK(check_policy_satisfies(cp, *pi));

  // four and more objects roll over to numbered variables
  CompiledProblem wide = compile_tire(
      fixtures::kTireProblem3Row,
      "F vAt(11) & F vAt(21) & F vAt(22) & F vAt(31) & F vAt(12)");
  CHECK(wide.vars == std::vector<std::string>{"x", "y", "z", "x4", "x5"});
}

TEST_CASE("compile: zero-arity formula atoms need no parameters") {
  CompiledProblem cp = compile_tire(fixtures::kTireProblem3Row, "F flat");
  CHECK(cp.objects.empty());
  CHECK(cp.vars.empty());
  const ActionSchema &trans = cp.domain.actions.back();
  CHECK(trans.params.empty());
  std::size_t ni = cp.problem.init.size();
  CHECK(cp.problem.init[ni - 2] == Atom{"q0", {}});
}

TEST_CASE("compile: ground-only mode skips the lifting") {
  CompileOptions opts;
  opts.ground_only = true;
  CompiledProblem cp =
      compile_tire(fixtures::kTireProblem3Row, "F vAt(22)", Dialect::ltlf, opts);
  CHECK(cp.ground_only);
  CHECK(cp.objects == std::vector<std::string>{"22"});
  CHECK(cp.vars.empty());

  const ActionSchema &trans = cp.domain.actions.back();
  CHECK(trans.params.empty());
  CHECK(print_cond_sexpr(trans.eff.kids[0].cond) == "(and (q0) (not (vAt 22)))");
  CHECK(print_cond_sexpr(trans.eff.kids[1].cond) ==
        "(or (and (q0) (vAt 22)) (q1))");
  CHECK(print_cond_sexpr(cp.problem.goal) == "(and (q1) (turnDomain))");

  FondModel mc = ground(cp.domain, cp.problem);
  auto pi = solve_strong_cyclic(mc);
  REQUIRE(pi.has_value());
  CHECK(check_policy_satisfies(cp, *pi));
}

TEST_CASE("strip: removes sync steps and checks alternation") {
  using V = std::vector<std::string>;
  CHECK(strip(V{"(move 11 21)", "(trans 51)", "(move 21 22)", "(trans 51)"}) ==
        V{"(move 11 21)", "(move 21 22)"});
  CHECK(strip(V{}) == V{});
  // prefixes may stop before the closing sync
  CHECK(strip(V{"(move 11 21)"}) == V{"(move 11 21)"});
  CHECK(strip(V{"(move 11 21)", "(trans)", "(changetire 21)"}) ==
        V{"(move 11 21)", "(changetire 21)"});

  CHECK_THROWS_AS(strip(V{"(move 11 21)", "(move 21 22)"}), compile_error);
  CHECK_THROWS_AS(strip(V{"(trans 51)", "(move 11 21)"}), compile_error);
  CHECK_THROWS_AS(strip(V{"(move 11 21)", "(trans)", "(trans)"}), compile_error);
}

TEST_CASE("check_policy_satisfies: rejects broken policies") {
  CompiledProblem cp = compile_tire(fixtures::kTireProblem3Row, "F vAt(22)");
  FondModel mc = ground(cp.domain, cp.problem);
  auto pi = solve_strong_cyclic(mc);
  REQUIRE(pi.has_value());
  REQUIRE(check_policy_satisfies(cp, *pi));

  // drop the initial-state entry: the policy no longer covers its graph
  Policy headless = *pi;
  headless.act.erase(mc.init);
  CHECK(!check_policy_satisfies(cp, headless));

  // drop every goal-closing sync step
  Policy truncated = *pi;
  for (auto it = truncated.act.begin(); it != truncated.act.end();) {
    if (mc.actions[it->second].name == "trans")
      it = truncated.act.erase(it);
    else
      ++it;
  }
  CHECK(!check_policy_satisfies(cp, truncated));

  // the empty policy only works when the goal already holds
  CHECK(!check_policy_satisfies(cp, Policy{}));
  CompiledProblem triv = compile_tire(fixtures::kTireProblem3Row, "true");
  CHECK(check_policy_satisfies(triv, Policy{}));
}

TEST_CASE("compile: formula validation errors") {
  DomainModel dom = parse_domain(fixtures::kTireDomain);
  ProblemModel prob = parse_problem(fixtures::kTireProblem3Row);
  auto phi = [](const std::string &s) {
    return parse_formula(s, Dialect::ltlf);
  };

  CHECK_THROWS_AS(compile(dom, prob, phi("F foo(11)")), compile_error);
  CHECK_THROWS_AS(compile(dom, prob, phi("F vAt(11, 21)")), compile_error);
  CHECK_THROWS_AS(compile(dom, prob, phi("F vAt(99)")), compile_error);
  CHECK_THROWS_WITH_AS(compile(dom, prob, phi("F flat(11)")),
                       doctest::Contains("arity"), compile_error);

  // atoms must be ground
  FormulaPtr open = f_unary(
      FKind::eventually, f_atom(Atom{"vAt", {Term{"x", true}}}, Dialect::ltlf));
  CHECK_THROWS_AS(compile(dom, prob, open), compile_error);

  // object type must fit the predicate parameter
  DomainModel dt = parse_domain(R"((define (domain typed)
    (:requirements :strips :typing)
    (:types box spot)
    (:predicates (at ?b - box ?s - spot) (done))
    (:action noop :parameters () :precondition (and) :effect (done))))");
  ProblemModel pt = parse_problem(R"((define (problem typed-a)
    (:domain typed)
    (:objects b1 - box s1 - spot)
    (:init (and (at b1 s1)))
    (:goal (done))))");
  CHECK_THROWS_WITH_AS(compile(dt, pt, phi("F at(s1, b1)")),
                       doctest::Contains("cannot fill"), compile_error);
  CHECK_NOTHROW(compile(dt, pt, phi("F at(b1, s1)")));
}

TEST_CASE("compile: reserved-name collisions are rejected") {
  ProblemModel prob = parse_problem(R"((define (problem clash-a)
    (:domain clash)
    (:objects o1 - object)
    (:init (and (p o1)))
    (:goal (p o1))))");
  auto phi = parse_formula("F p(o1)", Dialect::ltlf);

  DomainModel d1 = parse_domain(R"((define (domain clash)
    (:requirements :strips)
    (:predicates (p ?o - object) (q0 ?o - object))
    (:action a :parameters (?o - object) :precondition (p ?o) :effect (p ?o))))");
  CHECK_THROWS_WITH_AS(compile(d1, prob, phi), doctest::Contains("q0"),
                       compile_error);

  DomainModel d2 = parse_domain(R"((define (domain clash)
    (:requirements :strips)
    (:predicates (p ?o - object) (turnDomain))
    (:action a :parameters (?o - object) :precondition (p ?o) :effect (p ?o))))");
  CHECK_THROWS_WITH_AS(compile(d2, prob, phi), doctest::Contains("turnDomain"),
                       compile_error);

  DomainModel d3 = parse_domain(R"((define (domain clash)
    (:requirements :strips)
    (:predicates (p ?o - object))
    (:action trans :parameters (?o - object) :precondition (p ?o) :effect (p ?o))))");
  CHECK_THROWS_WITH_AS(compile(d3, prob, phi), doctest::Contains("trans"),
                       compile_error);

  // a q fluent beyond the automaton's state count is no collision
  DomainModel d4 = parse_domain(R"((define (domain clash)
    (:requirements :strips)
    (:predicates (p ?o - object) (q7 ?o - object))
    (:action a :parameters (?o - object) :precondition (p ?o) :effect (p ?o))))");
  CHECK_NOTHROW(compile(d4, prob, phi));
}

TEST_CASE("compile: automaton budget errors surface unchanged") {
  DomainModel dom = parse_domain(fixtures::kTireDomain);
  ProblemModel prob = parse_problem(fixtures::kTireProblem3Row);
  CompileOptions opts;
  opts.dfa.state_cap = 1;
  CHECK_THROWS_AS(
      compile(dom, prob, parse_formula("F vAt(22)", Dialect::ltlf), opts),
      dfa_error);
}

TEST_CASE("is_subtype: walks the declared hierarchy") {
  DomainModel d = parse_domain(R"((define (domain types)
    (:requirements :strips :typing)
    (:types vehicle - object car - vehicle truck - vehicle)
    (:predicates (ok))
    (:action a :parameters () :precondition (ok) :effect (ok))))");
  CHECK(is_subtype(d, "car", "vehicle"));
  CHECK(is_subtype(d, "car", "object"));
  CHECK(is_subtype(d, "car", "car"));
  CHECK(!is_subtype(d, "vehicle", "car"));
  CHECK(!is_subtype(d, "car", "truck"));
  CHECK(!is_subtype(d, "unknown", "car"));
  CHECK(is_subtype(d, "unknown", "object"));
}
