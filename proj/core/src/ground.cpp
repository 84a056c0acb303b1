#include "fondrec/ground.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace fondrec {

bool GroundCond::eval(const State &s) const {
  switch (k) {
    case K::tt: return true;
    case K::ff: return false;
    case K::atom:
      // Ids past the state width belong to atoms interned after the state
      // was built; they are false in it.
      return atom >= 0 && atom < static_cast<int>(s.size() * 64) &&
             state_test(s, atom);
    case K::not_: return !kids[0].eval(s);
    case K::and_:
      for (const GroundCond &g : kids)
        if (!g.eval(s)) return false;
      return true;
    case K::or_:
      for (const GroundCond &g : kids)
        if (g.eval(s)) return true;
      return false;
  }
  return false;
}

GroundCond compile_cond(const Cond &c, AtomTable &atoms) {
  GroundCond g;
  switch (c.k) {
    case Guard::K::tt: g.k = GroundCond::K::tt; break;
    case Guard::K::ff: g.k = GroundCond::K::ff; break;
    case Guard::K::atom:
      g.k = GroundCond::K::atom;
      g.atom = atoms.intern(c.atom.key());
      break;
    case Guard::K::not_:
      g.k = GroundCond::K::not_;
      g.kids.push_back(compile_cond(c.kids[0], atoms));
      break;
    case Guard::K::and_:
    case Guard::K::or_:
      g.k = c.k == Guard::K::and_ ? GroundCond::K::and_ : GroundCond::K::or_;
      for (const Cond &kid : c.kids) g.kids.push_back(compile_cond(kid, atoms));
      break;
  }
  return g;
}

std::string GroundAction::text() const {
  std::string s = "(" + name;
  for (const std::string &a : args) s += " " + a;
  s += ")";
  return s;
}

bool FondModel::applicable(const State &s, int a) const {
  const GroundAction &ga = actions[a];
  for (int p : ga.pre_pos)
    if (!state_test(s, p)) return false;
  for (int p : ga.pre_neg)
    if (state_test(s, p)) return false;
  return true;
}

State FondModel::apply_alt(const State &s, int a, int k) const {
  const auto &alt = actions[a].alts[k];
  State succ = s;
  // All conditions read the source state; deletes apply before adds.
  for (const auto &ce : alt)
    if (ce.cond.eval(s))
      for (int d : ce.del) state_reset(succ, d);
  for (const auto &ce : alt)
    if (ce.cond.eval(s))
      for (int ad : ce.add) state_set(succ, ad);
  return succ;
}

std::vector<State> FondModel::apply(const State &s, int a) const {
  if (!applicable(s, a))
    throw ground_error("apply: action " + actions[a].text() + " not applicable");
  std::vector<State> out;
  for (std::size_t k = 0; k < actions[a].alts.size(); ++k) {
    State succ = apply_alt(s, a, static_cast<int>(k));
    if (std::find(out.begin(), out.end(), succ) == out.end())
      out.push_back(std::move(succ));
  }
  return out;
}

int FondModel::action_id(const std::string &text) const {
  for (std::size_t i = 0; i < actions.size(); ++i)
    if (actions[i].text() == text) return static_cast<int>(i);
  return -1;
}

Step FondModel::to_step(const State &s) const {
  Step step;
  for (int i = 0; i < atoms.size(); ++i)
    if (state_test(s, i)) step.insert(atoms.names[i]);
  return step;
}

namespace {

// Substitution of schema variables by objects.
using Binding = std::map<std::string, std::string>;

Atom subst_atom(const Atom &a, const Binding &b) {
  Atom out;
  out.name = a.name;
  for (const Term &t : a.args) {
    if (!t.is_var) {
      out.args.push_back(t);
      continue;
    }
    auto it = b.find(t.name);
    if (it == b.end())
      throw ground_error("unbound variable ?" + t.name + " in " + a.key());
    out.args.push_back(Term{it->second, false});
  }
  return out;
}

Cond subst_cond(const Cond &c, const Binding &b) {
  Cond out = c;
  if (out.k == Guard::K::atom) out.atom = subst_atom(out.atom, b);
  for (Cond &kid : out.kids) kid = subst_cond(kid, b);
  return out;
}

// Flatten a precondition into positive/negative literal key lists.
void flatten_pre(const Cond &c, std::vector<std::string> &pos,
                 std::vector<std::string> &neg) {
  switch (c.k) {
    case Guard::K::tt:
      return;
    case Guard::K::atom:
      pos.push_back(c.atom.key());
      return;
    case Guard::K::not_:
      if (c.kids[0].k != Guard::K::atom)
        throw ground_error("preconditions must be conjunctions of literals");
      neg.push_back(c.kids[0].atom.key());
      return;
    case Guard::K::and_:
      for (const Cond &kid : c.kids) flatten_pre(kid, pos, neg);
      return;
    default:
      throw ground_error("preconditions must be conjunctions of literals");
  }
}

// Normalized effect: alternatives x conditional literal groups.
struct NormEff {
  struct Group {
    Cond cond;  // tt when unconditional
    std::vector<Literal> lits;
  };
  std::vector<std::vector<Group>> alts;
};

void collect_groups(const Eff &e, std::vector<NormEff::Group> &out) {
  switch (e.k) {
    case Eff::K::lit:
      if (out.empty() || !(out.front().cond == g_tt())) {
        out.insert(out.begin(), NormEff::Group{g_tt(), {}});
      }
      out.front().lits.push_back(e.lit);
      return;
    case Eff::K::when: {
      NormEff::Group g{e.cond, {}};
      for (const Eff &kid : e.kids) {
        if (kid.k != Eff::K::lit)
          throw ground_error("when-effects must be literal conjunctions");
        g.lits.push_back(kid.lit);
      }
      out.push_back(std::move(g));
      return;
    }
    case Eff::K::and_:
      for (const Eff &kid : e.kids) collect_groups(kid, out);
      return;
    case Eff::K::oneof:
      throw ground_error("oneof nested below a deterministic effect context");
  }
}

NormEff normalize_eff(const Eff &e) {
  // Split the top level into deterministic parts and oneof factors, then
  // take the cross product of the factors (source order).
  std::vector<NormEff::Group> det;
  std::vector<std::vector<std::vector<NormEff::Group>>> factors;
  std::function<void(const Eff &)> walk = [&](const Eff &node) {
    switch (node.k) {
      case Eff::K::and_:
        for (const Eff &kid : node.kids) walk(kid);
        return;
      case Eff::K::oneof: {
        std::vector<std::vector<NormEff::Group>> branches;
        for (const Eff &kid : node.kids) {
          std::vector<NormEff::Group> g;
          collect_groups(kid, g);
          branches.push_back(std::move(g));
        }
        factors.push_back(std::move(branches));
        return;
      }
      default:
        collect_groups(node, det);
        return;
    }
  };
  walk(e);

  NormEff out;
  out.alts.push_back(det);
  for (const auto &branches : factors) {
    std::vector<std::vector<NormEff::Group>> next;
    for (const auto &base : out.alts)
      for (const auto &branch : branches) {
        auto combined = base;
        combined.insert(combined.end(), branch.begin(), branch.end());
        next.push_back(std::move(combined));
      }
    out.alts = std::move(next);
  }
  return out;
}

struct TypeTable {
  std::map<std::string, std::string> parent;  // type -> supertype

  bool is_subtype(const std::string &t, const std::string &super) const {
    if (super == "object" || t == super) return true;
    std::string cur = t;
    for (int hops = 0; hops < 100; ++hops) {
      auto it = parent.find(cur);
      if (it == parent.end()) return false;
      cur = it->second;
      if (cur == super) return true;
      if (cur == "object") return false;
    }
    throw type_error("type hierarchy cycle at " + t);
  }
};

}  // namespace

FondModel ground(const DomainModel &d, const ProblemModel &p) {
  TypeTable types;
  for (const TypedName &t : d.types) types.parent[t.name] = t.type;

  // Object universe: domain constants first, then problem objects.
  std::vector<TypedName> universe = d.constants;
  universe.insert(universe.end(), p.objects.begin(), p.objects.end());
  std::map<std::string, std::string> obj_type;
  for (const TypedName &o : universe) {
    if (obj_type.count(o.name) && obj_type[o.name] != o.type)
      throw type_error("object " + o.name + " declared with two types");
    obj_type[o.name] = o.type;
  }

  auto objects_of = [&](const std::string &type) {
    std::vector<std::string> out;
    for (const TypedName &o : universe)
      if (types.is_subtype(o.type, type)) out.push_back(o.name);
    return out;
  };

  auto find_pred = [&](const std::string &name) -> const Predicate * {
    for (const Predicate &q : d.predicates)
      if (q.name == name) return &q;
    return nullptr;
  };

  // Well-typedness of ground atoms (init, goal).
  auto check_ground_atom = [&](const Atom &a) {
    const Predicate *q = find_pred(a.name);
    if (!q) throw type_error("undeclared predicate " + a.name + " in problem");
    if (q->params.size() != a.args.size())
      throw type_error("predicate " + a.name + " used with arity " +
                       std::to_string(a.args.size()));
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      auto it = obj_type.find(a.args[i].name);
      if (it == obj_type.end())
        throw type_error("unknown object " + a.args[i].name + " in " + a.key());
      if (!types.is_subtype(it->second, q->params[i].type))
        throw type_error("object " + a.args[i].name + " is not a " +
                         q->params[i].type + " in " + a.key());
    }
  };
  for (const Atom &a : p.init) check_ground_atom(a);
  std::function<void(const Cond &)> check_goal = [&](const Cond &c) {
    if (c.k == Guard::K::atom) check_ground_atom(c.atom);
    for (const Cond &kid : c.kids) check_goal(kid);
  };
  check_goal(p.goal);

  // Instantiate every schema over typed objects (odometer, declaration
  // order), recording candidate ground actions.
  struct Candidate {
    const ActionSchema *schema;
    std::vector<std::string> args;
    std::vector<std::string> pre_pos, pre_neg;
    NormEff eff;
  };
  std::vector<Candidate> cands;
  for (const ActionSchema &a : d.actions) {
    std::vector<std::vector<std::string>> cand_objs;
    bool empty = false;
    for (const TypedName &prm : a.params) {
      cand_objs.push_back(objects_of(prm.type));
      if (cand_objs.back().empty()) empty = true;
    }
    if (empty) continue;
    std::vector<std::size_t> idx(a.params.size(), 0);
    for (;;) {
      Binding b;
      std::vector<std::string> args;
      for (std::size_t i = 0; i < a.params.size(); ++i) {
        b[a.params[i].name] = cand_objs[i][idx[i]];
        args.push_back(cand_objs[i][idx[i]]);
      }
      Candidate c;
      c.schema = &a;
      c.args = std::move(args);
      flatten_pre(subst_cond(a.pre, b), c.pre_pos, c.pre_neg);
      NormEff ne = normalize_eff(a.eff);
      for (auto &alt : ne.alts)
        for (auto &grp : alt) {
          grp.cond = subst_cond(grp.cond, b);
          for (Literal &l : grp.lits) l.atom = subst_atom(l.atom, b);
        }
      c.eff = std::move(ne);
      cands.push_back(std::move(c));

      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == cand_objs[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
  }

  // Relaxed reachability: positive preconditions and positive parts of
  // when-conditions must be reachable before a group's adds count. Keeps the
  // atom universe free of unreachable instantiations.
  std::set<std::string> reach;
  for (const Atom &a : p.init) reach.insert(a.key());
  std::function<bool(const Cond &)> relaxed_fires = [&](const Cond &c) -> bool {
    switch (c.k) {
      case Guard::K::tt:
        return true;
      case Guard::K::ff:
        return false;
      case Guard::K::atom:
        return reach.count(c.atom.key()) > 0;
      case Guard::K::not_:
        return true;  // deletes are free under the relaxation
      case Guard::K::and_:
        for (const Cond &kid : c.kids)
          if (!relaxed_fires(kid)) return false;
        return true;
      case Guard::K::or_:
        for (const Cond &kid : c.kids)
          if (relaxed_fires(kid)) return true;
        return false;
    }
    return false;
  };
  std::vector<char> applic(cands.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      bool ok = true;
      for (const std::string &pp : cands[i].pre_pos)
        if (!reach.count(pp)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      applic[i] = 1;
      for (const auto &alt : cands[i].eff.alts)
        for (const auto &grp : alt) {
          if (!relaxed_fires(grp.cond)) continue;
          for (const Literal &l : grp.lits)
            if (l.positive && reach.insert(l.atom.key()).second)
              changed = true;
        }
    }
  }

  FondModel m;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!applic[i]) continue;
    // Inert instances (no group can ever fire an effect) only bloat the
    // space with no-op self-loops; the compiled trans over foreign object
    // tuples is the main producer.
    bool inert = true;
    for (const auto &alt : cands[i].eff.alts)
      for (const auto &grp : alt)
        if (!grp.lits.empty() && relaxed_fires(grp.cond)) inert = false;
    if (inert) continue;
    Candidate &c = cands[i];
    GroundAction ga;
    ga.name = c.schema->name;
    ga.args = std::move(c.args);
    for (const std::string &k : c.pre_pos) ga.pre_pos.push_back(m.atoms.intern(k));
    for (const std::string &k : c.pre_neg) ga.pre_neg.push_back(m.atoms.intern(k));
    for (auto &alt : c.eff.alts) {
      std::vector<GroundAction::CEff> ce_list;
      for (auto &grp : alt) {
        GroundAction::CEff ce;
        ce.cond = compile_cond(grp.cond, m.atoms);
        for (const Literal &l : grp.lits) {
          int id = m.atoms.intern(l.atom.key());
          (l.positive ? ce.add : ce.del).push_back(id);
        }
        ce_list.push_back(std::move(ce));
      }
      ga.alts.push_back(std::move(ce_list));
    }
    m.actions.push_back(std::move(ga));
  }

  m.goal = compile_cond(p.goal, m.atoms);
  for (const Atom &a : p.init) m.atoms.intern(a.key());

  m.init.assign((m.atoms.size() + 63) / 64, 0);
  for (const Atom &a : p.init) state_set(m.init, m.atoms.intern(a.key()));
  return m;
}

}  // namespace fondrec
