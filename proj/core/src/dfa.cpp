#include "fondrec/dfa.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace fondrec {

// ------------------------------------------------------------------ Guard

bool Guard::eval(const Step &step) const {
  switch (k) {
    case K::tt: return true;
    case K::ff: return false;
    case K::atom: return step.count(atom.key()) > 0;
    case K::not_: return !kids[0].eval(step);
    case K::and_:
      for (const Guard &g : kids)
        if (!g.eval(step)) return false;
      return true;
    case K::or_:
      for (const Guard &g : kids)
        if (g.eval(step)) return true;
      return false;
  }
  return false;
}

std::string Guard::text() const {
  switch (k) {
    case K::tt: return "true";
    case K::ff: return "false";
    case K::atom: return atom.key();
    case K::not_: {
      std::string inner = kids[0].text();
      if (kids[0].k == K::and_ || kids[0].k == K::or_) inner = "(" + inner + ")";
      return "!" + inner;
    }
    case K::and_:
    case K::or_: {
      std::string sep = k == K::and_ ? " & " : " | ";
      std::string out;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) out += sep;
        std::string inner = kids[i].text();
        if (kids[i].k == K::or_ || (k == K::or_ && kids[i].k == K::and_))
          inner = "(" + inner + ")";
        out += inner;
      }
      return out;
    }
  }
  return "?";
}

Guard g_tt() { return Guard{}; }
Guard g_ff() {
  Guard g;
  g.k = Guard::K::ff;
  return g;
}
Guard g_atom(Atom a) {
  Guard g;
  g.k = Guard::K::atom;
  g.atom = std::move(a);
  return g;
}
Guard g_not(Guard inner) {
  Guard g;
  g.k = Guard::K::not_;
  g.kids.push_back(std::move(inner));
  return g;
}
Guard g_and(std::vector<Guard> kids) {
  if (kids.empty()) return g_tt();
  if (kids.size() == 1) return kids[0];
  Guard g;
  g.k = Guard::K::and_;
  g.kids = std::move(kids);
  return g;
}
Guard g_or(std::vector<Guard> kids) {
  if (kids.empty()) return g_ff();
  if (kids.size() == 1) return kids[0];
  Guard g;
  g.k = Guard::K::or_;
  g.kids = std::move(kids);
  return g;
}

// --------------------------------------------------- implicant reduction
//
// Quine-McCluskey-style greedy reduction of a minterm set over k atoms into
// prime-ish implicants. Implicant: (mask, bits) with mask marking care
// positions. Deterministic: inputs sorted, merges scanned in order.

namespace {

struct Implicant {
  std::uint32_t mask = 0;
  std::uint32_t bits = 0;
  bool operator<(const Implicant &o) const {
    if (mask != o.mask) return mask > o.mask;  // more cares first
    return bits < o.bits;
  }
  bool operator==(const Implicant &o) const {
    return mask == o.mask && bits == o.bits;
  }
};

bool covers(const Implicant &a, std::uint32_t minterm) {
  return (minterm & a.mask) == a.bits;
}

std::vector<Implicant> reduce_minterms(const std::vector<std::uint32_t> &minterms,
                                       int k) {
  std::uint32_t full = k >= 32 ? 0xffffffffu : ((1u << k) - 1u);
  std::vector<Implicant> cur;
  cur.reserve(minterms.size());
  for (std::uint32_t m : minterms) cur.push_back(Implicant{full, m});
  std::sort(cur.begin(), cur.end());

  // Repeatedly merge pairs differing in exactly one care bit.
  bool merged = true;
  while (merged) {
    merged = false;
    std::vector<Implicant> next;
    std::vector<char> used(cur.size(), 0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      for (std::size_t j = i + 1; j < cur.size(); ++j) {
        if (cur[i].mask != cur[j].mask) continue;
        std::uint32_t diff = cur[i].bits ^ cur[j].bits;
        if (diff && (diff & (diff - 1)) == 0) {
          Implicant m{cur[i].mask & ~diff, cur[i].bits & ~diff};
          if (std::find(next.begin(), next.end(), m) == next.end())
            next.push_back(m);
          used[i] = used[j] = 1;
          merged = true;
        }
      }
    }
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (!used[i] && std::find(next.begin(), next.end(), cur[i]) == next.end())
        next.push_back(cur[i]);
    cur = std::move(next);
    std::sort(cur.begin(), cur.end());
  }

  // Greedy cover of the original minterms, biggest implicants first.
  std::vector<Implicant> by_size = cur;
  std::sort(by_size.begin(), by_size.end(), [](const Implicant &a, const Implicant &b) {
    int ca = __builtin_popcount(a.mask), cb = __builtin_popcount(b.mask);
    if (ca != cb) return ca < cb;  // fewer cares = wider cover
    if (a.mask != b.mask) return a.mask < b.mask;
    return a.bits < b.bits;
  });
  std::vector<char> covered(minterms.size(), 0);
  std::vector<Implicant> pick;
  for (const Implicant &im : by_size) {
    bool useful = false;
    for (std::size_t t = 0; t < minterms.size(); ++t)
      if (!covered[t] && covers(im, minterms[t])) {
        covered[t] = 1;
        useful = true;
      }
    if (useful) pick.push_back(im);
    if (std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }))
      break;
  }
  std::sort(pick.begin(), pick.end());
  return pick;
}

Guard implicants_to_guard(const std::vector<Implicant> &imps,
                          const std::vector<Atom> &atoms) {
  std::vector<Guard> terms;
  for (const Implicant &im : imps) {
    std::vector<Guard> lits;
    for (std::size_t v = 0; v < atoms.size(); ++v) {
      std::uint32_t bit = 1u << v;
      if (!(im.mask & bit)) continue;
      Guard a = g_atom(atoms[v]);
      lits.push_back(im.bits & bit ? a : g_not(std::move(a)));
    }
    terms.push_back(g_and(std::move(lits)));
  }
  return g_or(std::move(terms));
}

// ------------------------------------------------ future-dialect engine

bool has_kind(const FormulaPtr &f, std::initializer_list<FKind> ks) {
  if (!f) return false;
  for (FKind k : ks)
    if (f->kind == k) return true;
  return has_kind(f->lhs, ks) || has_kind(f->rhs, ks);
}

// Next-normal form: boolean structure over atoms and next-obligations.
FormulaPtr xnf(const FormulaPtr &f) {
  switch (f->kind) {
    case FKind::tt:
    case FKind::ff:
    case FKind::atom:
    case FKind::next:
      return f;
    case FKind::not_:
      return f_not(xnf(f->lhs));
    case FKind::and_:
      return f_and(xnf(f->lhs), xnf(f->rhs));
    case FKind::or_:
      return f_or(xnf(f->lhs), xnf(f->rhs));
    case FKind::until:
      return f_or(xnf(f->rhs), f_and(xnf(f->lhs), f_unary(FKind::next, f)));
    default:
      throw dfa_error("xnf: non-core operator (desugar first)");
  }
}

// Substitute atom truth values, folding boolean constants. Next-nodes stay.
FormulaPtr subst(const FormulaPtr &f, const std::map<std::string, bool> &val) {
  switch (f->kind) {
    case FKind::tt:
    case FKind::ff:
    case FKind::next:
      return f;
    case FKind::atom:
      return val.at(f->atom.key()) ? f_tt() : f_ff();
    case FKind::not_: {
      FormulaPtr s = subst(f->lhs, val);
      if (s->kind == FKind::tt) return f_ff();
      if (s->kind == FKind::ff) return f_tt();
      if (s->kind == FKind::not_) return s->lhs;
      return f_not(s);
    }
    case FKind::and_: {
      FormulaPtr l = subst(f->lhs, val), r = subst(f->rhs, val);
      if (l->kind == FKind::ff || r->kind == FKind::ff) return f_ff();
      if (l->kind == FKind::tt) return r;
      if (r->kind == FKind::tt) return l;
      return f_and(l, r);
    }
    case FKind::or_: {
      FormulaPtr l = subst(f->lhs, val), r = subst(f->rhs, val);
      if (l->kind == FKind::tt || r->kind == FKind::tt) return f_tt();
      if (l->kind == FKind::ff) return r;
      if (r->kind == FKind::ff) return l;
      return f_or(l, r);
    }
    default:
      throw dfa_error("subst: unexpected operator");
  }
}

// Obligation on the continuation: drop the next-wrappers.
FormulaPtr strip_next(const FormulaPtr &f) {
  switch (f->kind) {
    case FKind::tt:
    case FKind::ff:
      return f;
    case FKind::next:
      return f->lhs;
    case FKind::not_: {
      FormulaPtr s = strip_next(f->lhs);
      if (s->kind == FKind::tt) return f_ff();
      if (s->kind == FKind::ff) return f_tt();
      if (s->kind == FKind::not_) return s->lhs;
      return f_not(s);
    }
    case FKind::and_: {
      FormulaPtr l = strip_next(f->lhs), r = strip_next(f->rhs);
      if (l->kind == FKind::ff || r->kind == FKind::ff) return f_ff();
      if (l->kind == FKind::tt) return r;
      if (r->kind == FKind::tt) return l;
      return f_and(l, r);
    }
    case FKind::or_: {
      FormulaPtr l = strip_next(f->lhs), r = strip_next(f->rhs);
      if (l->kind == FKind::tt || r->kind == FKind::tt) return f_tt();
      if (l->kind == FKind::ff) return r;
      if (r->kind == FKind::ff) return l;
      return f_or(l, r);
    }
    default:
      throw dfa_error("strip_next: unexpected operator");
  }
}

// Would stopping right here satisfy the residual? Strong next is false at
// the end of the trace.
bool eval_at_end(const FormulaPtr &f) {
  switch (f->kind) {
    case FKind::tt: return true;
    case FKind::ff: return false;
    case FKind::next: return false;
    case FKind::not_: return !eval_at_end(f->lhs);
    case FKind::and_: return eval_at_end(f->lhs) && eval_at_end(f->rhs);
    case FKind::or_: return eval_at_end(f->lhs) || eval_at_end(f->rhs);
    default:
      throw dfa_error("eval_at_end: unexpected operator");
  }
}

// Canonical key for an obligation formula: truth table over its boolean
// leaves (propositional atoms plus opaque temporal subterms), leaves keyed
// recursively. Equal keys imply equal languages.
struct Canonizer {
  const DfaOptions &opts;
  std::unordered_map<std::string, std::string> cache;  // structural -> canon

  explicit Canonizer(const DfaOptions &o) : opts(o) {}

  std::string leaf_id(const FormulaPtr &f) {
    switch (f->kind) {
      case FKind::atom:
        return "a[" + f->atom.key() + "]";
      case FKind::next:
        return "X[" + canon(f->lhs) + "]";
      case FKind::until:
        return "U[" + canon(f->lhs) + ";" + canon(f->rhs) + "]";
      default:
        throw dfa_error("leaf_id: not a leaf");
    }
  }

  void collect_leaves(const FormulaPtr &f, std::vector<std::string> &ids,
                      std::vector<FormulaPtr> &nodes) {
    switch (f->kind) {
      case FKind::tt:
      case FKind::ff:
        return;
      case FKind::not_:
        collect_leaves(f->lhs, ids, nodes);
        return;
      case FKind::and_:
      case FKind::or_:
        collect_leaves(f->lhs, ids, nodes);
        collect_leaves(f->rhs, ids, nodes);
        return;
      default: {
        std::string id = leaf_id(f);
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
          ids.push_back(id);
          nodes.push_back(f);
        }
      }
    }
  }

  bool eval_under(const FormulaPtr &f,
                  const std::unordered_map<std::string, bool> &leafval) {
    switch (f->kind) {
      case FKind::tt: return true;
      case FKind::ff: return false;
      case FKind::not_: return !eval_under(f->lhs, leafval);
      case FKind::and_:
        return eval_under(f->lhs, leafval) && eval_under(f->rhs, leafval);
      case FKind::or_:
        return eval_under(f->lhs, leafval) || eval_under(f->rhs, leafval);
      default:
        return leafval.at(leaf_id(f));
    }
  }

  std::string canon(const FormulaPtr &f) {
    std::string structural = print_formula(f);
    auto it = cache.find(structural);
    if (it != cache.end()) return it->second;

    std::vector<std::string> ids;
    std::vector<FormulaPtr> nodes;
    collect_leaves(f, ids, nodes);
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

    if (ids.size() > static_cast<std::size_t>(opts.width_cap))
      throw dfa_error("state formula too wide (" + std::to_string(ids.size()) +
                      " boolean leaves, cap " + std::to_string(opts.width_cap) + ")");

    std::size_t n = ids.size();
    std::vector<char> tab(1ull << n);
    std::unordered_map<std::string, bool> leafval;
    for (std::uint64_t m = 0; m < (1ull << n); ++m) {
      for (std::size_t i = 0; i < n; ++i)
        leafval[ids[order[i]]] = (m >> i) & 1;
      tab[m] = eval_under(f, leafval);
    }

    // Drop leaves the function does not depend on, so boolean-redundant
    // obligations share a key.
    std::vector<std::string> kept;
    for (std::size_t i : order) kept.push_back(ids[i]);
    for (std::size_t b = 0; b < kept.size();) {
      std::size_t nn = kept.size();
      bool essential = false;
      for (std::uint64_t m = 0; m < (1ull << nn) && !essential; ++m)
        if (!((m >> b) & 1) && tab[m] != tab[m | (1ull << b)]) essential = true;
      if (essential) {
        ++b;
        continue;
      }
      std::vector<char> ntab(1ull << (nn - 1));
      for (std::uint64_t m = 0; m < ntab.size(); ++m) {
        std::uint64_t low = m & ((1ull << b) - 1);
        std::uint64_t high = (m >> b) << (b + 1);
        ntab[m] = tab[high | low];
      }
      tab = std::move(ntab);
      kept.erase(kept.begin() + static_cast<long>(b));
    }

    std::string key = "TT|";
    for (const std::string &id : kept) key += id + ",";
    key += '|';
    std::uint8_t nibble = 0;
    int nb = 0;
    for (std::size_t m = 0; m < tab.size(); ++m) {
      nibble = static_cast<std::uint8_t>((nibble << 1) | (tab[m] ? 1 : 0));
      if (++nb == 4 || m + 1 == tab.size()) {
        key += "0123456789abcdef"[nibble & 0xf];
        nibble = 0;
        nb = 0;
      }
    }
    return cache.emplace(std::move(structural), std::move(key)).first->second;
  }
};

void collect_prop_atoms(const FormulaPtr &f, std::vector<Atom> &out) {
  switch (f->kind) {
    case FKind::tt:
    case FKind::ff:
    case FKind::next:
      return;
    case FKind::atom:
      if (std::find(out.begin(), out.end(), f->atom) == out.end())
        out.push_back(f->atom);
      return;
    case FKind::not_:
      collect_prop_atoms(f->lhs, out);
      return;
    case FKind::and_:
    case FKind::or_:
      collect_prop_atoms(f->lhs, out);
      collect_prop_atoms(f->rhs, out);
      return;
    default:
      throw dfa_error("collect_prop_atoms: unexpected operator");
  }
}

Dfa build_future(const FormulaPtr &f0, const DfaOptions &opts) {
  Canonizer cz(opts);
  struct StateRec {
    FormulaPtr formula;
    bool acc;
  };
  std::vector<StateRec> states;
  std::unordered_map<std::string, int> by_key;

  auto intern = [&](const FormulaPtr &g, bool acc) {
    std::string key = cz.canon(g) + (acc ? "#A" : "#R");
    auto it = by_key.find(key);
    if (it != by_key.end()) return it->second;
    int id = static_cast<int>(states.size());
    if (id >= opts.state_cap)
      throw dfa_error("DFA state cap (" + std::to_string(opts.state_cap) + ") exceeded");
    states.push_back(StateRec{g, acc});
    by_key.emplace(std::move(key), id);
    return id;
  };

  Dfa d;
  int init = intern(f0, false);
  d.initial = init;

  std::deque<int> todo{init};
  std::vector<char> expanded;
  while (!todo.empty()) {
    int s = todo.front();
    todo.pop_front();
    if (static_cast<std::size_t>(s) < expanded.size() && expanded[s]) continue;
    if (static_cast<std::size_t>(s) >= expanded.size()) expanded.resize(s + 1, 0);
    expanded[s] = 1;

    FormulaPtr x = xnf(states[s].formula);
    std::vector<Atom> props;
    collect_prop_atoms(x, props);
    std::sort(props.begin(), props.end());
    if (props.size() > static_cast<std::size_t>(opts.width_cap))
      throw dfa_error("transition atom width exceeds cap");

    std::map<int, std::vector<std::uint32_t>> minterms_by_target;
    std::size_t k = props.size();
    for (std::uint32_t m = 0; m < (1u << k); ++m) {
      std::map<std::string, bool> val;
      for (std::size_t i = 0; i < k; ++i) val[props[i].key()] = (m >> i) & 1;
      FormulaPtr r = subst(x, val);
      FormulaPtr succ = strip_next(r);
      bool acc = eval_at_end(r);
      int t = intern(succ, acc);
      minterms_by_target[t].push_back(m);
      if (static_cast<std::size_t>(t) >= expanded.size() || !expanded[t])
        todo.push_back(t);
    }

    if (d.trans.size() <= static_cast<std::size_t>(s)) d.trans.resize(states.size());
    for (auto &[target, minterms] : minterms_by_target) {
      Guard g = implicants_to_guard(reduce_minterms(minterms, static_cast<int>(k)), props);
      d.trans[s].emplace_back(std::move(g), target);
    }
  }

  d.trans.resize(states.size());
  d.accepting.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) d.accepting[i] = states[i].acc;
  return d;
}

// --------------------------------------------------- past-dialect engine

struct PastEngine {
  std::vector<FormulaPtr> subs;             // postorder, root last
  std::unordered_map<std::string, int> idx; // structural print -> index
  std::vector<Atom> props;

  int add(const FormulaPtr &f) {
    if (f->lhs) add(f->lhs);
    if (f->rhs) add(f->rhs);
    std::string key = print_formula(f);
    auto it = idx.find(key);
    if (it != idx.end()) return it->second;
    int id = static_cast<int>(subs.size());
    subs.push_back(f);
    idx.emplace(std::move(key), id);
    if (f->kind == FKind::atom &&
        std::find(props.begin(), props.end(), f->atom) == props.end())
      props.push_back(f->atom);
    return id;
  }

  int of(const FormulaPtr &f) const { return idx.at(print_formula(f)); }

  // One synchronous update: previous valuation (empty = before the trace)
  // plus the new symbol.
  std::vector<char> step(const std::vector<char> *prev,
                         const std::map<std::string, bool> &sym) const {
    std::vector<char> v(subs.size(), 0);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      const FormulaPtr &f = subs[i];
      switch (f->kind) {
        case FKind::tt: v[i] = 1; break;
        case FKind::ff: v[i] = 0; break;
        case FKind::atom: v[i] = sym.at(f->atom.key()); break;
        case FKind::not_: v[i] = !v[of(f->lhs)]; break;
        case FKind::and_: v[i] = v[of(f->lhs)] && v[of(f->rhs)]; break;
        case FKind::or_: v[i] = v[of(f->lhs)] || v[of(f->rhs)]; break;
        case FKind::before:
          v[i] = prev ? (*prev)[of(f->lhs)] : 0;
          break;
        case FKind::since:
          v[i] = v[of(f->rhs)] || (v[of(f->lhs)] && (prev ? (*prev)[i] : 0));
          break;
        default:
          throw dfa_error("past engine: unexpected operator (desugar first)");
      }
    }
    return v;
  }
};

Dfa build_past(const FormulaPtr &f0, const DfaOptions &opts) {
  PastEngine eng;
  eng.add(f0);
  std::sort(eng.props.begin(), eng.props.end());
  if (eng.props.size() > static_cast<std::size_t>(opts.width_cap))
    throw dfa_error("transition atom width exceeds cap");

  // State 0 is the pre-trace state; others carry a valuation vector.
  std::vector<std::vector<char>> vals;  // state id - 1 -> valuation
  std::unordered_map<std::string, int> by_key;
  auto intern = [&](std::vector<char> v) {
    std::string key(v.begin(), v.end());
    auto it = by_key.find(key);
    if (it != by_key.end()) return it->second;
    int id = static_cast<int>(vals.size()) + 1;
    if (id >= opts.state_cap)
      throw dfa_error("DFA state cap (" + std::to_string(opts.state_cap) + ") exceeded");
    vals.push_back(std::move(v));
    by_key.emplace(std::move(key), id);
    return id;
  };

  Dfa d;
  d.initial = 0;
  std::deque<int> todo{0};
  std::vector<char> expanded;
  std::vector<std::vector<std::pair<Guard, int>>> trans(1);

  std::size_t k = eng.props.size();
  while (!todo.empty()) {
    int s = todo.front();
    todo.pop_front();
    if (static_cast<std::size_t>(s) < expanded.size() && expanded[s]) continue;
    if (static_cast<std::size_t>(s) >= expanded.size()) expanded.resize(s + 1, 0);
    expanded[s] = 1;

    std::map<int, std::vector<std::uint32_t>> minterms_by_target;
    for (std::uint32_t m = 0; m < (1u << k); ++m) {
      std::map<std::string, bool> sym;
      for (std::size_t i = 0; i < k; ++i) sym[eng.props[i].key()] = (m >> i) & 1;
      std::vector<char> v =
          eng.step(s == 0 ? nullptr : &vals[s - 1], sym);
      int t = intern(std::move(v));
      minterms_by_target[t].push_back(m);
      if (static_cast<std::size_t>(t) >= expanded.size() || !expanded[t])
        todo.push_back(t);
    }
    if (trans.size() < vals.size() + 1) trans.resize(vals.size() + 1);
    for (auto &[target, minterms] : minterms_by_target) {
      Guard g = implicants_to_guard(reduce_minterms(minterms, static_cast<int>(k)),
                                    eng.props);
      trans[s].emplace_back(std::move(g), target);
    }
  }

  trans.resize(vals.size() + 1);
  d.trans = std::move(trans);
  d.accepting.assign(vals.size() + 1, 0);
  int root = eng.of(f0);
  for (std::size_t i = 0; i < vals.size(); ++i)
    d.accepting[i + 1] = vals[i][root];
  return d;
}

void collect_guard_atoms(const Guard &g, std::vector<Atom> &out) {
  if (g.k == Guard::K::atom) {
    if (std::find(out.begin(), out.end(), g.atom) == out.end())
      out.push_back(g.atom);
  }
  for (const Guard &kid : g.kids) collect_guard_atoms(kid, out);
}

void refresh_atoms(Dfa &d) {
  d.atoms.clear();
  for (const auto &row : d.trans)
    for (const auto &[g, t] : row) collect_guard_atoms(g, d.atoms);
  std::sort(d.atoms.begin(), d.atoms.end());
}

}  // namespace

Dfa compile_to_dfa(const FormulaPtr &f, const DfaOptions &opts) {
  FormulaPtr core = desugar(f);
  bool past = has_kind(core, {FKind::before, FKind::since});
  bool future = has_kind(core, {FKind::next, FKind::until});
  if (past && future) throw semantic_error("mixed-tense formula");
  Dfa raw;
  if (past || (!future && f->dialect == Dialect::ppltl))
    raw = build_past(core, opts);
  else
    raw = build_future(core, opts);
  refresh_atoms(raw);
  return minimize(raw, opts);
}

bool accepts(const Dfa &d, const Trace &t) {
  if (t.empty()) throw semantic_error("accepts: empty trace");
  int s = d.initial;
  for (const Step &step : t) {
    int next = -1;
    for (const auto &[g, target] : d.trans[s])
      if (g.eval(step)) {
        next = target;
        break;
      }
    if (next < 0) throw dfa_error("non-total DFA: no guard matched");
    s = next;
  }
  return d.accepting[s] != 0;
}

// ---------------------------------------------------------- minimization

namespace {

// Dense transition table of one state over its own mentioned atoms.
struct StateTable {
  std::vector<Atom> atoms;          // sorted
  std::vector<int> target;          // size 2^|atoms|
};

StateTable state_table(const Dfa &d, int s, const DfaOptions &opts) {
  StateTable st;
  for (const auto &[g, t] : d.trans[s]) collect_guard_atoms(g, st.atoms);
  std::sort(st.atoms.begin(), st.atoms.end());
  st.atoms.erase(std::unique(st.atoms.begin(), st.atoms.end()), st.atoms.end());
  if (st.atoms.size() > static_cast<std::size_t>(opts.width_cap))
    throw dfa_error("minimize: state guard width exceeds cap");
  std::size_t k = st.atoms.size();
  st.target.assign(1u << k, -1);
  for (std::uint32_t m = 0; m < (1u << k); ++m) {
    Step step;
    for (std::size_t i = 0; i < k; ++i)
      if ((m >> i) & 1) step.insert(st.atoms[i].key());
    int chosen = -1;
    for (const auto &[g, t] : d.trans[s])
      if (g.eval(step)) {
        if (chosen >= 0) throw dfa_error("minimize: overlapping guards");
        chosen = t;
      }
    if (chosen < 0) throw dfa_error("minimize: non-total state");
    st.target[m] = chosen;
  }
  return st;
}

// Abstract transition signature: essential atoms only, outputs mapped
// through `out` (e.g. block ids). Comparable across states.
struct Signature {
  std::vector<std::string> atoms;
  std::vector<int> out;
  bool operator==(const Signature &o) const {
    return atoms == o.atoms && out == o.out;
  }
  bool operator<(const Signature &o) const {
    if (atoms != o.atoms) return atoms < o.atoms;
    return out < o.out;
  }
};

Signature reduce_signature(const StateTable &st, const std::vector<int> &block) {
  std::size_t k = st.atoms.size();
  std::vector<int> out(st.target.size());
  for (std::size_t m = 0; m < st.target.size(); ++m) out[m] = block[st.target[m]];

  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < k; ++v) keep.push_back(v);

  // Drop atoms that never change the output.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t ki = 0; ki < keep.size(); ++ki) {
      std::size_t bit = ki;
      std::size_t n = keep.size();
      bool essential = false;
      for (std::uint32_t m = 0; m < (1u << n) && !essential; ++m)
        if (!((m >> bit) & 1) && out[m] != out[m | (1u << bit)]) essential = true;
      if (essential) continue;
      // Project the table without that bit.
      std::vector<int> nout(1u << (n - 1));
      for (std::uint32_t m = 0; m < (1u << (n - 1)); ++m) {
        std::uint32_t low = m & ((1u << bit) - 1);
        std::uint32_t high = (m >> bit) << (bit + 1);
        nout[m] = out[high | low];
      }
      out = std::move(nout);
      keep.erase(keep.begin() + static_cast<long>(ki));
      changed = true;
      break;
    }
  }

  Signature sig;
  for (std::size_t v : keep) sig.atoms.push_back(st.atoms[v].key());
  sig.out = std::move(out);
  return sig;
}

}  // namespace

Dfa minimize(const Dfa &d, const DfaOptions &opts) {
  int n = d.num_states();
  if (n == 0) return d;

  // Trim to reachable states first.
  std::vector<int> remap(n, -1);
  std::vector<int> order;
  order.push_back(d.initial);
  remap[d.initial] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const auto &[g, t] : d.trans[order[i]])
      if (remap[t] < 0) {
        remap[t] = static_cast<int>(order.size());
        order.push_back(t);
      }
  Dfa r;
  r.initial = 0;
  r.accepting.resize(order.size());
  r.trans.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    r.accepting[i] = d.accepting[order[i]];
    for (const auto &[g, t] : d.trans[order[i]])
      r.trans[i].emplace_back(g, remap[t]);
  }
  n = r.num_states();

  std::vector<StateTable> tables;
  tables.reserve(n);
  for (int s = 0; s < n; ++s) tables.push_back(state_table(r, s, opts));

  // Moore partition refinement.
  std::vector<int> block(n);
  for (int s = 0; s < n; ++s) block[s] = r.accepting[s] ? 1 : 0;
  for (;;) {
    std::map<std::pair<int, Signature>, int> groups;
    std::vector<int> next(n);
    for (int s = 0; s < n; ++s) {
      auto key = std::make_pair(block[s], reduce_signature(tables[s], block));
      auto it = groups.find(key);
      if (it == groups.end())
        it = groups.emplace(std::move(key), static_cast<int>(groups.size())).first;
      next[s] = it->second;
    }
    if (next == block) break;
    block = std::move(next);
  }

  int nblocks = *std::max_element(block.begin(), block.end()) + 1;
  std::vector<char> bacc(nblocks, 0);
  for (int s = 0; s < n; ++s) bacc[block[s]] = r.accepting[s];

  // Fuse the initial block into a transition-equivalent block when nothing
  // enters it: its acceptance then only decides the (out-of-scope) empty
  // trace, so the merged block keeps the target's bit.
  int init_block = block[r.initial];
  {
    bool incoming = false;
    for (int s = 0; s < n && !incoming; ++s)
      for (int t : tables[s].target)
        if (block[t] == init_block) {
          incoming = true;
          break;
        }
    if (!incoming) {
      Signature mine = reduce_signature(tables[r.initial], block);
      for (int s = 0; s < n; ++s) {
        if (block[s] == init_block) continue;
        if (reduce_signature(tables[s], block) == mine) {
          int merged = block[s];
          bacc[init_block] = bacc[merged];
          for (int q = 0; q < n; ++q)
            if (block[q] == init_block) block[q] = merged;
          break;
        }
      }
      // Renumber blocks densely, carrying acceptance.
      std::map<int, int> dense;
      std::vector<char> nbacc;
      for (int q = 0; q < n; ++q) {
        auto it = dense.find(block[q]);
        if (it == dense.end()) {
          it = dense.emplace(block[q], static_cast<int>(dense.size())).first;
          nbacc.push_back(bacc[block[q]]);
        }
        block[q] = it->second;
      }
      init_block = block[r.initial];
      nblocks = static_cast<int>(dense.size());
      bacc = std::move(nbacc);
    }
  }

  // Representative = lowest state id per block.
  std::vector<int> rep(nblocks, -1);
  for (int s = 0; s < n; ++s)
    if (rep[block[s]] < 0) rep[block[s]] = s;

  // Canonical BFS numbering over the quotient, successors by first minterm.
  std::vector<int> bfs(nblocks, -1);
  std::vector<int> bfs_order;
  bfs[init_block] = 0;
  bfs_order.push_back(init_block);
  for (std::size_t i = 0; i < bfs_order.size(); ++i) {
    const StateTable &st = tables[rep[bfs_order[i]]];
    for (int t : st.target) {
      int b = block[t];
      if (bfs[b] < 0) {
        bfs[b] = static_cast<int>(bfs_order.size());
        bfs_order.push_back(b);
      }
    }
  }

  Dfa out;
  out.initial = 0;
  out.accepting.resize(bfs_order.size());
  out.trans.resize(bfs_order.size());
  for (std::size_t i = 0; i < bfs_order.size(); ++i) {
    int b = bfs_order[i];
    const StateTable &st = tables[rep[b]];
    out.accepting[i] = bacc[b];
    std::map<int, std::vector<std::uint32_t>> minterms_by_target;
    for (std::uint32_t m = 0; m < st.target.size(); ++m)
      minterms_by_target[bfs[block[st.target[m]]]].push_back(m);
    // Emit in first-encounter order for stable output.
    std::vector<std::pair<std::uint32_t, int>> targets;
    for (auto &[t, ms] : minterms_by_target) targets.emplace_back(ms.front(), t);
    std::sort(targets.begin(), targets.end());
    for (auto &[first, t] : targets) {
      Guard g = implicants_to_guard(
          reduce_minterms(minterms_by_target[t], static_cast<int>(st.atoms.size())),
          st.atoms);
      out.trans[i].emplace_back(std::move(g), t);
    }
  }
  refresh_atoms(out);
  return out;
}

// ------------------------------------------------------------ lifting

const std::string *ObjectMapping::var_of(const std::string &obj) const {
  for (const auto &[o, v] : pairs)
    if (o == obj) return &v;
  return nullptr;
}

const std::string *ObjectMapping::obj_of(const std::string &var) const {
  for (const auto &[o, v] : pairs)
    if (v == var) return &o;
  return nullptr;
}

namespace {

Guard map_guard(const Guard &g, const std::function<Term(const Term &)> &fn) {
  Guard out = g;
  if (out.k == Guard::K::atom)
    for (Term &t : out.atom.args) t = fn(t);
  for (Guard &kid : out.kids) kid = map_guard(kid, fn);
  return out;
}

}  // namespace

Pdfa lift_to_pdfa(const Dfa &d, const ObjectMapping &m) {
  Pdfa p;
  p.mapping = m;
  for (const auto &[obj, var] : m.pairs) p.params.push_back(var);
  p.dfa = d;
  auto lift_term = [&](const Term &t) -> Term {
    if (t.is_var) return t;
    const std::string *v = m.var_of(t.name);
    if (!v) throw dfa_error("lift_to_pdfa: unmapped object symbol '" + t.name + "'");
    return Term{*v, true};
  };
  for (auto &row : p.dfa.trans)
    for (auto &[g, t] : row) g = map_guard(g, lift_term);
  refresh_atoms(p.dfa);
  return p;
}

Dfa ground_pdfa(const Pdfa &p, const std::map<std::string, std::string> &binding) {
  for (const std::string &v : p.params)
    if (!binding.count(v))
      throw dfa_error("ground_pdfa: unbound variable '" + v + "'");
  Dfa d = p.dfa;
  auto ground_term = [&](const Term &t) -> Term {
    if (!t.is_var) return t;
    auto it = binding.find(t.name);
    if (it == binding.end())
      throw dfa_error("ground_pdfa: unbound variable '" + t.name + "'");
    return Term{it->second, false};
  };
  for (auto &row : d.trans)
    for (auto &[g, t] : row) g = map_guard(g, ground_term);
  refresh_atoms(d);
  return d;
}

std::string to_dot(const Dfa &d, const std::string &name) {
  std::ostringstream out;
  out << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  __init [shape=point];\n";
  for (int s = 0; s < d.num_states(); ++s)
    if (d.accepting[s])
      out << "  q" << s << " [shape=doublecircle];\n";
  out << "  __init -> q" << d.initial << ";\n";
  for (int s = 0; s < d.num_states(); ++s)
    for (const auto &[g, t] : d.trans[s])
      out << "  q" << s << " -> q" << t << " [label=\"" << g.text() << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace fondrec
