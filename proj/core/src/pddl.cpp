#include "fondrec/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace fondrec {

Eff e_lit(Literal l) {
  Eff e;
  e.k = Eff::K::lit;
  e.lit = std::move(l);
  return e;
}
Eff e_and(std::vector<Eff> kids) {
  Eff e;
  e.k = Eff::K::and_;
  e.kids = std::move(kids);
  return e;
}
Eff e_oneof(std::vector<Eff> kids) {
  Eff e;
  e.k = Eff::K::oneof;
  e.kids = std::move(kids);
  return e;
}
Eff e_when(Cond c, std::vector<Eff> then_lits) {
  Eff e;
  e.k = Eff::K::when;
  e.cond = std::move(c);
  e.kids = std::move(then_lits);
  return e;
}

// ------------------------------------------------------------- s-expr

namespace {

struct Sx {
  bool is_list = false;
  std::string sym;
  std::vector<Sx> kids;
  int line = 0, col = 0;
};

struct SxParser {
  const std::string &src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit SxParser(const std::string &s) : src(s) {}

  void advance() {
    if (src[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == ';') {
        while (pos < src.size() && src[pos] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }

  Sx parse() {
    skip_ws();
    if (pos >= src.size()) throw pddl_error("unexpected end of input", line, col);
    Sx node;
    node.line = line;
    node.col = col;
    if (src[pos] == '(') {
      advance();
      node.is_list = true;
      for (;;) {
        skip_ws();
        if (pos >= src.size())
          throw pddl_error("missing ')'", node.line, node.col);
        if (src[pos] == ')') {
          advance();
          return node;
        }
        node.kids.push_back(parse());
      }
    }
    if (src[pos] == ')') throw pddl_error("unexpected ')'", line, col);
    std::string sym;
    while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
           src[pos] != '(' && src[pos] != ')' && src[pos] != ';') {
      sym += src[pos];
      advance();
    }
    node.sym = std::move(sym);
    return node;
  }
};

[[noreturn]] void fail(const Sx &at, const std::string &msg) {
  throw pddl_error(msg, at.line, at.col);
}

const std::string &head(const Sx &s) {
  static const std::string empty;
  if (!s.is_list || s.kids.empty() || s.kids[0].is_list) return empty;
  return s.kids[0].sym;
}

// names... - type, repeated; untyped names get "object".
std::vector<TypedName> parse_typed_list(const Sx &list, std::size_t from = 0) {
  std::vector<TypedName> out;
  std::vector<std::string> pending;
  for (std::size_t i = from; i < list.kids.size(); ++i) {
    const Sx &k = list.kids[i];
    if (k.is_list) fail(k, "expected a name");
    if (k.sym == "-") {
      if (++i >= list.kids.size()) fail(k, "missing type after '-'");
      const Sx &ty = list.kids[i];
      if (ty.is_list) fail(ty, "expected a type name");
      for (std::string &n : pending) out.push_back(TypedName{std::move(n), ty.sym});
      pending.clear();
    } else {
      pending.push_back(k.sym);
    }
  }
  for (std::string &n : pending) out.push_back(TypedName{std::move(n), "object"});
  return out;
}

Atom parse_atom(const Sx &s) {
  if (!s.is_list || s.kids.empty() || s.kids[0].is_list)
    fail(s, "expected an atom");
  Atom a;
  a.name = s.kids[0].sym;
  for (std::size_t i = 1; i < s.kids.size(); ++i) {
    const Sx &arg = s.kids[i];
    if (arg.is_list) fail(arg, "expected an atom argument");
    if (!arg.sym.empty() && arg.sym[0] == '?')
      a.args.push_back(Term{arg.sym.substr(1), true});
    else
      a.args.push_back(Term{arg.sym, false});
  }
  return a;
}

Cond parse_cond(const Sx &s) {
  const std::string &h = head(s);
  if (h == "and") {
    std::vector<Cond> kids;
    for (std::size_t i = 1; i < s.kids.size(); ++i)
      kids.push_back(parse_cond(s.kids[i]));
    return g_and(std::move(kids));
  }
  if (h == "or") {
    std::vector<Cond> kids;
    for (std::size_t i = 1; i < s.kids.size(); ++i)
      kids.push_back(parse_cond(s.kids[i]));
    return g_or(std::move(kids));
  }
  if (h == "not") {
    if (s.kids.size() != 2) fail(s, "'not' takes one argument");
    return g_not(parse_cond(s.kids[1]));
  }
  if (h == "=") throw unsupported_error("equality conditions are not supported");
  if (h == "forall" || h == "exists")
    throw unsupported_error("quantified conditions are not supported");
  if (h == "when" || h == "oneof") fail(s, "effect keyword in a condition");
  return g_atom(parse_atom(s));
}

Literal parse_literal(const Sx &s) {
  if (head(s) == "not") {
    if (s.kids.size() != 2) fail(s, "'not' takes one argument");
    return Literal{parse_atom(s.kids[1]), false};
  }
  return Literal{parse_atom(s), true};
}

Eff parse_eff(const Sx &s, bool top) {
  const std::string &h = head(s);
  if (h == "and") {
    std::vector<Eff> kids;
    for (std::size_t i = 1; i < s.kids.size(); ++i)
      kids.push_back(parse_eff(s.kids[i], top));
    return e_and(std::move(kids));
  }
  if (h == "oneof") {
    if (!top) fail(s, "'oneof' is only allowed at the top level of an effect");
    if (s.kids.size() < 2) fail(s, "'oneof' needs at least one branch");
    std::vector<Eff> kids;
    for (std::size_t i = 1; i < s.kids.size(); ++i)
      kids.push_back(parse_eff(s.kids[i], false));
    return e_oneof(std::move(kids));
  }
  if (h == "when") {
    if (s.kids.size() != 3) fail(s, "'when' takes a condition and an effect");
    Cond c = parse_cond(s.kids[1]);
    const Sx &then = s.kids[2];
    std::vector<Eff> lits;
    if (head(then) == "and") {
      for (std::size_t i = 1; i < then.kids.size(); ++i) {
        if (head(then.kids[i]) == "when" || head(then.kids[i]) == "oneof")
          fail(then.kids[i], "nested conditional/non-deterministic effect");
        lits.push_back(e_lit(parse_literal(then.kids[i])));
      }
    } else {
      if (head(then) == "when" || head(then) == "oneof")
        fail(then, "nested conditional/non-deterministic effect");
      lits.push_back(e_lit(parse_literal(then)));
    }
    return e_when(std::move(c), std::move(lits));
  }
  if (h == "forall")
    throw unsupported_error("quantified effects are not supported");
  return e_lit(parse_literal(s));
}

const Sx &expect_list(const Sx &s, const char *what) {
  if (!s.is_list) fail(s, std::string("expected ") + what);
  return s;
}

const std::vector<std::string> kSupportedReqs = {
    ":strips", ":typing", ":negative-preconditions", ":conditional-effects",
    ":non-deterministic"};

}  // namespace

DomainModel parse_domain(const std::string &text) {
  SxParser sp(text);
  Sx root = sp.parse();
  if (!sp.at_end()) throw pddl_error("trailing input after domain", sp.line, sp.col);
  if (head(root) != "define") fail(root, "expected (define ...)");
  if (root.kids.size() < 2 || head(root.kids[1]) != "domain")
    fail(root, "expected (domain <name>)");
  DomainModel d;
  if (root.kids[1].kids.size() != 2 || root.kids[1].kids[1].is_list)
    fail(root.kids[1], "expected a domain name");
  d.name = root.kids[1].kids[1].sym;

  for (std::size_t i = 2; i < root.kids.size(); ++i) {
    const Sx &sec = expect_list(root.kids[i], "a domain section");
    const std::string &h = head(sec);
    if (h == ":requirements") {
      for (std::size_t j = 1; j < sec.kids.size(); ++j) {
        const std::string &r = sec.kids[j].sym;
        if (std::find(kSupportedReqs.begin(), kSupportedReqs.end(), r) ==
            kSupportedReqs.end())
          throw unsupported_error("unsupported requirement " + r);
        d.requirements.push_back(r);
      }
    } else if (h == ":types") {
      d.types = parse_typed_list(sec, 1);
    } else if (h == ":constants") {
      d.constants = parse_typed_list(sec, 1);
    } else if (h == ":predicates") {
      for (std::size_t j = 1; j < sec.kids.size(); ++j) {
        const Sx &ps = expect_list(sec.kids[j], "a predicate declaration");
        if (ps.kids.empty() || ps.kids[0].is_list)
          fail(ps, "expected a predicate name");
        Predicate p;
        p.name = ps.kids[0].sym;
        std::vector<TypedName> params = parse_typed_list(ps, 1);
        for (TypedName &tn : params) {
          if (tn.name.empty() || tn.name[0] != '?')
            fail(ps, "predicate parameters must be variables");
          tn.name = tn.name.substr(1);
        }
        p.params = std::move(params);
        d.predicates.push_back(std::move(p));
      }
    } else if (h == ":action") {
      if (sec.kids.size() < 2 || sec.kids[1].is_list)
        fail(sec, "expected an action name");
      ActionSchema a;
      a.name = sec.kids[1].sym;
      a.pre = g_tt();
      a.eff = e_and({});
      if ((sec.kids.size() - 2) % 2 != 0)
        fail(sec, "dangling action field");
      for (std::size_t j = 2; j + 1 < sec.kids.size(); j += 2) {
        const std::string &key = sec.kids[j].sym;
        const Sx &val = sec.kids[j + 1];
        if (key == ":parameters") {
          std::vector<TypedName> params = parse_typed_list(expect_list(val, "a parameter list"));
          for (TypedName &tn : params) {
            if (tn.name.empty() || tn.name[0] != '?')
              fail(val, "action parameters must be variables");
            tn.name = tn.name.substr(1);
          }
          a.params = std::move(params);
        } else if (key == ":precondition") {
          a.pre = parse_cond(val);
        } else if (key == ":effect") {
          a.eff = parse_eff(val, true);
        } else {
          throw unsupported_error("unsupported action field " + key);
        }
      }
      d.actions.push_back(std::move(a));
    } else {
      throw unsupported_error("unsupported domain section " + h);
    }
  }

  // Every predicate used anywhere must be declared with the right arity.
  auto check_atom = [&](const Atom &at) {
    for (const Predicate &p : d.predicates)
      if (p.name == at.name) {
        if (p.params.size() != at.args.size())
          throw type_error("predicate " + at.name + " used with arity " +
                           std::to_string(at.args.size()) + ", declared " +
                           std::to_string(p.params.size()));
        return;
      }
    throw type_error("undeclared predicate " + at.name);
  };
  std::function<void(const Cond &)> check_cond = [&](const Cond &c) {
    if (c.k == Guard::K::atom) check_atom(c.atom);
    for (const Cond &kid : c.kids) check_cond(kid);
  };
  std::function<void(const Eff &)> check_eff = [&](const Eff &e) {
    if (e.k == Eff::K::lit) check_atom(e.lit.atom);
    if (e.k == Eff::K::when) check_cond(e.cond);
    for (const Eff &kid : e.kids) check_eff(kid);
  };
  for (const ActionSchema &a : d.actions) {
    check_cond(a.pre);
    check_eff(a.eff);
  }
  return d;
}

ProblemModel parse_problem(const std::string &text) {
  SxParser sp(text);
  Sx root = sp.parse();
  if (!sp.at_end()) throw pddl_error("trailing input after problem", sp.line, sp.col);
  if (head(root) != "define") fail(root, "expected (define ...)");
  if (root.kids.size() < 2 || head(root.kids[1]) != "problem")
    fail(root, "expected (problem <name>)");
  ProblemModel p;
  if (root.kids[1].kids.size() != 2 || root.kids[1].kids[1].is_list)
    fail(root.kids[1], "expected a problem name");
  p.name = root.kids[1].kids[1].sym;
  p.goal = g_tt();

  for (std::size_t i = 2; i < root.kids.size(); ++i) {
    const Sx &sec = expect_list(root.kids[i], "a problem section");
    const std::string &h = head(sec);
    if (h == ":domain") {
      if (sec.kids.size() != 2) fail(sec, "expected a domain name");
      p.domain_name = sec.kids[1].sym;
    } else if (h == ":objects") {
      p.objects = parse_typed_list(sec, 1);
    } else if (h == ":init") {
      // Accept both (:init atoms...) and (:init (and atoms...)).
      std::size_t from = 1;
      const std::vector<Sx> *items = &sec.kids;
      if (sec.kids.size() == 2 && head(sec.kids[1]) == "and") {
        items = &sec.kids[1].kids;
        from = 1;
      }
      for (std::size_t j = from; j < items->size(); ++j) {
        Atom a = parse_atom((*items)[j]);
        if (a.name == "=")
          throw unsupported_error("equality in :init is not supported");
        for (const Term &t : a.args)
          if (t.is_var) fail((*items)[j], "init atoms must be ground");
        p.init.push_back(std::move(a));
      }
    } else if (h == ":goal") {
      if (sec.kids.size() != 2) fail(sec, "expected a goal condition");
      p.goal = parse_cond(sec.kids[1]);
    } else {
      throw unsupported_error("unsupported problem section " + h);
    }
  }
  return p;
}

// -------------------------------------------------------------- printing

namespace {

std::string term_text(const Term &t) { return t.is_var ? "?" + t.name : t.name; }

void print_typed_list(std::ostringstream &out, const std::vector<TypedName> &ns,
                      bool vars) {
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (i) out << ' ';
    if (vars) out << '?';
    out << ns[i].name << " - " << ns[i].type;
  }
}

void print_cond_rec(std::ostringstream &out, const Cond &c) {
  switch (c.k) {
    case Guard::K::tt: out << "(and)"; break;
    case Guard::K::ff: out << "(or)"; break;
    case Guard::K::atom: out << print_atom_sexpr(c.atom); break;
    case Guard::K::not_:
      out << "(not ";
      print_cond_rec(out, c.kids[0]);
      out << ')';
      break;
    case Guard::K::and_:
    case Guard::K::or_:
      out << (c.k == Guard::K::and_ ? "(and" : "(or");
      for (const Cond &kid : c.kids) {
        out << ' ';
        print_cond_rec(out, kid);
      }
      out << ')';
      break;
  }
}

void print_eff_rec(std::ostringstream &out, const Eff &e, int indent) {
  std::string pad(indent, ' ');
  switch (e.k) {
    case Eff::K::lit:
      out << pad << (e.lit.positive ? print_atom_sexpr(e.lit.atom)
                                    : "(not " + print_atom_sexpr(e.lit.atom) + ")");
      break;
    case Eff::K::and_:
      out << pad << "(and";
      for (const Eff &kid : e.kids) {
        out << '\n';
        print_eff_rec(out, kid, indent + 2);
      }
      out << ')';
      break;
    case Eff::K::oneof:
      out << pad << "(oneof";
      for (const Eff &kid : e.kids) {
        out << '\n';
        print_eff_rec(out, kid, indent + 2);
      }
      out << ')';
      break;
    case Eff::K::when: {
      out << pad << "(when " << print_cond_sexpr(e.cond) << '\n';
      out << pad << "  (and";
      for (const Eff &kid : e.kids) {
        out << ' ';
        print_eff_rec(out, kid, 0);
      }
      out << "))";
      break;
    }
  }
}

}  // namespace

std::string print_atom_sexpr(const Atom &a) {
  std::string s = "(" + a.name;
  for (const Term &t : a.args) s += " " + term_text(t);
  s += ")";
  return s;
}

std::string print_cond_sexpr(const Cond &c) {
  std::ostringstream out;
  print_cond_rec(out, c);
  return out.str();
}

std::string print_domain(const DomainModel &d) {
  std::ostringstream out;
  out << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    out << "  (:requirements";
    for (const std::string &r : d.requirements) out << ' ' << r;
    out << ")\n";
  }
  if (!d.types.empty()) {
    out << "  (:types ";
    print_typed_list(out, d.types, false);
    out << ")\n";
  }
  if (!d.constants.empty()) {
    out << "  (:constants ";
    print_typed_list(out, d.constants, false);
    out << ")\n";
  }
  out << "  (:predicates";
  for (const Predicate &p : d.predicates) {
    out << "\n    (" << p.name;
    if (!p.params.empty()) {
      out << ' ';
      print_typed_list(out, p.params, true);
    }
    out << ')';
  }
  out << ")\n";
  for (const ActionSchema &a : d.actions) {
    out << "  (:action " << a.name << "\n";
    out << "    :parameters (";
    print_typed_list(out, a.params, true);
    out << ")\n";
    out << "    :precondition " << print_cond_sexpr(a.pre) << "\n";
    out << "    :effect\n";
    print_eff_rec(out, a.eff, 6);
    out << ")\n";
  }
  out << ")\n";
  return out.str();
}

bool is_subtype(const DomainModel &d, const std::string &sub,
                const std::string &super) {
  if (sub == super || super == "object") return true;
  std::string cur = sub;
  for (int hops = 0; hops < 1000; ++hops) {
    const TypedName *row = nullptr;
    for (const TypedName &t : d.types)
      if (t.name == cur) {
        row = &t;
        break;
      }
    if (!row) return false;
    if (row->type == super) return true;
    if (row->type == cur || row->type == "object") return false;
    cur = row->type;
  }
  throw type_error("type hierarchy cycle at " + sub);
}

std::string print_problem(const ProblemModel &p) {
  std::ostringstream out;
  out << "(define (problem " << p.name << ")\n";
  out << "  (:domain " << p.domain_name << ")\n";
  if (!p.objects.empty()) {
    out << "  (:objects ";
    print_typed_list(out, p.objects, false);
    out << ")\n";
  }
  out << "  (:init (and";
  for (const Atom &a : p.init) out << ' ' << print_atom_sexpr(a);
  out << "))\n";
  out << "  (:goal " << print_cond_sexpr(p.goal) << ")\n";
  out << ")\n";
  return out.str();
}

}  // namespace fondrec
