#include "fondrec/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace fondrec {

std::string Atom::key() const {
  if (args.empty()) return name;
  std::string s = name;
  s += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ',';
    if (args[i].is_var) s += '?';
    s += args[i].name;
  }
  s += ')';
  return s;
}

namespace {

bool is_future_op(FKind k) {
  switch (k) {
    case FKind::next:
    case FKind::weak_next:
    case FKind::until:
    case FKind::eventually:
    case FKind::always:
      return true;
    default:
      return false;
  }
}

bool is_past_op(FKind k) {
  switch (k) {
    case FKind::before:
    case FKind::since:
    case FKind::once:
    case FKind::historically:
      return true;
    default:
      return false;
  }
}

bool is_unary(FKind k) {
  switch (k) {
    case FKind::not_:
    case FKind::next:
    case FKind::weak_next:
    case FKind::eventually:
    case FKind::always:
    case FKind::before:
    case FKind::once:
    case FKind::historically:
      return true;
    default:
      return false;
  }
}

FormulaPtr mk(FKind k, FormulaPtr l = nullptr, FormulaPtr r = nullptr) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->lhs = std::move(l);
  f->rhs = std::move(r);
  if (f->lhs) f->dialect = f->lhs->dialect;
  if (is_past_op(k)) f->dialect = Dialect::ppltl;
  if (is_future_op(k)) f->dialect = Dialect::ltlf;
  if (f->rhs && f->rhs->dialect == Dialect::ppltl && !is_future_op(k))
    f->dialect = Dialect::ppltl;
  if (f->lhs && f->lhs->dialect == Dialect::ppltl && !is_future_op(k))
    f->dialect = Dialect::ppltl;
  return f;
}

}  // namespace

FormulaPtr f_tt() { return mk(FKind::tt); }
FormulaPtr f_ff() { return mk(FKind::ff); }

FormulaPtr f_atom(Atom a, Dialect d) {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::atom;
  f->atom = std::move(a);
  f->dialect = d;
  return f;
}

FormulaPtr f_not(FormulaPtr f) { return mk(FKind::not_, std::move(f)); }
FormulaPtr f_and(FormulaPtr l, FormulaPtr r) {
  return mk(FKind::and_, std::move(l), std::move(r));
}
FormulaPtr f_or(FormulaPtr l, FormulaPtr r) {
  return mk(FKind::or_, std::move(l), std::move(r));
}
FormulaPtr f_unary(FKind k, FormulaPtr f) { return mk(k, std::move(f)); }
FormulaPtr f_binary(FKind k, FormulaPtr l, FormulaPtr r) {
  return mk(k, std::move(l), std::move(r));
}

bool equal(const FormulaPtr &a, const FormulaPtr &b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  if (a->kind == FKind::atom) return a->atom == b->atom;
  return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
}

// ---------------------------------------------------------------- parsing

namespace {

struct Lexer {
  const std::string &src;
  std::size_t pos = 0;

  explicit Lexer(const std::string &s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }

  bool at_end() {
    skip_ws();
    return pos >= src.size();
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  // Next word without consuming; empty if next token is not a word.
  std::string peek_word() {
    skip_ws();
    std::size_t p = pos;
    std::string w;
    while (p < src.size() && word_char(src[p])) w += src[p++];
    return w;
  }

  std::string take_word() {
    skip_ws();
    std::string w = peek_word();
    pos += w.size();
    return w;
  }

  void expect(char c, const char *what) {
    skip_ws();
    if (pos >= src.size() || src[pos] != c)
      throw parse_error(std::string("expected ") + what, pos);
    ++pos;
  }

  bool accept(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
};

struct Parser {
  Lexer lex;
  explicit Parser(const std::string &s) : lex(s) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_or();
    if (!lex.at_end()) throw parse_error("trailing input", lex.pos);
    return f;
  }

  FormulaPtr parse_or() {
    FormulaPtr l = parse_and();
    while (lex.accept('|')) l = f_or(l, parse_and());
    return l;
  }

  FormulaPtr parse_and() {
    FormulaPtr l = parse_bin();
    while (lex.accept('&')) l = f_and(l, parse_bin());
    return l;
  }

  // U and S, right-associative.
  FormulaPtr parse_bin() {
    FormulaPtr l = parse_unary();
    std::string w = lex.peek_word();
    if (w == "U" || w == "S") {
      lex.take_word();
      FormulaPtr r = parse_bin();
      return f_binary(w == "U" ? FKind::until : FKind::since, l, r);
    }
    return l;
  }

  FormulaPtr parse_unary() {
    if (lex.accept('!')) return f_not(parse_unary());
    std::string w = lex.peek_word();
    FKind k;
    if (w == "X") k = FKind::next;
    else if (w == "WX") k = FKind::weak_next;
    else if (w == "F") k = FKind::eventually;
    else if (w == "G") k = FKind::always;
    else if (w == "Y") k = FKind::before;
    else if (w == "O") k = FKind::once;
    else if (w == "H") k = FKind::historically;
    else return parse_primary();
    lex.take_word();
    return f_unary(k, parse_unary());
  }

  FormulaPtr parse_primary() {
    if (lex.accept('(')) {
      FormulaPtr f = parse_or();
      lex.expect(')', "')'");
      return f;
    }
    std::size_t at = lex.pos;
    std::string w = lex.take_word();
    if (w.empty()) throw parse_error("expected formula", lex.pos);
    if (w == "true") return f_tt();
    if (w == "false") return f_ff();
    if (w == "U" || w == "S")
      throw parse_error("binary operator without left operand", at);
    char c0 = w[0];
    if (!(std::isalpha(static_cast<unsigned char>(c0)) || c0 == '_'))
      throw parse_error("invalid atom name '" + w + "'", at);
    Atom a;
    a.name = w;
    if (lex.accept('(')) {
      do {
        std::string arg = lex.take_word();
        if (arg.empty()) throw parse_error("expected atom argument", lex.pos);
        a.args.push_back(Term{arg, false});
      } while (lex.accept(','));
      lex.expect(')', "')' after atom arguments");
    }
    return f_atom(std::move(a));
  }
};

void scan_tenses(const FormulaPtr &f, bool &has_future, bool &has_past) {
  if (!f) return;
  if (is_future_op(f->kind)) has_future = true;
  if (is_past_op(f->kind)) has_past = true;
  scan_tenses(f->lhs, has_future, has_past);
  scan_tenses(f->rhs, has_future, has_past);
}

void retag(const FormulaPtr &f, Dialect d) {
  if (!f) return;
  const_cast<Formula *>(f.get())->dialect = d;
  retag(f->lhs, d);
  retag(f->rhs, d);
}

}  // namespace

FormulaPtr parse_formula(const std::string &text, Dialect dialect) {
  Parser p(text);
  FormulaPtr f = p.parse();
  bool has_future = false, has_past = false;
  scan_tenses(f, has_future, has_past);
  if (has_future && has_past)
    throw semantic_error("mixed-tense formula: future and past operators co-occur");
  if (dialect == Dialect::ltlf && has_past)
    throw semantic_error("past operator in an ltlf formula");
  if (dialect == Dialect::ppltl && has_future)
    throw semantic_error("future operator in a ppltl formula");
  retag(f, dialect);
  return f;
}

// --------------------------------------------------------------- printing

namespace {

// Precedence levels for minimal parenthesization.
int prec(FKind k) {
  switch (k) {
    case FKind::or_: return 0;
    case FKind::and_: return 1;
    case FKind::until:
    case FKind::since: return 2;
    default: return 3;  // unary and leaves
  }
}

void print_rec(const FormulaPtr &f, std::ostringstream &out, int parent) {
  int me = prec(f->kind);
  bool paren = me < parent;
  if (paren) out << '(';
  switch (f->kind) {
    case FKind::tt: out << "true"; break;
    case FKind::ff: out << "false"; break;
    case FKind::atom: out << f->atom.key(); break;
    case FKind::not_:
      out << '!';
      print_rec(f->lhs, out, 3);
      break;
    case FKind::next:
    case FKind::weak_next:
    case FKind::eventually:
    case FKind::always:
    case FKind::before:
    case FKind::once:
    case FKind::historically: {
      const char *op = f->kind == FKind::next ? "X"
                       : f->kind == FKind::weak_next ? "WX"
                       : f->kind == FKind::eventually ? "F"
                       : f->kind == FKind::always ? "G"
                       : f->kind == FKind::before ? "Y"
                       : f->kind == FKind::once ? "O"
                                                : "H";
      out << op << '(';
      print_rec(f->lhs, out, 0);
      out << ')';
      break;
    }
    case FKind::and_:
      print_rec(f->lhs, out, 1);
      out << " & ";
      print_rec(f->rhs, out, 2);
      break;
    case FKind::or_:
      print_rec(f->lhs, out, 0);
      out << " | ";
      print_rec(f->rhs, out, 1);
      break;
    case FKind::until:
    case FKind::since:
      print_rec(f->lhs, out, 3);
      out << (f->kind == FKind::until ? " U " : " S ");
      print_rec(f->rhs, out, 2);  // right-associative
      break;
  }
  if (paren) out << ')';
}

}  // namespace

std::string print_formula(const FormulaPtr &f) {
  std::ostringstream out;
  print_rec(f, out, 0);
  return out.str();
}

// --------------------------------------------------------------- desugar

FormulaPtr desugar(const FormulaPtr &f) {
  switch (f->kind) {
    case FKind::tt:
    case FKind::ff:
    case FKind::atom:
      return f;
    case FKind::not_:
      return f_not(desugar(f->lhs));
    case FKind::and_:
      return f_and(desugar(f->lhs), desugar(f->rhs));
    case FKind::or_:
      return f_not(f_and(f_not(desugar(f->lhs)), f_not(desugar(f->rhs))));
    case FKind::next:
      return f_unary(FKind::next, desugar(f->lhs));
    case FKind::weak_next:
      return f_not(f_unary(FKind::next, f_not(desugar(f->lhs))));
    case FKind::until:
      return f_binary(FKind::until, desugar(f->lhs), desugar(f->rhs));
    case FKind::eventually:
      return f_binary(FKind::until, f_tt(), desugar(f->lhs));
    case FKind::always:
      return f_not(f_binary(FKind::until, f_tt(), f_not(desugar(f->lhs))));
    case FKind::before:
      return f_unary(FKind::before, desugar(f->lhs));
    case FKind::since:
      return f_binary(FKind::since, desugar(f->lhs), desugar(f->rhs));
    case FKind::once:
      return f_binary(FKind::since, f_tt(), desugar(f->lhs));
    case FKind::historically:
      return f_not(f_binary(FKind::since, f_tt(), f_not(desugar(f->lhs))));
  }
  throw std::logic_error("desugar: unknown node kind");
}

// -------------------------------------------------------------- semantics

bool holds_at(const FormulaPtr &f, const Trace &t, std::size_t i) {
  if (i >= t.size()) throw std::out_of_range("holds_at: position out of range");
  switch (f->kind) {
    case FKind::tt: return true;
    case FKind::ff: return false;
    case FKind::atom: return t[i].count(f->atom.key()) > 0;
    case FKind::not_: return !holds_at(f->lhs, t, i);
    case FKind::and_: return holds_at(f->lhs, t, i) && holds_at(f->rhs, t, i);
    case FKind::or_: return holds_at(f->lhs, t, i) || holds_at(f->rhs, t, i);
    case FKind::next:
      return i + 1 < t.size() && holds_at(f->lhs, t, i + 1);
    case FKind::weak_next:
      return i + 1 >= t.size() || holds_at(f->lhs, t, i + 1);
    case FKind::until:
      for (std::size_t j = i; j < t.size(); ++j) {
        if (holds_at(f->rhs, t, j)) return true;
        if (!holds_at(f->lhs, t, j)) return false;
      }
      return false;
    case FKind::eventually:
      for (std::size_t j = i; j < t.size(); ++j)
        if (holds_at(f->lhs, t, j)) return true;
      return false;
    case FKind::always:
      for (std::size_t j = i; j < t.size(); ++j)
        if (!holds_at(f->lhs, t, j)) return false;
      return true;
    case FKind::before:
      return i >= 1 && holds_at(f->lhs, t, i - 1);
    case FKind::since:
      for (std::size_t k = i + 1; k-- > 0;) {
        if (holds_at(f->rhs, t, k)) return true;
        if (!holds_at(f->lhs, t, k)) return false;
      }
      return false;
    case FKind::once:
      for (std::size_t k = i + 1; k-- > 0;)
        if (holds_at(f->lhs, t, k)) return true;
      return false;
    case FKind::historically:
      for (std::size_t k = i + 1; k-- > 0;)
        if (!holds_at(f->lhs, t, k)) return false;
      return true;
  }
  throw std::logic_error("holds_at: unknown node kind");
}

bool holds(const FormulaPtr &f, const Trace &t) {
  if (t.empty()) throw semantic_error("holds: empty trace");
  std::size_t i = f->dialect == Dialect::ppltl ? t.size() - 1 : 0;
  return holds_at(f, t, i);
}

// ------------------------------------------------------------- utilities

namespace {

void collect_atoms(const FormulaPtr &f, std::vector<Atom> &out) {
  if (!f) return;
  if (f->kind == FKind::atom) {
    if (std::find(out.begin(), out.end(), f->atom) == out.end())
      out.push_back(f->atom);
  }
  collect_atoms(f->lhs, out);
  collect_atoms(f->rhs, out);
}

}  // namespace

std::vector<Atom> formula_atoms(const FormulaPtr &f) {
  std::vector<Atom> out;
  collect_atoms(f, out);
  return out;
}

std::vector<std::string> formula_objects(const FormulaPtr &f) {
  std::vector<std::string> out;
  for (const Atom &a : formula_atoms(f))
    for (const Term &t : a.args)
      if (!t.is_var && std::find(out.begin(), out.end(), t.name) == out.end())
        out.push_back(t.name);
  return out;
}

}  // namespace fondrec
