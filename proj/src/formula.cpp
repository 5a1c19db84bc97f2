/*
 * Copyright 2026 The ahc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "ahc/formula.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace ahc {

bool Expr::operator==(const Expr& o) const {
  return op == o.op && lit == o.lit && var == o.var && stutter == o.stutter &&
         kids == o.kids;
}

bool Ltl::operator==(const Ltl& o) const {
  return op == o.op && ref == o.ref && kids == o.kids;
}

Ltl ltl_atom(uint32_t idx) { return Ltl{Ltl::atom, idx, {}}; }
Ltl ltl_moved(uint32_t idx) { return Ltl{Ltl::moved, idx, {}}; }
Ltl ltl_and(std::vector<Ltl> ks) { return Ltl{Ltl::land, 0, std::move(ks)}; }
Ltl ltl_or(std::vector<Ltl> ks) { return Ltl{Ltl::lor, 0, std::move(ks)}; }
Ltl ltl_un(Ltl::Op op, Ltl k) { return Ltl{op, 0, {std::move(k)}}; }
Ltl ltl_bin(Ltl::Op op, Ltl a, Ltl b) {
  return Ltl{op, 0, {std::move(a), std::move(b)}};
}

int AhltlFormula::trace_index(std::string_view n) const {
  for (size_t i = 0; i < traces.size(); ++i)
    if (traces[i].name == n) return (int)i;
  return -1;
}

int AhltlFormula::stutter_index(std::string_view n) const {
  for (size_t i = 0; i < stutters.size(); ++i)
    if (stutters[i].name == n) return (int)i;
  return -1;
}

// ===========================================================================
// Tokenizer

namespace {

enum class Tk {
  ident,
  number,
  lparen,
  rparen,
  dot,
  tilde,
  at,
  colon,
  plus,
  minus,
  bang,
  amp,
  pipe,
  arrow,
  darrow,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  end,
};

struct Token {
  Tk k;
  std::string text;
  int64_t num = 0;
  unsigned line = 1, col = 1;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  unsigned line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tk k, std::string t, int64_t n = 0) {
    out.push_back({k, std::move(t), n, line, col});
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    auto two = s.substr(i, 2);
    auto three = s.substr(i, 3);
    if (three == "<->") {
      push(Tk::darrow, "<->");
      i += 3;
      col += 3;
    } else if (two == "->") {
      push(Tk::arrow, "->");
      i += 2;
      col += 2;
    } else if (two == "!=") {
      push(Tk::ne, "!=");
      i += 2;
      col += 2;
    } else if (two == "<=") {
      push(Tk::le, "<=");
      i += 2;
      col += 2;
    } else if (two == ">=") {
      push(Tk::ge, ">=");
      i += 2;
      col += 2;
    } else if (std::isdigit((unsigned char)c)) {
      size_t b = i;
      while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
      std::string t(s.substr(b, i - b));
      push(Tk::number, t, std::stoll(t));
      col += (unsigned)(i - b);
    } else if (std::isalpha((unsigned char)c) || c == '_') {
      size_t b = i;
      while (i < s.size() &&
             (std::isalnum((unsigned char)s[i]) || s[i] == '_'))
        ++i;
      push(Tk::ident, std::string(s.substr(b, i - b)));
      col += (unsigned)(i - b);
    } else {
      Tk k;
      switch (c) {
        case '(': k = Tk::lparen; break;
        case ')': k = Tk::rparen; break;
        case '.': k = Tk::dot; break;
        case '~': k = Tk::tilde; break;
        case '@': k = Tk::at; break;
        case ':': k = Tk::colon; break;
        case '+': k = Tk::plus; break;
        case '-': k = Tk::minus; break;
        case '!': k = Tk::bang; break;
        case '&': k = Tk::amp; break;
        case '|': k = Tk::pipe; break;
        case '=': k = Tk::eq; break;
        case '<': k = Tk::lt; break;
        case '>': k = Tk::gt; break;
        default:
          fail_at(ErrKind::syntax, line, col,
                  std::string("unexpected character '") + c + "'");
      }
      push(k, std::string(1, c));
      ++i;
      ++col;
    }
  }
  out.push_back({Tk::end, "", 0, line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Unified parse tree covering both the temporal level and the theory level.
// The split into atoms happens after binding resolution.

struct PNode {
  enum K {
    lit_int,
    lit_true,
    lit_false,
    varref,  // var @ base [: traj]
    add,
    sub,
    neg,
    cmp_eq,
    cmp_ne,
    cmp_lt,
    cmp_le,
    cmp_gt,
    cmp_ge,
    p_not,
    p_and,
    p_or,
    p_imp,
    p_iff,
    p_x,
    p_u,
    p_f,
    p_g,
  } k = lit_true;
  int64_t lit = 0;
  std::string var, base, traj;
  unsigned line = 1, col = 1;
  std::vector<PNode> kids;
};

struct Parser {
  const std::vector<Token>& t;
  size_t i = 0;
  bool trajectory_dialect;

  const Token& cur() const { return t[i]; }
  [[noreturn]] void err(const std::string& msg) const {
    fail_at(ErrKind::syntax, cur().line, cur().col, msg);
  }
  bool is_kw(const char* w) const {
    return cur().k == Tk::ident && cur().text == w;
  }
  bool eat_kw(const char* w) {
    if (is_kw(w)) {
      ++i;
      return true;
    }
    return false;
  }
  bool eat(Tk k) {
    if (cur().k == k) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(Tk k, const char* what) {
    if (!eat(k)) err(std::string("expected ") + what);
  }
  std::string ident(const char* what) {
    if (cur().k != Tk::ident) err(std::string("expected ") + what);
    static const char* reserved[] = {"forall", "exists", "Etau", "Atau",
                                     "true",   "false",  "U",    "X",
                                     "F",      "G"};
    for (const char* r : reserved)
      if (cur().text == r) err(std::string("reserved word '") + cur().text +
                               "' cannot be used as " + what);
    return t[i++].text;
  }

  PNode mk(PNode::K k, std::vector<PNode> kids = {}) {
    PNode n;
    n.k = k;
    n.kids = std::move(kids);
    n.line = cur().line;
    n.col = cur().col;
    return n;
  }

  PNode parse_body() { return parse_iff(); }

  PNode parse_iff() {
    PNode a = parse_imp();
    while (eat(Tk::darrow)) {
      PNode b = parse_imp();
      a = mk(PNode::p_iff, {std::move(a), std::move(b)});
    }
    return a;
  }
  PNode parse_imp() {
    PNode a = parse_or();
    if (eat(Tk::arrow)) {
      PNode b = parse_imp();
      return mk(PNode::p_imp, {std::move(a), std::move(b)});
    }
    return a;
  }
  PNode parse_or() {
    PNode a = parse_and();
    if (cur().k != Tk::pipe) return a;
    std::vector<PNode> kids;
    kids.push_back(std::move(a));
    while (eat(Tk::pipe)) kids.push_back(parse_and());
    return mk(PNode::p_or, std::move(kids));
  }
  PNode parse_and() {
    PNode a = parse_until();
    if (cur().k != Tk::amp) return a;
    std::vector<PNode> kids;
    kids.push_back(std::move(a));
    while (eat(Tk::amp)) kids.push_back(parse_until());
    return mk(PNode::p_and, std::move(kids));
  }
  PNode parse_until() {
    PNode a = parse_unary();
    if (eat_kw("U")) {
      PNode b = parse_until();
      return mk(PNode::p_u, {std::move(a), std::move(b)});
    }
    return a;
  }
  PNode parse_unary() {
    if (eat(Tk::bang)) return mk(PNode::p_not, {parse_unary()});
    if (eat_kw("X")) return mk(PNode::p_x, {parse_unary()});
    if (eat_kw("F")) return mk(PNode::p_f, {parse_unary()});
    if (eat_kw("G")) return mk(PNode::p_g, {parse_unary()});
    return parse_cmp();
  }
  PNode parse_cmp() {
    PNode a = parse_sum();
    PNode::K k;
    switch (cur().k) {
      case Tk::eq: k = PNode::cmp_eq; break;
      case Tk::ne: k = PNode::cmp_ne; break;
      case Tk::lt: k = PNode::cmp_lt; break;
      case Tk::le: k = PNode::cmp_le; break;
      case Tk::gt: k = PNode::cmp_gt; break;
      case Tk::ge: k = PNode::cmp_ge; break;
      default: return a;
    }
    ++i;
    PNode b = parse_sum();
    return mk(k, {std::move(a), std::move(b)});
  }
  PNode parse_sum() {
    PNode a = parse_atomic();
    while (cur().k == Tk::plus || cur().k == Tk::minus) {
      bool plus = cur().k == Tk::plus;
      ++i;
      PNode b = parse_atomic();
      a = mk(plus ? PNode::add : PNode::sub, {std::move(a), std::move(b)});
    }
    return a;
  }
  PNode parse_atomic() {
    if (eat(Tk::minus)) return mk(PNode::neg, {parse_atomic()});
    if (cur().k == Tk::number) {
      PNode n = mk(PNode::lit_int);
      n.lit = cur().num;
      ++i;
      return n;
    }
    if (eat_kw("true")) return mk(PNode::lit_true);
    if (eat_kw("false")) return mk(PNode::lit_false);
    if (eat(Tk::lparen)) {
      PNode n = parse_iff();
      expect(Tk::rparen, "')'");
      return n;
    }
    if (cur().k == Tk::ident) {
      PNode n = mk(PNode::varref);
      n.var = ident("variable name");
      expect(Tk::at, "'@' after variable name");
      n.base = ident("index name");
      if (eat(Tk::colon)) {
        if (!trajectory_dialect)
          err("':' indexing is only valid in the trajectory dialect");
        n.traj = ident("trajectory name");
      } else if (trajectory_dialect) {
        err("trajectory dialect atoms are written var@trace:trajectory");
      }
      return n;
    }
    err("expected an atom, literal, or '('");
  }
};

// ---------------------------------------------------------------------------
// Expression folding and sort bookkeeping.

bool is_lit(const Expr& e) {
  return e.op == ExOp::lit_int || e.op == ExOp::lit_bool;
}

Expr mk_int(int64_t v) {
  Expr e;
  e.op = ExOp::lit_int;
  e.lit = v;
  return e;
}
Expr mk_bool(bool v) {
  Expr e;
  e.op = ExOp::lit_bool;
  e.lit = v;
  return e;
}

[[noreturn]] void sort_err(const std::string& msg) {
  fail(ErrKind::sort, msg);
}

// Folds constants; literal-only sort misuse is caught here even without a
// binding (e.g. true + 1).
Expr fold_expr(Expr e) {
  for (auto& k : e.kids) k = fold_expr(std::move(k));
  auto lit_of = [](const Expr& k) { return k.lit; };
  switch (e.op) {
    case ExOp::lit_int:
    case ExOp::lit_bool:
    case ExOp::var:
      return e;
    case ExOp::add:
    case ExOp::sub:
      for (const auto& k : e.kids)
        if (k.op == ExOp::lit_bool)
          sort_err("boolean operand in arithmetic");
      if (is_lit(e.kids[0]) && is_lit(e.kids[1]))
        return mk_int(e.op == ExOp::add ? lit_of(e.kids[0]) + lit_of(e.kids[1])
                                        : lit_of(e.kids[0]) - lit_of(e.kids[1]));
      return e;
    case ExOp::neg:
      if (e.kids[0].op == ExOp::lit_bool)
        sort_err("boolean operand in arithmetic");
      if (is_lit(e.kids[0])) return mk_int(-lit_of(e.kids[0]));
      return e;
    case ExOp::eq:
    case ExOp::ne: {
      const Expr &a = e.kids[0], &b = e.kids[1];
      if (is_lit(a) && is_lit(b)) {
        if ((a.op == ExOp::lit_bool) != (b.op == ExOp::lit_bool))
          sort_err("comparison of boolean and integer literals");
        bool same = a.lit == b.lit;
        return mk_bool(e.op == ExOp::eq ? same : !same);
      }
      return e;
    }
    case ExOp::lt:
    case ExOp::le:
    case ExOp::gt:
    case ExOp::ge: {
      const Expr &a = e.kids[0], &b = e.kids[1];
      if (a.op == ExOp::lit_bool || b.op == ExOp::lit_bool)
        sort_err("boolean operand in an ordering comparison");
      if (is_lit(a) && is_lit(b)) {
        bool r = e.op == ExOp::lt   ? a.lit < b.lit
                 : e.op == ExOp::le ? a.lit <= b.lit
                 : e.op == ExOp::gt ? a.lit > b.lit
                                    : a.lit >= b.lit;
        return mk_bool(r);
      }
      return e;
    }
    case ExOp::b_not:
      if (e.kids[0].op == ExOp::lit_int)
        sort_err("integer operand in boolean negation");
      if (is_lit(e.kids[0])) return mk_bool(!e.kids[0].lit);
      return e;
    case ExOp::b_and:
    case ExOp::b_or: {
      bool conj = e.op == ExOp::b_and;
      std::vector<Expr> kept;
      for (auto& k : e.kids) {
        if (k.op == ExOp::lit_int) sort_err("integer operand in boolean connective");
        if (k.op == ExOp::lit_bool) {
          if ((bool)k.lit == conj) continue;  // neutral element
          return mk_bool(!conj);              // absorbing element
        }
        kept.push_back(std::move(k));
      }
      if (kept.empty()) return mk_bool(conj);
      if (kept.size() == 1) return kept[0];
      e.kids = std::move(kept);
      return e;
    }
    case ExOp::b_imp:
    case ExOp::b_iff: {
      for (const auto& k : e.kids)
        if (k.op == ExOp::lit_int) sort_err("integer operand in boolean connective");
      Expr &a = e.kids[0], &b = e.kids[1];
      if (is_lit(a) && is_lit(b)) {
        bool r = e.op == ExOp::b_imp ? (!a.lit || b.lit) : (a.lit == b.lit);
        return mk_bool(r);
      }
      if (e.op == ExOp::b_imp && a.op == ExOp::lit_bool)
        return a.lit ? b : mk_bool(true);
      if (e.op == ExOp::b_imp && b.op == ExOp::lit_bool && b.lit)
        return mk_bool(true);
      return e;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Temporal constant folding and duplicate removal in n-ary connectives.

Ltl fold_ltl(Ltl n) {
  for (auto& k : n.kids) k = fold_ltl(std::move(k));
  auto c = [](const Ltl& k) { return k.op == Ltl::tt || k.op == Ltl::ff; };
  switch (n.op) {
    case Ltl::lnot:
      if (n.kids[0].op == Ltl::tt) return Ltl{Ltl::ff, 0, {}};
      if (n.kids[0].op == Ltl::ff) return Ltl{Ltl::tt, 0, {}};
      return n;
    case Ltl::land:
    case Ltl::lor: {
      bool conj = n.op == Ltl::land;
      std::vector<Ltl> kept;
      for (auto& k : n.kids) {
        if (k.op == (conj ? Ltl::tt : Ltl::ff)) continue;
        if (k.op == (conj ? Ltl::ff : Ltl::tt))
          return Ltl{conj ? Ltl::ff : Ltl::tt, 0, {}};
        if (std::find(kept.begin(), kept.end(), k) != kept.end()) continue;
        kept.push_back(std::move(k));
      }
      if (kept.empty()) return Ltl{conj ? Ltl::tt : Ltl::ff, 0, {}};
      if (kept.size() == 1) return kept[0];
      n.kids = std::move(kept);
      return n;
    }
    case Ltl::limp:
      if (n.kids[0].op == Ltl::tt) return n.kids[1];
      if (n.kids[0].op == Ltl::ff) return Ltl{Ltl::tt, 0, {}};
      if (n.kids[1].op == Ltl::tt) return Ltl{Ltl::tt, 0, {}};
      return n;
    case Ltl::liff:
      if (n.kids[0].op == Ltl::tt) return n.kids[1];
      if (n.kids[1].op == Ltl::tt) return n.kids[0];
      if (c(n.kids[0]) && c(n.kids[1]))
        return Ltl{n.kids[0].op == n.kids[1].op ? Ltl::tt : Ltl::ff, 0, {}};
      return n;
    case Ltl::x:
    case Ltl::f:
    case Ltl::g:
      if (c(n.kids[0])) return n.kids[0];
      return n;
    case Ltl::u:
      if (c(n.kids[1])) return n.kids[1];
      if (n.kids[0].op == Ltl::ff) return n.kids[1];
      return n;
    case Ltl::r:
      if (c(n.kids[1])) return n.kids[1];
      return n;
    default:
      return n;
  }
}

// ---------------------------------------------------------------------------
// Resolution: map the unified tree to an Ltl body plus an atom table.
// A maximal temporal-free subtree becomes one atom.

struct Resolver {
  AhltlFormula& f;

  bool has_temporal(const PNode& n) const {
    if (n.k == PNode::p_x || n.k == PNode::p_u || n.k == PNode::p_f ||
        n.k == PNode::p_g)
      return true;
    for (const auto& k : n.kids)
      if (has_temporal(k)) return true;
    return false;
  }

  Expr to_expr(const PNode& n) const {
    Expr e;
    auto kid = [&](size_t j) { return to_expr(n.kids[j]); };
    switch (n.k) {
      case PNode::lit_int: e.op = ExOp::lit_int; e.lit = n.lit; return e;
      case PNode::lit_true: return mk_bool(true);
      case PNode::lit_false: return mk_bool(false);
      case PNode::varref: {
        e.op = ExOp::var;
        e.var = n.var;
        int b = f.stutter_index(n.base);
        if (b < 0) {
          if (f.trace_index(n.base) >= 0)
            fail_at(ErrKind::binding, n.line, n.col,
                    n.base + " is a trace variable; atoms index stutterings");
          fail_at(ErrKind::binding, n.line, n.col,
                  "unbound stuttering variable " + n.base);
        }
        e.stutter = (uint32_t)b;
        return e;
      }
      case PNode::add: e.op = ExOp::add; break;
      case PNode::sub: e.op = ExOp::sub; break;
      case PNode::neg: e.op = ExOp::neg; break;
      case PNode::cmp_eq: e.op = ExOp::eq; break;
      case PNode::cmp_ne: e.op = ExOp::ne; break;
      case PNode::cmp_lt: e.op = ExOp::lt; break;
      case PNode::cmp_le: e.op = ExOp::le; break;
      case PNode::cmp_gt: e.op = ExOp::gt; break;
      case PNode::cmp_ge: e.op = ExOp::ge; break;
      case PNode::p_not: e.op = ExOp::b_not; break;
      case PNode::p_and: e.op = ExOp::b_and; break;
      case PNode::p_or: e.op = ExOp::b_or; break;
      case PNode::p_imp: e.op = ExOp::b_imp; break;
      case PNode::p_iff: e.op = ExOp::b_iff; break;
      default:
        fail_at(ErrKind::sort, n.line, n.col,
                "temporal operator inside a theory atom");
    }
    for (size_t j = 0; j < n.kids.size(); ++j) e.kids.push_back(kid(j));
    return e;
  }

  uint32_t intern_atom(Expr e) {
    for (size_t i = 0; i < f.atoms.size(); ++i)
      if (f.atoms[i] == e) return (uint32_t)i;
    f.atoms.push_back(std::move(e));
    return (uint32_t)(f.atoms.size() - 1);
  }

  Ltl to_ltl(const PNode& n) {
    if (!has_temporal(n)) {
      Expr e = fold_expr(to_expr(n));
      if (e.op == ExOp::lit_bool) return Ltl{e.lit ? Ltl::tt : Ltl::ff, 0, {}};
      if (e.op == ExOp::lit_int)
        fail_at(ErrKind::sort, n.line, n.col,
                "integer expression used as a formula");
      return ltl_atom(intern_atom(std::move(e)));
    }
    switch (n.k) {
      case PNode::p_not: return ltl_un(Ltl::lnot, to_ltl(n.kids[0]));
      case PNode::p_x: return ltl_un(Ltl::x, to_ltl(n.kids[0]));
      case PNode::p_f: return ltl_un(Ltl::f, to_ltl(n.kids[0]));
      case PNode::p_g: return ltl_un(Ltl::g, to_ltl(n.kids[0]));
      case PNode::p_u:
        return ltl_bin(Ltl::u, to_ltl(n.kids[0]), to_ltl(n.kids[1]));
      case PNode::p_imp:
        return ltl_bin(Ltl::limp, to_ltl(n.kids[0]), to_ltl(n.kids[1]));
      case PNode::p_iff:
        return ltl_bin(Ltl::liff, to_ltl(n.kids[0]), to_ltl(n.kids[1]));
      case PNode::p_and:
      case PNode::p_or: {
        std::vector<Ltl> ks;
        for (const auto& k : n.kids) ks.push_back(to_ltl(k));
        return n.k == PNode::p_and ? ltl_and(std::move(ks))
                                   : ltl_or(std::move(ks));
      }
      default:
        fail_at(ErrKind::sort, n.line, n.col,
                "temporal operator inside a theory atom");
    }
  }
};

struct Prefix {
  std::vector<TraceQuantifier> traces;
  std::vector<StutterQuantifier> stutters;          // stuttering dialect
  std::vector<std::pair<std::string, bool>> trajs;  // trajectory dialect
};

Prefix parse_prefix(Parser& p, bool trajectory) {
  Prefix pre;
  std::set<std::string> names;
  auto declare = [&](const std::string& n, unsigned line, unsigned col) {
    if (!names.insert(n).second)
      fail_at(ErrKind::semantic, line, col, "duplicate quantifier name " + n);
  };
  for (;;) {
    unsigned line = p.cur().line, col = p.cur().col;
    bool universal;
    bool traj_q = false;
    if (p.is_kw("forall"))
      universal = true;
    else if (p.is_kw("exists"))
      universal = false;
    else if (trajectory && p.is_kw("Atau")) {
      universal = true;
      traj_q = true;
    } else if (trajectory && p.is_kw("Etau")) {
      universal = false;
      traj_q = true;
    } else {
      break;
    }
    ++p.i;
    std::string name = p.ident("quantifier name");
    if (traj_q) {
      declare(name, line, col);
      pre.trajs.emplace_back(name, universal);
      p.expect(Tk::dot, "'.'");
      continue;
    }
    if (p.eat(Tk::tilde)) {
      if (trajectory)
        fail_at(ErrKind::syntax, line, col,
                "stuttering quantifiers cannot appear in the trajectory dialect");
      std::string base = p.ident("base trace name");
      declare(name, line, col);
      int ti = -1;
      for (size_t j = 0; j < pre.traces.size(); ++j)
        if (pre.traces[j].name == base) ti = (int)j;
      if (ti < 0)
        fail_at(ErrKind::binding, line, col, "unknown base trace " + base);
      pre.stutters.push_back({name, universal, (uint32_t)ti});
    } else {
      if (!pre.stutters.empty() || !pre.trajs.empty())
        fail_at(ErrKind::syntax, line, col,
                "trace quantifiers must precede stuttering quantifiers");
      declare(name, line, col);
      pre.traces.push_back({name, universal});
    }
    p.expect(Tk::dot, "'.'");
  }
  return pre;
}

bool uses_trajectory_syntax(const std::vector<Token>& toks) {
  for (const auto& t : toks)
    if (t.k == Tk::ident && (t.text == "Etau" || t.text == "Atau")) return true;
  return false;
}

AhltlFormula finish(Prefix pre, Parser& p) {
  AhltlFormula f;
  f.traces = std::move(pre.traces);
  f.stutters = std::move(pre.stutters);
  Resolver r{f};
  PNode body = p.parse_body();
  if (p.cur().k != Tk::end) p.err("trailing input after formula body");
  f.body = fold_ltl(r.to_ltl(body));
  return f;
}

}  // namespace

AhltlFormula parse_formula(std::string_view text) {
  auto toks = lex(text);
  if (uses_trajectory_syntax(toks)) return from_trajectory_form(text);
  Parser p{toks, 0, false};
  Prefix pre = parse_prefix(p, false);
  return finish(std::move(pre), p);
}

AhltlFormula from_trajectory_form(std::string_view text) {
  auto toks = lex(text);
  Parser p{toks, 0, true};
  Prefix pre = parse_prefix(p, true);

  PNode body = p.parse_body();
  if (p.cur().k != Tk::end) p.err("trailing input after formula body");

  // Collect the trace-trajectory pairs that actually occur in the body.
  std::set<std::pair<std::string, std::string>> used;
  auto scan = [&](auto&& self, const PNode& n) -> void {
    if (n.k == PNode::varref) {
      bool trace_ok = false;
      for (const auto& tq : pre.traces) trace_ok |= tq.name == n.base;
      if (!trace_ok)
        fail_at(ErrKind::binding, n.line, n.col, "unknown trace " + n.base);
      bool traj_ok = false;
      for (const auto& tj : pre.trajs) traj_ok |= tj.first == n.traj;
      if (!traj_ok)
        fail_at(ErrKind::binding, n.line, n.col,
                "unknown trajectory " + n.traj);
      used.insert({n.base, n.traj});
    }
    for (const auto& k : n.kids) self(self, k);
  };
  scan(scan, body);

  // One fresh stuttering per used pair, with the trajectory's polarity,
  // grouped per trajectory in prefix order, traces in prefix order inside
  // a group. Fresh names avoid the trace namespace.
  AhltlFormula f;
  f.traces = pre.traces;
  std::map<std::pair<std::string, std::string>, uint32_t> pair_to_stutter;
  unsigned next = 1;
  auto fresh = [&]() {
    for (;;) {
      std::string cand = "b" + std::to_string(next++);
      if (f.trace_index(cand) < 0) return cand;
    }
  };
  for (const auto& tj : pre.trajs) {
    for (size_t ti = 0; ti < f.traces.size(); ++ti) {
      if (!used.count({f.traces[ti].name, tj.first})) continue;
      pair_to_stutter[{f.traces[ti].name, tj.first}] =
          (uint32_t)f.stutters.size();
      f.stutters.push_back({fresh(), tj.second, (uint32_t)ti});
    }
  }

  // Rewrite atoms to index the fresh stutterings, then resolve as usual.
  auto rewrite = [&](auto&& self, PNode& n) -> void {
    if (n.k == PNode::varref) {
      n.base = f.stutters[pair_to_stutter.at({n.base, n.traj})].name;
      n.traj.clear();
    }
    for (auto& k : n.kids) self(self, k);
  };
  rewrite(rewrite, body);

  Resolver r{f};
  f.body = fold_ltl(r.to_ltl(body));
  return f;
}

// ===========================================================================
// Printing

namespace {

// Shared precedence space for the temporal and theory levels.
// iff 1, imp 2, or 3, and 4, U 5, unary 6, cmp 7, add 8, neg 9, primary 10.

void pr_expr(std::ostringstream& o, const Expr& e, const AhltlFormula& f,
             int ctx) {
  auto bin = [&](const char* op, int mine, int lctx, int rctx) {
    if (mine < ctx) o << "(";
    pr_expr(o, e.kids[0], f, lctx);
    o << " " << op << " ";
    pr_expr(o, e.kids[1], f, rctx);
    if (mine < ctx) o << ")";
  };
  switch (e.op) {
    case ExOp::lit_int: o << e.lit; return;
    case ExOp::lit_bool: o << (e.lit ? "true" : "false"); return;
    case ExOp::var:
      o << e.var << "@" << f.stutters[e.stutter].name;
      return;
    case ExOp::add: bin("+", 8, 8, 9); return;
    case ExOp::sub: bin("-", 8, 8, 9); return;
    case ExOp::neg:
      if (9 < ctx) {
        o << "(-";
        pr_expr(o, e.kids[0], f, 9);
        o << ")";
      } else {
        o << "-";
        pr_expr(o, e.kids[0], f, 9);
      }
      return;
    case ExOp::eq: bin("=", 7, 8, 8); return;
    case ExOp::ne: bin("!=", 7, 8, 8); return;
    case ExOp::lt: bin("<", 7, 8, 8); return;
    case ExOp::le: bin("<=", 7, 8, 8); return;
    case ExOp::gt: bin(">", 7, 8, 8); return;
    case ExOp::ge: bin(">=", 7, 8, 8); return;
    case ExOp::b_not:
      if (6 < ctx) o << "(";
      o << "! ";
      pr_expr(o, e.kids[0], f, 6);
      if (6 < ctx) o << ")";
      return;
    case ExOp::b_and:
    case ExOp::b_or: {
      int mine = e.op == ExOp::b_and ? 4 : 3;
      if (mine < ctx) o << "(";
      for (size_t i = 0; i < e.kids.size(); ++i) {
        if (i) o << (e.op == ExOp::b_and ? " & " : " | ");
        pr_expr(o, e.kids[i], f, mine + 1);
      }
      if (mine < ctx) o << ")";
      return;
    }
    case ExOp::b_imp: bin("->", 2, 3, 2); return;
    case ExOp::b_iff: bin("<->", 1, 1, 2); return;
  }
}

void pr_ltl(std::ostringstream& o, const Ltl& n, const AhltlFormula& f,
            int ctx) {
  switch (n.op) {
    case Ltl::tt: o << "true"; return;
    case Ltl::ff: o << "false"; return;
    case Ltl::atom: pr_expr(o, f.atoms[n.ref], f, ctx); return;
    case Ltl::moved: o << "moved_" << f.stutters[n.ref].name; return;
    case Ltl::lnot:
      if (6 < ctx) o << "(";
      o << "! ";
      pr_ltl(o, n.kids[0], f, 6);
      if (6 < ctx) o << ")";
      return;
    case Ltl::x:
    case Ltl::f:
    case Ltl::g:
      if (6 < ctx) o << "(";
      o << (n.op == Ltl::x ? "X " : n.op == Ltl::f ? "F " : "G ");
      pr_ltl(o, n.kids[0], f, 6);
      if (6 < ctx) o << ")";
      return;
    case Ltl::u:
      if (5 < ctx) o << "(";
      pr_ltl(o, n.kids[0], f, 6);
      o << " U ";
      pr_ltl(o, n.kids[1], f, 5);
      if (5 < ctx) o << ")";
      return;
    case Ltl::r:
      if (5 < ctx) o << "(";
      pr_ltl(o, n.kids[0], f, 6);
      o << " R ";
      pr_ltl(o, n.kids[1], f, 5);
      if (5 < ctx) o << ")";
      return;
    case Ltl::land:
    case Ltl::lor: {
      int mine = n.op == Ltl::land ? 4 : 3;
      if (mine < ctx) o << "(";
      for (size_t i = 0; i < n.kids.size(); ++i) {
        if (i) o << (n.op == Ltl::land ? " & " : " | ");
        pr_ltl(o, n.kids[i], f, mine + 1);
      }
      if (mine < ctx) o << ")";
      return;
    }
    case Ltl::limp:
      if (2 < ctx) o << "(";
      pr_ltl(o, n.kids[0], f, 3);
      o << " -> ";
      pr_ltl(o, n.kids[1], f, 2);
      if (2 < ctx) o << ")";
      return;
    case Ltl::liff:
      if (1 < ctx) o << "(";
      pr_ltl(o, n.kids[0], f, 1);
      o << " <-> ";
      pr_ltl(o, n.kids[1], f, 2);
      if (1 < ctx) o << ")";
      return;
  }
}

}  // namespace

std::string print_expr(const Expr& e, const AhltlFormula& f) {
  std::ostringstream o;
  pr_expr(o, e, f, 0);
  return o.str();
}

std::string print_ltl(const Ltl& b, const AhltlFormula& f) {
  std::ostringstream o;
  pr_ltl(o, b, f, 0);
  return o.str();
}

std::string print_formula(const AhltlFormula& f) {
  std::ostringstream o;
  for (const auto& t : f.traces)
    o << (t.universal ? "forall " : "exists ") << t.name << ". ";
  for (const auto& s : f.stutters)
    o << (s.universal ? "forall " : "exists ") << s.name << " ~ "
      << f.traces[s.trace].name << ". ";
  pr_ltl(o, f.body, f, 0);
  return o.str();
}

// ===========================================================================
// Fairness-adjusted body

Ltl build_psi_mod(const AhltlFormula& f) {
  std::vector<Ltl> univ, exist;
  for (uint32_t b = 0; b < f.stutters.size(); ++b) {
    Ltl gf = ltl_un(Ltl::g, ltl_un(Ltl::f, ltl_moved(b)));
    (f.stutters[b].universal ? univ : exist).push_back(std::move(gf));
  }
  Ltl core = f.body;
  if (!exist.empty()) {
    std::vector<Ltl> kids = exist;
    kids.push_back(std::move(core));
    core = ltl_and(std::move(kids));
  }
  if (univ.empty()) return core;
  Ltl prem = univ.size() == 1 ? univ[0] : ltl_and(univ);
  return ltl_bin(Ltl::limp, std::move(prem), std::move(core));
}

// ===========================================================================
// Atom evaluation and sort checking

namespace {

struct TypedVal {
  Value v;
  Sort s;
};

TypedVal eval_expr(const Expr& e, const AhltlFormula& f, const Binding& bi,
                   std::span<const uint32_t> states) {
  auto both_int = [&](TypedVal a, TypedVal b, const char* what) {
    if (a.s != Sort::integer || b.s != Sort::integer)
      sort_err(std::string("boolean operand in ") + what);
  };
  switch (e.op) {
    case ExOp::lit_int: return {e.lit, Sort::integer};
    case ExOp::lit_bool: return {e.lit, Sort::boolean};
    case ExOp::var: {
      const TransitionSystem& ts = bi.sys_of_stutter(f, e.stutter);
      int vi = ts.var_index(e.var);
      if (vi < 0)
        fail(ErrKind::binding, "variable " + e.var +
                                   " is not declared in system " + ts.name);
      return {ts.label(states[e.stutter], (uint32_t)vi), ts.vars[vi].sort};
    }
    case ExOp::add:
    case ExOp::sub: {
      TypedVal a = eval_expr(e.kids[0], f, bi, states);
      TypedVal b = eval_expr(e.kids[1], f, bi, states);
      both_int(a, b, "arithmetic");
      return {e.op == ExOp::add ? a.v + b.v : a.v - b.v, Sort::integer};
    }
    case ExOp::neg: {
      TypedVal a = eval_expr(e.kids[0], f, bi, states);
      both_int(a, a, "arithmetic");
      return {-a.v, Sort::integer};
    }
    case ExOp::eq:
    case ExOp::ne: {
      TypedVal a = eval_expr(e.kids[0], f, bi, states);
      TypedVal b = eval_expr(e.kids[1], f, bi, states);
      if (a.s != b.s) sort_err("comparison across sorts");
      bool same = a.v == b.v;
      return {e.op == ExOp::eq ? same : !same, Sort::boolean};
    }
    case ExOp::lt:
    case ExOp::le:
    case ExOp::gt:
    case ExOp::ge: {
      TypedVal a = eval_expr(e.kids[0], f, bi, states);
      TypedVal b = eval_expr(e.kids[1], f, bi, states);
      both_int(a, b, "an ordering comparison");
      bool r = e.op == ExOp::lt   ? a.v < b.v
               : e.op == ExOp::le ? a.v <= b.v
               : e.op == ExOp::gt ? a.v > b.v
                                  : a.v >= b.v;
      return {r, Sort::boolean};
    }
    case ExOp::b_not: {
      TypedVal a = eval_expr(e.kids[0], f, bi, states);
      if (a.s != Sort::boolean) sort_err("integer operand in boolean negation");
      return {!a.v, Sort::boolean};
    }
    case ExOp::b_and:
    case ExOp::b_or: {
      bool conj = e.op == ExOp::b_and;
      bool acc = conj;
      for (const auto& k : e.kids) {
        TypedVal a = eval_expr(k, f, bi, states);
        if (a.s != Sort::boolean)
          sort_err("integer operand in boolean connective");
        acc = conj ? (acc && a.v) : (acc || a.v);
      }
      return {acc, Sort::boolean};
    }
    case ExOp::b_imp:
    case ExOp::b_iff: {
      TypedVal a = eval_expr(e.kids[0], f, bi, states);
      TypedVal b = eval_expr(e.kids[1], f, bi, states);
      if (a.s != Sort::boolean || b.s != Sort::boolean)
        sort_err("integer operand in boolean connective");
      bool r = e.op == ExOp::b_imp ? (!a.v || b.v) : (a.v == b.v);
      return {r, Sort::boolean};
    }
  }
  sort_err("unreachable expression kind");
}

// Static sort of an expression; also detects undeclared variables and
// cross-system incompatibilities.
Sort static_sort(const Expr& e, const AhltlFormula& f, const Binding& bi) {
  switch (e.op) {
    case ExOp::lit_int: return Sort::integer;
    case ExOp::lit_bool: return Sort::boolean;
    case ExOp::var: {
      const TransitionSystem& ts = bi.sys_of_stutter(f, e.stutter);
      int vi = ts.var_index(e.var);
      if (vi < 0)
        fail(ErrKind::binding, "variable " + e.var +
                                   " is not declared in system " + ts.name +
                                   " (bound to trace " +
                                   f.traces[f.stutters[e.stutter].trace].name +
                                   ")");
      return ts.vars[vi].sort;
    }
    case ExOp::add:
    case ExOp::sub:
    case ExOp::neg:
      for (const auto& k : e.kids)
        if (static_sort(k, f, bi) != Sort::integer)
          sort_err("boolean operand in arithmetic");
      return Sort::integer;
    case ExOp::eq:
    case ExOp::ne: {
      Sort a = static_sort(e.kids[0], f, bi);
      Sort b = static_sort(e.kids[1], f, bi);
      if (a != b) {
        // Distinguish a mismatch between two bound system declarations
        // from plain operator misuse.
        if (e.kids[0].op == ExOp::var && e.kids[1].op == ExOp::var &&
            &bi.sys_of_stutter(f, e.kids[0].stutter) !=
                &bi.sys_of_stutter(f, e.kids[1].stutter))
          fail(ErrKind::semantic,
               "incompatible sorts for compared variables " + e.kids[0].var +
                   " and " + e.kids[1].var + " across bound systems");
        sort_err("comparison across sorts");
      }
      return Sort::boolean;
    }
    case ExOp::lt:
    case ExOp::le:
    case ExOp::gt:
    case ExOp::ge:
      for (const auto& k : e.kids)
        if (static_sort(k, f, bi) != Sort::integer)
          sort_err("boolean operand in an ordering comparison");
      return Sort::boolean;
    case ExOp::b_not:
    case ExOp::b_and:
    case ExOp::b_or:
    case ExOp::b_imp:
    case ExOp::b_iff:
      for (const auto& k : e.kids)
        if (static_sort(k, f, bi) != Sort::boolean)
          sort_err("integer operand in boolean connective");
      return Sort::boolean;
  }
  sort_err("unreachable expression kind");
}

}  // namespace

bool eval_atom(const AhltlFormula& f, const Binding& bi, uint32_t atom,
               std::span<const uint32_t> states) {
  TypedVal r = eval_expr(f.atoms[atom], f, bi, states);
  if (r.s != Sort::boolean) sort_err("atom does not have boolean sort");
  return r.v != 0;
}

void sort_check(const AhltlFormula& f, const Binding& bi) {
  AHC_CHECK(bi.systems.size() == f.traces.size(),
            "binding arity mismatches trace prefix");
  for (const auto& a : f.atoms)
    if (static_sort(a, f, bi) != Sort::boolean)
      sort_err("atom '" + print_expr(a, f) + "' does not have boolean sort");
}

// ===========================================================================
// Fragment classification

namespace {

// Polarity walk: +1 positive, -1 negative, 0 mixed. Collects paths from the
// root to every G node; path entries are raw child positions.
struct GScan {
  struct Hit {
    std::vector<uint32_t> path;
    int polarity;
    const Ltl* node;
  };
  std::vector<Hit> hits;
  bool banned_temporal = false;

  void walk(const Ltl& n, int pol, std::vector<uint32_t>& path) {
    switch (n.op) {
      case Ltl::x:
      case Ltl::u:
      case Ltl::r:
      case Ltl::f:
        banned_temporal = true;
        return;
      case Ltl::g:
        hits.push_back({path, pol, &n});
        // Nesting inside the invariant is rejected by the shape check.
        return;
      case Ltl::lnot: {
        path.push_back(0);
        walk(n.kids[0], -pol, path);
        path.pop_back();
        return;
      }
      case Ltl::limp: {
        path.push_back(0);
        walk(n.kids[0], -pol, path);
        path.pop_back();
        path.push_back(1);
        walk(n.kids[1], pol, path);
        path.pop_back();
        return;
      }
      case Ltl::liff: {
        for (uint32_t i = 0; i < 2; ++i) {
          path.push_back(i);
          walk(n.kids[i], 0, path);
          path.pop_back();
        }
        return;
      }
      default:
        for (uint32_t i = 0; i < n.kids.size(); ++i) {
          path.push_back(i);
          walk(n.kids[i], pol, path);
          path.pop_back();
        }
        return;
    }
  }
};

// Splits a conjunction into leaves at the expression level; the body of an
// invariant is temporal free, hence a single atom whose conjunctive
// structure lives in the expression.
void conj_leaves(const Expr& e, std::vector<const Expr*>& out) {
  if (e.op == ExOp::b_and) {
    for (const auto& k : e.kids) conj_leaves(k, out);
  } else {
    out.push_back(&e);
  }
}

// Counts distinct stuttering variables in one comparison side.
void side_stutters(const Expr& e, std::set<uint32_t>& out) {
  if (e.op == ExOp::var) out.insert(e.stutter);
  for (const auto& k : e.kids) side_stutters(k, out);
}

const Ltl* node_at(const Ltl& root, std::span<const uint32_t> path) {
  const Ltl* n = &root;
  for (uint32_t i : path) n = &n->kids[i];
  return n;
}

}  // namespace

FragmentReport classify_fragment(const AhltlFormula& f, const Binding* bi) {
  FragmentReport r;

  // Combined prefix polarity: traces first, then stutterings.
  bool seen_exists = false;
  r.forall_exists = true;
  auto feed = [&](bool universal) {
    if (universal && seen_exists) r.forall_exists = false;
    if (!universal) seen_exists = true;
  };
  for (const auto& t : f.traces) feed(t.universal);
  for (const auto& s : f.stutters) feed(s.universal);

  std::vector<uint32_t> stutters_per_trace(f.traces.size(), 0);
  for (const auto& s : f.stutters) ++stutters_per_trace[s.trace];

  for (const auto& s : f.stutters)
    if (s.universal && !f.traces[s.trace].universal)
      r.warnings.push_back("universal stuttering " + s.name +
                           " ranges over existential trace " +
                           f.traces[s.trace].name +
                           "; no completeness fragment covers this shape");

  // Alternation freedom: a single polarity across the whole prefix and at
  // most one stuttering per trace.
  {
    bool any_univ = false, any_exist = false;
    for (const auto& t : f.traces) (t.universal ? any_univ : any_exist) = true;
    for (const auto& s : f.stutters)
      (s.universal ? any_univ : any_exist) = true;
    bool one_each = true;
    for (uint32_t c : stutters_per_trace) one_each &= c <= 1;
    r.alternation_free = !(any_univ && any_exist) && one_each;
  }

  // Shared prefix shape of the two invariant fragments: universal traces,
  // one existential stuttering per trace.
  bool shape_ok = !f.traces.empty() && f.stutters.size() == f.traces.size();
  std::vector<uint32_t> stutter_of_trace(f.traces.size(), UINT32_MAX);
  if (shape_ok) {
    for (const auto& t : f.traces) shape_ok &= t.universal;
    for (uint32_t b = 0; b < f.stutters.size() && shape_ok; ++b) {
      const auto& s = f.stutters[b];
      shape_ok &= !s.universal && stutter_of_trace[s.trace] == UINT32_MAX;
      stutter_of_trace[s.trace] = b;
    }
  }

  if (shape_ok) {
    GScan scan;
    std::vector<uint32_t> path;
    scan.walk(f.body, 1, path);
    bool body_ok = !scan.banned_temporal;
    for (const auto& h : scan.hits) body_ok &= h.polarity > 0;

    // All G occurrences must hang off one conjunction: only land nodes
    // strictly between their deepest common ancestor and each G.
    if (body_ok && !scan.hits.empty()) {
      std::vector<uint32_t> lca = scan.hits[0].path;
      for (const auto& h : scan.hits) {
        size_t n = std::min(lca.size(), h.path.size());
        size_t i = 0;
        while (i < n && lca[i] == h.path[i]) ++i;
        lca.resize(i);
      }
      for (const auto& h : scan.hits) {
        for (size_t d = lca.size(); d < h.path.size(); ++d) {
          const Ltl* mid = node_at(f.body, std::span(h.path.data(), d));
          if (mid->op != Ltl::land) {
            body_ok = false;
            break;
          }
        }
      }
    }

    if (body_ok) {
      // Admissible: every invariant conjunct is var@b_i = var@b_j with the
      // same variable on both sides.
      AdmissibleInfo info;
      info.stutter_of_trace = stutter_of_trace;
      bool adm = true, rect = true;
      for (const auto& h : scan.hits) {
        if (h.node->kids[0].op != Ltl::atom) {
          adm = rect = false;
          break;
        }
        std::vector<const Expr*> leaves;
        conj_leaves(f.atoms[h.node->kids[0].ref], leaves);
        for (const Expr* leaf : leaves) {
          const Expr& a = *leaf;
          if (a.op != ExOp::eq) {
            adm = rect = false;
            break;
          }
          std::set<uint32_t> l, rg;
          side_stutters(a.kids[0], l);
          side_stutters(a.kids[1], rg);
          if (l.size() > 1 || rg.size() > 1) {
            adm = rect = false;
            break;
          }
          bool plain = a.kids[0].op == ExOp::var && a.kids[1].op == ExOp::var &&
                       a.kids[0].var == a.kids[1].var;
          if (!plain) {
            adm = false;
            continue;
          }
          // x@b = x@b constrains nothing and records no pair
          if (a.kids[0].stutter == a.kids[1].stutter) continue;
          uint32_t ti = f.stutters[a.kids[0].stutter].trace;
          uint32_t tj = f.stutters[a.kids[1].stutter].trace;
          if (ti == tj) {
            adm = false;
            continue;
          }
          auto key = std::minmax(ti, tj);
          auto& vars = info.pairs[{key.first, key.second}];
          if (std::find(vars.begin(), vars.end(), a.kids[0].var) == vars.end())
            vars.push_back(a.kids[0].var);
        }
        if (!rect) break;
      }
      r.rectangle_closed = rect;
      r.admissible = adm;
      if (adm) r.adm = std::move(info);
    }
  }

  if (bi) {
    bool all_term = true;
    uint32_t depth = 0;
    for (const auto* ts : bi->systems) {
      TerminationInfo ti = termination_info(*ts);
      all_term &= ti.terminating;
      if (ti.terminating) depth = std::max(depth, *ti.depth);
    }
    if (all_term && !bi->systems.empty()) r.terminating_depth = depth;
  }

  std::optional<uint32_t> z;
  auto consider = [&](uint32_t cand) {
    if (!z || cand < *z) z = cand;
  };
  if (r.alternation_free) consider(1);
  if (r.admissible) consider(1);
  if (r.rectangle_closed) consider(1);
  if (r.terminating_depth) consider(std::max<uint32_t>(*r.terminating_depth, 1));
  r.complete_at_z = z;
  return r;
}

}  // namespace ahc
