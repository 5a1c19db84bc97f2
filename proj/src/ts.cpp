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
#include "ahc/ts.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <sstream>

namespace ahc {
namespace {

// One-line cursor; the format is line oriented and '#' starts a comment.
struct Cur {
  std::string_view s;
  unsigned line;
  size_t i = 0;

  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
  unsigned col() const { return (unsigned)i + 1; }

  [[noreturn]] void err(const std::string& msg) {
    fail_at(ErrKind::syntax, line, col(), msg);
  }

  bool peek_is(char c) {
    skip_ws();
    return i < s.size() && s[i] == c;
  }
  void expect(char c) {
    skip_ws();
    if (i >= s.size() || s[i] != c)
      err(std::string("expected '") + c + "'");
    ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool eat_word(std::string_view w) {
    skip_ws();
    if (s.substr(i, w.size()) == w) {
      size_t j = i + w.size();
      if (j >= s.size() || !(std::isalnum((unsigned char)s[j]) || s[j] == '_')) {
        i = j;
        return true;
      }
    }
    return false;
  }
  std::string ident() {
    skip_ws();
    size_t b = i;
    if (i < s.size() && (std::isalpha((unsigned char)s[i]) || s[i] == '_')) {
      ++i;
      while (i < s.size() && (std::isalnum((unsigned char)s[i]) || s[i] == '_'))
        ++i;
    }
    if (b == i) err("expected identifier");
    return std::string(s.substr(b, i - b));
  }
  int64_t integer() {
    skip_ws();
    size_t b = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    while (i < s.size() && std::isdigit((unsigned char)s[i])) ++i;
    if (b == i || (i - b == 1 && !std::isdigit((unsigned char)s[b])))
      err("expected integer");
    return std::stoll(std::string(s.substr(b, i - b)));
  }
};

[[noreturn]] void sem_err(unsigned line, const std::string& msg) {
  fail(ErrKind::semantic, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace

TransitionSystem parse_system(std::string_view text) {
  TransitionSystem ts;
  std::map<std::string, uint32_t> state_id;
  std::optional<uint32_t> init;
  bool has_system_line = false;
  struct PendingTrans {
    unsigned line;
    std::string src;
    std::vector<std::string> dsts;
  };
  std::vector<PendingTrans> pending;

  unsigned line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(
        pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    Cur c{raw, line_no};
    if (c.done()) continue;

    if (c.eat_word("system")) {
      if (has_system_line) sem_err(line_no, "duplicate system line");
      ts.name = c.ident();
      has_system_line = true;
    } else if (c.eat_word("var")) {
      std::string n = c.ident();
      if (ts.var_index(n) >= 0) sem_err(line_no, "duplicate variable " + n);
      if (!ts.state_names.empty())
        sem_err(line_no, "variable declared after states");
      c.expect(':');
      VarDecl d;
      d.name = n;
      if (c.eat_word("bool")) {
        d.sort = Sort::boolean;
        d.lo = 0;
        d.hi = 1;
      } else if (c.eat_word("int")) {
        d.sort = Sort::integer;
        c.expect('(');
        d.lo = c.integer();
        c.expect('.');
        c.expect('.');
        d.hi = c.integer();
        c.expect(')');
        if (d.lo > d.hi) sem_err(line_no, "empty range for " + n);
      } else {
        c.err("expected bool or int(lo..hi)");
      }
      ts.vars.push_back(std::move(d));
    } else if (c.eat_word("state")) {
      std::string n = c.ident();
      if (state_id.count(n)) sem_err(line_no, "duplicate state " + n);
      uint32_t id = ts.num_states();
      state_id[n] = id;
      ts.state_names.push_back(n);
      std::vector<Value> lbl(ts.vars.size());
      std::vector<bool> seen(ts.vars.size(), false);
      c.expect('{');
      if (!c.peek_is('}')) {
        do {
          std::string vn = c.ident();
          int vi = ts.var_index(vn);
          if (vi < 0) sem_err(line_no, "unknown variable " + vn);
          if (seen[vi]) sem_err(line_no, "variable " + vn + " assigned twice");
          seen[vi] = true;
          c.expect('=');
          Value v;
          if (c.eat_word("true"))
            v = 1;
          else if (c.eat_word("false"))
            v = 0;
          else
            v = c.integer();
          const VarDecl& d = ts.vars[vi];
          if (v < d.lo || v > d.hi)
            sem_err(line_no, "value out of range for " + vn + " in state " + n);
          lbl[vi] = v;
        } while (c.eat(','));
      }
      c.expect('}');
      for (size_t vi = 0; vi < ts.vars.size(); ++vi)
        if (!seen[vi])
          sem_err(line_no,
                  "state " + n + " leaves " + ts.vars[vi].name + " unassigned");
      ts.labels.push_back(std::move(lbl));
      ts.succ.emplace_back();
      if (c.eat_word("init")) {
        if (init) sem_err(line_no, "second init state " + n);
        init = id;
      }
      if (!c.done()) c.err("trailing input after state");
    } else if (c.eat_word("trans")) {
      PendingTrans t;
      t.line = line_no;
      t.src = c.ident();
      c.expect('-');
      c.expect('>');
      t.dsts.push_back(c.ident());
      while (c.eat(',')) t.dsts.push_back(c.ident());
      if (!c.done()) c.err("trailing input after transition");
      pending.push_back(std::move(t));
    } else {
      c.err("expected system, var, state, or trans");
    }
  }

  if (!has_system_line) fail(ErrKind::semantic, "missing system line");
  if (ts.state_names.empty()) fail(ErrKind::semantic, "no states declared");
  if (!init) fail(ErrKind::semantic, "no state is marked init");
  ts.init = *init;

  for (const auto& t : pending) {
    auto si = state_id.find(t.src);
    if (si == state_id.end()) sem_err(t.line, "unknown state " + t.src);
    for (const auto& d : t.dsts) {
      auto di = state_id.find(d);
      if (di == state_id.end()) sem_err(t.line, "unknown state " + d);
      ts.succ[si->second].push_back(di->second);
    }
  }
  for (uint32_t s = 0; s < ts.num_states(); ++s) {
    auto& v = ts.succ[s];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.empty())
      fail(ErrKind::semantic,
           "state " + ts.state_names[s] + " has no successor");
  }
  return ts;
}

std::string print_system(const TransitionSystem& ts) {
  std::ostringstream o;
  o << "system " << ts.name << "\n";
  for (const auto& d : ts.vars) {
    o << "var " << d.name << " : ";
    if (d.sort == Sort::boolean)
      o << "bool";
    else
      o << "int(" << d.lo << ".." << d.hi << ")";
    o << "\n";
  }
  for (uint32_t s = 0; s < ts.num_states(); ++s) {
    o << "state " << ts.state_names[s] << " {";
    for (size_t v = 0; v < ts.vars.size(); ++v) {
      if (v) o << ",";
      o << " " << ts.vars[v].name << " = ";
      if (ts.vars[v].sort == Sort::boolean)
        o << (ts.labels[s][v] ? "true" : "false");
      else
        o << ts.labels[s][v];
    }
    o << " }";
    if (s == ts.init) o << " init";
    o << "\n";
  }
  for (uint32_t s = 0; s < ts.num_states(); ++s) {
    o << "trans " << ts.state_names[s] << " -> ";
    for (size_t j = 0; j < ts.succ[s].size(); ++j) {
      if (j) o << ", ";
      o << ts.state_names[ts.succ[s][j]];
    }
    o << "\n";
  }
  return o.str();
}

TerminationInfo termination_info(const TransitionSystem& ts) {
  uint32_t n = ts.num_states();
  std::vector<bool> reach(n, false);
  std::deque<uint32_t> bfs{ts.init};
  reach[ts.init] = true;
  while (!bfs.empty()) {
    uint32_t s = bfs.front();
    bfs.pop_front();
    for (uint32_t t : ts.succ[s])
      if (!reach[t]) {
        reach[t] = true;
        bfs.push_back(t);
      }
  }

  // Longest distance to a sink over the reachable non-sink subgraph.
  // color: 0 unvisited, 1 on stack, 2 done. A gray hit is a non-sink cycle.
  std::vector<int> color(n, 0);
  std::vector<int64_t> dist(n, -1);
  bool cyclic = false;
  auto dfs = [&](auto&& self, uint32_t s) -> int64_t {
    if (ts.is_sink(s)) return 0;
    if (color[s] == 1) {
      cyclic = true;
      return 0;
    }
    if (color[s] == 2) return dist[s];
    color[s] = 1;
    int64_t best = 0;
    for (uint32_t t : ts.succ[s]) {
      int64_t d = 1 + self(self, t);
      best = std::max(best, d);
      if (cyclic) break;
    }
    color[s] = 2;
    dist[s] = best;
    return best;
  };
  int64_t d = dfs(dfs, ts.init);
  TerminationInfo info;
  info.terminating = !cyclic;
  if (info.terminating) info.depth = (uint32_t)d;
  return info;
}

TransitionSystem restrict_reachable(const TransitionSystem& ts) {
  uint32_t n = ts.num_states();
  std::vector<bool> reach(n, false);
  std::deque<uint32_t> bfs{ts.init};
  reach[ts.init] = true;
  while (!bfs.empty()) {
    uint32_t s = bfs.front();
    bfs.pop_front();
    for (uint32_t t : ts.succ[s])
      if (!reach[t]) {
        reach[t] = true;
        bfs.push_back(t);
      }
  }
  std::vector<uint32_t> remap(n, UINT32_MAX);
  TransitionSystem out;
  out.name = ts.name;
  out.vars = ts.vars;
  for (uint32_t s = 0; s < n; ++s) {
    if (!reach[s]) continue;
    remap[s] = out.num_states();
    out.state_names.push_back(ts.state_names[s]);
    out.labels.push_back(ts.labels[s]);
  }
  out.succ.resize(out.num_states());
  for (uint32_t s = 0; s < n; ++s) {
    if (!reach[s]) continue;
    for (uint32_t t : ts.succ[s]) out.succ[remap[s]].push_back(remap[t]);
  }
  out.init = remap[ts.init];
  return out;
}

}  // namespace ahc
