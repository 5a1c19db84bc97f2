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
#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ahc/export.hpp"
#include "ahc/verify.hpp"
#include "doctest.h"
#include "support/instance.hpp"

using namespace ahc;
using testing::corpus_instance;
using testing::make_instance;

namespace {

std::string edge_text(uint32_t a, uint32_t b) {
  return "v" + std::to_string(a) + " -> v" + std::to_string(b);
}

// Window contents by state name, one inner vector per trace slot.
bool windows_are(const GameContext& cx, const GameVertex& v,
                 const std::vector<std::vector<std::string>>& want) {
  if (v.windows.size() != want.size()) return false;
  for (uint32_t s = 0; s < want.size(); ++s) {
    const auto& names = cx.system_of_slot(s).state_names;
    if (v.windows[s].size() != want[s].size()) return false;
    for (uint32_t i = 0; i < want[s].size(); ++i)
      if (names[v.windows[s][i]] != want[s][i]) return false;
  }
  return true;
}

// Vertices reachable when the verifier follows its strategy and the
// refuter may do anything, starting from the winning initials.
std::vector<char> strategy_reach(const GameGraph& g, const SolveResult& r) {
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<uint32_t> stack;
  for (uint32_t v : g.initials)
    if (r.verifier_wins[v]) {
      seen[v] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    uint32_t v = stack.back();
    stack.pop_back();
    auto push = [&](uint32_t w) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    };
    if (g.owner[v] == 0) {
      if (r.strategy[v] != kNoChoice) push(r.strategy[v]);
    } else {
      for (uint32_t w : g.edges[v]) push(w);
    }
  }
  return seen;
}

std::vector<uint32_t> find_reached(const VerifyRun& run,
                                   const std::vector<char>& reach, Stage st,
                                   const std::vector<std::vector<std::string>>& win,
                                   std::vector<uint32_t> pointers,
                                   uint32_t progressed) {
  std::vector<uint32_t> out;
  for (uint32_t v = 0; v < run.game.num_vertices(); ++v) {
    const GameVertex& gv = run.game.vertex[v];
    if (gv.stage != st || !reach[v]) continue;
    if (gv.pointers != pointers || gv.progressed != progressed) continue;
    if (windows_are(run.cx, gv, win)) out.push_back(v);
  }
  return out;
}

// --- minimal checker for the DOT grammar subset of directed graphs -------
//
// graph     := 'digraph' id? '{' stmt* '}'
// stmt      := attr-target attr-list | id '=' id | id edge-tail? attr-list?
// edge-tail := ('->' id)+
// attr-list := '[' (id '=' id (','|';')?)* ']'
// Statements may end with ';'. Ids are names, numerals, or quoted strings.

struct DotParser {
  std::string_view in;
  size_t pos = 0;

  void ws() {
    while (pos < in.size() && (in[pos] == ' ' || in[pos] == '\t' ||
                               in[pos] == '\n' || in[pos] == '\r'))
      ++pos;
  }

  bool lit(char c) {
    ws();
    if (pos < in.size() && in[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  bool arrow() {
    ws();
    if (pos + 1 < in.size() && in[pos] == '-' && in[pos + 1] == '>') {
      pos += 2;
      return true;
    }
    return false;
  }

  // Returns the id token, or nullopt when the next token is not an id.
  std::optional<std::string> id() {
    ws();
    if (pos >= in.size()) return std::nullopt;
    char c = in[pos];
    if (c == '"') {
      std::string out;
      ++pos;
      while (pos < in.size() && in[pos] != '"') {
        if (in[pos] == '\\' && pos + 1 < in.size()) ++pos;
        out.push_back(in[pos++]);
      }
      if (pos >= in.size()) return std::nullopt;  // unterminated
      ++pos;
      return out;
    }
    if (isalnum((unsigned char)c) || c == '_' || c == '.' ||
        (unsigned char)c >= 0x80) {
      std::string out;
      while (pos < in.size() &&
             (isalnum((unsigned char)in[pos]) || in[pos] == '_' ||
              in[pos] == '.' || (unsigned char)in[pos] >= 0x80))
        out.push_back(in[pos++]);
      return out;
    }
    return std::nullopt;
  }

  bool attr_list() {
    if (!lit('[')) return false;
    while (true) {
      ws();
      if (lit(']')) return true;
      auto k = id();
      if (!k || !lit('=')) return false;
      if (!id()) return false;
      ws();
      if (pos < in.size() && (in[pos] == ',' || in[pos] == ';')) ++pos;
    }
  }

  bool stmt(std::multimap<std::string, std::string>* edges) {
    auto head = id();
    if (!head) return false;
    ws();
    if (pos < in.size() && in[pos] == '=') {
      ++pos;
      return id().has_value();
    }
    std::string prev = *head;
    bool any_edge = false;
    while (true) {
      size_t save = pos;
      if (!arrow()) {
        pos = save;
        break;
      }
      auto nxt = id();
      if (!nxt) return false;
      if (edges) edges->emplace(prev, *nxt);
      prev = *nxt;
      any_edge = true;
    }
    (void)any_edge;
    ws();
    if (pos < in.size() && in[pos] == '[')
      if (!attr_list()) return false;
    return true;
  }

  bool graph(std::multimap<std::string, std::string>* edges) {
    auto kw = id();
    if (!kw || *kw != "digraph") return false;
    ws();
    if (pos < in.size() && in[pos] != '{') {
      if (!id()) return false;
    }
    if (!lit('{')) return false;
    while (true) {
      ws();
      if (lit('}')) break;
      if (!stmt(edges)) return false;
      while (lit(';')) {
      }
    }
    ws();
    return pos == in.size();
  }
};

bool dot_parses(const std::string& text,
                std::multimap<std::string, std::string>* edges = nullptr) {
  DotParser p{text};
  return p.graph(edges);
}

}  // namespace

TEST_CASE("the fairness strategy export keeps the documented fragment") {
  auto in = corpus_instance({"fig4.ats"}, "fair.ahq");
  auto run = verify_run(in->bi, in->f, 1);
  REQUIRE(run->verdict.outcome == Outcome::verified);

  DotOptions opt;
  opt.strategy_only = true;
  std::string dot = dot_game(run->cx, run->game, &run->solve, opt);
  CHECK(dot_parses(dot));

  const GameGraph& g = run->game;
  REQUIRE(g.initials.size() == 1);
  uint32_t v0 = g.initials[0];
  CHECK(windows_are(run->cx, g.vertex[v0], {{"s0"}, {"s0"}}));
  REQUIRE(g.edges[v0].size() == 1);
  uint32_t v1 = g.edges[v0][0];
  CHECK(g.vertex[v1].stage == Stage::forall_stage);
  CHECK(dot.find(edge_text(v0, v1)) != std::string::npos);

  // Both refuter options at the first branching vertex stay in the export:
  // appending s0 and appending s1 to the universal trace.
  REQUIRE(g.edges[v1].size() == 2);
  bool saw_s0 = false, saw_s1 = false;
  for (uint32_t w : g.edges[v1]) {
    CHECK(dot.find(edge_text(v1, w)) != std::string::npos);
    if (windows_are(run->cx, g.vertex[w], {{"s0", "s0"}, {"s0"}}))
      saw_s0 = true;
    if (windows_are(run->cx, g.vertex[w], {{"s0", "s1"}, {"s0"}}))
      saw_s1 = true;
  }
  CHECK(saw_s0);
  CHECK(saw_s1);

  // The verifier's documented answer after the refuter plays s0 then s1:
  // append s2 on the existential side and progress only its stuttering,
  // then deterministically shift both windows.
  auto reach = strategy_reach(g, run->solve);
  auto nines = find_reached(*run, reach, Stage::exists_stage,
                            {{"s0", "s1"}, {"s1"}}, {0, 0}, 0);
  REQUIRE(!nines.empty());
  bool documented_move = false;
  for (uint32_t v9 : nines) {
    uint32_t v14 = run->solve.strategy[v9];
    REQUIRE(v14 != kNoChoice);
    if (!windows_are(run->cx, g.vertex[v14], {{"s0", "s1"}, {"s1", "s2"}}))
      continue;
    if (g.vertex[v14].pointers != std::vector<uint32_t>{0, 1}) continue;
    if (g.vertex[v14].progressed != 0b10u) continue;
    CHECK(dot.find(edge_text(v9, v14)) != std::string::npos);

    // A strategy-restricted verifier vertex has exactly one drawn edge.
    size_t cnt = 0, at = 0;
    std::string pre = "  v" + std::to_string(v9) + " -> ";
    while ((at = dot.find(pre, at)) != std::string::npos) ++cnt, ++at;
    CHECK(cnt == 1);

    REQUIRE(g.edges[v14].size() == 1);
    uint32_t v15 = g.edges[v14][0];
    CHECK(g.vertex[v15].stage == Stage::forall_stage);
    CHECK(windows_are(run->cx, g.vertex[v15], {{"s0"}, {"s2"}}));
    CHECK(dot.find(edge_text(v14, v15)) != std::string::npos);
    documented_move = true;
  }
  CHECK(documented_move);

  // Losing vertices never appear in the restricted export.
  for (uint32_t v = 0; v < g.num_vertices(); ++v) {
    if (run->solve.verifier_wins[v]) continue;
    CHECK(dot.find("  v" + std::to_string(v) + " [") == std::string::npos);
  }
}

TEST_CASE("a one-state system exports a three-vertex strategy cycle") {
  auto in = make_instance({"system one\n"
                           "var x : bool\n"
                           "state s0 { x = false } init\n"
                           "trans s0 -> s0\n"},
                          "exists p. exists b ~ p. G x@b = x@b");
  auto run = verify_run(in->bi, in->f, 1);
  REQUIRE(run->verdict.outcome == Outcome::verified);

  DotOptions opt;
  opt.strategy_only = true;
  std::string dot = dot_game(run->cx, run->game, &run->solve, opt);
  std::multimap<std::string, std::string> edges;
  REQUIRE(dot_parses(dot, &edges));

  // Every vertex has one drawn successor; following them from anywhere
  // must close a cycle through the three stages.
  std::set<std::string> nodes;
  for (const auto& [a, b] : edges) {
    nodes.insert(a);
    nodes.insert(b);
    CHECK(edges.count(a) == 1);
  }
  CHECK(edges.size() == nodes.size());
  std::string cur = *nodes.begin();
  std::set<std::string> seen;
  while (!seen.count(cur)) {
    seen.insert(cur);
    auto it = edges.find(cur);
    REQUIRE(it != edges.end());
    cur = it->second;
  }
  std::vector<std::string> loop;
  std::string at = cur;
  do {
    loop.push_back(at);
    at = edges.find(at)->second;
  } while (at != cur);
  CHECK(loop.size() == 3);
}

TEST_CASE("full exports shade the refuter region and mark the strategy") {
  auto in = corpus_instance({"t1.ats"}, "twostutter.ahq");
  auto run = verify_run(in->bi, in->f, 1);  // unknown at this window
  REQUIRE(run->verdict.outcome == Outcome::unknown);

  std::string dot = dot_game(run->cx, run->game, &run->solve);
  CHECK(dot_parses(dot));
  CHECK(dot.find("fillcolor") != std::string::npos);
  CHECK(dot.find("penwidth=2") != std::string::npos);

  // Unrestricted exports draw every vertex.
  for (uint32_t v = 0; v < run->game.num_vertices(); ++v)
    CHECK(dot.find("  v" + std::to_string(v) + " [") != std::string::npos);

  // Without a winning initial there is nothing to restrict to.
  DotOptions opt;
  opt.strategy_only = true;
  try {
    dot_game(run->cx, run->game, &run->solve, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::not_winning);
  }
}

TEST_CASE("verdict JSON is stable, ordered, and complete") {
  auto in = corpus_instance({"fig4.ats"}, "fair.ahq");
  Verdict a = verify(in->bi, in->f, 1);
  Verdict b = verify(in->bi, in->f, 1);

  std::string ja = verdict_json(a);
  CHECK(ja == verdict_json(b));
  CHECK(ja.rfind("{\n  \"schema\": 1,", 0) == 0);
  CHECK(ja.find("\"timings\"") == std::string::npos);

  auto j = nlohmann::json::parse(ja);
  CHECK(j["outcome"] == "Verified");
  CHECK(j["reason"] == "win_from_all_initials");
  CHECK(j["z"] == 1);
  CHECK(j["fragment"]["forall_exists"] == true);
  CHECK(j["fragment"]["complete_at_z"].is_null());
  CHECK(j["stats"]["vertices"].get<uint64_t>() > 0);
  CHECK(j["warnings"].is_array());

  std::string jt = verdict_json(a, true);
  auto t = nlohmann::json::parse(jt);
  CHECK(t["timings"]["t_total"].get<double>() >= 0.0);
}

TEST_CASE("verdict JSON reports the violating fragment") {
  auto in = make_instance({"system div\n"
                           "var l : bool\n"
                           "var o : bool\n"
                           "state s0 { l = false, o = false } init\n"
                           "state s1 { l = false, o = false }\n"
                           "state s2 { l = false, o = true }\n"
                           "trans s0 -> s1, s2\n"
                           "trans s1 -> s1\n"
                           "trans s2 -> s2\n"},
                          "forall p1. forall p2. exists b1 ~ p1. "
                          "exists b2 ~ p2. (l@b1 = l@b2) -> G o@b1 = o@b2");
  auto j = nlohmann::json::parse(verdict_json(verify(in->bi, in->f, 1)));
  CHECK(j["outcome"] == "Violated");
  CHECK(j["reason"] == "loss_in_complete_fragment");
  CHECK(j["fragment"]["admissible"] == true);
  CHECK(j["fragment"]["complete_at_z"] == 1);
  CHECK(j["fragment"]["tag"] == "admissible");
}
