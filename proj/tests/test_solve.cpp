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
#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "ahc/game.hpp"
#include "ahc/solve.hpp"
#include "support/corpus.hpp"

using namespace ahc;

namespace {

GameGraph mk(std::vector<uint8_t> owner, std::vector<uint32_t> prio,
             std::vector<std::vector<uint32_t>> edges) {
  GameGraph g;
  g.vertex.resize(owner.size());
  g.owner = std::move(owner);
  g.priority = std::move(prio);
  g.edges = std::move(edges);
  for (const auto& e : g.edges) g.num_edges += e.size();
  g.initials = {0};
  return g;
}

// Random total game with at most ten verifier vertices of out-degree two,
// keeping the strategy-enumeration oracles below at most 2^10 cases.
GameGraph rand_game(std::mt19937& rng, uint32_t max_n, uint32_t max_prio) {
  std::uniform_int_distribution<uint32_t> nd(3, max_n);
  uint32_t n = nd(rng);
  std::uniform_int_distribution<uint32_t> vd(0, n - 1);
  std::uniform_int_distribution<uint32_t> pd(0, max_prio);
  std::uniform_int_distribution<int> coin(0, 1);

  std::vector<uint8_t> owner(n, 1);
  uint32_t verifier_left = 10;
  for (uint32_t v = 0; v < n && verifier_left > 0; ++v)
    if (coin(rng)) {
      owner[v] = 0;
      --verifier_left;
    }

  std::vector<uint32_t> prio(n);
  std::vector<std::vector<uint32_t>> edges(n);
  for (uint32_t v = 0; v < n; ++v) {
    prio[v] = pd(rng);
    uint32_t deg = owner[v] == 0 ? 1 + uint32_t(coin(rng))
                                 : 1 + vd(rng) % 3;
    std::set<uint32_t> out;
    while (out.size() < deg) out.insert(vd(rng));
    edges[v].assign(out.begin(), out.end());
  }
  return mk(std::move(owner), std::move(prio), std::move(edges));
}

// Kosaraju components over the subgraph induced by `in`.
std::vector<uint32_t> components(const std::vector<std::vector<uint32_t>>& adj,
                                 const std::vector<char>& in) {
  uint32_t n = uint32_t(adj.size());
  std::vector<std::vector<uint32_t>> radj(n);
  for (uint32_t v = 0; v < n; ++v)
    if (in[v])
      for (uint32_t w : adj[v])
        if (in[w]) radj[w].push_back(v);

  std::vector<char> seen(n, 0);
  std::vector<uint32_t> order;
  for (uint32_t s = 0; s < n; ++s) {
    if (!in[s] || seen[s]) continue;
    // Post-order via an explicit stack.
    std::vector<std::pair<uint32_t, uint32_t>> st{{s, 0}};
    seen[s] = 1;
    while (!st.empty()) {
      auto& [v, i] = st.back();
      if (i < adj[v].size()) {
        uint32_t w = adj[v][i++];
        if (in[w] && !seen[w]) {
          seen[w] = 1;
          st.push_back({w, 0});
        }
      } else {
        order.push_back(v);
        st.pop_back();
      }
    }
  }
  std::vector<uint32_t> comp(n, UINT32_MAX);
  uint32_t comps = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != UINT32_MAX) continue;
    std::vector<uint32_t> st{*it};
    comp[*it] = comps;
    while (!st.empty()) {
      uint32_t v = st.back();
      st.pop_back();
      for (uint32_t w : radj[v])
        if (comp[w] == UINT32_MAX) {
          comp[w] = comps;
          st.push_back(w);
        }
    }
    ++comps;
  }
  return comp;
}

std::vector<char> reaches(const std::vector<std::vector<uint32_t>>& adj,
                          std::vector<char> target) {
  uint32_t n = uint32_t(adj.size());
  std::vector<std::vector<uint32_t>> radj(n);
  for (uint32_t v = 0; v < n; ++v)
    for (uint32_t w : adj[v]) radj[w].push_back(v);
  std::vector<uint32_t> q;
  for (uint32_t v = 0; v < n; ++v)
    if (target[v]) q.push_back(v);
  for (size_t i = 0; i < q.size(); ++i)
    for (uint32_t u : radj[q[i]])
      if (!target[u]) {
        target[u] = 1;
        q.push_back(u);
      }
  return target;
}

// Enumerates every positional verifier strategy and unions the vertices
// from which the fixed strategy leaves the refuter no bad cycle. `bad`
// maps a restricted successor relation to the refuter's goal vertices.
template <class Bad>
std::vector<uint8_t> enumerate_regions(const GameGraph& g, Bad bad) {
  uint32_t n = g.num_vertices();
  std::vector<uint32_t> vo;
  for (uint32_t v = 0; v < n; ++v)
    if (g.owner[v] == 0) vo.push_back(v);
  std::vector<uint32_t> digit(vo.size(), 0);
  std::vector<uint8_t> wins(n, 0);
  while (true) {
    std::vector<std::vector<uint32_t>> adj(n);
    for (uint32_t v = 0; v < n; ++v) {
      if (g.owner[v] == 0)
        adj[v] = {g.edges[v][digit[std::lower_bound(vo.begin(), vo.end(), v) -
                                   vo.begin()]]};
      else
        adj[v] = g.edges[v];
    }
    std::vector<char> lost = reaches(adj, bad(adj));
    for (uint32_t v = 0; v < n; ++v)
      if (!lost[v]) wins[v] = 1;
    // Next strategy.
    size_t k = vo.size();
    while (k > 0) {
      if (++digit[k - 1] < g.edges[vo[k - 1]].size()) break;
      digit[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return wins;
}

// Refuter goal for recurrence games: any cycle avoiding priority 0.
std::vector<uint8_t> oracle_buchi(const GameGraph& g) {
  uint32_t n = g.num_vertices();
  return enumerate_regions(g, [&](const std::vector<std::vector<uint32_t>>&
                                      adj) {
    std::vector<char> in(n, 0);
    for (uint32_t v = 0; v < n; ++v) in[v] = g.priority[v] != 0;
    std::vector<uint32_t> comp = components(adj, in);
    std::vector<uint32_t> size(n, 0);
    for (uint32_t v = 0; v < n; ++v)
      if (in[v]) ++size[comp[v]];
    std::vector<char> bad(n, 0);
    for (uint32_t v = 0; v < n; ++v) {
      if (!in[v]) continue;
      if (size[comp[v]] > 1) bad[v] = 1;
      for (uint32_t w : adj[v])
        if (w == v && in[w]) bad[v] = 1;
    }
    return bad;
  });
}

// Refuter goal for parity games: any cycle with odd minimal priority.
std::vector<uint8_t> oracle_parity(const GameGraph& g) {
  uint32_t n = g.num_vertices();
  std::vector<uint32_t> odds;
  for (uint32_t v = 0; v < n; ++v)
    if (g.priority[v] % 2 == 1) odds.push_back(g.priority[v]);
  std::sort(odds.begin(), odds.end());
  odds.erase(std::unique(odds.begin(), odds.end()), odds.end());

  return enumerate_regions(
      g, [&](const std::vector<std::vector<uint32_t>>& adj) {
        std::vector<char> bad(n, 0);
        for (uint32_t p : odds) {
          std::vector<char> in(n, 0);
          for (uint32_t v = 0; v < n; ++v) in[v] = g.priority[v] >= p;
          std::vector<uint32_t> comp = components(adj, in);
          std::vector<uint32_t> size(n, 0);
          std::vector<char> has_p(n, 0), cyc(n, 0);
          for (uint32_t v = 0; v < n; ++v) {
            if (!in[v]) continue;
            ++size[comp[v]];
            if (g.priority[v] == p) has_p[comp[v]] = 1;
            for (uint32_t w : adj[v])
              if (w == v) cyc[comp[v]] = 1;
          }
          for (uint32_t v = 0; v < n; ++v) {
            if (!in[v] || !has_p[comp[v]]) continue;
            if (size[comp[v]] > 1 || cyc[comp[v]]) bad[v] = 1;
          }
        }
        return bad;
      });
}

void check_refuter_map(const GameGraph& g, const SolveResult& r) {
  for (uint32_t v = 0; v < g.num_vertices(); ++v) {
    if (r.verifier_wins[v] || g.owner[v] != 1) continue;
    uint32_t s = r.refuter_strategy[v];
    REQUIRE(s != kNoChoice);
    CHECK(std::find(g.edges[v].begin(), g.edges[v].end(), s) !=
          g.edges[v].end());
    CHECK_FALSE(r.verifier_wins[s]);
  }
}

}  // namespace

TEST_CASE("pinned single-vertex and sink games") {
  // Accepting self-loop owned by the verifier.
  GameGraph loop = mk({0}, {0}, {{0}});
  SolveResult r = solve_buchi(loop);
  CHECK(r.verifier_wins[0]);
  CHECK(r.strategy[0] == 0);
  CHECK(check_strategy(loop, r));

  // The refuter picks the non-accepting sink cycle.
  GameGraph pick = mk({1, 1, 1}, {1, 0, 1}, {{1, 2}, {1}, {2}});
  r = solve_buchi(pick);
  CHECK_FALSE(r.verifier_wins[0]);
  CHECK(r.verifier_wins[1]);
  CHECK_FALSE(r.verifier_wins[2]);
  CHECK(r.refuter_strategy[0] == 2);
  CHECK(check_strategy(pick, r));

  // Single-player chain whose only cycle has odd minimal priority.
  GameGraph chain = mk({1, 1, 1}, {1, 2, 3}, {{1}, {2}, {0}});
  r = solve_parity(chain);
  CHECK_FALSE(r.verifier_wins[0]);
  CHECK_FALSE(r.verifier_wins[1]);
  CHECK_FALSE(r.verifier_wins[2]);
  check_refuter_map(chain, r);

  // Two equally winning successors: the lower id wins the tie.
  GameGraph tie = mk({0, 1, 1}, {0, 0, 0}, {{1, 2}, {1}, {2}});
  r = solve_parity(tie);
  CHECK(r.verifier_wins[0]);
  CHECK(r.strategy[0] == 1);
  CHECK(check_strategy(tie, r));
}

TEST_CASE("recurrence solver matches the strategy-enumeration oracle") {
  std::mt19937 rng(20260301);
  for (int trial = 0; trial < 200; ++trial) {
    CAPTURE(trial);
    GameGraph g = rand_game(rng, 50, 1);
    SolveResult r = solve_buchi(g);
    std::vector<uint8_t> want = oracle_buchi(g);
    REQUIRE(r.verifier_wins == want);
    CHECK(check_strategy(g, r));
    check_refuter_map(g, r);
  }
}

TEST_CASE("parity solver matches the strategy-enumeration oracle") {
  std::mt19937 rng(20260302);
  for (int trial = 0; trial < 200; ++trial) {
    CAPTURE(trial);
    GameGraph g = rand_game(rng, 40, 3);
    SolveResult r = solve_parity(g);
    std::vector<uint8_t> want = oracle_parity(g);
    REQUIRE(r.verifier_wins == want);
    CHECK(check_strategy(g, r));
    check_refuter_map(g, r);
  }
}

TEST_CASE("parity solving specializes to recurrence on two priorities") {
  std::mt19937 rng(20260303);
  for (int trial = 0; trial < 100; ++trial) {
    CAPTURE(trial);
    GameGraph g = rand_game(rng, 50, 1);
    SolveResult a = solve_buchi(g);
    SolveResult b = solve_parity(g);
    REQUIRE(a.verifier_wins == b.verifier_wins);
    CHECK(check_strategy(g, a));
    CHECK(check_strategy(g, b));
  }
}

TEST_CASE("corrupted certificates are rejected") {
  // Verifier chooses between an accepting and a rejecting sink.
  GameGraph g = mk({0, 1, 1}, {0, 0, 1}, {{1, 2}, {1}, {2}});
  SolveResult r = solve_parity(g);
  REQUIRE(r.verifier_wins == std::vector<uint8_t>{1, 1, 0});
  REQUIRE(r.strategy[0] == 1);
  CHECK(check_strategy(g, r));

  SolveResult wrong = r;
  wrong.strategy[0] = 2;  // points into the refuter's region
  CHECK_FALSE(check_strategy(g, wrong));

  wrong = r;
  wrong.strategy[0] = kNoChoice;
  CHECK_FALSE(check_strategy(g, wrong));

  wrong = r;
  wrong.verifier_wins[2] = 1;  // region not closed under the parity check
  CHECK_FALSE(check_strategy(g, wrong));
}

TEST_CASE("the fairness game is won from its initial vertex with the "
          "expected progress choice") {
  TransitionSystem ts =
      parse_system(testing::read_corpus_file("fig4.ats"));
  AhltlFormula f = parse_formula(testing::read_corpus_file("fair.ahq"));
  Binding bi;
  bi.systems.assign(f.traces.size(), &ts);
  Nba nba = prune_dead(ltl_to_nba(build_psi_mod(f), uint32_t(f.atoms.size()),
                                  uint32_t(f.stutters.size())));
  Dpa dpa = determinize(nba, 1u << 20);
  GameContext cx = make_game_context(bi, f, dpa, 1);
  GameGraph g = build_game(cx);
  SolveResult r = solve_parity(g);

  for (uint32_t v : g.initials) CHECK(r.verifier_wins[v]);
  CHECK(check_strategy(g, r));

  // Walk the strategy along the refuter branch that appends the active
  // state: the verifier must answer by progressing only the second
  // stuttering, the move that keeps the activity bits apart.
  const uint32_t s0 = 0, s1 = 1;
  using W = std::vector<std::vector<uint32_t>>;
  uint32_t v0 = g.initials[0];
  uint32_t v1 = g.edges[v0][0];
  uint32_t v2 = UINT32_MAX;
  for (uint32_t w : g.edges[v1])
    if (g.vertex[w].windows == W{{s0, s0}, {s0}}) v2 = w;
  REQUIRE(v2 != UINT32_MAX);
  uint32_t v3 = r.strategy[v2];
  REQUIRE(v3 != kNoChoice);
  // The winning answer appends the active state and progresses both sides.
  CHECK(g.vertex[v3].windows == W{{s0, s0}, {s0, s1}});
  CHECK(g.vertex[v3].progressed == 0b11);

  uint32_t v4 = g.edges[v3][0];
  uint32_t v9 = UINT32_MAX;
  for (uint32_t w : g.edges[v4])
    if (g.vertex[w].windows == W{{s0, s1}, {s1}}) v9 = w;
  REQUIRE(v9 != UINT32_MAX);
  uint32_t v14 = r.strategy[v9];
  REQUIRE(v14 != kNoChoice);
  CHECK(g.vertex[v14].progressed == 0b10);
  CHECK(g.vertex[v14].pointers == std::vector<uint32_t>{0, 1});
}
