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
#include "ahc/solve.hpp"

#include <algorithm>
#include <vector>

#include "ahc/diag.hpp"

namespace ahc {

namespace {

// Shared attractor machinery over a shrinking subgame. The alive bitmap is
// the current subgame; kill/revive keep it in sync with the recursion.
struct Arena {
  const GameGraph& g;
  SolveResult& res;
  std::vector<std::vector<uint32_t>> preds;
  std::vector<char> alive;
  std::vector<uint32_t> cnt;  // scratch: live successor counts
  std::vector<char> mark;     // scratch: attractor membership

  Arena(const GameGraph& g_, SolveResult& r) : g(g_), res(r) {
    preds.resize(g.num_vertices());
    for (uint32_t v = 0; v < g.num_vertices(); ++v)
      for (uint32_t w : g.edges[v]) preds[w].push_back(v);
    alive.assign(g.num_vertices(), 1);
    cnt.resize(g.num_vertices());
    mark.assign(g.num_vertices(), 0);
  }

  void kill(const std::vector<uint32_t>& vs) {
    for (uint32_t v : vs) alive[v] = 0;
  }
  void revive(const std::vector<uint32_t>& vs) {
    for (uint32_t v : vs) alive[v] = 1;
  }

  // Attractor of base for player within the live subgame, base included.
  // For player-owned vertices attracted through an edge the strategy gets
  // the lowest-id successor that was already inside the set; strategy
  // targets therefore always lead toward base. Base entries are left to
  // the caller.
  std::vector<uint32_t> attract(int player, const std::vector<uint32_t>& base,
                                std::vector<uint32_t>* strat) {
    for (uint32_t v = 0; v < g.num_vertices(); ++v) {
      if (!alive[v]) continue;
      uint32_t c = 0;
      for (uint32_t w : g.edges[v]) c += alive[w];
      cnt[v] = c;
    }
    std::vector<uint32_t> out;
    for (uint32_t v : base) {
      mark[v] = 1;
      out.push_back(v);
    }
    for (size_t i = 0; i < out.size(); ++i) {
      for (uint32_t u : preds[out[i]]) {
        if (!alive[u] || mark[u]) continue;
        if (int(g.owner[u]) == player) {
          mark[u] = 1;
          if (strat) {
            for (uint32_t w : g.edges[u]) {
              if (w != u && alive[w] && mark[w]) {
                (*strat)[u] = w;
                break;
              }
            }
          }
          out.push_back(u);
        } else if (--cnt[u] == 0) {
          mark[u] = 1;
          out.push_back(u);
        }
      }
    }
    for (uint32_t v : out) mark[v] = 0;
    return out;
  }

  // Min-even Zielonka. The former tail recursion on the opponent-reduced
  // subgame runs as a loop so the stack depth stays bounded by the number
  // of distinct priorities.
  void zielonka(const std::vector<uint32_t>& verts_in) {
    std::vector<uint32_t> verts = verts_in;
    std::vector<uint32_t> killed;
    while (!verts.empty()) {
      uint32_t p = UINT32_MAX;
      for (uint32_t v : verts) p = std::min(p, g.priority[v]);
      int player = int(p & 1);
      std::vector<uint32_t>& strat =
          player == 0 ? res.strategy : res.refuter_strategy;

      std::vector<uint32_t> base;
      for (uint32_t v : verts)
        if (g.priority[v] == p) base.push_back(v);

      std::vector<uint32_t> reach = attract(player, base, &strat);
      kill(reach);
      std::vector<uint32_t> rest;
      for (uint32_t v : verts)
        if (alive[v]) rest.push_back(v);
      zielonka(rest);
      revive(reach);

      bool opponent_empty = true;
      for (uint32_t v : rest) {
        int winner = res.verifier_wins[v] ? 0 : 1;
        if (winner != player) {
          opponent_empty = false;
          break;
        }
      }
      if (opponent_empty) {
        for (uint32_t v : reach) res.verifier_wins[v] = player == 0;
        // The whole subgame is winning, so vertices at the minimum
        // priority may move anywhere inside it.
        for (uint32_t v : base) {
          if (int(g.owner[v]) != player) continue;
          for (uint32_t w : g.edges[v]) {
            if (alive[w]) {
              strat[v] = w;
              break;
            }
          }
        }
        break;
      }

      int opp = 1 - player;
      std::vector<uint32_t>& ostrat =
          opp == 0 ? res.strategy : res.refuter_strategy;
      std::vector<uint32_t> wopp;
      for (uint32_t v : rest) {
        int winner = res.verifier_wins[v] ? 0 : 1;
        if (winner == opp) wopp.push_back(v);
      }
      std::vector<uint32_t> lost = attract(opp, wopp, &ostrat);
      for (uint32_t v : lost) res.verifier_wins[v] = opp == 0;
      kill(lost);
      killed.insert(killed.end(), lost.begin(), lost.end());
      std::vector<uint32_t> next;
      for (uint32_t v : verts)
        if (alive[v]) next.push_back(v);
      verts = std::move(next);
    }
    revive(killed);
  }
};

// Clears the loser's map entries and checks the winner's are present.
void tidy_strategies(const GameGraph& g, SolveResult& res) {
  for (uint32_t v = 0; v < g.num_vertices(); ++v) {
    if (res.verifier_wins[v]) {
      res.refuter_strategy[v] = kNoChoice;
      if (g.owner[v] != 0)
        res.strategy[v] = kNoChoice;
      else
        AHC_CHECK(res.strategy[v] != kNoChoice,
                  "winning verifier vertex has a choice");
    } else {
      res.strategy[v] = kNoChoice;
      if (g.owner[v] != 1)
        res.refuter_strategy[v] = kNoChoice;
      else
        AHC_CHECK(res.refuter_strategy[v] != kNoChoice,
                  "winning refuter vertex has a choice");
    }
  }
}

// Strongly connected components (iterative Tarjan) of the subgraph induced
// by `in`, with per-vertex successor lists provided by next(v).
template <class Next>
std::vector<uint32_t> scc_of(uint32_t n, const std::vector<char>& in,
                             Next next) {
  constexpr uint32_t kUnset = UINT32_MAX;
  std::vector<uint32_t> comp(n, kUnset), low(n), num(n, kUnset);
  std::vector<uint32_t> order, path;
  uint32_t clock = 0, comps = 0;
  struct Frame {
    uint32_t v;
    uint32_t i;
  };
  std::vector<Frame> stack;
  for (uint32_t s = 0; s < n; ++s) {
    if (!in[s] || num[s] != kUnset) continue;
    stack.push_back({s, 0});
    while (!stack.empty()) {
      Frame& f = stack.back();
      uint32_t v = f.v;
      if (f.i == 0) {
        num[v] = low[v] = clock++;
        path.push_back(v);
      }
      const std::vector<uint32_t>& succ = next(v);
      if (f.i < succ.size()) {
        uint32_t w = succ[f.i++];
        if (!in[w]) continue;
        if (num[w] == kUnset) {
          stack.push_back({w, 0});
        } else if (comp[w] == kUnset) {
          low[v] = std::min(low[v], num[w]);
        }
      } else {
        if (low[v] == num[v]) {
          while (true) {
            uint32_t w = path.back();
            path.pop_back();
            comp[w] = comps;
            if (w == v) break;
          }
          ++comps;
        }
        stack.pop_back();
        if (!stack.empty())
          low[stack.back().v] = std::min(low[stack.back().v], low[v]);
      }
    }
  }
  (void)order;
  return comp;
}

}  // namespace

SolveResult solve_parity(const GameGraph& g) {
  SolveResult res;
  uint32_t n = g.num_vertices();
  res.verifier_wins.assign(n, 0);
  res.strategy.assign(n, kNoChoice);
  res.refuter_strategy.assign(n, kNoChoice);
  if (n == 0) return res;
  Arena arena(g, res);
  std::vector<uint32_t> all(n);
  for (uint32_t v = 0; v < n; ++v) all[v] = v;
  arena.zielonka(all);
  tidy_strategies(g, res);
  return res;
}

SolveResult solve_buchi(const GameGraph& g) {
  uint32_t n = g.num_vertices();
  for (uint32_t v = 0; v < n; ++v)
    AHC_CHECK(g.priority[v] <= 1, "recurrence solver needs priorities 0/1");

  SolveResult res;
  res.verifier_wins.assign(n, 0);
  res.strategy.assign(n, kNoChoice);
  res.refuter_strategy.assign(n, kNoChoice);
  if (n == 0) return res;
  Arena arena(g, res);

  std::vector<uint32_t> cur(n);
  for (uint32_t v = 0; v < n; ++v) cur[v] = v;
  while (!cur.empty()) {
    std::vector<uint32_t> goal;
    for (uint32_t v : cur)
      if (g.priority[v] == 0) goal.push_back(v);
    if (goal.empty()) {
      // Nothing left to visit: the refuter wins the rest by any play.
      for (uint32_t v : cur) {
        if (g.owner[v] != 1) continue;
        for (uint32_t w : g.edges[v]) {
          if (arena.alive[w]) {
            res.refuter_strategy[v] = w;
            break;
          }
        }
      }
      break;
    }
    std::vector<uint32_t> reach = arena.attract(0, goal, &res.strategy);
    if (reach.size() == cur.size()) {
      // The verifier can force a visit from everywhere, and the subgame is
      // a refuter trap, so it can do so again and again.
      for (uint32_t v : cur) res.verifier_wins[v] = 1;
      for (uint32_t v : goal) {
        if (g.owner[v] != 0) continue;
        for (uint32_t w : g.edges[v]) {
          if (arena.alive[w]) {
            res.strategy[v] = w;
            break;
          }
        }
      }
      break;
    }
    // Vertices outside the attractor dodge priority 0 forever; the refuter
    // owns them and everything it can pull there.
    std::vector<char> avoid(n, 0);
    for (uint32_t v : cur) avoid[v] = 1;
    for (uint32_t v : reach) avoid[v] = 0;
    std::vector<uint32_t> trapped;
    for (uint32_t v : cur)
      if (avoid[v]) trapped.push_back(v);
    for (uint32_t v : trapped) {
      if (g.owner[v] != 1) continue;
      for (uint32_t w : g.edges[v]) {
        if (arena.alive[w] && avoid[w]) {
          res.refuter_strategy[v] = w;
          break;
        }
      }
    }
    std::vector<uint32_t> lost = arena.attract(1, trapped, &res.refuter_strategy);
    arena.kill(lost);
    std::vector<uint32_t> next;
    for (uint32_t v : cur)
      if (arena.alive[v]) next.push_back(v);
    cur = std::move(next);
  }
  tidy_strategies(g, res);
  return res;
}

bool check_strategy(const GameGraph& g, const SolveResult& r) {
  uint32_t n = g.num_vertices();
  if (r.verifier_wins.size() != n || r.strategy.size() != n) return false;

  // Shape and closure: the strategy stays inside the winning region and
  // refuter moves cannot leave it.
  for (uint32_t v = 0; v < n; ++v) {
    if (!r.verifier_wins[v]) continue;
    if (g.owner[v] == 0) {
      uint32_t s = r.strategy[v];
      if (s == kNoChoice || s >= n || !r.verifier_wins[s]) return false;
      if (std::find(g.edges[v].begin(), g.edges[v].end(), s) ==
          g.edges[v].end())
        return false;
    } else {
      for (uint32_t w : g.edges[v])
        if (!r.verifier_wins[w]) return false;
    }
  }

  // Restricted successor lists inside the region.
  std::vector<std::vector<uint32_t>> adj(n);
  for (uint32_t v = 0; v < n; ++v) {
    if (!r.verifier_wins[v]) continue;
    if (g.owner[v] == 0)
      adj[v].push_back(r.strategy[v]);
    else
      adj[v] = g.edges[v];
  }

  // A play is lost iff some cycle has odd minimal priority; such a cycle
  // lives inside one strongly connected component of the subgraph whose
  // priorities all stay at or above that odd value.
  std::vector<uint32_t> odds;
  for (uint32_t v = 0; v < n; ++v)
    if (r.verifier_wins[v] && g.priority[v] % 2 == 1)
      odds.push_back(g.priority[v]);
  std::sort(odds.begin(), odds.end());
  odds.erase(std::unique(odds.begin(), odds.end()), odds.end());

  for (uint32_t p : odds) {
    std::vector<char> in(n, 0);
    for (uint32_t v = 0; v < n; ++v)
      in[v] = r.verifier_wins[v] && g.priority[v] >= p;
    std::vector<uint32_t> comp =
        scc_of(n, in, [&](uint32_t v) -> const std::vector<uint32_t>& {
          return adj[v];
        });
    std::vector<uint32_t> size(n, 0);
    for (uint32_t v = 0; v < n; ++v)
      if (in[v]) ++size[comp[v]];
    for (uint32_t v = 0; v < n; ++v) {
      if (!in[v] || g.priority[v] != p) continue;
      if (size[comp[v]] > 1) return false;
      for (uint32_t w : adj[v])
        if (w == v) return false;
    }
  }
  return true;
}

}  // namespace ahc
