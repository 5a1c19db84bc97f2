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
#include "ahc/game.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ahc/diag.hpp"

namespace ahc {

namespace {

// All length-z runs of ts starting at the initial state, in lexicographic
// successor order.  Every transition relation is total, so for z >= 1 this
// is never empty.
std::vector<std::vector<uint32_t>> z_runs(const TransitionSystem& ts,
                                          uint32_t z) {
  std::vector<std::vector<uint32_t>> out;
  std::vector<uint32_t> cur{ts.init};
  auto rec = [&](auto&& self) -> void {
    if (cur.size() == z) {
      out.push_back(cur);
      return;
    }
    for (uint32_t s : ts.succ[cur.back()]) {
      cur.push_back(s);
      self(self);
      cur.pop_back();
    }
  };
  rec(rec);
  return out;
}

// Shared body of the two choice stages.  The mover appends one successor
// state to each of its windows and picks a schedule from its stutterings;
// schedule pointers advance and join the progressed set.  Enumeration order
// is part of the interface: state tuples ascend (first slot outermost),
// schedules descend as bitmasks within each tuple.
std::vector<GameVertex> choice_successors(const GameContext& cx,
                                          const GameVertex& v,
                                          const std::vector<uint32_t>& slots,
                                          uint32_t sched_mask, Stage next,
                                          std::optional<uint32_t> forced) {
  std::vector<const std::vector<uint32_t>*> choice(slots.size());
  for (size_t i = 0; i < slots.size(); ++i) {
    const TransitionSystem& ts = cx.system_of_slot(slots[i]);
    const std::vector<uint32_t>& win = v.windows[slots[i]];
    AHC_CHECK(!win.empty(), "choice stage window nonempty");
    choice[i] = &ts.succ[win.back()];
  }
  if (forced)
    AHC_CHECK((*forced & ~sched_mask) == 0, "forced schedule within mask");

  std::vector<GameVertex> out;
  std::vector<uint32_t> idx(slots.size(), 0);
  while (true) {
    auto emit = [&](uint32_t sched) {
      GameVertex w = v;
      w.stage = next;
      for (size_t i = 0; i < slots.size(); ++i)
        w.windows[slots[i]].push_back((*choice[i])[idx[i]]);
      for (uint32_t b = 0; b < cx.formula->stutters.size(); ++b) {
        if (!(sched >> b & 1u)) continue;
        uint32_t slot = cx.trace_slot[cx.formula->stutters[b].trace];
        w.pointers[b] += 1;
        AHC_CHECK(w.pointers[b] < w.windows[slot].size(),
                  "advanced pointer stays inside its window");
      }
      w.progressed = v.progressed | sched;
      out.push_back(std::move(w));
    };
    if (forced) {
      emit(*forced);
    } else {
      uint32_t s = sched_mask;
      while (true) {
        emit(s);
        if (s == 0) break;
        s = (s - 1) & sched_mask;
      }
    }
    // Odometer over the state tuple, last slot fastest.
    size_t k = slots.size();
    while (k > 0) {
      if (++idx[k - 1] < choice[k - 1]->size()) break;
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

GameVertex make_error_vertex() {
  GameVertex v;
  v.stage = Stage::error;
  return v;
}

// Stable byte encoding of a vertex, used as the interning key.
std::string encode_vertex(const GameVertex& v) {
  std::string s;
  auto put = [&s](uint32_t x) {
    for (int i = 0; i < 4; ++i) s.push_back(char(x >> (8 * i) & 0xff));
  };
  put(uint32_t(v.stage));
  put(v.auto_state);
  put(v.progressed);
  put(uint32_t(v.windows.size()));
  for (const auto& win : v.windows) {
    put(uint32_t(win.size()));
    for (uint32_t st : win) put(st);
  }
  for (uint32_t p : v.pointers) put(p);
  return s;
}

}  // namespace

GameContext make_game_context(const Binding& bi, const AhltlFormula& f,
                              const Dpa& dpa, uint32_t z) {
  AHC_CHECK(bi.systems.size() == f.traces.size(),
            "one bound system per trace variable");
  if (z < 1) fail(ErrKind::semantic, "window bound must be at least 1");

  // The game is defined for prefixes where every universal quantifier,
  // trace or stuttering, precedes every existential one.
  bool seen_exist = false;
  bool shape_ok = true;
  for (const TraceQuantifier& t : f.traces) {
    if (!t.universal)
      seen_exist = true;
    else if (seen_exist)
      shape_ok = false;
  }
  for (const StutterQuantifier& s : f.stutters) {
    if (!s.universal)
      seen_exist = true;
    else if (seen_exist)
      shape_ok = false;
  }
  if (!shape_ok)
    fail(ErrKind::not_forall_exists,
         "quantifier prefix must list all universal quantifiers before the "
         "first existential one");

  sort_check(f, bi);
  AHC_CHECK(dpa.bits == f.atoms.size() + f.stutters.size(),
            "automaton alphabet covers atoms plus progress flags");

  GameContext cx;
  cx.formula = &f;
  cx.binding = &bi;
  cx.dpa = &dpa;
  cx.z = z;

  cx.trace_slot.assign(f.traces.size(), UINT32_MAX);
  for (uint32_t t = 0; t < f.traces.size(); ++t) {
    std::vector<uint32_t> bs;
    for (uint32_t b = 0; b < f.stutters.size(); ++b)
      if (f.stutters[b].trace == t) bs.push_back(b);
    if (bs.empty()) {
      cx.warnings.push_back("trace variable '" + f.traces[t].name +
                            "' has no stutterings and cannot influence the "
                            "property; it is ignored");
      continue;
    }
    uint32_t slot = uint32_t(cx.slot_trace.size());
    cx.slot_trace.push_back(t);
    cx.trace_slot[t] = slot;
    cx.slot_stutters.push_back(std::move(bs));
    if (f.traces[t].universal)
      cx.univ_slots.push_back(slot);
    else
      cx.exist_slots.push_back(slot);
  }
  for (uint32_t b = 0; b < f.stutters.size(); ++b) {
    if (f.stutters[b].universal)
      cx.univ_sched_mask |= 1u << b;
    else
      cx.exist_sched_mask |= 1u << b;
  }
  return cx;
}

Letter update_letter(const GameContext& cx, const GameVertex& v) {
  AHC_CHECK(v.stage == Stage::update, "letters are read at update vertices");
  const AhltlFormula& f = *cx.formula;
  std::vector<uint32_t> states(f.stutters.size(), 0);
  for (uint32_t b = 0; b < f.stutters.size(); ++b) {
    uint32_t slot = cx.trace_slot[f.stutters[b].trace];
    AHC_CHECK(v.pointers[b] < v.windows[slot].size(),
              "pointer inside its window");
    states[b] = v.windows[slot][v.pointers[b]];
  }
  Letter a = 0;
  for (uint32_t i = 0; i < f.atoms.size(); ++i)
    if (eval_atom(f, *cx.binding, i, states)) a |= Letter(1u << i);
  a |= Letter(v.progressed << f.atoms.size());
  return a;
}

std::vector<GameVertex> initial_vertices(const GameContext& cx) {
  const uint32_t n = uint32_t(cx.slot_trace.size());
  // Universal slots start with every length-z run; existential slots start
  // with just the initial state and extend within the game.
  std::vector<std::vector<std::vector<uint32_t>>> cand(n);
  for (uint32_t slot = 0; slot < n; ++slot) {
    const TransitionSystem& ts = cx.system_of_slot(slot);
    if (cx.formula->traces[cx.slot_trace[slot]].universal)
      cand[slot] = z_runs(ts, cx.z);
    else
      cand[slot] = {{ts.init}};
  }
  std::vector<GameVertex> out;
  std::vector<uint32_t> idx(n, 0);
  while (true) {
    GameVertex v;
    v.stage = Stage::update;
    v.windows.resize(n);
    for (uint32_t slot = 0; slot < n; ++slot)
      v.windows[slot] = cand[slot][idx[slot]];
    v.pointers.assign(cx.formula->stutters.size(), 0);
    v.progressed = 0;
    v.auto_state = cx.dpa->init;
    out.push_back(std::move(v));
    size_t k = n;
    while (k > 0) {
      if (++idx[k - 1] < cand[k - 1].size()) break;
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

std::vector<GameVertex> forall_successors(const GameContext& cx,
                                          const GameVertex& v) {
  AHC_CHECK(v.stage == Stage::forall_stage, "refuter choice stage expected");
  return choice_successors(cx, v, cx.univ_slots, cx.univ_sched_mask,
                           Stage::exists_stage, std::nullopt);
}

std::vector<GameVertex> exists_successors(const GameContext& cx,
                                          const GameVertex& v) {
  AHC_CHECK(v.stage == Stage::exists_stage, "verifier choice stage expected");
  return choice_successors(cx, v, cx.exist_slots, cx.exist_sched_mask,
                           Stage::update, std::nullopt);
}

GameVertex update_successor(const GameContext& cx, const GameVertex& v) {
  AHC_CHECK(v.stage == Stage::update, "update stage expected");
  const AhltlFormula& f = *cx.formula;
  const uint32_t n = uint32_t(cx.slot_trace.size());

  // Two stutterings of the same trace may never drift a full window apart.
  for (uint32_t slot = 0; slot < n; ++slot) {
    const std::vector<uint32_t>& bs = cx.slot_stutters[slot];
    for (size_t i = 0; i < bs.size(); ++i)
      for (size_t j = i + 1; j < bs.size(); ++j) {
        uint32_t a = v.pointers[bs[i]];
        uint32_t b = v.pointers[bs[j]];
        if ((a > b ? a - b : b - a) >= cx.z) return make_error_vertex();
      }
  }

  // A trace moves on iff none of its stutterings still points at offset 0.
  std::vector<char> mo(n, 0);
  for (uint32_t slot = 0; slot < n; ++slot) {
    bool all_moved = true;
    for (uint32_t b : cx.slot_stutters[slot])
      if (v.pointers[b] == 0) all_moved = false;
    mo[slot] = all_moved;
  }

  // The letter reads the pre-trim windows; trimming below only discards
  // states no pointer can reference any more.
  Letter a = update_letter(cx, v);

  GameVertex w;
  w.stage = Stage::forall_stage;
  w.windows.resize(n);
  for (uint32_t slot = 0; slot < n; ++slot) {
    const std::vector<uint32_t>& win = v.windows[slot];
    if (mo[slot]) {
      size_t hi = std::min<size_t>(win.size(), size_t(cx.z) + 1);
      w.windows[slot].assign(win.begin() + 1, win.begin() + hi);
    } else {
      size_t hi = std::min<size_t>(win.size(), size_t(cx.z));
      w.windows[slot].assign(win.begin(), win.begin() + hi);
    }
    AHC_CHECK(!w.windows[slot].empty(), "trimmed window stays nonempty");
  }
  w.pointers = v.pointers;
  for (uint32_t b = 0; b < f.stutters.size(); ++b) {
    uint32_t slot = cx.trace_slot[f.stutters[b].trace];
    if (mo[slot]) {
      AHC_CHECK(w.pointers[b] > 0, "moved-on trace has nonzero pointers");
      w.pointers[b] -= 1;
    }
    AHC_CHECK(w.pointers[b] < w.windows[slot].size(),
              "pointer survives the trim");
  }
  w.progressed = 0;
  w.auto_state = cx.dpa->delta[v.auto_state][a];
  return w;
}

GameGraph build_game(const GameContext& cx, const BuildOptions& opt) {
  GameGraph g;
  g.warnings = cx.warnings;

  std::unordered_map<std::string, uint32_t> ids;
  // Interns a vertex, assigning ids in first-seen order.  Returns the id and
  // whether the vertex is new.
  auto intern = [&](GameVertex&& v) -> std::pair<uint32_t, bool> {
    std::string key = encode_vertex(v);
    auto it = ids.find(key);
    if (it != ids.end()) return {it->second, false};
    if (g.vertex.size() >= opt.max_vertices)
      fail(ErrKind::capacity,
           "game arena exceeds the vertex budget of " +
               std::to_string(opt.max_vertices) +
               "; raise it or lower the window bound");
    uint32_t id = uint32_t(g.vertex.size());
    ids.emplace(std::move(key), id);
    bool err = v.stage == Stage::error;
    uint32_t q = v.auto_state;
    g.vertex.push_back(std::move(v));
    g.owner.push_back(g.vertex.back().stage == Stage::exists_stage ? 0 : 1);
    g.priority.push_back(err ? 1 : cx.dpa->priority[q]);
    g.edges.emplace_back();
    if (err) g.error_vertex = id;
    return {id, true};
  };

  auto successors = [&](const GameVertex& v) -> std::vector<GameVertex> {
    switch (v.stage) {
      case Stage::update:
        return {update_successor(cx, v)};
      case Stage::forall_stage:
        return forall_successors(cx, v);
      case Stage::exists_stage:
        if (opt.exists_sched_policy)
          return choice_successors(cx, v, cx.exist_slots, cx.exist_sched_mask,
                                   Stage::update, opt.exists_sched_policy(v));
        return exists_successors(cx, v);
      case Stage::error:
        return {v};
    }
    AHC_CHECK(false, "unreachable stage");
    return {};
  };

  std::vector<uint32_t> frontier;
  for (GameVertex& v : initial_vertices(cx)) {
    auto [id, fresh] = intern(std::move(v));
    g.initials.push_back(id);
    if (fresh) frontier.push_back(id);
  }

  const uint32_t threads = std::max(1u, opt.threads);
  while (!frontier.empty()) {
    // Successor values are computed per frontier vertex (optionally in
    // parallel), then interned sequentially in frontier order so vertex ids
    // do not depend on the thread count.
    std::vector<std::vector<GameVertex>> outs(frontier.size());
    if (threads == 1 || frontier.size() < 2 * threads) {
      for (size_t i = 0; i < frontier.size(); ++i)
        outs[i] = successors(g.vertex[frontier[i]]);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errs(threads);
      for (uint32_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (size_t i = t; i < frontier.size(); i += threads)
              outs[i] = successors(g.vertex[frontier[i]]);
          } catch (...) {
            errs[t] = std::current_exception();
          }
        });
      }
      for (std::thread& th : pool) th.join();
      for (const std::exception_ptr& e : errs)
        if (e) std::rethrow_exception(e);
    }
    std::vector<uint32_t> next;
    for (size_t i = 0; i < frontier.size(); ++i) {
      uint32_t src = frontier[i];
      for (GameVertex& w : outs[i]) {
        auto [dst, fresh] = intern(std::move(w));
        g.edges[src].push_back(dst);
        g.num_edges += 1;
        if (fresh) next.push_back(dst);
      }
    }
    frontier = std::move(next);
  }
  return g;
}

}  // namespace ahc
