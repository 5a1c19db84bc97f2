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
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ahc/automata.hpp"
#include "ahc/formula.hpp"

namespace ahc {

// The verification game. Regular vertices track, per round, the stage of
// the rotation update -> forall -> exists -> update, a window of upcoming
// states per trace, a relative pointer per stuttering, the set of
// stutterings that progressed this round, and the monitor automaton state.

enum class Stage : uint8_t { update, forall_stage, exists_stage, error };

struct GameVertex {
  Stage stage = Stage::update;
  // one window per kept trace slot; states are ids of the slot's system
  std::vector<std::vector<uint32_t>> windows;
  // one relative window position per stuttering variable
  std::vector<uint32_t> pointers;
  uint32_t progressed = 0;  // bitset over stuttering indices
  uint32_t auto_state = 0;
  bool operator==(const GameVertex&) const = default;
};

// Static shape shared by all vertices of one game: which traces take part
// (traces without stutterings are dropped as unobservable), who appends to
// which window, and the scheduling alphabets of both players.
struct GameContext {
  const AhltlFormula* formula = nullptr;
  const Binding* binding = nullptr;
  const Dpa* dpa = nullptr;
  uint32_t z = 1;
  std::vector<uint32_t> slot_trace;  // slot -> trace index in the formula
  std::vector<uint32_t> trace_slot;  // trace index -> slot or UINT32_MAX
  std::vector<std::vector<uint32_t>> slot_stutters;
  std::vector<uint32_t> univ_slots, exist_slots;
  uint32_t univ_sched_mask = 0, exist_sched_mask = 0;
  std::vector<std::string> warnings;

  const TransitionSystem& system_of_slot(uint32_t slot) const {
    return *binding->systems[slot_trace[slot]];
  }
};

GameContext make_game_context(const Binding& bi, const AhltlFormula& f,
                              const Dpa& dpa, uint32_t z);

// The update letter a U-stage vertex feeds to the automaton: theory atoms
// evaluated at the pointed-to window states, plus the progress flags.
Letter update_letter(const GameContext& cx, const GameVertex& v);

std::vector<GameVertex> initial_vertices(const GameContext& cx);
std::vector<GameVertex> forall_successors(const GameContext& cx,
                                          const GameVertex& v);
std::vector<GameVertex> exists_successors(const GameContext& cx,
                                          const GameVertex& v);
GameVertex update_successor(const GameContext& cx, const GameVertex& v);

struct BuildOptions {
  uint64_t max_vertices = 4u << 20;
  uint32_t threads = 1;
  // When set, fixes the verifier's scheduling to one choice per
  // exists-stage vertex (state choices stay free). Used by the restricted
  // fast-path game; must return a subset of the existential sched mask.
  std::function<uint32_t(const GameVertex&)> exists_sched_policy;
};

struct GameGraph {
  std::vector<GameVertex> vertex;
  std::vector<uint8_t> owner;  // 0 = verifier, 1 = refuter
  std::vector<std::vector<uint32_t>> edges;
  std::vector<uint32_t> priority;
  std::vector<uint32_t> initials;
  std::optional<uint32_t> error_vertex;  // present iff reachable
  uint64_t num_edges = 0;
  std::vector<std::string> warnings;

  uint32_t num_vertices() const { return (uint32_t)vertex.size(); }
};

// Explicit reachable game graph, breadth-first from the initial vertices.
// Vertex ids are deterministic and independent of the worker count.
GameGraph build_game(const GameContext& cx, const BuildOptions& opt = {});

}  // namespace ahc
