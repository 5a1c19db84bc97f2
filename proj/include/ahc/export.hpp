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

#include <string>

#include "ahc/game.hpp"
#include "ahc/solve.hpp"
#include "ahc/verify.hpp"

namespace ahc {

struct DotOptions {
  // Keep only the strategy edge at verifier vertices and restrict to the
  // part reachable from the winning initial vertices. Refuter vertices keep
  // every outgoing edge. Requires a solve result with a winning initial.
  bool strategy_only = false;
  // Full graph with a solve result: fill the refuter-won region gray.
  bool shade_losing = true;
};

// Renders the game graph in DOT. Nodes are named v<id> by arena id and
// labeled with the stage, one state-array line per trace slot, and one
// pointer mark per stuttering ('*' prefix = progressed this round).
// Verifier-owned vertices get a thick border, initials a double one.
std::string dot_game(const GameContext& cx, const GameGraph& g,
                     const SolveResult* r = nullptr,
                     const DotOptions& opt = {});

// Serializes a verdict as stable JSON (leading "schema": 1, fixed key
// order). Timings are included only on request so that the output is
// byte-identical across runs of the same input.
std::string verdict_json(const Verdict& vd, bool with_timings = false);

}  // namespace ahc
