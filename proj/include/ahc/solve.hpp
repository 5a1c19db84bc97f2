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
#include <vector>

#include "ahc/game.hpp"

namespace ahc {

inline constexpr uint32_t kNoChoice = UINT32_MAX;

// Winner partition and positional strategies of a solved game. The winner
// flags cover every vertex (parity games are determined); each strategy
// array is meaningful exactly on the vertices its player owns and wins,
// kNoChoice elsewhere.
struct SolveResult {
  std::vector<uint8_t> verifier_wins;
  std::vector<uint32_t> strategy;
  std::vector<uint32_t> refuter_strategy;
};

// Recurrence computation for games whose priorities all lie in {0, 1}:
// the verifier wins iff it can force priority 0 infinitely often.
SolveResult solve_buchi(const GameGraph& g);

// Zielonka's algorithm under the min-even parity condition. Among equally
// sound successors strategies pick the lowest vertex id.
SolveResult solve_parity(const GameGraph& g);

// Independent certificate check: verifier-owned winning vertices follow
// the strategy, the winning region is closed under the remaining edges,
// and every cycle inside it has even minimal priority.
bool check_strategy(const GameGraph& g, const SolveResult& r);

}  // namespace ahc
