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
#include <string>
#include <vector>

#include "ahc/formula.hpp"

namespace ahc {

// A letter packs one truth assignment: bit i is atom i of the formula and
// bit num_atoms + j is the progress flag of stuttering j.
using Letter = uint16_t;
constexpr uint32_t kMaxLetterBits = 16;

// Ultimately periodic word prefix loop^omega; loop must be nonempty.
struct LassoWord {
  std::vector<Letter> prefix;
  std::vector<Letter> loop;
};

// Truth of a temporal body on a lasso, by least/greatest fixpoints over the
// loop followed by a backward sweep over the prefix.
bool ltl_lasso_eval(const Ltl& body, uint32_t num_atoms, const LassoWord& w);

// Nondeterministic Buechi automaton over 2^bits letters. Edges fire when
// (letter & mask) == bits_value. Acceptance is on states.
struct NbaEdge {
  Letter mask = 0;
  Letter bits = 0;
  uint32_t dst = 0;

  bool fires(Letter a) const { return (a & mask) == bits; }
};

struct Nba {
  uint32_t bits = 0;
  uint32_t init = 0;
  std::vector<std::vector<NbaEdge>> edges;
  std::vector<bool> accepting;

  uint32_t num_states() const { return (uint32_t)edges.size(); }
};

// Tableau construction; num_atoms + num_moved must fit kMaxLetterBits.
Nba ltl_to_nba(const Ltl& body, uint32_t num_atoms, uint32_t num_moved);

// Keeps only states that can still reach an accepting cycle. The initial
// state is always kept, possibly with no outgoing edges.
Nba prune_dead(const Nba& a);

// Product of the automaton with the lasso's position graph; accepting iff
// an accepting state lies on a reachable cycle in the loop region.
bool nba_accepts(const Nba& a, const LassoWord& w);

// Deterministic parity automaton, complete transition table, min-even
// priorities on states.
struct Dpa {
  uint32_t bits = 0;
  uint32_t init = 0;
  std::vector<std::vector<uint32_t>> delta;  // delta[state][letter]
  std::vector<uint32_t> priority;

  uint32_t num_states() const { return (uint32_t)delta.size(); }
};

// Determinization. Deterministic input is completed and kept as is with
// Buechi priorities; otherwise Safra trees with an index appearance record
// turn the Rabin events into parity. Throws CapacityExceeded when more
// than max_states states would be built.
Dpa determinize(const Nba& a, uint64_t max_states);

bool dpa_accepts(const Dpa& d, const LassoWord& w);

// Export-only textual dumps in an HOA-like shape; ap names label the
// letter bits.
std::string dump_nba(const Nba& a, const std::vector<std::string>& ap);
std::string dump_dpa(const Dpa& d, const std::vector<std::string>& ap);

}  // namespace ahc
