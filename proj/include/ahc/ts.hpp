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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ahc/diag.hpp"

namespace ahc {

enum class Sort : uint8_t { boolean, integer };

// Values are stored uniformly as signed integers; booleans are 0/1.
using Value = int64_t;

struct VarDecl {
  std::string name;
  Sort sort = Sort::boolean;
  int64_t lo = 0;  // integer bounds, inclusive; unused for booleans
  int64_t hi = 1;
};

// Finite-state labeled transition system with a total successor relation
// and exactly one initial state. Immutable once built.
struct TransitionSystem {
  std::string name;
  std::vector<VarDecl> vars;
  std::vector<std::string> state_names;
  std::vector<std::vector<Value>> labels;    // labels[s][v], totally defined
  std::vector<std::vector<uint32_t>> succ;   // sorted, deduped, nonempty
  uint32_t init = 0;

  uint32_t num_states() const { return (uint32_t)state_names.size(); }

  int var_index(std::string_view n) const {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name == n) return (int)i;
    return -1;
  }

  int state_index(std::string_view n) const {
    for (size_t i = 0; i < state_names.size(); ++i)
      if (state_names[i] == n) return (int)i;
    return -1;
  }

  Value label(uint32_t s, uint32_t v) const { return labels[s][v]; }

  // A sink loops on itself and goes nowhere else.
  bool is_sink(uint32_t s) const {
    return succ[s].size() == 1 && succ[s][0] == s;
  }
};

struct TerminationInfo {
  bool terminating = false;
  std::optional<uint32_t> depth;  // set iff terminating
};

TransitionSystem parse_system(std::string_view text);
std::string print_system(const TransitionSystem& ts);

// depth = number of steps on the longest path from init until a sink is
// entered; terminating iff every path eventually stays in a sink.
TerminationInfo termination_info(const TransitionSystem& ts);

// Drops states unreachable from init; keeps relative state order.
TransitionSystem restrict_reachable(const TransitionSystem& ts);

}  // namespace ahc
