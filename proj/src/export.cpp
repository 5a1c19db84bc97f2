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
#include "ahc/export.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <string>
#include <vector>

#include "ahc/diag.hpp"

namespace ahc {
namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

const char* stage_mark(Stage st) {
  switch (st) {
    case Stage::update: return "U";
    case Stage::forall_stage: return "\xe2\x88\x80";  // ∀
    case Stage::exists_stage: return "\xe2\x88\x83";  // ∃
    case Stage::error: return "error";
  }
  return "?";
}

std::string vertex_label(const GameContext& cx, const GameVertex& v) {
  if (v.stage == Stage::error) return "error";
  const AhltlFormula& f = *cx.formula;
  std::string out = stage_mark(v.stage);
  out += "  q" + std::to_string(v.auto_state);
  for (uint32_t s = 0; s < v.windows.size(); ++s) {
    const TransitionSystem& ts = cx.system_of_slot(s);
    out += "\\n" + f.traces[cx.slot_trace[s]].name + " [";
    for (uint32_t i = 0; i < v.windows[s].size(); ++i) {
      if (i) out += ' ';
      out += ts.state_names[v.windows[s][i]];
    }
    out += ']';
  }
  out += "\\n";
  for (uint32_t b = 0; b < v.pointers.size(); ++b) {
    if (b) out += ' ';
    if (v.progressed >> b & 1) out += '*';
    out += f.stutters[b].name + "@" + std::to_string(v.pointers[b]);
  }
  return out;
}

bool is_initial(const GameGraph& g, uint32_t v) {
  return std::find(g.initials.begin(), g.initials.end(), v) !=
         g.initials.end();
}

// Vertices kept by the strategy restriction: everything reachable from the
// winning initials when verifier vertices follow only their strategy edge
// and refuter vertices keep all successors.
std::vector<uint32_t> restricted_set(const GameGraph& g,
                                     const SolveResult& r) {
  std::vector<char> seen(g.num_vertices(), 0);
  std::deque<uint32_t> queue;
  for (uint32_t v : g.initials)
    if (r.verifier_wins[v]) {
      seen[v] = 1;
      queue.push_back(v);
    }
  if (queue.empty())
    fail(ErrKind::not_winning,
         "strategy export needs a game the verifier wins from an initial "
         "vertex");
  while (!queue.empty()) {
    uint32_t v = queue.front();
    queue.pop_front();
    auto push = [&](uint32_t w) {
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
    };
    if (g.owner[v] == 0) {
      if (r.strategy[v] != kNoChoice) push(r.strategy[v]);
    } else {
      for (uint32_t w : g.edges[v]) push(w);
    }
  }
  std::vector<uint32_t> keep;
  for (uint32_t v = 0; v < g.num_vertices(); ++v)
    if (seen[v]) keep.push_back(v);
  return keep;
}

}  // namespace

std::string dot_game(const GameContext& cx, const GameGraph& g,
                     const SolveResult* r, const DotOptions& opt) {
  if (opt.strategy_only)
    AHC_CHECK(r != nullptr, "strategy restriction needs a solve result");

  std::vector<uint32_t> keep;
  if (opt.strategy_only) {
    keep = restricted_set(g, *r);
  } else {
    keep.resize(g.num_vertices());
    for (uint32_t v = 0; v < g.num_vertices(); ++v) keep[v] = v;
  }
  std::vector<char> kept(g.num_vertices(), 0);
  for (uint32_t v : keep) kept[v] = 1;

  std::string out = "digraph game {\n  rankdir=TB;\n  node [shape=ellipse];\n";
  for (uint32_t v : keep) {
    const GameVertex& gv = g.vertex[v];
    out += "  v" + std::to_string(v) + " [label=\"" +
           dot_escape(vertex_label(cx, gv)) + "\"";
    if (gv.stage == Stage::error) {
      out += ", shape=octagon";
    } else if (gv.stage == Stage::forall_stage) {
      out += ", shape=box";
    }
    if (g.owner[v] == 0) out += ", penwidth=2";
    if (is_initial(g, v)) out += ", peripheries=2";
    if (!opt.strategy_only && opt.shade_losing && r && !r->verifier_wins[v])
      out += ", style=filled, fillcolor=gray85";
    out += "];\n";
  }
  for (uint32_t v : keep) {
    bool pick = opt.strategy_only && g.owner[v] == 0;
    for (uint32_t w : g.edges[v]) {
      if (pick && w != r->strategy[v]) continue;
      if (!kept[w]) continue;
      out += "  v" + std::to_string(v) + " -> v" + std::to_string(w);
      if (!opt.strategy_only && r && g.owner[v] == 0 && w == r->strategy[v])
        out += " [penwidth=2]";
      out += ";\n";
    }
  }
  out += "}\n";
  return out;
}

std::string verdict_json(const Verdict& vd, bool with_timings) {
  auto opt_u32 = [](const std::optional<uint32_t>& o) {
    return o ? nlohmann::ordered_json(*o) : nlohmann::ordered_json(nullptr);
  };
  const char* reason = nullptr;
  switch (vd.reason) {
    case VerdictReason::win_from_all_initials:
      reason = "win_from_all_initials";
      break;
    case VerdictReason::loss_in_complete_fragment:
      reason = "loss_in_complete_fragment";
      break;
    case VerdictReason::loss_incomplete:
      reason = "loss_incomplete";
      break;
  }
  AHC_CHECK(reason != nullptr, "verdict reason is known");

  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["outcome"] = outcome_name(vd.outcome);
  j["reason"] = reason;
  j["z"] = vd.z;
  j["fragment"] = {
      {"forall_exists", vd.fragment.forall_exists},
      {"alternation_free", vd.fragment.alternation_free},
      {"admissible", vd.fragment.admissible},
      {"rectangle_closed", vd.fragment.rectangle_closed},
      {"terminating_depth", opt_u32(vd.fragment.terminating_depth)},
      {"complete_at_z", opt_u32(vd.fragment.complete_at_z)},
      {"tag", vd.fragment_tag.empty()
                  ? nlohmann::ordered_json(nullptr)
                  : nlohmann::ordered_json(vd.fragment_tag)},
  };
  j["stats"] = {
      {"nba_states", vd.stats.nba_states},
      {"dpa_states", vd.stats.dpa_states},
      {"max_priority", vd.stats.max_priority},
      {"vertices", vd.stats.vertices},
      {"edges", vd.stats.edges},
  };
  j["warnings"] = vd.warnings;
  if (with_timings)
    j["timings"] = {
        {"t_automaton", vd.stats.t_automaton},
        {"t_build", vd.stats.t_build},
        {"t_solve", vd.stats.t_solve},
        {"t_total", vd.stats.t_total},
    };
  return j.dump(2) + "\n";
}

}  // namespace ahc
