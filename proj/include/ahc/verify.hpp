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
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ahc/game.hpp"
#include "ahc/solve.hpp"

namespace ahc {

// ---------------------------------------------------------------------------
// End-to-end verification. The game under-approximates satisfaction, so a
// win proves the property and a loss proves its violation only inside a
// fragment whose completeness bound is covered by the window size in use.

enum class Outcome : uint8_t { verified, violated, unknown };

enum class VerdictReason : uint8_t {
  win_from_all_initials,
  loss_in_complete_fragment,
  loss_incomplete,
};

const char* outcome_name(Outcome o);
const char* reason_name(VerdictReason r);

struct VerifyStats {
  uint32_t nba_states = 0;
  uint32_t dpa_states = 0;
  uint32_t max_priority = 0;
  uint64_t vertices = 0;
  uint64_t edges = 0;
  // wall-clock seconds per phase
  double t_automaton = 0;
  double t_build = 0;
  double t_solve = 0;
  double t_total = 0;
};

struct Verdict {
  Outcome outcome = Outcome::unknown;
  VerdictReason reason = VerdictReason::loss_incomplete;
  // completeness fragment justifying a Violated outcome, empty otherwise
  std::string fragment_tag;
  uint32_t z = 1;
  FragmentReport fragment;
  VerifyStats stats;
  std::vector<std::string> warnings;
};

struct VerifyOptions {
  uint64_t max_vertices = uint64_t(4) << 20;
  uint64_t max_dpa_states = uint64_t(1) << 20;
  uint32_t threads = 1;
};

// Every pipeline stage of one verification, kept alive for witness
// extraction and export. `cx` borrows the binding and formula passed in;
// the caller keeps both alive for as long as the run is used.
struct VerifyRun {
  Dpa dpa;
  GameContext cx;
  GameGraph game;
  SolveResult solve;
  Verdict verdict;
};

// Builds the fairness-adjusted body, the parity monitor, and the game at
// window bound z, solves it, and interprets the result. Verified iff the
// verifier wins from every initial vertex; a loss becomes Violated exactly
// when the formula sits in a fragment complete at the used bound, and
// Unknown otherwise. Capacity errors carry the failing phase.
std::unique_ptr<VerifyRun> verify_run(const Binding& bi, const AhltlFormula& f,
                                      uint32_t z,
                                      const VerifyOptions& opt = {});

Verdict verify(const Binding& bi, const AhltlFormula& f, uint32_t z,
               const VerifyOptions& opt = {});

// ---------------------------------------------------------------------------
// Fast path for admissible formulas, complete already at z = 1.

// The unique maximal safe progress set at a verifier vertex, as a bitmask
// over trace indices: the union of all progress sets that keep every
// pairwise color constraint satisfied after the step (safe sets are closed
// under union, so the union itself is safe). Throws AssumptionViolated when
// the colors already differ at the current pointers; callers treat that as
// the phase obligation being lost and progress everything.
uint32_t sigma_max_step(const GameContext& cx, const AdmissibleInfo& info,
                        const GameVertex& v);

// Decides satisfaction by building only the restricted game in which the
// verifier's scheduling is fixed: the maximal safe progress set while the
// phase obligation is live, and full progress when the state formulas alone
// already decide the body at the initial states. Agrees with verify at
// z = 1 on admissible input; throws NotAdmissible otherwise.
Verdict verify_admissible_fast(const Binding& bi, const AhltlFormula& f,
                               const VerifyOptions& opt = {});

// ---------------------------------------------------------------------------
// Desk-scale semantic oracle for admissible formulas, independent of the
// game pipeline. Enumerates lasso-shaped trace tuples (prefix plus loop
// bounded by the product-state count plus one, the pumping bound at which
// every destuttered color behavior repeats) and accepts iff every tuple
// either discharges the body through its position-0 state formulas or has
// pairwise equal destuttered color sequences. Pairwise comparison is exact
// for two traces; with three or more it is a sound approximation of the
// shared-stuttering semantics.

struct OracleOptions {
  uint64_t max_lassos = 2000000;  // enumeration budget before CapacityExceeded
};

bool oracle_check_admissible(const Binding& bi, const AhltlFormula& f,
                             const OracleOptions& opt = {});

// ---------------------------------------------------------------------------
// Witness extraction. Simulating the solved game against a script of refuter
// choices reads existential trace paths and all stutter schedules off the
// strategy's responses.

// Progress flags per round; true entries advance the stuttering. The loop
// part is empty when the play never closed.
struct StutterSchedule {
  std::vector<uint8_t> prefix;
  std::vector<uint8_t> loop;
};

// Assignment read off a sigma-play, per game slot (traces without
// stutterings take no part in the game and get no entry). The letter
// sequence is the aligned update-letter trace of the same play, one letter
// per round, convenient for replaying the body.
struct TraceAssignmentLasso {
  std::vector<std::vector<uint32_t>> trace_prefix;  // per slot, state ids
  std::vector<std::vector<uint32_t>> trace_loop;
  std::vector<StutterSchedule> schedules;  // per stuttering variable
  std::vector<Letter> letter_prefix;
  std::vector<Letter> letter_loop;
  bool complete = false;  // loop closed on a vertex revisit
};

// One refuter round: a successor state per universal trace variable and the
// set of universal stutterings to progress.
struct ScriptRound {
  std::map<std::string, std::string> states;
  std::vector<std::string> sched;
};

// JSON array of rounds: [{"states": {"p1": "s3"}, "sched": ["b1"]}, ...].
std::vector<ScriptRound> parse_refuter_script(const std::string& text);

// Plays the solved game from g.initials[initial]: refuter stages follow the
// script (stages without a real choice advance on their own, so the script
// may be empty when the refuter has none), verifier stages follow the
// strategy, update stages are deterministic. Once the script is exhausted
// and the play revisits an update vertex, the lasso closes and the result
// is complete. Throws NotWinning when the chosen initial vertex is lost and
// ScriptInvalid when a scripted choice does not exist.
TraceAssignmentLasso extract_witness(const GameContext& cx,
                                     const GameGraph& g, const SolveResult& r,
                                     const std::vector<ScriptRound>& script,
                                     uint32_t initial = 0,
                                     uint32_t max_rounds = 4096);

}  // namespace ahc
