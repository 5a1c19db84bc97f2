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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ahc/ts.hpp"

namespace ahc {

// ---------------------------------------------------------------------------
// Theory atoms. An atom is a boolean-sorted expression over literals and
// indexed variables x@b, where b names a stuttering variable.

enum class ExOp : uint8_t {
  lit_int,
  lit_bool,
  var,    // x@b, stutter holds the stuttering index
  add,
  sub,
  neg,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  b_and,
  b_or,
  b_not,
  b_imp,
  b_iff,
};

struct Expr {
  ExOp op = ExOp::lit_bool;
  int64_t lit = 0;
  std::string var;       // op == var
  uint32_t stutter = 0;  // op == var
  std::vector<Expr> kids;

  bool operator==(const Expr& o) const;
};

// ---------------------------------------------------------------------------
// Temporal body. Leaves reference the formula's atom table or a stuttering's
// progress flag (the flags only appear in derived bodies, never in input).

struct Ltl {
  enum Op : uint8_t {
    tt,
    ff,
    atom,   // ref indexes AhltlFormula::atoms
    moved,  // ref indexes AhltlFormula::stutters
    lnot,
    land,  // n-ary
    lor,   // n-ary
    limp,
    liff,
    x,
    u,
    r,  // internal only, produced by negation normalization
    f,
    g,
  } op = tt;
  uint32_t ref = 0;
  std::vector<Ltl> kids;

  bool operator==(const Ltl& o) const;
};

Ltl ltl_atom(uint32_t idx);
Ltl ltl_moved(uint32_t idx);
Ltl ltl_and(std::vector<Ltl> ks);
Ltl ltl_or(std::vector<Ltl> ks);
Ltl ltl_un(Ltl::Op op, Ltl k);
Ltl ltl_bin(Ltl::Op op, Ltl a, Ltl b);

// ---------------------------------------------------------------------------

struct TraceQuantifier {
  std::string name;
  bool universal = true;
};

struct StutterQuantifier {
  std::string name;
  bool universal = false;
  uint32_t trace = 0;  // base trace index
};

struct AhltlFormula {
  std::vector<TraceQuantifier> traces;
  std::vector<StutterQuantifier> stutters;
  std::vector<Expr> atoms;  // deduplicated after constant folding
  Ltl body;

  int trace_index(std::string_view n) const;
  int stutter_index(std::string_view n) const;
};

// Trace variable to system binding used by evaluation and verification.
struct Binding {
  std::vector<const TransitionSystem*> systems;  // one per trace quantifier

  const TransitionSystem& sys_of_stutter(const AhltlFormula& f,
                                         uint32_t b) const {
    return *systems[f.stutters[b].trace];
  }
};

// ---------------------------------------------------------------------------
// Parsing and printing.

// Parses the stuttering dialect; inputs using trajectory quantifiers are
// detected and routed through from_trajectory_form.
AhltlFormula parse_formula(std::string_view text);

// Parses the trajectory dialect (Etau/Atau quantifiers, x@trace:traj atoms)
// and translates it: each trace-trajectory pair that occurs in the body gets
// a fresh stuttering variable over that trace with the trajectory's polarity,
// grouped per trajectory in prefix order.
AhltlFormula from_trajectory_form(std::string_view text);

std::string print_formula(const AhltlFormula& f);
std::string print_expr(const Expr& e, const AhltlFormula& f);
std::string print_ltl(const Ltl& b, const AhltlFormula& f);

// ---------------------------------------------------------------------------
// Fairness-adjusted body: universal progress flags as premise, existential
// ones as extra conjuncts. With no stutterings of a polarity the respective
// part degenerates away.
Ltl build_psi_mod(const AhltlFormula& f);

// ---------------------------------------------------------------------------
// Atom evaluation. states[b] is the state of base(b)'s system currently
// shown to stuttering b. Sort problems surface here or in sort_check.

bool eval_atom(const AhltlFormula& f, const Binding& bi, uint32_t atom,
               std::span<const uint32_t> states);

// Validates every atom against the bound systems: declared variables,
// operator sorts, cross-system sort compatibility. Throws on failure.
void sort_check(const AhltlFormula& f, const Binding& bi);

// ---------------------------------------------------------------------------
// Fragment classification.

struct AdmissibleInfo {
  std::vector<uint32_t> stutter_of_trace;
  // unordered trace pair (i, j), i < j, to shared variable names
  std::map<std::pair<uint32_t, uint32_t>, std::vector<std::string>> pairs;
};

struct FragmentReport {
  bool forall_exists = false;
  bool alternation_free = false;
  bool admissible = false;
  bool rectangle_closed = false;
  std::optional<uint32_t> terminating_depth;  // needs a binding
  std::optional<AdmissibleInfo> adm;
  std::optional<uint32_t> complete_at_z;
  std::vector<std::string> warnings;
};

FragmentReport classify_fragment(const AhltlFormula& f,
                                 const Binding* bi = nullptr);

}  // namespace ahc
