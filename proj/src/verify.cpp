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
#include "ahc/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>

#include "ahc/diag.hpp"

namespace ahc {

namespace {

using Clock = std::chrono::steady_clock;

double secs(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// The game semantics only covers prefixes with every universal quantifier,
// trace or stuttering, ahead of the first existential one. Rejecting here
// keeps ill-shaped input from paying for automaton construction first.
void require_forall_exists(const AhltlFormula& f) {
  bool seen_exist = false;
  bool ok = true;
  for (const TraceQuantifier& t : f.traces) {
    if (!t.universal)
      seen_exist = true;
    else if (seen_exist)
      ok = false;
  }
  for (const StutterQuantifier& s : f.stutters) {
    if (!s.universal)
      seen_exist = true;
    else if (seen_exist)
      ok = false;
  }
  if (!ok)
    fail(ErrKind::not_forall_exists,
         "quantifier prefix must list all universal quantifiers before the "
         "first existential one");
}

// Truth of an admissible body once every invariant subformula is fixed to
// `phase` and the state formulas are fixed to the given atom values.
bool eval_with_phase(const Ltl& b, const std::vector<char>& atom_val,
                     bool phase) {
  switch (b.op) {
    case Ltl::tt:
      return true;
    case Ltl::ff:
      return false;
    case Ltl::atom:
      return atom_val[b.ref] != 0;
    case Ltl::g:
      return phase;
    case Ltl::lnot:
      return !eval_with_phase(b.kids[0], atom_val, phase);
    case Ltl::land:
      for (const Ltl& k : b.kids)
        if (!eval_with_phase(k, atom_val, phase)) return false;
      return true;
    case Ltl::lor:
      for (const Ltl& k : b.kids)
        if (eval_with_phase(k, atom_val, phase)) return true;
      return false;
    case Ltl::limp:
      return !eval_with_phase(b.kids[0], atom_val, phase) ||
             eval_with_phase(b.kids[1], atom_val, phase);
    case Ltl::liff:
      return eval_with_phase(b.kids[0], atom_val, phase) ==
             eval_with_phase(b.kids[1], atom_val, phase);
    default:
      AHC_CHECK(false,
                "admissible bodies mix only state formulas and invariants");
      return false;
  }
}

// Atom values at position zero: every stuttering still shows the initial
// state of its system, so the valuation is shared by all trace tuples.
std::vector<char> init_atom_values(const Binding& bi, const AhltlFormula& f) {
  std::vector<uint32_t> st(f.stutters.size(), 0);
  for (uint32_t b = 0; b < f.stutters.size(); ++b)
    st[b] = bi.sys_of_stutter(f, b).init;
  std::vector<char> vals(f.atoms.size(), 0);
  for (uint32_t i = 0; i < f.atoms.size(); ++i)
    vals[i] = eval_atom(f, bi, i, st) ? 1 : 0;
  return vals;
}

// Whether the invariant part of the body still matters: with the state
// formulas fixed at position zero, the body is monotone in the (positively
// occurring) phase formula, leaving three cases.
enum class PhaseNeed { never_true, already_true, needed };

PhaseNeed phase_need(const Binding& bi, const AhltlFormula& f) {
  std::vector<char> vals = init_atom_values(bi, f);
  if (!eval_with_phase(f.body, vals, true)) return PhaseNeed::never_true;
  if (eval_with_phase(f.body, vals, false)) return PhaseNeed::already_true;
  return PhaseNeed::needed;
}

std::string pick_fragment_tag(const FragmentReport& fr, uint32_t z) {
  if (fr.admissible) return "admissible";
  if (fr.alternation_free) return "alternation-free";
  if (fr.rectangle_closed) return "rectangle-closed";
  if (fr.terminating_depth && std::max<uint32_t>(*fr.terminating_depth, 1) <= z)
    return "terminating";
  return {};
}

void interpret(Verdict& vd, const GameGraph& g, const SolveResult& solve,
               uint32_t z) {
  bool win = true;
  for (uint32_t v : g.initials) win &= solve.verifier_wins[v] != 0;
  if (win) {
    vd.outcome = Outcome::verified;
    vd.reason = VerdictReason::win_from_all_initials;
    return;
  }
  const FragmentReport& fr = vd.fragment;
  if (fr.complete_at_z && *fr.complete_at_z <= z) {
    vd.outcome = Outcome::violated;
    vd.reason = VerdictReason::loss_in_complete_fragment;
    vd.fragment_tag = pick_fragment_tag(fr, z);
    AHC_CHECK(!vd.fragment_tag.empty(), "violation justified by a fragment");
  } else {
    vd.outcome = Outcome::unknown;
    vd.reason = VerdictReason::loss_incomplete;
  }
}

// Lasso-shaped path of one transition system: prefix then repeated loop.
struct StateLasso {
  std::vector<uint32_t> prefix;
  std::vector<uint32_t> loop;

  size_t total() const { return prefix.size() + loop.size(); }
  uint32_t at(size_t c) const {
    return c < prefix.size() ? prefix[c] : loop[c - prefix.size()];
  }
  size_t advance(size_t c) const {
    return c + 1 < total() ? c + 1 : prefix.size();
  }
};

// Equality of the destuttered color sequences of two lassos, where a color
// is the value tuple of the named variables. Both streams are walked change
// by change; revisiting a joint position proves agreement forever.
bool destutter_equal(const TransitionSystem& sa, const StateLasso& a,
                     const TransitionSystem& sb, const StateLasso& b,
                     const std::vector<std::string>& vars) {
  std::vector<uint32_t> ia, ib;
  for (const std::string& v : vars) {
    int xa = sa.var_index(v), xb = sb.var_index(v);
    AHC_CHECK(xa >= 0 && xb >= 0, "color variables exist on both systems");
    ia.push_back(uint32_t(xa));
    ib.push_back(uint32_t(xb));
  }
  auto color = [](const TransitionSystem& ts, const StateLasso& w, size_t c,
                  const std::vector<uint32_t>& idx) {
    std::vector<Value> out;
    out.reserve(idx.size());
    for (uint32_t x : idx) out.push_back(ts.label(w.at(c), x));
    return out;
  };
  // next position with a different color, or nothing when the stream stays
  // constant from here on
  auto next_change = [&](const TransitionSystem& ts, const StateLasso& w,
                         size_t c,
                         const std::vector<uint32_t>& idx)
      -> std::optional<size_t> {
    std::vector<Value> base = color(ts, w, c, idx);
    size_t q = c;
    for (size_t step = 0; step <= w.total() + w.loop.size(); ++step) {
      q = w.advance(q);
      if (color(ts, w, q, idx) != base) return q;
    }
    return std::nullopt;
  };

  size_t pa = 0, pb = 0;
  if (color(sa, a, pa, ia) != color(sb, b, pb, ib)) return false;
  std::set<std::pair<size_t, size_t>> seen;
  while (seen.insert({pa, pb}).second) {
    std::optional<size_t> na = next_change(sa, a, pa, ia);
    std::optional<size_t> nb = next_change(sb, b, pb, ib);
    if (!na && !nb) return true;  // both constant, and currently equal
    if (!na || !nb) return false;
    if (color(sa, a, *na, ia) != color(sb, b, *nb, ib)) return false;
    pa = *na;
    pb = *nb;
  }
  return true;  // the joint walk cycled without divergence
}

// All lassos from the initial state with |prefix| + |loop| at most `bound`,
// by depth-first path extension; every edge back onto the current path
// closes one lasso. The budget counts emitted lassos.
template <class Fn>
void each_lasso(const TransitionSystem& ts, size_t bound, uint64_t& budget,
                Fn fn) {
  std::vector<uint32_t> path{ts.init};
  auto rec = [&](auto&& self) -> void {
    uint32_t last = path.back();
    for (uint32_t nxt : ts.succ[last]) {
      for (size_t k = 0; k < path.size(); ++k) {
        if (path[k] != nxt) continue;
        if (budget == 0)
          fail(ErrKind::capacity,
               "semantic oracle exceeded its lasso enumeration budget");
        --budget;
        fn(StateLasso{{path.begin(), path.begin() + ptrdiff_t(k)},
                      {path.begin() + ptrdiff_t(k), path.end()}});
      }
      if (path.size() < bound) {
        path.push_back(nxt);
        self(self);
        path.pop_back();
      }
    }
  };
  rec(rec);
}

}  // namespace

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::verified:
      return "Verified";
    case Outcome::violated:
      return "Violated";
    case Outcome::unknown:
      return "Unknown";
  }
  return "Unknown";
}

const char* reason_name(VerdictReason r) {
  switch (r) {
    case VerdictReason::win_from_all_initials:
      return "the verifier wins from every initial vertex";
    case VerdictReason::loss_in_complete_fragment:
      return "the verifier loses a game that is complete at this bound";
    case VerdictReason::loss_incomplete:
      return "the verifier loses, and no completeness fragment applies";
  }
  return "";
}

std::unique_ptr<VerifyRun> verify_run(const Binding& bi, const AhltlFormula& f,
                                      uint32_t z, const VerifyOptions& opt) {
  if (z < 1) fail(ErrKind::semantic, "window bound must be at least 1");
  require_forall_exists(f);
  auto run = std::make_unique<VerifyRun>();
  Verdict& vd = run->verdict;
  vd.z = z;
  vd.fragment = classify_fragment(f, &bi);

  Clock::time_point t0 = Clock::now();
  Nba nba = prune_dead(ltl_to_nba(build_psi_mod(f), uint32_t(f.atoms.size()),
                                  uint32_t(f.stutters.size())));
  try {
    run->dpa = determinize(nba, opt.max_dpa_states);
  } catch (const Error& e) {
    if (e.kind != ErrKind::capacity) throw;
    throw Error(ErrKind::capacity,
                std::string(e.what()) + " (during automaton determinization)");
  }
  Clock::time_point t1 = Clock::now();

  run->cx = make_game_context(bi, f, run->dpa, z);
  BuildOptions bo;
  bo.max_vertices = opt.max_vertices;
  bo.threads = opt.threads;
  try {
    run->game = build_game(run->cx, bo);
  } catch (const Error& e) {
    if (e.kind != ErrKind::capacity) throw;
    throw Error(ErrKind::capacity,
                std::string(e.what()) + " (during game construction)");
  }
  Clock::time_point t2 = Clock::now();
  run->solve = solve_parity(run->game);
  Clock::time_point t3 = Clock::now();

  vd.warnings = run->game.warnings;
  vd.stats.nba_states = nba.num_states();
  vd.stats.dpa_states = run->dpa.num_states();
  vd.stats.max_priority = 0;
  for (uint32_t p : run->game.priority)
    vd.stats.max_priority = std::max(vd.stats.max_priority, p);
  vd.stats.vertices = run->game.num_vertices();
  vd.stats.edges = run->game.num_edges;
  vd.stats.t_automaton = secs(t0, t1);
  vd.stats.t_build = secs(t1, t2);
  vd.stats.t_solve = secs(t2, t3);
  vd.stats.t_total = secs(t0, t3);

  interpret(vd, run->game, run->solve, z);
  return run;
}

Verdict verify(const Binding& bi, const AhltlFormula& f, uint32_t z,
               const VerifyOptions& opt) {
  return verify_run(bi, f, z, opt)->verdict;
}

uint32_t sigma_max_step(const GameContext& cx, const AdmissibleInfo& info,
                        const GameVertex& v) {
  AHC_CHECK(v.stage == Stage::exists_stage,
            "progress sets are chosen at verifier vertices");
  const AhltlFormula& f = *cx.formula;
  const uint32_t n = uint32_t(info.stutter_of_trace.size());
  AHC_CHECK(n > 0 && n <= 16, "progress-set search covers 1..16 traces");

  std::vector<uint32_t> cur(n), nxt(n);
  std::vector<const TransitionSystem*> sys(n);
  for (uint32_t t = 0; t < n; ++t) {
    uint32_t b = info.stutter_of_trace[t];
    uint32_t slot = cx.trace_slot[f.stutters[b].trace];
    AHC_CHECK(slot != UINT32_MAX, "admissible traces all take part in the game");
    const std::vector<uint32_t>& win = v.windows[slot];
    uint32_t p = v.pointers[b];
    AHC_CHECK(p + 1 < win.size(),
              "a full window backs every progress decision");
    cur[t] = win[p];
    nxt[t] = win[p + 1];
    sys[t] = &cx.system_of_slot(slot);
  }

  auto safe = [&](uint32_t m) {
    for (const auto& [pr, vars] : info.pairs) {
      uint32_t i = pr.first, j = pr.second;
      uint32_t si = (m >> i & 1u) ? nxt[i] : cur[i];
      uint32_t sj = (m >> j & 1u) ? nxt[j] : cur[j];
      for (const std::string& a : vars) {
        int xi = sys[i]->var_index(a), xj = sys[j]->var_index(a);
        AHC_CHECK(xi >= 0 && xj >= 0, "phase variables exist on both systems");
        if (sys[i]->label(si, uint32_t(xi)) != sys[j]->label(sj, uint32_t(xj)))
          return false;
      }
    }
    return true;
  };

  if (!safe(0))
    fail(ErrKind::assumption_violated,
         "colors differ at the current pointers; the phase obligation is "
         "already lost");
  uint32_t best = 0;
  for (uint32_t m = 1; m < (1u << n); ++m)
    if (safe(m)) best |= m;
  return best;
}

Verdict verify_admissible_fast(const Binding& bi, const AhltlFormula& f,
                               const VerifyOptions& opt) {
  FragmentReport rep = classify_fragment(f, &bi);
  if (!rep.admissible || !rep.adm)
    fail(ErrKind::not_admissible,
         "the fast path covers only admissible formulas");
  const AdmissibleInfo info = *rep.adm;

  Verdict vd;
  vd.z = 1;
  vd.fragment = std::move(rep);

  Clock::time_point t0 = Clock::now();
  Nba nba = prune_dead(ltl_to_nba(build_psi_mod(f), uint32_t(f.atoms.size()),
                                  uint32_t(f.stutters.size())));
  Dpa dpa = determinize(nba, opt.max_dpa_states);
  Clock::time_point t1 = Clock::now();

  GameContext cx = make_game_context(bi, f, dpa, 1);
  const bool needed = phase_need(bi, f) == PhaseNeed::needed;
  BuildOptions bo;
  bo.max_vertices = opt.max_vertices;
  bo.threads = opt.threads;
  bo.exists_sched_policy = [&cx, &info, needed](const GameVertex& v) {
    if (!needed) return cx.exist_sched_mask;
    uint32_t traces;
    try {
      traces = sigma_max_step(cx, info, v);
    } catch (const Error& e) {
      if (e.kind != ErrKind::assumption_violated) throw;
      // The invariant is already lost here; the scheduling no longer
      // matters, so progress everything.
      return cx.exist_sched_mask;
    }
    uint32_t sched = 0;
    for (uint32_t t = 0; t < info.stutter_of_trace.size(); ++t)
      if (traces >> t & 1u) sched |= 1u << info.stutter_of_trace[t];
    return sched;
  };
  GameGraph g = build_game(cx, bo);
  Clock::time_point t2 = Clock::now();
  SolveResult solve = solve_parity(g);
  Clock::time_point t3 = Clock::now();

  vd.warnings = g.warnings;
  vd.stats.nba_states = nba.num_states();
  vd.stats.dpa_states = dpa.num_states();
  for (uint32_t p : g.priority)
    vd.stats.max_priority = std::max(vd.stats.max_priority, p);
  vd.stats.vertices = g.num_vertices();
  vd.stats.edges = g.num_edges;
  vd.stats.t_automaton = secs(t0, t1);
  vd.stats.t_build = secs(t1, t2);
  vd.stats.t_solve = secs(t2, t3);
  vd.stats.t_total = secs(t0, t3);

  bool win = true;
  for (uint32_t v : g.initials) win &= solve.verifier_wins[v] != 0;
  if (win) {
    vd.outcome = Outcome::verified;
    vd.reason = VerdictReason::win_from_all_initials;
  } else {
    vd.outcome = Outcome::violated;
    vd.reason = VerdictReason::loss_in_complete_fragment;
    vd.fragment_tag = "admissible";
  }
  return vd;
}

bool oracle_check_admissible(const Binding& bi, const AhltlFormula& f,
                             const OracleOptions& opt) {
  FragmentReport rep = classify_fragment(f, nullptr);
  if (!rep.admissible || !rep.adm)
    fail(ErrKind::not_admissible,
         "the semantic oracle covers only admissible formulas");
  AHC_CHECK(bi.systems.size() == f.traces.size(),
            "one bound system per trace variable");
  sort_check(f, bi);
  const AdmissibleInfo& info = *rep.adm;
  const uint32_t n = uint32_t(f.traces.size());

  switch (phase_need(bi, f)) {
    case PhaseNeed::never_true:
      return false;  // no stuttering can satisfy the body on any tuple
    case PhaseNeed::already_true:
      return true;  // the state formulas discharge the body everywhere
    case PhaseNeed::needed:
      break;
  }

  // Pair constraints grouped by participating trace, for the signature
  // dedup below.
  using Pair = std::pair<const std::pair<uint32_t, uint32_t>,
                         std::vector<std::string>>;
  std::vector<std::vector<const Pair*>> involving(n);
  for (const Pair& p : info.pairs) {
    involving[p.first.first].push_back(&p);
    involving[p.first.second].push_back(&p);
  }

  size_t bound = 1;
  for (const TransitionSystem* ts : bi.systems) bound *= ts->num_states();
  bound += 1;

  // Every destuttered color behavior a trace can exhibit is realized by
  // some lasso within the product pumping bound; two lassos that agree on
  // all of their pairs' destuttered color sequences are interchangeable,
  // so only representatives are kept.
  uint64_t budget = opt.max_lassos;
  std::vector<std::vector<StateLasso>> reps(n);
  for (uint32_t t = 0; t < n; ++t) {
    const TransitionSystem& ts = *bi.systems[t];
    each_lasso(ts, bound, budget, [&](StateLasso cand) {
      for (const StateLasso& r : reps[t]) {
        bool same = true;
        for (const Pair* p : involving[t])
          same &= destutter_equal(ts, r, ts, cand, p->second);
        if (same) return;
      }
      reps[t].push_back(std::move(cand));
    });
  }

  // All representative tuples; each universal tuple needs every pairwise
  // destuttered color sequence to agree.
  std::vector<size_t> idx(n, 0);
  while (true) {
    if (budget == 0)
      fail(ErrKind::capacity,
           "semantic oracle exceeded its lasso enumeration budget");
    --budget;
    for (const Pair& p : info.pairs) {
      uint32_t i = p.first.first, j = p.first.second;
      if (!destutter_equal(*bi.systems[i], reps[i][idx[i]], *bi.systems[j],
                           reps[j][idx[j]], p.second))
        return false;
    }
    size_t k = n;
    while (k > 0) {
      if (++idx[k - 1] < reps[k - 1].size()) break;
      idx[k - 1] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return true;
}

std::vector<ScriptRound> parse_refuter_script(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrKind::script_invalid,
         std::string("refuter script is not valid JSON: ") + e.what());
  }
  if (!j.is_array())
    fail(ErrKind::script_invalid,
         "refuter script must be a JSON array of rounds");
  std::vector<ScriptRound> out;
  for (const auto& r : j) {
    if (!r.is_object())
      fail(ErrKind::script_invalid, "each script round must be an object");
    ScriptRound sr;
    if (r.contains("states")) {
      if (!r["states"].is_object())
        fail(ErrKind::script_invalid,
             "the \"states\" entry must map trace variables to state names");
      for (const auto& [k, v] : r["states"].items()) {
        if (!v.is_string())
          fail(ErrKind::script_invalid, "state names must be strings");
        sr.states[k] = v.get<std::string>();
      }
    }
    if (r.contains("sched")) {
      if (!r["sched"].is_array())
        fail(ErrKind::script_invalid,
             "the \"sched\" entry must be an array of stuttering names");
      for (const auto& v : r["sched"]) {
        if (!v.is_string())
          fail(ErrKind::script_invalid, "stuttering names must be strings");
        sr.sched.push_back(v.get<std::string>());
      }
    }
    out.push_back(std::move(sr));
  }
  return out;
}

TraceAssignmentLasso extract_witness(const GameContext& cx,
                                     const GameGraph& g, const SolveResult& r,
                                     const std::vector<ScriptRound>& script,
                                     uint32_t initial, uint32_t max_rounds) {
  const AhltlFormula& f = *cx.formula;
  AHC_CHECK(initial < g.initials.size(), "initial vertex index in range");
  uint32_t v = g.initials[initial];
  if (!r.verifier_wins[v])
    fail(ErrKind::not_winning,
         "the verifier does not win from the requested initial vertex");

  const uint32_t slots = uint32_t(cx.slot_trace.size());
  // Per slot, the committed trace path so far; the window of the current
  // vertex always equals path[base .. base+len). Resyncing on every vertex
  // overwrites speculative states the update trim dropped again.
  std::vector<std::vector<uint32_t>> path(slots);
  std::vector<uint32_t> base(slots, 0);
  auto sync = [&](const GameVertex& u) {
    for (uint32_t s = 0; s < slots; ++s) {
      const std::vector<uint32_t>& win = u.windows[s];
      path[s].resize(base[s] + win.size());
      std::copy(win.begin(), win.end(), path[s].begin() + base[s]);
    }
  };

  std::vector<Letter> letters;
  std::vector<uint32_t> scheds;
  std::vector<std::vector<uint32_t>> bases;
  size_t cursor = 0;
  std::unordered_map<uint32_t, size_t> seen;
  size_t loop_round = SIZE_MAX;

  while (true) {
    const GameVertex& cur = g.vertex[v];
    AHC_CHECK(cur.stage != Stage::error, "winning plays avoid the error sink");
    AHC_CHECK(r.verifier_wins[v], "sigma-plays stay in the winning region");
    sync(cur);
    if (cur.stage == Stage::update) {
      if (cursor >= script.size()) {
        // Beyond the script the play is fully determined by the positional
        // strategy, so a revisited vertex closes the lasso.
        auto [it, fresh] = seen.emplace(v, letters.size());
        if (!fresh) {
          loop_round = it->second;
          break;
        }
      }
      if (letters.size() >= max_rounds)
        fail(ErrKind::capacity,
             "witness extraction exceeded its round budget of " +
                 std::to_string(max_rounds));
      letters.push_back(update_letter(cx, cur));
      scheds.push_back(cur.progressed);
      bases.push_back(base);
      for (uint32_t s = 0; s < slots; ++s) {
        bool all_moved = true;
        for (uint32_t b : cx.slot_stutters[s])
          if (cur.pointers[b] == 0) all_moved = false;
        if (all_moved) base[s] += 1;  // the update trim drops the front state
      }
      AHC_CHECK(g.edges[v].size() == 1, "update vertices are deterministic");
      v = g.edges[v][0];
    } else if (cur.stage == Stage::forall_stage) {
      if (g.edges[v].size() == 1) {  // no real refuter choice
        v = g.edges[v][0];
        continue;
      }
      if (cursor >= script.size()) break;  // partial result
      const ScriptRound& round = script[cursor];
      std::string where = "script round " + std::to_string(cursor);
      ++cursor;

      std::vector<uint32_t> want(slots, UINT32_MAX);
      for (uint32_t s : cx.univ_slots) {
        const std::string& tn = f.traces[cx.slot_trace[s]].name;
        auto it = round.states.find(tn);
        if (it == round.states.end())
          fail(ErrKind::script_invalid,
               where + " names no successor state for trace " + tn);
        const TransitionSystem& ts = cx.system_of_slot(s);
        int st = ts.state_index(it->second);
        if (st < 0)
          fail(ErrKind::script_invalid, where + " names unknown state '" +
                                            it->second + "' for trace " + tn);
        const std::vector<uint32_t>& sc = ts.succ[cur.windows[s].back()];
        if (std::find(sc.begin(), sc.end(), uint32_t(st)) == sc.end())
          fail(ErrKind::script_invalid,
               where + ": state '" + it->second +
                   "' does not succeed the current window of trace " + tn);
        want[s] = uint32_t(st);
      }
      uint32_t sched = 0;
      for (const std::string& bn : round.sched) {
        int b = f.stutter_index(bn);
        if (b < 0 || !(cx.univ_sched_mask >> uint32_t(b) & 1u))
          fail(ErrKind::script_invalid,
               where + ": '" + bn + "' is not a universal stuttering");
        sched |= 1u << uint32_t(b);
      }

      uint32_t nxt = UINT32_MAX;
      for (uint32_t w : g.edges[v]) {
        const GameVertex& c = g.vertex[w];
        if (c.progressed != (cur.progressed | sched)) continue;
        bool ok = true;
        for (uint32_t s : cx.univ_slots) ok &= c.windows[s].back() == want[s];
        if (ok) {
          nxt = w;
          break;
        }
      }
      AHC_CHECK(nxt != UINT32_MAX, "scripted refuter move exists in the arena");
      v = nxt;
    } else {  // exists_stage
      uint32_t w = r.strategy[v];
      AHC_CHECK(w != kNoChoice, "winning verifier vertices carry a move");
      v = w;
    }
  }

  TraceAssignmentLasso out;
  out.schedules.resize(f.stutters.size());
  size_t cut = loop_round == SIZE_MAX ? letters.size() : loop_round;
  out.letter_prefix.assign(letters.begin(), letters.begin() + ptrdiff_t(cut));
  out.letter_loop.assign(letters.begin() + ptrdiff_t(cut), letters.end());
  for (uint32_t b = 0; b < f.stutters.size(); ++b) {
    StutterSchedule& sch = out.schedules[b];
    for (size_t k = 0; k < letters.size(); ++k) {
      uint8_t bit = uint8_t(scheds[k] >> b & 1u);
      (k < cut ? sch.prefix : sch.loop).push_back(bit);
    }
  }
  out.trace_prefix.resize(slots);
  out.trace_loop.resize(slots);
  if (loop_round != SIZE_MAX) {
    out.complete = true;
    for (uint32_t s = 0; s < slots; ++s) {
      uint32_t bj = bases[loop_round][s];
      uint32_t grow = base[s] - bj;
      out.trace_prefix[s].assign(path[s].begin(), path[s].begin() + bj);
      if (grow > 0)
        out.trace_loop[s].assign(path[s].begin() + bj,
                                 path[s].begin() + bj + grow);
      else  // the slot idles through the loop; keep its static window
        out.trace_loop[s].assign(path[s].begin() + bj, path[s].end());
    }
  } else {
    for (uint32_t s = 0; s < slots; ++s) out.trace_prefix[s] = path[s];
  }
  return out;
}

}  // namespace ahc
