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
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ahc/diag.hpp"
#include "ahc/export.hpp"
#include "ahc/formula.hpp"
#include "ahc/ts.hpp"
#include "ahc/verify.hpp"

namespace {

using namespace ahc;
namespace fs = std::filesystem;

// Exit codes: 0 verified, 1 violated, 2 unknown, 3 input error, 4 budget.
constexpr int kExitInput = 3;
constexpr int kExitBudget = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrKind::io, "cannot write " + path);
  out << text;
  if (!out) fail(ErrKind::io, "short write to " + path);
}

// --------------------------------------------------------------------------
// Input loading shared by the subcommands.

struct IoConfig {
  std::string system;               // default binding for every trace
  std::vector<std::string> binds;   // name=path overrides
  std::string formula;
  std::string dialect = "stuttering";
};

struct LoadedInstance {
  std::vector<std::unique_ptr<TransitionSystem>> systems;
  AhltlFormula f;
  Binding bi;
  std::string translation;  // printed form, trajectory dialect only
};

LoadedInstance load_instance(const IoConfig& io, bool need_systems) {
  LoadedInstance in;
  std::string text = read_file(io.formula);
  if (io.dialect == "trajectory") {
    in.f = from_trajectory_form(text);
    in.translation = print_formula(in.f);
  } else {
    in.f = parse_formula(text);
  }

  if (io.system.empty() && io.binds.empty()) {
    if (need_systems)
      fail(ErrKind::missing_binding,
           "no system given; pass --system FILE or --bind trace=FILE");
    return in;
  }

  std::map<std::string, const TransitionSystem*> cache;
  auto load = [&](const std::string& path) {
    auto it = cache.find(path);
    if (it != cache.end()) return it->second;
    in.systems.push_back(
        std::make_unique<TransitionSystem>(parse_system(read_file(path))));
    return cache[path] = in.systems.back().get();
  };

  std::map<std::string, std::string> by_trace;
  for (const std::string& b : io.binds) {
    size_t eq = b.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == b.size())
      fail(ErrKind::binding, "malformed --bind '" + b +
                                 "'; expected trace=FILE");
    std::string name = b.substr(0, eq);
    if (in.f.trace_index(name) < 0)
      fail(ErrKind::binding,
           "--bind names unknown trace variable '" + name + "'");
    by_trace[name] = b.substr(eq + 1);
  }

  for (const TraceQuantifier& tq : in.f.traces) {
    auto it = by_trace.find(tq.name);
    if (it != by_trace.end()) {
      in.bi.systems.push_back(load(it->second));
    } else if (!io.system.empty()) {
      in.bi.systems.push_back(load(io.system));
    } else {
      fail(ErrKind::missing_binding, "trace '" + tq.name +
                                         "' has no bound system; pass "
                                         "--system or --bind " +
                                         tq.name + "=FILE");
    }
  }
  return in;
}

// --------------------------------------------------------------------------
// Report rendering.

std::string fragment_line(const FragmentReport& rep) {
  const char* tag = nullptr;
  if (rep.admissible)
    tag = "admissible";
  else if (rep.alternation_free)
    tag = "alternation-free";
  else if (rep.rectangle_closed)
    tag = "rectangle-closed";

  std::string out;
  if (tag)
    out = tag;
  else if (rep.terminating_depth)
    out = "terminating (depth " + std::to_string(*rep.terminating_depth) +
          ")";
  if (!out.empty()) {
    if (rep.complete_at_z)
      out += ", complete at Z=" + std::to_string(*rep.complete_at_z);
    return out;
  }
  if (rep.forall_exists) return "forall-exists; no completeness fragment applies";
  return "not forall-exists; outside the supported prefix class";
}

void print_text_report(const Verdict& vd, bool timings) {
  std::cout << "outcome:   " << outcome_name(vd.outcome) << "\n"
            << "reason:    " << reason_name(vd.reason) << "\n"
            << "z:         " << vd.z << "\n"
            << "fragment:  " << fragment_line(vd.fragment) << "\n"
            << "game:      " << vd.stats.vertices << " vertices, "
            << vd.stats.edges << " edges\n"
            << "automaton: " << vd.stats.nba_states << " NBA states, "
            << vd.stats.dpa_states << " DPA states, max priority "
            << vd.stats.max_priority << "\n";
  if (timings) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "timings:   automaton %.3fs, game %.3fs, solve %.3fs, "
                  "total %.3fs\n",
                  vd.stats.t_automaton, vd.stats.t_build, vd.stats.t_solve,
                  vd.stats.t_total);
    std::cout << buf;
  }
  for (const std::string& w : vd.warnings)
    std::cout << "warning:   " << w << "\n";
}

int outcome_exit(Outcome o) {
  switch (o) {
    case Outcome::verified: return 0;
    case Outcome::violated: return 1;
    case Outcome::unknown: return 2;
  }
  return kExitInput;
}

// --------------------------------------------------------------------------
// check

struct CheckConfig {
  IoConfig io;
  uint32_t z = 1;
  std::string sweep;  // "LO..HI"
  bool json = false;
  bool timings = false;
  std::string dot_out;
  VerifyOptions vo;
};

std::pair<uint32_t, uint32_t> parse_sweep(const std::string& s) {
  uint32_t lo = 0, hi = 0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%u..%u%c", &lo, &hi, &extra) != 2 || lo < 1 ||
      hi < lo)
    fail(ErrKind::semantic,
         "--sweep-z expects LO..HI with 1 <= LO <= HI, got '" + s + "'");
  return {lo, hi};
}

int do_check(const CheckConfig& cfg) {
  LoadedInstance in = load_instance(cfg.io, true);
  uint32_t lo = cfg.z, hi = cfg.z;
  if (!cfg.sweep.empty()) std::tie(lo, hi) = parse_sweep(cfg.sweep);

  std::unique_ptr<VerifyRun> run;
  for (uint32_t z = lo; z <= hi; ++z) {
    run = verify_run(in.bi, in.f, z, cfg.vo);
    if (!cfg.sweep.empty()) {
      // Sound early exit: a win at z stays a win at every larger bound.
      std::ostream& log = cfg.json ? std::cerr : std::cout;
      log << "Z=" << z << ": " << outcome_name(run->verdict.outcome)
          << "\n";
    }
    if (run->verdict.outcome == Outcome::verified) break;
  }

  const Verdict& vd = run->verdict;
  if (cfg.json)
    std::cout << verdict_json(vd, cfg.timings);
  else
    print_text_report(vd, cfg.timings);

  if (!cfg.dot_out.empty()) {
    if (vd.outcome == Outcome::verified) {
      DotOptions opt;
      opt.strategy_only = true;
      write_file(cfg.dot_out,
                 dot_game(run->cx, run->game, &run->solve, opt));
    } else {
      std::cerr << "note: no winning strategy to export; skipping "
                << cfg.dot_out << "\n";
    }
  }
  return outcome_exit(vd.outcome);
}

// --------------------------------------------------------------------------
// classify

int do_classify(const IoConfig& io) {
  LoadedInstance in = load_instance(io, false);
  if (!in.translation.empty())
    std::cout << "translated: " << in.translation << "\n";
  const Binding* bi = in.bi.systems.empty() ? nullptr : &in.bi;
  FragmentReport rep = classify_fragment(in.f, bi);
  std::cout << fragment_line(rep) << "\n";
  if (rep.terminating_depth)
    std::cout << "termination depth: " << *rep.terminating_depth << "\n";
  for (const std::string& w : rep.warnings)
    std::cout << "warning: " << w << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// bench

struct CaseSpec {
  std::vector<std::string> systems;
  std::string formula;
  uint32_t z = 1;
  std::string expect;
};

CaseSpec parse_case(const fs::path& path) {
  CaseSpec cs;
  std::istringstream in(read_file(path.string()));
  std::string line;
  unsigned lineno = 0;
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrKind::syntax, path.string() + ":" + std::to_string(lineno) +
                                ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    fs::path base = path.parent_path();
    if (key == "system") {
      cs.systems.push_back((base / val).string());
    } else if (key == "formula") {
      cs.formula = (base / val).string();
    } else if (key == "z") {
      cs.z = (uint32_t)std::stoul(val);
    } else if (key == "expect") {
      if (val != "verified" && val != "violated" && val != "unknown")
        fail(ErrKind::semantic,
             path.string() + ": expect must be verified|violated|unknown");
      cs.expect = val;
    } else {
      fail(ErrKind::semantic,
           path.string() + ": unknown manifest key '" + key + "'");
    }
  }
  if (cs.systems.empty() || cs.formula.empty() || cs.expect.empty())
    fail(ErrKind::semantic,
         path.string() + ": manifest needs system=, formula=, and expect=");
  return cs;
}

std::string lower(std::string s) {
  for (char& c : s) c = (char)tolower((unsigned char)c);
  return s;
}

int do_bench(const std::string& dir, const VerifyOptions& vo) {
  if (!fs::is_directory(dir))
    fail(ErrKind::io, "bench expects a directory of .case files: " + dir);
  std::vector<fs::path> cases;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".case")
      cases.push_back(e.path());
  std::sort(cases.begin(), cases.end());

  std::printf("%-24s %-10s %8s %9s %9s %9s %9s  %s\n", "case", "outcome",
              "|V|", "|E|", "t_const", "t_solve", "t_total", "status");
  unsigned failed = 0;
  for (const fs::path& p : cases) {
    std::string name = p.stem().string();
    std::string outcome = "error";
    uint64_t nv = 0, ne = 0;
    double tc = 0, tsv = 0, tt = 0;
    bool pass = false;
    // One broken case must not take down the rest of the table.
    try {
      CaseSpec cs = parse_case(p);
      IoConfig io;
      io.formula = cs.formula;
      LoadedInstance in;
      {
        LoadedInstance tmp;
        std::string text = read_file(cs.formula);
        tmp.f = parse_formula(text);
        for (size_t t = 0; t < tmp.f.traces.size(); ++t) {
          const std::string& path =
              cs.systems[std::min(t, cs.systems.size() - 1)];
          tmp.systems.push_back(std::make_unique<TransitionSystem>(
              parse_system(read_file(path))));
          tmp.bi.systems.push_back(tmp.systems.back().get());
        }
        in = std::move(tmp);
      }
      Verdict vd = verify(in.bi, in.f, cs.z, vo);
      outcome = outcome_name(vd.outcome);
      nv = vd.stats.vertices;
      ne = vd.stats.edges;
      tc = vd.stats.t_build;
      tsv = vd.stats.t_solve;
      tt = vd.stats.t_total;
      pass = lower(outcome) == cs.expect;
    } catch (const Error& e) {
      std::cerr << "case " << name << ": " << e.what() << "\n";
    }
    if (!pass) ++failed;
    std::printf("%-24s %-10s %8llu %9llu %9.3f %9.3f %9.3f  %s\n",
                name.c_str(), outcome.c_str(), (unsigned long long)nv,
                (unsigned long long)ne, tc, tsv, tt,
                pass ? "PASS" : "FAIL");
  }
  std::printf("%zu cases, %u failed\n", cases.size(), failed);
  return failed ? 1 : 0;
}

// --------------------------------------------------------------------------
// export

struct ExportConfig {
  IoConfig io;
  uint32_t z = 1;
  std::string dot_out;       // strategy-restricted game
  std::string dot_full_out;  // whole arena with the losing region shaded
  std::string automaton_out;
  VerifyOptions vo;
};

int do_export(const ExportConfig& cfg) {
  if (cfg.dot_out.empty() && cfg.dot_full_out.empty() &&
      cfg.automaton_out.empty())
    fail(ErrKind::semantic,
         "nothing to export; pass --dot, --dot-full, or --automaton");
  LoadedInstance in = load_instance(cfg.io, true);
  auto run = verify_run(in.bi, in.f, cfg.z, cfg.vo);

  if (!cfg.dot_out.empty()) {
    if (run->verdict.outcome != Outcome::verified)
      fail(ErrKind::not_winning,
           "no winning strategy to restrict by: verification returned " +
               std::string(outcome_name(run->verdict.outcome)));
    DotOptions opt;
    opt.strategy_only = true;
    write_file(cfg.dot_out, dot_game(run->cx, run->game, &run->solve, opt));
  }
  if (!cfg.dot_full_out.empty())
    write_file(cfg.dot_full_out,
               dot_game(run->cx, run->game, &run->solve));
  if (!cfg.automaton_out.empty()) {
    std::vector<std::string> ap;
    for (const Expr& a : in.f.atoms) ap.push_back(print_expr(a, in.f));
    for (const StutterQuantifier& sq : in.f.stutters)
      ap.push_back("moved(" + sq.name + ")");
    Nba nba = prune_dead(ltl_to_nba(build_psi_mod(in.f),
                                    (uint32_t)in.f.atoms.size(),
                                    (uint32_t)in.f.stutters.size()));
    write_file(cfg.automaton_out,
               dump_nba(nba, ap) + "\n" + dump_dpa(run->dpa, ap));
  }
  return 0;
}

// --------------------------------------------------------------------------

void add_io_options(CLI::App* sub, IoConfig& io, bool formula_required) {
  sub->add_option("--system", io.system,
                  "transition system bound to every otherwise unbound trace");
  sub->add_option("--bind", io.binds,
                  "per-trace system binding, trace=FILE (repeatable)");
  auto* f = sub->add_option("--formula", io.formula, "formula file");
  if (formula_required) f->required();
  sub->add_option("--dialect", io.dialect,
                  "formula dialect: stuttering (default) or trajectory")
      ->check(CLI::IsMember({"stuttering", "trajectory"}));
}

void add_budget_options(CLI::App* sub, VerifyOptions& vo) {
  sub->add_option("--max-vertices", vo.max_vertices,
                  "game construction vertex budget");
  sub->add_option("--max-dpa-states", vo.max_dpa_states,
                  "determinization state budget");
  sub->add_option("--threads", vo.threads, "game construction workers")
      ->check(CLI::Range(1u, 256u));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "checks forall-exists A-HLTL formulas on finite transition systems "
      "by solving the stuttering verification game"};
  app.require_subcommand(1);

  CheckConfig check;
  auto* c = app.add_subcommand("check", "verify a formula at a window bound");
  add_io_options(c, check.io, true);
  c->add_option("-Z,--z", check.z, "window bound (default 1)")
      ->check(CLI::Range(1u, 64u));
  c->add_option("--sweep-z", check.sweep,
                "try increasing bounds LO..HI, stopping at the first win");
  c->add_flag("--json", check.json, "emit the verdict as JSON");
  c->add_flag("--timings", check.timings, "include phase timings");
  c->add_option("--dot", check.dot_out,
                "write the winning strategy as DOT when Verified");
  add_budget_options(c, check.vo);

  IoConfig classify_io;
  auto* k = app.add_subcommand(
      "classify", "report the completeness fragment of a formula");
  add_io_options(k, classify_io, true);

  std::string bench_dir;
  VerifyOptions bench_vo;
  auto* b = app.add_subcommand(
      "bench", "run a directory of .case manifests and check expectations");
  b->add_option("dir", bench_dir, "directory of .case files")->required();
  add_budget_options(b, bench_vo);

  ExportConfig exp;
  auto* e = app.add_subcommand("export",
                               "write game graphs or automaton dumps");
  add_io_options(e, exp.io, true);
  e->add_option("-Z,--z", exp.z, "window bound (default 1)")
      ->check(CLI::Range(1u, 64u));
  e->add_option("--dot", exp.dot_out, "strategy-restricted game DOT file");
  e->add_option("--dot-full", exp.dot_full_out, "full arena DOT file");
  e->add_option("--automaton", exp.automaton_out,
                "monitor automaton dump (NBA and DPA)");
  add_budget_options(e, exp.vo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int rc = app.exit(err);
    return rc == 0 ? 0 : kExitInput;
  }

  // Diagnostics stay one-line messages; exit 4 flags a blown budget, 3 any
  // other input or environment problem.
  try {
    if (c->parsed()) return do_check(check);
    if (k->parsed()) return do_classify(classify_io);
    if (b->parsed()) return do_bench(bench_dir, bench_vo);
    if (e->parsed()) return do_export(exp);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return err.kind == ErrKind::capacity ? kExitBudget : kExitInput;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
