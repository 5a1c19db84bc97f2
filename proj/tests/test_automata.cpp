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
#include "ahc/automata.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace ahc;

namespace {

// Independent reference evaluator. It scans a window that covers one full
// loop period past max(i, P); subformula truth is loop-periodic beyond the
// prefix, so an until unresolved there never resolves (least fixpoint) and
// a release unbroken there never breaks (greatest fixpoint).
struct RefEval {
  const LassoWord& w;
  uint32_t num_atoms;
  std::map<std::pair<const Ltl*, size_t>, bool> memo;

  Letter at(size_t j) const {
    size_t p = w.prefix.size();
    return j < p ? w.prefix[j] : w.loop[(j - p) % w.loop.size()];
  }

  bool eval(const Ltl& n, size_t i) {
    auto key = std::make_pair(&n, i);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    bool v = compute(n, i);
    memo[key] = v;
    return v;
  }

  bool compute(const Ltl& n, size_t i) {
    size_t hi = std::max(i, w.prefix.size()) + w.loop.size();
    switch (n.op) {
      case Ltl::tt: return true;
      case Ltl::ff: return false;
      case Ltl::atom: return at(i) >> n.ref & 1;
      case Ltl::moved: return at(i) >> (num_atoms + n.ref) & 1;
      case Ltl::lnot: return !eval(n.kids[0], i);
      case Ltl::land:
        for (const auto& k : n.kids)
          if (!eval(k, i)) return false;
        return true;
      case Ltl::lor:
        for (const auto& k : n.kids)
          if (eval(k, i)) return true;
        return false;
      case Ltl::limp: return !eval(n.kids[0], i) || eval(n.kids[1], i);
      case Ltl::liff: return eval(n.kids[0], i) == eval(n.kids[1], i);
      case Ltl::x: return eval(n.kids[0], i + 1);
      case Ltl::u:
        for (size_t j = i; j <= hi; ++j) {
          if (eval(n.kids[1], j)) return true;
          if (!eval(n.kids[0], j)) return false;
        }
        return false;
      case Ltl::r:
        for (size_t j = i; j <= hi; ++j) {
          if (!eval(n.kids[1], j)) return false;
          if (eval(n.kids[0], j)) return true;
        }
        return true;
      case Ltl::f:
        for (size_t j = i; j <= hi; ++j)
          if (eval(n.kids[0], j)) return true;
        return false;
      case Ltl::g:
        for (size_t j = i; j <= hi; ++j)
          if (!eval(n.kids[0], j)) return false;
        return true;
    }
    return false;
  }
};

bool ref_eval(const Ltl& body, uint32_t num_atoms, const LassoWord& w) {
  RefEval r{w, num_atoms, {}};
  return r.eval(body, 0);
}

Ltl rand_ltl(std::mt19937& rng, int depth, uint32_t na, uint32_t nm) {
  auto pick = [&](uint32_t n) { return (uint32_t)(rng() % n); };
  if (depth <= 0) {
    switch (pick(nm > 0 ? 5 : 4)) {
      case 0: return Ltl{Ltl::tt, 0, {}};
      case 1: return Ltl{Ltl::ff, 0, {}};
      case 2:
      case 3: return ltl_atom(pick(na));
      default: return ltl_moved(pick(nm));
    }
  }
  auto sub = [&] { return rand_ltl(rng, depth - 1, na, nm); };
  switch (pick(10)) {
    case 0: return rand_ltl(rng, 0, na, nm);
    case 1: return ltl_un(Ltl::lnot, sub());
    case 2: return ltl_and({sub(), sub()});
    case 3: return ltl_or({sub(), sub()});
    case 4: return ltl_bin(Ltl::limp, sub(), sub());
    case 5: return ltl_bin(Ltl::liff, sub(), sub());
    case 6: return ltl_un(Ltl::x, sub());
    case 7: return ltl_bin(Ltl::u, sub(), sub());
    case 8: return ltl_un(Ltl::f, sub());
    default: return ltl_un(Ltl::g, sub());
  }
}

LassoWord rand_lasso(std::mt19937& rng, uint32_t bits) {
  LassoWord w;
  uint32_t p = rng() % 4, l = 1 + rng() % 3;
  for (uint32_t i = 0; i < p; ++i)
    w.prefix.push_back((Letter)(rng() % (1u << bits)));
  for (uint32_t i = 0; i < l; ++i)
    w.loop.push_back((Letter)(rng() % (1u << bits)));
  return w;
}

LassoWord lasso(std::vector<Letter> p, std::vector<Letter> l) {
  return LassoWord{std::move(p), std::move(l)};
}

}  // namespace

TEST_CASE("direct lasso evaluation, pinned cases") {
  Ltl a = ltl_atom(0), b = ltl_atom(1);
  Ltl gfa = ltl_un(Ltl::g, ltl_un(Ltl::f, a));
  CHECK(ltl_lasso_eval(gfa, 2, lasso({}, {1})));
  CHECK(ltl_lasso_eval(gfa, 2, lasso({}, {0, 1})));
  CHECK_FALSE(ltl_lasso_eval(gfa, 2, lasso({}, {0})));
  CHECK_FALSE(ltl_lasso_eval(gfa, 2, lasso({1, 1}, {0})));

  Ltl aub = ltl_bin(Ltl::u, a, b);
  CHECK(ltl_lasso_eval(aub, 2, lasso({1, 1}, {2})));
  CHECK(ltl_lasso_eval(aub, 2, lasso({2}, {0})));
  CHECK_FALSE(ltl_lasso_eval(aub, 2, lasso({0}, {2})));
  CHECK_FALSE(ltl_lasso_eval(aub, 2, lasso({}, {1})));

  Ltl arb = ltl_bin(Ltl::r, a, b);
  CHECK(ltl_lasso_eval(arb, 2, lasso({}, {2})));
  CHECK(ltl_lasso_eval(arb, 2, lasso({3}, {0})));
  CHECK_FALSE(ltl_lasso_eval(arb, 2, lasso({2}, {0})));

  Ltl xa = ltl_un(Ltl::x, a);
  CHECK(ltl_lasso_eval(xa, 2, lasso({0}, {1})));
  CHECK_FALSE(ltl_lasso_eval(xa, 2, lasso({1}, {0})));

  // one atom plus one progress flag: the flag sits above the atom bits
  Ltl gm = ltl_un(Ltl::g, ltl_moved(0));
  CHECK(ltl_lasso_eval(gm, 1, lasso({}, {2})));
  CHECK(ltl_lasso_eval(gm, 1, lasso({3}, {2, 3})));
  CHECK_FALSE(ltl_lasso_eval(gm, 1, lasso({}, {1})));
}

TEST_CASE("direct evaluation agrees with the reference evaluator") {
  std::mt19937 rng(20260114);
  for (int trial = 0; trial < 400; ++trial) {
    Ltl f = rand_ltl(rng, 1 + (int)(rng() % 3), 2, 1);
    for (int j = 0; j < 8; ++j) {
      LassoWord w = rand_lasso(rng, 3);
      bool dp = ltl_lasso_eval(f, 2, w);
      bool ref = ref_eval(f, 2, w);
      REQUIRE(dp == ref);
    }
  }
}

TEST_CASE("direct evaluation is stable under lasso unrolling and rotation") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 150; ++trial) {
    Ltl f = rand_ltl(rng, 1 + (int)(rng() % 3), 2, 0);
    LassoWord w = rand_lasso(rng, 2);
    bool base = ltl_lasso_eval(f, 2, w);

    LassoWord unrolled = w;
    unrolled.prefix.insert(unrolled.prefix.end(), w.loop.begin(),
                           w.loop.end());
    CHECK(ltl_lasso_eval(f, 2, unrolled) == base);

    LassoWord rotated = w;
    rotated.prefix.push_back(w.loop[0]);
    rotated.loop.erase(rotated.loop.begin());
    rotated.loop.push_back(w.loop[0]);
    CHECK(ltl_lasso_eval(f, 2, rotated) == base);
  }
}

TEST_CASE("tableau automaton language, pinned cases") {
  Ltl a = ltl_atom(0);
  Nba gfa = ltl_to_nba(ltl_un(Ltl::g, ltl_un(Ltl::f, a)), 1, 0);
  CHECK(nba_accepts(gfa, lasso({}, {1})));
  CHECK(nba_accepts(gfa, lasso({}, {0, 1})));
  CHECK_FALSE(nba_accepts(gfa, lasso({}, {0})));
  CHECK_FALSE(nba_accepts(gfa, lasso({1}, {0})));

  Nba fga = ltl_to_nba(ltl_un(Ltl::f, ltl_un(Ltl::g, a)), 1, 0);
  CHECK(nba_accepts(fga, lasso({0}, {1})));
  CHECK(nba_accepts(fga, lasso({}, {1})));
  CHECK_FALSE(nba_accepts(fga, lasso({}, {0, 1})));

  Nba none = ltl_to_nba(Ltl{Ltl::ff, 0, {}}, 1, 0);
  CHECK_FALSE(nba_accepts(none, lasso({}, {0})));
  CHECK_FALSE(nba_accepts(none, lasso({1}, {1})));

  Nba all = ltl_to_nba(Ltl{Ltl::tt, 0, {}}, 1, 0);
  CHECK(nba_accepts(all, lasso({}, {0})));
  CHECK(nba_accepts(all, lasso({0, 1}, {1, 0})));
}

TEST_CASE("tableau automaton agrees with direct evaluation") {
  std::mt19937 rng(424242);
  for (int trial = 0; trial < 150; ++trial) {
    Ltl f = rand_ltl(rng, 1 + (int)(rng() % 3), 2, 1);
    Nba a = ltl_to_nba(f, 2, 1);
    Nba p = prune_dead(a);
    CHECK(p.num_states() <= a.num_states());
    for (int j = 0; j < 6; ++j) {
      LassoWord w = rand_lasso(rng, 3);
      bool dp = ltl_lasso_eval(f, 2, w);
      REQUIRE(nba_accepts(a, w) == dp);
      REQUIRE(nba_accepts(p, w) == dp);
    }
  }
}

TEST_CASE("determinization preserves the language") {
  std::mt19937 rng(987654);
  for (int trial = 0; trial < 100; ++trial) {
    Ltl f = rand_ltl(rng, 1 + (int)(rng() % 3), 2, 0);
    Nba a = prune_dead(ltl_to_nba(f, 2, 0));
    Dpa d = determinize(a, 200000);
    for (int j = 0; j < 8; ++j) {
      LassoWord w = rand_lasso(rng, 2);
      bool want = ltl_lasso_eval(f, 2, w);
      REQUIRE(dpa_accepts(d, w) == want);
    }
  }
}

TEST_CASE("deterministic input is completed instead of rebuilt") {
  // q0 loops on !a, steps to q1 on a; q1 only continues on a.
  Nba a;
  a.bits = 1;
  a.init = 0;
  a.edges = {{{1, 0, 0}, {1, 1, 1}}, {{1, 1, 1}}};
  a.accepting = {false, true};

  Dpa d = determinize(a, 100);
  CHECK(d.num_states() == 3);  // both states plus the rejecting sink
  for (uint32_t p : d.priority) CHECK(p <= 1);

  // language: finitely many !a, then a forever
  CHECK(dpa_accepts(d, lasso({}, {1})));
  CHECK(dpa_accepts(d, lasso({0, 0}, {1})));
  CHECK_FALSE(dpa_accepts(d, lasso({}, {0})));
  CHECK_FALSE(dpa_accepts(d, lasso({1}, {0, 1})));

  for (uint32_t pm = 0; pm < 8; ++pm)
    for (uint32_t pl = 1; pl <= 2; ++pl)
      for (uint32_t lm = 0; lm < (1u << pl); ++lm) {
        LassoWord w;
        for (uint32_t i = 0; i < 3; ++i)
          if (pm >> i & 1) w.prefix.push_back(1);
          else w.prefix.push_back(0);
        for (uint32_t i = 0; i < pl; ++i)
          w.loop.push_back((Letter)(lm >> i & 1));
        REQUIRE(dpa_accepts(d, w) == nba_accepts(a, w));
      }
}

TEST_CASE("determinization state budget is enforced") {
  Ltl a = ltl_atom(0);
  Ltl fair = ltl_and({ltl_un(Ltl::g, ltl_un(Ltl::f, a)),
                      ltl_un(Ltl::g, ltl_un(Ltl::f, ltl_un(Ltl::lnot, a)))});
  Nba n = prune_dead(ltl_to_nba(fair, 1, 0));
  try {
    determinize(n, 2);
    FAIL("budget was not enforced");
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::capacity);
  }
  // a generous budget succeeds and the result is still correct
  Dpa d = determinize(n, 100000);
  CHECK(dpa_accepts(d, lasso({}, {0, 1})));
  CHECK_FALSE(dpa_accepts(d, lasso({}, {1})));
  CHECK_FALSE(dpa_accepts(d, lasso({0}, {0})));
}

TEST_CASE("alphabet wider than the letter type is rejected") {
  try {
    ltl_to_nba(ltl_atom(0), 12, 8);
    FAIL("letter width was not enforced");
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::capacity);
  }
}

TEST_CASE("textual dumps") {
  Ltl a = ltl_atom(0);
  Nba n = prune_dead(ltl_to_nba(ltl_un(Ltl::g, ltl_un(Ltl::f, a)), 1, 0));
  std::string hn = dump_nba(n, {"a"});
  CHECK(hn.find("HOA: v1") != std::string::npos);
  CHECK(hn.find("Inf(0)") != std::string::npos);
  CHECK(hn.find("States: " + std::to_string(n.num_states())) !=
        std::string::npos);

  Dpa d = determinize(n, 10000);
  std::string hd = dump_dpa(d, {"a"});
  CHECK(hd.find("HOA: v1") != std::string::npos);
  CHECK(hd.find("parity min even") != std::string::npos);
}
