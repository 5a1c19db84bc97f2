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

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

namespace ahc {

// ===========================================================================
// Direct evaluation on a lasso

bool ltl_lasso_eval(const Ltl& body, uint32_t num_atoms, const LassoWord& w) {
  AHC_CHECK(!w.loop.empty(), "lasso loop must be nonempty");
  const size_t P = w.prefix.size(), L = w.loop.size(), N = P + L;
  auto letter = [&](size_t i) { return i < P ? w.prefix[i] : w.loop[i - P]; };
  auto next = [&](size_t i) { return i + 1 < N ? i + 1 : P; };

  // mu: backward sweeps over the loop until the least fixpoint settles,
  // then one backward pass over the prefix. nu dually.
  auto fix = [&](const std::vector<char>& va, const std::vector<char>& vb,
                 bool mu) {
    std::vector<char> v(N, mu ? 0 : 1);
    auto upd = [&](size_t i) {
      char t = mu ? (vb[i] || (va[i] && v[next(i)]))
                  : (vb[i] && (va[i] || v[next(i)]));
      v[i] = t;
    };
    for (size_t round = 0; round <= L; ++round)
      for (size_t i = N; i-- > P;) upd(i);
    for (size_t i = P; i-- > 0;) upd(i);
    return v;
  };

  auto eval = [&](auto&& self, const Ltl& n) -> std::vector<char> {
    std::vector<char> v(N);
    switch (n.op) {
      case Ltl::tt: std::fill(v.begin(), v.end(), 1); return v;
      case Ltl::ff: return v;
      case Ltl::atom:
        for (size_t i = 0; i < N; ++i) v[i] = (letter(i) >> n.ref) & 1;
        return v;
      case Ltl::moved:
        for (size_t i = 0; i < N; ++i)
          v[i] = (letter(i) >> (num_atoms + n.ref)) & 1;
        return v;
      case Ltl::lnot: {
        v = self(self, n.kids[0]);
        for (auto& c : v) c = !c;
        return v;
      }
      case Ltl::land:
      case Ltl::lor: {
        bool conj = n.op == Ltl::land;
        std::fill(v.begin(), v.end(), conj ? 1 : 0);
        for (const auto& k : n.kids) {
          std::vector<char> kv = self(self, k);
          for (size_t i = 0; i < N; ++i)
            v[i] = conj ? (v[i] && kv[i]) : (v[i] || kv[i]);
        }
        return v;
      }
      case Ltl::limp:
      case Ltl::liff: {
        std::vector<char> a = self(self, n.kids[0]);
        std::vector<char> b = self(self, n.kids[1]);
        for (size_t i = 0; i < N; ++i)
          v[i] = n.op == Ltl::limp ? (!a[i] || b[i]) : (a[i] == b[i]);
        return v;
      }
      case Ltl::x: {
        std::vector<char> kv = self(self, n.kids[0]);
        for (size_t i = 0; i < N; ++i) v[i] = kv[next(i)];
        return v;
      }
      case Ltl::u:
        return fix(self(self, n.kids[0]), self(self, n.kids[1]), true);
      case Ltl::r:
        return fix(self(self, n.kids[0]), self(self, n.kids[1]), false);
      case Ltl::f: {
        std::vector<char> tt(N, 1);
        return fix(tt, self(self, n.kids[0]), true);
      }
      case Ltl::g: {
        std::vector<char> ff(N, 0);
        return fix(ff, self(self, n.kids[0]), false);
      }
    }
    return v;
  };
  return eval(eval, body)[0] != 0;
}

// ===========================================================================
// Negation normal form over letter bits

namespace {

enum NOp : uint8_t { n_tt, n_ff, n_pos, n_neg, n_and, n_or, n_x, n_u, n_r };

struct NnfN {
  NOp op;
  uint32_t bit;
  uint32_t k0, k1;
};

struct NnfPool {
  std::vector<NnfN> nodes;
  std::map<std::tuple<uint8_t, uint32_t, uint32_t, uint32_t>, uint32_t> memo;

  uint32_t intern(NOp op, uint32_t bit, uint32_t k0, uint32_t k1) {
    auto key = std::make_tuple((uint8_t)op, bit, k0, k1);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    nodes.push_back({op, bit, k0, k1});
    memo[key] = (uint32_t)(nodes.size() - 1);
    return (uint32_t)(nodes.size() - 1);
  }

  uint32_t build(const Ltl& n, bool pos, uint32_t num_atoms) {
    auto rec = [&](const Ltl& k, bool p) { return build(k, p, num_atoms); };
    switch (n.op) {
      case Ltl::tt: return intern(pos ? n_tt : n_ff, 0, 0, 0);
      case Ltl::ff: return intern(pos ? n_ff : n_tt, 0, 0, 0);
      case Ltl::atom: return intern(pos ? n_pos : n_neg, n.ref, 0, 0);
      case Ltl::moved:
        return intern(pos ? n_pos : n_neg, num_atoms + n.ref, 0, 0);
      case Ltl::lnot: return rec(n.kids[0], !pos);
      case Ltl::land:
      case Ltl::lor: {
        bool conj = (n.op == Ltl::land) == pos;
        if (n.kids.empty()) return intern(conj ? n_tt : n_ff, 0, 0, 0);
        uint32_t acc = rec(n.kids.back(), pos);
        for (size_t i = n.kids.size() - 1; i-- > 0;)
          acc = intern(conj ? n_and : n_or, 0, rec(n.kids[i], pos), acc);
        return acc;
      }
      case Ltl::limp: {
        uint32_t a = rec(n.kids[0], !pos);
        uint32_t b = rec(n.kids[1], pos);
        return intern(pos ? n_or : n_and, 0, a, b);
      }
      case Ltl::liff: {
        uint32_t app = rec(n.kids[0], true), apn = rec(n.kids[0], false);
        uint32_t bpp = rec(n.kids[1], true), bpn = rec(n.kids[1], false);
        uint32_t l = intern(n_and, 0, app, pos ? bpp : bpn);
        uint32_t r = intern(n_and, 0, apn, pos ? bpn : bpp);
        return intern(n_or, 0, l, r);
      }
      case Ltl::x: return intern(n_x, 0, rec(n.kids[0], pos), 0);
      case Ltl::u:
        return intern(pos ? n_u : n_r, 0, rec(n.kids[0], pos),
                      rec(n.kids[1], pos));
      case Ltl::r:
        return intern(pos ? n_r : n_u, 0, rec(n.kids[0], pos),
                      rec(n.kids[1], pos));
      case Ltl::f:
        return pos ? intern(n_u, 0, intern(n_tt, 0, 0, 0), rec(n.kids[0], true))
                   : intern(n_r, 0, intern(n_ff, 0, 0, 0),
                            rec(n.kids[0], false));
      case Ltl::g:
        return pos ? intern(n_r, 0, intern(n_ff, 0, 0, 0), rec(n.kids[0], true))
                   : intern(n_u, 0, intern(n_tt, 0, 0, 0),
                            rec(n.kids[0], false));
    }
    AHC_CHECK(false, "unreachable temporal op");
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Tableau expansion of obligation sets into guarded covers.

struct Cover {
  Letter mask = 0, bits = 0;
  std::vector<uint32_t> next;  // sorted obligation ids for the next step
  uint64_t fulfilled = 0;      // recurrence goals taken in this cover
};

struct Tableau {
  const NnfPool& pool;
  std::vector<uint32_t> uf;  // until nodes needing recurrence, by id
  std::map<uint32_t, uint32_t> uf_index;

  explicit Tableau(const NnfPool& p, uint32_t root) : pool(p) {
    std::set<uint32_t> seen;
    collect(root, seen);
    AHC_CHECK(uf.size() <= 64, "too many recurrence obligations");
    for (uint32_t i = 0; i < uf.size(); ++i) uf_index[uf[i]] = i;
  }

  void collect(uint32_t id, std::set<uint32_t>& seen) {
    if (!seen.insert(id).second) return;
    const NnfN& n = pool.nodes[id];
    if (n.op == n_u) uf.push_back(id);
    if (n.op == n_and || n.op == n_or || n.op == n_u || n.op == n_r) {
      collect(n.k0, seen);
      collect(n.k1, seen);
    } else if (n.op == n_x) {
      collect(n.k0, seen);
    }
  }

  void rec(std::vector<uint32_t> todo, std::set<uint32_t> done, Letter mask,
           Letter bits, std::set<uint32_t> nxt, uint64_t ful,
           std::vector<Cover>& out) const {
    while (!todo.empty()) {
      uint32_t id = todo.back();
      todo.pop_back();
      if (!done.insert(id).second) continue;
      const NnfN& n = pool.nodes[id];
      switch (n.op) {
        case n_tt: break;
        case n_ff: return;
        case n_pos:
        case n_neg: {
          Letter b = (Letter)(1u << n.bit);
          Letter want = n.op == n_pos ? b : 0;
          if ((mask & b) && (bits & b) != want) return;
          mask |= b;
          bits |= want;
          break;
        }
        case n_and:
          todo.push_back(n.k0);
          todo.push_back(n.k1);
          break;
        case n_or: {
          auto t2 = todo;
          t2.push_back(n.k0);
          rec(std::move(t2), done, mask, bits, nxt, ful, out);
          todo.push_back(n.k1);
          break;
        }
        case n_x:
          nxt.insert(n.k0);
          break;
        case n_u: {
          auto t2 = todo;
          t2.push_back(n.k1);
          rec(std::move(t2), done, mask, bits, nxt,
              ful | (1ull << uf_index.at(id)), out);
          todo.push_back(n.k0);
          nxt.insert(id);
          break;
        }
        case n_r: {
          auto t2 = todo;
          t2.push_back(n.k1);
          t2.push_back(n.k0);
          rec(std::move(t2), done, mask, bits, nxt, ful, out);
          todo.push_back(n.k1);
          nxt.insert(id);
          break;
        }
      }
    }
    Cover c;
    c.mask = mask;
    c.bits = bits;
    c.next.assign(nxt.begin(), nxt.end());
    c.fulfilled = ful;
    out.push_back(std::move(c));
  }

  std::vector<Cover> expand(const std::vector<uint32_t>& state) const {
    std::vector<Cover> out;
    rec(state, {}, 0, 0, {}, 0, out);
    // exact duplicates add nothing
    std::sort(out.begin(), out.end(), [](const Cover& a, const Cover& b) {
      return std::tie(a.mask, a.bits, a.fulfilled, a.next) <
             std::tie(b.mask, b.bits, b.fulfilled, b.next);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Cover& a, const Cover& b) {
                            return a.mask == b.mask && a.bits == b.bits &&
                                   a.fulfilled == b.fulfilled &&
                                   a.next == b.next;
                          }),
              out.end());
    return out;
  }
};

}  // namespace

Nba ltl_to_nba(const Ltl& body, uint32_t num_atoms, uint32_t num_moved) {
  if (num_atoms + num_moved > kMaxLetterBits)
    fail(ErrKind::capacity,
         "alphabet needs " + std::to_string(num_atoms + num_moved) +
             " letter bits, limit is " + std::to_string(kMaxLetterBits));
  NnfPool pool;
  uint32_t root = pool.build(body, true, num_atoms);
  Tableau tab(pool, root);
  const uint32_t k = (uint32_t)tab.uf.size();

  // Obligation sets, then (set, counter) pairs after degeneralization.
  std::map<std::vector<uint32_t>, uint32_t> set_id;
  std::vector<std::vector<uint32_t>> sets;
  std::vector<std::vector<Cover>> covers;
  auto intern_set = [&](std::vector<uint32_t> s) {
    auto it = set_id.find(s);
    if (it != set_id.end()) return it->second;
    uint32_t id = (uint32_t)sets.size();
    set_id[s] = id;
    sets.push_back(std::move(s));
    return id;
  };
  uint32_t s0 = intern_set({root});
  for (uint32_t i = 0; i < sets.size(); ++i) {
    covers.push_back(tab.expand(sets[i]));
    for (const Cover& c : covers[i]) intern_set(c.next);
  }

  auto good = [&](const Cover& c, uint32_t t) {
    return (c.fulfilled >> t & 1) ||
           !std::binary_search(c.next.begin(), c.next.end(), tab.uf[t]);
  };

  Nba a;
  a.bits = num_atoms + num_moved;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> q_id;
  std::vector<std::pair<uint32_t, uint32_t>> q_of;
  auto intern_q = [&](uint32_t set, uint32_t cnt) {
    auto key = std::make_pair(set, cnt);
    auto it = q_id.find(key);
    if (it != q_id.end()) return it->second;
    uint32_t id = (uint32_t)q_of.size();
    q_id[key] = id;
    q_of.push_back(key);
    a.edges.emplace_back();
    a.accepting.push_back(cnt == k);
    return id;
  };
  a.init = intern_q(s0, 0);
  for (uint32_t q = 0; q < q_of.size(); ++q) {
    auto [set, cnt] = q_of[q];
    for (const Cover& c : covers[set]) {
      uint32_t j = cnt == k ? 0 : cnt;
      while (j < k && good(c, j)) ++j;
      uint32_t dst = intern_q(set_id.at(c.next), j);
      a.edges[q].push_back({c.mask, c.bits, dst});
    }
  }
  return a;
}

// ===========================================================================
// Structural pruning and the lasso membership check

namespace {

std::vector<bool> forward_reach(const Nba& a) {
  std::vector<bool> r(a.num_states(), false);
  std::deque<uint32_t> bfs{a.init};
  r[a.init] = true;
  while (!bfs.empty()) {
    uint32_t q = bfs.front();
    bfs.pop_front();
    for (const auto& e : a.edges[q])
      if (!r[e.dst]) {
        r[e.dst] = true;
        bfs.push_back(e.dst);
      }
  }
  return r;
}

}  // namespace

Nba prune_dead(const Nba& a) {
  uint32_t n = a.num_states();
  std::vector<bool> fwd = forward_reach(a);

  // Accepting states sitting on a cycle seed liveness.
  std::vector<std::vector<uint32_t>> rev(n);
  for (uint32_t q = 0; q < n; ++q)
    for (const auto& e : a.edges[q]) rev[e.dst].push_back(q);
  std::vector<bool> live(n, false);
  std::deque<uint32_t> bfs;
  for (uint32_t q = 0; q < n; ++q) {
    if (!a.accepting[q] || !fwd[q]) continue;
    // can q reach itself?
    std::vector<bool> seen(n, false);
    std::deque<uint32_t> d;
    for (const auto& e : a.edges[q])
      if (!seen[e.dst]) {
        seen[e.dst] = true;
        d.push_back(e.dst);
      }
    while (!d.empty()) {
      uint32_t x = d.front();
      d.pop_front();
      for (const auto& e : a.edges[x])
        if (!seen[e.dst]) {
          seen[e.dst] = true;
          d.push_back(e.dst);
        }
    }
    if (seen[q] && !live[q]) {
      live[q] = true;
      bfs.push_back(q);
    }
  }
  while (!bfs.empty()) {
    uint32_t q = bfs.front();
    bfs.pop_front();
    for (uint32_t p : rev[q])
      if (!live[p]) {
        live[p] = true;
        bfs.push_back(p);
      }
  }

  std::vector<uint32_t> remap(n, UINT32_MAX);
  Nba out;
  out.bits = a.bits;
  for (uint32_t q = 0; q < n; ++q) {
    if (!(fwd[q] && live[q]) && q != a.init) continue;
    remap[q] = (uint32_t)out.edges.size();
    out.edges.emplace_back();
    out.accepting.push_back(a.accepting[q]);
  }
  out.init = remap[a.init];
  for (uint32_t q = 0; q < n; ++q) {
    if (remap[q] == UINT32_MAX) continue;
    for (const auto& e : a.edges[q])
      if (remap[e.dst] != UINT32_MAX && live[e.dst])
        out.edges[remap[q]].push_back({e.mask, e.bits, remap[e.dst]});
  }
  return out;
}

bool nba_accepts(const Nba& a, const LassoWord& w) {
  AHC_CHECK(!w.loop.empty(), "lasso loop must be nonempty");
  const uint32_t P = (uint32_t)w.prefix.size(), L = (uint32_t)w.loop.size();
  const uint32_t N = P + L;
  auto letter = [&](uint32_t i) { return i < P ? w.prefix[i] : w.loop[i - P]; };
  auto nextp = [&](uint32_t i) { return i + 1 < N ? i + 1 : P; };
  auto node = [&](uint32_t q, uint32_t i) { return q * N + i; };

  std::vector<bool> reach(a.num_states() * N, false);
  std::deque<std::pair<uint32_t, uint32_t>> bfs{{a.init, 0}};
  reach[node(a.init, 0)] = true;
  while (!bfs.empty()) {
    auto [q, i] = bfs.front();
    bfs.pop_front();
    for (const auto& e : a.edges[q]) {
      if (!e.fires(letter(i))) continue;
      uint32_t m = node(e.dst, nextp(i));
      if (!reach[m]) {
        reach[m] = true;
        bfs.push_back({e.dst, nextp(i)});
      }
    }
  }

  // A reachable accepting product node in the loop region that can reach
  // itself closes an accepting run.
  for (uint32_t q = 0; q < a.num_states(); ++q) {
    if (!a.accepting[q]) continue;
    for (uint32_t i = P; i < N; ++i) {
      if (!reach[node(q, i)]) continue;
      std::vector<bool> seen(a.num_states() * N, false);
      std::deque<std::pair<uint32_t, uint32_t>> d{{q, i}};
      bool found = false;
      while (!d.empty() && !found) {
        auto [x, j] = d.front();
        d.pop_front();
        for (const auto& e : a.edges[x]) {
          if (!e.fires(letter(j))) continue;
          uint32_t m = node(e.dst, nextp(j));
          if (e.dst == q && nextp(j) == i) {
            found = true;
            break;
          }
          if (!seen[m]) {
            seen[m] = true;
            d.push_back({e.dst, nextp(j)});
          }
        }
      }
      if (found) return true;
    }
  }
  return false;
}

// ===========================================================================
// Determinization

namespace {

struct SN {
  uint32_t name = 0;
  bool marked = false;
  std::vector<uint32_t> states;  // sorted
  std::vector<SN> kids;
};

using Tree = std::optional<SN>;

void encode_node(const SN& n, std::vector<uint32_t>& out) {
  out.push_back(n.name);
  out.push_back(n.marked ? 1 : 0);
  out.push_back((uint32_t)n.states.size());
  out.insert(out.end(), n.states.begin(), n.states.end());
  out.push_back((uint32_t)n.kids.size());
  for (const SN& k : n.kids) encode_node(k, out);
}

std::vector<uint32_t> encode_tree(const Tree& t) {
  std::vector<uint32_t> out;
  if (t) encode_node(*t, out);
  return out;
}

void walk_names(const SN& n, std::set<uint32_t>& out) {
  out.insert(n.name);
  for (const SN& k : n.kids) walk_names(k, out);
}

struct StepEvents {
  std::vector<uint32_t> deleted;  // names alive at entry that vanished
  std::vector<uint32_t> marked;
};

struct Safra {
  const Nba& a;
  // tab[q][letter] = sorted successor set
  std::vector<std::vector<std::vector<uint32_t>>> tab;

  explicit Safra(const Nba& nba) : a(nba) {
    uint32_t letters = 1u << a.bits;
    tab.assign(a.num_states(), {});
    for (uint32_t q = 0; q < a.num_states(); ++q) {
      tab[q].assign(letters, {});
      for (uint32_t x = 0; x < letters; ++x) {
        std::set<uint32_t> s;
        for (const auto& e : a.edges[q])
          if (e.fires((Letter)x)) s.insert(e.dst);
        tab[q][x].assign(s.begin(), s.end());
      }
    }
  }

  bool has_accepting(const std::vector<uint32_t>& states) const {
    for (uint32_t q : states)
      if (a.accepting[q]) return true;
    return false;
  }

  std::vector<uint32_t> accepting_part(const std::vector<uint32_t>& states,
                                       bool keep) const {
    std::vector<uint32_t> out;
    for (uint32_t q : states)
      if (a.accepting[q] == keep) out.push_back(q);
    return out;
  }

  Tree step(const Tree& in, Letter x, StepEvents& ev) const {
    if (!in) return std::nullopt;
    SN t = *in;
    std::set<uint32_t> entry;
    walk_names(t, entry);
    std::set<uint32_t> used = entry;
    auto alloc = [&]() {
      uint32_t n = 0;
      while (used.count(n)) ++n;
      used.insert(n);
      return n;
    };

    // unmark and spawn: every node holding an accepting state gets a fresh
    // youngest child keeping exactly that accepting part.
    auto spawn = [&](auto&& self, SN& v) -> void {
      v.marked = false;
      std::optional<uint32_t> fresh;
      std::vector<uint32_t> fstates;
      if (has_accepting(v.states)) {
        fresh = alloc();
        fstates = accepting_part(v.states, true);
      }
      for (SN& k : v.kids) self(self, k);
      if (fresh) t_push(v, {*fresh, false, std::move(fstates), {}});
    };
    spawn(spawn, t);

    // powerset per node
    auto power = [&](auto&& self, SN& v) -> void {
      std::set<uint32_t> s;
      for (uint32_t q : v.states)
        s.insert(tab[q][x].begin(), tab[q][x].end());
      v.states.assign(s.begin(), s.end());
      for (SN& k : v.kids) self(self, k);
    };
    power(power, t);

    // horizontal merge: older siblings keep shared states; removal applies
    // to the whole younger subtree.
    auto steal = [&](auto&& self, SN& v) -> void {
      std::set<uint32_t> seen;
      for (SN& k : v.kids) {
        remove_states(k, seen);
        seen.insert(k.states.begin(), k.states.end());
      }
      for (SN& k : v.kids) self(self, k);
    };
    steal(steal, t);

    // drop empty nodes; nodes alive at entry count as deletion events
    auto prune = [&](auto&& self, SN& v) -> void {
      for (SN& k : v.kids) self(self, k);
      for (auto it = v.kids.begin(); it != v.kids.end();) {
        if (it->states.empty()) {
          if (entry.count(it->name)) ev.deleted.push_back(it->name);
          it = v.kids.erase(it);
        } else {
          ++it;
        }
      }
    };
    prune(prune, t);
    if (t.states.empty()) {
      for (uint32_t n : entry) ev.deleted.push_back(n);
      finish_events(ev);
      return std::nullopt;
    }

    // vertical merge: a node covered by its children is marked and its
    // descendants vanish.
    auto vmerge = [&](auto&& self, SN& v) -> void {
      if (!v.kids.empty()) {
        std::set<uint32_t> u;
        for (const SN& k : v.kids) u.insert(k.states.begin(), k.states.end());
        if (std::vector<uint32_t>(u.begin(), u.end()) == v.states) {
          v.marked = true;
          ev.marked.push_back(v.name);
          std::set<uint32_t> below;
          for (const SN& k : v.kids) walk_names(k, below);
          for (uint32_t n : below)
            if (entry.count(n)) ev.deleted.push_back(n);
          v.kids.clear();
          return;
        }
      }
      for (SN& k : v.kids) self(self, k);
    };
    vmerge(vmerge, t);
    finish_events(ev);
    return t;
  }

  static void t_push(SN& v, SN child) { v.kids.push_back(std::move(child)); }

  static void remove_states(SN& n, const std::set<uint32_t>& s) {
    if (!s.empty()) {
      n.states.erase(std::remove_if(n.states.begin(), n.states.end(),
                                    [&](uint32_t q) { return s.count(q); }),
                     n.states.end());
    }
    for (SN& k : n.kids) remove_states(k, s);
  }

  static void finish_events(StepEvents& ev) {
    std::sort(ev.deleted.begin(), ev.deleted.end());
    ev.deleted.erase(std::unique(ev.deleted.begin(), ev.deleted.end()),
                     ev.deleted.end());
    std::sort(ev.marked.begin(), ev.marked.end());
  }
};

void compact_priorities(Dpa& d) {
  std::set<uint32_t> used(d.priority.begin(), d.priority.end());
  std::map<uint32_t, uint32_t> to;
  uint32_t prev = 0, prev_new = 0;
  bool first = true;
  for (uint32_t p : used) {
    uint32_t np;
    if (first) {
      np = p % 2;
      first = false;
    } else {
      np = prev_new + ((p % 2) == (prev % 2) ? 0 : 1);
    }
    to[p] = np;
    prev = p;
    prev_new = np;
  }
  for (auto& p : d.priority) p = to[p];
}

// Strongly connected components of the subset `alive`, nontrivial ones
// only (a singleton counts when it has a self-loop). Iterative Tarjan.
std::vector<std::vector<uint32_t>> nontrivial_sccs(
    const Dpa& d, const std::vector<uint32_t>& members,
    const std::vector<char>& alive) {
  const uint32_t letters = 1u << d.bits;
  std::vector<std::vector<uint32_t>> out;
  std::vector<uint32_t> index(d.num_states(), UINT32_MAX), low(d.num_states());
  std::vector<char> on_stack(d.num_states(), 0);
  std::vector<uint32_t> stack;
  uint32_t next_index = 0;

  struct Frame {
    uint32_t q;
    uint32_t x;  // next letter to explore
  };
  for (uint32_t root : members) {
    if (index[root] != UINT32_MAX) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.x < letters) {
        uint32_t to = d.delta[f.q][f.x++];
        if (!alive[to]) continue;
        if (index[to] == UINT32_MAX) {
          index[to] = low[to] = next_index++;
          stack.push_back(to);
          on_stack[to] = 1;
          call.push_back({to, 0});
        } else if (on_stack[to]) {
          low[f.q] = std::min(low[f.q], index[to]);
        }
        continue;
      }
      uint32_t q = f.q;
      call.pop_back();
      if (!call.empty())
        low[call.back().q] = std::min(low[call.back().q], low[q]);
      if (low[q] != index[q]) continue;
      std::vector<uint32_t> comp;
      for (;;) {
        uint32_t w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
        if (w == q) break;
      }
      bool cyclic = comp.size() > 1;
      for (uint32_t x = 0; x < letters && !cyclic; ++x)
        cyclic = d.delta[q][x] == q;
      if (cyclic) out.push_back(std::move(comp));
    }
  }
  return out;
}

// Canonical priorities: inside each component peel the states carrying
// the minimal priority, hand them the smallest value of that parity at or
// above the enclosing level, and recurse on what survives. Every cycle
// keeps the parity of its minimal priority and the relative order across
// nested levels, so acceptance of every run is unchanged. States on no
// cycle get 0 outright; no settled run ever reads them.
void normalize_priorities(Dpa& d) {
  const uint32_t n = d.num_states();
  std::vector<uint32_t> canon(n, 0);
  std::vector<char> alive(n, 1);
  std::vector<uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  struct Job {
    std::vector<uint32_t> comp;
    uint32_t floor;
  };
  std::vector<Job> jobs;
  for (auto& c : nontrivial_sccs(d, all, alive))
    jobs.push_back({std::move(c), 0});

  std::vector<char> sub(n, 0);
  while (!jobs.empty()) {
    Job j = std::move(jobs.back());
    jobs.pop_back();
    uint32_t m = UINT32_MAX;
    for (uint32_t q : j.comp) m = std::min(m, d.priority[q]);
    uint32_t c = j.floor + (((j.floor ^ m) & 1) ? 1 : 0);
    std::vector<uint32_t> rest;
    for (uint32_t q : j.comp) {
      canon[q] = c;
      if (d.priority[q] != m) rest.push_back(q);
    }
    if (rest.empty()) continue;
    for (uint32_t q : rest) sub[q] = 1;
    for (auto& s : nontrivial_sccs(d, rest, sub)) jobs.push_back({std::move(s), c});
    for (uint32_t q : rest) sub[q] = 0;
  }
  d.priority = std::move(canon);
}

// Coarsest partition where merged states carry the same priority and
// pointwise-congruent successors. Every run through the quotient sees the
// exact same priority sequence as in the input, so acceptance is
// untouched; the construction above leaves many such twins behind.
void moore_minimize(Dpa& d) {
  const uint32_t n = d.num_states();
  const uint32_t letters = 1u << d.bits;
  std::vector<uint32_t> cls(n);
  {
    std::map<uint32_t, uint32_t> by_prio;
    for (uint32_t q = 0; q < n; ++q)
      cls[q] = by_prio.emplace(d.priority[q], (uint32_t)by_prio.size())
                   .first->second;
  }
  uint32_t num = 0;
  for (;;) {
    std::map<std::vector<uint32_t>, uint32_t> sig;
    std::vector<uint32_t> next(n);
    for (uint32_t q = 0; q < n; ++q) {
      std::vector<uint32_t> key;
      key.reserve(letters + 1);
      key.push_back(cls[q]);
      for (uint32_t x = 0; x < letters; ++x)
        key.push_back(cls[d.delta[q][x]]);
      next[q] = sig.emplace(std::move(key), (uint32_t)sig.size()).first->second;
    }
    bool stable = sig.size() == num;
    num = (uint32_t)sig.size();
    cls.swap(next);
    if (stable) break;
  }
  if (num == n) return;

  std::vector<uint32_t> rep(num, UINT32_MAX);
  for (uint32_t q = 0; q < n; ++q)
    if (rep[cls[q]] == UINT32_MAX) rep[cls[q]] = q;
  Dpa out;
  out.bits = d.bits;
  out.init = cls[d.init];
  out.delta.resize(num);
  out.priority.resize(num);
  for (uint32_t c = 0; c < num; ++c) {
    uint32_t q = rep[c];
    out.priority[c] = d.priority[q];
    out.delta[c].resize(letters);
    for (uint32_t x = 0; x < letters; ++x)
      out.delta[c][x] = cls[d.delta[q][x]];
  }
  d = std::move(out);
}

}  // namespace

Dpa determinize(const Nba& a, uint64_t max_states) {
  const uint32_t letters = 1u << a.bits;
  Safra sf(a);

  // Deterministic input only needs completion and Buechi priorities.
  bool det = true;
  for (uint32_t q = 0; q < a.num_states() && det; ++q)
    for (uint32_t x = 0; x < letters && det; ++x)
      det = sf.tab[q][x].size() <= 1;
  if (det) {
    Dpa d;
    d.bits = a.bits;
    d.init = a.init;
    uint32_t sink = a.num_states();
    if ((uint64_t)sink + 1 > max_states)
      fail(ErrKind::capacity, "determinization exceeds the state budget");
    d.delta.assign(sink + 1, std::vector<uint32_t>(letters, sink));
    d.priority.assign(sink + 1, 1);
    for (uint32_t q = 0; q < sink; ++q) {
      if (a.accepting[q]) d.priority[q] = 0;
      for (uint32_t x = 0; x < letters; ++x)
        if (!sf.tab[q][x].empty()) d.delta[q][x] = sf.tab[q][x][0];
    }
    return d;
  }

  // Safra trees with an appearance record over node names; record position
  // of the best event decides the transition priority, and the entering
  // priority becomes the state priority.
  const uint32_t neutral = 4 * a.num_states() + 5;  // odd, above any event
  struct Key {
    std::vector<uint32_t> tree;
    std::vector<uint32_t> record;
    uint32_t prio;
    bool operator<(const Key& o) const {
      return std::tie(tree, record, prio) <
             std::tie(o.tree, o.record, o.prio);
    }
  };
  std::map<Key, uint32_t> ids;
  std::vector<Key> keys;
  std::vector<Tree> trees;
  // States that differ only by node naming or by mark flags behave
  // identically: marks are recomputed from scratch on every step, and the
  // step function commutes with any renaming that keeps the seniority
  // order. Renaming each node to its record position therefore merges
  // them, and the record itself collapses to the identity permutation.
  auto canonicalize = [](Tree& t, std::vector<uint32_t>& rec) {
    if (!t) {
      rec.clear();
      return;
    }
    std::map<uint32_t, uint32_t> to;
    for (uint32_t n : rec) to.emplace(n, (uint32_t)to.size());
    auto walk = [&](auto&& self, SN& v) -> void {
      v.name = to.at(v.name);
      v.marked = false;
      for (SN& k : v.kids) self(self, k);
    };
    walk(walk, *t);
    std::iota(rec.begin(), rec.end(), 0);
  };
  auto intern = [&](Tree t, std::vector<uint32_t> rec, uint32_t prio) {
    canonicalize(t, rec);
    Key k{encode_tree(t), std::move(rec), prio};
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    uint32_t id = (uint32_t)keys.size();
    if (keys.size() + 1 > max_states)
      fail(ErrKind::capacity, "determinization exceeds the state budget");
    ids[k] = id;
    keys.push_back(std::move(k));
    trees.push_back(t);
    return id;
  };

  Tree t0 = SN{0, false, {a.init}, {}};
  uint32_t init = intern(t0, {0}, neutral);

  Dpa d;
  d.bits = a.bits;
  d.init = init;
  for (uint32_t s = 0; s < keys.size(); ++s) {
    d.delta.emplace_back(letters, 0);
    d.priority.push_back(keys[s].prio);
    for (uint32_t x = 0; x < letters; ++x) {
      StepEvents ev;
      Tree t1 = sf.step(trees[s], (Letter)x, ev);
      // interning below may grow keys, so take a copy
      const std::vector<uint32_t> rec = keys[s].record;
      auto pos_of = [&](const std::vector<uint32_t>& names) {
        uint32_t best = UINT32_MAX;
        for (uint32_t n : names) {
          for (uint32_t i = 0; i < rec.size(); ++i)
            if (rec[i] == n) best = std::min(best, i + 1);
        }
        return best;
      };
      uint32_t b = pos_of(ev.deleted);
      uint32_t g = pos_of(ev.marked);
      uint32_t prio;
      if (b <= g)
        prio = b == UINT32_MAX ? neutral : 2 * b - 1;
      else
        prio = 2 * g;

      std::vector<uint32_t> rec2;
      std::set<uint32_t> dead(ev.deleted.begin(), ev.deleted.end());
      for (uint32_t n : rec)
        if (!dead.count(n)) rec2.push_back(n);
      std::set<uint32_t> alive;
      if (t1) walk_names(*t1, alive);
      for (uint32_t n : alive)
        if (std::find(rec2.begin(), rec2.end(), n) == rec2.end())
          rec2.push_back(n);

      d.delta[s][x] = intern(t1, std::move(rec2), prio);
    }
  }
  normalize_priorities(d);
  moore_minimize(d);
  compact_priorities(d);
  return d;
}

bool dpa_accepts(const Dpa& d, const LassoWord& w) {
  AHC_CHECK(!w.loop.empty(), "lasso loop must be nonempty");
  uint32_t q = d.init;
  for (Letter x : w.prefix) q = d.delta[q][x];

  // Iterate the loop block until the entry state repeats; the repeating
  // block's minimal priority decides.
  std::map<uint32_t, uint32_t> seen_at;
  std::vector<uint32_t> iter_min;
  for (;;) {
    auto it = seen_at.find(q);
    if (it != seen_at.end()) {
      uint32_t m = UINT32_MAX;
      for (uint32_t i = it->second; i < iter_min.size(); ++i)
        m = std::min(m, iter_min[i]);
      return m % 2 == 0;
    }
    seen_at[q] = (uint32_t)iter_min.size();
    uint32_t m = UINT32_MAX;
    for (Letter x : w.loop) {
      q = d.delta[q][x];
      m = std::min(m, d.priority[q]);
    }
    iter_min.push_back(m);
  }
}

// ===========================================================================
// Textual dumps

namespace {

std::string guard_string(Letter mask, Letter bits, uint32_t nbits) {
  if (mask == 0) return "t";
  std::string s;
  for (uint32_t i = 0; i < nbits; ++i) {
    if (!(mask >> i & 1)) continue;
    if (!s.empty()) s += " & ";
    if (!(bits >> i & 1)) s += "!";
    s += std::to_string(i);
  }
  return s;
}

}  // namespace

std::string dump_nba(const Nba& a, const std::vector<std::string>& ap) {
  std::ostringstream o;
  o << "HOA: v1\n";
  o << "States: " << a.num_states() << "\n";
  o << "Start: " << a.init << "\n";
  o << "AP: " << ap.size();
  for (const auto& s : ap) o << " \"" << s << "\"";
  o << "\n";
  o << "Acceptance: 1 Inf(0)\n";
  o << "acc-name: Buchi\n";
  o << "--BODY--\n";
  for (uint32_t q = 0; q < a.num_states(); ++q) {
    o << "State: " << q;
    if (a.accepting[q]) o << " {0}";
    o << "\n";
    for (const auto& e : a.edges[q])
      o << "  [" << guard_string(e.mask, e.bits, a.bits) << "] " << e.dst
        << "\n";
  }
  o << "--END--\n";
  return o.str();
}

std::string dump_dpa(const Dpa& d, const std::vector<std::string>& ap) {
  uint32_t maxp = 0;
  for (uint32_t p : d.priority) maxp = std::max(maxp, p);
  std::ostringstream o;
  o << "HOA: v1\n";
  o << "States: " << d.num_states() << "\n";
  o << "Start: " << d.init << "\n";
  o << "AP: " << ap.size();
  for (const auto& s : ap) o << " \"" << s << "\"";
  o << "\n";
  o << "acc-name: parity min even " << (maxp + 1) << "\n";
  o << "--BODY--\n";
  for (uint32_t q = 0; q < d.num_states(); ++q) {
    o << "State: " << q << " {" << d.priority[q] << "}\n";
    for (uint32_t x = 0; x < d.delta[q].size(); ++x)
      o << "  [" << x << "] " << d.delta[q][x] << "\n";
  }
  o << "--END--\n";
  return o.str();
}

}  // namespace ahc
