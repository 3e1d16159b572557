// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include "fds/heap.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <queue>

namespace fds {

int ConcreteForestHeap::func_value(const Signature& sig, int func_sym,
                                   const std::vector<int>& args) const {
  int fi = func_sym - int(sig.loc_fields.size() + sig.data_fields.size());
  long idx = 0;
  for (int a : args) idx = idx * data_size + a;
  return func_table[size_t(fi)][size_t(idx)];
}

std::set<int> reach_set(const Signature& sig, const ReachSpec& spec,
                        const ConcreteForestHeap& h,
                        const ReachTriple& triple) {
  (void)spec;
  int stop = h.loc_init[size_t(triple.stop)];
  std::set<int> r;
  std::queue<int> q;
  for (int s : triple.start) {
    int l = h.loc_init[size_t(s)];
    if (l != stop && r.insert(l).second) q.push(l);
  }
  while (!q.empty()) {
    int l = q.front();
    q.pop();
    for (int p : triple.pointers) {
      int w = h.loc_field[size_t(p)][size_t(l)];
      if (w != stop && r.insert(w).second) q.push(w);
    }
  }
  return r;
}

std::set<int> reach_all(const Signature& sig, const ReachSpec& spec,
                        const ConcreteForestHeap& h) {
  std::set<int> r;
  for (const auto& t : spec.triples) {
    auto ri = reach_set(sig, spec, h, t);
    r.insert(ri.begin(), ri.end());
  }
  return r;
}

// ---------------------------------------------------------------------------
// is_forest: literal check over enumerated traversal terms.  A term is keyed
// by (start-or-stop variable, field path); expansion stops at repeated values
// and at the stop, so the enumeration is finite.

namespace {

struct TermEntry {
  std::vector<int> key;  // {var, f1, f2, ...}
  int value;
};

std::vector<TermEntry> traversal_terms(const ConcreteForestHeap& h,
                                       const ReachTriple& tr) {
  int stop = h.loc_init[size_t(tr.stop)];
  std::vector<TermEntry> out;
  out.push_back({{tr.stop}, stop});  // the stop constant is one of the terms
  std::set<int> expanded;
  std::queue<TermEntry> q;
  for (int s : tr.start) q.push({{s}, h.loc_init[size_t(s)]});
  while (!q.empty()) {
    TermEntry e = q.front();
    q.pop();
    out.push_back(e);
    if (e.value == stop) continue;            // never traverse past the stop
    if (!expanded.insert(e.value).second) continue;  // collision: keep term,
                                              // do not expand it again
    for (int p : tr.pointers) {
      TermEntry n;
      n.key = e.key;
      n.key.push_back(p);
      n.value = h.loc_field[size_t(p)][size_t(e.value)];
      q.push(n);
    }
  }
  return out;
}

}  // namespace

bool is_forest(const Signature& sig, const ReachSpec& spec,
               const ConcreteForestHeap& h, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  // (1) singleton stops hold by construction of ReachTriple.
  // (2) stop locations are fixpoints of every location field
  for (const auto& tr : spec.triples) {
    int stop = h.loc_init[size_t(tr.stop)];
    for (size_t f = 0; f < sig.loc_fields.size(); ++f)
      if (h.loc_field[f][size_t(stop)] != stop)
        return fail("stop location of '" + tr.name +
                    "' is not a field fixpoint");
  }
  // (3) distinct traversal terms denote distinct locations, except shared
  // start constants and values equal to both stops
  std::vector<std::vector<TermEntry>> terms;
  for (const auto& tr : spec.triples) terms.push_back(traversal_terms(h, tr));
  for (size_t i = 0; i < terms.size(); ++i) {
    int stop_i = h.loc_init[size_t(spec.triples[i].stop)];
    for (size_t j = i; j < terms.size(); ++j) {
      int stop_j = h.loc_init[size_t(spec.triples[j].stop)];
      for (size_t a = 0; a < terms[i].size(); ++a) {
        for (size_t b = (i == j ? a + 1 : size_t(0)); b < terms[j].size(); ++b) {
          const TermEntry& ti = terms[i][a];
          const TermEntry& tj = terms[j][b];
          if (i == j && ti.key == tj.key) continue;  // same term
          if (ti.value != tj.value) continue;
          if (ti.value == stop_i && tj.value == stop_j) continue;
          if (ti.key == tj.key && ti.key.size() == 1) {
            // identical start constant shared between the triples
            int v = ti.key[0];
            auto& si = spec.triples[i].start;
            auto& sj = spec.triples[j].start;
            if (std::count(si.begin(), si.end(), v) &&
                std::count(sj.begin(), sj.end(), v))
              continue;
          }
          return fail("traversal terms of '" + spec.triples[i].name +
                      "' and '" + spec.triples[j].name +
                      "' collide away from the stop");
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// run_execution

ConcreteTrace run_execution(const Signature& sig, const ReachSpec& spec,
                            const ConcreteForestHeap& h,
                            const std::vector<Stmt>& word) {
  ConcreteTrace tr;
  std::vector<int> val(size_t(sig.num_vars()));
  for (int v = 0; v < sig.num_loc_vars(); ++v) val[size_t(v)] = h.loc_init[size_t(v)];
  for (int v = sig.num_loc_vars(); v < sig.num_vars(); ++v)
    val[size_t(v)] = h.data_init[size_t(v - sig.num_loc_vars())];

  std::map<std::pair<int, int>, int> over;  // (field symbol, loc) -> value
  std::set<int> alloc = reach_all(sig, spec, h);
  int allocs = 0;

  auto read_field = [&](int f, int l) {
    auto it = over.find({f, l});
    if (it != over.end()) return it->second;
    if (l < h.num_static)
      return sig.is_loc_field(f)
                 ? h.loc_field[size_t(f)][size_t(l)]
                 : h.data_field[size_t(f) - sig.loc_fields.size()][size_t(l)];
    // unallocated/dynamic cell: location fields self-loop, data reads 0
    return sig.is_loc_field(f) ? l : 0;
  };

  for (size_t i = 0; i < word.size(); ++i) {
    const Stmt& s = word[i];
    auto deref_ok = [&](int l) {
      if (alloc.count(l)) return true;
      tr.violation = ViolationKind::Deref;
      tr.violation_at = int(i);
      return false;
    };
    switch (s.kind) {
      case StmtKind::Skip:
      case StmtKind::AssertFalse:
        break;
      case StmtKind::AssignVar:
        val[size_t(s.lhs)] = val[size_t(s.rhs)];
        break;
      case StmtKind::LoadLoc:
      case StmtKind::LoadData:
        if (!deref_ok(val[size_t(s.rhs)])) return tr;
        val[size_t(s.lhs)] = read_field(s.field, val[size_t(s.rhs)]);
        break;
      case StmtKind::StoreLoc:
      case StmtKind::StoreData:
        if (!deref_ok(val[size_t(s.lhs)])) return tr;
        over[{s.field, val[size_t(s.lhs)]}] = val[size_t(s.rhs)];
        break;
      case StmtKind::AssignFunc: {
        std::vector<int> args;
        for (int a : s.args) args.push_back(val[size_t(a)]);
        val[size_t(s.lhs)] = h.func_value(sig, s.func, args);
        break;
      }
      case StmtKind::Alloc: {
        int l = h.dyn_loc(allocs++);
        alloc.insert(l);
        val[size_t(s.lhs)] = l;
        break;
      }
      case StmtKind::Free: {
        int l = val[size_t(s.lhs)];
        if (!alloc.count(l)) {
          tr.violation = ViolationKind::Free;
          tr.violation_at = int(i);
          return tr;
        }
        alloc.erase(l);
        break;
      }
      case StmtKind::AssumeEq:
        if (val[size_t(s.lhs)] != val[size_t(s.rhs)]) {
          tr.feasible = false;
          tr.infeasible_at = int(i);
          return tr;
        }
        break;
      case StmtKind::AssumeNeq:
        if (val[size_t(s.lhs)] == val[size_t(s.rhs)]) {
          tr.feasible = false;
          tr.infeasible_at = int(i);
          return tr;
        }
        break;
    }
    ++tr.steps;
  }
  tr.final_vals = val;
  tr.allocations = allocs;
  return tr;
}

// ---------------------------------------------------------------------------
// random_forest

ConcreteForestHeap random_forest(const Signature& sig, const ReachSpec& spec,
                                 int max_nodes, std::mt19937_64& rng) {
  auto rnd = [&](int n) { return int(rng() % uint64_t(n)); };
  auto consts = spec.constants();
  std::set<int> const_set(consts.begin(), consts.end());

  for (int attempt = 0; attempt < 64; ++attempt) {
    ConcreteForestHeap h;
    std::vector<int> loc_of(size_t(sig.num_loc_vars()), -1);
    int n = 0;
    auto fresh = [&]() { return n++; };

    // stop constants: one location each (same variable, same location)
    std::map<int, int> stop_loc;
    for (const auto& tr : spec.triples)
      if (!stop_loc.count(tr.stop)) stop_loc[tr.stop] = fresh();
    for (auto& [v, l] : stop_loc) loc_of[size_t(v)] = l;

    // start constants: at their triple's stop sometimes, else a fresh root
    for (const auto& tr : spec.triples)
      for (int s : tr.start)
        if (loc_of[size_t(s)] < 0)
          loc_of[size_t(s)] =
              (n < max_nodes && rnd(5) != 0) ? fresh() : stop_loc[tr.stop];

    // trees: edges (field, loc) -> loc, grown by sprouting fresh children
    std::map<std::pair<int, int>, int> edge;
    std::vector<std::set<int>> tree(spec.triples.size());
    for (size_t i = 0; i < spec.triples.size(); ++i)
      for (int s : spec.triples[i].start)
        if (loc_of[size_t(s)] != stop_loc[spec.triples[i].stop])
          tree[i].insert(loc_of[size_t(s)]);

    int budget = max_nodes - n;
    int grow = budget > 0 ? rnd(budget + 1) : 0;
    for (int g = 0; g < grow && n < max_nodes; ++g) {
      if (spec.triples.empty()) break;
      size_t i = size_t(rnd(int(spec.triples.size())));
      const auto& tr = spec.triples[i];
      if (tree[i].empty() || tr.pointers.empty()) continue;
      std::vector<std::pair<int, int>> slots;
      for (int l : tree[i])
        for (int p : tr.pointers)
          if (!edge.count({p, l})) slots.push_back({p, l});
      if (slots.empty()) continue;
      auto [p, l] = slots[size_t(rnd(int(slots.size())))];
      int w = fresh();
      edge[{p, l}] = w;
      tree[i].insert(w);
    }

    // non-spec location variables: stop locations or off-tree self-loop hosts
    std::vector<int> off;
    for (int v = 0; v < sig.num_loc_vars(); ++v) {
      if (loc_of[size_t(v)] >= 0) continue;
      std::vector<int> cand;
      for (auto& [sv, l] : stop_loc) cand.push_back(l);
      for (int l : off) cand.push_back(l);
      if ((n < max_nodes && rnd(2) == 0) || cand.empty()) {
        off.push_back(n < max_nodes ? fresh() : 0);
        cand.push_back(off.back());
      }
      loc_of[size_t(v)] = cand[size_t(rnd(int(cand.size())))];
    }

    h.num_static = std::max(n, 1);
    if (n == 0) n = 1;  // degenerate signature with no variables
    h.loc_init = loc_of;
    for (auto& l : h.loc_init)
      if (l < 0) l = 0;

    std::set<int> stop_set, off_set(off.begin(), off.end());
    for (auto& [v, l] : stop_loc) stop_set.insert(l);

    // field tables: stop locations self-loop on everything; tree slots follow
    // the grown edges and default to the triple's stop; everything else random
    h.loc_field.assign(sig.loc_fields.size(), std::vector<int>(size_t(h.num_static)));
    for (size_t f = 0; f < sig.loc_fields.size(); ++f) {
      for (int l = 0; l < h.num_static; ++l) {
        int tgt;
        auto it = edge.find({int(f), l});
        if (it != edge.end()) {
          tgt = it->second;
        } else if (stop_set.count(l) || off_set.count(l)) {
          tgt = l;  // stop fixpoint / off-tree host
        } else {
          // default unset traversal slots to the triple's stop
          int def = -1;
          for (size_t i = 0; i < spec.triples.size(); ++i)
            if (tree[i].count(l) &&
                std::count(spec.triples[i].pointers.begin(),
                           spec.triples[i].pointers.end(), int(f)))
              def = stop_loc[spec.triples[i].stop];
          tgt = def >= 0 ? def : rnd(h.num_static);
        }
        h.loc_field[f][size_t(l)] = tgt;
      }
    }

    h.data_size = 1 + rnd(3);
    h.data_init.resize(sig.data_vars.size());
    for (auto& d : h.data_init) d = rnd(h.data_size);
    h.data_field.assign(sig.data_fields.size(),
                        std::vector<int>(size_t(h.num_static)));
    for (auto& row : h.data_field)
      for (auto& d : row) d = rnd(h.data_size);
    h.func_table.resize(sig.funcs.size());
    for (size_t fi = 0; fi < sig.funcs.size(); ++fi) {
      long cells = 1;
      for (int r = 0; r < sig.func_arity[fi]; ++r) cells *= h.data_size;
      h.func_table[fi].resize(size_t(cells));
      for (auto& d : h.func_table[fi]) d = rnd(h.data_size);
    }

    if (is_forest(sig, spec, h)) return h;
  }

  // fallback: collapse everything onto one self-looping location
  ConcreteForestHeap h;
  h.num_static = 1;
  h.data_size = 1;
  h.loc_init.assign(size_t(sig.num_loc_vars()), 0);
  h.data_init.assign(sig.data_vars.size(), 0);
  h.loc_field.assign(sig.loc_fields.size(), {0});
  h.data_field.assign(sig.data_fields.size(), {0});
  h.func_table.resize(sig.funcs.size());
  for (size_t fi = 0; fi < sig.funcs.size(); ++fi) h.func_table[fi] = {0};
  assert(is_forest(sig, spec, h));
  return h;
}

// ---------------------------------------------------------------------------
// enumerate_forests: canonical growth (locations appear in discovery order),
// so heaps are produced exactly once up to isomorphism of static locations.

namespace {

struct EnumCtx {
  const Signature& sig;
  const ReachSpec& spec;
  int max_nodes;
  long budget;
  std::vector<ConcreteForestHeap>* out;

  std::vector<int> loc_of;          // var -> loc
  int nlocs = 0;
  std::vector<uint32_t> reached;    // loc -> triple bitmask (tree membership)
  std::vector<bool> is_stop, is_off;
  std::vector<int> stop_loc;        // triple -> loc
  std::map<std::pair<int, int>, int> edges;  // (field, loc) -> target

  void emit_structure();
  void fill_slots(size_t slot, std::vector<std::pair<int, int>>& slots);
  void assign_vars(int v);
};

void EnumCtx::assign_vars(int v) {
  if (v == sig.num_loc_vars()) {
    // derive per-triple roles, then fill field slots in discovery order
    stop_loc.assign(spec.triples.size(), -1);
    is_stop.assign(size_t(nlocs), false);
    is_off.assign(size_t(nlocs), false);
    reached.assign(size_t(nlocs), 0);
    std::vector<bool> hosts_spec(size_t(nlocs), false);
    for (size_t i = 0; i < spec.triples.size(); ++i) {
      stop_loc[i] = loc_of[size_t(spec.triples[i].stop)];
      is_stop[size_t(stop_loc[i])] = true;
      hosts_spec[size_t(stop_loc[i])] = true;
      for (int s : spec.triples[i].start) hosts_spec[size_t(loc_of[size_t(s)])] = true;
    }
    for (size_t i = 0; i < spec.triples.size(); ++i)
      for (int s : spec.triples[i].start) {
        int l = loc_of[size_t(s)];
        if (l != stop_loc[i]) reached[size_t(l)] |= (1u << i);
      }
    // non-spec variables must sit at stops or off-tree hosts
    for (int w = 0; w < sig.num_loc_vars(); ++w) {
      if (spec.is_constant(w)) continue;
      int l = loc_of[size_t(w)];
      if (!hosts_spec[size_t(l)]) is_off[size_t(l)] = true;
      else if (!is_stop[size_t(l)]) return;  // would alias a tree root
    }
    std::vector<std::pair<int, int>> slots;
    int nf = int(sig.loc_fields.size());
    for (int l = 0; l < nlocs; ++l)
      for (int f = 0; f < nf; ++f) slots.push_back({l, f});
    fill_slots(0, slots);
    return;
  }
  // canonical: an existing location or the next fresh one
  for (int l = 0; l <= nlocs && l < max_nodes; ++l) {
    loc_of[size_t(v)] = l;
    int saved = nlocs;
    if (l == nlocs) ++nlocs;
    assign_vars(v + 1);
    nlocs = saved;
  }
}

void EnumCtx::fill_slots(size_t slot, std::vector<std::pair<int, int>>& slots) {
  if (slot == slots.size()) {
    emit_structure();
    return;
  }
  auto [l, f] = slots[slot];
  auto with = [&](int target, uint32_t reach_bits) {
    edges[{f, l}] = target;
    int saved_n = nlocs;
    size_t saved_slots = slots.size();
    uint32_t saved_reach = 0;
    bool fresh = target == saved_n;
    if (fresh) {
      ++nlocs;
      reached.push_back(reach_bits);
      is_stop.push_back(false);
      is_off.push_back(false);
      for (int nf = 0; nf < int(sig.loc_fields.size()); ++nf)
        slots.push_back({target, nf});
    } else if (reach_bits) {
      saved_reach = reached[size_t(target)];
      reached[size_t(target)] |= reach_bits;
    }
    fill_slots(slot + 1, slots);
    if (fresh) {
      nlocs = saved_n;
      reached.pop_back();
      is_stop.pop_back();
      is_off.pop_back();
      slots.resize(saved_slots);
    } else if (reach_bits) {
      reached[size_t(target)] = saved_reach;
    }
    edges.erase({f, l});
  };

  if (is_stop[size_t(l)] || is_off[size_t(l)]) {
    with(l, 0);  // stop fixpoint / off-tree self-loop policy
    return;
  }
  // triples whose traversal this slot belongs to
  std::vector<size_t> T;
  for (size_t i = 0; i < spec.triples.size(); ++i)
    if ((reached[size_t(l)] >> i) & 1 &&
        std::count(spec.triples[i].pointers.begin(),
                   spec.triples[i].pointers.end(), f))
      T.push_back(i);
  if (T.empty()) {
    // non-traversal slot on a tree node: any existing location
    for (int t = 0; t < nlocs; ++t) with(t, 0);
    return;
  }
  // common stop target (valid when all involved stops coincide)
  bool same_stop = true;
  for (size_t i : T) same_stop &= stop_loc[T[0]] == stop_loc[i];
  if (same_stop) with(stop_loc[T[0]], 0);
  // fresh child extends exactly one traversal
  if (T.size() == 1 && nlocs < max_nodes) with(nlocs, 1u << T[0]);
}

void EnumCtx::emit_structure() {
  ConcreteForestHeap h;
  h.num_static = std::max(nlocs, 1);
  h.loc_init = loc_of;
  h.loc_field.assign(sig.loc_fields.size(),
                     std::vector<int>(size_t(h.num_static), 0));
  for (auto& [key, tgt] : edges)
    h.loc_field[size_t(key.first)][size_t(key.second)] = tgt;
  h.data_size = (sig.data_vars.empty() && sig.data_fields.empty() &&
                 sig.funcs.empty())
                    ? 1
                    : 2;

  // enumerate all data interpretations over the fixed domain
  std::vector<int*> cells;
  h.data_init.assign(sig.data_vars.size(), 0);
  for (auto& d : h.data_init) cells.push_back(&d);
  h.data_field.assign(sig.data_fields.size(),
                      std::vector<int>(size_t(h.num_static), 0));
  for (auto& row : h.data_field)
    for (auto& d : row) cells.push_back(&d);
  h.func_table.resize(sig.funcs.size());
  for (size_t fi = 0; fi < sig.funcs.size(); ++fi) {
    long n = 1;
    for (int r = 0; r < sig.func_arity[fi]; ++r) n *= h.data_size;
    h.func_table[fi].assign(size_t(n), 0);
    for (auto& d : h.func_table[fi]) cells.push_back(&d);
  }

  std::function<void(size_t)> spin = [&](size_t i) {
    if (i == cells.size()) {
      if (!is_forest(sig, spec, h)) return;  // safety net for exotic configs
      if (long(out->size()) >= budget)
        throw EnumBudgetExceeded("enumerate_forests: budget exceeded");
      out->push_back(h);
      return;
    }
    for (int v = 0; v < h.data_size; ++v) {
      *cells[i] = v;
      spin(i + 1);
    }
  };
  spin(0);
}

}  // namespace

std::vector<ConcreteForestHeap> enumerate_forests(const Signature& sig,
                                                  const ReachSpec& spec,
                                                  int max_nodes, long budget) {
  std::vector<ConcreteForestHeap> out;
  EnumCtx ctx{sig, spec, max_nodes, budget, &out};
  ctx.loc_of.assign(size_t(sig.num_loc_vars()), 0);
  if (sig.num_loc_vars() == 0) {
    ctx.nlocs = 0;
    std::vector<std::pair<int, int>> slots;
    ctx.emit_structure();
    return out;
  }
  ctx.assign_vars(0);
  return out;
}

}  // namespace fds
