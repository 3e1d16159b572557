// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include "fds/fixpoint.hpp"

#include <deque>
#include <unordered_set>

namespace fds {

bool StateBag::insert(const Signature& /*sig*/, AnalysisState st,
                      std::vector<Stmt> trace) {
  if (!st.live()) return false;
  std::string key = canonical_form(st);
  auto it = states.find(key);
  if (it != states.end()) return false;
  states.emplace(std::move(key), TracedState{std::move(st), std::move(trace)});
  return true;
}

StateBag loop_fixpoint(const Signature& sig, StateBag in,
                       const std::function<StateBag(const StateBag&)>& step_iter) {
  StateBag head = std::move(in);
  for (;;) {
    StateBag next = step_iter(head);
    bool changed = false;
    for (auto& [key, ts] : next.states)
      changed |= head.insert(sig, std::move(ts.state), std::move(ts.trace));
    if (!changed) return head;
  }
}

namespace {

struct Halted {
  Verdict v;
};

struct Engine {
  const Program& p;
  const AnalyzeOptions& opts;
  int peak = 0;
  std::unordered_set<std::string> explored;
  std::vector<LoopInvariant> invariants;
  int next_loop_id = 0;

  void observe(const StateBag& bag) {
    peak = std::max(peak, int(bag.size()));
    if (long(bag.size()) > opts.bag_cap)
      throw BagCapExceeded("state bag exceeded " + std::to_string(opts.bag_cap));
  }

  StateBag apply_stmt(const StateBag& in, const Stmt& s) {
    StateBag out;
    for (const auto& [key, ts] : in.states) {
      if (s.kind == StmtKind::AssertFalse) {
        Verdict v;
        v.kind = VerdictKind::AssertionViolated;
        v.trace = ts.trace;
        v.trace.push_back(s);
        throw Halted{std::move(v)};
      }
      CoherenceFlag flag = CoherenceFlag::None;
      AnalysisState next =
          step_with_coherence(p.sig, p.spec, ts.state, s, &flag);
      if (flag != CoherenceFlag::None) {
        Verdict v;
        v.kind = VerdictKind::NotStreamingCoherent;
        v.trace = ts.trace;
        v.trace.push_back(s);
        throw Halted{std::move(v)};
      }
      if (next.kind == AnalysisState::Kind::Unsafe) {
        Verdict v;
        v.kind = VerdictKind::MemoryUnsafe;
        v.trace = ts.trace;
        v.trace.push_back(s);
        throw Halted{std::move(v)};
      }
      if (next.kind == AnalysisState::Kind::Infeasible) continue;
      explored.insert(canonical_form(next));
      std::vector<Stmt> trace = ts.trace;
      trace.push_back(s);
      out.insert(p.sig, std::move(next), std::move(trace));
    }
    observe(out);
    return out;
  }

  StateBag apply_word(StateBag in, const std::vector<Stmt>& word) {
    for (const Stmt& s : word) in = apply_stmt(in, s);
    return in;
  }

  // Union over the guard disjuncts of the (possibly negated) condition.
  StateBag apply_guard(const StateBag& in, const Cond& c, bool negate) {
    StateBag out;
    for (const auto& word : nnf_guards(c, negate)) {
      StateBag r = apply_word(in, word);
      for (auto& [key, ts] : r.states)
        out.insert(p.sig, std::move(ts.state), std::move(ts.trace));
    }
    observe(out);
    return out;
  }

  StateBag eval(const Node& n, StateBag in) {
    switch (n.kind) {
      case Node::Kind::Skip:
        return in;
      case Node::Kind::Atomic:
        return apply_stmt(in, n.stmt);
      case Node::Kind::AssertFalse: {
        Stmt s;
        s.kind = StmtKind::AssertFalse;
        return apply_stmt(in, s);
      }
      case Node::Kind::Assume:
        return apply_guard(in, *n.cond, false);
      case Node::Kind::Seq:
        for (const auto& k : n.kids) in = eval(*k, std::move(in));
        return in;
      case Node::Kind::If: {
        StateBag then_out = eval(*n.kids[0], apply_guard(in, *n.cond, false));
        StateBag else_out = eval(*n.kids[1], apply_guard(in, *n.cond, true));
        for (auto& [key, ts] : else_out.states)
          then_out.insert(p.sig, std::move(ts.state), std::move(ts.trace));
        observe(then_out);
        return then_out;
      }
      case Node::Kind::While: {
        int loop_id = next_loop_id++;
        StateBag head = loop_fixpoint(
            p.sig, std::move(in), [&](const StateBag& h) {
              return eval(*n.kids[0], apply_guard(h, *n.cond, false));
            });
        observe(head);
        if (opts.want_invariants) record_invariant(loop_id, *n.cond, head);
        return apply_guard(head, *n.cond, true);
      }
    }
    return in;
  }

  void record_invariant(int loop_id, const Cond& guard, const StateBag& head) {
    LoopInvariant inv;
    inv.loop_id = loop_id;
    inv.guard = cond_to_string(p.sig, guard);
    for (const auto& [key, ts] : head.states)
      inv.states.push_back(summarize(ts.state));
    invariants.push_back(std::move(inv));
  }

  InvariantState summarize(const AnalysisState& q) const {
    InvariantState out;
    std::map<int, std::vector<int>> classes;
    for (int v = 0; v < p.sig.num_vars(); ++v)
      classes[q.class_of(v)].push_back(v);
    for (auto& [c, mem] : classes) {
      if (mem.size() < 2) continue;
      std::vector<std::string> names;
      for (int v : mem) names.push_back(p.sig.var_name(v));
      out.equalities.push_back(std::move(names));
    }
    for (auto& [a, b] : q.diseq)
      out.disequalities.push_back({p.sig.var_name(a), p.sig.var_name(b)});
    for (int v = 0; v < p.sig.num_loc_vars(); ++v) {
      int c = q.class_of(v);
      std::string region = "omega";
      for (size_t i = 0; i < q.yes.size(); ++i) {
        if (q.yes[i].count(c)) region = "inside(" + p.spec.triples[i].name + ")";
        if (q.maybe[i].count(c))
          region = "frontier(" + p.spec.triples[i].name + ")";
      }
      if (q.no.count(c)) region = "unallocated";
      if (q.allocd.count(c)) region = "fresh";
      out.membership[p.sig.var_name(v)] = region;
    }
    return out;
  }
};

}  // namespace

Verdict analyze(const Program& p, const AnalyzeOptions& opts) {
  Engine eng{p, opts};
  Verdict v;
  try {
    StateBag init;
    init.insert(p.sig, initial_state(p.sig, p.spec), {});
    eng.explored.insert(init.states.begin()->first);
    eng.observe(init);
    StateBag out = eng.eval(*p.body, std::move(init));
    v.kind = VerdictKind::MemorySafe;
    v.final_states = int(out.size());
  } catch (Halted& h) {
    v = std::move(h.v);
    if (opts.minimize_trace) {
      auto w = shortest_counterexample(p, v.kind);
      if (w) v.trace = std::move(*w);
    }
  }
  v.peak_states = eng.peak;
  v.states_explored = long(eng.explored.size());
  v.invariants = std::move(eng.invariants);
  return v;
}

std::optional<std::vector<Stmt>> shortest_counterexample(const Program& p,
                                                         VerdictKind kind) {
  Cfa cfa = lower_to_cfa(p);
  struct QItem {
    int node;
    AnalysisState state;
    int parent;  // index into items
    int via;     // edge index
  };
  std::vector<QItem> items;
  std::unordered_set<std::string> visited;
  auto push = [&](int node, AnalysisState st, int parent, int via) {
    std::string key = std::to_string(node) + "#" + canonical_form(st);
    if (!visited.insert(std::move(key)).second) return;
    items.push_back({node, std::move(st), parent, via});
  };
  push(cfa.entry, initial_state(p.sig, p.spec), -1, -1);
  auto rebuild = [&](int idx, const Stmt& last) {
    std::vector<Stmt> w{last};
    for (int i = idx; items[size_t(i)].parent >= 0; i = items[size_t(i)].parent)
      w.push_back(cfa.edges[size_t(items[size_t(i)].via)].stmt);
    std::reverse(w.begin(), w.end());
    return w;
  };
  for (size_t head = 0; head < items.size(); ++head) {
    // items[head] may be invalidated by push; copy what we need
    int node = items[head].node;
    AnalysisState cur = items[head].state;
    for (int ei : cfa.out[size_t(node)]) {
      const CfaEdge& e = cfa.edges[size_t(ei)];
      if (e.stmt.kind == StmtKind::AssertFalse) {
        if (kind == VerdictKind::AssertionViolated)
          return rebuild(int(head), e.stmt);
        continue;
      }
      CoherenceFlag flag = CoherenceFlag::None;
      AnalysisState next =
          step_with_coherence(p.sig, p.spec, cur, e.stmt, &flag);
      if (flag != CoherenceFlag::None &&
          kind == VerdictKind::NotStreamingCoherent)
        return rebuild(int(head), e.stmt);
      if (next.kind == AnalysisState::Kind::Unsafe) {
        if (kind == VerdictKind::MemoryUnsafe) return rebuild(int(head), e.stmt);
        continue;
      }
      if (next.kind == AnalysisState::Kind::Infeasible) continue;
      push(e.to, std::move(next), int(head), ei);
    }
  }
  return std::nullopt;
}

std::string verdict_kind_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::MemorySafe: return "memory-safe";
    case VerdictKind::MemoryUnsafe: return "memory-unsafe";
    case VerdictKind::NotStreamingCoherent: return "not-streaming-coherent";
    case VerdictKind::AssertionViolated: return "assertion-violated";
  }
  return "?";
}

}  // namespace fds
