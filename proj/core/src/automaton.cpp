// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include "fds/automaton.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace fds {

std::vector<int> AnalysisState::class_members(int c) const {
  std::vector<int> out;
  for (size_t v = 0; v < cls.size(); ++v)
    if (cls[v] == c) out.push_back(int(v));
  return out;
}

bool AnalysisState::operator==(const AnalysisState& o) const {
  if (kind != o.kind) return false;
  if (kind != Kind::Live) return true;
  return cls == o.cls && diseq == o.diseq && ptab == o.ptab && yes == o.yes &&
         maybe == o.maybe && no == o.no && allocd == o.allocd &&
         omega == o.omega && tracker == o.tracker;
}

AnalysisState initial_state(const Signature& sig, const ReachSpec& spec) {
  AnalysisState q;
  q.kind = AnalysisState::Kind::Live;
  q.cls.resize(size_t(sig.num_vars()));
  for (int v = 0; v < sig.num_vars(); ++v) q.cls[size_t(v)] = v;
  q.yes.assign(spec.triples.size(), {});
  q.maybe.assign(spec.triples.size(), {});
  std::set<int> placed;
  for (const auto& t : spec.triples) {
    placed.insert(t.stop);
    q.no.insert(t.stop);
  }
  for (size_t i = 0; i < spec.triples.size(); ++i)
    for (int s : spec.triples[i].start)
      if (!q.no.count(s) && placed.insert(s).second) q.maybe[i].insert(s);
  for (int v = 0; v < sig.num_loc_vars(); ++v)
    if (!q.no.count(v) && !placed.count(v)) q.omega.insert(v);
  return q;
}

namespace {

using PKey = std::pair<int, std::vector<int>>;

enum class Tag : uint8_t { Yes, Maybe, No, Alloc, Omega };
struct Membership {
  Tag tag = Tag::Omega;
  int idx = 0;  // triple index for Yes/Maybe
};

// Precedence when merged classes carry different memberships.
Membership merge_membership(Membership a, Membership b) {
  auto rank = [](const Membership& m) {
    switch (m.tag) {
      case Tag::No: return 0;
      case Tag::Alloc: return 1;
      case Tag::Yes: return 2 + 2 * m.idx;
      case Tag::Maybe: return 1000 + m.idx;
      case Tag::Omega: return 1 << 20;
    }
    return 1 << 20;
  };
  return rank(a) <= rank(b) ? a : b;
}

// Mutable transition workspace with stable temporary class labels.
struct Builder {
  const Signature& sig;
  const ReachSpec& spec;
  std::vector<int> cls;
  std::set<std::pair<int, int>> diseq;
  std::map<PKey, int> ptab;
  std::map<int, Membership> member;  // loc class label -> region
  CoherenceTracker tracker;
  int next_fresh;

  Builder(const Signature& s, const ReachSpec& sp, const AnalysisState& q)
      : sig(s), spec(sp), cls(q.cls), diseq(q.diseq), ptab(q.ptab),
        tracker(q.tracker), next_fresh(s.num_vars()) {
    for (size_t i = 0; i < q.yes.size(); ++i)
      for (int c : q.yes[i]) member[c] = {Tag::Yes, int(i)};
    for (size_t i = 0; i < q.maybe.size(); ++i)
      for (int c : q.maybe[i]) member[c] = {Tag::Maybe, int(i)};
    for (int c : q.no) member[c] = {Tag::No, 0};
    for (int c : q.allocd) member[c] = {Tag::Alloc, 0};
    for (int c : q.omega) member[c] = {Tag::Omega, 0};
  }

  bool alive(int label) const {
    return std::find(cls.begin(), cls.end(), label) != cls.end();
  }

  std::vector<int> live_loc_labels() const {
    std::set<int> out;
    for (int v = 0; v < sig.num_loc_vars(); ++v) out.insert(cls[size_t(v)]);
    return {out.begin(), out.end()};
  }

  void add_diseq(int a, int b) {
    if (a == b) return;
    diseq.insert({std::min(a, b), std::max(a, b)});
  }

  // Detach x from its class; if the class dies, clean up and record drops.
  void remove_var(int x) {
    int label = cls[size_t(x)];
    cls[size_t(x)] = -1;
    if (alive(label)) return;
    class_died(label);
  }

  void class_died(int label) {
    for (auto it = diseq.begin(); it != diseq.end();)
      it = (it->first == label || it->second == label) ? diseq.erase(it) : ++it;
    member.erase(label);
    for (auto it = ptab.begin(); it != ptab.end();) {
      bool arg_dead = std::count(it->first.second.begin(),
                                 it->first.second.end(), label) > 0;
      if (arg_dead) {
        it = ptab.erase(it);
      } else if (it->second == label) {
        // result vacated while the key classes live: a dropped application
        tracker.dropped.insert(it->first);
        if (sig.symbol_sort(it->first.first) == Sort::Data)
          for (int a : it->first.second)
            if (is_data_label(a)) tracker.dropped_super.insert(a);
        it = ptab.erase(it);
      } else {
        ++it;
      }
    }
    for (auto it = tracker.dropped.begin(); it != tracker.dropped.end();)
      it = std::count(it->second.begin(), it->second.end(), label)
               ? tracker.dropped.erase(it)
               : ++it;
    tracker.dropped_super.erase(label);
  }

  bool is_data_label(int label) const {
    for (int v = sig.num_loc_vars(); v < sig.num_vars(); ++v)
      if (cls[size_t(v)] == label) return true;
    return false;
  }

  int fresh_class(int x) {
    int label = next_fresh++;
    cls[size_t(x)] = label;
    return label;
  }

  void join(int x, int label) { cls[size_t(x)] = label; }

  void set_ptab(const PKey& key, int target) {
    ptab[key] = target;
    tracker.dropped.erase(key);  // entry present again: marker invariant
  }

  // Merge the pending label pairs, close congruence through ptab, and detect
  // feasibility conflicts.  Returns false when a disequality collapses.
  bool merge_and_close(std::vector<std::pair<int, int>> pending) {
    std::map<int, int> parent;
    auto find = [&](int x) {
      while (parent.count(x) && parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto unite = [&](int a, int b) {
      a = find(a);
      b = find(b);
      if (a == b) return false;
      if (a > b) std::swap(a, b);
      parent[b] = a;
      parent[a] = a;
      return true;
    };
    for (auto& [a, b] : pending) unite(a, b);
    // local congruence closure through the map table
    bool changed = true;
    while (changed) {
      changed = false;
      std::map<PKey, int> m;
      for (auto& [key, tgt] : ptab) {
        PKey k{key.first, {}};
        for (int a : key.second) k.second.push_back(find(a));
        int t = find(tgt);
        auto it = m.find(k);
        if (it == m.end()) m[k] = t;
        else if (it->second != t) changed |= unite(it->second, t);
      }
      if (!changed) ptab = std::move(m);
    }
    for (auto& c : cls)
      if (c >= 0) c = find(c);
    // memberships merge with precedence
    std::map<int, Membership> nm;
    for (auto& [label, m] : member) {
      int r = find(label);
      auto it = nm.find(r);
      nm[r] = it == nm.end() ? m : merge_membership(it->second, m);
    }
    member = std::move(nm);
    // tracker remap
    CoherenceTracker nt;
    for (auto& key : tracker.dropped) {
      PKey k{key.first, {}};
      for (int a : key.second) k.second.push_back(find(a));
      if (!ptab.count(k)) nt.dropped.insert(k);
    }
    for (int c : tracker.dropped_super) nt.dropped_super.insert(find(c));
    tracker = std::move(nt);
    // disequalities: remap and detect conflicts
    std::set<std::pair<int, int>> nd;
    bool feasible = true;
    for (auto& [a, b] : diseq) {
      int x = find(a), y = find(b);
      if (x == y) feasible = false;
      nd.insert({std::min(x, y), std::max(x, y)});
    }
    diseq = std::move(nd);
    return feasible;
  }

  // A frontier class proven distinct from its stop lies inside the tree:
  // move it to yes and separate it from every other location class.  The
  // disequality may arrive indirectly (e.g. x != y followed by y = stop), so
  // this runs on every state rebuild, to a fixpoint.
  void promote_stop_diseqs() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < spec.triples.size(); ++i) {
        int cstop = cls[size_t(spec.triples[i].stop)];
        for (auto& [label, m] : member) {
          if (m.tag != Tag::Maybe || m.idx != int(i) || label == cstop)
            continue;
          if (!diseq.count({std::min(label, cstop), std::max(label, cstop)}))
            continue;
          m = {Tag::Yes, int(i)};
          for (int l : live_loc_labels())
            if (l != label) add_diseq(label, l);
          changed = true;
        }
      }
    }
  }

  AnalysisState finalize() {
    promote_stop_diseqs();
    // canonical labels: least member variable id
    std::map<int, int> label;
    for (int v = 0; v < sig.num_vars(); ++v) {
      int c = cls[size_t(v)];
      assert(c >= 0);
      auto it = label.find(c);
      if (it == label.end() || it->second > v) label[c] = v;
    }
    AnalysisState q;
    q.kind = AnalysisState::Kind::Live;
    q.cls.resize(cls.size());
    for (size_t v = 0; v < cls.size(); ++v) q.cls[v] = label.at(cls[v]);
    for (auto& [a, b] : diseq) {
      int x = label.at(a), y = label.at(b);
      q.diseq.insert({std::min(x, y), std::max(x, y)});
    }
    for (auto& [key, tgt] : ptab) {
      PKey k{key.first, {}};
      for (int a : key.second) k.second.push_back(label.at(a));
      q.ptab[k] = label.at(tgt);
    }
    q.yes.assign(spec.triples.size(), {});
    q.maybe.assign(spec.triples.size(), {});
    for (auto& [c, m] : member) {
      if (!label.count(c)) continue;  // dead label safety
      int l = label.at(c);
      switch (m.tag) {
        case Tag::Yes: q.yes[size_t(m.idx)].insert(l); break;
        case Tag::Maybe: q.maybe[size_t(m.idx)].insert(l); break;
        case Tag::No: q.no.insert(l); break;
        case Tag::Alloc: q.allocd.insert(l); break;
        case Tag::Omega: q.omega.insert(l); break;
      }
    }
    for (auto& key : tracker.dropped) {
      PKey k{key.first, {}};
      bool ok = true;
      for (int a : key.second) {
        if (!label.count(a)) { ok = false; break; }
        k.second.push_back(label.at(a));
      }
      if (ok) q.tracker.dropped.insert(k);
    }
    for (int c : tracker.dropped_super)
      if (label.count(c)) q.tracker.dropped_super.insert(label.at(c));
    return q;
  }
};

AnalysisState absorb(AnalysisState::Kind k, UnsafeReason r = UnsafeReason::None) {
  AnalysisState q;
  q.kind = k;
  q.unsafe_reason = r;
  return q;
}

bool in_yes_or_alloc(const AnalysisState& q, int label) {
  if (q.allocd.count(label)) return true;
  for (const auto& y : q.yes)
    if (y.count(label)) return true;
  return false;
}

}  // namespace

AnalysisState step(const Signature& sig, const ReachSpec& spec,
                   const AnalysisState& q, const Stmt& s) {
  if (!q.live()) return q;

  switch (s.kind) {
    case StmtKind::Skip:
    case StmtKind::AssertFalse:
      return q;

    case StmtKind::AssignVar: {  // u := v
      if (q.class_of(s.lhs) == q.class_of(s.rhs)) return q;
      Builder b(sig, spec, q);
      int target = q.class_of(s.rhs);
      b.remove_var(s.lhs);
      b.join(s.lhs, target);
      return b.finalize();
    }

    case StmtKind::LoadLoc: {  // x := y.p
      int cy = q.class_of(s.rhs);
      if (!in_yes_or_alloc(q, cy)) return absorb(AnalysisState::Kind::Unsafe,
                                                 UnsafeReason::Deref);
      PKey key{s.field, {cy}};
      auto it = q.ptab.find(key);
      if (it != q.ptab.end()) {
        if (q.class_of(s.lhs) == it->second) return q;
        Builder b(sig, spec, q);
        b.remove_var(s.lhs);
        b.join(s.lhs, it->second);
        return b.finalize();
      }
      Builder b(sig, spec, q);
      b.remove_var(s.lhs);
      int cx = b.fresh_class(s.lhs);
      // unequal to every allocated and every yes class
      for (int l : b.live_loc_labels()) {
        auto m = b.member.find(l);
        if (m != b.member.end() &&
            (m->second.tag == Tag::Alloc || m->second.tag == Tag::Yes))
          b.add_diseq(cx, l);
      }
      // placement: frontier of y's triple when p is one of its pointers
      Membership place{Tag::Omega, 0};
      for (size_t i = 0; i < spec.triples.size(); ++i)
        if (q.yes[i].count(cy) &&
            std::count(spec.triples[i].pointers.begin(),
                       spec.triples[i].pointers.end(), s.field)) {
          place = {Tag::Maybe, int(i)};
          break;
        }
      b.member[cx] = place;
      if (b.alive(cy)) b.set_ptab(key, cx);
      return b.finalize();
    }

    case StmtKind::LoadData: {  // a := y.d
      int cy = q.class_of(s.rhs);
      if (!in_yes_or_alloc(q, cy)) return absorb(AnalysisState::Kind::Unsafe,
                                                 UnsafeReason::Deref);
      PKey key{s.field, {cy}};
      auto it = q.ptab.find(key);
      if (it != q.ptab.end()) {
        if (q.class_of(s.lhs) == it->second) return q;
        Builder b(sig, spec, q);
        b.remove_var(s.lhs);
        b.join(s.lhs, it->second);
        return b.finalize();
      }
      Builder b(sig, spec, q);
      b.remove_var(s.lhs);
      int ca = b.fresh_class(s.lhs);
      if (b.alive(cy)) b.set_ptab(key, ca);
      return b.finalize();
    }

    case StmtKind::StoreLoc:
    case StmtKind::StoreData: {  // y.h := u
      int cy = q.class_of(s.lhs);
      if (!in_yes_or_alloc(q, cy)) return absorb(AnalysisState::Kind::Unsafe,
                                                 UnsafeReason::Deref);
      Builder b(sig, spec, q);
      b.set_ptab({s.field, {cy}}, q.class_of(s.rhs));
      return b.finalize();
    }

    case StmtKind::AssignFunc: {  // a := f(c...)
      PKey key{s.func, {}};
      for (int a : s.args) key.second.push_back(q.class_of(a));
      auto it = q.ptab.find(key);
      if (it != q.ptab.end()) {
        if (q.class_of(s.lhs) == it->second) return q;
        Builder b(sig, spec, q);
        b.remove_var(s.lhs);
        b.join(s.lhs, it->second);
        return b.finalize();
      }
      Builder b(sig, spec, q);
      b.remove_var(s.lhs);
      int ca = b.fresh_class(s.lhs);
      // store the entry when every key class is still expressible
      bool ok = true;
      PKey nkey{s.func, {}};
      for (int a : s.args) {
        int c = q.class_of(a);  // pre-assignment argument class
        if (!b.alive(c)) { ok = false; break; }
        nkey.second.push_back(c);
      }
      if (ok) b.set_ptab(nkey, ca);
      return b.finalize();
    }

    case StmtKind::Alloc: {  // alloc(x)
      Builder b(sig, spec, q);
      b.remove_var(s.lhs);
      int cx = b.fresh_class(s.lhs);
      for (int l : b.live_loc_labels())
        if (l != cx) b.add_diseq(cx, l);
      b.member[cx] = {Tag::Alloc, 0};
      for (size_t f = 0; f < sig.loc_fields.size(); ++f)
        b.set_ptab({int(f), {cx}}, cx);
      return b.finalize();
    }

    case StmtKind::Free: {  // free(x)
      int cx = q.class_of(s.lhs);
      if (!in_yes_or_alloc(q, cx)) return absorb(AnalysisState::Kind::Unsafe,
                                                 UnsafeReason::Free);
      Builder b(sig, spec, q);
      b.member[cx] = {Tag::No, 0};
      return b.finalize();
    }

    case StmtKind::AssumeEq: {
      int ca = q.class_of(s.lhs), cb = q.class_of(s.rhs);
      if (ca == cb) return q;
      Builder b(sig, spec, q);
      std::vector<std::pair<int, int>> pending{{ca, cb}};
      if (s.sort == Sort::Loc) {
        // a maybe class can only close the loop onto its stop
        for (size_t i = 0; i < spec.triples.size(); ++i) {
          if (q.maybe[i].count(ca))
            pending.push_back({ca, q.class_of(spec.triples[i].stop)});
          if (q.maybe[i].count(cb))
            pending.push_back({cb, q.class_of(spec.triples[i].stop)});
        }
      }
      if (!b.merge_and_close(std::move(pending)))
        return absorb(AnalysisState::Kind::Infeasible);
      return b.finalize();
    }

    case StmtKind::AssumeNeq: {
      int ca = q.class_of(s.lhs), cb = q.class_of(s.rhs);
      if (ca == cb) return absorb(AnalysisState::Kind::Infeasible);
      auto pr = std::make_pair(std::min(ca, cb), std::max(ca, cb));
      if (q.diseq.count(pr)) return q;
      Builder b(sig, spec, q);
      if (s.sort == Sort::Loc) {
        // testing a frontier class against its stop promotes it to yes
        for (size_t i = 0; i < spec.triples.size(); ++i) {
          int cstop = q.class_of(spec.triples[i].stop);
          int cm = -1;
          if (ca == cstop && q.maybe[i].count(cb)) cm = cb;
          else if (cb == cstop && q.maybe[i].count(ca)) cm = ca;
          if (cm < 0) continue;
          b.member[cm] = {Tag::Yes, int(i)};
          for (int l : b.live_loc_labels())
            if (l != cm) b.add_diseq(cm, l);
          return b.finalize();
        }
      }
      b.add_diseq(ca, cb);
      return b.finalize();
    }
  }
  return q;
}

AnalysisState step_with_coherence(const Signature& sig, const ReachSpec& spec,
                                  const AnalysisState& q, const Stmt& s,
                                  CoherenceFlag* flag) {
  if (flag) *flag = CoherenceFlag::None;
  if (q.live() && flag) {
    if (s.kind == StmtKind::LoadLoc || s.kind == StmtKind::LoadData) {
      PKey key{s.field, {q.class_of(s.rhs)}};
      if (q.tracker.dropped.count(key)) *flag = CoherenceFlag::Memoizing;
    } else if (s.kind == StmtKind::AssignFunc) {
      PKey key{s.func, {}};
      for (int a : s.args) key.second.push_back(q.class_of(a));
      if (q.tracker.dropped.count(key)) *flag = CoherenceFlag::Memoizing;
    } else if (s.kind == StmtKind::AssumeEq && s.sort == Sort::Data) {
      if (q.tracker.dropped_super.count(q.class_of(s.lhs)) ||
          q.tracker.dropped_super.count(q.class_of(s.rhs)))
        *flag = CoherenceFlag::EarlyAssume;
    }
  }
  return step(sig, spec, q, s);
}

StateClass classify(const AnalysisState& q) {
  switch (q.kind) {
    case AnalysisState::Kind::Live: return StateClass::Live;
    case AnalysisState::Kind::Infeasible: return StateClass::Infeasible;
    case AnalysisState::Kind::Unsafe: return StateClass::Unsafe;
  }
  return StateClass::Live;
}

std::string canonical_form(const AnalysisState& q) {
  std::ostringstream o;
  if (q.kind == AnalysisState::Kind::Infeasible) return "#infeasible";
  if (q.kind == AnalysisState::Kind::Unsafe)
    return q.unsafe_reason == UnsafeReason::Free ? "#unsafe-free"
                                                 : "#unsafe-deref";
  o << "c:";
  for (int c : q.cls) o << c << ",";
  o << ";d:";
  for (auto& [a, b] : q.diseq) o << a << "-" << b << ",";
  o << ";p:";
  for (auto& [k, t] : q.ptab) {
    o << k.first << "(";
    for (int a : k.second) o << a << ",";
    o << ")=" << t << ";";
  }
  o << "y:";
  for (auto& s : q.yes) {
    for (int c : s) o << c << ",";
    o << "|";
  }
  o << "m:";
  for (auto& s : q.maybe) {
    for (int c : s) o << c << ",";
    o << "|";
  }
  auto dump = [&](const char* n, const std::set<int>& s) {
    o << n << ":";
    for (int c : s) o << c << ",";
  };
  dump("n", q.no);
  dump("a", q.allocd);
  dump("o", q.omega);
  o << ";td:";
  for (auto& [sym, args] : q.tracker.dropped) {
    o << sym << "(";
    for (int a : args) o << a << ",";
    o << ")";
  }
  o << ";ts:";
  for (int c : q.tracker.dropped_super) o << c << ",";
  return o.str();
}

std::string check_state_invariants(const Signature& sig, const ReachSpec& spec,
                                   const AnalysisState& q) {
  if (!q.live()) return "";
  std::set<int> live;
  for (int v = 0; v < sig.num_vars(); ++v) {
    int c = q.cls[size_t(v)];
    if (c < 0 || c >= sig.num_vars()) return "class label out of range";
    if (q.cls[size_t(c)] != c) return "label is not a member of its class";
    if (c > v) return "label is not the least member";
    if (sig.is_loc_var(v) != sig.is_loc_var(c)) return "class mixes sorts";
    live.insert(c);
  }
  std::set<int> loc_labels;
  for (int v = 0; v < sig.num_loc_vars(); ++v) loc_labels.insert(q.cls[size_t(v)]);
  // exact partition of location classes
  std::map<int, int> seen;
  auto count_in = [&](const std::set<int>& s) {
    for (int c : s) {
      if (!loc_labels.count(c)) return false;
      seen[c]++;
    }
    return true;
  };
  for (auto& s : q.yes)
    if (!count_in(s)) return "yes contains a non-location or dead label";
  for (auto& s : q.maybe)
    if (!count_in(s)) return "maybe contains a non-location or dead label";
  if (!count_in(q.no) || !count_in(q.allocd) || !count_in(q.omega))
    return "region contains a non-location or dead label";
  for (int c : loc_labels) {
    auto it = seen.find(c);
    if (it == seen.end()) return "location class missing from the partition";
    if (it->second != 1) return "location class in several regions";
  }
  for (auto& [a, b] : q.diseq) {
    if (!live.count(a) || !live.count(b)) return "diseq over dead classes";
    if (a >= b) return "diseq pair not normalized";
    if (sig.is_loc_var(a) != sig.is_loc_var(b)) return "diseq mixes sorts";
  }
  for (auto& [key, tgt] : q.ptab) {
    auto [sym, args] = key;
    if (sym < 0 || sym >= sig.num_symbols()) return "ptab symbol out of range";
    if (int(args.size()) != sig.arity(sym)) return "ptab arity mismatch";
    for (int a : args)
      if (!live.count(a)) return "ptab key over dead class";
    if (!live.count(tgt)) return "ptab target dead";
    bool loc_result = sig.symbol_sort(sym) == Sort::Loc;
    if (loc_result != sig.is_loc_var(tgt)) return "ptab target sort mismatch";
    if (sig.is_func(sym)) {
      for (int a : args)
        if (sig.is_loc_var(a)) return "function key over location class";
    } else {
      if (!sig.is_loc_var(args[0])) return "field key over data class";
    }
    if (q.tracker.dropped.count(key)) return "dropped marker shadows ptab";
  }
  for (auto& [sym, args] : q.tracker.dropped) {
    if (sym < 0 || sym >= sig.num_symbols()) return "dropped symbol invalid";
    for (int a : args)
      if (!live.count(a)) return "dropped key over dead class";
  }
  for (int c : q.tracker.dropped_super)
    if (!live.count(c) || sig.is_loc_var(c)) return "dropped_super not data";
  if (q.yes.size() != spec.triples.size() || q.maybe.size() != spec.triples.size())
    return "region arity mismatch";
  return "";
}

}  // namespace fds
