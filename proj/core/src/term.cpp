// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include "fds/term.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace fds {

// ---------------------------------------------------------------------------
// TermPool

TermPool::TermPool(const Signature& sig) : sig_(&sig) {
  sym_cdyn_ = sig.num_symbols();
  sym_fdyn_ = sym_cdyn_ + 1;
  sym_init_const0_ = sym_fdyn_ + 1;
  sym_init_field0_ = -1;  // init_h reuses the field's signature symbol id
}

int TermPool::intern(Node n) {
  auto it = index_.find(n);
  if (it != index_.end()) return it->second;
  int id = int(nodes_.size());
  nodes_.push_back(n);
  index_.emplace(std::move(n), id);
  return id;
}

int TermPool::init_const(int var) { return intern({sym_init_const0_ + var, {}}); }
int TermPool::dyn_const() { return intern({sym_cdyn_, {}}); }
int TermPool::dyn_succ(int t) { return intern({sym_fdyn_, {t}}); }

int TermPool::dyn_term(int k) {
  int t = dyn_const();
  for (int i = 0; i < k; ++i) t = dyn_succ(t);
  return t;
}

int TermPool::init_field(int field, int t) { return intern({field, {t}}); }

int TermPool::app(int func, const std::vector<int>& args) {
  return intern({func, args});
}

bool TermPool::is_init_const(int t) const {
  return nodes_[size_t(t)].sym >= sym_init_const0_;
}
int TermPool::init_const_var(int t) const {
  return nodes_[size_t(t)].sym - sym_init_const0_;
}
bool TermPool::is_dyn_const(int t) const {
  return nodes_[size_t(t)].sym == sym_cdyn_;
}
bool TermPool::is_dyn_succ(int t) const {
  return nodes_[size_t(t)].sym == sym_fdyn_;
}

std::optional<int> TermPool::dyn_height(int t) const {
  int k = 0;
  while (is_dyn_succ(t)) {
    t = nodes_[size_t(t)].args[0];
    ++k;
  }
  if (is_dyn_const(t)) return k;
  return std::nullopt;
}

Sort TermPool::sort(int t) const {
  int s = nodes_[size_t(t)].sym;
  if (s == sym_cdyn_ || s == sym_fdyn_) return Sort::Loc;
  if (s >= sym_init_const0_) return sig_->var_sort(s - sym_init_const0_);
  return sig_->symbol_sort(s);
}

std::string TermPool::to_string(int t) const {
  const Node& n = nodes_[size_t(t)];
  if (n.sym == sym_cdyn_) return "c_dyn";
  if (n.sym == sym_fdyn_) return "f_dyn(" + to_string(n.args[0]) + ")";
  if (n.sym >= sym_init_const0_)
    return "init_" + sig_->var_name(n.sym - sym_init_const0_);
  std::string out = (sig_->is_func(n.sym) ? "" : "init_") +
                    sig_->symbol_name(n.sym) + "(";
  for (size_t i = 0; i < n.args.size(); ++i)
    out += (i ? ", " : "") + to_string(n.args[i]);
  return out + ")";
}

void TermPool::subterm_closure(int t, std::vector<int>& out) const {
  if (std::binary_search(out.begin(), out.end(), t)) return;
  out.insert(std::lower_bound(out.begin(), out.end(), t), t);
  for (int a : nodes_[size_t(t)].args) subterm_closure(a, out);
}

// ---------------------------------------------------------------------------
// Partition and closures

bool Partition::same(int t, int u) const { return rep(t) == rep(u); }

int Partition::rep(int t) const {
  auto it = std::lower_bound(carrier.begin(), carrier.end(), t);
  assert(it != carrier.end() && *it == t);
  return cls[size_t(it - carrier.begin())];
}

std::vector<std::vector<int>> Partition::classes() const {
  std::map<int, std::vector<int>> by;
  for (size_t i = 0; i < carrier.size(); ++i)
    by[cls[i]].push_back(carrier[i]);
  std::vector<std::vector<int>> out;
  for (auto& [r, v] : by) out.push_back(std::move(v));
  return out;
}

namespace {

struct Uf {
  std::vector<int> p;
  explicit Uf(size_t n) : p(n) {
    for (size_t i = 0; i < n; ++i) p[i] = int(i);
  }
  int find(int x) {
    while (p[size_t(x)] != x) x = p[size_t(x)] = p[size_t(p[size_t(x)])];
    return x;
  }
  bool merge(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);  // keep least index as root
    p[size_t(b)] = a;
    return true;
  }
};

Partition close(const TermPool& pool, std::vector<int> carrier,
                std::vector<std::pair<int, int>> pairs) {
  std::sort(carrier.begin(), carrier.end());
  carrier.erase(std::unique(carrier.begin(), carrier.end()), carrier.end());
  {
    std::vector<int> closed = carrier;
    for (int t : carrier) pool.subterm_closure(t, closed);
    for (auto& [a, b] : pairs) {
      pool.subterm_closure(a, closed);
      pool.subterm_closure(b, closed);
    }
    carrier = std::move(closed);
  }
  auto idx = [&](int t) {
    return int(std::lower_bound(carrier.begin(), carrier.end(), t) -
               carrier.begin());
  };
  Uf uf(carrier.size());
  for (auto& [a, b] : pairs) uf.merge(idx(a), idx(b));
  // congruence: applications with equivalent argument vectors are merged
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < carrier.size(); ++i) {
      for (size_t j = i + 1; j < carrier.size(); ++j) {
        if (uf.find(int(i)) == uf.find(int(j))) continue;
        int ti = carrier[i], tj = carrier[j];
        if (pool.symbol(ti) != pool.symbol(tj)) continue;
        const auto& ai = pool.args(ti);
        const auto& aj = pool.args(tj);
        if (ai.size() != aj.size() || ai.empty()) continue;
        bool all = true;
        for (size_t k = 0; k < ai.size(); ++k)
          if (uf.find(idx(ai[k])) != uf.find(idx(aj[k]))) {
            all = false;
            break;
          }
        if (all) changed |= uf.merge(int(i), int(j));
      }
    }
  }
  Partition p;
  p.carrier = carrier;
  p.cls.resize(carrier.size());
  for (size_t i = 0; i < carrier.size(); ++i)
    p.cls[i] = carrier[size_t(uf.find(int(i)))];
  return p;
}

}  // namespace

Partition congruence_closure(const TermPool& pool, std::vector<int> carrier,
                             const std::vector<std::pair<int, int>>& pairs) {
  return close(pool, std::move(carrier), pairs);
}

bool is_traversal_term(const TermPool& pool, const ReachTriple& triple, int t) {
  if (pool.is_init_const(t)) {
    int v = pool.init_const_var(t);
    return std::find(triple.start.begin(), triple.start.end(), v) !=
           triple.start.end();
  }
  int s = pool.symbol(t);
  if (std::find(triple.pointers.begin(), triple.pointers.end(), s) ==
      triple.pointers.end())
    return false;
  return is_traversal_term(pool, triple, pool.args(t)[0]);
}

Partition forest_closure(TermPool& pool, const ReachSpec& spec,
                         std::vector<int> carrier,
                         const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> stops(spec.triples.size());
  for (size_t i = 0; i < spec.triples.size(); ++i) {
    stops[i] = pool.init_const(spec.triples[i].stop);
    carrier.push_back(stops[i]);
  }
  std::vector<std::pair<int, int>> all = pairs;
  // cache traversal-term classification per (triple, term)
  std::vector<std::map<int, bool>> trav(spec.triples.size());
  auto is_trav = [&](size_t i, int t) {
    auto it = trav[i].find(t);
    if (it != trav[i].end()) return it->second;
    bool b = is_traversal_term(pool, spec.triples[i], t);
    trav[i][t] = b;
    return b;
  };
  while (true) {
    Partition p = close(pool, carrier, all);
    bool added = false;
    for (size_t i = 0; i < p.carrier.size(); ++i) {
      for (size_t j = i + 1; j < p.carrier.size(); ++j) {
        if (p.cls[i] != p.cls[j]) continue;
        int ti = p.carrier[i], tj = p.carrier[j];
        for (size_t a = 0; a < spec.triples.size(); ++a) {
          if (!is_trav(a, ti)) continue;
          for (size_t b = 0; b < spec.triples.size(); ++b) {
            if (!is_trav(b, tj)) continue;
            // distinct traversal terms in one class: both equal their stops
            if (!p.same(ti, stops[a])) {
              all.push_back({ti, stops[a]});
              added = true;
            }
            if (!p.same(tj, stops[b])) {
              all.push_back({tj, stops[b]});
              added = true;
            }
          }
        }
      }
    }
    if (!added) return p;
  }
}

// ---------------------------------------------------------------------------
// TermState

TermState::TermState(const Signature& sig) : sig_(&sig), pool_(sig) {
  comp_.resize(size_t(sig.num_vars()));
  for (int v = 0; v < sig.num_vars(); ++v) {
    comp_[size_t(v)] = pool_.init_const(v);
    terms_seen_.insert(comp_[size_t(v)]);
  }
  int nf = int(sig.loc_fields.size() + sig.data_fields.size());
  flds_.resize(size_t(nf));
  for (int f = 0; f < nf; ++f) {
    flds_[size_t(f)].resize(size_t(sig.num_loc_vars()));
    for (int v = 0; v < sig.num_loc_vars(); ++v)
      flds_[size_t(f)][size_t(v)] = pool_.init_field(f, comp_[size_t(v)]);
  }
}

int TermState::flds(int field, int var) const {
  return flds_[size_t(field)][size_t(var)];
}

int TermState::default_field_value(int field, int t) {
  // unallocated dynamic cells self-loop on location fields
  if (sig_->is_loc_field(field) && pool_.dyn_height(t).has_value()) return t;
  return pool_.init_field(field, t);
}

std::vector<int> TermState::carrier() const {
  std::vector<int> out(terms_seen_.begin(), terms_seen_.end());
  std::sort(out.begin(), out.end());
  auto add = [&](int t) { pool_.subterm_closure(t, out); };
  for (int t : comp_) add(t);
  for (const auto& row : flds_)
    for (int t : row) add(t);
  for (auto& [a, b] : alpha_) { add(a); add(b); }
  for (auto& [a, b] : beta_) { add(a); add(b); }
  return out;
}

void TermState::rederive_row(int var) {
  // New target term for `var`; mirror the map rows of any variable already
  // congruent to it (mod the accumulated equality assumes), else defaults.
  int t = comp_[size_t(var)];
  Partition p = congruence_closure(pool_, carrier(), alpha_);
  int witness = -1;
  for (int w = 0; w < sig_->num_loc_vars(); ++w)
    if (w != var && p.same(comp_[size_t(w)], t)) {
      witness = w;
      break;
    }
  for (size_t f = 0; f < flds_.size(); ++f)
    flds_[f][size_t(var)] = witness >= 0
                                ? flds_[f][size_t(witness)]
                                : default_field_value(int(f), t);
}

void TermState::step(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Skip:
    case StmtKind::AssertFalse:
    case StmtKind::Free:
      return;
    case StmtKind::AssignVar:
      comp_[size_t(s.lhs)] = comp_[size_t(s.rhs)];
      if (s.sort == Sort::Loc)
        for (auto& row : flds_) row[size_t(s.lhs)] = row[size_t(s.rhs)];
      break;
    case StmtKind::LoadLoc:
      comp_[size_t(s.lhs)] = flds_[size_t(s.field)][size_t(s.rhs)];
      rederive_row(s.lhs);
      break;
    case StmtKind::LoadData:
      comp_[size_t(s.lhs)] = flds_[size_t(s.field)][size_t(s.rhs)];
      break;
    case StmtKind::StoreLoc:
    case StmtKind::StoreData: {
      Partition p = congruence_closure(pool_, carrier(), alpha_);
      int addr = comp_[size_t(s.lhs)];
      for (int z = 0; z < sig_->num_loc_vars(); ++z)
        if (p.same(comp_[size_t(z)], addr))
          flds_[size_t(s.field)][size_t(z)] = comp_[size_t(s.rhs)];
      return;
    }
    case StmtKind::AssignFunc: {
      std::vector<int> args;
      for (int a : s.args) args.push_back(comp_[size_t(a)]);
      comp_[size_t(s.lhs)] = pool_.app(s.func, args);
      break;
    }
    case StmtKind::Alloc:
      comp_[size_t(s.lhs)] = pool_.dyn_term(allocs_++);
      for (size_t f = 0; f < flds_.size(); ++f)
        flds_[f][size_t(s.lhs)] =
            default_field_value(int(f), comp_[size_t(s.lhs)]);
      break;
    case StmtKind::AssumeEq:
      alpha_.push_back({comp_[size_t(s.lhs)], comp_[size_t(s.rhs)]});
      return;
    case StmtKind::AssumeNeq:
      beta_.push_back({comp_[size_t(s.lhs)], comp_[size_t(s.rhs)]});
      return;
  }
  terms_seen_.insert(comp_[size_t(s.lhs)]);
}

// ---------------------------------------------------------------------------
// Trace-level checkers

namespace {

// Terms denoting provably distinct locations in every heap structure:
// distinct dynamic locations, or a dynamic location vs a term built without
// dynamic symbols (the static universe is closed under initial fields).
bool shape_distinct(const TermPool& pool, int a, int b) {
  auto pure_static = [&](int t) {
    std::vector<int> subs;
    pool.subterm_closure(t, subs);
    for (int s : subs)
      if (pool.is_dyn_const(s) || pool.is_dyn_succ(s)) return false;
    return true;
  };
  auto ha = pool.dyn_height(a), hb = pool.dyn_height(b);
  if (ha && hb) return *ha != *hb;
  if (ha && pure_static(b)) return true;
  if (hb && pure_static(a)) return true;
  return false;
}

// Does the partition identify two terms that no heap structure can identify?
bool contradictory(const TermPool& pool, const Partition& p,
                   const std::vector<std::pair<int, int>>& beta) {
  for (auto& [a, b] : beta)
    if (p.same(a, b)) return true;
  auto cls = p.classes();
  for (const auto& c : cls)
    for (size_t i = 0; i < c.size(); ++i)
      for (size_t j = i + 1; j < c.size(); ++j)
        if (shape_distinct(pool, c[i], c[j])) return true;
  return false;
}

}  // namespace

CheckResult check_alias_aware(const Signature& sig,
                              const std::vector<Stmt>& word) {
  TermState st(sig);
  for (size_t i = 0; i < word.size(); ++i) {
    const Stmt& s = word[i];
    if (s.kind == StmtKind::StoreLoc || s.kind == StmtKind::StoreData) {
      std::vector<int> car = st.carrier();
      Partition p = congruence_closure(st.pool(), car, st.alpha());
      int addr = st.comp(s.lhs);
      for (int y = 0; y < sig.num_loc_vars(); ++y) {
        int ty = st.comp(y);
        if (p.same(addr, ty)) continue;  // must-alias
        if (shape_distinct(st.pool(), addr, ty)) continue;
        auto pairs = st.alpha();
        pairs.push_back({addr, ty});
        Partition q = congruence_closure(st.pool(), car, pairs);
        if (contradictory(st.pool(), q, st.beta())) continue;  // must-not-alias
        CheckResult r;
        r.flag = CheckFlag::AliasViolation;
        r.at = int(i);
        r.var_a = s.lhs;
        r.var_b = y;
        return r;
      }
    }
    st.step(s);
  }
  return {};
}

namespace {

// Shared memoizing / early-assume engine.  `forest` selects the closure used
// and restricts early assumes to the data sort.
CheckResult check_coherence_impl(const Signature& sig, const ReachSpec* spec,
                                 const std::vector<Stmt>& word) {
  TermState st(sig);
  auto closure = [&](std::vector<int> car) {
    return spec ? forest_closure(st.pool(), *spec, std::move(car), st.alpha())
                : congruence_closure(st.pool(), std::move(car), st.alpha());
  };
  for (size_t i = 0; i < word.size(); ++i) {
    const Stmt& s = word[i];
    bool computes = s.kind == StmtKind::LoadLoc ||
                    s.kind == StmtKind::LoadData ||
                    s.kind == StmtKind::AssignFunc;
    if (computes) {
      int tnew;
      if (s.kind == StmtKind::AssignFunc) {
        std::vector<int> args;
        for (int a : s.args) args.push_back(st.comp(a));
        tnew = st.pool().app(s.func, args);
      } else {
        tnew = st.flds(s.field, s.rhs);
      }
      std::vector<int> car = st.carrier();
      st.pool().subterm_closure(tnew, car);
      Partition p = closure(car);
      bool seen_equiv = false;
      for (int t : st.terms_seen())
        if (p.same(t, tnew)) {
          seen_equiv = true;
          break;
        }
      if (seen_equiv) {
        bool held = false;
        for (int z = 0; z < sig.num_vars() && !held; ++z)
          held = p.same(st.comp(z), tnew);
        if (!held) {
          CheckResult r;
          r.flag = CheckFlag::Memoizing;
          r.at = int(i);
          return r;
        }
      }
    }
    if (s.kind == StmtKind::AssumeEq && (!spec || s.sort == Sort::Data)) {
      std::vector<int> car = st.carrier();
      Partition p = closure(car);
      // superterms of either operand's term, modulo the closure
      std::set<int> roots = {p.rep(st.comp(s.lhs)), p.rep(st.comp(s.rhs))};
      bool grew = true;
      while (grew) {
        grew = false;
        for (int t : p.carrier) {
          if (roots.count(p.rep(t))) continue;
          for (int a : st.pool().args(t))
            if (roots.count(p.rep(a))) {
              roots.insert(p.rep(t));
              grew = true;
              break;
            }
        }
      }
      for (int t : st.terms_seen()) {
        if (!roots.count(p.rep(t))) continue;
        bool held = false;
        // streaming-coherence admits only data-variable witnesses here
        for (int z = 0; z < sig.num_vars() && !held; ++z) {
          if (spec && sig.is_loc_var(z)) continue;
          held = p.same(st.comp(z), t);
        }
        if (!held) {
          CheckResult r;
          r.flag = CheckFlag::EarlyAssume;
          r.at = int(i);
          r.var_a = s.lhs;
          r.var_b = s.rhs;
          return r;
        }
      }
    }
    st.step(s);
  }
  return {};
}

}  // namespace

CheckResult check_coherent(const Signature& sig,
                           const std::vector<Stmt>& word) {
  return check_coherence_impl(sig, nullptr, word);
}

CheckResult check_streaming_coherent(const Signature& sig,
                                     const ReachSpec& spec,
                                     const std::vector<Stmt>& word) {
  return check_coherence_impl(sig, &spec, word);
}

}  // namespace fds
