// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fds/term.hpp"
#include "support.hpp"

using namespace fds;

namespace {

Signature list_sig() {
  Signature s;
  s.loc_vars = {"x", "y", "NIL"};
  s.data_vars = {"a", "b", "c"};
  s.loc_fields = {"next"};
  s.data_fields = {"val"};
  s.funcs = {"f"};
  s.func_arity = {1};
  return s;
}

ReachSpec list_spec(const Signature& s) {
  ReachSpec sp;
  ReachTriple t;
  t.name = "list";
  t.start = {s.find_var("x")};
  t.pointers = {s.find_loc_field("next")};
  t.stop = s.find_var("NIL");
  sp.triples.push_back(t);
  return sp;
}

Stmt mk(StmtKind k, int lhs, int rhs = -1, int field = -1) {
  Stmt s;
  s.kind = k;
  s.lhs = lhs;
  s.rhs = rhs;
  s.field = field;
  return s;
}

struct W {
  Signature sig = list_sig();
  int x = sig.find_var("x"), y = sig.find_var("y"), nil = sig.find_var("NIL");
  int a = sig.find_var("a"), b = sig.find_var("b"), c = sig.find_var("c");
  int next = sig.find_loc_field("next"), val = sig.find_data_field("val");
  int f = sig.find_func("f");
  std::vector<Stmt> w;

  void load_loc(int l, int r) { w.push_back(mk(StmtKind::LoadLoc, l, r, next)); }
  void load_val(int l, int r) { w.push_back(mk(StmtKind::LoadData, l, r, val)); }
  void store_loc(int l, int r) { w.push_back(mk(StmtKind::StoreLoc, l, r, next)); }
  void assign(int l, int r, Sort s) {
    Stmt st = mk(StmtKind::AssignVar, l, r);
    st.sort = s;
    w.push_back(st);
  }
  void func(int l, int arg) {
    Stmt st = mk(StmtKind::AssignFunc, l);
    st.func = f;
    st.args = {arg};
    w.push_back(st);
  }
  void assume_eq(int l, int r, Sort s) {
    Stmt st = mk(StmtKind::AssumeEq, l, r);
    st.sort = s;
    w.push_back(st);
  }
  void assume_neq(int l, int r, Sort s) {
    Stmt st = mk(StmtKind::AssumeNeq, l, r);
    st.sort = s;
    w.push_back(st);
  }
  void alloc(int l) { w.push_back(mk(StmtKind::Alloc, l)); }
};

}  // namespace

TEST_CASE("term pool interns structurally") {
  Signature sig = list_sig();
  TermPool pool(sig);
  int ix = pool.init_const(sig.find_var("x"));
  CHECK(ix == pool.init_const(sig.find_var("x")));
  CHECK(ix != pool.init_const(sig.find_var("y")));
  int d0 = pool.dyn_term(0);
  CHECK(d0 == pool.dyn_const());
  CHECK(pool.dyn_term(2) == pool.dyn_succ(pool.dyn_succ(d0)));
  CHECK(pool.dyn_height(pool.dyn_term(2)) == 2);
  CHECK_FALSE(pool.dyn_height(ix).has_value());
  CHECK(pool.sort(ix) == Sort::Loc);
  int v = pool.init_field(sig.find_data_field("val"), ix);
  CHECK(pool.sort(v) == Sort::Data);
}

TEST_CASE("term state computes symbolic values along a word") {
  W t;
  TermState st(t.sig);
  int ix = st.pool().init_const(t.x);
  CHECK(st.comp(t.x) == ix);
  st.step(mk(StmtKind::LoadLoc, t.y, t.x, t.next));  // y := x.next
  int nx = st.pool().init_field(t.next, ix);
  CHECK(st.comp(t.y) == nx);
  st.step(mk(StmtKind::LoadLoc, t.y, t.y, t.next));  // y := y.next
  CHECK(st.comp(t.y) == st.pool().init_field(t.next, nx));
  CHECK(st.terms_seen().count(nx));
}

TEST_CASE("allocation yields distinct dynamic terms in order") {
  W t;
  TermState st(t.sig);
  st.step(mk(StmtKind::Alloc, t.x));
  CHECK(st.comp(t.x) == st.pool().dyn_term(0));
  st.step(mk(StmtKind::Alloc, t.y));
  CHECK(st.comp(t.y) == st.pool().dyn_term(1));
  // a freshly allocated cell's location fields point to itself
  st.step(mk(StmtKind::LoadLoc, t.y, t.y, t.next));
  CHECK(st.comp(t.y) == st.pool().dyn_term(1));
}

TEST_CASE("congruence closure is congruent") {
  Signature sig = list_sig();
  TermPool pool(sig);
  int ia = pool.init_const(sig.find_var("a"));
  int ib = pool.init_const(sig.find_var("b"));
  int fa = pool.app(sig.find_func("f"), {ia});
  int fb = pool.app(sig.find_func("f"), {ib});
  Partition p = congruence_closure(pool, {ia, ib, fa, fb}, {{ia, ib}});
  CHECK(p.same(ia, ib));
  CHECK(p.same(fa, fb));
  Partition q = congruence_closure(pool, {ia, ib, fa, fb}, {});
  CHECK_FALSE(q.same(ia, ib));
  CHECK_FALSE(q.same(fa, fb));
}

TEST_CASE("forest closure forces merged traversal terms onto the stop") {
  Signature sig = list_sig();
  ReachSpec spec = list_spec(sig);
  TermPool pool(sig);
  int ix = pool.init_const(sig.find_var("x"));
  int n1 = pool.init_field(sig.find_loc_field("next"), ix);
  int n2 = pool.init_field(sig.find_loc_field("next"), n1);
  int stop = pool.init_const(sig.find_var("NIL"));
  // x.next = x.next.next forces both onto NIL (a lasso is not a forest)
  Partition p = forest_closure(pool, spec, {ix, n1, n2}, {{n1, n2}});
  CHECK(p.same(n1, stop));
  CHECK(p.same(n2, stop));
  // without the equation nothing merges
  Partition q = forest_closure(pool, spec, {ix, n1, n2}, {});
  CHECK_FALSE(q.same(n1, n2));
  CHECK_FALSE(q.same(n1, stop));
}

TEST_CASE("traversal terms are recognized") {
  Signature sig = list_sig();
  ReachSpec spec = list_spec(sig);
  TermPool pool(sig);
  int ix = pool.init_const(sig.find_var("x"));
  int iy = pool.init_const(sig.find_var("y"));
  int n1 = pool.init_field(sig.find_loc_field("next"), ix);
  CHECK(is_traversal_term(pool, spec.triples[0], ix));
  CHECK(is_traversal_term(pool, spec.triples[0], n1));
  CHECK_FALSE(is_traversal_term(pool, spec.triples[0], iy));
  CHECK_FALSE(
      is_traversal_term(pool, spec.triples[0],
                        pool.init_field(sig.find_data_field("val"), ix)));
}

TEST_CASE("alias check: unrelated variables at a store are a violation") {
  W t;
  t.store_loc(t.x, t.x);  // x.next := x with y's cell unrelated
  CheckResult r = check_alias_aware(t.sig, t.w);
  CHECK(r.flag == CheckFlag::AliasViolation);
  CHECK(r.at == 0);
}

TEST_CASE("alias check: disequality assumes make variables provably distinct") {
  W t;
  t.assume_neq(t.x, t.y, Sort::Loc);
  t.assume_neq(t.x, t.nil, Sort::Loc);
  t.assume_neq(t.y, t.nil, Sort::Loc);
  t.store_loc(t.x, t.y);
  CHECK(check_alias_aware(t.sig, t.w).ok());
}

TEST_CASE("alias check: must-alias via assumes is fine") {
  W t;
  t.assume_eq(t.x, t.y, Sort::Loc);
  t.assume_neq(t.x, t.nil, Sort::Loc);
  t.store_loc(t.x, t.x);
  CHECK(check_alias_aware(t.sig, t.w).ok());
}

TEST_CASE("alias check: allocation separates by shape") {
  W t;
  t.alloc(t.x);
  t.alloc(t.y);
  t.store_loc(t.x, t.y);  // x, y, NIL pairwise shape-distinct
  CHECK(check_alias_aware(t.sig, t.w).ok());
}

TEST_CASE("memoizing violation: recomputing a dropped value") {
  W t;
  t.load_val(t.a, t.x);          // a := x.val
  t.assign(t.a, t.b, Sort::Data);  // drop it
  t.load_val(t.a, t.x);          // recompute
  CheckResult r = check_coherent(t.sig, t.w);
  CHECK(r.flag == CheckFlag::Memoizing);
  CHECK(r.at == 2);
  // holding it in another variable first is coherent
  W u;
  u.load_val(u.a, u.x);
  u.assign(u.c, u.a, Sort::Data);
  u.assign(u.a, u.b, Sort::Data);
  u.load_val(u.a, u.x);
  CHECK(check_coherent(u.sig, u.w).ok());
}

TEST_CASE("memoizing applies to function applications too") {
  W t;
  t.func(t.b, t.a);              // b := f(a)
  t.assign(t.b, t.c, Sort::Data);  // drop f(a)
  t.func(t.b, t.a);              // recompute
  CheckResult r = check_coherent(t.sig, t.w);
  CHECK(r.flag == CheckFlag::Memoizing);
  CHECK(r.at == 2);
}

TEST_CASE("early assume: equating terms with a dropped superterm") {
  W t;
  t.func(t.b, t.a);               // b := f(a), superterm of a's value
  t.assign(t.b, t.c, Sort::Data);   // drop it
  t.assume_eq(t.a, t.c, Sort::Data);
  CheckResult r = check_coherent(t.sig, t.w);
  CHECK(r.flag == CheckFlag::EarlyAssume);
  CHECK(r.at == 2);
  CheckResult rs = check_streaming_coherent(t.sig, list_spec(t.sig), t.w);
  CHECK(rs.flag == CheckFlag::EarlyAssume);
}

TEST_CASE("streaming-coherence ignores location-sorted early assumes") {
  W t;
  t.load_val(t.a, t.x);            // seen superterm of x's location value
  t.assign(t.a, t.b, Sort::Data);  // drop it
  t.assume_eq(t.x, t.y, Sort::Loc);
  CHECK(check_coherent(t.sig, t.w).flag == CheckFlag::EarlyAssume);
  CHECK(check_streaming_coherent(t.sig, list_spec(t.sig), t.w).ok());
}

TEST_CASE("a plain traversal is streaming-coherent") {
  W t;
  t.assign(t.a, t.b, Sort::Data);
  t.load_loc(t.y, t.x);
  t.assume_neq(t.y, t.nil, Sort::Loc);
  t.load_val(t.a, t.y);
  t.load_loc(t.y, t.y);
  CHECK(check_streaming_coherent(t.sig, list_spec(t.sig), t.w).ok());
  CHECK(check_alias_aware(t.sig, t.w).ok());
}
