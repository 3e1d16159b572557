// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fds/fixpoint.hpp"
#include "support.hpp"

using namespace fds;
using fdsv_tests::parse;

namespace {

Verdict go(const char* text, AnalyzeOptions opts = {}) {
  Program p = parse(text);
  return analyze(p, opts);
}

const char* kTraverse = R"(
vars loc: hd, x, NIL;
vars data: a;
fields loc: next;
fields data: val;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  while (x != NIL) {
    a := x.val;
    x := x.next
  }
end
)";

}  // namespace

TEST_CASE("safe list traversal") {
  Verdict v = go(kTraverse);
  CHECK(v.kind == VerdictKind::MemorySafe);
  CHECK(v.trace.empty());
  CHECK(v.peak_states >= 1);
  CHECK(v.final_states >= 1);
}

TEST_CASE("traversal without the guard is unsafe, with a minimal trace") {
  Verdict v = go(R"(
vars loc: hd, x, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  while (x != NIL) {
    x := x.next
  };
  x := x.next
end
)");
  CHECK(v.kind == VerdictKind::MemoryUnsafe);
  REQUIRE_FALSE(v.trace.empty());
  CHECK(v.trace.back().kind == StmtKind::LoadLoc);
  // minimal witness: exit the loop immediately, then the bad load
  CHECK(v.trace.size() == 3);
}

TEST_CASE("dereferencing the frontier variable directly is unsafe") {
  Verdict v = go(R"(
vars loc: hd, x, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd.next
end
)");
  CHECK(v.kind == VerdictKind::MemoryUnsafe);
  CHECK(v.trace.size() == 1);
}

TEST_CASE("allocate, link, free is safe") {
  Verdict v = go(R"(
vars loc: hd, x, y, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  alloc(x);
  x.next := hd;
  y := x.next;
  free(x)
end
)");
  CHECK(v.kind == VerdictKind::MemorySafe);
}

TEST_CASE("use after free is unsafe") {
  Verdict v = go(R"(
vars loc: hd, x, y, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  alloc(x);
  free(x);
  y := x.next
end
)");
  CHECK(v.kind == VerdictKind::MemoryUnsafe);
  CHECK(v.trace.size() == 3);
}

TEST_CASE("assert(false) under an infeasible guard is fine") {
  Verdict v = go(R"(
vars loc: hd, x, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  assume(x != NIL);
  if (x = NIL) {
    assert(false)
  }
end
)");
  CHECK(v.kind == VerdictKind::MemorySafe);
}

TEST_CASE("reachable assert(false) is an assertion violation") {
  Verdict v = go(R"(
vars loc: hd, x, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  if (x = NIL) {
    assert(false)
  }
end
)");
  CHECK(v.kind == VerdictKind::AssertionViolated);
  REQUIRE_FALSE(v.trace.empty());
  CHECK(v.trace.back().kind == StmtKind::AssertFalse);
  CHECK(v.trace.size() == 3);
}

TEST_CASE("re-reading a dropped data value is not streaming-coherent") {
  Verdict v = go(R"(
vars loc: hd, x, NIL;
vars data: a;
fields loc: next;
fields data: val;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  assume(x != NIL);
  a := x.val;
  a := x.val;
  a := x.val
end
)");
  // the second read re-uses the cached class; only after dropping does the
  // third read flag: rewrite with an overwrite in between
  CHECK(v.kind == VerdictKind::MemorySafe);
  Verdict w = go(R"(
vars loc: hd, x, NIL;
vars data: a, b;
fields loc: next;
fields data: val;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  assume(x != NIL);
  a := x.val;
  a := b;
  a := x.val
end
)");
  CHECK(w.kind == VerdictKind::NotStreamingCoherent);
  REQUIRE_FALSE(w.trace.empty());
  CHECK(w.trace.back().kind == StmtKind::LoadData);
}

TEST_CASE("loop invariants are reported on request") {
  AnalyzeOptions opts;
  opts.want_invariants = true;
  Verdict v = go(kTraverse, opts);
  REQUIRE(v.invariants.size() == 1);
  const LoopInvariant& inv = v.invariants[0];
  CHECK(inv.guard == "x != NIL");
  CHECK_FALSE(inv.states.empty());
  bool x_tracked = false;
  for (const auto& st : inv.states) {
    auto it = st.membership.find("x");
    REQUIRE(it != st.membership.end());
    if (it->second != "omega") x_tracked = true;
  }
  CHECK(x_tracked);
}

TEST_CASE("bag cap throws") {
  AnalyzeOptions opts;
  opts.bag_cap = 1;
  Program p = parse(R"(
vars loc: hd, x, y, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  if (x = NIL) { y := hd } else { y := x };
  skip
end
)");
  CHECK_THROWS_AS(analyze(p, opts), BagCapExceeded);
}

TEST_CASE("shortest counterexample is replayable and minimal") {
  Program p = parse(R"(
vars loc: hd, x, NIL;
fields loc: next;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  while (x != NIL) { x := x.next };
  x := x.next
end
)");
  auto w = shortest_counterexample(p, VerdictKind::MemoryUnsafe);
  REQUIRE(w.has_value());
  AnalysisState q = initial_state(p.sig, p.spec);
  for (size_t i = 0; i + 1 < w->size(); ++i)
    q = step(p.sig, p.spec, q, (*w)[i]);
  REQUIRE(q.live());
  CHECK(step(p.sig, p.spec, q, w->back()).kind == AnalysisState::Kind::Unsafe);
  CHECK(shortest_counterexample(p, VerdictKind::AssertionViolated) ==
        std::nullopt);
}

TEST_CASE("re-traversing with a second cursor is not single-pass") {
  Verdict v = go(R"(
vars loc: hd, x, y, NIL;
vars data: a;
fields loc: next;
fields data: val;
@reach list: start={hd} pointers={next} stop=NIL
begin
  x := hd;
  while (x != NIL) {
    y := x;
    while (y != NIL) {
      a := y.val;
      y := y.next
    };
    x := x.next
  }
end
)");
  CHECK(v.kind == VerdictKind::NotStreamingCoherent);
}

TEST_CASE("fixpoint terminates over two sequential loops and two triples") {
  Verdict v = go(R"(
vars loc: h1, h2, x, NIL;
vars data: a;
fields loc: next;
fields data: val;
@reach one: start={h1} pointers={next} stop=NIL
@reach two: start={h2} pointers={next} stop=NIL
begin
  x := h1;
  while (x != NIL) {
    a := x.val;
    x := x.next
  };
  x := h2;
  while (x != NIL) {
    a := x.val;
    x := x.next
  }
end
)");
  CHECK(v.kind == VerdictKind::MemorySafe);
}
