// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "fds/cfa.hpp"
#include "support.hpp"

using namespace fds;
using fdsv_tests::parse;

namespace {

// Collect the complete words (ending at an accepting node) up to max_len.
std::set<std::string> complete_words(const Program& p, int max_len) {
  Cfa cfa = lower_to_cfa(p);
  std::set<int> accept(cfa.exits.begin(), cfa.exits.end());
  std::set<std::string> out;
  // re-walk: track the node reached by each word
  std::function<void(int, std::vector<Stmt>&)> go = [&](int node,
                                                        std::vector<Stmt>& w) {
    if (accept.count(node)) out.insert(word_to_string(p.sig, w));
    if (int(w.size()) == max_len) return;
    for (int ei : cfa.out[size_t(node)]) {
      w.push_back(cfa.edges[size_t(ei)].stmt);
      go(cfa.edges[size_t(ei)].to, w);
      w.pop_back();
    }
  };
  std::vector<Stmt> w;
  go(cfa.entry, w);
  return out;
}

Cond atom(Cond::Kind k, int l, int r) {
  Cond c;
  c.kind = k;
  c.lhs = l;
  c.rhs = r;
  return c;
}

}  // namespace

TEST_CASE("nnf lowering of atoms") {
  Cond c = atom(Cond::Kind::Eq, 0, 1);
  auto pos = nnf_guards(c, false);
  REQUIRE(pos.size() == 1);
  REQUIRE(pos[0].size() == 1);
  CHECK(pos[0][0].kind == StmtKind::AssumeEq);
  auto neg = nnf_guards(c, true);
  REQUIRE(neg.size() == 1);
  CHECK(neg[0][0].kind == StmtKind::AssumeNeq);
}

TEST_CASE("nnf lowering of conjunction and disjunction") {
  Cond c;
  c.kind = Cond::Kind::And;
  c.a = std::make_unique<Cond>(atom(Cond::Kind::Eq, 0, 1));
  c.b = std::make_unique<Cond>(atom(Cond::Kind::Neq, 1, 2));
  auto pos = nnf_guards(c, false);  // one disjunct with two letters
  REQUIRE(pos.size() == 1);
  CHECK(pos[0].size() == 2);
  auto neg = nnf_guards(c, true);  // de Morgan: two disjuncts
  REQUIRE(neg.size() == 2);
  CHECK(neg[0].size() == 1);
  CHECK(neg[0][0].kind == StmtKind::AssumeNeq);
  CHECK(neg[1][0].kind == StmtKind::AssumeEq);
}

TEST_CASE("double negation cancels") {
  Cond n;
  n.kind = Cond::Kind::Not;
  n.a = std::make_unique<Cond>(atom(Cond::Kind::Eq, 0, 1));
  auto w = nnf_guards(n, true);
  REQUIRE(w.size() == 1);
  CHECK(w[0][0].kind == StmtKind::AssumeEq);
}

TEST_CASE("straight-line program yields a single complete word") {
  Program p = parse(R"(
vars loc: r, x, NIL;
fields loc: next;
@reach l: start={r} pointers={next} stop=NIL
begin
  x := r;
  x := x.next
end
)");
  auto words = complete_words(p, 10);
  REQUIRE(words.size() == 1);
  CHECK(*words.begin() == "x := r ; x := x.next");
}

TEST_CASE("if produces both guard-extended branches") {
  Program p = parse(R"(
vars loc: r, x, NIL;
fields loc: next;
@reach l: start={r} pointers={next} stop=NIL
begin
  if (r = NIL) { x := r } else { x := NIL }
end
)");
  auto words = complete_words(p, 10);
  CHECK(words == std::set<std::string>{"assume(r = NIL) ; x := r",
                                       "assume(r != NIL) ; x := NIL"});
}

TEST_CASE("while unrolls as guarded iterations plus an exit guard") {
  Program p = parse(R"(
vars loc: r, x, NIL;
fields loc: next;
@reach l: start={r} pointers={next} stop=NIL
begin
  x := r;
  while (x != NIL) { x := x.next }
end
)");
  auto words = complete_words(p, 6);
  CHECK(words.count("x := r ; assume(x = NIL)"));
  CHECK(words.count("x := r ; assume(x != NIL) ; x := x.next ; assume(x = NIL)"));
  CHECK(words.count("x := r ; assume(x != NIL) ; x := x.next ; "
                    "assume(x != NIL) ; x := x.next ; assume(x = NIL)"));
  CHECK(words.size() == 3);
}

TEST_CASE("loop heads are marked") {
  Program p = parse(R"(
vars loc: r, x, NIL;
fields loc: next;
@reach l: start={r} pointers={next} stop=NIL
begin
  x := r;
  while (x != NIL) { x := x.next }
end
)");
  Cfa cfa = lower_to_cfa(p);
  int heads = 0;
  for (int n = 0; n < cfa.num_nodes; ++n)
    if (cfa.loop_head[size_t(n)] >= 0) ++heads;
  CHECK(heads >= 1);
}

TEST_CASE("enumerate_words visits prefixes and respects the cutoff") {
  Program p = parse(R"(
vars loc: r, x, NIL;
fields loc: next;
@reach l: start={r} pointers={next} stop=NIL
begin
  while (x != NIL) { x := x.next }
end
)");
  Cfa cfa = lower_to_cfa(p);
  int count = 0, too_long = 0;
  enumerate_words(cfa, 4, [&](const std::vector<Stmt>& w) {
    ++count;
    if (int(w.size()) > 4) ++too_long;
    return true;
  });
  CHECK(count > 0);
  CHECK(too_long == 0);
}
