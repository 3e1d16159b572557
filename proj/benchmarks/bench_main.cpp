// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fds/fixpoint.hpp"
#include "fds/parser.hpp"

using namespace fds;

namespace {

Program load(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  Program p = parse_program(ss.str(),
                            std::filesystem::path(path).filename().string());
  validate(p);
  return p;
}

std::string corpus(const char* name) {
  return std::string(FDSV_CORPUS_DIR) + "/" + name;
}

// Raw transition throughput: one list-traversal round trip per iteration.
void BM_automaton_step(benchmark::State& state) {
  Program p = load(corpus("sll-reverse.fds"));
  AnalysisState q0 = initial_state(p.sig, p.spec);
  const Signature& sig = p.sig;
  int x = sig.find_var("x"), hd = sig.find_var("hd"), t = sig.find_var("t");
  int y = sig.find_var("y"), nil = sig.find_var("NIL");
  int next = sig.find_loc_field("next");
  auto mk = [](StmtKind k, int lhs, int rhs, int field) {
    Stmt s;
    s.kind = k;
    s.lhs = lhs;
    s.rhs = rhs;
    s.field = field;
    return s;
  };
  std::vector<Stmt> loop{
      mk(StmtKind::AssignVar, x, hd, -1),
      mk(StmtKind::AssumeNeq, x, nil, -1),
      mk(StmtKind::LoadLoc, t, x, next),
      mk(StmtKind::StoreLoc, x, y, next),
      mk(StmtKind::AssignVar, y, x, -1),
      mk(StmtKind::AssignVar, x, t, -1),
  };
  for (auto _ : state) {
    AnalysisState q = q0;
    for (const Stmt& s : loop) q = step(p.sig, p.spec, q, s);
    benchmark::DoNotOptimize(q);
  }
  state.SetItemsProcessed(state.iterations() * int64_t(loop.size()));
}
BENCHMARK(BM_automaton_step);

void bench_analyze(benchmark::State& state, const char* name) {
  Program p = load(corpus(name));
  for (auto _ : state) {
    Verdict v = analyze(p);
    benchmark::DoNotOptimize(v);
  }
}

void BM_analyze_reverse(benchmark::State& s) { bench_analyze(s, "sll-reverse.fds"); }
void BM_analyze_delete_all(benchmark::State& s) { bench_analyze(s, "sll-delete-all.fds"); }
void BM_analyze_bst_insert(benchmark::State& s) { bench_analyze(s, "bst-insert.fds"); }
void BM_analyze_sorted_merge(benchmark::State& s) { bench_analyze(s, "sll-sorted-merge.fds"); }
BENCHMARK(BM_analyze_reverse);
BENCHMARK(BM_analyze_delete_all);
BENCHMARK(BM_analyze_bst_insert);
BENCHMARK(BM_analyze_sorted_merge);

}  // namespace

BENCHMARK_MAIN();
