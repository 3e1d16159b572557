// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDS_FIXPOINT_HPP
#define FDS_FIXPOINT_HPP

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fds/ast.hpp"
#include "fds/automaton.hpp"
#include "fds/cfa.hpp"

namespace fds {

enum class VerdictKind : uint8_t {
  MemorySafe,
  MemoryUnsafe,
  NotStreamingCoherent,
  AssertionViolated,
};

// One disjunct of a loop-head invariant: the facts of one abstract state.
struct InvariantState {
  std::vector<std::vector<std::string>> equalities;  // variable classes (>1)
  std::vector<std::pair<std::string, std::string>> disequalities;
  std::map<std::string, std::string> membership;  // var -> region label
};

struct LoopInvariant {
  int loop_id = 0;
  std::string guard;
  std::vector<InvariantState> states;  // disjunction
};

struct Verdict {
  VerdictKind kind = VerdictKind::MemorySafe;
  std::vector<Stmt> trace;   // minimal witness for non-safe verdicts
  int peak_states = 0;       // largest bag observed at any program point
  int final_states = 0;      // live states at program exit
  long states_explored = 0;  // distinct canonical states seen overall
  std::vector<LoopInvariant> invariants;
};

struct AnalyzeOptions {
  long bag_cap = 100000;  // distinct-state cap per program point
  bool want_invariants = false;
  bool minimize_trace = true;  // BFS-minimize the reported witness
};

struct BagCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A bag of live states, deduplicated by canonical form; each state carries a
// shortest-so-far trace from the program entry.
struct TracedState {
  AnalysisState state;
  std::vector<Stmt> trace;
};
struct StateBag {
  std::map<std::string, TracedState> states;  // canonical form -> state
  bool insert(const Signature& sig, AnalysisState st, std::vector<Stmt> trace);
  size_t size() const { return states.size(); }
};

// Iterates `assume(guard); body` from `in` until the canonical head bag
// stabilizes; returns the stabilized head bag.  `step_body` must map a bag
// through one body pass (it may throw to halt on a flag).
StateBag loop_fixpoint(const Signature& sig, StateBag in,
                       const std::function<StateBag(const StateBag&)>& step_iter);

// Full analysis: structural recursion over the body with bags of automaton
// states, on-the-fly streaming-coherence checking, loop fixpoints, and halt
// on the first Unsafe / coherence flag.  Assertion checking: every live state
// reaching assert(false) is an assertion violation.  Infeasible states are
// pruned immediately.
Verdict analyze(const Program& p, const AnalyzeOptions& opts = {});

// Minimal-length witness for the given verdict kind: BFS over the product of
// the CFA and canonical automaton states.  Returns nullopt when unreachable.
std::optional<std::vector<Stmt>> shortest_counterexample(const Program& p,
                                                         VerdictKind kind);

std::string verdict_kind_name(VerdictKind k);

}  // namespace fds

#endif  // FDS_FIXPOINT_HPP
