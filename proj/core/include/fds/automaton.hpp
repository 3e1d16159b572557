// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDS_AUTOMATON_HPP
#define FDS_AUTOMATON_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fds/ast.hpp"

namespace fds {

// Streaming congruence-closure automaton for memory safety over forest
// data-structures, with an attached streaming-coherence tracker.
//
// A live state is an abstraction of the feasible forest heaps reaching it:
// an equivalence on program variables, known disequalities between classes,
// a partial map table P (field/function applications over classes), and a
// partition of the location classes into
//   yes[i]   definitely inside tree i and not the stop (safe to access)
//   maybe[i] frontier of tree i: inside the tree or equal to the stop
//   no       definitely unallocated (stops, freed locations)
//   allocd   dynamically allocated by the run
//   omega    untracked
enum class UnsafeReason : uint8_t { None, Deref, Free };

struct CoherenceTracker {
  // Applications (symbol, arg classes) whose result class was vacated while
  // the key classes survive; recomputing one is a memoizing violation.
  std::set<std::pair<int, std::vector<int>>> dropped;
  // Data classes with a dropped superterm; an equality assume touching one is
  // an early-assume violation.
  std::set<int> dropped_super;

  bool operator==(const CoherenceTracker& o) const {
    return dropped == o.dropped && dropped_super == o.dropped_super;
  }
};

struct AnalysisState {
  enum class Kind : uint8_t { Live, Infeasible, Unsafe } kind = Kind::Live;
  UnsafeReason unsafe_reason = UnsafeReason::None;

  // Live components.  Classes are labelled canonically by their least member
  // variable id; cls[v] is the label of v's class.
  std::vector<int> cls;
  std::set<std::pair<int, int>> diseq;  // (min,max) class label pairs
  std::map<std::pair<int, std::vector<int>>, int> ptab;
  std::vector<std::set<int>> yes, maybe;  // one set per reach triple
  std::set<int> no, allocd, omega;
  CoherenceTracker tracker;

  bool live() const { return kind == Kind::Live; }
  int class_of(int var) const { return cls[size_t(var)]; }
  std::vector<int> class_members(int c) const;

  bool operator==(const AnalysisState& o) const;
};

// Coherence flags raised by step_with_coherence.
enum class CoherenceFlag : uint8_t { None, Memoizing, EarlyAssume };

AnalysisState initial_state(const Signature& sig, const ReachSpec& spec);

// One transition of the automaton.  Absorbing on non-live states.
AnalysisState step(const Signature& sig, const ReachSpec& spec,
                   const AnalysisState& q, const Stmt& s);

// As step, but first consults the coherence tracker and reports a
// streaming-coherence violation through *flag (the returned state is the
// stepped state regardless, letting callers decide how to halt).
AnalysisState step_with_coherence(const Signature& sig, const ReachSpec& spec,
                                  const AnalysisState& q, const Stmt& s,
                                  CoherenceFlag* flag);

enum class StateClass : uint8_t { Live, Infeasible, Unsafe };
StateClass classify(const AnalysisState& q);

// Deterministic serialization of all components (including the tracker);
// two states compare equal iff their canonical forms are equal.
std::string canonical_form(const AnalysisState& q);

// Internal invariants, exposed for the property-test suite.  Returns an empty
// string when all hold, else a description of the first failure:
//  - cls labels are least members; sets contain only live class labels
//  - the location-class partition yes/maybe/no/allocd/omega is exact
//  - diseq pairs are between distinct live classes of equal sort
//  - ptab keys/values use live classes with correct sorts and arities
//  - dropped keys use live classes and never shadow a live ptab entry
std::string check_state_invariants(const Signature& sig, const ReachSpec& spec,
                                   const AnalysisState& q);

}  // namespace fds

#endif  // FDS_AUTOMATON_HPP
