// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDS_HEAP_HPP
#define FDS_HEAP_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fds/ast.hpp"

namespace fds {

// A concrete two-sorted structure with a finite static location universe
// 0..num_static-1, a finite data universe 0..data_size-1, and an unbounded
// dynamic location tail e_0, e_1, ... represented as num_static + k.
// Location fields are closed over the static universe; on a dynamic location
// every location field is the identity until overwritten at run time.
struct ConcreteForestHeap {
  int num_static = 0;
  int data_size = 1;
  std::vector<int> loc_init;    // loc var id -> static location
  std::vector<int> data_init;   // (var id - num_loc_vars) -> data value
  // field tables indexed by Signature symbol id; loc fields then data fields.
  std::vector<std::vector<int>> loc_field;   // [loc field][static loc] -> loc
  std::vector<std::vector<int>> data_field;  // [data field][static loc] -> data
  // function tables, row-major over data tuples (arity r -> data_size^r entries)
  std::vector<std::vector<int>> func_table;

  int dyn_loc(int k) const { return num_static + k; }
  bool is_dyn(int l) const { return l >= num_static; }

  int func_value(const Signature& sig, int func_sym,
                 const std::vector<int>& args) const;
};

// Reach_i and Reach_spec: least sets containing the start locations (other
// than stop) and closed under the triple's pointer fields, never entering the
// stop location.
std::set<int> reach_set(const Signature& sig, const ReachSpec& spec,
                        const ConcreteForestHeap& h,
                        const ReachTriple& triple);
std::set<int> reach_all(const Signature& sig, const ReachSpec& spec,
                        const ConcreteForestHeap& h);

// Forest data-structure check: singleton stops, stop locations fixpoints of
// every location field, and distinct traversal terms denote distinct
// locations except at shared starts and at stops.
bool is_forest(const Signature& sig, const ReachSpec& spec,
               const ConcreteForestHeap& h, std::string* why = nullptr);

enum class ViolationKind : uint8_t { None, Deref, Free };

struct ConcreteTrace {
  bool feasible = true;       // all assume letters held on the executed prefix
  int infeasible_at = -1;     // index of the first failing assume
  ViolationKind violation = ViolationKind::None;
  int violation_at = -1;      // index of the offending letter
  int steps = 0;              // letters executed (stops at flag)
  std::vector<int> final_vals;  // var id -> location / data value
  int allocations = 0;
};

// Reference interpreter: runs the word on the heap, checking feasibility and
// memory safety (dereference/free of a location outside the allocated set,
// which starts as Reach_spec and is updated by alloc/free).
ConcreteTrace run_execution(const Signature& sig, const ReachSpec& spec,
                            const ConcreteForestHeap& h,
                            const std::vector<Stmt>& word);

// Seeded random forest heap: random trees per triple within max_nodes static
// locations; non-spec location variables are placed at stop or at dedicated
// off-tree locations; non-spec fields and all data interpretations are filled
// arbitrarily (closed over the static universe).  Always returns a heap that
// satisfies is_forest.
ConcreteForestHeap random_forest(const Signature& sig, const ReachSpec& spec,
                                 int max_nodes, std::mt19937_64& rng);

struct EnumBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration, up to isomorphism of static locations, of forest
// heaps with at most max_nodes static locations in which every location is
// reachable from some variable's initial value.  Non-spec location variables
// range over stop and off-tree placements; the data universe is a fixed
// 2-element domain with all field/function tables enumerated.  Throws
// EnumBudgetExceeded when more than `budget` heaps would be produced.
std::vector<ConcreteForestHeap> enumerate_forests(const Signature& sig,
                                                  const ReachSpec& spec,
                                                  int max_nodes,
                                                  long budget = 2000000);

}  // namespace fds

#endif  // FDS_HEAP_HPP
