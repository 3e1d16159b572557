// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDS_TERM_HPP
#define FDS_TERM_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fds/ast.hpp"

namespace fds {

// Hash-consed ground terms over the execution vocabulary:
//   init constants  (one per program variable, the variable's initial value)
//   c_dyn           (the first dynamically allocated location)
//   f_dyn(t)        (successor in the allocation sequence)
//   init_h(t)       (initial value of map h at t, h a field)
//   f(t1..tr)       (data function application)
// Term ids are dense and stable within one pool.
class TermPool {
 public:
  // Symbol encoding: field/function symbols reuse Signature symbol ids;
  // the pseudo-symbols below are offset past them.
  explicit TermPool(const Signature& sig);

  int init_const(int var);          // \hat{v}
  int dyn_const();                  // c_dyn
  int dyn_succ(int t);              // f_dyn(t)
  int dyn_term(int k);              // f_dyn^k(c_dyn)
  int init_field(int field, int t); // init_h(t)
  int app(int func, const std::vector<int>& args);

  int size() const { return int(nodes_.size()); }
  int symbol(int t) const { return nodes_[size_t(t)].sym; }
  const std::vector<int>& args(int t) const { return nodes_[size_t(t)].args; }

  bool is_init_const(int t) const;
  int init_const_var(int t) const;  // valid when is_init_const
  bool is_dyn_const(int t) const;
  bool is_dyn_succ(int t) const;
  // Height k when the term is f_dyn^k(c_dyn); nullopt otherwise.
  std::optional<int> dyn_height(int t) const;
  // Sort of the term's value.
  Sort sort(int t) const;

  std::string to_string(int t) const;

  // Adds t and all its subterms to out (a sorted unique vector).
  void subterm_closure(int t, std::vector<int>& out) const;

  const Signature& sig() const { return *sig_; }

 private:
  struct Node {
    int sym;
    std::vector<int> args;
    bool operator<(const Node& o) const {
      return sym != o.sym ? sym < o.sym : args < o.args;
    }
  };
  int intern(Node n);
  const Signature* sig_;
  std::vector<Node> nodes_;
  std::map<Node, int> index_;
  // pseudo-symbol ids
  int sym_cdyn_, sym_fdyn_, sym_init_field0_, sym_init_const0_;
};

// Result of a closure computation: a partition of the carrier.
struct Partition {
  std::vector<int> carrier;          // sorted term ids
  std::vector<int> cls;              // parallel: class representative index
  bool same(int t, int u) const;     // both must be carrier members
  int rep(int t) const;              // representative term id
  std::vector<std::vector<int>> classes() const;
};

// Smallest equivalence relation on `carrier` containing `pairs` and congruent
// under the function symbols (restricted to applications present in the
// carrier).  The carrier is closed under subterms internally.
Partition congruence_closure(const TermPool& pool, std::vector<int> carrier,
                             const std::vector<std::pair<int, int>>& pairs);

// Forest equality closure Closure^=(spec, pairs): as above, but whenever two
// distinct traversal terms of the reachability spec fall into one class, each
// is additionally equated with its triple's stop constant, iterated to a
// fixpoint.  Stop constants are added to the carrier.
Partition forest_closure(TermPool& pool, const ReachSpec& spec,
                         std::vector<int> carrier,
                         const std::vector<std::pair<int, int>>& pairs);

// Is t a traversal term of triple i (built from a start constant of i by
// fields in Pointers_i, interpreted over the initial heap)?
bool is_traversal_term(const TermPool& pool, const ReachTriple& triple, int t);

// Streaming term-level state: Comp / FldsComp / alpha computed incrementally
// along an execution, with Terms(sigma) accumulated.
class TermState {
 public:
  TermState(const Signature& sig);

  void step(const Stmt& s);

  TermPool& pool() { return pool_; }
  const TermPool& pool() const { return pool_; }
  int comp(int var) const { return comp_[size_t(var)]; }
  // FldsComp for a location-variable row.
  int flds(int field, int var) const;
  const std::vector<std::pair<int, int>>& alpha() const { return alpha_; }
  const std::vector<std::pair<int, int>>& beta() const { return beta_; }
  const std::set<int>& terms_seen() const { return terms_seen_; }
  int allocations() const { return allocs_; }

  // Carrier for closure computations: Terms(sigma), alpha/beta endpoints and
  // all current map rows, closed under subterms.
  std::vector<int> carrier() const;

 private:
  int default_field_value(int field, int t);
  void rederive_row(int var);

  const Signature* sig_;
  TermPool pool_;
  std::vector<int> comp_;                    // var -> term
  std::vector<std::vector<int>> flds_;       // field -> (loc var -> term)
  std::vector<std::pair<int, int>> alpha_;   // equality assumes
  std::vector<std::pair<int, int>> beta_;    // disequality assumes
  std::set<int> terms_seen_;
  int allocs_ = 0;
};

// Trace-level checker results.
enum class CheckFlag : uint8_t { Ok, AliasViolation, Memoizing, EarlyAssume };

struct CheckResult {
  CheckFlag flag = CheckFlag::Ok;
  int at = -1;     // index of the offending letter
  int var_a = -1;  // offending variable pair (alias check) / assume operands
  int var_b = -1;
  bool ok() const { return flag == CheckFlag::Ok; }
};

// Decidable rendering of alias-awareness over the initial term model: at every
// map update y.h := u, every location variable must either be congruent to y
// modulo the accumulated equality assumes (must-alias) or provably distinct
// (adding the equality contradicts a recorded disequality, or the terms have
// incompatible dynamic shape).  Anything else is reported as a violation.
CheckResult check_alias_aware(const Signature& sig,
                              const std::vector<Stmt>& word);

// Coherence (memoizing + early assumes, both sorts, plain congruence).
CheckResult check_coherent(const Signature& sig, const std::vector<Stmt>& word);

// Streaming-coherence: memoizing under the forest equality closure, early
// assumes restricted to data equality assumes.
CheckResult check_streaming_coherent(const Signature& sig,
                                     const ReachSpec& spec,
                                     const std::vector<Stmt>& word);

}  // namespace fds

#endif  // FDS_TERM_HPP
