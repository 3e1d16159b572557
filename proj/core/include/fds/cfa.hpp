// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDS_CFA_HPP
#define FDS_CFA_HPP

#include <functional>
#include <tuple>
#include <vector>

#include "fds/ast.hpp"

namespace fds {

// Negation-normal-form guard lowering.  A condition denotes a union of
// sequences of assume letters: disjunction is alternative, conjunction is
// concatenation, negation is pushed to the atoms (!(r=s) ~> r!=s).
// `negate` lowers the complement of the condition.
std::vector<std::vector<Stmt>> nnf_guards(const Cond& c, bool negate);

struct CfaEdge {
  int from;
  Stmt stmt;
  int to;
};

// Epsilon-free control-flow automaton whose path labels from entry to an
// accepting node spell exactly the executions of the program, and whose path
// labels to arbitrary nodes spell the prefix executions.
struct Cfa {
  int num_nodes = 0;
  int entry = 0;
  std::vector<int> exits;             // accepting nodes
  std::vector<CfaEdge> edges;
  std::vector<std::vector<int>> out;  // node -> indices into edges
  std::vector<int> loop_head;         // node -> while-node id or -1

  void index();  // (re)build `out`
};

Cfa lower_to_cfa(const Program& p);

// Enumerates all edge-label words of length <= max_len along CFA paths from
// the entry (prefix executions).  Calls visit(word); if visit returns false
// the word is not extended further.  Used by bounded differential harnesses.
void enumerate_words(const Cfa& cfa, int max_len,
                     const std::function<bool(const std::vector<Stmt>&)>& visit);

}  // namespace fds

#endif  // FDS_CFA_HPP
