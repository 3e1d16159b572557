// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDS_AST_HPP
#define FDS_AST_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fds {

enum class Sort : uint8_t { Loc, Data };

// Two-sorted program vocabulary.  Variables, fields and function symbols are
// referred to by dense integer ids; the tables below own the names.
//
//   variable ids:  0 .. loc_vars.size()-1                 location variables
//                  loc_vars.size() .. +data_vars.size()-1 data variables
//   symbol ids:    0 .. loc_fields.size()-1               location-sorted maps
//                  .. +data_fields.size()-1               data-sorted maps
//                  .. +funcs.size()-1                     data functions
struct Signature {
  std::vector<std::string> loc_vars;
  std::vector<std::string> data_vars;
  std::vector<std::string> loc_fields;
  std::vector<std::string> data_fields;
  std::vector<std::string> funcs;
  std::vector<int> func_arity;

  int num_vars() const { return int(loc_vars.size() + data_vars.size()); }
  int num_loc_vars() const { return int(loc_vars.size()); }
  bool is_loc_var(int v) const { return v >= 0 && v < num_loc_vars(); }
  Sort var_sort(int v) const { return is_loc_var(v) ? Sort::Loc : Sort::Data; }
  const std::string& var_name(int v) const {
    return is_loc_var(v) ? loc_vars[size_t(v)]
                         : data_vars[size_t(v) - loc_vars.size()];
  }

  int num_symbols() const {
    return int(loc_fields.size() + data_fields.size() + funcs.size());
  }
  bool is_loc_field(int s) const { return s >= 0 && s < int(loc_fields.size()); }
  bool is_data_field(int s) const {
    return s >= int(loc_fields.size()) &&
           s < int(loc_fields.size() + data_fields.size());
  }
  bool is_func(int s) const {
    return s >= int(loc_fields.size() + data_fields.size()) &&
           s < num_symbols();
  }
  // Sort of the value produced by applying symbol s.
  Sort symbol_sort(int s) const {
    return is_loc_field(s) ? Sort::Loc : Sort::Data;
  }
  int arity(int s) const {
    if (is_func(s))
      return func_arity[size_t(s) - loc_fields.size() - data_fields.size()];
    return 1;  // fields are unary maps over locations
  }
  const std::string& symbol_name(int s) const {
    if (is_loc_field(s)) return loc_fields[size_t(s)];
    if (is_data_field(s)) return data_fields[size_t(s) - loc_fields.size()];
    return funcs[size_t(s) - loc_fields.size() - data_fields.size()];
  }

  // Lookup helpers; return -1 when the name is unknown.
  int find_var(const std::string& n) const;
  int find_loc_field(const std::string& n) const;
  int find_data_field(const std::string& n) const;
  int find_func(const std::string& n) const;
};

// One indexed reachability triple (Start_i, Pointers_i, Stop_i).  The stop set
// is a singleton by the forest restriction, so it is stored as one variable.
struct ReachTriple {
  std::string name;
  std::vector<int> start;     // loc variable ids, the start constants
  std::vector<int> pointers;  // loc field ids
  int stop = -1;              // loc variable id, the stop constant
};

struct ReachSpec {
  std::vector<ReachTriple> triples;
  // Every variable appearing in some triple (starts and stops); these are the
  // spec constants and must never be assigned by the program.
  std::vector<int> constants() const;
  bool is_constant(int var) const;
};

// Atomic statements: the alphabet of executions plus skip and assert(false).
enum class StmtKind : uint8_t {
  Skip,
  AssignVar,   // lhs := rhs                (both Loc or both Data)
  LoadLoc,     // lhs := rhs.field          (field location-sorted)
  StoreLoc,    // lhs.field := rhs
  LoadData,    // lhs := rhs.field          (field data-sorted)
  StoreData,   // lhs.field := rhs
  AssignFunc,  // lhs := func(args...)
  Alloc,       // alloc(lhs)
  Free,        // free(lhs)
  AssumeEq,    // assume(lhs = rhs)
  AssumeNeq,   // assume(lhs != rhs)
  AssertFalse,
};

struct Stmt {
  StmtKind kind = StmtKind::Skip;
  int lhs = -1;
  int rhs = -1;
  int field = -1;              // symbol id for Load*/Store*
  int func = -1;               // symbol id for AssignFunc
  std::vector<int> args;       // data variable ids for AssignFunc
  Sort sort = Sort::Loc;       // for AssignVar / AssumeEq / AssumeNeq

  bool operator==(const Stmt& o) const {
    return kind == o.kind && lhs == o.lhs && rhs == o.rhs &&
           field == o.field && func == o.func && args == o.args &&
           sort == o.sort;
  }
};

std::string stmt_to_string(const Signature& sig, const Stmt& s);
std::string word_to_string(const Signature& sig, const std::vector<Stmt>& w);

// Guard conditions: equality atoms closed under /\, \/ and negation.
struct Cond {
  enum class Kind : uint8_t { Eq, Neq, And, Or, Not } kind = Kind::Eq;
  int lhs = -1, rhs = -1;  // for atoms
  Sort sort = Sort::Loc;
  std::unique_ptr<Cond> a, b;
};

std::string cond_to_string(const Signature& sig, const Cond& c);

// Structured program body.
struct Node {
  enum class Kind : uint8_t {
    Skip, Atomic, Seq, If, While, Assume, AssertFalse
  } kind = Kind::Skip;
  Stmt stmt;                                // Atomic
  std::unique_ptr<Cond> cond;               // If / While / Assume
  std::vector<std::unique_ptr<Node>> kids;  // Seq: list; If: {then, else};
                                            // While: {body}
};

enum class Expectation : uint8_t { None, Safe, Unsafe, NotSc };

struct Program {
  Signature sig;
  ReachSpec spec;
  std::unique_ptr<Node> body;
  Expectation expect = Expectation::None;
  std::string name;  // diagnostic label (usually the file name)
};

}  // namespace fds

#endif  // FDS_AST_HPP
