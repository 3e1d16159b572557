// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include "fds/ast.hpp"

#include <algorithm>
#include <sstream>

namespace fds {

static int find_in(const std::vector<std::string>& v, const std::string& n,
                   int offset = 0) {
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i] == n) return int(i) + offset;
  return -1;
}

int Signature::find_var(const std::string& n) const {
  int v = find_in(loc_vars, n);
  if (v >= 0) return v;
  return find_in(data_vars, n, num_loc_vars());
}

int Signature::find_loc_field(const std::string& n) const {
  return find_in(loc_fields, n);
}

int Signature::find_data_field(const std::string& n) const {
  return find_in(data_fields, n, int(loc_fields.size()));
}

int Signature::find_func(const std::string& n) const {
  return find_in(funcs, n, int(loc_fields.size() + data_fields.size()));
}

std::vector<int> ReachSpec::constants() const {
  std::vector<int> out;
  for (const auto& t : triples) {
    out.insert(out.end(), t.start.begin(), t.start.end());
    out.push_back(t.stop);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool ReachSpec::is_constant(int var) const {
  for (const auto& t : triples) {
    if (t.stop == var) return true;
    for (int s : t.start)
      if (s == var) return true;
  }
  return false;
}

std::string stmt_to_string(const Signature& sig, const Stmt& s) {
  std::ostringstream o;
  auto v = [&](int id) { return sig.var_name(id); };
  switch (s.kind) {
    case StmtKind::Skip:
      o << "skip";
      break;
    case StmtKind::AssignVar:
      o << v(s.lhs) << " := " << v(s.rhs);
      break;
    case StmtKind::LoadLoc:
    case StmtKind::LoadData:
      o << v(s.lhs) << " := " << v(s.rhs) << "." << sig.symbol_name(s.field);
      break;
    case StmtKind::StoreLoc:
    case StmtKind::StoreData:
      o << v(s.lhs) << "." << sig.symbol_name(s.field) << " := " << v(s.rhs);
      break;
    case StmtKind::AssignFunc: {
      o << v(s.lhs) << " := " << sig.symbol_name(s.func) << "(";
      for (size_t i = 0; i < s.args.size(); ++i)
        o << (i ? ", " : "") << v(s.args[i]);
      o << ")";
      break;
    }
    case StmtKind::Alloc:
      o << "alloc(" << v(s.lhs) << ")";
      break;
    case StmtKind::Free:
      o << "free(" << v(s.lhs) << ")";
      break;
    case StmtKind::AssumeEq:
      o << "assume(" << v(s.lhs) << " = " << v(s.rhs) << ")";
      break;
    case StmtKind::AssumeNeq:
      o << "assume(" << v(s.lhs) << " != " << v(s.rhs) << ")";
      break;
    case StmtKind::AssertFalse:
      o << "assert(false)";
      break;
  }
  return o.str();
}

std::string word_to_string(const Signature& sig, const std::vector<Stmt>& w) {
  std::ostringstream o;
  for (size_t i = 0; i < w.size(); ++i)
    o << (i ? " ; " : "") << stmt_to_string(sig, w[i]);
  return o.str();
}

std::string cond_to_string(const Signature& sig, const Cond& c) {
  switch (c.kind) {
    case Cond::Kind::Eq:
      return sig.var_name(c.lhs) + " = " + sig.var_name(c.rhs);
    case Cond::Kind::Neq:
      return sig.var_name(c.lhs) + " != " + sig.var_name(c.rhs);
    case Cond::Kind::And:
      return "(" + cond_to_string(sig, *c.a) + " && " +
             cond_to_string(sig, *c.b) + ")";
    case Cond::Kind::Or:
      return "(" + cond_to_string(sig, *c.a) + " || " +
             cond_to_string(sig, *c.b) + ")";
    case Cond::Kind::Not:
      return "!(" + cond_to_string(sig, *c.a) + ")";
  }
  return "?";
}

}  // namespace fds
