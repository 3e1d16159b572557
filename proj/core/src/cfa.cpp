// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include "fds/cfa.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace fds {

std::vector<std::vector<Stmt>> nnf_guards(const Cond& c, bool negate) {
  using Branches = std::vector<std::vector<Stmt>>;
  auto atom = [&](bool eq) {
    Stmt s;
    s.kind = eq ? StmtKind::AssumeEq : StmtKind::AssumeNeq;
    s.lhs = c.lhs;
    s.rhs = c.rhs;
    s.sort = c.sort;
    return Branches{{s}};
  };
  switch (c.kind) {
    case Cond::Kind::Eq:
      return atom(!negate);
    case Cond::Kind::Neq:
      return atom(negate);
    case Cond::Kind::Not:
      return nnf_guards(*c.a, !negate);
    case Cond::Kind::And:
    case Cond::Kind::Or: {
      bool conj = (c.kind == Cond::Kind::And) != negate;
      Branches l = nnf_guards(*c.a, negate);
      Branches r = nnf_guards(*c.b, negate);
      if (!conj) {  // alternative: union of branch sets
        l.insert(l.end(), r.begin(), r.end());
        return l;
      }
      Branches out;  // conjunction: concatenate letter sequences pairwise
      for (const auto& x : l)
        for (const auto& y : r) {
          auto seq = x;
          seq.insert(seq.end(), y.begin(), y.end());
          out.push_back(std::move(seq));
        }
      return out;
    }
  }
  return {};
}

void Cfa::index() {
  out.assign(size_t(num_nodes), {});
  for (size_t i = 0; i < edges.size(); ++i)
    out[size_t(edges[i].from)].push_back(int(i));
}

namespace {

// Lowering with epsilon edges (marked by StmtKind::Skip), eliminated below.
struct Builder {
  std::vector<CfaEdge> edges;
  std::vector<int> loop_head_mark;  // node -> loop id or -1
  int nodes = 0;
  int loops = 0;

  int fresh() {
    loop_head_mark.push_back(-1);
    return nodes++;
  }
  void eps(int a, int b) {
    Stmt s;
    s.kind = StmtKind::Skip;
    edges.push_back({a, s, b});
  }
  void edge(int a, const Stmt& s, int b) { edges.push_back({a, s, b}); }

  int chain(int from, const std::vector<Stmt>& seq) {
    for (const auto& s : seq) {
      int t = fresh();
      edge(from, s, t);
      from = t;
    }
    return from;
  }

  int lower(const Node& n, int from) {
    switch (n.kind) {
      case Node::Kind::Skip:
        return from;
      case Node::Kind::Atomic: {
        int t = fresh();
        edge(from, n.stmt, t);
        return t;
      }
      case Node::Kind::AssertFalse: {
        Stmt s;
        s.kind = StmtKind::AssertFalse;
        int t = fresh();
        edge(from, s, t);
        return t;
      }
      case Node::Kind::Seq: {
        for (const auto& k : n.kids) from = lower(*k, from);
        return from;
      }
      case Node::Kind::Assume: {
        int join = fresh();
        for (const auto& br : nnf_guards(*n.cond, false))
          eps(chain(from, br), join);
        return join;
      }
      case Node::Kind::If: {
        int join = fresh();
        for (const auto& br : nnf_guards(*n.cond, false))
          eps(lower(*n.kids[0], chain(from, br)), join);
        for (const auto& br : nnf_guards(*n.cond, true))
          eps(lower(*n.kids[1], chain(from, br)), join);
        return join;
      }
      case Node::Kind::While: {
        int head = fresh();
        loop_head_mark[size_t(head)] = loops++;
        eps(from, head);
        for (const auto& br : nnf_guards(*n.cond, false))
          eps(lower(*n.kids[0], chain(head, br)), head);
        int exit = fresh();
        for (const auto& br : nnf_guards(*n.cond, true))
          eps(chain(head, br), exit);
        return exit;
      }
    }
    return from;
  }
};

}  // namespace

Cfa lower_to_cfa(const Program& p) {
  Builder b;
  int entry = b.fresh();
  int exit = b.lower(*p.body, entry);

  // epsilon closures
  std::vector<std::vector<int>> eps_out(size_t(b.nodes));
  for (const auto& e : b.edges)
    if (e.stmt.kind == StmtKind::Skip) eps_out[size_t(e.from)].push_back(e.to);
  std::vector<std::set<int>> eclo(size_t(b.nodes));
  for (int u = 0; u < b.nodes; ++u) {
    std::queue<int> q;
    q.push(u);
    eclo[size_t(u)].insert(u);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : eps_out[size_t(v)])
        if (eclo[size_t(u)].insert(w).second) q.push(w);
    }
  }

  // epsilon-free edges, then prune to entry-reachable nodes
  std::vector<std::vector<std::pair<Stmt, int>>> nout(size_t(b.nodes));
  for (int u = 0; u < b.nodes; ++u) {
    auto& row = nout[size_t(u)];
    for (int v : eclo[size_t(u)])
      for (const auto& e : b.edges)
        if (e.from == v && e.stmt.kind != StmtKind::Skip) {
          bool dup = std::any_of(row.begin(), row.end(), [&](const auto& x) {
            return x.second == e.to && x.first == e.stmt;
          });
          if (!dup) row.push_back({e.stmt, e.to});
        }
  }

  std::vector<int> renum(size_t(b.nodes), -1);
  std::vector<int> order;
  std::queue<int> q;
  q.push(entry);
  renum[size_t(entry)] = 0;
  order.push_back(entry);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (const auto& [s, v] : nout[size_t(u)])
      if (renum[size_t(v)] < 0) {
        renum[size_t(v)] = int(order.size());
        order.push_back(v);
        q.push(v);
      }
  }

  Cfa c;
  c.num_nodes = int(order.size());
  c.entry = 0;
  c.loop_head.assign(size_t(c.num_nodes), -1);
  for (int old : order) {
    // a node standing in for a while-head (itself, or via epsilon) is marked
    int mark = b.loop_head_mark[size_t(old)];
    for (int v : eclo[size_t(old)])
      if (mark < 0) mark = b.loop_head_mark[size_t(v)];
    c.loop_head[size_t(renum[size_t(old)])] = mark;
    for (const auto& [s, v] : nout[size_t(old)])
      c.edges.push_back({renum[size_t(old)], s, renum[size_t(v)]});
  }
  for (int u = 0; u < b.nodes; ++u)
    if (renum[size_t(u)] >= 0 && eclo[size_t(u)].count(exit))
      c.exits.push_back(renum[size_t(u)]);
  std::sort(c.exits.begin(), c.exits.end());
  c.exits.erase(std::unique(c.exits.begin(), c.exits.end()), c.exits.end());
  c.index();
  return c;
}

void enumerate_words(const Cfa& cfa, int max_len,
                     const std::function<bool(const std::vector<Stmt>&)>& visit) {
  std::vector<Stmt> word;
  std::function<void(int)> dfs = [&](int node) {
    if (int(word.size()) >= max_len) return;
    for (int ei : cfa.out[size_t(node)]) {
      const auto& e = cfa.edges[size_t(ei)];
      word.push_back(e.stmt);
      if (visit(word)) dfs(e.to);
      word.pop_back();
    }
  };
  dfs(cfa.entry);
}

}  // namespace fds
