// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#include "fds/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace fds {

namespace {

struct Token {
  enum class Kind {
    Ident, At, Assign, Semi, Colon, Comma, Dot, LParen, RParen, LBrace,
    RBrace, Eq, Neq, AndAnd, OrOr, Bang, Slash, Number, End
  } kind;
  std::string text;
  int line;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { next(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    next();
    return t;
  }

 private:
  void next() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == '\n') { ++line_; ++i_; continue; }
      if (std::isspace(static_cast<unsigned char>(c))) { ++i_; continue; }
      if (c == '/' && i_ + 1 < s_.size() && s_[i_ + 1] == '/') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
        continue;
      }
      break;
    }
    tok_.line = line_;
    if (i_ >= s_.size()) { tok_.kind = Token::Kind::End; tok_.text.clear(); return; }
    char c = s_[i_];
    auto two = [&](char a, char b) {
      return c == a && i_ + 1 < s_.size() && s_[i_ + 1] == b;
    };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i_;
      while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) ||
                               s_[j] == '_' || s_[j] == '-')) {
        // '-' is allowed inside identifiers only when followed by a letter,
        // so that `not-sc` lexes as one word.
        if (s_[j] == '-' && !(j + 1 < s_.size() &&
                              std::isalpha(static_cast<unsigned char>(s_[j + 1]))))
          break;
        ++j;
      }
      tok_ = {Token::Kind::Ident, s_.substr(i_, j - i_), line_};
      i_ = j;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i_;
      while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
      tok_ = {Token::Kind::Number, s_.substr(i_, j - i_), line_};
      i_ = j;
      return;
    }
    if (two(':', '=')) { tok_ = {Token::Kind::Assign, ":=", line_}; i_ += 2; return; }
    if (two('!', '=')) { tok_ = {Token::Kind::Neq, "!=", line_}; i_ += 2; return; }
    if (two('&', '&')) { tok_ = {Token::Kind::AndAnd, "&&", line_}; i_ += 2; return; }
    if (two('|', '|')) { tok_ = {Token::Kind::OrOr, "||", line_}; i_ += 2; return; }
    Token::Kind k;
    switch (c) {
      case '@': k = Token::Kind::At; break;
      case ';': k = Token::Kind::Semi; break;
      case ':': k = Token::Kind::Colon; break;
      case ',': k = Token::Kind::Comma; break;
      case '.': k = Token::Kind::Dot; break;
      case '(': k = Token::Kind::LParen; break;
      case ')': k = Token::Kind::RParen; break;
      case '{': k = Token::Kind::LBrace; break;
      case '}': k = Token::Kind::RBrace; break;
      case '=': k = Token::Kind::Eq; break;
      case '!': k = Token::Kind::Bang; break;
      case '/': k = Token::Kind::Slash; break;
      default:
        throw ParseError(line_, std::string("unexpected character '") + c + "'");
    }
    tok_ = {k, std::string(1, c), line_};
    ++i_;
  }

  const std::string& s_;
  size_t i_ = 0;
  int line_ = 1;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& text, std::string name)
      : lex_(text), name_(std::move(name)) {}

  Program run() {
    Program p;
    p.name = name_;
    prog_ = &p;
    parse_header(p);
    expect_ident("begin");
    p.body = parse_seq(p, {"end"});
    expect_ident("end");
    if (lex_.peek().kind != Token::Kind::End)
      fail("trailing input after 'end'");
    validate(p);
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(lex_.peek().line, msg);
  }

  Token expect(Token::Kind k, const char* what) {
    if (lex_.peek().kind != k) fail(std::string("expected ") + what);
    return lex_.take();
  }

  void expect_ident(const std::string& word) {
    Token t = expect(Token::Kind::Ident, ("'" + word + "'").c_str());
    if (t.text != word) throw ParseError(t.line, "expected '" + word + "'");
  }

  bool peek_ident(const std::string& word) {
    return lex_.peek().kind == Token::Kind::Ident && lex_.peek().text == word;
  }

  std::vector<std::string> ident_list(Token::Kind terminator) {
    std::vector<std::string> out;
    while (true) {
      out.push_back(expect(Token::Kind::Ident, "identifier").text);
      if (lex_.peek().kind == Token::Kind::Comma) { lex_.take(); continue; }
      break;
    }
    expect(terminator, terminator == Token::Kind::Semi ? "';'" : "terminator");
    return out;
  }

  void parse_header(Program& p) {
    while (true) {
      if (peek_ident("begin")) return;
      if (lex_.peek().kind == Token::Kind::At) {
        lex_.take();
        Token t = expect(Token::Kind::Ident, "annotation name");
        if (t.text == "expect") {
          Token v = expect(Token::Kind::Ident, "expectation");
          if (v.text == "safe") p.expect = Expectation::Safe;
          else if (v.text == "unsafe") p.expect = Expectation::Unsafe;
          else if (v.text == "not-sc") p.expect = Expectation::NotSc;
          else throw ParseError(v.line, "unknown expectation '" + v.text + "'");
        } else if (t.text == "reach") {
          parse_reach(p);
        } else {
          throw ParseError(t.line, "unknown annotation '@" + t.text + "'");
        }
        continue;
      }
      Token t = expect(Token::Kind::Ident, "declaration or 'begin'");
      if (t.text == "vars" || t.text == "fields") {
        Token s = expect(Token::Kind::Ident, "'loc' or 'data'");
        bool loc = s.text == "loc";
        if (!loc && s.text != "data")
          throw ParseError(s.line, "expected 'loc' or 'data'");
        expect(Token::Kind::Colon, "':'");
        auto names = ident_list(Token::Kind::Semi);
        auto& dst = t.text == "vars"
                        ? (loc ? p.sig.loc_vars : p.sig.data_vars)
                        : (loc ? p.sig.loc_fields : p.sig.data_fields);
        dst.insert(dst.end(), names.begin(), names.end());
      } else if (t.text == "funcs") {
        expect(Token::Kind::Colon, "':'");
        while (true) {
          Token n = expect(Token::Kind::Ident, "function name");
          expect(Token::Kind::Slash, "'/'");
          Token a = expect(Token::Kind::Number, "arity");
          p.sig.funcs.push_back(n.text);
          p.sig.func_arity.push_back(std::stoi(a.text));
          if (lex_.peek().kind == Token::Kind::Comma) { lex_.take(); continue; }
          break;
        }
        expect(Token::Kind::Semi, "';'");
      } else {
        throw ParseError(t.line, "unknown declaration '" + t.text + "'");
      }
    }
  }

  void parse_reach(Program& p) {
    ReachTriple tr;
    tr.name = expect(Token::Kind::Ident, "triple name").text;
    expect(Token::Kind::Colon, "':'");
    expect_ident("start");
    expect(Token::Kind::Eq, "'='");
    tr.start = loc_var_set();
    expect_ident("pointers");
    expect(Token::Kind::Eq, "'='");
    expect(Token::Kind::LBrace, "'{'");
    while (true) {
      Token t = expect(Token::Kind::Ident, "field name");
      int f = p.sig.find_loc_field(t.text);
      if (f < 0) throw ParseError(t.line, "unknown location field '" + t.text + "'");
      tr.pointers.push_back(f);
      if (lex_.peek().kind == Token::Kind::Comma) { lex_.take(); continue; }
      break;
    }
    expect(Token::Kind::RBrace, "'}'");
    expect_ident("stop");
    expect(Token::Kind::Eq, "'='");
    Token st = expect(Token::Kind::Ident, "stop variable");
    int sv = sig().find_var(st.text);
    if (sv < 0 || !sig().is_loc_var(sv))
      throw ParseError(st.line, "stop must be a location variable");
    tr.stop = sv;
    prog_->spec.triples.push_back(std::move(tr));
  }

  std::vector<int> loc_var_set() {
    expect(Token::Kind::LBrace, "'{'");
    std::vector<int> out;
    while (true) {
      Token t = expect(Token::Kind::Ident, "variable");
      int v = sig().find_var(t.text);
      if (v < 0 || !sig().is_loc_var(v))
        throw ParseError(t.line, "'" + t.text + "' is not a location variable");
      out.push_back(v);
      if (lex_.peek().kind == Token::Kind::Comma) { lex_.take(); continue; }
      break;
    }
    expect(Token::Kind::RBrace, "'}'");
    return out;
  }

  const Signature& sig() const { return prog_->sig; }

  // --- statements -------------------------------------------------------

  std::unique_ptr<Node> parse_seq(Program& p,
                                  const std::set<std::string>& stop_words) {
    prog_ = &p;
    auto seq = std::make_unique<Node>();
    seq->kind = Node::Kind::Seq;
    while (true) {
      if (lex_.peek().kind == Token::Kind::RBrace) break;
      if (lex_.peek().kind == Token::Kind::Ident &&
          stop_words.count(lex_.peek().text))
        break;
      seq->kids.push_back(parse_stmt(p));
      if (lex_.peek().kind == Token::Kind::Semi) { lex_.take(); continue; }
      break;
    }
    if (seq->kids.empty()) {
      seq->kind = Node::Kind::Skip;
      seq->kids.clear();
    } else if (seq->kids.size() == 1) {
      return std::move(seq->kids[0]);
    }
    return seq;
  }

  std::unique_ptr<Node> parse_block(Program& p) {
    expect(Token::Kind::LBrace, "'{'");
    auto n = parse_seq(p, {});
    expect(Token::Kind::RBrace, "'}'");
    return n;
  }

  std::unique_ptr<Node> atomic(Stmt s) {
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Atomic;
    n->stmt = std::move(s);
    return n;
  }

  int var_of(const Token& t) {
    int v = sig().find_var(t.text);
    if (v < 0) throw ParseError(t.line, "undeclared variable '" + t.text + "'");
    return v;
  }

  std::unique_ptr<Node> parse_stmt(Program& p) {
    Token t = expect(Token::Kind::Ident, "statement");
    if (t.text == "skip") {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Skip;
      return n;
    }
    if (t.text == "if") {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::If;
      expect(Token::Kind::LParen, "'('");
      n->cond = parse_cond();
      expect(Token::Kind::RParen, "')'");
      n->kids.push_back(parse_block(p));
      if (peek_ident("else")) {
        lex_.take();
        n->kids.push_back(parse_block(p));
      } else {
        auto sk = std::make_unique<Node>();
        sk->kind = Node::Kind::Skip;
        n->kids.push_back(std::move(sk));
      }
      return n;
    }
    if (t.text == "while") {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::While;
      expect(Token::Kind::LParen, "'('");
      n->cond = parse_cond();
      expect(Token::Kind::RParen, "')'");
      n->kids.push_back(parse_block(p));
      return n;
    }
    if (t.text == "assume") {
      expect(Token::Kind::LParen, "'('");
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Assume;
      n->cond = parse_cond();
      expect(Token::Kind::RParen, "')'");
      return n;
    }
    if (t.text == "assert") {
      expect(Token::Kind::LParen, "'('");
      if (peek_ident("false")) {
        lex_.take();
        expect(Token::Kind::RParen, "')'");
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::AssertFalse;
        return n;
      }
      // assert(c) ~> if (c) skip else assert(false)
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::If;
      n->cond = parse_cond();
      expect(Token::Kind::RParen, "')'");
      auto sk = std::make_unique<Node>();
      sk->kind = Node::Kind::Skip;
      auto av = std::make_unique<Node>();
      av->kind = Node::Kind::AssertFalse;
      n->kids.push_back(std::move(sk));
      n->kids.push_back(std::move(av));
      return n;
    }
    if (t.text == "alloc" || t.text == "free") {
      expect(Token::Kind::LParen, "'('");
      Token v = expect(Token::Kind::Ident, "variable");
      expect(Token::Kind::RParen, "')'");
      Stmt s;
      s.kind = t.text == "alloc" ? StmtKind::Alloc : StmtKind::Free;
      s.lhs = var_of(v);
      if (!sig().is_loc_var(s.lhs))
        throw ParseError(v.line, t.text + " needs a location variable");
      return atomic(std::move(s));
    }
    // assignment or store, starting with a variable
    int lhs = var_of(t);
    if (lex_.peek().kind == Token::Kind::Dot) {
      lex_.take();
      Token f = expect(Token::Kind::Ident, "field name");
      expect(Token::Kind::Assign, "':='");
      Token r = expect(Token::Kind::Ident, "variable");
      Stmt s;
      s.lhs = lhs;
      s.rhs = var_of(r);
      s.field = sig().find_loc_field(f.text);
      if (s.field >= 0) {
        s.kind = StmtKind::StoreLoc;
        if (!sig().is_loc_var(s.rhs))
          throw ParseError(r.line, "location field stores a location variable");
      } else {
        s.field = sig().find_data_field(f.text);
        if (s.field < 0)
          throw ParseError(f.line, "undeclared field '" + f.text + "'");
        s.kind = StmtKind::StoreData;
        if (sig().is_loc_var(s.rhs))
          throw ParseError(r.line, "data field stores a data variable");
      }
      if (!sig().is_loc_var(lhs))
        throw ParseError(t.line, "field store needs a location variable");
      return atomic(std::move(s));
    }
    expect(Token::Kind::Assign, "':='");
    Token r = expect(Token::Kind::Ident, "expression");
    if (lex_.peek().kind == Token::Kind::LParen) {  // x := f(args)
      lex_.take();
      Stmt s;
      s.kind = StmtKind::AssignFunc;
      s.lhs = lhs;
      s.func = sig().find_func(r.text);
      if (s.func < 0) throw ParseError(r.line, "undeclared function '" + r.text + "'");
      if (lex_.peek().kind != Token::Kind::RParen) {
        while (true) {
          Token a = expect(Token::Kind::Ident, "argument");
          s.args.push_back(var_of(a));
          if (!std::all_of(s.args.end() - 1, s.args.end(),
                           [&](int v) { return !sig().is_loc_var(v); }))
            throw ParseError(a.line, "function arguments are data variables");
          if (lex_.peek().kind == Token::Kind::Comma) { lex_.take(); continue; }
          break;
        }
      }
      expect(Token::Kind::RParen, "')'");
      if (int(s.args.size()) != sig().arity(s.func))
        throw ParseError(r.line, "wrong arity for '" + r.text + "'");
      if (sig().is_loc_var(lhs))
        throw ParseError(t.line, "function result is data-sorted");
      return atomic(std::move(s));
    }
    if (lex_.peek().kind == Token::Kind::Dot) {  // x := y.f
      lex_.take();
      Token f = expect(Token::Kind::Ident, "field name");
      Stmt s;
      s.lhs = lhs;
      s.rhs = var_of(r);
      if (!sig().is_loc_var(s.rhs))
        throw ParseError(r.line, "dereference needs a location variable");
      s.field = sig().find_loc_field(f.text);
      if (s.field >= 0) {
        s.kind = StmtKind::LoadLoc;
        if (!sig().is_loc_var(lhs))
          throw ParseError(t.line, "location load needs a location variable");
      } else {
        s.field = sig().find_data_field(f.text);
        if (s.field < 0)
          throw ParseError(f.line, "undeclared field '" + f.text + "'");
        s.kind = StmtKind::LoadData;
        if (sig().is_loc_var(lhs))
          throw ParseError(t.line, "data load needs a data variable");
      }
      return atomic(std::move(s));
    }
    // x := y
    Stmt s;
    s.kind = StmtKind::AssignVar;
    s.lhs = lhs;
    s.rhs = var_of(r);
    if (sig().is_loc_var(s.lhs) != sig().is_loc_var(s.rhs))
      throw ParseError(r.line, "assignment mixes sorts");
    s.sort = sig().var_sort(s.lhs);
    return atomic(std::move(s));
  }

  // --- conditions -------------------------------------------------------

  std::unique_ptr<Cond> parse_cond() { return parse_or(); }

  std::unique_ptr<Cond> parse_or() {
    auto c = parse_and();
    while (lex_.peek().kind == Token::Kind::OrOr) {
      lex_.take();
      auto n = std::make_unique<Cond>();
      n->kind = Cond::Kind::Or;
      n->a = std::move(c);
      n->b = parse_and();
      c = std::move(n);
    }
    return c;
  }

  std::unique_ptr<Cond> parse_and() {
    auto c = parse_unary();
    while (lex_.peek().kind == Token::Kind::AndAnd) {
      lex_.take();
      auto n = std::make_unique<Cond>();
      n->kind = Cond::Kind::And;
      n->a = std::move(c);
      n->b = parse_unary();
      c = std::move(n);
    }
    return c;
  }

  std::unique_ptr<Cond> parse_unary() {
    if (lex_.peek().kind == Token::Kind::Bang) {
      lex_.take();
      auto n = std::make_unique<Cond>();
      n->kind = Cond::Kind::Not;
      n->a = parse_unary();
      return n;
    }
    if (lex_.peek().kind == Token::Kind::LParen) {
      lex_.take();
      auto c = parse_cond();
      expect(Token::Kind::RParen, "')'");
      return c;
    }
    Token l = expect(Token::Kind::Ident, "variable");
    auto n = std::make_unique<Cond>();
    n->lhs = var_of(l);
    Token op = lex_.take();
    if (op.kind == Token::Kind::Eq) n->kind = Cond::Kind::Eq;
    else if (op.kind == Token::Kind::Neq) n->kind = Cond::Kind::Neq;
    else throw ParseError(op.line, "expected '=' or '!='");
    Token r = expect(Token::Kind::Ident, "variable");
    n->rhs = var_of(r);
    if (sig().is_loc_var(n->lhs) != sig().is_loc_var(n->rhs))
      throw ParseError(r.line, "comparison mixes sorts");
    n->sort = sig().var_sort(n->lhs);
    return n;
  }

  Lexer lex_;
  std::string name_;
  Program* prog_ = nullptr;
};

void check_assigned(const Program& p, const Node& n,
                    const std::set<int>& constants) {
  switch (n.kind) {
    case Node::Kind::Atomic: {
      const Stmt& s = n.stmt;
      bool writes_lhs = s.kind == StmtKind::AssignVar ||
                        s.kind == StmtKind::LoadLoc ||
                        s.kind == StmtKind::LoadData ||
                        s.kind == StmtKind::AssignFunc ||
                        s.kind == StmtKind::Alloc;
      if (writes_lhs && constants.count(s.lhs))
        throw ParseError(0, "spec constant '" + p.sig.var_name(s.lhs) +
                                "' must never be assigned");
      break;
    }
    default:
      for (const auto& k : n.kids) check_assigned(p, *k, constants);
  }
}

}  // namespace

Program parse_program(const std::string& text, const std::string& name) {
  Parser ps(text, name);
  return ps.run();
}

void validate(const Program& p) {
  // pairwise distinct names across every category
  std::set<std::string> seen;
  auto add_all = [&](const std::vector<std::string>& v, const char* what) {
    for (const auto& n : v)
      if (!seen.insert(n).second)
        throw ParseError(0, std::string("duplicate name '") + n + "' (" + what + ")");
  };
  add_all(p.sig.loc_vars, "location variable");
  add_all(p.sig.data_vars, "data variable");
  add_all(p.sig.loc_fields, "location field");
  add_all(p.sig.data_fields, "data field");
  add_all(p.sig.funcs, "function");

  for (const auto& t : p.spec.triples) {
    if (t.stop < 0 || !p.sig.is_loc_var(t.stop))
      throw ParseError(0, "triple '" + t.name + "' lacks a stop constant");
    if (t.start.empty())
      throw ParseError(0, "triple '" + t.name + "' has no start constants");
  }

  if (p.body) {
    auto cons = p.spec.constants();
    check_assigned(p, *p.body, {cons.begin(), cons.end()});
  }
}

}  // namespace fds
