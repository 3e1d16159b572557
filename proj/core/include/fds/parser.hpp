// Copyright (c) 2026 The fdsv authors.
// Distributed under the MIT license; see the LICENSE file.

#ifndef FDS_PARSER_HPP
#define FDS_PARSER_HPP

#include <stdexcept>
#include <string>

#include "fds/ast.hpp"

namespace fds {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what_)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what_),
        line(line_) {}
};

// Parses the keyword/line-oriented surface syntax:
//
//   @expect safe            (optional; one of safe / unsafe / not-sc)
//   vars loc: h, x, NIL;
//   vars data: k, c, yes;
//   fields loc: next;
//   fields data: val;
//   funcs: le/2;
//   @reach r1: start={h} pointers={next} stop=NIL
//   begin
//     x := h;
//     while (x != NIL) { t := x.next; x := t };
//     assert(x = NIL)
//   end
//
// assert(c) desugars to `if (!(c)) assert(false) else skip`.
// Throws ParseError on malformed input.
Program parse_program(const std::string& text, const std::string& name = "");

// Static well-formedness checks beyond grammar: names declared and pairwise
// distinct, statements well-sorted, spec constants (start/stop variables)
// never assigned/allocated, stop sets singleton.  Throws ParseError.
void validate(const Program& p);

}  // namespace fds

#endif  // FDS_PARSER_HPP
