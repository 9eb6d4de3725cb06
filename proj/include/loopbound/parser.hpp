#pragma once

#include <stdexcept>
#include <string>

#include "loopbound/program.hpp"

namespace loopbound {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

struct SemanticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the ITS dialect described in the README:
//   (GOAL COMPLEXITY)
//   (STARTTERM (FUNCTIONSYMBOLS <loc>))
//   (VAR <v1> <v2> ...)
//   (RULES <rule>*)
// where <rule> is <loc>(<args>) -> <loc>(<exprs>) [:|: atom (&& atom)*].
IntegerProgram parseProgram(const std::string& text);

}  // namespace loopbound
