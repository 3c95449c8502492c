#pragma once

#include <stdexcept>
#include <string>

#include "flyauto/term.hpp"

namespace flyauto {

// Raised for malformed term text; carries 1-based line/column.
struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " at " + std::to_string(line_) + ":" +
                             std::to_string(col_)),
          line(line_), col(col_) {}
};

// Term grammar (whitespace-insensitive):
//   term  := "empty" | INT annot? | "oplus(" term "," term ")"
//          | "add(" INT "," INT "," term ")"
//          | "adddir(" INT "," INT "," term ")"
//          | "relab(" pairs "," term ")"
//   pairs := INT ">" INT (";" INT ">" INT)*
//   annot := "[" ("0"|"1")+ "]"
// An optional first line "#mode directed|undirected" declares the edge mode
// (default undirected). Leaf annotations must all have the same width; an
// annotated term has Graph mode.
Term parse_term(const std::string& text);

} // namespace flyauto
