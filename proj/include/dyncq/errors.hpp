#pragma once

#include <stdexcept>
#include <string>

namespace dyncq {

// Base class for all workbench errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error in the formula DSL, a program file, a script, or a structure file.
// line/col are 1-based; 0 means unknown.
struct ParseError : Error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int line_ = 0, int col_ = 0)
      : Error(line_ > 0 ? msg + " (line " + std::to_string(line_) + ", col " + std::to_string(col_) + ")"
                        : msg),
        line(line_), col(col_) {}
};

// Ill-formed schema or symbol use (duplicate names, arity mismatch, reserved prefix).
struct SchemaError : Error {
  using Error::Error;
};

// Evaluation failure: unbound variable, unknown symbol, bad state.
struct EvalError : Error {
  using Error::Error;
};

// A transformation pass was applied to a program outside its guard fragment,
// or a construction-side limit was hit.
struct GuardError : Error {
  using Error::Error;
};

// A size guard tripped (CNF/DNF blowup, compiled formula too large).
struct LimitError : Error {
  using Error::Error;
};

// Strict delta mode: some tuple satisfies both the add and the remove formula.
struct DisjointnessError : Error {
  using Error::Error;
};

}  // namespace dyncq
