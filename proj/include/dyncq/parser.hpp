#pragma once

#include <string>

#include "dyncq/ast.hpp"
#include "dyncq/schema.hpp"

namespace dyncq {

// Parses a formula against a declared schema. Relation and function symbols
// must be declared; bare identifiers are variables. Throws ParseError with
// line/column on syntax errors, unknown symbols, and arity mismatches.
FormulaPtr parse_formula(const std::string& text, const Schema& schema);

// Parses an update term (QF dialect right-hand sides).
TermPtr parse_term(const std::string& text, const Schema& schema);

// Schema-less parsing for .fo files: every identifier applied to an argument
// list is collected as an input relation of the observed arity; bare
// identifiers are variables. Function terms are rejected.
struct InferredFormula {
  FormulaPtr formula;
  Schema schema;
};
InferredFormula parse_formula_infer(const std::string& text);

}  // namespace dyncq
