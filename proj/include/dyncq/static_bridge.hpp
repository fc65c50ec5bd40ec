#pragma once

#include <string>
#include <vector>

#include "dyncq/ast.hpp"
#include "dyncq/program.hpp"

namespace dyncq {

// One modification step: which kind and which input relation it touches.
// Patterns are ordered oldest first, so pattern[0] is applied to the
// initial structure and pattern.back() is the most recent step.
struct ModStep {
  ModKind kind;
  std::string rel;
};

using ModPattern = std::vector<ModStep>;

// Result of weaving a modification pattern into a formula. step_vars[t]
// holds the parameter names of pattern step t (ordered as the pattern),
// all free in the formula.
struct ModFormula {
  FormulaPtr formula;
  std::vector<std::vector<std::string>> step_vars;
};

// Rewrites phi so that evaluating the result on a structure is the same
// as evaluating phi after the pattern's modifications have been applied,
// with each step's tuple supplied through fresh free parameters.
// Quantifier shape is preserved: atoms are replaced by quantifier-free
// combinations of themselves and parameter equalities. phi must be
// function free and use only relation symbols declared in `schema`
// as input relations.
ModFormula modification_formula(const FormulaPtr& phi, const ModPattern& pattern,
                                const Schema& schema);

// Same, with caller supplied parameter names (one vector per step, sized
// to the relation's arity, disjoint from phi's variables and each other).
FormulaPtr modification_formula(const FormulaPtr& phi, const ModPattern& pattern,
                                const std::vector<std::vector<std::string>>& step_vars,
                                const Schema& schema);

// Compiles a first order formula over the given input relations into a
// non-recursive absolute program whose query relation tracks the formula
// under single-step modifications. The query's columns follow the
// formula's free variables in sorted name order. Rule bodies stay inside
// the existential fragment: each is either quantifier free, a single
// existential quantifier over an atom, or a negated atom.
ProgramPtr fo_to_dynamic(const FormulaPtr& phi, const std::vector<SymbolDecl>& inputs);

// Inverse direction: folds a non-recursive absolute program with
// formula initializations back into a single first order formula over
// the input schema, equivalent to the program's query on every
// structure. Free variables are named y1..yk, matching the query's
// columns. Throws LimitError if the intermediate formulas grow past
// the size limit.
FormulaPtr dynamic_to_fo(const DynamicProgram& p);

// True when the program's dependency graph is acyclic, i.e. the program
// can be unfolded into a static formula.
bool is_non_recursive(const DynamicProgram& p);

}  // namespace dyncq
