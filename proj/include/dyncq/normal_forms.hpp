#pragma once

#include "dyncq/ast.hpp"

namespace dyncq {

// Negation normal form: negations pushed down to atoms, double negations
// cancelled. Works on any formula; relation atoms are opaque (term arguments,
// including ite conditions, are left untouched).
FormulaPtr to_nnf(const FormulaPtr& f);

// Negation of f, simplified through NNF-style pushing (to_nnf of !f).
FormulaPtr negate_nnf(const FormulaPtr& f);

// Prenex normal form. Every bound variable is renamed to a fresh v$k name
// (deterministic left-to-right), so quantifier pulling never captures.
// Function-free input required.
FormulaPtr to_prenex(const FormulaPtr& f);

// Existential prefix form: prefix over ((!E)|E)* followed by a quantifier-
// free matrix. prefix_length counts ! and E symbols up to the last E.
struct EpfResult {
  FormulaPtr formula;
  int prefix_length;
};
EpfResult to_existential_prefix_form(const FormulaPtr& f);

// Naive distributive CNF/DNF for quantifier-free formulas. Duplicate literals
// and clauses are dropped. Aborts with LimitError past 10^6 literal nodes.
FormulaPtr qf_to_cnf(const FormulaPtr& f);
FormulaPtr qf_to_dnf(const FormulaPtr& f);

// Clause view of the same conversions: outer list per clause/term, inner list
// of literals. True yields zero clauses (resp. False zero terms).
std::vector<std::vector<FormulaPtr>> qf_cnf_clauses(const FormulaPtr& f);
std::vector<std::vector<FormulaPtr>> qf_dnf_terms(const FormulaPtr& f);

}  // namespace dyncq
