#pragma once

#include <map>
#include <string>
#include <vector>

#include "dyncq/ast.hpp"
#include "dyncq/state.hpp"

namespace dyncq {

using Assignment = std::map<std::string, int>;

// Naive recursive evaluator. Reference-grade: quantifiers loop over the
// domain, every connective is interpreted directly. Also the only route that
// handles function terms, so the QF dialect always goes through here.
bool eval_formula(const State& s, const FormulaPtr& f, const Assignment& a);
int eval_term(const State& s, const TermPtr& t, const Assignment& a);

// Set-at-a-time evaluator over assignment tables (conjunction = join,
// disjunction = padded union, negation = complement over the subformula's
// free variables, quantifiers = projection / division). Returns the set of
// out_vars tuples that satisfy f under the fixed bindings in `bound`.
// Variables in out_vars that are not free in f range over the whole domain.
// Function terms are not supported on this route.
//
// Subformulas are memoized by node identity, so formulas that share subtrees
// (as transformed programs heavily do) are evaluated once per distinct node.
Relation eval_to_relation(const State& s, const FormulaPtr& f,
                          const std::vector<std::string>& out_vars,
                          const Assignment& bound = {});

// Sentence evaluation via the table route.
bool eval_sentence(const State& s, const FormulaPtr& f, const Assignment& bound = {});

}  // namespace dyncq
