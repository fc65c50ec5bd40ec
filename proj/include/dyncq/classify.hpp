#pragma once

#include <string>

#include "dyncq/ast.hpp"

namespace dyncq {

// Syntactic formula fragments, ordered by containment. The classifier is
// strictly syntactic on the given AST: a formula that is semantically a CQ
// but not written as one (say, a conjunction of two quantified formulas)
// classifies higher.
enum class Fragment {
  PropCQ,
  PropUCQ,
  PropCQNeg,
  PropUCQNeg,
  Prop,
  CQ,
  UCQ,
  CQNeg,
  UCQNeg,  // = existential-prefix FO
  ForallStarFO,
  FOConj,  // arbitrary prenex prefix, matrix a conjunction of atoms
  QFreeWithFunctions,
  GeneralFO,
};

const char* fragment_name(Fragment f);
Fragment fragment_from_name(const std::string& name);

struct ClassifyResult {
  Fragment fragment;
  bool prenex;         // quantifier chain followed by a quantifier-free matrix
  std::string prefix;  // when prenex: one of E/A per binder, outermost first
};

// Least accepting fragment in the fixed scan order (a linear extension of the
// containment order; ties between incomparable fragments go to the earlier
// one). Formulas containing function terms classify as QFreeWithFunctions
// when quantifier-free and GeneralFO otherwise.
ClassifyResult classify(const FormulaPtr& f);

// Acceptance check used for pass certificates: is f inside the fragment
// (not necessarily its least one)?
bool fragment_accepts(Fragment frag, const FormulaPtr& f);

bool fragment_leq(Fragment a, Fragment b);

// No Not node anywhere in the formula.
bool is_negation_free(const FormulaPtr& f);

// Quantifier-prefix class membership: f is prenex and its prefix is a
// subsequence of pattern (missing positions are dummy quantifiers).
bool matches_prefix_pattern(const FormulaPtr& f, const std::string& pattern);

// E <-> A.
std::string dual_prefix(const std::string& pattern);

}  // namespace dyncq
