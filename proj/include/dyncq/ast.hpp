#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace dyncq {

class Formula;
class Term;
using FormulaPtr = std::shared_ptr<const Formula>;
using TermPtr = std::shared_ptr<const Term>;

// Terms appear only in QF-dialect programs: variables, applications of
// auxiliary functions, and if-then-else over a quantifier-free condition.
class Term {
 public:
  enum class Kind { Var, Fn, Ite };

  Kind kind;
  std::string name;             // Var: variable name; Fn: function symbol
  std::vector<TermPtr> args;    // Fn arguments
  FormulaPtr cond;              // Ite condition
  TermPtr then_branch;          // Ite
  TermPtr else_branch;          // Ite

  static TermPtr var(std::string name);
  static TermPtr fn(std::string name, std::vector<TermPtr> args);
  static TermPtr ite(FormulaPtr cond, TermPtr t1, TermPtr t2);
};

// First-order formulas. And/Or are n-ary and flattened; the makers absorb
// True/False and collapse singleton connectives, so well-formed ASTs are
// stable under print-then-parse.
class Formula {
 public:
  enum class Kind { True, False, Rel, Eq, Not, And, Or, Exists, Forall };

  Kind kind;
  std::string sym;                 // Rel: relation symbol; Exists/Forall: bound variable
  std::vector<TermPtr> terms;      // Rel: arguments; Eq: exactly two sides
  std::vector<FormulaPtr> kids;    // Not: one; And/Or: two or more; Exists/Forall: one

  static FormulaPtr truth();
  static FormulaPtr falsity();
  static FormulaPtr rel(std::string sym, std::vector<TermPtr> args);
  static FormulaPtr eq(TermPtr lhs, TermPtr rhs);
  static FormulaPtr negation(FormulaPtr f);
  static FormulaPtr conj(std::vector<FormulaPtr> fs);
  static FormulaPtr disj(std::vector<FormulaPtr> fs);
  static FormulaPtr exists(std::string var, FormulaPtr body);
  static FormulaPtr forall(std::string var, FormulaPtr body);
};

bool equal(const TermPtr& a, const TermPtr& b);
bool equal(const FormulaPtr& a, const FormulaPtr& b);

// Convenience shorthands used throughout construction code.
inline TermPtr tvar(std::string n) { return Term::var(std::move(n)); }
FormulaPtr rel_of_vars(std::string sym, const std::vector<std::string>& vars);
FormulaPtr eq_vars(const std::string& a, const std::string& b);

void collect_free_vars(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out);
void collect_free_vars(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out);
std::set<std::string> free_vars(const FormulaPtr& f);
std::set<std::string> free_vars(const TermPtr& t);

// Every variable name occurring anywhere (free, bound, or binder).
std::set<std::string> all_var_names(const FormulaPtr& f);

// All relation symbols / function symbols mentioned, for schema checks.
std::set<std::string> relation_symbols(const FormulaPtr& f);
std::set<std::string> function_symbols(const FormulaPtr& f);
std::set<std::string> relation_symbols(const TermPtr& t);
std::set<std::string> function_symbols(const TermPtr& t);

bool contains_function_terms(const FormulaPtr& f);
bool is_quantifier_free(const FormulaPtr& f);

// Number of AST nodes counted as a tree with sharing collapsed (DAG nodes).
std::size_t dag_node_count(const FormulaPtr& f);

// Capture-avoiding simultaneous renaming of free variables.
TermPtr rename_free_vars(const TermPtr& t, const std::map<std::string, std::string>& sub);
FormulaPtr rename_free_vars(const FormulaPtr& f, const std::map<std::string, std::string>& sub);

// Replaces relation atoms via callback. The callback receives the symbol and
// the argument terms and returns a replacement formula (or nullptr to keep the
// atom unchanged). Used by the transformation passes for symbol substitution.
using AtomRewrite = std::function<FormulaPtr(const std::string& sym, const std::vector<TermPtr>& args)>;
FormulaPtr rewrite_atoms(const FormulaPtr& f, const AtomRewrite& rw);

// Deterministic fresh-name source: yields base$k for the least k making the
// name unused. Shared by prenexing and pass constructions.
class FreshNames {
 public:
  explicit FreshNames(std::set<std::string> used = {}) : used_(std::move(used)) {}
  void reserve(const std::set<std::string>& names);
  std::string fresh(const std::string& base);
  std::vector<std::string> fresh_many(const std::string& base, std::size_t count);

 private:
  std::set<std::string> used_;
  std::map<std::string, int> counters_;
};

// Pretty-printer for the formula DSL; parse(print(f)) == f for maker-built ASTs.
std::string print(const FormulaPtr& f);
std::string print(const TermPtr& t);

}  // namespace dyncq
