#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dyncq/ast.hpp"
#include "dyncq/schema.hpp"

namespace dyncq {

enum class Dialect { Absolute, Delta, QF };
std::string dialect_name(Dialect d);
Dialect dialect_from_name(const std::string& name);

enum class ModKind { Ins, Del };
std::string modkind_name(ModKind k);
ModKind modkind_from_name(const std::string& name);

class InitSpec;
using InitSpecPtr = std::shared_ptr<const InitSpec>;

// How an auxiliary relation is initialized from the initial input database.
//
// Empty / Full          the trivial relations
// Formula               explicit column variables plus a first-order formula
//                       over the input schema
// EvalOnInit            like Formula, but the formula may also mention aux
//                       relations declared earlier; those are initialized
//                       first and read back
// ComplementOf          complement of the inner spec
// Proc                  named procedure from a fixed registry
// OneStep               runs a named base program: initialize it on the input
//                       database, apply one modification per parameter tuple,
//                       and collect (parameters, tuple) pairs from a symbol
// Tagged                prefixes every tuple of the inner spec with tag 0;
//                       the padded form additionally holds all tuples with a
//                       nonzero first component
// SizeDispatch          one spec for domain size 1, another for size >= 2
// FnGraph               graph of a function init procedure: rows (args, value)
// NonEmptyOf            0-ary flag, set iff the inner spec (of the recorded
//                       arity) comes out nonempty
class InitSpec {
 public:
  enum class Kind {
    Empty, Full, Formula, EvalOnInit, ComplementOf, Proc, OneStep, Tagged, SizeDispatch,
    FnGraph, NonEmptyOf,
  };

  Kind kind = Kind::Empty;
  std::vector<std::string> vars;  // Formula, EvalOnInit
  FormulaPtr formula;             // Formula, EvalOnInit
  InitSpecPtr inner;              // ComplementOf, Tagged, SizeDispatch (size 1), NonEmptyOf
  InitSpecPtr inner2;             // SizeDispatch (size >= 2)
  bool padded = false;            // Tagged
  std::string proc;               // Proc, FnGraph
  std::string base;               // OneStep
  std::string symbol;             // OneStep
  ModKind mod_kind = ModKind::Ins;  // OneStep
  std::string rel;                // OneStep
  int inner_arity = 0;            // NonEmptyOf

  static InitSpecPtr empty();
  static InitSpecPtr full();
  static InitSpecPtr from_formula(std::vector<std::string> vars, FormulaPtr f);
  static InitSpecPtr eval_on_init(std::vector<std::string> vars, FormulaPtr f);
  static InitSpecPtr complement_of(InitSpecPtr inner);
  static InitSpecPtr procedure(std::string name);
  static InitSpecPtr one_step(std::string base, std::string symbol, ModKind kind, std::string rel);
  static InitSpecPtr tagged(bool padded, InitSpecPtr inner);
  static InitSpecPtr size_dispatch(InitSpecPtr one, InitSpecPtr many);
  static InitSpecPtr fn_graph(std::string proc);
  static InitSpecPtr nonempty_of(int inner_arity, InitSpecPtr inner);
};

// Auxiliary functions are initialized from a fixed registry of procedures.
struct FnInitSpec {
  std::string proc = "zero";
};

struct RuleKey {
  std::string aux;  // updated auxiliary symbol
  ModKind kind;
  std::string rel;  // modified input relation

  bool operator<(const RuleKey& o) const {
    if (aux != o.aux) return aux < o.aux;
    if (kind != o.kind) return kind < o.kind;
    return rel < o.rel;
  }
};

struct Rule {  // absolute dialect; also QF relation rules
  std::vector<std::string> params;   // modified tuple
  std::vector<std::string> targets;  // updated tuple
  FormulaPtr formula;
};

struct DeltaRule {
  std::vector<std::string> params;
  std::vector<std::string> targets;
  FormulaPtr add;
  FormulaPtr remove;
};

struct FnRule {  // QF dialect function updates
  std::vector<std::string> params;
  std::vector<std::string> args;
  TermPtr term;
};

class DynamicProgram;
using ProgramPtr = std::shared_ptr<const DynamicProgram>;

class DynamicProgram {
 public:
  Dialect dialect = Dialect::Absolute;
  Schema schema;
  std::string query_symbol;
  std::map<RuleKey, Rule> rules;             // Absolute, QF
  std::map<RuleKey, DeltaRule> delta_rules;  // Delta
  std::map<RuleKey, FnRule> fn_rules;        // QF
  std::map<std::string, InitSpecPtr> inits;  // missing entry means Empty
  std::map<std::string, FnInitSpec> fn_inits;  // missing entry means zero
  // Base programs referenced by OneStep init specs, in declaration order.
  std::vector<std::pair<std::string, ProgramPtr>> bases;

  InitSpecPtr init_for(const std::string& aux) const;
  FnInitSpec fn_init_for(const std::string& fn) const;
  ProgramPtr find_base(const std::string& name) const;

  const Rule& rule(const std::string& aux, ModKind kind, const std::string& rel) const;
  const DeltaRule& delta_rule(const std::string& aux, ModKind kind, const std::string& rel) const;
  const FnRule& fn_rule(const std::string& fn, ModKind kind, const std::string& rel) const;

  // True when every update rule for the symbol keeps it unchanged
  // syntactically (identity rule / both delta formulas false / identity
  // update term).
  bool is_constant_symbol(const std::string& sym) const;

  // Full structural check; throws SchemaError with a description on failure.
  void validate() const;
};

std::vector<RuleKey> rule_keys_for(const Schema& schema, const std::string& aux);

}  // namespace dyncq
