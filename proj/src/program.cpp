#include "dyncq/program.hpp"

#include <algorithm>
#include <set>

#include "dyncq/errors.hpp"

namespace dyncq {

std::string dialect_name(Dialect d) {
  switch (d) {
    case Dialect::Absolute: return "abs";
    case Dialect::Delta: return "delta";
    case Dialect::QF: return "qf";
  }
  return "?";
}

Dialect dialect_from_name(const std::string& name) {
  if (name == "abs") return Dialect::Absolute;
  if (name == "delta") return Dialect::Delta;
  if (name == "qf") return Dialect::QF;
  throw Error("unknown dialect '" + name + "'");
}

std::string modkind_name(ModKind k) { return k == ModKind::Ins ? "ins" : "del"; }

ModKind modkind_from_name(const std::string& name) {
  if (name == "ins") return ModKind::Ins;
  if (name == "del") return ModKind::Del;
  throw Error("unknown modification kind '" + name + "'");
}

InitSpecPtr InitSpec::empty() {
  static const InitSpecPtr spec = std::make_shared<InitSpec>();
  return spec;
}

InitSpecPtr InitSpec::full() {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::Full;
  return s;
}

InitSpecPtr InitSpec::from_formula(std::vector<std::string> vars, FormulaPtr f) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::Formula;
  s->vars = std::move(vars);
  s->formula = std::move(f);
  return s;
}

InitSpecPtr InitSpec::eval_on_init(std::vector<std::string> vars, FormulaPtr f) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::EvalOnInit;
  s->vars = std::move(vars);
  s->formula = std::move(f);
  return s;
}

InitSpecPtr InitSpec::complement_of(InitSpecPtr inner) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::ComplementOf;
  s->inner = std::move(inner);
  return s;
}

InitSpecPtr InitSpec::procedure(std::string name) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::Proc;
  s->proc = std::move(name);
  return s;
}

InitSpecPtr InitSpec::one_step(std::string base, std::string symbol, ModKind kind, std::string rel) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::OneStep;
  s->base = std::move(base);
  s->symbol = std::move(symbol);
  s->mod_kind = kind;
  s->rel = std::move(rel);
  return s;
}

InitSpecPtr InitSpec::tagged(bool padded, InitSpecPtr inner) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::Tagged;
  s->padded = padded;
  s->inner = std::move(inner);
  return s;
}

InitSpecPtr InitSpec::size_dispatch(InitSpecPtr one, InitSpecPtr many) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::SizeDispatch;
  s->inner = std::move(one);
  s->inner2 = std::move(many);
  return s;
}

InitSpecPtr InitSpec::fn_graph(std::string proc) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::FnGraph;
  s->proc = std::move(proc);
  return s;
}

InitSpecPtr InitSpec::nonempty_of(int inner_arity, InitSpecPtr inner) {
  auto s = std::make_shared<InitSpec>();
  s->kind = Kind::NonEmptyOf;
  s->inner_arity = inner_arity;
  s->inner = std::move(inner);
  return s;
}

InitSpecPtr DynamicProgram::init_for(const std::string& aux) const {
  auto it = inits.find(aux);
  return it == inits.end() ? InitSpec::empty() : it->second;
}

FnInitSpec DynamicProgram::fn_init_for(const std::string& fn) const {
  auto it = fn_inits.find(fn);
  return it == fn_inits.end() ? FnInitSpec{} : it->second;
}

ProgramPtr DynamicProgram::find_base(const std::string& name) const {
  for (const auto& [bname, prog] : bases) {
    if (bname == name) return prog;
  }
  return nullptr;
}

const Rule& DynamicProgram::rule(const std::string& aux, ModKind kind, const std::string& rel) const {
  auto it = rules.find(RuleKey{aux, kind, rel});
  if (it == rules.end()) {
    throw SchemaError("no update rule for " + aux + " under " + modkind_name(kind) + " " + rel);
  }
  return it->second;
}

const DeltaRule& DynamicProgram::delta_rule(const std::string& aux, ModKind kind,
                                            const std::string& rel) const {
  auto it = delta_rules.find(RuleKey{aux, kind, rel});
  if (it == delta_rules.end()) {
    throw SchemaError("no delta rule for " + aux + " under " + modkind_name(kind) + " " + rel);
  }
  return it->second;
}

const FnRule& DynamicProgram::fn_rule(const std::string& fn, ModKind kind,
                                      const std::string& rel) const {
  auto it = fn_rules.find(RuleKey{fn, kind, rel});
  if (it == fn_rules.end()) {
    throw SchemaError("no function rule for " + fn + " under " + modkind_name(kind) + " " + rel);
  }
  return it->second;
}

std::vector<RuleKey> rule_keys_for(const Schema& schema, const std::string& aux) {
  std::vector<RuleKey> keys;
  for (ModKind kind : {ModKind::Ins, ModKind::Del}) {
    for (const auto& input : schema.input_relations) {
      keys.push_back(RuleKey{aux, kind, input.name});
    }
  }
  return keys;
}

bool DynamicProgram::is_constant_symbol(const std::string& sym) const {
  if (schema.is_aux(sym)) {
    for (const auto& key : rule_keys_for(schema, sym)) {
      if (dialect == Dialect::Delta) {
        auto it = delta_rules.find(key);
        if (it == delta_rules.end()) return false;
        if (it->second.add->kind != Formula::Kind::False ||
            it->second.remove->kind != Formula::Kind::False) {
          return false;
        }
      } else {
        auto it = rules.find(key);
        if (it == rules.end()) return false;
        const Rule& r = it->second;
        std::vector<TermPtr> args;
        for (const auto& v : r.targets) args.push_back(Term::var(v));
        if (!equal(r.formula, Formula::rel(sym, std::move(args)))) return false;
      }
    }
    return true;
  }
  if (schema.is_fn(sym)) {
    for (const auto& key : rule_keys_for(schema, sym)) {
      auto it = fn_rules.find(key);
      if (it == fn_rules.end()) return false;
      const FnRule& r = it->second;
      std::vector<TermPtr> args;
      for (const auto& v : r.args) args.push_back(Term::var(v));
      if (!equal(r.term, Term::fn(sym, std::move(args)))) return false;
    }
    return true;
  }
  return false;
}

namespace {

struct ProcInfo {
  int arity;
  bool needs_graph;
};

const std::map<std::string, ProcInfo>& init_proc_registry() {
  static const std::map<std::string, ProcInfo> procs = {
      {"reflexive-tc", {2, true}},   {"tc", {2, true}},
      {"identity", {2, false}},      {"inequality", {2, false}},
      {"singleton-zero", {1, false}}, {"max-outdegree-set", {1, true}},
  };
  return procs;
}

const std::map<std::string, int>& fn_proc_registry() {
  // name -> required arity, -1 for any
  static const std::map<std::string, int> procs = {
      {"zero", -1},        {"one-sat", 0},            {"succ-sat", 1},
      {"pred-sat", 1},     {"outdegree", 1},          {"outdegree-histogram", 1},
      {"max-outdegree-value", 0},
  };
  return procs;
}

void check_formula_symbols(const DynamicProgram& p, const FormulaPtr& f,
                           const std::string& where, bool allow_aux, int aux_limit) {
  for (const auto& sym : relation_symbols(f)) {
    if (p.schema.is_input(sym)) continue;
    if (allow_aux && p.schema.is_aux(sym)) {
      if (aux_limit >= 0) {
        int idx = -1;
        for (size_t i = 0; i < p.schema.aux_relations.size(); ++i) {
          if (p.schema.aux_relations[i].name == sym) idx = static_cast<int>(i);
        }
        if (idx >= aux_limit) {
          throw SchemaError(where + " refers to '" + sym + "', which is not initialized yet");
        }
      }
      continue;
    }
    throw SchemaError(where + " mentions undeclared relation '" + sym + "'");
  }
  for (const auto& sym : function_symbols(f)) {
    if (p.dialect != Dialect::QF || !p.schema.is_fn(sym)) {
      throw SchemaError(where + " mentions undeclared function '" + sym + "'");
    }
  }
}

void check_arity_use(const DynamicProgram& p, const FormulaPtr& f, const std::string& where);

void check_arity_use_term(const DynamicProgram& p, const TermPtr& t, const std::string& where) {
  switch (t->kind) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Fn: {
      auto ar = p.schema.fn_arity(t->name);
      if (ar && *ar != static_cast<int>(t->args.size())) {
        throw SchemaError(where + " uses '" + t->name + "' with " +
                          std::to_string(t->args.size()) + " arguments, declared arity " +
                          std::to_string(*ar));
      }
      for (const auto& a : t->args) check_arity_use_term(p, a, where);
      return;
    }
    case Term::Kind::Ite:
      check_arity_use(p, t->cond, where);
      check_arity_use_term(p, t->then_branch, where);
      check_arity_use_term(p, t->else_branch, where);
      return;
  }
}

void check_arity_use(const DynamicProgram& p, const FormulaPtr& f, const std::string& where) {
  if (f->kind == Formula::Kind::Rel) {
    auto ar = p.schema.relation_arity(f->sym);
    if (ar && *ar != static_cast<int>(f->terms.size())) {
      throw SchemaError(where + " uses '" + f->sym + "' with " + std::to_string(f->terms.size()) +
                        " arguments, declared arity " + std::to_string(*ar));
    }
  }
  for (const auto& t : f->terms) check_arity_use_term(p, t, where);
  for (const auto& k : f->kids) check_arity_use(p, k, where);
}

void check_rule_shape(const DynamicProgram& p, const RuleKey& key,
                      const std::vector<std::string>& params,
                      const std::vector<std::string>& targets, int target_arity,
                      const std::string& where) {
  auto rel_ar = p.schema.input_arity(key.rel);
  if (!rel_ar) throw SchemaError(where + ": '" + key.rel + "' is not an input relation");
  if (static_cast<int>(params.size()) != *rel_ar) {
    throw SchemaError(where + ": parameter tuple width " + std::to_string(params.size()) +
                      " does not match arity of " + key.rel);
  }
  if (static_cast<int>(targets.size()) != target_arity) {
    throw SchemaError(where + ": target tuple width " + std::to_string(targets.size()) +
                      " does not match arity of " + key.aux);
  }
  std::set<std::string> seen;
  for (const auto& v : params) {
    if (!seen.insert(v).second) throw SchemaError(where + ": repeated variable '" + v + "'");
  }
  for (const auto& v : targets) {
    if (!seen.insert(v).second) throw SchemaError(where + ": repeated variable '" + v + "'");
  }
}

void check_rule_body(const DynamicProgram& p, const FormulaPtr& f,
                     const std::vector<std::string>& params,
                     const std::vector<std::string>& targets, const std::string& where) {
  std::set<std::string> allowed(params.begin(), params.end());
  allowed.insert(targets.begin(), targets.end());
  for (const auto& v : free_vars(f)) {
    if (!allowed.count(v)) {
      throw SchemaError(where + ": free variable '" + v + "' is neither a parameter nor a target");
    }
  }
  check_formula_symbols(p, f, where, true, -1);
  check_arity_use(p, f, where);
  if (p.dialect != Dialect::QF && contains_function_terms(f)) {
    throw SchemaError(where + ": function terms are only allowed in the qf dialect");
  }
  if (p.dialect == Dialect::QF && !is_quantifier_free(f)) {
    throw SchemaError(where + ": qf dialect rules must be quantifier-free");
  }
}

void check_init_spec(const DynamicProgram& p, const std::string& aux, int aux_index,
                     const InitSpecPtr& spec, int arity);

void check_init_vars(const std::vector<std::string>& vars, const FormulaPtr& f, int arity,
                     const std::string& where) {
  if (static_cast<int>(vars.size()) != arity) {
    throw SchemaError(where + ": " + std::to_string(vars.size()) +
                      " column variables for arity " + std::to_string(arity));
  }
  std::set<std::string> declared(vars.begin(), vars.end());
  if (declared.size() != vars.size()) throw SchemaError(where + ": repeated column variable");
  for (const auto& v : free_vars(f)) {
    if (!declared.count(v)) {
      throw SchemaError(where + ": free variable '" + v + "' is not a column variable");
    }
  }
}

void check_init_spec(const DynamicProgram& p, const std::string& aux, int aux_index,
                     const InitSpecPtr& spec, int arity) {
  const std::string where = "init of " + aux;
  switch (spec->kind) {
    case InitSpec::Kind::Empty:
    case InitSpec::Kind::Full:
      return;
    case InitSpec::Kind::Formula:
      check_init_vars(spec->vars, spec->formula, arity, where);
      check_formula_symbols(p, spec->formula, where, false, -1);
      check_arity_use(p, spec->formula, where);
      if (contains_function_terms(spec->formula)) {
        throw SchemaError(where + ": init formulas must be function-free");
      }
      return;
    case InitSpec::Kind::EvalOnInit:
      check_init_vars(spec->vars, spec->formula, arity, where);
      check_formula_symbols(p, spec->formula, where, true, aux_index);
      check_arity_use(p, spec->formula, where);
      if (contains_function_terms(spec->formula)) {
        throw SchemaError(where + ": init formulas must be function-free");
      }
      return;
    case InitSpec::Kind::ComplementOf:
      check_init_spec(p, aux, aux_index, spec->inner, arity);
      return;
    case InitSpec::Kind::Proc: {
      auto it = init_proc_registry().find(spec->proc);
      if (it == init_proc_registry().end()) {
        throw SchemaError(where + ": unknown init procedure '" + spec->proc + "'");
      }
      if (it->second.arity != arity) {
        throw SchemaError(where + ": procedure '" + spec->proc + "' produces arity " +
                          std::to_string(it->second.arity) + ", needed " + std::to_string(arity));
      }
      return;
    }
    case InitSpec::Kind::OneStep: {
      ProgramPtr base = p.find_base(spec->base);
      if (!base) throw SchemaError(where + ": unknown base program '" + spec->base + "'");
      auto sym_ar = base->schema.aux_arity(spec->symbol);
      if (!sym_ar) {
        throw SchemaError(where + ": '" + spec->symbol + "' is not an auxiliary relation of base '" +
                          spec->base + "'");
      }
      auto rel_ar = base->schema.input_arity(spec->rel);
      if (!rel_ar) {
        throw SchemaError(where + ": '" + spec->rel + "' is not an input relation of base '" +
                          spec->base + "'");
      }
      if (arity != *rel_ar + *sym_ar) {
        throw SchemaError(where + ": one-step arity mismatch, expected " +
                          std::to_string(*rel_ar + *sym_ar) + ", declared " + std::to_string(arity));
      }
      return;
    }
    case InitSpec::Kind::Tagged:
      if (arity < 1) throw SchemaError(where + ": tagged init needs arity >= 1");
      check_init_spec(p, aux, aux_index, spec->inner, arity - 1);
      return;
    case InitSpec::Kind::SizeDispatch:
      check_init_spec(p, aux, aux_index, spec->inner, arity);
      check_init_spec(p, aux, aux_index, spec->inner2, arity);
      return;
    case InitSpec::Kind::FnGraph: {
      auto it = fn_proc_registry().find(spec->proc);
      if (it == fn_proc_registry().end()) {
        throw SchemaError(where + ": unknown function init procedure '" + spec->proc + "'");
      }
      if (arity < 1) throw SchemaError(where + ": fngraph init needs arity >= 1");
      if (it->second >= 0 && it->second != arity - 1) {
        throw SchemaError(where + ": procedure '" + spec->proc + "' has arity " +
                          std::to_string(it->second) + ", graph needs relation arity " +
                          std::to_string(it->second + 1));
      }
      return;
    }
    case InitSpec::Kind::NonEmptyOf:
      if (arity != 0) throw SchemaError(where + ": nonempty init needs arity 0");
      if (spec->inner_arity < 0) throw SchemaError(where + ": negative inner arity");
      check_init_spec(p, aux, aux_index, spec->inner, spec->inner_arity);
      return;
  }
}

}  // namespace

void DynamicProgram::validate() const {
  schema.validate();
  if (!schema.aux_functions.empty() && dialect != Dialect::QF) {
    throw SchemaError("auxiliary functions are only allowed in the qf dialect");
  }
  if (!schema.is_aux(query_symbol)) {
    throw SchemaError("query symbol '" + query_symbol + "' is not an auxiliary relation");
  }

  if (dialect != Dialect::Delta && !delta_rules.empty()) {
    throw SchemaError("add/remove rules are only allowed in the delta dialect");
  }
  if (dialect == Dialect::Delta && !rules.empty()) {
    throw SchemaError("plain set rules are not allowed in the delta dialect");
  }
  if (dialect != Dialect::QF && !fn_rules.empty()) {
    throw SchemaError("function rules are only allowed in the qf dialect");
  }

  for (const auto& decl : schema.aux_relations) {
    for (const auto& key : rule_keys_for(schema, decl.name)) {
      const std::string where = "rule for " + key.aux + " under " + modkind_name(key.kind) + " " + key.rel;
      if (dialect == Dialect::Delta) {
        auto it = delta_rules.find(key);
        if (it == delta_rules.end()) throw SchemaError("missing " + where);
        const DeltaRule& r = it->second;
        check_rule_shape(*this, key, r.params, r.targets, decl.arity, where);
        check_rule_body(*this, r.add, r.params, r.targets, where);
        check_rule_body(*this, r.remove, r.params, r.targets, where);
      } else {
        auto it = rules.find(key);
        if (it == rules.end()) throw SchemaError("missing " + where);
        const Rule& r = it->second;
        check_rule_shape(*this, key, r.params, r.targets, decl.arity, where);
        check_rule_body(*this, r.formula, r.params, r.targets, where);
      }
    }
  }
  for (const auto& decl : schema.aux_functions) {
    for (const auto& key : rule_keys_for(schema, decl.name)) {
      const std::string where = "rule for " + key.aux + " under " + modkind_name(key.kind) + " " + key.rel;
      auto it = fn_rules.find(key);
      if (it == fn_rules.end()) throw SchemaError("missing " + where);
      const FnRule& r = it->second;
      check_rule_shape(*this, key, r.params, r.args, decl.arity, where);
      std::set<std::string> allowed(r.params.begin(), r.params.end());
      allowed.insert(r.args.begin(), r.args.end());
      for (const auto& v : free_vars(r.term)) {
        if (!allowed.count(v)) {
          throw SchemaError(where + ": free variable '" + v + "' is neither a parameter nor an argument");
        }
      }
      check_arity_use_term(*this, r.term, where);
      for (const auto& sym : function_symbols(r.term)) {
        if (!schema.is_fn(sym)) throw SchemaError(where + " mentions undeclared function '" + sym + "'");
      }
      for (const auto& sym : relation_symbols(r.term)) {
        if (!schema.is_input(sym) && !schema.is_aux(sym)) {
          throw SchemaError(where + " mentions undeclared relation '" + sym + "'");
        }
      }
    }
  }

  for (const auto& [key, r] : rules) {
    if (!schema.is_aux(key.aux)) throw SchemaError("rule for undeclared relation '" + key.aux + "'");
    (void)r;
  }
  for (const auto& [key, r] : delta_rules) {
    if (!schema.is_aux(key.aux)) throw SchemaError("rule for undeclared relation '" + key.aux + "'");
    (void)r;
  }
  for (const auto& [key, r] : fn_rules) {
    if (!schema.is_fn(key.aux)) throw SchemaError("rule for undeclared function '" + key.aux + "'");
    (void)r;
  }

  std::set<std::string> base_names;
  for (const auto& [name, prog] : bases) {
    if (name.empty()) throw SchemaError("base program with empty name");
    if (!base_names.insert(name).second) throw SchemaError("duplicate base program '" + name + "'");
    if (!prog) throw SchemaError("base program '" + name + "' is missing");
    prog->validate();
  }

  for (const auto& [aux, spec] : inits) {
    auto ar = schema.aux_arity(aux);
    if (!ar) throw SchemaError("init for '" + aux + "', which is not an auxiliary relation");
    int aux_index = 0;
    for (size_t i = 0; i < schema.aux_relations.size(); ++i) {
      if (schema.aux_relations[i].name == aux) aux_index = static_cast<int>(i);
    }
    check_init_spec(*this, aux, aux_index, spec, *ar);
  }
  for (const auto& [fn, spec] : fn_inits) {
    auto ar = schema.fn_arity(fn);
    if (!ar) throw SchemaError("function init for '" + fn + "', which is not an auxiliary function");
    auto it = fn_proc_registry().find(spec.proc);
    if (it == fn_proc_registry().end()) {
      throw SchemaError("unknown function init procedure '" + spec.proc + "'");
    }
    if (it->second >= 0 && it->second != *ar) {
      throw SchemaError("function init procedure '" + spec.proc + "' produces arity " +
                        std::to_string(it->second) + ", needed " + std::to_string(*ar));
    }
  }
}

}  // namespace dyncq
