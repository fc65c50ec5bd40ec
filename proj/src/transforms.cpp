#include "dyncq/transforms.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dyncq/engine.hpp"
#include "dyncq/errors.hpp"
#include "dyncq/normal_forms.hpp"
#include "json.hpp"

namespace dyncq {

bool PassReport::all_ok() const {
  for (const auto& c : certificates)
    if (!c.ok) return false;
  return true;
}

namespace {

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

[[noreturn]] void guard_fail(const std::string& pass, const std::string& msg) {
  throw GuardError(pass + ": " + msg);
}

void require_dialect(const DynamicProgram& p, Dialect d, const std::string& pass) {
  if (p.dialect != d) {
    const char* want = d == Dialect::Absolute ? "absolute" : d == Dialect::Delta ? "delta" : "qf";
    guard_fail(pass, std::string("program must use the ") + want + " dialect");
  }
}

std::set<std::string> used_symbols(const DynamicProgram& p) {
  std::set<std::string> out;
  for (const auto& d : p.schema.input_relations) out.insert(d.name);
  for (const auto& d : p.schema.aux_relations) out.insert(d.name);
  for (const auto& d : p.schema.aux_functions) out.insert(d.name);
  return out;
}

// Mints schema symbols that are fresh for the program at hand. Prefers the
// suggested name and falls back to $k suffixes; every mint is logged so the
// report's fresh-name list stays a complete injective record.
class Minter {
 public:
  Minter(const DynamicProgram& p, PassReport& rep) : rep_(&rep), used_(used_symbols(p)) {}

  std::string mint(const std::string& role, const std::string& base) {
    std::string name = base;
    for (int k = 0; !used_.insert(name).second; ++k) name = base + "$" + std::to_string(k);
    rep_->fresh_names.emplace_back(role, name);
    return name;
  }

  bool taken(const std::string& name) const { return used_.count(name) != 0; }
  void reserve(const std::string& name) { used_.insert(name); }

 private:
  PassReport* rep_;
  std::set<std::string> used_;
};

void absorb_stage(PassReport& rep, const PassReport& inner, const std::string& stage) {
  for (const auto& [role, name] : inner.fresh_names)
    rep.fresh_names.emplace_back(stage + ": " + role, name);
}

std::vector<std::string> numbered(const std::string& stem, int count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(stem + std::to_string(i + 1));
  return out;
}

std::vector<TermPtr> var_terms(const std::vector<std::string>& vars) {
  std::vector<TermPtr> out;
  out.reserve(vars.size());
  for (const auto& v : vars) out.push_back(Term::var(v));
  return out;
}

std::vector<std::string> names_of(const std::vector<TermPtr>& args) {
  std::vector<std::string> out;
  out.reserve(args.size());
  for (const auto& t : args) {
    if (t->kind != Term::Kind::Var) throw Error("expected a variable argument");
    out.push_back(t->name);
  }
  return out;
}

std::vector<std::string> cat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::string trigger_of(const RuleKey& key) { return modkind_name(key.kind) + " " + key.rel; }

int in_ar(const Schema& s, const std::string& rel) {
  auto a = s.input_arity(rel);
  if (!a) throw SchemaError("unknown input relation " + rel);
  return *a;
}

int aux_ar(const Schema& s, const std::string& name) {
  auto a = s.aux_arity(name);
  if (!a) throw SchemaError("unknown auxiliary relation " + name);
  return *a;
}

// args[i] = params[i], as a conjunction. Empty tuples give True.
FormulaPtr tuple_eq(const std::vector<TermPtr>& args, const std::vector<std::string>& params) {
  std::vector<FormulaPtr> eqs;
  for (size_t i = 0; i < args.size(); ++i) eqs.push_back(Formula::eq(args[i], Term::var(params[i])));
  return Formula::conj(std::move(eqs));
}

// Value of the atom sym(args) right after applying (kind, mod_rel) with
// parameters `params` to the current state. Nullary edge cases collapse via
// the constant-absorbing makers.
FormulaPtr effect_formula(ModKind kind, const std::string& mod_rel,
                          const std::vector<std::string>& params, const std::string& sym,
                          const std::vector<TermPtr>& args) {
  FormulaPtr atom = Formula::rel(sym, args);
  if (sym != mod_rel) return atom;
  FormulaPtr match = tuple_eq(args, params);
  if (kind == ModKind::Ins) return Formula::disj({atom, match});
  return Formula::conj({atom, Formula::negation(match)});
}

// Renames every bound variable to something fresh. Keeps the tree otherwise.
FormulaPtr freshen_bound(const FormulaPtr& f, FreshNames& names,
                         std::map<std::string, std::string>& sub) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Rel:
    case Formula::Kind::Eq: {
      std::vector<TermPtr> terms;
      terms.reserve(f->terms.size());
      for (const auto& t : f->terms) terms.push_back(rename_free_vars(t, sub));
      return f->kind == Formula::Kind::Rel ? Formula::rel(f->sym, std::move(terms))
                                           : Formula::eq(terms[0], terms[1]);
    }
    case Formula::Kind::Not:
      return Formula::negation(freshen_bound(f->kids[0], names, sub));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(freshen_bound(k, names, sub));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      std::string nv = names.fresh(f->sym);
      auto saved = sub.find(f->sym);
      std::string old;
      bool had = saved != sub.end();
      if (had) old = saved->second;
      sub[f->sym] = nv;
      FormulaPtr body = freshen_bound(f->kids[0], names, sub);
      if (had) sub[f->sym] = old; else sub.erase(f->sym);
      return f->kind == Formula::Kind::Exists ? Formula::exists(nv, body) : Formula::forall(nv, body);
    }
  }
  throw Error("unreachable formula kind");
}

FormulaPtr freshen_bound(const FormulaPtr& f, const std::set<std::string>& avoid) {
  FreshNames names(avoid);
  names.reserve(all_var_names(f));
  std::map<std::string, std::string> sub;
  return freshen_bound(f, names, sub);
}

// Rule-body instantiation: simultaneously renames the rule's parameters and
// head variables to the caller's names. Bound variables are renamed apart
// from everything first, so the free renaming can never be captured.
FormulaPtr instantiate(const FormulaPtr& body, const std::vector<std::string>& from_params,
                       const std::vector<std::string>& to_params,
                       const std::vector<std::string>& from_targets,
                       const std::vector<std::string>& to_targets,
                       const std::set<std::string>& extra_avoid = {}) {
  std::set<std::string> avoid = extra_avoid;
  for (const auto& v : to_params) avoid.insert(v);
  for (const auto& v : to_targets) avoid.insert(v);
  FormulaPtr f = freshen_bound(body, avoid);
  std::map<std::string, std::string> sub;
  for (size_t i = 0; i < from_params.size(); ++i) sub[from_params[i]] = to_params[i];
  for (size_t i = 0; i < from_targets.size(); ++i) sub[from_targets[i]] = to_targets[i];
  return rename_free_vars(f, sub);
}

// NNF literal replacement: !S(args) becomes hat(S)(args) and !(s = t) becomes
// eqhat(s, t). The input must be in negation normal form.
FormulaPtr hat_substitute(const FormulaPtr& f, const std::map<std::string, std::string>& hat,
                          const std::string& eqhat) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      return f;
    case Formula::Kind::Not: {
      const FormulaPtr& a = f->kids[0];
      if (a->kind == Formula::Kind::Rel) {
        auto it = hat.find(a->sym);
        if (it == hat.end()) throw Error("no complement relation for " + a->sym);
        return Formula::rel(it->second, a->terms);
      }
      if (a->kind == Formula::Kind::Eq) return Formula::rel(eqhat, a->terms);
      throw Error("formula is not in negation normal form");
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f->kids) kids.push_back(hat_substitute(k, hat, eqhat));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Exists:
      return Formula::exists(f->sym, hat_substitute(f->kids[0], hat, eqhat));
    case Formula::Kind::Forall:
      return Formula::forall(f->sym, hat_substitute(f->kids[0], hat, eqhat));
  }
  throw Error("unreachable formula kind");
}

bool contains_equality(const FormulaPtr& f) {
  if (f->kind == Formula::Kind::Eq) return true;
  for (const auto& k : f->kids)
    if (contains_equality(k)) return true;
  return false;
}

// Conjoins `extra` onto the quantifier-free matrix of a prenex formula.
FormulaPtr conj_into_matrix(const FormulaPtr& f, const FormulaPtr& extra) {
  if (f->kind == Formula::Kind::Exists)
    return Formula::exists(f->sym, conj_into_matrix(f->kids[0], extra));
  if (f->kind == Formula::Kind::Forall)
    return Formula::forall(f->sym, conj_into_matrix(f->kids[0], extra));
  return Formula::conj({f, extra});
}

FormulaPtr close_exists(const std::vector<std::string>& vars, FormulaPtr body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = Formula::exists(*it, body);
  return body;
}

void certify_fragment(const DynamicProgram& out, Fragment frag, PassReport& rep) {
  std::string check = std::string("fragment ") + fragment_name(frag);
  if (out.dialect == Dialect::Delta) {
    for (const auto& [key, dr] : out.delta_rules) {
      rep.certificates.push_back(
          {key.aux, trigger_of(key), "add", check, fragment_accepts(frag, dr.add)});
      rep.certificates.push_back(
          {key.aux, trigger_of(key), "remove", check, fragment_accepts(frag, dr.remove)});
    }
  } else {
    for (const auto& [key, r] : out.rules)
      rep.certificates.push_back({key.aux, trigger_of(key), "", check, fragment_accepts(frag, r.formula)});
  }
}

void certify_negation_free(const DynamicProgram& out, PassReport& rep) {
  std::string check = "negation-free";
  if (out.dialect == Dialect::Delta) {
    for (const auto& [key, dr] : out.delta_rules) {
      rep.certificates.push_back({key.aux, trigger_of(key), "add", check, is_negation_free(dr.add)});
      rep.certificates.push_back(
          {key.aux, trigger_of(key), "remove", check, is_negation_free(dr.remove)});
    }
  } else {
    for (const auto& [key, r] : out.rules)
      rep.certificates.push_back({key.aux, trigger_of(key), "", check, is_negation_free(r.formula)});
  }
}

void identity_symbol_map(const DynamicProgram& p, PassReport& rep) {
  for (const auto& d : p.schema.aux_relations) rep.symbol_map[d.name] = d.name;
  for (const auto& d : p.schema.aux_functions) rep.symbol_map[d.name] = d.name;
}

// Relation symbols an init spec reads when it is evaluated.
void init_refs(const InitSpecPtr& spec, std::set<std::string>& out) {
  if (!spec) return;
  switch (spec->kind) {
    case InitSpec::Kind::EvalOnInit:
      for (const auto& s : relation_symbols(spec->formula)) out.insert(s);
      break;
    case InitSpec::Kind::ComplementOf:
    case InitSpec::Kind::Tagged:
    case InitSpec::Kind::NonEmptyOf:
      init_refs(spec->inner, out);
      break;
    case InitSpec::Kind::SizeDispatch:
      init_refs(spec->inner, out);
      init_refs(spec->inner2, out);
      break;
    default:
      break;
  }
}

bool init_references_aux(const DynamicProgram& p, const InitSpecPtr& spec) {
  std::set<std::string> refs;
  init_refs(spec, refs);
  for (const auto& s : refs)
    if (p.schema.is_aux(s)) return true;
  return false;
}

// Closes a set of source aux symbols under initialization-time dependencies.
std::set<std::string> init_closure(const DynamicProgram& p, std::set<std::string> seed) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& d : p.schema.aux_relations) {
      if (!seed.count(d.name)) continue;
      std::set<std::string> refs;
      init_refs(p.init_for(d.name), refs);
      for (const auto& s : refs)
        if (p.schema.is_aux(s) && seed.insert(s).second) changed = true;
    }
  }
  return seed;
}

// Aux symbols of p whose initial values are read by the given copied init
// specs, closed under init dependencies.
std::set<std::string> frozen_set_for(const DynamicProgram& p, const std::vector<InitSpecPtr>& copied) {
  std::set<std::string> seed;
  for (const auto& spec : copied) {
    std::set<std::string> refs;
    init_refs(spec, refs);
    for (const auto& s : refs)
      if (p.schema.is_aux(s)) seed.insert(s);
  }
  return init_closure(p, std::move(seed));
}

// Re-declares the chosen source relations, in source order, as constants of
// the output: same name, same init, trivial update. They keep the source's
// initial values available to init specs copied into the output; update rules
// of the output never read them past initialization.
void carry_frozen(const DynamicProgram& p, const std::set<std::string>& which, DynamicProgram& out) {
  for (const auto& d : p.schema.aux_relations) {
    if (!which.count(d.name)) continue;
    out.schema.aux_relations.push_back(d);
    if (auto init = p.init_for(d.name)) out.inits[d.name] = init;
    std::vector<std::string> xs = numbered("x", d.arity);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      std::vector<std::string> us = numbered("u", in_ar(p.schema, key.rel));
      if (out.dialect == Dialect::Delta)
        out.delta_rules[key] = DeltaRule{us, xs, Formula::falsity(), Formula::falsity()};
      else
        out.rules[key] = Rule{us, xs, rel_of_vars(d.name, xs)};
    }
  }
}

// Drops aux relations unreachable from the query through rule bodies and
// init-time dependencies. Declaration order is preserved.
void prune_dead_aux(DynamicProgram& out) {
  std::set<std::string> live{out.query_symbol};
  bool changed = true;
  while (changed) {
    changed = false;
    auto touch = [&](const std::string& s) {
      if (out.schema.is_aux(s) && live.insert(s).second) changed = true;
    };
    for (const auto& d : out.schema.aux_relations) {
      if (!live.count(d.name)) continue;
      for (const auto& key : rule_keys_for(out.schema, d.name)) {
        if (out.dialect == Dialect::Delta) {
          const DeltaRule& dr = out.delta_rules.at(key);
          for (const auto& s : relation_symbols(dr.add)) touch(s);
          for (const auto& s : relation_symbols(dr.remove)) touch(s);
        } else {
          for (const auto& s : relation_symbols(out.rules.at(key).formula)) touch(s);
        }
      }
      std::set<std::string> refs;
      init_refs(out.init_for(d.name), refs);
      for (const auto& s : refs) touch(s);
    }
  }
  std::vector<SymbolDecl> kept;
  for (const auto& d : out.schema.aux_relations) {
    if (live.count(d.name)) {
      kept.push_back(d);
      continue;
    }
    for (const auto& key : rule_keys_for(out.schema, d.name)) {
      out.rules.erase(key);
      out.delta_rules.erase(key);
    }
    out.inits.erase(d.name);
  }
  out.schema.aux_relations = std::move(kept);
}

PassResult finish(DynamicProgram out, PassReport rep) {
  auto prog = std::make_shared<DynamicProgram>(std::move(out));
  prog->validate();
  for (auto& [from, to] : rep.symbol_map) {
    if (!to.empty() && !prog->schema.is_aux(to) && !prog->schema.is_fn(to)) to.clear();
  }
  return PassResult{std::move(prog), std::move(rep)};
}

// Output query name: reuse the source's query symbol when nothing else in the
// output claims it, otherwise mint from the fallback base.
std::string pick_query_name(const std::string& source_query, Minter& mint, const std::string& fallback) {
  if (!mint.taken(source_query)) {
    mint.reserve(source_query);
    return source_query;
  }
  return mint.mint("query", fallback);
}

// ---------------------------------------------------------------------------
// dialect changes
// ---------------------------------------------------------------------------

PassResult abs_to_delta_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "abs-to-delta";
  require_dialect(p, Dialect::Absolute, rep.pass);

  DynamicProgram out;
  out.dialect = Dialect::Delta;
  out.schema = p.schema;
  out.query_symbol = p.query_symbol;
  out.inits = p.inits;
  out.bases = p.bases;
  for (const auto& [key, r] : p.rules) {
    FormulaPtr here = rel_of_vars(key.aux, r.targets);
    DeltaRule dr;
    dr.params = r.params;
    dr.targets = r.targets;
    dr.add = Formula::conj({r.formula, Formula::negation(here)});
    dr.remove = Formula::conj({Formula::negation(r.formula), here});
    out.delta_rules[key] = dr;
    rep.certificates.push_back(
        {key.aux, trigger_of(key), "", "add and remove are mutually exclusive", true});
  }
  identity_symbol_map(p, rep);
  return finish(std::move(out), std::move(rep));
}

PassResult delta_to_abs_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "delta-to-abs";
  require_dialect(p, Dialect::Delta, rep.pass);

  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema = p.schema;
  out.query_symbol = p.query_symbol;
  out.inits = p.inits;
  out.bases = p.bases;
  for (const auto& [key, dr] : p.delta_rules) {
    FormulaPtr here = rel_of_vars(key.aux, dr.targets);
    FormulaPtr body =
        Formula::conj({Formula::disj({here, dr.add}), Formula::negation(dr.remove)});
    out.rules[key] = Rule{dr.params, dr.targets, body};
    rep.certificates.push_back(
        {key.aux, trigger_of(key), "", "removals take precedence over additions", true});
  }
  identity_symbol_map(p, rep);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// complement maintenance
// ---------------------------------------------------------------------------

// Core of add-complements, exposed so later passes can reuse the complement
// pairing. Fills `invol` with S <-> hat(S) in both directions for aux and
// input relations; the inequality constant is returned through `eqhat_out`.
DynamicProgram add_complements_core(const DynamicProgram& p, PassReport& rep,
                                    std::map<std::string, std::string>& invol,
                                    std::string& eqhat_out) {
  Minter mint(p, rep);
  std::string eqhat = mint.mint("inequality constant", "__hat_eq");
  eqhat_out = eqhat;
  std::map<std::string, std::string> hat;
  for (const auto& d : p.schema.aux_relations)
    hat[d.name] = mint.mint("complement of " + d.name, "__hat_" + d.name);
  for (const auto& d : p.schema.input_relations)
    hat[d.name] = mint.mint("complement of " + d.name, "__hat_" + d.name);
  for (const auto& [s, h] : hat) {
    invol[s] = h;
    invol[h] = s;
  }

  auto positivize = [&](const FormulaPtr& f) { return hat_substitute(to_nnf(f), hat, eqhat); };

  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = p.schema.input_relations;
  out.query_symbol = p.query_symbol;
  out.bases = p.bases;
  out.schema.aux_relations = p.schema.aux_relations;
  out.inits = p.inits;

  out.schema.aux_relations.push_back({eqhat, 2});
  out.inits[eqhat] =
      InitSpec::from_formula({"x1", "x2"}, Formula::negation(eq_vars("x1", "x2")));
  for (const auto& key : rule_keys_for(out.schema, eqhat)) {
    std::vector<std::string> us = numbered("u", in_ar(out.schema, key.rel));
    out.rules[key] = Rule{us, {"x1", "x2"}, rel_of_vars(eqhat, {"x1", "x2"})};
  }

  for (const auto& d : p.schema.aux_relations) {
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      const Rule& r = p.rule(d.name, key.kind, key.rel);
      out.rules[key] = Rule{r.params, r.targets, positivize(r.formula)};
    }
  }
  for (const auto& d : p.schema.aux_relations) {
    out.schema.aux_relations.push_back({hat[d.name], d.arity});
    InitSpecPtr base = p.init_for(d.name);
    out.inits[hat[d.name]] = InitSpec::complement_of(base ? base : InitSpec::empty());
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      const Rule& r = p.rule(d.name, key.kind, key.rel);
      FormulaPtr body = positivize(Formula::negation(r.formula));
      out.rules[RuleKey{hat[d.name], key.kind, key.rel}] = Rule{r.params, r.targets, body};
    }
  }
  for (const auto& d : p.schema.input_relations) {
    out.schema.aux_relations.push_back({hat[d.name], d.arity});
    std::vector<std::string> xs = numbered("x", d.arity);
    out.inits[hat[d.name]] =
        InitSpec::from_formula(xs, Formula::negation(rel_of_vars(d.name, xs)));
    for (const auto& key : rule_keys_for(out.schema, hat[d.name])) {
      std::vector<std::string> us = numbered("u", in_ar(out.schema, key.rel));
      FormulaPtr eff = effect_formula(key.kind, key.rel, us, d.name, var_terms(xs));
      out.rules[key] = Rule{us, xs, positivize(Formula::negation(eff))};
    }
  }
  return out;
}

PassResult add_complements_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "add-complements";
  require_dialect(p, Dialect::Absolute, rep.pass);
  std::map<std::string, std::string> invol;
  std::string eqhat;
  DynamicProgram out = add_complements_core(p, rep, invol, eqhat);
  certify_negation_free(out, rep);
  identity_symbol_map(p, rep);
  return finish(std::move(out), std::move(rep));
}

// `exact_overlap` decides how the complements shed additions. The exact form
// conjoins "not removed" so that a tuple both added and removed (removal wins
// in the original) stays in the complement; it can universally quantify. The
// swapped form stays in the part's own fragment and is exact whenever add and
// remove never both fire, which is the defining condition on delta programs;
// the fragment-certified passes stage with it.
PassResult delta_remove_negation_impl(const ProgramPtr& pp, bool exact_overlap) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "delta-remove-negation";
  require_dialect(p, Dialect::Delta, rep.pass);

  Minter mint(p, rep);
  std::string eqhat = mint.mint("inequality constant", "__hat_eq");
  std::map<std::string, std::string> hat;
  for (const auto& d : p.schema.aux_relations)
    hat[d.name] = mint.mint("complement of " + d.name, "__hat_" + d.name);
  for (const auto& d : p.schema.input_relations)
    hat[d.name] = mint.mint("complement of " + d.name, "__hat_" + d.name);

  auto positivize = [&](const FormulaPtr& f) { return hat_substitute(to_nnf(f), hat, eqhat); };

  DynamicProgram out;
  out.dialect = Dialect::Delta;
  out.schema.input_relations = p.schema.input_relations;
  out.query_symbol = p.query_symbol;
  out.bases = p.bases;
  out.schema.aux_relations = p.schema.aux_relations;
  out.inits = p.inits;

  out.schema.aux_relations.push_back({eqhat, 2});
  out.inits[eqhat] =
      InitSpec::from_formula({"x1", "x2"}, Formula::negation(eq_vars("x1", "x2")));
  for (const auto& key : rule_keys_for(out.schema, eqhat)) {
    std::vector<std::string> us = numbered("u", in_ar(out.schema, key.rel));
    out.delta_rules[key] = DeltaRule{us, {"x1", "x2"}, Formula::falsity(), Formula::falsity()};
  }

  // Complements gain what the originals lose and shed what they gain.
  for (const auto& d : p.schema.aux_relations) {
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      const DeltaRule& dr = p.delta_rule(d.name, key.kind, key.rel);
      out.delta_rules[key] =
          DeltaRule{dr.params, dr.targets, positivize(dr.add), positivize(dr.remove)};
      FormulaPtr shed = exact_overlap
                            ? Formula::conj({dr.add, Formula::negation(dr.remove)})
                            : dr.add;
      out.delta_rules[RuleKey{hat[d.name], key.kind, key.rel}] =
          DeltaRule{dr.params, dr.targets, positivize(dr.remove), positivize(shed)};
    }
  }
  for (const auto& d : p.schema.aux_relations) {
    out.schema.aux_relations.push_back({hat[d.name], d.arity});
    InitSpecPtr base = p.init_for(d.name);
    out.inits[hat[d.name]] = InitSpec::complement_of(base ? base : InitSpec::empty());
  }
  for (const auto& d : p.schema.input_relations) {
    out.schema.aux_relations.push_back({hat[d.name], d.arity});
    std::vector<std::string> xs = numbered("x", d.arity);
    out.inits[hat[d.name]] =
        InitSpec::from_formula(xs, Formula::negation(rel_of_vars(d.name, xs)));
    for (const auto& key : rule_keys_for(out.schema, hat[d.name])) {
      std::vector<std::string> us = numbered("u", in_ar(out.schema, key.rel));
      DeltaRule hr{us, xs, Formula::falsity(), Formula::falsity()};
      if (key.rel == d.name) {
        FormulaPtr match = tuple_eq(var_terms(xs), us);
        if (key.kind == ModKind::Ins)
          hr.remove = match;
        else
          hr.add = match;
      }
      out.delta_rules[key] = hr;
    }
  }
  certify_negation_free(out, rep);
  identity_symbol_map(p, rep);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// query shifting
// ---------------------------------------------------------------------------

PassResult make_query_atomic_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "make-query-atomic";
  require_dialect(p, Dialect::Absolute, rep.pass);

  // Constants stay as they are; every other relation moves into one lookahead
  // relation per modification shape, holding "value after that modification".
  std::set<std::string> constants;
  for (const auto& d : p.schema.aux_relations)
    if (p.is_constant_symbol(d.name)) constants.insert(d.name);

  std::vector<InitSpecPtr> copied;
  if (auto qi = p.init_for(p.query_symbol)) copied.push_back(qi);
  for (const auto& c : constants)
    if (auto ci = p.init_for(c)) copied.push_back(ci);
  std::set<std::string> carried = frozen_set_for(p, copied);
  for (const auto& c : constants) carried.insert(c);

  Minter mint(p, rep);
  std::map<RuleKey, std::string> shifted;
  for (const auto& d : p.schema.aux_relations) {
    if (constants.count(d.name)) continue;
    for (const auto& key : rule_keys_for(p.schema, d.name))
      shifted[key] = mint.mint(d.name + " after " + trigger_of(key),
                               "__sq_" + d.name + "_" + modkind_name(key.kind) + "_" + key.rel);
  }
  std::string qprime = mint.mint("atomic query", "__sq_query");

  std::string orig_base = "orig";
  {
    std::set<std::string> bn;
    for (const auto& [n, b] : p.bases) bn.insert(n);
    for (int k = 0; bn.count(orig_base); ++k) orig_base = "orig$" + std::to_string(k);
  }
  rep.fresh_names.emplace_back("base snapshot", orig_base);

  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = p.schema.input_relations;
  out.query_symbol = qprime;
  out.bases = p.bases;
  out.bases.emplace_back(orig_base, pp);

  carry_frozen(p, carried, out);

  int q_arity = aux_ar(p.schema, p.query_symbol);
  out.schema.aux_relations.push_back({qprime, q_arity});
  if (auto qi = p.init_for(p.query_symbol)) out.inits[qprime] = qi;

  for (const auto& d : p.schema.aux_relations) {
    if (constants.count(d.name)) continue;
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      int shifted_arity = in_ar(p.schema, key.rel) + d.arity;
      out.schema.aux_relations.push_back({shifted[key], shifted_arity});
      out.inits[shifted[key]] = InitSpec::one_step(orig_base, d.name, key.kind, key.rel);
    }
  }

  // Each lookahead rule plays the tracked rule on the lookahead copies: input
  // atoms become their one-step effect under the new modification, non-constant
  // relation atoms move to the matching lookahead relation.
  for (const auto& d : p.schema.aux_relations) {
    if (constants.count(d.name)) continue;
    for (const auto& key1 : rule_keys_for(p.schema, d.name)) {
      const Rule& src = p.rule(d.name, key1.kind, key1.rel);
      std::vector<std::string> ws = numbered("w", in_ar(p.schema, key1.rel));
      std::vector<std::string> xs = numbered("x", d.arity);
      for (const auto& key0 : rule_keys_for(p.schema, shifted[key1])) {
        std::vector<std::string> us = numbered("u", in_ar(p.schema, key0.rel));
        std::set<std::string> avoid(us.begin(), us.end());
        FormulaPtr body = instantiate(src.formula, src.params, ws, src.targets, xs, avoid);
        body = rewrite_atoms(body, [&](const std::string& sym, const std::vector<TermPtr>& args)
                                       -> FormulaPtr {
          if (p.schema.is_input(sym)) return effect_formula(key0.kind, key0.rel, us, sym, args);
          if (constants.count(sym)) return nullptr;
          std::vector<TermPtr> shifted_args = var_terms(us);
          shifted_args.insert(shifted_args.end(), args.begin(), args.end());
          return Formula::rel(shifted.at(RuleKey{sym, key0.kind, key0.rel}), std::move(shifted_args));
        });
        out.rules[RuleKey{shifted[key1], key0.kind, key0.rel}] = Rule{us, cat({ws, xs}), body};
        int declared = aux_ar(out.schema, shifted[key1]);
        rep.certificates.push_back({shifted[key1], trigger_of(key0), "",
                                    "arity extends the tracked relation by the modification arity",
                                    declared == d.arity + in_ar(p.schema, key1.rel)});
      }
    }
  }

  std::vector<std::string> xq = numbered("x", q_arity);
  for (const auto& key : rule_keys_for(p.schema, qprime)) {
    std::vector<std::string> us = numbered("u", in_ar(p.schema, key.rel));
    FormulaPtr body;
    if (constants.count(p.query_symbol)) {
      body = rel_of_vars(p.query_symbol, xq);
    } else {
      std::vector<TermPtr> args = var_terms(cat({us, xq}));
      body = Formula::rel(shifted.at(RuleKey{p.query_symbol, key.kind, key.rel}), std::move(args));
    }
    out.rules[RuleKey{qprime, key.kind, key.rel}] = Rule{us, xq, body};
    rep.certificates.push_back(
        {qprime, trigger_of(key), "", "atomic query rule", body->kind == Formula::Kind::Rel});
  }

  for (const auto& d : p.schema.aux_relations)
    rep.symbol_map[d.name] = constants.count(d.name) ? d.name : "";
  rep.symbol_map[p.query_symbol] = qprime;
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// quantifier switching
// ---------------------------------------------------------------------------

PassResult switch_quantifiers_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "switch-quantifiers";
  require_dialect(p, Dialect::Absolute, rep.pass);
  for (const auto& [key, r] : p.rules)
    if (!classify(r.formula).prenex)
      guard_fail(rep.pass, "rule for " + key.aux + " under " + trigger_of(key) + " is not prenex");

  PassResult stage = make_query_atomic(pp);
  absorb_stage(rep, stage.report, "shift");
  const DynamicProgram& q = *stage.program;
  std::string qprime = stage.report.symbol_map.at(p.query_symbol);

  std::set<std::string> consts;
  for (const auto& d : q.schema.aux_relations)
    if (d.name != qprime && q.is_constant_symbol(d.name)) consts.insert(d.name);

  Minter mint(q, rep);
  std::map<std::string, std::string> hat;
  for (const auto& d : q.schema.aux_relations)
    if (d.name != qprime && !consts.count(d.name))
      hat[d.name] = mint.mint("complement of " + d.name, "__hat_" + d.name);
  std::string qout = pick_query_name(p.query_symbol, mint, "__sq_query_dual");

  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = q.schema.input_relations;
  out.query_symbol = qout;
  out.bases = q.bases;

  carry_frozen(q, consts, out);

  // Complements of the lookahead relations: substitute each lookahead atom by
  // the negated complement atom, negate, and push the negation inward. The
  // quantifier prefix flips existentials and universals in place.
  auto dualize = [&](const FormulaPtr& body) {
    FormulaPtr sub =
        rewrite_atoms(body, [&](const std::string& sym, const std::vector<TermPtr>& args) -> FormulaPtr {
          auto it = hat.find(sym);
          if (it == hat.end()) return nullptr;
          return Formula::negation(Formula::rel(it->second, args));
        });
    return to_nnf(Formula::negation(sub));
  };

  for (const auto& d : q.schema.aux_relations) {
    if (d.name == qprime || consts.count(d.name)) continue;
    out.schema.aux_relations.push_back({hat[d.name], d.arity});
    InitSpecPtr base = q.init_for(d.name);
    out.inits[hat[d.name]] = InitSpec::complement_of(base ? base : InitSpec::empty());
    for (const auto& key : rule_keys_for(q.schema, d.name)) {
      const Rule& r = q.rule(d.name, key.kind, key.rel);
      FormulaPtr body = dualize(r.formula);
      out.rules[RuleKey{hat[d.name], key.kind, key.rel}] = Rule{r.params, r.targets, body};
      std::string want = dual_prefix(classify(r.formula).prefix);
      ClassifyResult got = classify(body);
      rep.certificates.push_back({hat[d.name], trigger_of(key), "",
                                  "prenex, prefix dual to the source rule",
                                  got.prenex && got.prefix == want});
    }
  }

  int q_arity = aux_ar(q.schema, qprime);
  out.schema.aux_relations.push_back({qout, q_arity});
  if (auto qi = q.init_for(qprime)) out.inits[qout] = qi;
  for (const auto& key : rule_keys_for(q.schema, qprime)) {
    const Rule& r = q.rule(qprime, key.kind, key.rel);
    FormulaPtr body = r.formula;
    if (body->kind == Formula::Kind::Rel && hat.count(body->sym))
      body = Formula::negation(Formula::rel(hat.at(body->sym), body->terms));
    out.rules[RuleKey{qout, key.kind, key.rel}] = Rule{r.params, r.targets, body};
    rep.certificates.push_back(
        {qout, trigger_of(key), "", "quantifier-free query rule", is_quantifier_free(body)});
  }

  for (const auto& d : p.schema.aux_relations)
    rep.symbol_map[d.name] = consts.count(d.name) ? d.name : "";
  rep.symbol_map[p.query_symbol] = qout;
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// absolute to delta, prefix-preserving
// ---------------------------------------------------------------------------

PassResult qfo_to_delta_qfo_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "qfo-to-delta-qfo";
  require_dialect(p, Dialect::Absolute, rep.pass);
  for (const auto& [key, r] : p.rules)
    if (!classify(r.formula).prenex)
      guard_fail(rep.pass, "rule for " + key.aux + " under " + trigger_of(key) + " is not prenex");

  PassResult stage = make_query_atomic(pp);
  absorb_stage(rep, stage.report, "shift");
  const DynamicProgram& q = *stage.program;
  std::string qprime = stage.report.symbol_map.at(p.query_symbol);

  std::set<std::string> consts;
  for (const auto& d : q.schema.aux_relations)
    if (d.name != qprime && q.is_constant_symbol(d.name)) consts.insert(d.name);

  Minter mint(q, rep);
  std::map<std::string, std::string> even, odd;
  for (const auto& d : q.schema.aux_relations) {
    if (d.name == qprime || consts.count(d.name)) continue;
    even[d.name] = mint.mint("even-phase copy of " + d.name, d.name + "_ev");
    odd[d.name] = mint.mint("odd-phase copy of " + d.name, d.name + "_od");
  }
  std::string parity = mint.mint("parity flag", "__sq_parity");
  std::string qout = pick_query_name(p.query_symbol, mint, "__sq_query_delta");

  DynamicProgram out;
  out.dialect = Dialect::Delta;
  out.schema.input_relations = q.schema.input_relations;
  out.query_symbol = qout;
  out.bases = q.bases;

  carry_frozen(q, consts, out);

  FormulaPtr odd_atom = Formula::rel(parity, {});
  out.schema.aux_relations.push_back({parity, 0});
  for (const auto& key : rule_keys_for(q.schema, parity)) {
    std::vector<std::string> us = numbered("u", in_ar(q.schema, key.rel));
    out.delta_rules[key] = DeltaRule{us, {}, Formula::negation(odd_atom), odd_atom};
  }

  auto substituted = [&](const FormulaPtr& f, const std::map<std::string, std::string>& to) {
    return rewrite_atoms(f, [&](const std::string& sym, const std::vector<TermPtr>& args) -> FormulaPtr {
      auto it = to.find(sym);
      if (it == to.end()) return nullptr;
      return Formula::rel(it->second, args);
    });
  };

  // The two copies take turns: on even-phase steps the odd copies are rebuilt
  // from the even ones while the even copies are cleared, and vice versa. The
  // copy matching the current parity always holds the tracked value.
  for (const auto& d : q.schema.aux_relations) {
    if (d.name == qprime || consts.count(d.name)) continue;
    out.schema.aux_relations.push_back({even[d.name], d.arity});
    if (auto init = q.init_for(d.name)) out.inits[even[d.name]] = init;
    out.schema.aux_relations.push_back({odd[d.name], d.arity});
    for (const auto& key : rule_keys_for(q.schema, d.name)) {
      const Rule& r = q.rule(d.name, key.kind, key.rel);
      std::string pattern = classify(r.formula).prefix;
      DeltaRule dodd{r.params, r.targets,
                     Formula::conj({Formula::negation(odd_atom), substituted(r.formula, even)}),
                     Formula::conj({odd_atom, rel_of_vars(odd[d.name], r.targets)})};
      DeltaRule deven{r.params, r.targets,
                      Formula::conj({odd_atom, substituted(r.formula, odd)}),
                      Formula::conj({Formula::negation(odd_atom), rel_of_vars(even[d.name], r.targets)})};
      bool ok_odd = matches_prefix_pattern(to_prenex(dodd.add), pattern) &&
                    matches_prefix_pattern(to_prenex(dodd.remove), pattern);
      bool ok_even = matches_prefix_pattern(to_prenex(deven.add), pattern) &&
                     matches_prefix_pattern(to_prenex(deven.remove), pattern);
      out.delta_rules[RuleKey{odd[d.name], key.kind, key.rel}] = std::move(dodd);
      out.delta_rules[RuleKey{even[d.name], key.kind, key.rel}] = std::move(deven);
      rep.certificates.push_back({odd[d.name], trigger_of(key), "",
                                  "prenex form stays within the source prefix", ok_odd});
      rep.certificates.push_back({even[d.name], trigger_of(key), "",
                                  "prenex form stays within the source prefix", ok_even});
    }
  }

  int q_arity = aux_ar(q.schema, qprime);
  out.schema.aux_relations.push_back({qout, q_arity});
  if (auto qi = q.init_for(qprime)) out.inits[qout] = qi;
  for (const auto& key : rule_keys_for(q.schema, qprime)) {
    const Rule& r = q.rule(qprime, key.kind, key.rel);
    FormulaPtr anext = Formula::disj(
        {Formula::conj({Formula::negation(odd_atom), substituted(r.formula, even)}),
         Formula::conj({odd_atom, substituted(r.formula, odd)})});
    FormulaPtr select = rel_of_vars(qout, r.targets);
    DeltaRule dq{r.params, r.targets, Formula::conj({anext, Formula::negation(select)}),
                 Formula::conj({to_nnf(Formula::negation(anext)), select})};
    bool qf = is_quantifier_free(dq.add) && is_quantifier_free(dq.remove);
    out.delta_rules[RuleKey{qout, key.kind, key.rel}] = std::move(dq);
    rep.certificates.push_back({qout, trigger_of(key), "", "quantifier-free query rule", qf});
  }

  for (const auto& d : p.schema.aux_relations)
    rep.symbol_map[d.name] = consts.count(d.name) ? d.name : "";
  rep.symbol_map[p.query_symbol] = qout;
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// truth-table machinery for nullary queries
// ---------------------------------------------------------------------------
//
// With k monitored bits there are 2^k valuations (rows) and 2^(2^k) Boolean
// tables. Table j holds row r iff bit r of j is set. Tables are maintained as
// one relation each; flipping bit l rewrites a table's normal form by fixing
// that bit, which lands on other tables of the same family.

using BitLit = std::pair<int, bool>;  // (bit index, polarity)

// Clause false exactly at row r (used as a CNF building block).
std::vector<BitLit> maxterm_at(int k, int r) {
  std::vector<BitLit> lits;
  for (int l = 0; l < k; ++l) lits.emplace_back(l, ((r >> l) & 1) == 0);
  return lits;
}

// Conjunction true exactly at row r.
std::vector<BitLit> minterm_at(int k, int r) {
  std::vector<BitLit> lits;
  for (int l = 0; l < k; ++l) lits.emplace_back(l, ((r >> l) & 1) == 1);
  return lits;
}

// Table of a clause (disjunction of literals).
int clause_table(int k, const std::vector<BitLit>& lits) {
  int rows = 1 << k, t = 0;
  for (int r = 0; r < rows; ++r)
    for (const auto& [b, pos] : lits)
      if ((((r >> b) & 1) != 0) == pos) {
        t |= 1 << r;
        break;
      }
  return t;
}

// Table of a term (conjunction of literals).
int term_table(int k, const std::vector<BitLit>& lits) {
  int rows = 1 << k, t = 0;
  for (int r = 0; r < rows; ++r) {
    bool all = true;
    for (const auto& [b, pos] : lits)
      if ((((r >> b) & 1) != 0) == pos) continue; else { all = false; break; }
    if (all) t |= 1 << r;
  }
  return t;
}

// Tables whose conjunction gives table j's value after bit l becomes v.
std::vector<int> cnf_next_tables(int k, int j, int l, bool v) {
  int rows = 1 << k;
  std::vector<int> out;
  for (int r = 0; r < rows; ++r) {
    if ((j >> r) & 1) continue;
    std::vector<BitLit> clause = maxterm_at(k, r);
    if (clause[l].second == v) continue;  // clause satisfied by the new bit
    clause.erase(clause.begin() + l);
    out.push_back(clause_table(k, clause));
  }
  if (out.empty()) out.push_back((1 << rows) - 1);
  return out;
}

// Tables whose disjunction gives table j's value after bit l becomes v.
std::vector<int> dnf_next_tables(int k, int j, int l, bool v) {
  int rows = 1 << k;
  std::vector<int> out;
  for (int r = 0; r < rows; ++r) {
    if (!((j >> r) & 1)) continue;
    std::vector<BitLit> term = minterm_at(k, r);
    if (term[l].second != v) continue;  // term killed by the new bit
    term.erase(term.begin() + l);
    out.push_back(term_table(k, term));
  }
  if (out.empty()) out.push_back(0);
  return out;
}

// CNF of table j over the given bit formulas.
FormulaPtr table_cnf(int k, int j, const std::vector<FormulaPtr>& bits) {
  int rows = 1 << k;
  std::vector<FormulaPtr> clauses;
  for (int r = 0; r < rows; ++r) {
    if ((j >> r) & 1) continue;
    std::vector<FormulaPtr> lits;
    for (const auto& [b, pos] : maxterm_at(k, r))
      lits.push_back(pos ? bits[b] : Formula::negation(bits[b]));
    clauses.push_back(Formula::disj(std::move(lits)));
  }
  return Formula::conj(std::move(clauses));
}

std::vector<FormulaPtr> atoms_for(const std::vector<int>& tables, const std::vector<std::string>& rname) {
  std::vector<FormulaPtr> out;
  out.reserve(tables.size());
  for (int t : tables) out.push_back(Formula::rel(rname[t], {}));
  return out;
}

std::vector<FormulaPtr> with_atom(std::vector<FormulaPtr> v, FormulaPtr a) {
  v.push_back(std::move(a));
  return v;
}

// Declares the full table family over the program's input relations (all of
// which must be monitored bits, sorted by name), with one absolute rule per
// modification. Raising a bit happens on any insertion into its relation and
// clearing on any deletion, which matches the emptiness reading only on
// one-element domains; `dispatch_many_full` freezes the relations as full on
// larger domains for constructions that only consult them when the domain is
// a single element.
void build_nullary_block_abs(DynamicProgram& prog, const std::vector<std::string>& bits,
                             const std::vector<FormulaPtr>& bit_init,
                             const std::vector<std::string>& rname, bool dispatch_many_full) {
  int k = static_cast<int>(bits.size());
  int tables = static_cast<int>(rname.size());
  std::map<std::string, int> bit_index;
  for (int l = 0; l < k; ++l) bit_index[bits[l]] = l;
  for (int j = 0; j < tables; ++j) {
    prog.schema.aux_relations.push_back({rname[j], 0});
    InitSpecPtr base = InitSpec::from_formula({}, table_cnf(k, j, bit_init));
    prog.inits[rname[j]] =
        dispatch_many_full ? InitSpec::size_dispatch(base, InitSpec::full()) : base;
  }
  for (int j = 0; j < tables; ++j) {
    for (const auto& key : rule_keys_for(prog.schema, rname[j])) {
      int l = bit_index.at(key.rel);
      bool v = key.kind == ModKind::Ins;
      std::vector<std::string> us = numbered("u", in_ar(prog.schema, key.rel));
      prog.rules[key] =
          Rule{us, {}, Formula::conj(atoms_for(cnf_next_tables(k, j, l, v), rname))};
    }
  }
}

// Delta form of the table family, with complement twins so both rule parts
// stay negation-free. Removals can be gated behind a constant (`gate`), which
// the size-dispatched variant uses to freeze everything full off the
// one-element domain.
void build_nullary_block_delta(DynamicProgram& prog, const std::vector<std::string>& bits,
                               const std::vector<FormulaPtr>& bit_init,
                               const std::vector<std::string>& rname,
                               const std::vector<std::string>& hname, const std::string& gate,
                               bool dispatch_many_full) {
  int k = static_cast<int>(bits.size());
  int tables = static_cast<int>(rname.size());
  std::map<std::string, int> bit_index;
  for (int l = 0; l < k; ++l) bit_index[bits[l]] = l;
  for (int j = 0; j < tables; ++j) {
    InitSpecPtr base = InitSpec::from_formula({}, table_cnf(k, j, bit_init));
    prog.schema.aux_relations.push_back({rname[j], 0});
    prog.inits[rname[j]] =
        dispatch_many_full ? InitSpec::size_dispatch(base, InitSpec::full()) : base;
    prog.schema.aux_relations.push_back({hname[j], 0});
    InitSpecPtr comp = InitSpec::complement_of(base);
    prog.inits[hname[j]] =
        dispatch_many_full ? InitSpec::size_dispatch(comp, InitSpec::full()) : comp;
  }
  auto gated = [&](FormulaPtr f) {
    return gate.empty() ? f : Formula::conj({std::move(f), Formula::rel(gate, {})});
  };
  for (int j = 0; j < tables; ++j) {
    for (const auto& key : rule_keys_for(prog.schema, rname[j])) {
      int l = bit_index.at(key.rel);
      bool v = key.kind == ModKind::Ins;
      std::vector<std::string> us = numbered("u", in_ar(prog.schema, key.rel));
      std::vector<FormulaPtr> next = atoms_for(cnf_next_tables(k, j, l, v), rname);
      std::vector<FormulaPtr> gone = atoms_for(dnf_next_tables(k, j, l, v), hname);
      FormulaPtr raise = Formula::conj(with_atom(next, Formula::rel(hname[j], {})));
      FormulaPtr clear = Formula::conj(with_atom(gone, Formula::rel(rname[j], {})));
      prog.delta_rules[key] = DeltaRule{us, {}, raise, gated(clear)};
      prog.delta_rules[RuleKey{hname[j], key.kind, key.rel}] =
          DeltaRule{us, {}, clear, gated(raise)};
    }
  }
}

// ---------------------------------------------------------------------------
// empirical table + input-determinism check on the one-element domain
// ---------------------------------------------------------------------------

int empirical_table_n1(const DynamicProgram& p, const std::string& pass) {
  std::vector<std::string> bits;
  for (const auto& d : p.schema.input_relations) bits.push_back(d.name);
  std::sort(bits.begin(), bits.end());
  int k = static_cast<int>(bits.size());
  if (k < 1 || k > 3) guard_fail(pass, "needs between one and three input relations");
  if (p.schema.aux_relations.size() > 20)
    guard_fail(pass, "too many auxiliary relations for the size-one analysis");
  int rows = 1 << k;

  auto zero_tuple = [&](const std::string& rel) { return Tuple(in_ar(p.schema, rel), 0); };
  auto db_for = [&](int r) {
    std::map<std::string, Relation> db;
    for (int l = 0; l < k; ++l)
      db[bits[l]] = ((r >> l) & 1) ? Relation{zero_tuple(bits[l])} : Relation{};
    return db;
  };
  auto in_bits = [&](const State& s) {
    int r = 0;
    for (int l = 0; l < k; ++l)
      if (!s.input_db.at(bits[l]).empty()) r |= 1 << l;
    return r;
  };
  auto encode = [&](const State& s) {
    std::vector<bool> key;
    for (int l = 0; l < k; ++l) key.push_back(!s.input_db.at(bits[l]).empty());
    for (const auto& d : p.schema.aux_relations) key.push_back(!s.aux_db.at(d.name).empty());
    return key;
  };
  auto query_bit = [&](const State& s) { return !s.aux_db.at(p.query_symbol).empty(); };

  std::vector<int> table_bit(rows, -1);
  std::set<std::vector<bool>> seen;
  std::deque<State> work;
  for (int r = 0; r < rows; ++r) {
    State s = initialize(p, db_for(r), 1);
    table_bit[r] = query_bit(s) ? 1 : 0;
    if (seen.insert(encode(s)).second) work.push_back(std::move(s));
  }
  while (!work.empty()) {
    State s = std::move(work.front());
    work.pop_front();
    for (const auto& d : p.schema.input_relations) {
      for (ModKind kind : {ModKind::Ins, ModKind::Del}) {
        Modification m{kind, d.name, zero_tuple(d.name)};
        State ns = apply_modification(p, s, m);
        if (table_bit[in_bits(ns)] != (query_bit(ns) ? 1 : 0))
          guard_fail(pass, "query is not determined by which inputs are nonempty");
        if (seen.insert(encode(ns)).second) {
          if (seen.size() > (1u << 22)) throw LimitError("size-one state exploration too large");
          work.push_back(std::move(ns));
        }
      }
    }
  }
  int j = 0;
  for (int r = 0; r < rows; ++r) j |= table_bit[r] << r;
  return j;
}

void require_nullary_shape(const DynamicProgram& p, const std::string& pass) {
  for (const auto& d : p.schema.input_relations)
    if (d.arity != 0) guard_fail(pass, "input relation " + d.name + " is not nullary");
  for (const auto& d : p.schema.aux_relations)
    if (d.arity != 0) guard_fail(pass, "auxiliary relation " + d.name + " is not nullary");
  auto eq_free = [&](const FormulaPtr& f, const std::string& where) {
    if (contains_equality(f)) guard_fail(pass, where + " uses equality");
  };
  for (const auto& d : p.schema.aux_relations) {
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      std::string where = "rule for " + d.name + " under " + trigger_of(key);
      if (p.dialect == Dialect::Delta) {
        const DeltaRule& dr = p.delta_rule(d.name, key.kind, key.rel);
        eq_free(dr.add, where);
        eq_free(dr.remove, where);
      } else {
        eq_free(p.rule(d.name, key.kind, key.rel).formula, where);
      }
    }
    std::function<void(const InitSpecPtr&)> check_init = [&](const InitSpecPtr& spec) {
      if (!spec) return;
      switch (spec->kind) {
        case InitSpec::Kind::Empty:
        case InitSpec::Kind::Full:
          return;
        case InitSpec::Kind::Formula:
        case InitSpec::Kind::EvalOnInit:
          eq_free(spec->formula, "initialization of " + d.name);
          return;
        case InitSpec::Kind::ComplementOf:
          check_init(spec->inner);
          return;
        default:
          guard_fail(pass, "initialization of " + d.name + " depends on the domain size");
      }
    };
    check_init(p.init_for(d.name));
  }
}

DynamicProgram nullary_family_program(int k, Dialect dialect, std::vector<std::string>& rname_out) {
  if (k < 1 || k > 3) throw GuardError("nullary-family: bit count must be between one and three");
  if (dialect == Dialect::QF) throw GuardError("nullary-family: dialect must be absolute or delta");
  static const char* letters[3] = {"A", "B", "C"};
  DynamicProgram prog;
  prog.dialect = dialect;
  std::vector<std::string> bits;
  std::vector<FormulaPtr> bit_init;
  for (int i = 0; i < k; ++i) {
    prog.schema.input_relations.push_back({letters[i], 0});
    bits.push_back(letters[i]);
    bit_init.push_back(Formula::rel(letters[i], {}));
  }
  int tables = 1 << (1 << k);
  std::vector<std::string> rname, hname;
  for (int j = 0; j < tables; ++j) {
    rname.push_back("__nc_q" + std::to_string(j));
    hname.push_back("__nc_qc" + std::to_string(j));
  }
  if (dialect == Dialect::Absolute)
    build_nullary_block_abs(prog, bits, bit_init, rname, false);
  else
    build_nullary_block_delta(prog, bits, bit_init, rname, hname, "", false);
  prog.query_symbol = rname.back();
  rname_out = std::move(rname);
  return prog;
}

PassResult nullary_propcq_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "nullary-propcq";
  require_dialect(p, Dialect::Absolute, rep.pass);
  require_nullary_shape(p, rep.pass);
  int k = static_cast<int>(p.schema.input_relations.size());
  if (k < 1 || k > 3) guard_fail(rep.pass, "needs between one and three input relations");
  int jstar = empirical_table_n1(p, rep.pass);

  Minter mint(p, rep);
  std::vector<std::string> bits;
  for (const auto& d : p.schema.input_relations) bits.push_back(d.name);
  std::sort(bits.begin(), bits.end());
  std::vector<FormulaPtr> bit_init;
  for (const auto& b : bits) bit_init.push_back(Formula::rel(b, {}));
  int tables = 1 << (1 << k);
  std::vector<std::string> rname;
  for (int j = 0; j < tables; ++j)
    rname.push_back(mint.mint("truth table " + std::to_string(j), "__nc_q" + std::to_string(j)));

  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = p.schema.input_relations;
  build_nullary_block_abs(out, bits, bit_init, rname, false);
  out.query_symbol = rname[jstar];

  certify_fragment(out, Fragment::PropCQ, rep);
  for (const auto& d : p.schema.aux_relations) rep.symbol_map[d.name] = "";
  rep.symbol_map[p.query_symbol] = rname[jstar];
  return finish(std::move(out), std::move(rep));
}

PassResult delta_nullary_propcq_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "delta-nullary-propcq";
  require_dialect(p, Dialect::Delta, rep.pass);
  require_nullary_shape(p, rep.pass);
  int k = static_cast<int>(p.schema.input_relations.size());
  if (k < 1 || k > 3) guard_fail(rep.pass, "needs between one and three input relations");
  int jstar = empirical_table_n1(p, rep.pass);

  Minter mint(p, rep);
  std::vector<std::string> bits;
  for (const auto& d : p.schema.input_relations) bits.push_back(d.name);
  std::sort(bits.begin(), bits.end());
  std::vector<FormulaPtr> bit_init;
  for (const auto& b : bits) bit_init.push_back(Formula::rel(b, {}));
  int tables = 1 << (1 << k);
  std::vector<std::string> rname, hname;
  for (int j = 0; j < tables; ++j) {
    rname.push_back(mint.mint("truth table " + std::to_string(j), "__nc_q" + std::to_string(j)));
    hname.push_back(
        mint.mint("complement of truth table " + std::to_string(j), "__nc_qc" + std::to_string(j)));
  }

  DynamicProgram out;
  out.dialect = Dialect::Delta;
  out.schema.input_relations = p.schema.input_relations;
  build_nullary_block_delta(out, bits, bit_init, rname, hname, "", false);
  out.query_symbol = rname[jstar];

  certify_fragment(out, Fragment::PropCQ, rep);
  certify_negation_free(out, rep);
  for (const auto& d : p.schema.aux_relations) rep.symbol_map[d.name] = "";
  rep.symbol_map[p.query_symbol] = rname[jstar];
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// clause closure: quantifier-free rules to conjunctive form with negation
// ---------------------------------------------------------------------------

struct CanonClause {
  std::vector<FormulaPtr> atoms;  // over canonical columns w1..wm
  std::vector<std::string> cols;
  std::vector<std::string> args;  // original variable per column
  std::string key;
};

std::vector<std::string> clause_var_order(const std::vector<FormulaPtr>& atoms) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& a : atoms)
    for (const auto& t : a->terms)
      if (seen.insert(t->name).second) order.push_back(t->name);
  return order;
}

FormulaPtr rename_atom(const FormulaPtr& a, const std::map<std::string, std::string>& sub) {
  std::vector<TermPtr> terms;
  for (const auto& t : a->terms) {
    auto it = sub.find(t->name);
    terms.push_back(Term::var(it == sub.end() ? t->name : it->second));
  }
  return a->kind == Formula::Kind::Rel ? Formula::rel(a->sym, std::move(terms))
                                       : Formula::eq(terms[0], terms[1]);
}

// Canonical presentation of a clause up to variable renaming: iterate
// first-occurrence renaming and lexicographic atom ordering to a fixpoint.
// The bound is a heuristic; a missed identification only duplicates a
// relation, it never changes meaning.
CanonClause canonicalize_clause(std::vector<FormulaPtr> atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const FormulaPtr& a, const FormulaPtr& b) { return print(a) < print(b); });
  atoms.erase(std::unique(atoms.begin(), atoms.end(),
                          [](const FormulaPtr& a, const FormulaPtr& b) { return print(a) == print(b); }),
              atoms.end());
  std::vector<FormulaPtr> ordering = atoms;
  std::vector<std::string> order;
  for (int iter = 0; iter < 8; ++iter) {
    order = clause_var_order(ordering);
    std::map<std::string, std::string> sub;
    for (size_t i = 0; i < order.size(); ++i) sub[order[i]] = "w" + std::to_string(i + 1);
    std::vector<std::pair<std::string, FormulaPtr>> tagged;
    for (const auto& a : ordering) tagged.emplace_back(print(rename_atom(a, sub)), a);
    std::stable_sort(tagged.begin(), tagged.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<FormulaPtr> next;
    for (auto& [s, a] : tagged) next.push_back(a);
    bool same = next.size() == ordering.size();
    for (size_t i = 0; same && i < next.size(); ++i) same = next[i] == ordering[i];
    ordering = std::move(next);
    if (same) break;
  }
  CanonClause out;
  order = clause_var_order(ordering);
  std::map<std::string, std::string> sub;
  for (size_t i = 0; i < order.size(); ++i) {
    sub[order[i]] = "w" + std::to_string(i + 1);
    out.cols.push_back("w" + std::to_string(i + 1));
  }
  out.args = order;
  for (const auto& a : ordering) out.atoms.push_back(rename_atom(a, sub));
  std::string key;
  for (const auto& a : out.atoms) key += print(a) + " | ";
  out.key = key;
  return out;
}

PassResult prop_to_propcqneg_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "prop-to-propcqneg";
  require_dialect(p, Dialect::Absolute, rep.pass);
  for (const auto& [key, r] : p.rules)
    if (!is_quantifier_free(r.formula))
      guard_fail(rep.pass, "rule for " + key.aux + " under " + trigger_of(key) +
                               " is not quantifier-free");

  PassReport stage_rep;
  std::map<std::string, std::string> invol;
  std::string eqhat;
  DynamicProgram q = add_complements_core(p, stage_rep, invol, eqhat);
  absorb_stage(rep, stage_rep, "complements");

  Minter mint(q, rep);

  struct ClauseRel {
    std::string name;
    CanonClause clause;
  };
  std::vector<ClauseRel> clause_rels;
  std::map<std::string, int> clause_index;

  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = q.schema.input_relations;
  out.schema.aux_relations = q.schema.aux_relations;
  out.query_symbol = q.query_symbol;
  out.bases = p.bases;
  out.inits = q.inits;

  // Multi-literal CNF clauses become negated atoms over clause relations; a
  // clause relation holds the tuples that falsify its clause, so its own
  // rules conjoin the next-state complements of the clause's literals.
  std::function<FormulaPtr(const FormulaPtr&)> clausal_form = [&](const FormulaPtr& body) {
    std::vector<FormulaPtr> conjs;
    for (auto& clause : qf_cnf_clauses(body)) {
      std::vector<FormulaPtr> atoms;
      bool satisfied = false;
      for (const auto& lit : clause) {
        if (lit->kind == Formula::Kind::Not)
          throw Error("negation survived complement substitution");
        if (lit->kind == Formula::Kind::Eq && lit->terms[0]->name == lit->terms[1]->name) {
          satisfied = true;
          break;
        }
        atoms.push_back(lit);
      }
      if (satisfied) continue;
      if (atoms.empty()) {
        conjs.push_back(Formula::falsity());
        continue;
      }
      if (atoms.size() == 1) {
        conjs.push_back(atoms[0]);
        continue;
      }
      CanonClause canon = canonicalize_clause(std::move(atoms));
      auto it = clause_index.find(canon.key);
      int idx;
      if (it != clause_index.end()) {
        idx = it->second;
      } else {
        idx = static_cast<int>(clause_rels.size());
        std::string name =
            mint.mint("blocked clause " + std::to_string(idx), "__nc_" + std::to_string(idx));
        clause_index[canon.key] = idx;
        clause_rels.push_back({name, canon});
        out.schema.aux_relations.push_back({name, static_cast<int>(canon.cols.size())});
        if (clause_rels.size() > 500) throw LimitError("clause closure grew past 500 relations");
      }
      conjs.push_back(
          Formula::negation(Formula::rel(clause_rels[idx].name, var_terms(canon.args))));
    }
    return Formula::conj(std::move(conjs));
  };

  // Next-state value of the complement of a positive literal.
  auto next_neg = [&](const FormulaPtr& atom, ModKind kind, const std::string& rel,
                      const std::vector<std::string>& us) -> FormulaPtr {
    if (atom->kind == Formula::Kind::Eq) return Formula::rel(eqhat, atom->terms);
    if (atom->sym == eqhat) return Formula::eq(atom->terms[0], atom->terms[1]);
    const std::string& comp = invol.at(atom->sym);
    std::vector<std::string> argnames = names_of(atom->terms);
    if (q.schema.is_input(comp))
      return hat_substitute(to_nnf(effect_formula(kind, rel, us, comp, atom->terms)), invol,
                            eqhat);
    const Rule& r = q.rule(comp, kind, rel);
    std::set<std::string> avoid(us.begin(), us.end());
    return instantiate(r.formula, r.params, us, r.targets, argnames, avoid);
  };

  for (const auto& d : q.schema.aux_relations)
    for (const auto& key : rule_keys_for(q.schema, d.name)) {
      const Rule& r = q.rule(d.name, key.kind, key.rel);
      out.rules[key] = Rule{r.params, r.targets, clausal_form(r.formula)};
    }

  for (size_t i = 0; i < clause_rels.size(); ++i) {
    // copy: the vector may grow while this relation's rules are built
    ClauseRel cr = clause_rels[i];
    std::vector<FormulaPtr> defining = cr.clause.atoms;
    out.inits[cr.name] =
        InitSpec::eval_on_init(cr.clause.cols, Formula::negation(Formula::disj(defining)));
    for (const auto& key : rule_keys_for(q.schema, cr.name)) {
      std::vector<std::string> us = numbered("u", in_ar(q.schema, key.rel));
      std::vector<FormulaPtr> parts;
      for (const auto& atom : cr.clause.atoms)
        parts.push_back(next_neg(atom, key.kind, key.rel, us));
      out.rules[RuleKey{cr.name, key.kind, key.rel}] =
          Rule{us, cr.clause.cols, clausal_form(Formula::conj(std::move(parts)))};
    }
  }

  certify_fragment(out, Fragment::PropCQNeg, rep);
  identity_symbol_map(p, rep);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// disjunction removal: shared blueprint machinery
// ---------------------------------------------------------------------------
//
// The four disjunction-removal passes share one engine. A rule body is put
// into prenex form and its matrix expanded into disjuncts; the whole body is
// then replaced by a single conjunctive shape that joins a constant selector
// relation against one tag variable per disjunct. The selector pins the
// disjunct whose tag sits on the constant c = 0 to the real rule variables
// and leaves every other disjunct free, so its literals must be rewritten
// into forms that some assignment satisfies whenever the tag avoids c:
//
//   R(s)    reads a padded copy that is full off c,
//   !R(s)   reads an exact copy that is empty off c,
//   s != t  reads a padded disequality that is full off c,
//   s = t   keeps its per-disjunct block variables, which can be chosen equal.
//
// Each disjunct owns a full block of copies of the rule variables, and the
// selector stores, per disjunct, either "tag off c, block arbitrary" or "tag
// on c, block equal to the rule variables". Every selector is a constant
// relation computed at initialization time.

using LitMap = std::function<FormulaPtr(bool, const FormulaPtr&, const std::string&)>;

struct Blueprint {
  std::vector<std::pair<bool, std::string>> prefix;  // quantifier spine of the body
  std::vector<std::string> inner;                    // tags and blocks, closed existentially
  std::vector<FormulaPtr> lits;                      // rewritten literals of every disjunct
  std::vector<std::string> t_cols;                   // selector columns
  size_t head_slot = 0;                              // insertion point for a head tag column
  FormulaPtr membership;                             // selector contents over t_cols
};

Blueprint build_blueprint(const std::string& pass, const FormulaPtr& raw,
                          const std::vector<std::string>& params,
                          const std::vector<std::string>& targets, const LitMap& lit,
                          const std::string& c1, bool keep_universals) {
  Blueprint bp;
  FormulaPtr pn = to_prenex(raw);
  FormulaPtr matrix = pn;
  while (matrix->kind == Formula::Kind::Exists || matrix->kind == Formula::Kind::Forall) {
    bool ex = matrix->kind == Formula::Kind::Exists;
    if (!ex && !keep_universals)
      throw Error(pass + ": universal quantifier survived the fragment guard");
    bp.prefix.emplace_back(ex, matrix->sym);
    matrix = matrix->kids[0];
  }
  std::vector<std::vector<FormulaPtr>> disjuncts = qf_dnf_terms(matrix);

  std::vector<std::string> base;
  base.insert(base.end(), params.begin(), params.end());
  base.insert(base.end(), targets.begin(), targets.end());
  for (const auto& [ex, v] : bp.prefix) base.push_back(v);

  FreshNames fresh;
  fresh.reserve(all_var_names(raw));
  fresh.reserve(all_var_names(pn));
  fresh.reserve(std::set<std::string>(base.begin(), base.end()));

  for (const auto& [ex, v] : bp.prefix) bp.t_cols.push_back(v);
  std::vector<FormulaPtr> memb;
  for (const auto& term : disjuncts) {
    std::string tag = fresh.fresh("zt");
    bp.inner.push_back(tag);
    bp.t_cols.push_back(tag);
    std::vector<FormulaPtr> pattern{Formula::rel(c1, {Term::var(tag)})};
    std::map<std::string, std::string> sub;
    for (const auto& v : base) {
      std::string z = fresh.fresh("z");
      sub[v] = z;
      bp.inner.push_back(z);
      bp.t_cols.push_back(z);
      pattern.push_back(Formula::eq(Term::var(z), Term::var(v)));
    }
    memb.push_back(Formula::conj(std::move(pattern)));
    for (const auto& l : term) {
      bool positive = l->kind != Formula::Kind::Not;
      const FormulaPtr& atom = positive ? l : l->kids[0];
      bp.lits.push_back(lit(positive, rename_atom(atom, sub), tag));
    }
  }
  for (const auto& u : params) bp.t_cols.push_back(u);
  bp.head_slot = bp.t_cols.size();
  for (const auto& x : targets) bp.t_cols.push_back(x);
  bp.membership = Formula::disj(std::move(memb));
  return bp;
}

std::vector<std::string> with_head(const Blueprint& bp, const std::string& head) {
  std::vector<std::string> cols = bp.t_cols;
  cols.insert(cols.begin() + static_cast<std::ptrdiff_t>(bp.head_slot), head);
  return cols;
}

FormulaPtr blueprint_body(const Blueprint& bp, const std::string& selector,
                          const std::vector<std::string>& sel_cols,
                          std::vector<FormulaPtr> extra) {
  std::vector<FormulaPtr> parts = bp.lits;
  parts.push_back(Formula::rel(selector, var_terms(sel_cols)));
  for (auto& e : extra) parts.push_back(std::move(e));
  FormulaPtr body = close_exists(bp.inner, Formula::conj(std::move(parts)));
  for (auto it = bp.prefix.rbegin(); it != bp.prefix.rend(); ++it)
    body = it->first ? Formula::exists(it->second, body) : Formula::forall(it->second, body);
  return body;
}

std::vector<TermPtr> with_tag(const std::string& tag, const std::vector<TermPtr>& args) {
  std::vector<TermPtr> out{Term::var(tag)};
  out.insert(out.end(), args.begin(), args.end());
  return out;
}

void add_identity_rules(DynamicProgram& out, const std::string& name) {
  int ar = aux_ar(out.schema, name);
  std::vector<std::string> xs = numbered("x", ar);
  for (const auto& key : rule_keys_for(out.schema, name)) {
    std::vector<std::string> us = numbered("u", in_ar(out.schema, key.rel));
    if (out.dialect == Dialect::Delta)
      out.delta_rules[key] = DeltaRule{us, xs, Formula::falsity(), Formula::falsity()};
    else
      out.rules[key] = Rule{us, xs, rel_of_vars(name, xs)};
  }
}

// Constant infrastructure shared by the blueprints: the tag constant {0} and
// the padded disequality, which holds a triple (t, v, w) iff t != 0 or v != w
// (full on the one-element domain, where no tag can leave 0).
struct PadWorld {
  std::string c1;
  std::string neq;
};

PadWorld declare_pad_world(DynamicProgram& out, Minter& mint) {
  PadWorld w;
  w.c1 = mint.mint("tag constant", "__bp_c1");
  out.schema.aux_relations.push_back({w.c1, 1});
  out.inits[w.c1] = InitSpec::procedure("singleton-zero");
  add_identity_rules(out, w.c1);
  w.neq = mint.mint("padded disequality", "__bp_neq");
  out.schema.aux_relations.push_back({w.neq, 3});
  out.inits[w.neq] = InitSpec::size_dispatch(
      InitSpec::full(),
      InitSpec::eval_on_init(
          {"t", "v", "w"},
          Formula::disj({Formula::negation(Formula::rel(w.c1, {Term::var("t")})),
                         Formula::negation(Formula::eq(Term::var("v"), Term::var("w")))})));
  add_identity_rules(out, w.neq);
  return w;
}

std::string declare_selector(DynamicProgram& out, Minter& mint, int& counter,
                             const std::string& role, const std::vector<std::string>& cols,
                             const FormulaPtr& membership) {
  std::string name = mint.mint(role, "__bp_t" + std::to_string(counter++));
  out.schema.aux_relations.push_back({name, static_cast<int>(cols.size())});
  out.inits[name] = InitSpec::size_dispatch(InitSpec::full(),
                                            InitSpec::eval_on_init(cols, membership));
  add_identity_rules(out, name);
  return name;
}

// Relations that get tagged copies: every auxiliary relation of the source,
// then every input relation.
std::vector<SymbolDecl> copy_sources(const DynamicProgram& p) {
  std::vector<SymbolDecl> out = p.schema.aux_relations;
  out.insert(out.end(), p.schema.input_relations.begin(), p.schema.input_relations.end());
  return out;
}

InitSpecPtr source_init(const DynamicProgram& p, const std::string& s) {
  if (p.schema.is_aux(s)) {
    auto init = p.init_for(s);
    return init ? init : InitSpec::empty();
  }
  std::vector<std::string> xs = numbered("x", in_ar(p.schema, s));
  return InitSpec::from_formula(xs, rel_of_vars(s, xs));
}

std::string declare_copy(DynamicProgram& out, Minter& mint, const DynamicProgram& p,
                         const SymbolDecl& d, const std::string& role, const std::string& base,
                         bool padded, InitSpecPtr at_one) {
  std::string name = mint.mint(role, base);
  out.schema.aux_relations.push_back({name, d.arity + 1});
  InitSpecPtr init = InitSpec::tagged(padded, source_init(p, d.name));
  if (at_one) init = InitSpec::size_dispatch(std::move(at_one), std::move(init));
  out.inits[name] = std::move(init);
  return name;
}

// Source triple for the copy of `d` under `key`: the source's own rule for
// auxiliary relations, the literal modification effect for input relations.
struct CopySource {
  std::vector<std::string> params;
  std::vector<std::string> targets;
  FormulaPtr raw;
};

CopySource copy_rule_source(const DynamicProgram& p, const SymbolDecl& d, const RuleKey& key) {
  CopySource src;
  if (p.schema.is_aux(d.name)) {
    const Rule& r = p.rule(d.name, key.kind, key.rel);
    src.params = r.params;
    src.targets = r.targets;
    src.raw = r.formula;
  } else {
    src.params = numbered("u", in_ar(p.schema, key.rel));
    src.targets = numbered("x", d.arity);
    src.raw = effect_formula(key.kind, key.rel, src.params, d.name, var_terms(src.targets));
  }
  return src;
}

std::string fresh_over(const FormulaPtr& f, const std::vector<std::string>& params,
                       const std::vector<std::string>& targets, const std::string& stem) {
  FreshNames fresh;
  fresh.reserve(all_var_names(f));
  fresh.reserve(std::set<std::string>(params.begin(), params.end()));
  fresh.reserve(std::set<std::string>(targets.begin(), targets.end()));
  return fresh.fresh(stem);
}

// Input-nonemptiness bits feeding the truth-table block that supplies the
// query's behaviour on the one-element domain.
struct BitPrep {
  std::vector<std::string> inputs;
  std::vector<FormulaPtr> nonempty;
  int k = 0;
};

BitPrep prep_bits(const DynamicProgram& p) {
  BitPrep b;
  for (const auto& d : p.schema.input_relations) b.inputs.push_back(d.name);
  std::sort(b.inputs.begin(), b.inputs.end());
  for (const auto& s : b.inputs) {
    std::vector<std::string> xs = numbered("x", in_ar(p.schema, s));
    b.nonempty.push_back(close_exists(xs, rel_of_vars(s, xs)));
  }
  b.k = static_cast<int>(b.inputs.size());
  return b;
}

std::vector<std::string> mint_tables(Minter& mint, int k, const std::string& what,
                                     const std::string& base) {
  std::vector<std::string> names;
  int tables = 1 << (1 << k);
  names.reserve(tables);
  for (int j = 0; j < tables; ++j)
    names.push_back(mint.mint(what + " " + std::to_string(j), base + std::to_string(j)));
  return names;
}

InitSpecPtr query_table_init(const DynamicProgram& p, const BitPrep& bits, int jstar) {
  std::vector<std::string> xq = numbered("x", aux_ar(p.schema, p.query_symbol));
  InitSpecPtr many = p.init_for(p.query_symbol);
  if (!many) many = InitSpec::empty();
  return InitSpec::size_dispatch(
      InitSpec::from_formula(xq, table_cnf(bits.k, jstar, bits.nonempty)), std::move(many));
}

std::set<std::string> frozen_for_all_inits(const DynamicProgram& p) {
  std::vector<InitSpecPtr> embedded;
  for (const auto& d : p.schema.aux_relations)
    if (auto init = p.init_for(d.name)) embedded.push_back(init);
  return frozen_set_for(p, embedded);
}

void disjunction_symbol_map(const DynamicProgram& p, const std::set<std::string>& carried,
                            const std::string& qname, PassReport& rep) {
  for (const auto& d : p.schema.aux_relations)
    rep.symbol_map[d.name] =
        carried.count(d.name) && p.is_constant_symbol(d.name) ? d.name : "";
  rep.symbol_map[p.query_symbol] = qname;
}

// ---------------------------------------------------------------------------
// remove-disjunction-ucq
// ---------------------------------------------------------------------------

PassResult remove_disjunction_ucq_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "remove-disjunction-ucq";
  require_dialect(p, Dialect::Absolute, rep.pass);
  if (!p.schema.aux_functions.empty())
    guard_fail(rep.pass, "auxiliary functions are not supported");
  for (const auto& [key, r] : p.rules)
    if (!fragment_accepts(Fragment::UCQ, r.formula))
      guard_fail(rep.pass, "rule for " + key.aux + " under " + trigger_of(key) +
                               " is not a union of conjunctive queries");
  int jstar = empirical_table_n1(p, rep.pass);

  Minter mint(p, rep);
  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = p.schema.input_relations;
  out.bases = p.bases;
  std::set<std::string> carried = frozen_for_all_inits(p);
  carry_frozen(p, carried, out);

  PadWorld pad = declare_pad_world(out, mint);

  std::map<std::string, std::string> copy1;
  for (const auto& d : copy_sources(p))
    copy1[d.name] = declare_copy(out, mint, p, d, "padded copy of " + d.name,
                                 "__bp_cp1_" + d.name, true, InitSpec::full());

  LitMap lit = [&](bool positive, const FormulaPtr& atom, const std::string& tag) -> FormulaPtr {
    if (atom->kind == Formula::Kind::Eq) {
      if (positive) return atom;
      return Formula::rel(pad.neq, {Term::var(tag), atom->terms[0], atom->terms[1]});
    }
    if (!positive) throw Error(rep.pass + ": negative literal survived the fragment guard");
    return Formula::rel(copy1.at(atom->sym), with_tag(tag, atom->terms));
  };

  int sel = 0;
  for (const auto& d : copy_sources(p)) {
    const std::string& cp = copy1.at(d.name);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      CopySource src = copy_rule_source(p, d, key);
      Blueprint bp = build_blueprint(rep.pass, src.raw, src.params, src.targets, lit, pad.c1,
                                     false);
      std::string head = fresh_over(src.raw, src.params, src.targets, "w");
      std::vector<std::string> cols = with_head(bp, head);
      FormulaPtr memb = Formula::disj(
          {Formula::negation(Formula::rel(pad.c1, {Term::var(head)})), bp.membership});
      std::string t1 = declare_selector(
          out, mint, sel, "disjunct selector for " + cp + " after " + trigger_of(key), cols,
          memb);
      out.rules[RuleKey{cp, key.kind, key.rel}] =
          Rule{src.params, cat({{head}, src.targets}), blueprint_body(bp, t1, cols, {})};
    }
  }

  BitPrep bits = prep_bits(p);
  std::vector<std::string> rname = mint_tables(mint, bits.k, "truth table", "__nc_q");
  build_nullary_block_abs(out, bits.inputs, bits.nonempty, rname, true);

  std::string qname = carried.count(p.query_symbol)
                          ? mint.mint("transformed query", "__bp_query")
                          : p.query_symbol;
  out.schema.aux_relations.push_back({qname, aux_ar(p.schema, p.query_symbol)});
  out.inits[qname] = query_table_init(p, bits, jstar);
  for (const auto& key : rule_keys_for(p.schema, p.query_symbol)) {
    const Rule& r = p.rule(p.query_symbol, key.kind, key.rel);
    Blueprint bp = build_blueprint(rep.pass, r.formula, r.params, r.targets, lit, pad.c1,
                                   false);
    std::string tq = declare_selector(
        out, mint, sel, "disjunct selector for " + qname + " after " + trigger_of(key),
        bp.t_cols, bp.membership);
    FormulaPtr bitbody = out.rules.at(RuleKey{rname[jstar], key.kind, key.rel}).formula;
    out.rules[RuleKey{qname, key.kind, key.rel}] =
        Rule{r.params, r.targets, blueprint_body(bp, tq, bp.t_cols, {bitbody})};
  }
  out.query_symbol = qname;

  prune_dead_aux(out);
  certify_fragment(out, Fragment::CQ, rep);
  disjunction_symbol_map(p, carried, qname, rep);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// remove-disjunction-fo
// ---------------------------------------------------------------------------

PassResult remove_disjunction_fo_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "remove-disjunction-fo";
  require_dialect(p, Dialect::Absolute, rep.pass);
  if (!p.schema.aux_functions.empty())
    guard_fail(rep.pass, "auxiliary functions are not supported");
  int jstar = empirical_table_n1(p, rep.pass);

  PassReport srep;
  std::map<std::string, std::string> invol;
  std::string eqhat;
  DynamicProgram q = add_complements_core(p, srep, invol, eqhat);
  absorb_stage(rep, srep, "complements");

  Minter mint(q, rep);
  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = q.schema.input_relations;
  out.bases = q.bases;
  std::vector<InitSpecPtr> embedded;
  for (const auto& d : q.schema.aux_relations)
    if (d.name != eqhat)
      if (auto init = q.init_for(d.name)) embedded.push_back(init);
  std::set<std::string> carried = frozen_set_for(q, embedded);
  carry_frozen(q, carried, out);

  PadWorld pad = declare_pad_world(out, mint);

  std::map<std::string, std::string> copy1;
  std::vector<SymbolDecl> sources;
  for (const auto& d : copy_sources(q))
    if (d.name != eqhat) sources.push_back(d);
  for (const auto& d : sources)
    copy1[d.name] = declare_copy(out, mint, q, d, "padded copy of " + d.name,
                                 "__bp_cp1_" + d.name, true, InitSpec::full());

  LitMap lit = [&](bool positive, const FormulaPtr& atom, const std::string& tag) -> FormulaPtr {
    if (atom->kind == Formula::Kind::Eq) {
      if (positive) return atom;
      return Formula::rel(pad.neq, {Term::var(tag), atom->terms[0], atom->terms[1]});
    }
    if (!positive) throw Error(rep.pass + ": negative literal survived the complement stage");
    if (atom->sym == eqhat)
      return Formula::rel(pad.neq, {Term::var(tag), atom->terms[0], atom->terms[1]});
    return Formula::rel(copy1.at(atom->sym), with_tag(tag, atom->terms));
  };

  int sel = 0;
  for (const auto& d : sources) {
    const std::string& cp = copy1.at(d.name);
    for (const auto& key : rule_keys_for(q.schema, d.name)) {
      CopySource src = copy_rule_source(q, d, key);
      Blueprint bp =
          build_blueprint(rep.pass, src.raw, src.params, src.targets, lit, pad.c1, true);
      std::string head = fresh_over(src.raw, src.params, src.targets, "w");
      std::vector<std::string> cols = with_head(bp, head);
      FormulaPtr memb = Formula::disj(
          {Formula::negation(Formula::rel(pad.c1, {Term::var(head)})), bp.membership});
      std::string t1 = declare_selector(
          out, mint, sel, "disjunct selector for " + cp + " after " + trigger_of(key), cols,
          memb);
      out.rules[RuleKey{cp, key.kind, key.rel}] =
          Rule{src.params, cat({{head}, src.targets}), blueprint_body(bp, t1, cols, {})};
    }
  }

  BitPrep bits = prep_bits(q);
  std::vector<std::string> rname = mint_tables(mint, bits.k, "truth table", "__nc_q");
  build_nullary_block_abs(out, bits.inputs, bits.nonempty, rname, true);

  std::string qname = carried.count(q.query_symbol)
                          ? mint.mint("transformed query", "__bp_query")
                          : q.query_symbol;
  out.schema.aux_relations.push_back({qname, aux_ar(q.schema, q.query_symbol)});
  out.inits[qname] = query_table_init(q, bits, jstar);
  for (const auto& key : rule_keys_for(q.schema, q.query_symbol)) {
    const Rule& r = q.rule(q.query_symbol, key.kind, key.rel);
    Blueprint bp =
        build_blueprint(rep.pass, r.formula, r.params, r.targets, lit, pad.c1, true);
    std::string tq = declare_selector(
        out, mint, sel, "disjunct selector for " + qname + " after " + trigger_of(key),
        bp.t_cols, bp.membership);
    FormulaPtr bitbody = out.rules.at(RuleKey{rname[jstar], key.kind, key.rel}).formula;
    out.rules[RuleKey{qname, key.kind, key.rel}] =
        Rule{r.params, r.targets, blueprint_body(bp, tq, bp.t_cols, {bitbody})};
  }
  out.query_symbol = qname;

  prune_dead_aux(out);
  certify_fragment(out, Fragment::FOConj, rep);
  disjunction_symbol_map(p, carried, qname, rep);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// remove-disjunction-ucqneg
// ---------------------------------------------------------------------------
//
// With negative literals in the bodies, the exact copies must be empty off
// the tag constant, and nothing keeps the first layer stable on the
// one-element domain. A second layer of guarded copies fixes that: each
// guarded copy replays its relation's first-layer rule with every copy atom
// redirected to the guarded twins and an extra tag pinned to c. On the
// one-element domain the positive guards stay full and the negative guards
// stay empty (their rules carry a two-element witness), so the query rule,
// which reads only guarded copies, collapses to its truth-table conjunct
// there; on larger domains the guards track the first layer exactly.

PassResult remove_disjunction_ucqneg_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "remove-disjunction-ucqneg";
  require_dialect(p, Dialect::Absolute, rep.pass);
  if (!p.schema.aux_functions.empty())
    guard_fail(rep.pass, "auxiliary functions are not supported");
  for (const auto& [key, r] : p.rules)
    if (!fragment_accepts(Fragment::UCQNeg, r.formula))
      guard_fail(rep.pass, "rule for " + key.aux + " under " + trigger_of(key) +
                               " is not a union of conjunctive queries with negation");
  int jstar = empirical_table_n1(p, rep.pass);

  Minter mint(p, rep);
  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = p.schema.input_relations;
  out.bases = p.bases;
  std::set<std::string> carried = frozen_for_all_inits(p);
  carry_frozen(p, carried, out);

  PadWorld pad = declare_pad_world(out, mint);
  std::string vmany = mint.mint("two-element witness", "__bp_many");
  out.schema.aux_relations.push_back({vmany, 0});
  out.inits[vmany] = InitSpec::size_dispatch(InitSpec::empty(), InitSpec::full());
  add_identity_rules(out, vmany);

  std::map<std::string, std::string> copy1, copy2;
  for (const auto& d : copy_sources(p)) {
    copy1[d.name] = declare_copy(out, mint, p, d, "padded copy of " + d.name,
                                 "__bp_cp1_" + d.name, true, nullptr);
    copy2[d.name] = declare_copy(out, mint, p, d, "exact copy of " + d.name,
                                 "__bp_cp2_" + d.name, false, nullptr);
  }

  LitMap lit = [&](bool positive, const FormulaPtr& atom, const std::string& tag) -> FormulaPtr {
    if (atom->kind == Formula::Kind::Eq) {
      if (positive) return atom;
      return Formula::rel(pad.neq, {Term::var(tag), atom->terms[0], atom->terms[1]});
    }
    if (positive) return Formula::rel(copy1.at(atom->sym), with_tag(tag, atom->terms));
    return Formula::negation(Formula::rel(copy2.at(atom->sym), with_tag(tag, atom->terms)));
  };

  int sel = 0;
  for (const auto& d : copy_sources(p)) {
    const std::string& cp1 = copy1.at(d.name);
    const std::string& cp2 = copy2.at(d.name);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      CopySource src = copy_rule_source(p, d, key);
      Blueprint bp = build_blueprint(rep.pass, src.raw, src.params, src.targets, lit, pad.c1,
                                     false);
      std::string head = fresh_over(src.raw, src.params, src.targets, "w");
      std::vector<std::string> cols1 = with_head(bp, head);
      FormulaPtr memb1 = Formula::disj(
          {Formula::negation(Formula::rel(pad.c1, {Term::var(head)})), bp.membership});
      std::string t1 = declare_selector(
          out, mint, sel, "disjunct selector for " + cp1 + " after " + trigger_of(key), cols1,
          memb1);
      out.rules[RuleKey{cp1, key.kind, key.rel}] =
          Rule{src.params, cat({{head}, src.targets}), blueprint_body(bp, t1, cols1, {})};
      std::string t2 = declare_selector(
          out, mint, sel, "disjunct selector for " + cp2 + " after " + trigger_of(key),
          bp.t_cols, bp.membership);
      out.rules[RuleKey{cp2, key.kind, key.rel}] =
          Rule{src.params, cat({{head}, src.targets}),
               blueprint_body(bp, t2, bp.t_cols,
                              {Formula::rel(pad.c1, {Term::var(head)})})};
    }
  }

  std::map<std::string, std::string> padof;
  auto declare_guard = [&](const std::string& hat, bool keep_full) {
    int ar = aux_ar(out.schema, hat);
    std::string tail = hat.rfind("__bp_", 0) == 0 ? hat.substr(5) : hat;
    std::string name = mint.mint("guarded copy of " + hat,
                                 (keep_full ? "__bp_p_" : "__bp_n_") + tail);
    out.schema.aux_relations.push_back({name, ar + 1});
    out.inits[name] = InitSpec::size_dispatch(
        keep_full ? InitSpec::full() : InitSpec::empty(),
        InitSpec::tagged(false, out.inits.at(hat)));
    padof[hat] = name;
    return name;
  };
  for (const auto& d : copy_sources(p)) {
    declare_guard(copy1.at(d.name), true);
    declare_guard(copy2.at(d.name), false);
  }
  auto guard_atoms = [&](const FormulaPtr& f, const std::string& t) {
    return rewrite_atoms(
        f, [&](const std::string& sym, const std::vector<TermPtr>& args) -> FormulaPtr {
          auto it = padof.find(sym);
          if (it == padof.end()) return nullptr;
          return Formula::rel(it->second, with_tag(t, args));
        });
  };
  for (const auto& d : copy_sources(p)) {
    for (bool exact : {false, true}) {
      const std::string& hat = exact ? copy2.at(d.name) : copy1.at(d.name);
      for (const auto& key : rule_keys_for(p.schema, d.name)) {
        const Rule& r = out.rules.at(RuleKey{hat, key.kind, key.rel});
        std::string t = fresh_over(r.formula, r.params, r.targets, "t");
        FormulaPtr pin = Formula::rel(pad.c1, {Term::var(t)});
        if (exact) pin = Formula::conj({pin, Formula::rel(vmany, {})});
        out.rules[RuleKey{padof.at(hat), key.kind, key.rel}] =
            Rule{r.params, cat({{t}, r.targets}),
                 conj_into_matrix(guard_atoms(r.formula, t), pin)};
      }
    }
  }

  BitPrep bits = prep_bits(p);
  std::vector<std::string> rname = mint_tables(mint, bits.k, "truth table", "__nc_q");
  build_nullary_block_abs(out, bits.inputs, bits.nonempty, rname, true);

  std::string qname = carried.count(p.query_symbol)
                          ? mint.mint("transformed query", "__bp_query")
                          : p.query_symbol;
  out.schema.aux_relations.push_back({qname, aux_ar(p.schema, p.query_symbol)});
  out.inits[qname] = query_table_init(p, bits, jstar);
  for (const auto& key : rule_keys_for(p.schema, p.query_symbol)) {
    const Rule& r = p.rule(p.query_symbol, key.kind, key.rel);
    Blueprint bp = build_blueprint(rep.pass, r.formula, r.params, r.targets, lit, pad.c1,
                                   false);
    std::string tq = declare_selector(
        out, mint, sel, "disjunct selector for " + qname + " after " + trigger_of(key),
        bp.t_cols, bp.membership);
    FormulaPtr body1 = blueprint_body(bp, tq, bp.t_cols, {});
    std::string t = fresh_over(body1, r.params, r.targets, "t");
    FormulaPtr bitbody = out.rules.at(RuleKey{rname[jstar], key.kind, key.rel}).formula;
    FormulaPtr qbody = Formula::exists(
        t, conj_into_matrix(guard_atoms(body1, t),
                            Formula::conj({Formula::rel(pad.c1, {Term::var(t)}), bitbody})));
    out.rules[RuleKey{qname, key.kind, key.rel}] = Rule{r.params, r.targets, qbody};
  }
  out.query_symbol = qname;

  prune_dead_aux(out);
  certify_fragment(out, Fragment::CQNeg, rep);
  disjunction_symbol_map(p, carried, qname, rep);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// delta-remove-disjunction
// ---------------------------------------------------------------------------
//
// Same blueprint, delta dialect. The padded and exact copies mirror the
// source's additions and removals on the tag-constant slice; the direction
// that would disturb them on the one-element domain (removing from a padded
// copy, adding to an exact copy) carries the two-element witness, and the
// no-op directions stay open so redundant firings remain harmless. Table
// removals are gated behind the one-element witness instead, so the table
// block freezes full on larger domains while the query rule reuses its
// ungated transition bodies, which are then vacuously true.

PassResult delta_remove_disjunction_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "delta-remove-disjunction";
  require_dialect(p, Dialect::Delta, rep.pass);
  if (!p.schema.aux_functions.empty())
    guard_fail(rep.pass, "auxiliary functions are not supported");
  for (const auto& [key, r] : p.delta_rules) {
    if (!fragment_accepts(Fragment::UCQNeg, r.add))
      guard_fail(rep.pass, "add part for " + key.aux + " under " + trigger_of(key) +
                               " is not a union of conjunctive queries with negation");
    if (!fragment_accepts(Fragment::UCQNeg, r.remove))
      guard_fail(rep.pass, "remove part for " + key.aux + " under " + trigger_of(key) +
                               " is not a union of conjunctive queries with negation");
  }
  int jstar = empirical_table_n1(p, rep.pass);

  Minter mint(p, rep);
  DynamicProgram out;
  out.dialect = Dialect::Delta;
  out.schema.input_relations = p.schema.input_relations;
  out.bases = p.bases;
  std::set<std::string> carried = frozen_for_all_inits(p);
  carry_frozen(p, carried, out);

  PadWorld pad = declare_pad_world(out, mint);
  std::string vmany = mint.mint("two-element witness", "__bp_many");
  out.schema.aux_relations.push_back({vmany, 0});
  out.inits[vmany] = InitSpec::size_dispatch(InitSpec::empty(), InitSpec::full());
  add_identity_rules(out, vmany);
  std::string uone = mint.mint("one-element witness", "__bp_one");
  out.schema.aux_relations.push_back({uone, 0});
  out.inits[uone] = InitSpec::size_dispatch(InitSpec::full(), InitSpec::empty());
  add_identity_rules(out, uone);

  std::map<std::string, std::string> copy1, copy2;
  for (const auto& d : copy_sources(p)) {
    copy1[d.name] = declare_copy(out, mint, p, d, "padded copy of " + d.name,
                                 "__bp_cp1_" + d.name, true, InitSpec::full());
    copy2[d.name] = declare_copy(out, mint, p, d, "exact copy of " + d.name,
                                 "__bp_cp2_" + d.name, false, InitSpec::empty());
  }

  LitMap lit = [&](bool positive, const FormulaPtr& atom, const std::string& tag) -> FormulaPtr {
    if (atom->kind == Formula::Kind::Eq) {
      if (positive) return atom;
      return Formula::rel(pad.neq, {Term::var(tag), atom->terms[0], atom->terms[1]});
    }
    if (positive) return Formula::rel(copy1.at(atom->sym), with_tag(tag, atom->terms));
    return Formula::negation(Formula::rel(copy2.at(atom->sym), with_tag(tag, atom->terms)));
  };

  int sel = 0;
  FormulaPtr witness = Formula::rel(vmany, {});
  for (const auto& d : p.schema.aux_relations) {
    const std::string& cp1 = copy1.at(d.name);
    const std::string& cp2 = copy2.at(d.name);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      const DeltaRule& dr = p.delta_rule(d.name, key.kind, key.rel);
      Blueprint bpA =
          build_blueprint(rep.pass, dr.add, dr.params, dr.targets, lit, pad.c1, false);
      Blueprint bpR =
          build_blueprint(rep.pass, dr.remove, dr.params, dr.targets, lit, pad.c1, false);
      std::string tA = declare_selector(
          out, mint, sel, "disjunct selector for additions to " + cp1 + " after " + trigger_of(key),
          bpA.t_cols, bpA.membership);
      std::string tR = declare_selector(
          out, mint, sel, "disjunct selector for removals from " + cp1 + " after " + trigger_of(key),
          bpR.t_cols, bpR.membership);
      FormulaPtr both = Formula::conj({dr.add, dr.remove});
      std::string t0 = fresh_over(both, dr.params, dr.targets, "t");
      FormulaPtr pin = Formula::rel(pad.c1, {Term::var(t0)});
      std::vector<std::string> heads = cat({{t0}, dr.targets});
      out.delta_rules[RuleKey{cp1, key.kind, key.rel}] =
          DeltaRule{dr.params, heads, blueprint_body(bpA, tA, bpA.t_cols, {pin}),
                    blueprint_body(bpR, tR, bpR.t_cols, {pin, witness})};
      out.delta_rules[RuleKey{cp2, key.kind, key.rel}] =
          DeltaRule{dr.params, heads, blueprint_body(bpA, tA, bpA.t_cols, {pin, witness}),
                    blueprint_body(bpR, tR, bpR.t_cols, {pin})};
    }
  }
  for (const auto& d : p.schema.input_relations) {
    const std::string& cp1 = copy1.at(d.name);
    const std::string& cp2 = copy2.at(d.name);
    std::vector<std::string> xs = numbered("x", d.arity);
    std::vector<std::string> heads = cat({{"t"}, xs});
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      std::vector<std::string> us = numbered("u", in_ar(p.schema, key.rel));
      FormulaPtr none = Formula::falsity();
      if (key.rel == d.name) {
        FormulaPtr match = Formula::conj(
            {Formula::rel(pad.c1, {Term::var("t")}), tuple_eq(var_terms(xs), us)});
        FormulaPtr guarded = Formula::conj({match, witness});
        if (key.kind == ModKind::Ins) {
          out.delta_rules[RuleKey{cp1, key.kind, key.rel}] = DeltaRule{us, heads, match, none};
          out.delta_rules[RuleKey{cp2, key.kind, key.rel}] = DeltaRule{us, heads, guarded, none};
        } else {
          out.delta_rules[RuleKey{cp1, key.kind, key.rel}] = DeltaRule{us, heads, none, guarded};
          out.delta_rules[RuleKey{cp2, key.kind, key.rel}] = DeltaRule{us, heads, none, match};
        }
      } else {
        out.delta_rules[RuleKey{cp1, key.kind, key.rel}] = DeltaRule{us, heads, none, none};
        out.delta_rules[RuleKey{cp2, key.kind, key.rel}] = DeltaRule{us, heads, none, none};
      }
    }
  }

  BitPrep bits = prep_bits(p);
  std::vector<std::string> rname = mint_tables(mint, bits.k, "truth table", "__nc_q");
  std::vector<std::string> hname =
      mint_tables(mint, bits.k, "complement of truth table", "__nc_qc");
  build_nullary_block_delta(out, bits.inputs, bits.nonempty, rname, hname, uone, true);
  std::map<std::string, int> bit_index;
  for (int l = 0; l < bits.k; ++l) bit_index[bits.inputs[l]] = l;

  std::string qname = carried.count(p.query_symbol)
                          ? mint.mint("transformed query", "__bp_query")
                          : p.query_symbol;
  out.schema.aux_relations.push_back({qname, aux_ar(p.schema, p.query_symbol)});
  out.inits[qname] = query_table_init(p, bits, jstar);
  for (const auto& key : rule_keys_for(p.schema, p.query_symbol)) {
    const DeltaRule& dr = p.delta_rule(p.query_symbol, key.kind, key.rel);
    Blueprint bpA =
        build_blueprint(rep.pass, dr.add, dr.params, dr.targets, lit, pad.c1, false);
    Blueprint bpR =
        build_blueprint(rep.pass, dr.remove, dr.params, dr.targets, lit, pad.c1, false);
    std::string tA = declare_selector(
        out, mint, sel, "disjunct selector for additions to " + qname + " after " + trigger_of(key),
        bpA.t_cols, bpA.membership);
    std::string tR = declare_selector(
        out, mint, sel, "disjunct selector for removals from " + qname + " after " + trigger_of(key),
        bpR.t_cols, bpR.membership);
    int l = bit_index.at(key.rel);
    bool v = key.kind == ModKind::Ins;
    FormulaPtr raise = Formula::conj(with_atom(
        atoms_for(cnf_next_tables(bits.k, jstar, l, v), rname), Formula::rel(hname[jstar], {})));
    FormulaPtr clear = Formula::conj(with_atom(
        atoms_for(dnf_next_tables(bits.k, jstar, l, v), hname), Formula::rel(rname[jstar], {})));
    out.delta_rules[RuleKey{qname, key.kind, key.rel}] =
        DeltaRule{dr.params, dr.targets, blueprint_body(bpA, tA, bpA.t_cols, {raise}),
                  blueprint_body(bpR, tR, bpR.t_cols, {clear})};
  }
  out.query_symbol = qname;

  prune_dead_aux(out);
  certify_fragment(out, Fragment::CQNeg, rep);
  disjunction_symbol_map(p, carried, qname, rep);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// qf-to-ucq
// ---------------------------------------------------------------------------
//
// Functions become graph relations and every rule body is rebuilt around
// them: a term t is represented by the formula "t evaluates to z", atoms
// outsource their non-variable arguments to fresh existential variables, and
// negated atoms read maintained complements. The result uses only
// existential quantification, conjunction and disjunction, so after
// prenexing every rule classifies as a union of conjunctive queries.

struct QfWorld {
  std::string eqhat;
  std::map<std::string, std::string> hat;    // relation -> complement copy
  std::map<std::string, std::string> graph;  // function -> graph relation
};

FormulaPtr qf_tr_pos(const QfWorld& w, const FormulaPtr& f, FreshNames& fresh);

FormulaPtr qf_term_value(const QfWorld& w, const TermPtr& t, const std::string& z,
                         FreshNames& fresh) {
  switch (t->kind) {
    case Term::Kind::Var:
      return Formula::eq(Term::var(z), Term::var(t->name));
    case Term::Kind::Fn: {
      std::vector<TermPtr> head;
      std::vector<FormulaPtr> parts;
      std::vector<std::string> ws;
      for (const auto& a : t->args) {
        if (a->kind == Term::Kind::Var) {
          head.push_back(a);
        } else {
          std::string v = fresh.fresh("w");
          ws.push_back(v);
          parts.push_back(qf_term_value(w, a, v, fresh));
          head.push_back(Term::var(v));
        }
      }
      head.push_back(Term::var(z));
      std::vector<FormulaPtr> all{Formula::rel(w.graph.at(t->name), std::move(head))};
      all.insert(all.end(), parts.begin(), parts.end());
      return close_exists(ws, Formula::conj(std::move(all)));
    }
    case Term::Kind::Ite: {
      FormulaPtr yes = Formula::conj(
          {qf_tr_pos(w, to_nnf(t->cond), fresh), qf_term_value(w, t->then_branch, z, fresh)});
      FormulaPtr no = Formula::conj(
          {qf_tr_pos(w, negate_nnf(t->cond), fresh), qf_term_value(w, t->else_branch, z, fresh)});
      return Formula::disj({yes, no});
    }
  }
  throw Error("qf-to-ucq: unknown term kind");
}

FormulaPtr qf_rel_atom(const QfWorld& w, const std::string& sym,
                       const std::vector<TermPtr>& args, FreshNames& fresh) {
  std::vector<TermPtr> head;
  std::vector<FormulaPtr> parts;
  std::vector<std::string> zs;
  for (const auto& a : args) {
    if (a->kind == Term::Kind::Var) {
      head.push_back(a);
    } else {
      std::string z = fresh.fresh("z");
      zs.push_back(z);
      parts.push_back(qf_term_value(w, a, z, fresh));
      head.push_back(Term::var(z));
    }
  }
  std::vector<FormulaPtr> all{Formula::rel(sym, std::move(head))};
  all.insert(all.end(), parts.begin(), parts.end());
  return close_exists(zs, Formula::conj(std::move(all)));
}

FormulaPtr qf_eq_value(const QfWorld& w, const TermPtr& lhs, const TermPtr& rhs, bool positive,
                       FreshNames& fresh) {
  bool lv = lhs->kind == Term::Kind::Var;
  bool rv = rhs->kind == Term::Kind::Var;
  if (lv && rv) {
    if (positive) return Formula::eq(lhs, rhs);
    return Formula::rel(w.eqhat, {lhs, rhs});
  }
  if (lv || rv) {
    const TermPtr& v = lv ? lhs : rhs;
    const TermPtr& t = lv ? rhs : lhs;
    if (positive) return qf_term_value(w, t, v->name, fresh);
    std::string z = fresh.fresh("z");
    return close_exists({z}, Formula::conj({qf_term_value(w, t, z, fresh),
                                            Formula::rel(w.eqhat, {v, Term::var(z)})}));
  }
  if (positive) {
    std::string z = fresh.fresh("z");
    return close_exists({z}, Formula::conj({qf_term_value(w, lhs, z, fresh),
                                            qf_term_value(w, rhs, z, fresh)}));
  }
  std::string zl = fresh.fresh("z");
  std::string zr = fresh.fresh("z");
  return close_exists(
      {zl, zr}, Formula::conj({qf_term_value(w, lhs, zl, fresh),
                               qf_term_value(w, rhs, zr, fresh),
                               Formula::rel(w.eqhat, {Term::var(zl), Term::var(zr)})}));
}

FormulaPtr qf_tr_pos(const QfWorld& w, const FormulaPtr& f, FreshNames& fresh) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Rel:
      return qf_rel_atom(w, f->sym, f->terms, fresh);
    case Formula::Kind::Eq:
      return qf_eq_value(w, f->terms[0], f->terms[1], true, fresh);
    case Formula::Kind::Not: {
      const FormulaPtr& a = f->kids[0];
      if (a->kind == Formula::Kind::Rel) return qf_rel_atom(w, w.hat.at(a->sym), a->terms, fresh);
      if (a->kind == Formula::Kind::Eq)
        return qf_eq_value(w, a->terms[0], a->terms[1], false, fresh);
      throw Error("qf-to-ucq: negation below a connective after normalization");
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (const auto& kf : f->kids) kids.push_back(qf_tr_pos(w, kf, fresh));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    default:
      throw Error("qf-to-ucq: quantifier in a quantifier-free rule");
  }
}

FormulaPtr ucq_normalize(const FormulaPtr& f) {
  FormulaPtr pn = to_prenex(f);
  std::vector<std::string> binders;
  FormulaPtr matrix = pn;
  while (matrix->kind == Formula::Kind::Exists) {
    binders.push_back(matrix->sym);
    matrix = matrix->kids[0];
  }
  return close_exists(binders, matrix);
}

bool formula_is_nnf(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      return true;
    case Formula::Kind::Not:
      return f->kids[0]->kind == Formula::Kind::Rel ||
             f->kids[0]->kind == Formula::Kind::Eq;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& k : f->kids)
        if (!formula_is_nnf(k)) return false;
      return true;
    default:
      return false;
  }
}

FreshNames body_names(const FormulaPtr& raw, const std::vector<std::string>& params,
                      const std::vector<std::string>& targets) {
  FreshNames fresh;
  fresh.reserve(all_var_names(raw));
  fresh.reserve(std::set<std::string>(params.begin(), params.end()));
  fresh.reserve(std::set<std::string>(targets.begin(), targets.end()));
  return fresh;
}

PassResult qf_to_ucq_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "qf-to-ucq";
  require_dialect(p, Dialect::QF, rep.pass);
  for (const auto& [key, r] : p.rules)
    if (!formula_is_nnf(r.formula))
      guard_fail(rep.pass, "rule for " + key.aux + " under " + trigger_of(key) +
                               " is not in negation normal form");

  Minter mint(p, rep);
  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = p.schema.input_relations;
  out.bases = p.bases;
  out.query_symbol = p.query_symbol;

  QfWorld w;
  for (const auto& d : p.schema.aux_relations) {
    out.schema.aux_relations.push_back(d);
    if (auto init = p.init_for(d.name)) out.inits[d.name] = init;
  }
  w.eqhat = mint.mint("inequality constant", "__hat_eq");
  out.schema.aux_relations.push_back({w.eqhat, 2});
  out.inits[w.eqhat] = InitSpec::from_formula(
      {"x1", "x2"}, Formula::negation(Formula::eq(Term::var("x1"), Term::var("x2"))));
  for (const auto& d : p.schema.aux_relations) {
    w.hat[d.name] = mint.mint("complement of " + d.name, "__hat_" + d.name);
    out.schema.aux_relations.push_back({w.hat.at(d.name), d.arity});
    InitSpecPtr init = p.init_for(d.name);
    out.inits[w.hat.at(d.name)] = InitSpec::complement_of(init ? init : InitSpec::empty());
  }
  for (const auto& d : p.schema.input_relations) {
    w.hat[d.name] = mint.mint("complement of " + d.name, "__hat_" + d.name);
    out.schema.aux_relations.push_back({w.hat.at(d.name), d.arity});
    std::vector<std::string> xs = numbered("x", d.arity);
    out.inits[w.hat.at(d.name)] =
        InitSpec::from_formula(xs, Formula::negation(rel_of_vars(d.name, xs)));
  }
  for (const auto& d : p.schema.aux_functions) {
    w.graph[d.name] = mint.mint("graph of " + d.name, "__fn_" + d.name);
    out.schema.aux_relations.push_back({w.graph.at(d.name), d.arity + 1});
    out.inits[w.graph.at(d.name)] = InitSpec::fn_graph(p.fn_init_for(d.name).proc);
  }

  for (const auto& d : p.schema.aux_relations) {
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      const Rule& r = p.rule(d.name, key.kind, key.rel);
      FreshNames fresh = body_names(r.formula, r.params, r.targets);
      out.rules[key] =
          Rule{r.params, r.targets, ucq_normalize(qf_tr_pos(w, to_nnf(r.formula), fresh))};
      FreshNames fresh2 = body_names(r.formula, r.params, r.targets);
      out.rules[RuleKey{w.hat.at(d.name), key.kind, key.rel}] =
          Rule{r.params, r.targets,
               ucq_normalize(qf_tr_pos(w, negate_nnf(r.formula), fresh2))};
    }
  }
  add_identity_rules(out, w.eqhat);
  for (const auto& d : p.schema.input_relations) {
    std::vector<std::string> xs = numbered("x", d.arity);
    for (const auto& key : rule_keys_for(p.schema, w.hat.at(d.name))) {
      std::vector<std::string> us = numbered("u", in_ar(p.schema, key.rel));
      FormulaPtr effect = effect_formula(key.kind, key.rel, us, d.name, var_terms(xs));
      FreshNames fresh = body_names(effect, us, xs);
      out.rules[key] =
          Rule{us, xs, ucq_normalize(qf_tr_pos(w, negate_nnf(effect), fresh))};
    }
  }
  for (const auto& d : p.schema.aux_functions) {
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      const FnRule& fr = p.fn_rule(d.name, key.kind, key.rel);
      FormulaPtr probe = Formula::rel(d.name, var_terms(fr.args));
      FreshNames fresh = body_names(probe, fr.params, fr.args);
      fresh.reserve(free_vars(fr.term));
      std::string z = fresh.fresh("z");
      out.rules[RuleKey{w.graph.at(d.name), key.kind, key.rel}] =
          Rule{fr.params, cat({fr.args, {z}}),
               ucq_normalize(qf_term_value(w, fr.term, z, fresh))};
    }
  }

  prune_dead_aux(out);
  certify_fragment(out, Fragment::UCQ, rep);
  for (const auto& d : p.schema.aux_relations) rep.symbol_map[d.name] = d.name;
  for (const auto& d : p.schema.aux_functions) rep.symbol_map[d.name] = w.graph.at(d.name);
  return finish(std::move(out), std::move(rep));
}

// ---------------------------------------------------------------------------
// delta-ucqneg-to-ucqneg
// ---------------------------------------------------------------------------
//
// After removing negation the delta program is positive, and its removal
// formulas can be cached one step ahead: a squirrel relation per (relation,
// modification) stores the tuples the next such modification would remove.
// The absolute main rule is then (R or additions) minus the cached removals,
// and each squirrel is rebuilt by replaying its removal formula with every
// atom replaced by the value it will have after the pending modification.

PassResult delta_ucqneg_to_ucqneg_impl(const ProgramPtr& pp) {
  const DynamicProgram& p = *pp;
  PassReport rep;
  rep.pass = "delta-ucqneg-to-ucqneg";
  require_dialect(p, Dialect::Delta, rep.pass);
  if (!p.schema.aux_functions.empty())
    guard_fail(rep.pass, "auxiliary functions are not supported");
  for (const auto& [key, r] : p.delta_rules) {
    if (!fragment_accepts(Fragment::UCQNeg, r.add))
      guard_fail(rep.pass, "add part for " + key.aux + " under " + trigger_of(key) +
                               " is not a union of conjunctive queries with negation");
    if (!fragment_accepts(Fragment::UCQNeg, r.remove))
      guard_fail(rep.pass, "remove part for " + key.aux + " under " + trigger_of(key) +
                               " is not a union of conjunctive queries with negation");
  }

  PassResult staged = delta_remove_negation_impl(pp, false);
  const DynamicProgram& q = *staged.program;
  absorb_stage(rep, staged.report, "positive form");

  Minter mint(q, rep);
  DynamicProgram out;
  out.dialect = Dialect::Absolute;
  out.schema.input_relations = q.schema.input_relations;
  out.bases = q.bases;
  out.schema.aux_relations = q.schema.aux_relations;
  out.inits = q.inits;
  out.query_symbol = q.query_symbol;

  std::map<RuleKey, std::string> sq;
  for (const auto& d : q.schema.aux_relations) {
    for (const auto& key : rule_keys_for(q.schema, d.name)) {
      const DeltaRule& dr = q.delta_rule(d.name, key.kind, key.rel);
      std::vector<std::string> ws = numbered("w", in_ar(q.schema, key.rel));
      std::vector<std::string> xs = numbered("x", d.arity);
      std::string name = mint.mint(
          "pending removals from " + d.name + " after " + trigger_of(key),
          "__sq_" + d.name + "_rm_" + modkind_name(key.kind) + "_" + key.rel);
      sq[key] = name;
      out.schema.aux_relations.push_back(
          {name, static_cast<int>(ws.size() + xs.size())});
      out.inits[name] =
          InitSpec::eval_on_init(cat({ws, xs}), instantiate(dr.remove, dr.params, ws,
                                                            dr.targets, xs));
    }
  }

  for (const auto& d : q.schema.aux_relations) {
    for (const auto& key : rule_keys_for(q.schema, d.name)) {
      const DeltaRule& dr = q.delta_rule(d.name, key.kind, key.rel);
      FormulaPtr keep = Formula::disj({rel_of_vars(d.name, dr.targets), dr.add});
      FormulaPtr drop = Formula::negation(
          Formula::rel(sq.at(key), var_terms(cat({dr.params, dr.targets}))));
      out.rules[key] = Rule{dr.params, dr.targets, to_prenex(Formula::conj({keep, drop}))};
    }
  }

  for (const auto& d : q.schema.aux_relations) {
    for (const auto& key1 : rule_keys_for(q.schema, d.name)) {
      const DeltaRule& dr1 = q.delta_rule(d.name, key1.kind, key1.rel);
      std::vector<std::string> ws = numbered("w", in_ar(q.schema, key1.rel));
      std::vector<std::string> xs = numbered("x", d.arity);
      for (const auto& key0 : rule_keys_for(q.schema, sq.at(key1))) {
        std::vector<std::string> us = numbered("u", in_ar(q.schema, key0.rel));
        std::set<std::string> avoid(us.begin(), us.end());
        FormulaPtr src = instantiate(dr1.remove, dr1.params, ws, dr1.targets, xs, avoid);
        std::set<std::string> ctx = all_var_names(src);
        ctx.insert(us.begin(), us.end());
        FormulaPtr body = rewrite_atoms(
            src,
            [&](const std::string& sym, const std::vector<TermPtr>& args) -> FormulaPtr {
              if (q.schema.is_input(sym))
                return effect_formula(key0.kind, key0.rel, us, sym, args);
              if (!q.schema.is_aux(sym) || q.is_constant_symbol(sym)) return nullptr;
              const DeltaRule& a = q.delta_rule(sym, key0.kind, key0.rel);
              std::vector<std::string> an = names_of(args);
              std::set<std::string> avoid2 = ctx;
              avoid2.insert(an.begin(), an.end());
              FormulaPtr next = Formula::disj(
                  {Formula::rel(sym, args),
                   instantiate(a.add, a.params, us, a.targets, an, avoid2)});
              return Formula::conj(
                  {next, Formula::negation(Formula::rel(
                             sq.at(RuleKey{sym, key0.kind, key0.rel}),
                             var_terms(cat({us, an}))))});
            });
        out.rules[RuleKey{sq.at(key1), key0.kind, key0.rel}] =
            Rule{us, cat({ws, xs}), to_prenex(body)};
      }
    }
  }

  prune_dead_aux(out);
  certify_fragment(out, Fragment::UCQNeg, rep);
  identity_symbol_map(p, rep);
  return finish(std::move(out), std::move(rep));
}

}  // namespace

// ---------------------------------------------------------------------------
// public surface
// ---------------------------------------------------------------------------

PassResult make_query_atomic(const ProgramPtr& p) { return make_query_atomic_impl(p); }
PassResult add_complements(const ProgramPtr& p) { return add_complements_impl(p); }
PassResult prop_to_propcqneg(const ProgramPtr& p) { return prop_to_propcqneg_impl(p); }
PassResult remove_disjunction_ucqneg(const ProgramPtr& p) {
  return remove_disjunction_ucqneg_impl(p);
}
PassResult remove_disjunction_ucq(const ProgramPtr& p) { return remove_disjunction_ucq_impl(p); }
PassResult remove_disjunction_fo(const ProgramPtr& p) { return remove_disjunction_fo_impl(p); }
PassResult nullary_propcq(const ProgramPtr& p) { return nullary_propcq_impl(p); }
PassResult switch_quantifiers(const ProgramPtr& p) { return switch_quantifiers_impl(p); }
PassResult qf_to_ucq(const ProgramPtr& p) { return qf_to_ucq_impl(p); }
PassResult abs_to_delta(const ProgramPtr& p) { return abs_to_delta_impl(p); }
PassResult delta_to_abs(const ProgramPtr& p) { return delta_to_abs_impl(p); }
PassResult delta_remove_negation(const ProgramPtr& p) {
  return delta_remove_negation_impl(p, true);
}
PassResult qfo_to_delta_qfo(const ProgramPtr& p) { return qfo_to_delta_qfo_impl(p); }
PassResult delta_ucqneg_to_ucqneg(const ProgramPtr& p) {
  return delta_ucqneg_to_ucqneg_impl(p);
}
PassResult delta_remove_disjunction(const ProgramPtr& p) {
  return delta_remove_disjunction_impl(p);
}
PassResult delta_nullary_propcq(const ProgramPtr& p) { return delta_nullary_propcq_impl(p); }

const std::vector<std::string>& pass_ids() {
  static const std::vector<std::string> ids = {
      "make-query-atomic",     "add-complements",
      "prop-to-propcqneg",     "remove-disjunction-ucqneg",
      "remove-disjunction-ucq", "remove-disjunction-fo",
      "nullary-propcq",        "switch-quantifiers",
      "qf-to-ucq",             "abs-to-delta",
      "delta-to-abs",          "delta-remove-negation",
      "qfo-to-delta-qfo",      "delta-ucqneg-to-ucqneg",
      "delta-remove-disjunction", "delta-nullary-propcq"};
  return ids;
}

bool is_pass_id(const std::string& id) {
  const auto& ids = pass_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

PassResult apply_pass(const std::string& id, const ProgramPtr& p) {
  if (id == "make-query-atomic") return make_query_atomic(p);
  if (id == "add-complements") return add_complements(p);
  if (id == "prop-to-propcqneg") return prop_to_propcqneg(p);
  if (id == "remove-disjunction-ucqneg") return remove_disjunction_ucqneg(p);
  if (id == "remove-disjunction-ucq") return remove_disjunction_ucq(p);
  if (id == "remove-disjunction-fo") return remove_disjunction_fo(p);
  if (id == "nullary-propcq") return nullary_propcq(p);
  if (id == "switch-quantifiers") return switch_quantifiers(p);
  if (id == "qf-to-ucq") return qf_to_ucq(p);
  if (id == "abs-to-delta") return abs_to_delta(p);
  if (id == "delta-to-abs") return delta_to_abs(p);
  if (id == "delta-remove-negation") return delta_remove_negation(p);
  if (id == "qfo-to-delta-qfo") return qfo_to_delta_qfo(p);
  if (id == "delta-ucqneg-to-ucqneg") return delta_ucqneg_to_ucqneg(p);
  if (id == "delta-remove-disjunction") return delta_remove_disjunction(p);
  if (id == "delta-nullary-propcq") return delta_nullary_propcq(p);
  throw Error("unknown pass '" + id + "'");
}

NullaryFamily nullary_family(int k, Dialect dialect) {
  NullaryFamily fam;
  DynamicProgram prog = nullary_family_program(k, dialect, fam.query_names);
  prog.validate();
  fam.program = std::make_shared<DynamicProgram>(std::move(prog));
  return fam;
}

std::string pass_report_json(const PassReport& rep) {
  nlohmann::json j;
  j["pass"] = rep.pass;
  j["all_ok"] = rep.all_ok();
  nlohmann::json sm = nlohmann::json::object();
  for (const auto& [from, to] : rep.symbol_map) sm[from] = to;
  j["symbol_map"] = sm;
  nlohmann::json fn = nlohmann::json::array();
  for (const auto& [role, name] : rep.fresh_names)
    fn.push_back(nlohmann::json{{"role", role}, {"name", name}});
  j["fresh_names"] = fn;
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : rep.certificates)
    certs.push_back(nlohmann::json{{"aux", c.aux},
                                   {"trigger", c.trigger},
                                   {"where", c.where},
                                   {"check", c.check},
                                   {"ok", c.ok}});
  j["certificates"] = certs;
  return j.dump(2);
}

}  // namespace dyncq
