#include "dyncq/static_bridge.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dyncq/engine.hpp"
#include "dyncq/errors.hpp"
#include "dyncq/normal_forms.hpp"

namespace dyncq {

namespace {

constexpr std::size_t kFormulaLimit = 1'000'000;

std::set<std::string> set_union(std::set<std::string> a, const std::set<std::string>& b) {
  a.insert(b.begin(), b.end());
  return a;
}

// Renames every binder to a fresh name so that later substitutions cannot be
// captured. `fn` must have all names to stay clear of already reserved.
FormulaPtr freshen_binders(const FormulaPtr& f, FreshNames& fn) {
  std::map<std::string, std::string> sub;
  std::function<FormulaPtr(const FormulaPtr&)> go = [&](const FormulaPtr& cur) -> FormulaPtr {
    switch (cur->kind) {
      case Formula::Kind::True:
      case Formula::Kind::False:
        return cur;
      case Formula::Kind::Rel: {
        std::vector<TermPtr> args;
        for (const auto& t : cur->terms) args.push_back(rename_free_vars(t, sub));
        return Formula::rel(cur->sym, std::move(args));
      }
      case Formula::Kind::Eq:
        return Formula::eq(rename_free_vars(cur->terms[0], sub),
                           rename_free_vars(cur->terms[1], sub));
      case Formula::Kind::Not:
        return Formula::negation(go(cur->kids[0]));
      case Formula::Kind::And:
      case Formula::Kind::Or: {
        std::vector<FormulaPtr> kids;
        for (const auto& k : cur->kids) kids.push_back(go(k));
        return cur->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                               : Formula::disj(std::move(kids));
      }
      case Formula::Kind::Exists:
      case Formula::Kind::Forall: {
        std::string nv = fn.fresh(cur->sym);
        auto it = sub.find(cur->sym);
        std::string saved;
        bool had = it != sub.end();
        if (had) saved = it->second;
        sub[cur->sym] = nv;
        FormulaPtr kid = go(cur->kids[0]);
        if (had)
          sub[cur->sym] = saved;
        else
          sub.erase(cur->sym);
        return cur->kind == Formula::Kind::Exists ? Formula::exists(nv, std::move(kid))
                                                  : Formula::forall(nv, std::move(kid));
      }
    }
    throw EvalError("unhandled formula kind");
  };
  return go(f);
}

void check_input_atoms(const FormulaPtr& f, const Schema& schema, const std::string& where) {
  std::function<void(const FormulaPtr&)> go = [&](const FormulaPtr& cur) {
    if (cur->kind == Formula::Kind::Rel) {
      auto ar = schema.input_arity(cur->sym);
      if (!ar)
        throw SchemaError(where + " mentions '" + cur->sym + "', which is not an input relation");
      if (static_cast<int>(cur->terms.size()) != *ar)
        throw SchemaError(where + " uses '" + cur->sym + "' with " +
                          std::to_string(cur->terms.size()) + " arguments, expected " +
                          std::to_string(*ar));
    }
    for (const auto& k : cur->kids) go(k);
  };
  go(f);
}

FormulaPtr args_match(const std::vector<TermPtr>& args, const std::vector<std::string>& us) {
  std::vector<FormulaPtr> eqs;
  for (std::size_t c = 0; c < us.size(); ++c) eqs.push_back(Formula::eq(args[c], tvar(us[c])));
  return eqs.empty() ? Formula::truth() : Formula::conj(std::move(eqs));
}

// Core rewrite: step t stands for pattern[t] with parameters step_vars[t].
// Later steps are handled first, so the oldest step ends up innermost.
FormulaPtr weave(const FormulaPtr& phi, const ModPattern& pattern,
                 const std::vector<std::vector<std::string>>& step_vars) {
  FormulaPtr cur = phi;
  for (std::size_t i = pattern.size(); i-- > 0;) {
    const ModStep& st = pattern[i];
    const std::vector<std::string>& us = step_vars[i];
    cur = rewrite_atoms(cur, [&](const std::string& sym,
                                 const std::vector<TermPtr>& args) -> FormulaPtr {
      if (sym != st.rel) return nullptr;
      FormulaPtr same = args_match(args, us);
      FormulaPtr atom = Formula::rel(sym, args);
      if (st.kind == ModKind::Ins) return Formula::disj({std::move(atom), std::move(same)});
      return Formula::conj({std::move(atom), Formula::negation(std::move(same))});
    });
  }
  return cur;
}

void check_pattern(const ModPattern& pattern, const Schema& schema) {
  for (const auto& st : pattern)
    if (!schema.is_input(st.rel))
      throw SchemaError("modification pattern touches '" + st.rel +
                        "', which is not an input relation");
}

}  // namespace

FormulaPtr modification_formula(const FormulaPtr& phi, const ModPattern& pattern,
                                const std::vector<std::vector<std::string>>& step_vars,
                                const Schema& schema) {
  if (contains_function_terms(phi))
    throw SchemaError("modification formula requires a function-free formula");
  check_input_atoms(phi, schema, "modification formula");
  check_pattern(pattern, schema);
  if (step_vars.size() != pattern.size())
    throw SchemaError("modification formula: " + std::to_string(pattern.size()) +
                      " pattern steps but " + std::to_string(step_vars.size()) +
                      " parameter tuples");
  std::set<std::string> taken = all_var_names(phi);
  for (std::size_t t = 0; t < pattern.size(); ++t) {
    int ar = *schema.input_arity(pattern[t].rel);
    if (static_cast<int>(step_vars[t].size()) != ar)
      throw SchemaError("modification formula: step " + std::to_string(t + 1) + " needs " +
                        std::to_string(ar) + " parameters");
    for (const auto& v : step_vars[t])
      if (!taken.insert(v).second)
        throw SchemaError("modification formula: parameter '" + v +
                          "' collides with another variable");
  }
  return weave(phi, pattern, step_vars);
}

ModFormula modification_formula(const FormulaPtr& phi, const ModPattern& pattern,
                                const Schema& schema) {
  std::set<std::string> taken = all_var_names(phi);
  auto pick = [&taken](const std::string& base) {
    std::string cand = base;
    for (int k = 0; !taken.insert(cand).second; ++k) cand = base + "$" + std::to_string(k);
    return cand;
  };
  check_pattern(pattern, schema);
  std::vector<std::vector<std::string>> step_vars;
  for (std::size_t t = 0; t < pattern.size(); ++t) {
    int ar = *schema.input_arity(pattern[t].rel);
    std::vector<std::string> us;
    for (int c = 0; c < ar; ++c) {
      std::string base = "u" + std::to_string(t + 1);
      if (ar > 1) base += "_" + std::to_string(c + 1);
      us.push_back(pick(base));
    }
    step_vars.push_back(std::move(us));
  }
  FormulaPtr f = modification_formula(phi, pattern, step_vars, schema);
  return ModFormula{std::move(f), std::move(step_vars)};
}

ProgramPtr fo_to_dynamic(const FormulaPtr& phi, const std::vector<SymbolDecl>& inputs) {
  if (contains_function_terms(phi))
    throw SchemaError("fo-to-dynamic requires a function-free formula");
  if (inputs.empty()) throw SchemaError("fo-to-dynamic requires at least one input relation");
  Schema in_schema;
  in_schema.input_relations = inputs;
  in_schema.validate();
  check_input_atoms(phi, in_schema, "fo-to-dynamic");

  EpfResult epf = to_existential_prefix_form(phi);

  // Peel the prefix one symbol at a time; psis[l] is the formula below the
  // first l prefix symbols, so psis.back() is quantifier-free.
  struct Peel {
    bool is_exists;
    std::string var;
  };
  std::vector<Peel> peels;
  std::vector<FormulaPtr> psis{epf.formula};
  for (int l = 0; l < epf.prefix_length; ++l) {
    const FormulaPtr& cur = psis.back();
    if (cur->kind == Formula::Kind::Exists) {
      peels.push_back({true, cur->sym});
      psis.push_back(cur->kids[0]);
    } else if (cur->kind == Formula::Kind::Not) {
      peels.push_back({false, ""});
      psis.push_back(cur->kids[0]);
    } else {
      throw EvalError("fo-to-dynamic: malformed existential prefix");
    }
  }
  const int levels = epf.prefix_length;

  std::vector<std::vector<std::string>> frees;
  for (const auto& f : psis) {
    auto s = free_vars(f);
    frees.emplace_back(s.begin(), s.end());
  }

  // Generated parameter and step-column names must stay clear of every
  // formula variable; growing the prefix makes them prefix-free.
  std::set<std::string> avoid = set_union(all_var_names(phi), all_var_names(epf.formula));
  auto pick_prefix = [&avoid](std::string base) {
    for (;;) {
      bool clash = false;
      for (const auto& v : avoid)
        if (v.compare(0, base.size(), base) == 0) {
          clash = true;
          break;
        }
      if (!clash) return base;
      base += base[0];
    }
  };
  const std::string vpre = pick_prefix("v");
  const std::string upre = pick_prefix("u");

  auto step_cols = [&](const ModPattern& pat) {
    std::vector<std::vector<std::string>> groups;
    for (std::size_t t = 0; t < pat.size(); ++t) {
      int ar = *in_schema.input_arity(pat[t].rel);
      std::vector<std::string> g;
      for (int c = 0; c < ar; ++c)
        g.push_back(vpre + std::to_string(t + 1) + "_" + std::to_string(c + 1));
      groups.push_back(std::move(g));
    }
    return groups;
  };
  auto flatten = [](const std::vector<std::vector<std::string>>& groups) {
    std::vector<std::string> out;
    for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
    return out;
  };
  auto params_for = [&](const std::string& rel) {
    int ar = *in_schema.input_arity(rel);
    std::vector<std::string> us;
    for (int c = 0; c < ar; ++c) us.push_back(upre + std::to_string(c + 1));
    return us;
  };

  const bool multi = inputs.size() > 1;
  auto rel_name = [&](const ModPattern& pat) {
    std::string s = "__fo_R" + std::to_string(pat.size());
    for (const auto& st : pat) {
      s += st.kind == ModKind::Ins ? "_ins" : "_del";
      if (multi) s += "_" + st.rel;
    }
    return s;
  };

  std::vector<ModStep> triggers;
  for (ModKind kind : {ModKind::Ins, ModKind::Del})
    for (const auto& d : inputs) triggers.push_back({kind, d.name});

  std::vector<std::vector<ModPattern>> pats(levels + 1);
  pats[0].push_back({});
  for (int l = 1; l <= levels; ++l)
    for (const auto& base : pats[l - 1])
      for (const auto& st : triggers) {
        ModPattern p = base;
        p.push_back(st);
        pats[l].push_back(std::move(p));
      }

  DynamicProgram prog;
  prog.dialect = Dialect::Absolute;
  prog.schema.input_relations = inputs;

  std::set<std::string> minted;
  for (int l = levels; l >= 0; --l) {
    for (const ModPattern& pat : pats[l]) {
      std::string name = rel_name(pat);
      if (!minted.insert(name).second)
        throw SchemaError("fo-to-dynamic: input relation names produce colliding symbols");
      auto groups = step_cols(pat);
      std::vector<std::string> cols = frees[l];
      auto vflat = flatten(groups);
      cols.insert(cols.end(), vflat.begin(), vflat.end());
      prog.schema.aux_relations.push_back({name, static_cast<int>(cols.size())});
      prog.inits[name] =
          InitSpec::from_formula(cols, weave(psis[l], pat, groups));
      for (const ModStep& trig : triggers) {
        std::vector<std::string> us = params_for(trig.rel);
        ModPattern child_pat;
        child_pat.push_back(trig);
        child_pat.insert(child_pat.end(), pat.begin(), pat.end());
        FormulaPtr body;
        if (l == levels) {
          std::vector<std::vector<std::string>> child_groups;
          child_groups.push_back(us);
          child_groups.insert(child_groups.end(), groups.begin(), groups.end());
          body = weave(psis[l], child_pat, child_groups);
        } else {
          std::vector<std::string> args = frees[l + 1];
          args.insert(args.end(), us.begin(), us.end());
          args.insert(args.end(), vflat.begin(), vflat.end());
          body = rel_of_vars(rel_name(child_pat), args);
          if (!peels[l].is_exists) {
            body = Formula::negation(std::move(body));
          } else if (std::find(frees[l + 1].begin(), frees[l + 1].end(), peels[l].var) !=
                     frees[l + 1].end()) {
            body = Formula::exists(peels[l].var, std::move(body));
          }
        }
        prog.rules[{name, trig.kind, trig.rel}] = Rule{us, cols, std::move(body)};
      }
    }
  }
  prog.query_symbol = rel_name({});
  prog.validate();
  return std::make_shared<const DynamicProgram>(std::move(prog));
}

namespace {

// Shared state for folding a non-recursive program into one formula.
struct Folder {
  const DynamicProgram& p;
  std::map<std::string, FormulaPtr> memo;
  std::size_t budget = 0;

  explicit Folder(const DynamicProgram& prog) : p(prog) {}

  static std::vector<std::string> y_slots(int k) {
    std::vector<std::string> ys;
    for (int i = 0; i < k; ++i) ys.push_back("y" + std::to_string(i + 1));
    return ys;
  }

  std::vector<std::string> x_slot(std::size_t t, const std::string& rel) const {
    int ar = *p.schema.input_arity(rel);
    std::vector<std::string> xs;
    for (int c = 0; c < ar; ++c)
      xs.push_back("x" + std::to_string(t) + "_" + std::to_string(c + 1));
    return xs;
  }

  void charge(const FormulaPtr& f) {
    budget += dag_node_count(f);
    if (budget > kFormulaLimit)
      throw LimitError("dynamic-to-fo: compiled formula exceeds the size limit");
  }

  FormulaPtr fold(const std::string& aux, const ModPattern& pattern) {
    std::string key = aux;
    for (const auto& st : pattern) {
      key += st.kind == ModKind::Ins ? "|i:" : "|d:";
      key += st.rel;
    }
    auto hit = memo.find(key);
    if (hit != memo.end()) return hit->second;

    std::vector<std::string> ys = y_slots(*p.schema.aux_arity(aux));
    std::set<std::string> slot_names(ys.begin(), ys.end());
    for (std::size_t t = 1; t <= pattern.size(); ++t)
      for (const auto& v : x_slot(t, pattern[t - 1].rel)) slot_names.insert(v);

    FormulaPtr out;
    if (pattern.empty()) {
      InitSpecPtr spec = p.init_for(aux);
      if (spec->kind == InitSpec::Kind::Empty) {
        out = Formula::falsity();
      } else if (spec->kind == InitSpec::Kind::Full) {
        out = Formula::truth();
      } else {
        FreshNames fn(set_union(all_var_names(spec->formula),
                                set_union(slot_names, {spec->vars.begin(), spec->vars.end()})));
        FormulaPtr f = freshen_binders(spec->formula, fn);
        std::map<std::string, std::string> sub;
        for (std::size_t i = 0; i < ys.size(); ++i)
          if (spec->vars[i] != ys[i]) sub[spec->vars[i]] = ys[i];
        out = rename_free_vars(f, sub);
      }
    } else {
      const ModStep& last = pattern.back();
      ModPattern prefix(pattern.begin(), pattern.end() - 1);
      const Rule& r = p.rule(aux, last.kind, last.rel);
      std::vector<std::string> xj = x_slot(pattern.size(), last.rel);

      std::set<std::string> reserve =
          set_union(all_var_names(r.formula),
                    set_union(slot_names, {r.params.begin(), r.params.end()}));
      reserve.insert(r.targets.begin(), r.targets.end());
      FreshNames fn(std::move(reserve));
      FormulaPtr body = freshen_binders(r.formula, fn);
      std::map<std::string, std::string> sub;
      for (std::size_t i = 0; i < ys.size(); ++i)
        if (r.targets[i] != ys[i]) sub[r.targets[i]] = ys[i];
      for (std::size_t c = 0; c < xj.size(); ++c)
        if (r.params[c] != xj[c]) sub[r.params[c]] = xj[c];
      body = rename_free_vars(body, sub);

      std::vector<std::vector<std::string>> prefix_vars;
      for (std::size_t t = 1; t <= prefix.size(); ++t)
        prefix_vars.push_back(x_slot(t, prefix[t - 1].rel));

      out = rewrite_atoms(body, [&](const std::string& sym,
                                    const std::vector<TermPtr>& args) -> FormulaPtr {
        if (p.schema.is_input(sym)) {
          if (prefix.empty()) return nullptr;
          return weave(Formula::rel(sym, args), prefix, prefix_vars);
        }
        FormulaPtr inner = fold(sym, prefix);
        std::set<std::string> arg_names;
        for (const auto& a : args) arg_names.insert(a->name);
        FreshNames fn2(set_union(all_var_names(inner), arg_names));
        inner = freshen_binders(inner, fn2);
        std::map<std::string, std::string> ysub;
        std::vector<std::string> inner_ys = y_slots(static_cast<int>(args.size()));
        for (std::size_t i = 0; i < args.size(); ++i)
          if (inner_ys[i] != args[i]->name) ysub[inner_ys[i]] = args[i]->name;
        return rename_free_vars(inner, ysub);
      });
    }
    charge(out);
    memo[key] = out;
    return out;
  }
};

}  // namespace

FormulaPtr dynamic_to_fo(const DynamicProgram& p) {
  if (p.dialect != Dialect::Absolute)
    throw GuardError("dynamic-to-fo: program must use the absolute dialect");
  if (p.schema.input_relations.empty())
    throw GuardError("dynamic-to-fo: program has no input relations");
  TopoResult topo = topo_order(p);
  if (!topo.non_recursive) {
    std::string cyc;
    for (const auto& s : topo.cycle) {
      if (!cyc.empty()) cyc += " -> ";
      cyc += s;
    }
    throw GuardError("dynamic-to-fo: program is recursive (" + cyc + ")");
  }
  for (const auto& d : p.schema.aux_relations) {
    InitSpecPtr spec = p.init_for(d.name);
    switch (spec->kind) {
      case InitSpec::Kind::Empty:
      case InitSpec::Kind::Full:
        break;
      case InitSpec::Kind::Formula:
        for (const auto& sym : relation_symbols(spec->formula))
          if (!p.schema.is_input(sym))
            throw GuardError("dynamic-to-fo: initialization of " + d.name +
                             " reads auxiliary relation '" + sym + "'");
        break;
      default:
        throw GuardError("dynamic-to-fo: initialization of " + d.name +
                         " is not a formula initialization");
    }
  }

  int m = 0;
  for (std::size_t i = 0; i < topo.order.size(); ++i)
    if (topo.order[i] == p.query_symbol) m = static_cast<int>(i) + 1;

  Folder folder(p);
  // One guess branch per input relation: a tuple that is deleted and
  // reinserted (or the other way around) m times leaves the structure
  // unchanged, and after 2m >= m steps initialization data has been
  // substituted away.
  std::vector<FormulaPtr> branches;
  for (const SymbolDecl& guess : p.schema.input_relations) {
    std::vector<std::string> gs;
    for (int c = 0; c < guess.arity; ++c) gs.push_back("x" + std::to_string(c + 1));

    auto bind_steps = [&](ModKind first) {
      ModPattern pat;
      for (int i = 0; i < m; ++i) {
        pat.push_back({first, guess.name});
        pat.push_back({first == ModKind::Del ? ModKind::Ins : ModKind::Del, guess.name});
      }
      FormulaPtr f = folder.fold(p.query_symbol, pat);
      std::set<std::string> reserve = all_var_names(f);
      reserve.insert(gs.begin(), gs.end());
      FreshNames fn(std::move(reserve));
      f = freshen_binders(f, fn);
      std::map<std::string, std::string> sub;
      for (int t = 1; t <= 2 * m; ++t)
        for (int c = 0; c < guess.arity; ++c)
          sub["x" + std::to_string(t) + "_" + std::to_string(c + 1)] = gs[c];
      return rename_free_vars(f, sub);
    };

    FormulaPtr present = bind_steps(ModKind::Del);
    FormulaPtr absent = bind_steps(ModKind::Ins);
    FormulaPtr satom = rel_of_vars(guess.name, gs);
    FormulaPtr br = Formula::disj({Formula::conj({satom, std::move(present)}),
                                   Formula::conj({Formula::negation(satom), std::move(absent)})});
    for (std::size_t c = gs.size(); c-- > 0;) br = Formula::exists(gs[c], std::move(br));
    branches.push_back(std::move(br));
  }
  FormulaPtr out = Formula::disj(std::move(branches));
  folder.charge(out);
  return out;
}

bool is_non_recursive(const DynamicProgram& p) { return topo_order(p).non_recursive; }

}  // namespace dyncq
