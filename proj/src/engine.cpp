#include "dyncq/engine.hpp"

#include <algorithm>

#include "dyncq/errors.hpp"
#include "dyncq/eval.hpp"

namespace dyncq {

std::string modification_to_string(const Modification& m) {
  std::string out = modkind_name(m.kind) + " " + m.relation;
  for (int v : m.tuple) out += " " + std::to_string(v);
  return out;
}

void apply_to_input_db(std::map<std::string, Relation>& db, const Modification& m) {
  auto it = db.find(m.relation);
  if (it == db.end()) throw EvalError("modification of undeclared input relation '" + m.relation + "'");
  if (m.kind == ModKind::Ins) {
    it->second.insert(m.tuple);
  } else {
    it->second.erase(m.tuple);
  }
}

namespace {

std::string tuple_to_string(const Tuple& t) {
  std::string out = "(";
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(t[i]);
  }
  return out + ")";
}

// Caches shared by the init specs of one initialize() call: base programs are
// initialized once, and one-step states are shared between squirreled
// relations that probe the same modification.
struct InitContext {
  std::map<std::string, State> base_states;
  std::map<std::string, State> step_states;  // key: base|kind|rel|tuple
};

const Relation& unique_binary_input(const DynamicProgram& p, const State& s, const std::string& proc) {
  const SymbolDecl* found = nullptr;
  for (const auto& decl : p.schema.input_relations) {
    if (decl.arity == 2) {
      if (found) {
        throw EvalError("init procedure '" + proc + "' needs a unique binary input relation");
      }
      found = &decl;
    }
  }
  if (!found) throw EvalError("init procedure '" + proc + "' needs a binary input relation");
  return s.input_db.at(found->name);
}

Relation transitive_closure(const Relation& edges, int n, bool reflexive) {
  std::vector<std::vector<bool>> reach(static_cast<size_t>(n), std::vector<bool>(static_cast<size_t>(n), false));
  for (const auto& e : edges) reach[static_cast<size_t>(e[0])][static_cast<size_t>(e[1])] = true;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (!reach[static_cast<size_t>(i)][static_cast<size_t>(k)]) continue;
      for (int j = 0; j < n; ++j) {
        if (reach[static_cast<size_t>(k)][static_cast<size_t>(j)]) {
          reach[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
        }
      }
    }
  }
  Relation out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (reach[static_cast<size_t>(i)][static_cast<size_t>(j)] || (reflexive && i == j)) {
        out.insert({i, j});
      }
    }
  }
  return out;
}

Relation max_outdegree_set(const Relation& edges, int n) {
  std::vector<int> deg(static_cast<size_t>(n), 0);
  for (const auto& e : edges) ++deg[static_cast<size_t>(e[0])];
  int best = 0;
  for (int d : deg) best = std::max(best, d);
  Relation out;
  for (int a = 0; a < n; ++a) {
    if (deg[static_cast<size_t>(a)] == best) out.insert({a});
  }
  return out;
}

Relation run_init_proc(const DynamicProgram& p, const State& s, const std::string& proc) {
  if (proc == "identity") {
    Relation out;
    for (int a = 0; a < s.n; ++a) out.insert({a, a});
    return out;
  }
  if (proc == "inequality") {
    Relation out;
    for (int a = 0; a < s.n; ++a) {
      for (int b = 0; b < s.n; ++b) {
        if (a != b) out.insert({a, b});
      }
    }
    return out;
  }
  if (proc == "singleton-zero") return Relation{{0}};
  if (proc == "reflexive-tc") return transitive_closure(unique_binary_input(p, s, proc), s.n, true);
  if (proc == "tc") return transitive_closure(unique_binary_input(p, s, proc), s.n, false);
  if (proc == "max-outdegree-set") return max_outdegree_set(unique_binary_input(p, s, proc), s.n);
  throw EvalError("unknown init procedure '" + proc + "'");
}

FnTable run_fn_init_proc(const DynamicProgram& p, const State& s, const std::string& proc, int arity) {
  FnTable out;
  auto sat = [&](int v) { return std::min(std::max(v, 0), s.n - 1); };
  if (proc == "zero") {
    for (const auto& t : all_tuples(s.n, arity)) out[t] = 0;
    return out;
  }
  if (proc == "one-sat") {
    out[{}] = sat(1);
    return out;
  }
  if (proc == "succ-sat") {
    for (int a = 0; a < s.n; ++a) out[{a}] = sat(a + 1);
    return out;
  }
  if (proc == "pred-sat") {
    for (int a = 0; a < s.n; ++a) out[{a}] = sat(a - 1);
    return out;
  }
  if (proc == "outdegree" || proc == "outdegree-histogram" || proc == "max-outdegree-value") {
    const Relation& edges = unique_binary_input(p, s, proc);
    std::vector<int> deg(static_cast<size_t>(s.n), 0);
    for (const auto& e : edges) ++deg[static_cast<size_t>(e[0])];
    if (proc == "outdegree") {
      for (int a = 0; a < s.n; ++a) out[{a}] = sat(deg[static_cast<size_t>(a)]);
      return out;
    }
    if (proc == "outdegree-histogram") {
      std::vector<int> hist(static_cast<size_t>(s.n), 0);
      for (int a = 0; a < s.n; ++a) ++hist[static_cast<size_t>(sat(deg[static_cast<size_t>(a)]))];
      for (int d = 0; d < s.n; ++d) out[{d}] = sat(hist[static_cast<size_t>(d)]);
      return out;
    }
    int best = 0;
    for (int d : deg) best = std::max(best, d);
    out[{}] = sat(best);
    return out;
  }
  throw EvalError("unknown function init procedure '" + proc + "'");
}

State initialize_inner(const DynamicProgram& p, const std::map<std::string, Relation>& input_db, int n);

Relation eval_init_spec(const DynamicProgram& p, const InitSpecPtr& spec, const State& partial,
                        int arity, InitContext& ctx) {
  switch (spec->kind) {
    case InitSpec::Kind::Empty:
      return {};
    case InitSpec::Kind::Full:
      return full_relation(partial.n, arity);
    case InitSpec::Kind::Formula:
    case InitSpec::Kind::EvalOnInit:
      return eval_to_relation(partial, spec->formula, spec->vars);
    case InitSpec::Kind::ComplementOf:
      return complement_relation(eval_init_spec(p, spec->inner, partial, arity, ctx), partial.n, arity);
    case InitSpec::Kind::Proc:
      return run_init_proc(p, partial, spec->proc);
    case InitSpec::Kind::OneStep: {
      ProgramPtr base = p.find_base(spec->base);
      auto bit = ctx.base_states.find(spec->base);
      if (bit == ctx.base_states.end()) {
        bit = ctx.base_states.emplace(spec->base, initialize_inner(*base, partial.input_db, partial.n)).first;
      }
      const State& s0 = bit->second;
      int rel_arity = *base->schema.input_arity(spec->rel);
      Relation out;
      for (const auto& params : all_tuples(partial.n, rel_arity)) {
        std::string key = spec->base + "|" + modkind_name(spec->mod_kind) + "|" + spec->rel + "|" +
                          tuple_to_string(params);
        auto sit = ctx.step_states.find(key);
        if (sit == ctx.step_states.end()) {
          Modification m{spec->mod_kind, spec->rel, params};
          sit = ctx.step_states.emplace(key, apply_modification(*base, s0, m)).first;
        }
        for (const auto& t : sit->second.aux_db.at(spec->symbol)) {
          Tuple row = params;
          row.insert(row.end(), t.begin(), t.end());
          out.insert(std::move(row));
        }
      }
      return out;
    }
    case InitSpec::Kind::Tagged: {
      Relation inner = eval_init_spec(p, spec->inner, partial, arity - 1, ctx);
      Relation out;
      for (const auto& t : inner) {
        Tuple row{0};
        row.insert(row.end(), t.begin(), t.end());
        out.insert(std::move(row));
      }
      if (spec->padded) {
        for (int d = 1; d < partial.n; ++d) {
          for (const auto& t : all_tuples(partial.n, arity - 1)) {
            Tuple row{d};
            row.insert(row.end(), t.begin(), t.end());
            out.insert(std::move(row));
          }
        }
      }
      return out;
    }
    case InitSpec::Kind::SizeDispatch:
      return eval_init_spec(p, partial.n == 1 ? spec->inner : spec->inner2, partial, arity, ctx);
    case InitSpec::Kind::FnGraph: {
      Relation out;
      for (const auto& [args, val] : run_fn_init_proc(p, partial, spec->proc, arity - 1)) {
        Tuple row = args;
        row.push_back(val);
        out.insert(std::move(row));
      }
      return out;
    }
    case InitSpec::Kind::NonEmptyOf: {
      Relation inner = eval_init_spec(p, spec->inner, partial, spec->inner_arity, ctx);
      Relation out;
      if (!inner.empty()) out.insert(Tuple{});
      return out;
    }
  }
  throw EvalError("unreachable init spec kind");
}

State initialize_inner(const DynamicProgram& p, const std::map<std::string, Relation>& input_db, int n) {
  State st;
  st.n = n;
  st.input_db = input_db;
  InitContext ctx;
  for (const auto& decl : p.schema.aux_relations) {
    st.aux_db[decl.name] = eval_init_spec(p, p.init_for(decl.name), st, decl.arity, ctx);
  }
  for (const auto& decl : p.schema.aux_functions) {
    st.aux_fns[decl.name] = run_fn_init_proc(p, st, p.fn_init_for(decl.name).proc, decl.arity);
  }
  return st;
}

Assignment bind_params(const std::vector<std::string>& params, const Tuple& tuple) {
  Assignment env;
  for (size_t i = 0; i < params.size(); ++i) env[params[i]] = tuple[i];
  return env;
}

}  // namespace

State initialize(const DynamicProgram& p, const std::map<std::string, Relation>& input_db, int n) {
  if (n <= 0) throw EvalError("domain size must be at least 1");
  check_input_db(input_db, p.schema, n);
  return initialize_inner(p, input_db, n);
}

State apply_modification(const DynamicProgram& p, const State& s, const Modification& m, bool strict) {
  auto rel_ar = p.schema.input_arity(m.relation);
  if (!rel_ar) throw EvalError("modification of undeclared input relation '" + m.relation + "'");
  check_tuple(m.tuple, s.n, *rel_ar, "modification of '" + m.relation + "'");

  State out;
  out.n = s.n;
  out.input_db = s.input_db;
  apply_to_input_db(out.input_db, m);

  for (const auto& decl : p.schema.aux_relations) {
    const Relation& pre = s.aux_db.at(decl.name);
    if (p.is_constant_symbol(decl.name)) {
      out.aux_db[decl.name] = pre;
      continue;
    }
    if (p.dialect == Dialect::Delta) {
      const DeltaRule& r = p.delta_rule(decl.name, m.kind, m.relation);
      Assignment env = bind_params(r.params, m.tuple);
      Relation adds = eval_to_relation(s, r.add, r.targets, env);
      Relation rems = eval_to_relation(s, r.remove, r.targets, env);
      if (strict) {
        for (const auto& t : adds) {
          if (rems.count(t)) {
            throw DisjointnessError("strict delta violation: " + decl.name + tuple_to_string(t) +
                                    " satisfies both the add and the remove formula under " +
                                    modification_to_string(m));
          }
        }
      }
      Relation next = pre;
      next.insert(adds.begin(), adds.end());
      for (const auto& t : rems) next.erase(t);
      out.aux_db[decl.name] = std::move(next);
    } else {
      const Rule& r = p.rule(decl.name, m.kind, m.relation);
      Assignment env = bind_params(r.params, m.tuple);
      if (p.dialect == Dialect::QF) {
        Relation next;
        Assignment a = env;
        for (const auto& t : all_tuples(s.n, decl.arity)) {
          for (size_t i = 0; i < r.targets.size(); ++i) a[r.targets[i]] = t[i];
          if (eval_formula(s, r.formula, a)) next.insert(t);
        }
        out.aux_db[decl.name] = std::move(next);
      } else {
        out.aux_db[decl.name] = eval_to_relation(s, r.formula, r.targets, env);
      }
    }
  }

  for (const auto& decl : p.schema.aux_functions) {
    if (p.is_constant_symbol(decl.name)) {
      out.aux_fns[decl.name] = s.aux_fns.at(decl.name);
      continue;
    }
    const FnRule& r = p.fn_rule(decl.name, m.kind, m.relation);
    Assignment a = bind_params(r.params, m.tuple);
    FnTable next;
    for (const auto& t : all_tuples(s.n, decl.arity)) {
      for (size_t i = 0; i < r.args.size(); ++i) a[r.args[i]] = t[i];
      next[t] = eval_term(s, r.term, a);
    }
    out.aux_fns[decl.name] = std::move(next);
  }
  return out;
}

RunResult run_program(const DynamicProgram& p, const std::map<std::string, Relation>& input_db,
                      int n, const ModificationScript& script, bool trace, bool strict) {
  RunResult r;
  r.state = initialize(p, input_db, n);
  for (const auto& m : script) {
    r.state = apply_modification(p, r.state, m, strict);
    if (trace) r.query_trace.push_back(r.state.aux_db.at(p.query_symbol));
  }
  return r;
}

std::map<std::string, std::set<std::string>> dependency_graph(const DynamicProgram& p) {
  std::map<std::string, std::set<std::string>> g;
  auto is_aux_symbol = [&](const std::string& s) { return p.schema.is_aux(s) || p.schema.is_fn(s); };
  auto add_from = [&](const std::string& node, const std::set<std::string>& rels,
                      const std::set<std::string>& fns) {
    for (const auto& s : rels) {
      if (is_aux_symbol(s)) g[node].insert(s);
    }
    for (const auto& s : fns) {
      if (is_aux_symbol(s)) g[node].insert(s);
    }
  };
  for (const auto& decl : p.schema.aux_relations) g[decl.name];
  for (const auto& decl : p.schema.aux_functions) g[decl.name];
  for (const auto& [key, r] : p.rules) add_from(key.aux, relation_symbols(r.formula), function_symbols(r.formula));
  for (const auto& [key, r] : p.delta_rules) {
    add_from(key.aux, relation_symbols(r.add), function_symbols(r.add));
    add_from(key.aux, relation_symbols(r.remove), function_symbols(r.remove));
  }
  for (const auto& [key, r] : p.fn_rules) add_from(key.aux, relation_symbols(r.term), function_symbols(r.term));
  return g;
}

TopoResult topo_order(const DynamicProgram& p) {
  auto g = dependency_graph(p);
  std::vector<std::string> decl_order;
  for (const auto& d : p.schema.aux_relations) decl_order.push_back(d.name);
  for (const auto& d : p.schema.aux_functions) decl_order.push_back(d.name);

  TopoResult res;
  std::set<std::string> done;
  while (done.size() < decl_order.size()) {
    std::string pick;
    bool pick_is_query = false;
    for (const auto& name : decl_order) {
      if (done.count(name)) continue;
      bool ready = true;
      for (const auto& dep : g[name]) {
        if (dep != name && !done.count(dep)) {
          ready = false;
          break;
        }
      }
      if (ready && g[name].count(name) == 0) {
        if (pick.empty() || (pick_is_query && name != p.query_symbol)) {
          pick = name;
          pick_is_query = name == p.query_symbol;
        }
        if (!pick_is_query) break;
      }
    }
    if (pick.empty()) {
      // Every remaining symbol depends on another remaining one: walk to a cycle.
      std::vector<std::string> path;
      std::set<std::string> on_path;
      std::string cur;
      for (const auto& name : decl_order) {
        if (!done.count(name)) {
          cur = name;
          break;
        }
      }
      while (!on_path.count(cur)) {
        path.push_back(cur);
        on_path.insert(cur);
        for (const auto& dep : g[cur]) {
          if (!done.count(dep)) {
            cur = dep;
            break;
          }
        }
      }
      auto start = std::find(path.begin(), path.end(), cur);
      res.cycle.assign(start, path.end());
      res.non_recursive = false;
      return res;
    }
    done.insert(pick);
    res.order.push_back(pick);
  }
  res.non_recursive = true;
  return res;
}

}  // namespace dyncq
