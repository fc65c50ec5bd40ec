#include "dyncq/eval.hpp"

#include <algorithm>
#include <utility>

#include "dyncq/errors.hpp"

namespace dyncq {

namespace {

constexpr size_t kRowLimit = 5'000'000;

[[noreturn]] void too_big() {
  throw LimitError("intermediate relation exceeds the evaluation size guard");
}

// ---------------------------------------------------------------------------
// Naive route.

int term_value(const State& s, const TermPtr& t, const Assignment& a);

bool formula_value(const State& s, const FormulaPtr& f, const Assignment& a) {
  switch (f->kind) {
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Rel: {
      const Relation* rel = s.find_relation(f->sym);
      if (!rel) throw EvalError("unknown relation symbol '" + f->sym + "'");
      Tuple args;
      args.reserve(f->terms.size());
      for (const auto& t : f->terms) args.push_back(term_value(s, t, a));
      return rel->count(args) != 0;
    }
    case Formula::Kind::Eq:
      return term_value(s, f->terms[0], a) == term_value(s, f->terms[1], a);
    case Formula::Kind::Not:
      return !formula_value(s, f->kids[0], a);
    case Formula::Kind::And:
      for (const auto& k : f->kids) {
        if (!formula_value(s, k, a)) return false;
      }
      return true;
    case Formula::Kind::Or:
      for (const auto& k : f->kids) {
        if (formula_value(s, k, a)) return true;
      }
      return false;
    case Formula::Kind::Exists: {
      Assignment a2 = a;
      for (int v = 0; v < s.n; ++v) {
        a2[f->sym] = v;
        if (formula_value(s, f->kids[0], a2)) return true;
      }
      return false;
    }
    case Formula::Kind::Forall: {
      Assignment a2 = a;
      for (int v = 0; v < s.n; ++v) {
        a2[f->sym] = v;
        if (!formula_value(s, f->kids[0], a2)) return false;
      }
      return true;
    }
  }
  throw EvalError("unreachable formula kind");
}

int term_value(const State& s, const TermPtr& t, const Assignment& a) {
  switch (t->kind) {
    case Term::Kind::Var: {
      auto it = a.find(t->name);
      if (it == a.end()) throw EvalError("unbound variable '" + t->name + "'");
      return it->second;
    }
    case Term::Kind::Fn: {
      const FnTable* fn = s.find_function(t->name);
      if (!fn) throw EvalError("unknown function symbol '" + t->name + "'");
      Tuple args;
      args.reserve(t->args.size());
      for (const auto& arg : t->args) args.push_back(term_value(s, arg, a));
      auto it = fn->find(args);
      if (it == fn->end()) throw EvalError("function '" + t->name + "' has no value for an argument tuple");
      return it->second;
    }
    case Term::Kind::Ite:
      return formula_value(s, t->cond, a) ? term_value(s, t->then_branch, a)
                                          : term_value(s, t->else_branch, a);
  }
  throw EvalError("unreachable term kind");
}

// ---------------------------------------------------------------------------
// Table route.

struct Table {
  std::vector<std::string> vars;  // sorted, distinct
  std::set<Tuple> rows;
};

int index_of(const std::vector<std::string>& vars, const std::string& name) {
  for (size_t i = 0; i < vars.size(); ++i) {
    if (vars[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> union_vars(const std::vector<std::string>& a,
                                    const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Table true_table() { return Table{{}, {Tuple{}}}; }

// Extends a table with unconstrained columns ranging over the whole domain.
Table pad(const Table& t, const std::vector<std::string>& to_vars, int n) {
  if (t.vars == to_vars) return t;
  std::vector<std::string> missing;
  std::set_difference(to_vars.begin(), to_vars.end(), t.vars.begin(), t.vars.end(),
                      std::back_inserter(missing));
  size_t factor = 1;
  for (size_t i = 0; i < missing.size(); ++i) {
    factor *= static_cast<size_t>(n);
    if (factor > kRowLimit) too_big();
  }
  if (t.rows.size() > kRowLimit / std::max<size_t>(factor, 1)) too_big();

  std::vector<int> src(to_vars.size());  // >=0: column of t, -1-k: missing column k
  {
    int k = 0;
    for (size_t i = 0; i < to_vars.size(); ++i) {
      int idx = index_of(t.vars, to_vars[i]);
      src[i] = idx >= 0 ? idx : -1 - k++;
    }
  }
  Table out;
  out.vars = to_vars;
  auto fills = all_tuples(n, static_cast<int>(missing.size()));
  for (const auto& row : t.rows) {
    for (const auto& fill : fills) {
      Tuple merged(to_vars.size());
      for (size_t i = 0; i < to_vars.size(); ++i) {
        merged[i] = src[i] >= 0 ? row[static_cast<size_t>(src[i])]
                                : fill[static_cast<size_t>(-1 - src[i])];
      }
      out.rows.insert(std::move(merged));
    }
  }
  return out;
}

Table join(const Table& a, const Table& b) {
  std::vector<std::string> shared;
  std::set_intersection(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                        std::back_inserter(shared));
  Table out;
  out.vars = union_vars(a.vars, b.vars);

  std::vector<int> a_shared, b_shared;
  for (const auto& v : shared) {
    a_shared.push_back(index_of(a.vars, v));
    b_shared.push_back(index_of(b.vars, v));
  }
  // Output columns come from a when present, otherwise from b.
  std::vector<std::pair<bool, int>> src;
  for (const auto& v : out.vars) {
    int ia = index_of(a.vars, v);
    src.emplace_back(ia >= 0, ia >= 0 ? ia : index_of(b.vars, v));
  }

  std::map<Tuple, std::vector<const Tuple*>> index;
  for (const auto& row : b.rows) {
    Tuple key;
    key.reserve(b_shared.size());
    for (int i : b_shared) key.push_back(row[static_cast<size_t>(i)]);
    index[std::move(key)].push_back(&row);
  }
  for (const auto& row : a.rows) {
    Tuple key;
    key.reserve(a_shared.size());
    for (int i : a_shared) key.push_back(row[static_cast<size_t>(i)]);
    auto it = index.find(key);
    if (it == index.end()) continue;
    for (const Tuple* brow : it->second) {
      Tuple merged(out.vars.size());
      for (size_t i = 0; i < out.vars.size(); ++i) {
        merged[i] = src[i].first ? row[static_cast<size_t>(src[i].second)]
                                 : (*brow)[static_cast<size_t>(src[i].second)];
      }
      out.rows.insert(std::move(merged));
      if (out.rows.size() > kRowLimit) too_big();
    }
  }
  return out;
}

// Joins all conjunct tables, smallest first, preferring joins that share a
// variable with the accumulated result over cross products.
Table conj_all(std::vector<Table> kids) {
  size_t first = 0;
  for (size_t i = 1; i < kids.size(); ++i) {
    if (kids[i].rows.size() < kids[first].rows.size()) first = i;
  }
  Table acc = std::move(kids[first]);
  kids.erase(kids.begin() + static_cast<long>(first));
  while (!kids.empty()) {
    size_t best = kids.size();
    bool best_shared = false;
    for (size_t i = 0; i < kids.size(); ++i) {
      bool shared = false;
      for (const auto& v : kids[i].vars) {
        if (index_of(acc.vars, v) >= 0) {
          shared = true;
          break;
        }
      }
      if (best == kids.size() || shared > best_shared ||
          (shared == best_shared && kids[i].rows.size() < kids[best].rows.size())) {
        best = i;
        best_shared = shared;
      }
    }
    acc = join(acc, kids[best]);
    kids.erase(kids.begin() + static_cast<long>(best));
  }
  return acc;
}

class TableEval {
 public:
  TableEval(const State& s, const Assignment& env) : s_(s), env_(env) {}

  const Table& eval(const FormulaPtr& f) {
    auto it = memo_.find(f.get());
    if (it != memo_.end()) return it->second;
    Table t = compute(f);
    return memo_.emplace(f.get(), std::move(t)).first->second;
  }

 private:
  int bound_value(const TermPtr& t) const {  // -1 when the term is an unbound variable
    if (t->kind != Term::Kind::Var) {
      throw EvalError("function terms require the per-tuple evaluator");
    }
    auto it = env_.find(t->name);
    return it == env_.end() ? -1 : it->second;
  }

  Table compute(const FormulaPtr& f) {
    switch (f->kind) {
      case Formula::Kind::True:
        return true_table();
      case Formula::Kind::False:
        return Table{{}, {}};
      case Formula::Kind::Rel: {
        const Relation* rel = s_.find_relation(f->sym);
        if (!rel) throw EvalError("unknown relation symbol '" + f->sym + "'");
        std::vector<std::string> vars;
        for (const auto& t : f->terms) {
          if (bound_value(t) < 0) vars.push_back(t->name);
        }
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        Table out;
        out.vars = vars;
        for (const auto& tuple : *rel) {
          Tuple row(vars.size(), -1);
          bool ok = true;
          for (size_t i = 0; i < f->terms.size() && ok; ++i) {
            int want = bound_value(f->terms[i]);
            int got = tuple[i];
            if (want >= 0) {
              ok = want == got;
            } else {
              auto& slot = row[static_cast<size_t>(index_of(vars, f->terms[i]->name))];
              if (slot < 0) {
                slot = got;
              } else {
                ok = slot == got;
              }
            }
          }
          if (ok) out.rows.insert(std::move(row));
        }
        return out;
      }
      case Formula::Kind::Eq: {
        int lv = bound_value(f->terms[0]);
        int rv = bound_value(f->terms[1]);
        if (lv >= 0 && rv >= 0) return lv == rv ? true_table() : Table{{}, {}};
        Table out;
        if (lv < 0 && rv < 0) {
          const std::string& ln = f->terms[0]->name;
          const std::string& rn = f->terms[1]->name;
          if (ln == rn) {
            out.vars = {ln};
            for (int v = 0; v < s_.n; ++v) out.rows.insert({v});
          } else {
            out.vars = {std::min(ln, rn), std::max(ln, rn)};
            for (int v = 0; v < s_.n; ++v) out.rows.insert({v, v});
          }
        } else {
          out.vars = {lv < 0 ? f->terms[0]->name : f->terms[1]->name};
          out.rows.insert({lv < 0 ? rv : lv});
        }
        return out;
      }
      case Formula::Kind::Not: {
        const Table& t = eval(f->kids[0]);
        size_t universe = 1;
        for (size_t i = 0; i < t.vars.size(); ++i) {
          universe *= static_cast<size_t>(s_.n);
          if (universe > kRowLimit) too_big();
        }
        Table out;
        out.vars = t.vars;
        for (auto& tup : all_tuples(s_.n, static_cast<int>(t.vars.size()))) {
          if (!t.rows.count(tup)) out.rows.insert(std::move(tup));
        }
        return out;
      }
      case Formula::Kind::And: {
        std::vector<Table> kids;
        kids.reserve(f->kids.size());
        for (const auto& k : f->kids) kids.push_back(eval(k));
        return conj_all(std::move(kids));
      }
      case Formula::Kind::Or: {
        std::vector<std::string> vars;
        for (const auto& k : f->kids) vars = union_vars(vars, eval(k).vars);
        Table out;
        out.vars = vars;
        for (const auto& k : f->kids) {
          Table padded = pad(eval(k), vars, s_.n);
          out.rows.insert(padded.rows.begin(), padded.rows.end());
          if (out.rows.size() > kRowLimit) too_big();
        }
        return out;
      }
      case Formula::Kind::Exists: {
        const Table& t = eval(f->kids[0]);
        int idx = index_of(t.vars, f->sym);
        if (idx < 0) return t;
        Table out;
        out.vars = t.vars;
        out.vars.erase(out.vars.begin() + idx);
        for (const auto& row : t.rows) {
          Tuple proj = row;
          proj.erase(proj.begin() + idx);
          out.rows.insert(std::move(proj));
        }
        return out;
      }
      case Formula::Kind::Forall: {
        const Table& t = eval(f->kids[0]);
        int idx = index_of(t.vars, f->sym);
        if (idx < 0) return t;
        std::map<Tuple, int> counts;
        for (const auto& row : t.rows) {
          Tuple proj = row;
          proj.erase(proj.begin() + idx);
          ++counts[std::move(proj)];
        }
        Table out;
        out.vars = t.vars;
        out.vars.erase(out.vars.begin() + idx);
        for (auto& [proj, count] : counts) {
          if (count == s_.n) out.rows.insert(proj);
        }
        return out;
      }
    }
    throw EvalError("unreachable formula kind");
  }

  const State& s_;
  const Assignment& env_;
  std::map<const Formula*, Table> memo_;
};

// ---------------------------------------------------------------------------
// Binder hygiene: the table route substitutes env bindings at the leaves, so
// no quantifier in the formula may reuse an env-bound name.

bool binder_collides(const FormulaPtr& f, const Assignment& env) {
  if (f->kind == Formula::Kind::Exists || f->kind == Formula::Kind::Forall) {
    if (env.count(f->sym)) return true;
  }
  for (const auto& k : f->kids) {
    if (binder_collides(k, env)) return true;
  }
  return false;
}

TermPtr rename_term(const TermPtr& t, const std::map<std::string, std::string>& ren);

FormulaPtr rename_colliding(const FormulaPtr& f, const Assignment& env, FreshNames& names,
                            std::map<std::string, std::string>& ren) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Rel:
    case Formula::Kind::Eq: {
      std::vector<TermPtr> terms;
      terms.reserve(f->terms.size());
      for (const auto& t : f->terms) terms.push_back(rename_term(t, ren));
      return f->kind == Formula::Kind::Rel ? Formula::rel(f->sym, std::move(terms))
                                           : Formula::eq(terms[0], terms[1]);
    }
    case Formula::Kind::Not:
      return Formula::negation(rename_colliding(f->kids[0], env, names, ren));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (const auto& k : f->kids) kids.push_back(rename_colliding(k, env, names, ren));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      std::string sym = f->sym;
      auto old = ren.find(sym);
      std::string saved;
      bool had = old != ren.end();
      if (had) saved = old->second;
      if (env.count(sym)) {
        std::string fresh = names.fresh(sym);
        ren[sym] = fresh;
        sym = fresh;
      } else if (had) {
        ren.erase(sym);  // inner binder shadows an outer renamed one
      }
      FormulaPtr body = rename_colliding(f->kids[0], env, names, ren);
      if (had) {
        ren[f->sym] = saved;
      } else {
        ren.erase(f->sym);
      }
      return f->kind == Formula::Kind::Exists ? Formula::exists(sym, body)
                                              : Formula::forall(sym, body);
    }
  }
  throw EvalError("unreachable formula kind");
}

TermPtr rename_term(const TermPtr& t, const std::map<std::string, std::string>& ren) {
  switch (t->kind) {
    case Term::Kind::Var: {
      auto it = ren.find(t->name);
      return it == ren.end() ? t : Term::var(it->second);
    }
    case Term::Kind::Fn: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(rename_term(a, ren));
      return Term::fn(t->name, std::move(args));
    }
    case Term::Kind::Ite:
      throw EvalError("function terms require the per-tuple evaluator");
  }
  throw EvalError("unreachable term kind");
}

Relation materialize(const Table& t, const std::vector<std::string>& out_vars,
                     const Assignment& env, int n) {
  for (const auto& v : t.vars) {
    if (index_of(out_vars, v) < 0) {
      throw EvalError("free variable '" + v + "' is not covered by the output variables");
    }
  }
  std::vector<std::string> unconstrained;
  for (const auto& v : out_vars) {
    if (index_of(t.vars, v) < 0 && !env.count(v) && index_of(unconstrained, v) < 0) {
      unconstrained.push_back(v);
    }
  }
  size_t factor = 1;
  for (size_t i = 0; i < unconstrained.size(); ++i) {
    factor *= static_cast<size_t>(n);
    if (factor > kRowLimit) too_big();
  }
  if (t.rows.size() > kRowLimit / std::max<size_t>(factor, 1)) too_big();

  auto fills = all_tuples(n, static_cast<int>(unconstrained.size()));
  Relation out;
  for (const auto& row : t.rows) {
    for (const auto& fill : fills) {
      Tuple tuple(out_vars.size());
      for (size_t i = 0; i < out_vars.size(); ++i) {
        int idx = index_of(t.vars, out_vars[i]);
        if (idx >= 0) {
          tuple[i] = row[static_cast<size_t>(idx)];
        } else if (auto it = env.find(out_vars[i]); it != env.end()) {
          tuple[i] = it->second;
        } else {
          tuple[i] = fill[static_cast<size_t>(index_of(unconstrained, out_vars[i]))];
        }
      }
      out.insert(std::move(tuple));
    }
  }
  return out;
}

}  // namespace

bool eval_formula(const State& s, const FormulaPtr& f, const Assignment& a) {
  return formula_value(s, f, a);
}

int eval_term(const State& s, const TermPtr& t, const Assignment& a) {
  return term_value(s, t, a);
}

Relation eval_to_relation(const State& s, const FormulaPtr& f,
                          const std::vector<std::string>& out_vars, const Assignment& bound) {
  FormulaPtr g = f;
  if (binder_collides(f, bound)) {
    std::set<std::string> used = all_var_names(f);
    for (const auto& [name, value] : bound) {
      (void)value;
      used.insert(name);
    }
    FreshNames names(used);
    std::map<std::string, std::string> ren;
    g = rename_colliding(f, bound, names, ren);
  }
  TableEval ev(s, bound);
  return materialize(ev.eval(g), out_vars, bound, s.n);
}

bool eval_sentence(const State& s, const FormulaPtr& f, const Assignment& bound) {
  return !eval_to_relation(s, f, {}, bound).empty();
}

}  // namespace dyncq
