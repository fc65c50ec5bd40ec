#include "dyncq/normal_forms.hpp"

#include "dyncq/errors.hpp"

namespace dyncq {

namespace {

constexpr std::size_t kClauseLimit = 1000000;

FormulaPtr nnf(const FormulaPtr& f, bool neg) {
  switch (f->kind) {
    case Formula::Kind::True:
      return neg ? Formula::falsity() : f;
    case Formula::Kind::False:
      return neg ? Formula::truth() : f;
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      return neg ? Formula::negation(f) : f;
    case Formula::Kind::Not:
      return nnf(f->kids[0], !neg);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (auto& k : f->kids) kids.push_back(nnf(k, neg));
      bool and_out = (f->kind == Formula::Kind::And) != neg;
      return and_out ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      auto body = nnf(f->kids[0], neg);
      bool ex_out = (f->kind == Formula::Kind::Exists) != neg;
      return ex_out ? Formula::exists(f->sym, body) : Formula::forall(f->sym, body);
    }
  }
  return f;
}

}  // namespace

FormulaPtr to_nnf(const FormulaPtr& f) { return nnf(f, false); }

FormulaPtr negate_nnf(const FormulaPtr& f) { return nnf(f, true); }

namespace {

struct Binder {
  bool exists;
  std::string var;
};

// Collects the prefix and rebuilds the matrix, renaming every binder fresh.
void pull(const FormulaPtr& f, bool neg, FreshNames& names,
          const std::map<std::string, std::string>& sub, std::vector<Binder>& prefix,
          std::vector<FormulaPtr>& matrix_stack) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Rel:
    case Formula::Kind::Eq: {
      auto g = rename_free_vars(f, sub);
      matrix_stack.push_back(neg ? Formula::negation(g) : g);
      return;
    }
    case Formula::Kind::Not:
      pull(f->kids[0], !neg, names, sub, prefix, matrix_stack);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      bool and_out = (f->kind == Formula::Kind::And) != neg;
      std::vector<FormulaPtr> kids;
      for (auto& k : f->kids) {
        std::vector<FormulaPtr> sub_stack;
        pull(k, neg, names, sub, prefix, sub_stack);
        kids.push_back(sub_stack[0]);
      }
      matrix_stack.push_back(and_out ? Formula::conj(std::move(kids))
                                     : Formula::disj(std::move(kids)));
      return;
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool ex_out = (f->kind == Formula::Kind::Exists) != neg;
      std::string fresh = names.fresh("v");
      prefix.push_back({ex_out, fresh});
      auto inner = sub;
      inner[f->sym] = fresh;
      pull(f->kids[0], neg, names, inner, prefix, matrix_stack);
      return;
    }
  }
}

}  // namespace

FormulaPtr to_prenex(const FormulaPtr& f) {
  if (contains_function_terms(f)) throw Error("prenexing requires a function-free formula");
  FreshNames names(all_var_names(f));
  std::vector<Binder> prefix;
  std::vector<FormulaPtr> stack;
  pull(f, false, names, {}, prefix, stack);
  FormulaPtr out = stack[0];
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
    out = it->exists ? Formula::exists(it->var, out) : Formula::forall(it->var, out);
  return out;
}

EpfResult to_existential_prefix_form(const FormulaPtr& f) {
  auto p = to_prenex(f);
  std::vector<Binder> prefix;
  const FormulaPtr* cur = &p;
  while ((*cur)->kind == Formula::Kind::Exists || (*cur)->kind == Formula::Kind::Forall) {
    prefix.push_back({(*cur)->kind == Formula::Kind::Exists, (*cur)->sym});
    cur = &(*cur)->kids[0];
  }
  auto not_simpl = [](const FormulaPtr& g) {
    return g->kind == Formula::Kind::Not ? g->kids[0] : Formula::negation(g);
  };
  FormulaPtr out = *cur;
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) {
    if (it->exists)
      out = Formula::exists(it->var, out);
    else
      out = not_simpl(Formula::exists(it->var, not_simpl(out)));
  }
  // prefix length: symbols of the maximal !/E chain up to its last E
  int len = 0, seen = 0;
  const FormulaPtr* walk = &out;
  for (;;) {
    if ((*walk)->kind == Formula::Kind::Exists) {
      ++seen;
      len = seen;
    } else if ((*walk)->kind == Formula::Kind::Not) {
      ++seen;
    } else {
      break;
    }
    walk = &(*walk)->kids[0];
  }
  return {out, len};
}

namespace {

using Clauses = std::vector<std::vector<FormulaPtr>>;

bool contains_formula(const std::vector<FormulaPtr>& v, const FormulaPtr& f) {
  for (auto& g : v)
    if (equal(g, f)) return true;
  return false;
}

std::size_t total_literals(const Clauses& cs) {
  std::size_t n = 0;
  for (auto& c : cs) n += c.size();
  return n;
}

// Clause algebra shared by CNF and DNF: in CNF reading, the outer level is a
// conjunction of clauses; `merge` unions literal lists (outer product for the
// dual connective).
Clauses cross(const Clauses& a, const Clauses& b) {
  Clauses out;
  for (auto& ca : a) {
    for (auto& cb : b) {
      std::vector<FormulaPtr> merged = ca;
      for (auto& lit : cb)
        if (!contains_formula(merged, lit)) merged.push_back(lit);
      out.push_back(std::move(merged));
    }
  }
  if (total_literals(out) > kClauseLimit)
    throw LimitError("normal-form expansion exceeds the size guard");
  return out;
}

Clauses append(Clauses a, const Clauses& b) {
  for (auto& c : b) {
    bool dup = false;
    for (auto& existing : a) {
      if (existing.size() == c.size()) {
        bool same = true;
        for (auto& lit : c)
          if (!contains_formula(existing, lit)) {
            same = false;
            break;
          }
        if (same) {
          dup = true;
          break;
        }
      }
    }
    if (!dup) a.push_back(c);
  }
  if (total_literals(a) > kClauseLimit)
    throw LimitError("normal-form expansion exceeds the size guard");
  return a;
}

// `conj_outer` selects CNF (outer And) vs DNF (outer Or). Input must be NNF.
Clauses to_clauses(const FormulaPtr& f, bool conj_outer) {
  switch (f->kind) {
    case Formula::Kind::True:
      return conj_outer ? Clauses{} : Clauses{{}};
    case Formula::Kind::False:
      return conj_outer ? Clauses{{}} : Clauses{};
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
    case Formula::Kind::Not:
      return {{f}};
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      bool aligned = (f->kind == Formula::Kind::And) == conj_outer;
      Clauses acc = aligned ? Clauses{} : Clauses{{}};
      for (auto& k : f->kids) {
        auto kc = to_clauses(k, conj_outer);
        acc = aligned ? append(std::move(acc), kc) : cross(acc, kc);
      }
      return acc;
    }
    default:
      throw Error("normal form conversion requires a quantifier-free formula");
  }
}

FormulaPtr clauses_to_formula(const Clauses& cs, bool conj_outer) {
  std::vector<FormulaPtr> outer;
  outer.reserve(cs.size());
  for (auto& c : cs) {
    std::vector<FormulaPtr> lits = c;
    outer.push_back(conj_outer ? Formula::disj(std::move(lits)) : Formula::conj(std::move(lits)));
  }
  return conj_outer ? Formula::conj(std::move(outer)) : Formula::disj(std::move(outer));
}

}  // namespace

FormulaPtr qf_to_cnf(const FormulaPtr& f) {
  return clauses_to_formula(qf_cnf_clauses(f), true);
}

FormulaPtr qf_to_dnf(const FormulaPtr& f) {
  return clauses_to_formula(qf_dnf_terms(f), false);
}

std::vector<std::vector<FormulaPtr>> qf_cnf_clauses(const FormulaPtr& f) {
  if (!is_quantifier_free(f)) throw Error("CNF conversion requires a quantifier-free formula");
  return to_clauses(to_nnf(f), true);
}

std::vector<std::vector<FormulaPtr>> qf_dnf_terms(const FormulaPtr& f) {
  if (!is_quantifier_free(f)) throw Error("DNF conversion requires a quantifier-free formula");
  return to_clauses(to_nnf(f), false);
}

}  // namespace dyncq
