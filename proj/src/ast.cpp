#include "dyncq/ast.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "dyncq/errors.hpp"

namespace dyncq {

TermPtr Term::var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Var;
  t->name = std::move(name);
  return t;
}

TermPtr Term::fn(std::string name, std::vector<TermPtr> args) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Fn;
  t->name = std::move(name);
  t->args = std::move(args);
  return t;
}

TermPtr Term::ite(FormulaPtr cond, TermPtr t1, TermPtr t2) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Ite;
  t->cond = std::move(cond);
  t->then_branch = std::move(t1);
  t->else_branch = std::move(t2);
  return t;
}

FormulaPtr Formula::truth() {
  static const FormulaPtr t = [] {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::True;
    return f;
  }();
  return t;
}

FormulaPtr Formula::falsity() {
  static const FormulaPtr t = [] {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::False;
    return f;
  }();
  return t;
}

FormulaPtr Formula::rel(std::string sym, std::vector<TermPtr> args) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Rel;
  f->sym = std::move(sym);
  f->terms = std::move(args);
  return f;
}

FormulaPtr Formula::eq(TermPtr lhs, TermPtr rhs) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Eq;
  f->terms = {std::move(lhs), std::move(rhs)};
  return f;
}

FormulaPtr Formula::negation(FormulaPtr g) {
  if (g->kind == Kind::True) return falsity();
  if (g->kind == Kind::False) return truth();
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Not;
  f->kids = {std::move(g)};
  return f;
}

FormulaPtr Formula::conj(std::vector<FormulaPtr> fs) {
  std::vector<FormulaPtr> kids;
  for (auto& g : fs) {
    if (g->kind == Kind::False) return falsity();
    if (g->kind == Kind::True) continue;
    if (g->kind == Kind::And) {
      for (auto& k : g->kids) kids.push_back(k);
    } else {
      kids.push_back(g);
    }
  }
  if (kids.empty()) return truth();
  if (kids.size() == 1) return kids[0];
  auto f = std::make_shared<Formula>();
  f->kind = Kind::And;
  f->kids = std::move(kids);
  return f;
}

FormulaPtr Formula::disj(std::vector<FormulaPtr> fs) {
  std::vector<FormulaPtr> kids;
  for (auto& g : fs) {
    if (g->kind == Kind::True) return truth();
    if (g->kind == Kind::False) continue;
    if (g->kind == Kind::Or) {
      for (auto& k : g->kids) kids.push_back(k);
    } else {
      kids.push_back(g);
    }
  }
  if (kids.empty()) return falsity();
  if (kids.size() == 1) return kids[0];
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Or;
  f->kids = std::move(kids);
  return f;
}

FormulaPtr Formula::exists(std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Exists;
  f->sym = std::move(var);
  f->kids = {std::move(body)};
  return f;
}

FormulaPtr Formula::forall(std::string var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Forall;
  f->sym = std::move(var);
  f->kids = {std::move(body)};
  return f;
}

bool equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Var:
      return a->name == b->name;
    case Term::Kind::Fn: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i])) return false;
      return true;
    }
    case Term::Kind::Ite:
      return equal(a->cond, b->cond) && equal(a->then_branch, b->then_branch) &&
             equal(a->else_branch, b->else_branch);
  }
  return false;
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind || a->sym != b->sym) return false;
  if (a->terms.size() != b->terms.size() || a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->terms.size(); ++i)
    if (!equal(a->terms[i], b->terms[i])) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!equal(a->kids[i], b->kids[i])) return false;
  return true;
}

FormulaPtr rel_of_vars(std::string sym, const std::vector<std::string>& vars) {
  std::vector<TermPtr> args;
  args.reserve(vars.size());
  for (auto& v : vars) args.push_back(Term::var(v));
  return Formula::rel(std::move(sym), std::move(args));
}

FormulaPtr eq_vars(const std::string& a, const std::string& b) {
  return Formula::eq(Term::var(a), Term::var(b));
}

void collect_free_vars(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case Term::Kind::Fn:
      for (auto& a : t->args) collect_free_vars(a, bound, out);
      return;
    case Term::Kind::Ite:
      collect_free_vars(t->cond, bound, out);
      collect_free_vars(t->then_branch, bound, out);
      collect_free_vars(t->else_branch, bound, out);
      return;
  }
}

void collect_free_vars(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return;
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      for (auto& t : f->terms) collect_free_vars(t, bound, out);
      return;
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (auto& k : f->kids) collect_free_vars(k, bound, out);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool was_bound = bound.count(f->sym) > 0;
      bound.insert(f->sym);
      collect_free_vars(f->kids[0], bound, out);
      if (!was_bound) bound.erase(f->sym);
      return;
    }
  }
}

std::set<std::string> free_vars(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  collect_free_vars(f, bound, out);
  return out;
}

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, out;
  collect_free_vars(t, bound, out);
  return out;
}

namespace {

void walk_names(const FormulaPtr& f, std::set<std::string>& vars);

void walk_names_term(const TermPtr& t, std::set<std::string>& vars) {
  switch (t->kind) {
    case Term::Kind::Var:
      vars.insert(t->name);
      return;
    case Term::Kind::Fn:
      for (auto& a : t->args) walk_names_term(a, vars);
      return;
    case Term::Kind::Ite:
      walk_names(t->cond, vars);
      walk_names_term(t->then_branch, vars);
      walk_names_term(t->else_branch, vars);
      return;
  }
}

void walk_names(const FormulaPtr& f, std::set<std::string>& vars) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return;
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      for (auto& t : f->terms) walk_names_term(t, vars);
      return;
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (auto& k : f->kids) walk_names(k, vars);
      return;
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      vars.insert(f->sym);
      walk_names(f->kids[0], vars);
      return;
  }
}

}  // namespace

std::set<std::string> all_var_names(const FormulaPtr& f) {
  std::set<std::string> vars;
  walk_names(f, vars);
  return vars;
}

namespace {

void walk_symbols(const FormulaPtr& f, std::set<std::string>& rels, std::set<std::string>& fns);

void walk_symbols_term(const TermPtr& t, std::set<std::string>& rels, std::set<std::string>& fns) {
  switch (t->kind) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Fn:
      fns.insert(t->name);
      for (auto& a : t->args) walk_symbols_term(a, rels, fns);
      return;
    case Term::Kind::Ite:
      walk_symbols(t->cond, rels, fns);
      walk_symbols_term(t->then_branch, rels, fns);
      walk_symbols_term(t->else_branch, rels, fns);
      return;
  }
}

void walk_symbols(const FormulaPtr& f, std::set<std::string>& rels, std::set<std::string>& fns) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return;
    case Formula::Kind::Rel:
      rels.insert(f->sym);
      for (auto& t : f->terms) walk_symbols_term(t, rels, fns);
      return;
    case Formula::Kind::Eq:
      for (auto& t : f->terms) walk_symbols_term(t, rels, fns);
      return;
    default:
      for (auto& k : f->kids) walk_symbols(k, rels, fns);
      return;
  }
}

}  // namespace

std::set<std::string> relation_symbols(const FormulaPtr& f) {
  std::set<std::string> rels, fns;
  walk_symbols(f, rels, fns);
  return rels;
}

std::set<std::string> function_symbols(const FormulaPtr& f) {
  std::set<std::string> rels, fns;
  walk_symbols(f, rels, fns);
  return fns;
}

std::set<std::string> relation_symbols(const TermPtr& t) {
  std::set<std::string> rels, fns;
  walk_symbols_term(t, rels, fns);
  return rels;
}

std::set<std::string> function_symbols(const TermPtr& t) {
  std::set<std::string> rels, fns;
  walk_symbols_term(t, rels, fns);
  return fns;
}

namespace {

bool term_has_fn(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var:
      return false;
    case Term::Kind::Fn:
    case Term::Kind::Ite:
      return true;
  }
  return false;
}

}  // namespace

bool contains_function_terms(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      for (auto& t : f->terms)
        if (term_has_fn(t)) return true;
      return false;
    default:
      for (auto& k : f->kids)
        if (contains_function_terms(k)) return true;
      return false;
  }
}

bool is_quantifier_free(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      return false;
    case Formula::Kind::Rel: {
      // ite conditions are quantifier-free by construction; still check.
      for (auto& t : f->terms) {
        if (t->kind == Term::Kind::Ite && !is_quantifier_free(t->cond)) return false;
      }
      return true;
    }
    default:
      for (auto& k : f->kids)
        if (!is_quantifier_free(k)) return false;
      return true;
  }
}

namespace {

void count_nodes(const FormulaPtr& f, std::unordered_set<const void*>& seen, std::size_t& n);

void count_nodes(const TermPtr& t, std::unordered_set<const void*>& seen, std::size_t& n) {
  if (!seen.insert(t.get()).second) return;
  ++n;
  switch (t->kind) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Fn:
      for (auto& a : t->args) count_nodes(a, seen, n);
      return;
    case Term::Kind::Ite:
      count_nodes(t->cond, seen, n);
      count_nodes(t->then_branch, seen, n);
      count_nodes(t->else_branch, seen, n);
      return;
  }
}

void count_nodes(const FormulaPtr& f, std::unordered_set<const void*>& seen, std::size_t& n) {
  if (!seen.insert(f.get()).second) return;
  ++n;
  for (auto& t : f->terms) count_nodes(t, seen, n);
  for (auto& k : f->kids) count_nodes(k, seen, n);
}

}  // namespace

std::size_t dag_node_count(const FormulaPtr& f) {
  std::unordered_set<const void*> seen;
  std::size_t n = 0;
  count_nodes(f, seen, n);
  return n;
}

TermPtr rename_free_vars(const TermPtr& t, const std::map<std::string, std::string>& sub) {
  switch (t->kind) {
    case Term::Kind::Var: {
      auto it = sub.find(t->name);
      return it == sub.end() ? t : Term::var(it->second);
    }
    case Term::Kind::Fn: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (auto& a : t->args) args.push_back(rename_free_vars(a, sub));
      return Term::fn(t->name, std::move(args));
    }
    case Term::Kind::Ite:
      return Term::ite(rename_free_vars(t->cond, sub), rename_free_vars(t->then_branch, sub),
                       rename_free_vars(t->else_branch, sub));
  }
  return t;
}

FormulaPtr rename_free_vars(const FormulaPtr& f, const std::map<std::string, std::string>& sub) {
  if (sub.empty()) return f;
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Rel:
    case Formula::Kind::Eq: {
      std::vector<TermPtr> terms;
      terms.reserve(f->terms.size());
      for (auto& t : f->terms) terms.push_back(rename_free_vars(t, sub));
      return f->kind == Formula::Kind::Rel ? Formula::rel(f->sym, std::move(terms))
                                           : Formula::eq(terms[0], terms[1]);
    }
    case Formula::Kind::Not:
      return Formula::negation(rename_free_vars(f->kids[0], sub));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (auto& k : f->kids) kids.push_back(rename_free_vars(k, sub));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      // The binder shadows any substitution of the same name. Renaming into a
      // capture (target name equal to the binder) is rejected: construction
      // code always renames apart first.
      auto inner = sub;
      inner.erase(f->sym);
      for (auto& [from, to] : inner) {
        (void)from;
        if (to == f->sym)
          throw EvalError("variable renaming would be captured by binder '" + f->sym + "'");
      }
      auto body = rename_free_vars(f->kids[0], inner);
      return f->kind == Formula::Kind::Exists ? Formula::exists(f->sym, body)
                                              : Formula::forall(f->sym, body);
    }
  }
  return f;
}

FormulaPtr rewrite_atoms(const FormulaPtr& f, const AtomRewrite& rw) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Eq:
      return f;
    case Formula::Kind::Rel: {
      auto r = rw(f->sym, f->terms);
      return r ? r : f;
    }
    case Formula::Kind::Not:
      return Formula::negation(rewrite_atoms(f->kids[0], rw));
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<FormulaPtr> kids;
      kids.reserve(f->kids.size());
      for (auto& k : f->kids) kids.push_back(rewrite_atoms(k, rw));
      return f->kind == Formula::Kind::And ? Formula::conj(std::move(kids))
                                           : Formula::disj(std::move(kids));
    }
    case Formula::Kind::Exists:
      return Formula::exists(f->sym, rewrite_atoms(f->kids[0], rw));
    case Formula::Kind::Forall:
      return Formula::forall(f->sym, rewrite_atoms(f->kids[0], rw));
  }
  return f;
}

void FreshNames::reserve(const std::set<std::string>& names) {
  used_.insert(names.begin(), names.end());
}

std::string FreshNames::fresh(const std::string& base) {
  int& k = counters_[base];
  for (;;) {
    std::string cand = base + "$" + std::to_string(k++);
    if (used_.insert(cand).second) return cand;
  }
}

std::vector<std::string> FreshNames::fresh_many(const std::string& base, std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(fresh(base));
  return out;
}

namespace {

// Precedence levels: Or = 1, And = 2, Not = 3, atoms = 4. Quantifiers extend
// maximally to the right and parenthesize when nested under a connective.
void print_term(std::ostringstream& os, const TermPtr& t);

void print_formula(std::ostringstream& os, const FormulaPtr& f, int parent_prec) {
  switch (f->kind) {
    case Formula::Kind::True:
      os << "true";
      return;
    case Formula::Kind::False:
      os << "false";
      return;
    case Formula::Kind::Rel: {
      os << f->sym << "(";
      for (std::size_t i = 0; i < f->terms.size(); ++i) {
        if (i) os << ", ";
        print_term(os, f->terms[i]);
      }
      os << ")";
      return;
    }
    case Formula::Kind::Eq:
      print_term(os, f->terms[0]);
      os << " = ";
      print_term(os, f->terms[1]);
      return;
    case Formula::Kind::Not: {
      os << "!";
      const auto& k = f->kids[0];
      bool atom = k->kind == Formula::Kind::Rel || k->kind == Formula::Kind::True ||
                  k->kind == Formula::Kind::False || k->kind == Formula::Kind::Not;
      if (atom) {
        print_formula(os, k, 3);
      } else {
        os << "(";
        print_formula(os, k, 0);
        os << ")";
      }
      return;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      int prec = f->kind == Formula::Kind::And ? 2 : 1;
      bool need_parens = parent_prec >= prec;
      if (need_parens) os << "(";
      const char* sep = f->kind == Formula::Kind::And ? " & " : " | ";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) os << sep;
        print_formula(os, f->kids[i], prec);
      }
      if (need_parens) os << ")";
      return;
    }
    case Formula::Kind::Exists:
    case Formula::Kind::Forall: {
      bool need_parens = parent_prec > 0;
      if (need_parens) os << "(";
      os << (f->kind == Formula::Kind::Exists ? "E " : "A ") << f->sym << ". ";
      print_formula(os, f->kids[0], 0);
      if (need_parens) os << ")";
      return;
    }
  }
}

void print_term(std::ostringstream& os, const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var:
      os << t->name;
      return;
    case Term::Kind::Fn: {
      os << t->name << "(";
      for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << ", ";
        print_term(os, t->args[i]);
      }
      os << ")";
      return;
    }
    case Term::Kind::Ite: {
      os << "ite(";
      print_formula(os, t->cond, 0);
      os << ", ";
      print_term(os, t->then_branch);
      os << ", ";
      print_term(os, t->else_branch);
      os << ")";
      return;
    }
  }
}

}  // namespace

std::string print(const FormulaPtr& f) {
  std::ostringstream os;
  print_formula(os, f, 0);
  return os.str();
}

std::string print(const TermPtr& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

}  // namespace dyncq
