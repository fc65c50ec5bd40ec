#include "dyncq/classify.hpp"

#include <array>

#include "dyncq/errors.hpp"

namespace dyncq {

namespace {

bool is_atom(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Rel:
    case Formula::Kind::Eq:
      return true;
    default:
      return false;
  }
}

bool is_literal(const FormulaPtr& f) {
  if (is_atom(f)) return true;
  return f->kind == Formula::Kind::Not && is_atom(f->kids[0]);
}

bool conj_of_atoms(const FormulaPtr& f) {
  if (is_atom(f)) return true;
  if (f->kind != Formula::Kind::And) return false;
  for (auto& k : f->kids)
    if (!is_atom(k)) return false;
  return true;
}

bool conj_of_literals(const FormulaPtr& f) {
  if (is_literal(f)) return true;
  if (f->kind != Formula::Kind::And) return false;
  for (auto& k : f->kids)
    if (!is_literal(k)) return false;
  return true;
}

bool disj_of(const FormulaPtr& f, bool (*leaf)(const FormulaPtr&)) {
  if (leaf(f)) return true;
  if (f->kind != Formula::Kind::Or) return false;
  for (auto& k : f->kids)
    if (!leaf(k)) return false;
  return true;
}

}  // namespace

bool is_negation_free(const FormulaPtr& f) {
  if (f->kind == Formula::Kind::Not) return false;
  for (auto& k : f->kids)
    if (!is_negation_free(k)) return false;
  return true;
}

namespace {

const FormulaPtr& strip_exists(const FormulaPtr& f) {
  const FormulaPtr* cur = &f;
  while ((*cur)->kind == Formula::Kind::Exists) cur = &(*cur)->kids[0];
  return *cur;
}

const FormulaPtr& strip_forall(const FormulaPtr& f) {
  const FormulaPtr* cur = &f;
  while ((*cur)->kind == Formula::Kind::Forall) cur = &(*cur)->kids[0];
  return *cur;
}

// UCQ / UCQNeg: existential quantifiers and disjunction may interleave above
// quantifier-free pieces; conjunction only inside those pieces.
bool ucq_shape(const FormulaPtr& f, bool allow_negation) {
  if (is_quantifier_free(f)) return allow_negation || is_negation_free(f);
  if (f->kind == Formula::Kind::Exists) return ucq_shape(f->kids[0], allow_negation);
  if (f->kind == Formula::Kind::Or) {
    for (auto& k : f->kids)
      if (!ucq_shape(k, allow_negation)) return false;
    return true;
  }
  return false;
}

struct PrenexInfo {
  bool prenex;
  std::string prefix;
};

PrenexInfo prenex_info(const FormulaPtr& f) {
  PrenexInfo out{true, ""};
  const FormulaPtr* cur = &f;
  while ((*cur)->kind == Formula::Kind::Exists || (*cur)->kind == Formula::Kind::Forall) {
    out.prefix += (*cur)->kind == Formula::Kind::Exists ? 'E' : 'A';
    cur = &(*cur)->kids[0];
  }
  out.prenex = is_quantifier_free(*cur);
  if (!out.prenex) out.prefix.clear();
  return out;
}

bool accepts_function_free(Fragment frag, const FormulaPtr& f) {
  switch (frag) {
    case Fragment::PropCQ:
      return conj_of_atoms(f);
    case Fragment::PropUCQ:
      return disj_of(f, conj_of_atoms);
    case Fragment::PropCQNeg:
      return conj_of_literals(f);
    case Fragment::PropUCQNeg:
      return disj_of(f, conj_of_literals);
    case Fragment::Prop:
      return is_quantifier_free(f);
    case Fragment::CQ:
      return conj_of_atoms(strip_exists(f));
    case Fragment::CQNeg:
      return conj_of_literals(strip_exists(f));
    case Fragment::UCQ:
      return ucq_shape(f, false);
    case Fragment::UCQNeg:
      return ucq_shape(f, true);
    case Fragment::ForallStarFO:
      return is_quantifier_free(strip_forall(f));
    case Fragment::FOConj: {
      auto p = prenex_info(f);
      if (!p.prenex) return false;
      const FormulaPtr* m = &f;
      while ((*m)->kind == Formula::Kind::Exists || (*m)->kind == Formula::Kind::Forall)
        m = &(*m)->kids[0];
      return conj_of_atoms(*m);
    }
    case Fragment::QFreeWithFunctions:
      return is_quantifier_free(f);
    case Fragment::GeneralFO:
      return true;
  }
  return false;
}

constexpr std::array<Fragment, 12> kScanOrder = {
    Fragment::PropCQ, Fragment::PropUCQ, Fragment::PropCQNeg,    Fragment::PropUCQNeg,
    Fragment::Prop,   Fragment::CQ,      Fragment::UCQ,          Fragment::CQNeg,
    Fragment::UCQNeg, Fragment::FOConj,  Fragment::ForallStarFO, Fragment::GeneralFO,
};

}  // namespace

const char* fragment_name(Fragment f) {
  switch (f) {
    case Fragment::PropCQ: return "PropCQ";
    case Fragment::PropUCQ: return "PropUCQ";
    case Fragment::PropCQNeg: return "PropCQNeg";
    case Fragment::PropUCQNeg: return "PropUCQNeg";
    case Fragment::Prop: return "Prop";
    case Fragment::CQ: return "CQ";
    case Fragment::UCQ: return "UCQ";
    case Fragment::CQNeg: return "CQNeg";
    case Fragment::UCQNeg: return "UCQNeg";
    case Fragment::ForallStarFO: return "ForallStarFO";
    case Fragment::FOConj: return "FOConj";
    case Fragment::QFreeWithFunctions: return "QFreeWithFunctions";
    case Fragment::GeneralFO: return "GeneralFO";
  }
  return "?";
}

Fragment fragment_from_name(const std::string& name) {
  for (auto f : kScanOrder)
    if (name == fragment_name(f)) return f;
  if (name == fragment_name(Fragment::QFreeWithFunctions)) return Fragment::QFreeWithFunctions;
  throw Error("unknown fragment '" + name + "'");
}

ClassifyResult classify(const FormulaPtr& f) {
  ClassifyResult out;
  auto p = prenex_info(f);
  out.prenex = p.prenex;
  out.prefix = p.prefix;
  if (contains_function_terms(f)) {
    out.fragment = is_quantifier_free(f) ? Fragment::QFreeWithFunctions : Fragment::GeneralFO;
    return out;
  }
  for (auto frag : kScanOrder) {
    if (accepts_function_free(frag, f)) {
      out.fragment = frag;
      return out;
    }
  }
  out.fragment = Fragment::GeneralFO;
  return out;
}

bool fragment_accepts(Fragment frag, const FormulaPtr& f) {
  if (contains_function_terms(f))
    return frag == Fragment::QFreeWithFunctions ? is_quantifier_free(f)
                                                : frag == Fragment::GeneralFO;
  return accepts_function_free(frag, f);
}

bool fragment_leq(Fragment a, Fragment b) {
  if (a == b || b == Fragment::GeneralFO) return true;
  auto direct = [](Fragment x, Fragment y) {
    switch (x) {
      case Fragment::PropCQ:
        return y == Fragment::PropUCQ || y == Fragment::PropCQNeg || y == Fragment::CQ;
      case Fragment::PropUCQ:
        return y == Fragment::PropUCQNeg || y == Fragment::UCQ;
      case Fragment::PropCQNeg:
        return y == Fragment::PropUCQNeg || y == Fragment::CQNeg;
      case Fragment::PropUCQNeg:
        return y == Fragment::Prop;
      case Fragment::Prop:
        return y == Fragment::UCQNeg || y == Fragment::ForallStarFO ||
               y == Fragment::QFreeWithFunctions;
      case Fragment::CQ:
        return y == Fragment::UCQ || y == Fragment::CQNeg || y == Fragment::FOConj;
      case Fragment::UCQ:
        return y == Fragment::UCQNeg;
      case Fragment::CQNeg:
        return y == Fragment::UCQNeg;
      default:
        return false;
    }
  };
  if (direct(a, b)) return true;
  // transitive closure over the small lattice
  for (auto mid : kScanOrder)
    if (mid != a && mid != b && direct(a, mid) && fragment_leq(mid, b)) return true;
  return false;
}

bool matches_prefix_pattern(const FormulaPtr& f, const std::string& pattern) {
  auto p = prenex_info(f);
  if (!p.prenex) return false;
  std::size_t i = 0;
  for (char c : pattern) {
    if (i < p.prefix.size() && p.prefix[i] == c) ++i;
  }
  return i == p.prefix.size();
}

std::string dual_prefix(const std::string& pattern) {
  std::string out;
  out.reserve(pattern.size());
  for (char c : pattern) {
    if (c == 'E')
      out += 'A';
    else if (c == 'A')
      out += 'E';
    else
      throw Error("prefix pattern must be over E/A");
  }
  return out;
}

}  // namespace dyncq
