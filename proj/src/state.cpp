#include "dyncq/state.hpp"

#include "dyncq/errors.hpp"

namespace dyncq {

std::vector<Tuple> all_tuples(int n, int arity) {
  std::vector<Tuple> out;
  if (arity == 0) {
    out.push_back({});
    return out;
  }
  if (n <= 0) return out;
  Tuple cur(static_cast<size_t>(arity), 0);
  for (;;) {
    out.push_back(cur);
    int i = arity - 1;
    while (i >= 0 && cur[static_cast<size_t>(i)] == n - 1) {
      cur[static_cast<size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++cur[static_cast<size_t>(i)];
  }
  return out;
}

Relation full_relation(int n, int arity) {
  Relation r;
  for (auto& t : all_tuples(n, arity)) r.insert(std::move(t));
  return r;
}

Relation complement_relation(const Relation& r, int n, int arity) {
  Relation out;
  for (auto& t : all_tuples(n, arity)) {
    if (!r.count(t)) out.insert(std::move(t));
  }
  return out;
}

void check_tuple(const Tuple& t, int n, int arity, const std::string& context) {
  if (static_cast<int>(t.size()) != arity) {
    throw EvalError("tuple of width " + std::to_string(t.size()) + " where " + context +
                    " expects arity " + std::to_string(arity));
  }
  for (int v : t) {
    if (v < 0 || v >= n) {
      throw EvalError("tuple component " + std::to_string(v) + " outside domain {0,...," +
                      std::to_string(n - 1) + "} in " + context);
    }
  }
}

void check_input_db(const std::map<std::string, Relation>& db, const Schema& schema, int n) {
  for (const auto& [name, rel] : db) {
    auto ar = schema.input_arity(name);
    if (!ar) throw SchemaError("database relation '" + name + "' is not an input relation");
    for (const auto& t : rel) check_tuple(t, n, *ar, "input relation '" + name + "'");
  }
  for (const auto& decl : schema.input_relations) {
    if (!db.count(decl.name)) {
      throw SchemaError("database is missing input relation '" + decl.name + "'");
    }
  }
}

}  // namespace dyncq
