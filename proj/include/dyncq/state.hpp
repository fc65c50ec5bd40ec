#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dyncq/schema.hpp"

namespace dyncq {

using Tuple = std::vector<int>;
using Relation = std::set<Tuple>;
using FnTable = std::map<Tuple, int>;

// Program state: fixed domain {0,...,n-1}, input database, auxiliary
// database, and (QF dialect) total auxiliary functions. Value type; apply
// operations copy.
struct State {
  int n = 0;
  std::map<std::string, Relation> input_db;
  std::map<std::string, Relation> aux_db;
  std::map<std::string, FnTable> aux_fns;

  const Relation* find_relation(const std::string& name) const {
    auto it = input_db.find(name);
    if (it != input_db.end()) return &it->second;
    auto jt = aux_db.find(name);
    if (jt != aux_db.end()) return &jt->second;
    return nullptr;
  }
  const FnTable* find_function(const std::string& name) const {
    auto it = aux_fns.find(name);
    return it == aux_fns.end() ? nullptr : &it->second;
  }
};

// All of D^arity in lexicographic order.
std::vector<Tuple> all_tuples(int n, int arity);

Relation full_relation(int n, int arity);
Relation complement_relation(const Relation& r, int n, int arity);

// Tuple components within [0,n) and of the given width.
void check_tuple(const Tuple& t, int n, int arity, const std::string& context);

// Validates an input database against the schema and domain.
void check_input_db(const std::map<std::string, Relation>& db, const Schema& schema, int n);

}  // namespace dyncq
