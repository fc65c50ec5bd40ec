#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dyncq/errors.hpp"

namespace dyncq {

struct SymbolDecl {
  std::string name;
  int arity = 0;
};

// Dynamic schema: input relations, auxiliary relations, and (QF dialect only)
// auxiliary functions. Declaration order is significant: printing, relation
// tables, and generated-symbol layout all follow it.
class Schema {
 public:
  std::vector<SymbolDecl> input_relations;
  std::vector<SymbolDecl> aux_relations;
  std::vector<SymbolDecl> aux_functions;

  void validate() const {
    std::vector<std::string> seen;
    auto check = [&](const SymbolDecl& d, const char* what) {
      if (d.name.empty()) throw SchemaError(std::string(what) + " with empty name");
      if (d.arity < 0) throw SchemaError("negative arity for " + d.name);
      for (auto& s : seen)
        if (s == d.name) throw SchemaError("duplicate symbol '" + d.name + "'");
      seen.push_back(d.name);
    };
    for (auto& d : input_relations) check(d, "input relation");
    for (auto& d : aux_relations) check(d, "aux relation");
    for (auto& d : aux_functions) check(d, "aux function");
  }

  std::optional<int> input_arity(const std::string& name) const {
    return find(input_relations, name);
  }
  std::optional<int> aux_arity(const std::string& name) const {
    return find(aux_relations, name);
  }
  std::optional<int> fn_arity(const std::string& name) const {
    return find(aux_functions, name);
  }
  std::optional<int> relation_arity(const std::string& name) const {
    if (auto a = input_arity(name)) return a;
    return aux_arity(name);
  }
  bool is_input(const std::string& name) const { return input_arity(name).has_value(); }
  bool is_aux(const std::string& name) const { return aux_arity(name).has_value(); }
  bool is_fn(const std::string& name) const { return fn_arity(name).has_value(); }

 private:
  static std::optional<int> find(const std::vector<SymbolDecl>& v, const std::string& name) {
    for (auto& d : v)
      if (d.name == name) return d.arity;
    return std::nullopt;
  }
};

}  // namespace dyncq
