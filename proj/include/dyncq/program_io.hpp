#pragma once

#include <map>
#include <string>

#include "dyncq/engine.hpp"
#include "dyncq/program.hpp"
#include "dyncq/state.hpp"

namespace dyncq {

// Program files. Line oriented: declarations (dialect / input / aux / fn /
// base blocks), then init specs and update rules in any order. Lines whose
// first non-blank character is '#' are comments. Formulas and update terms
// extend to the end of the line.
ProgramPtr parse_program(const std::string& text);
std::string print_program(const DynamicProgram& p);

// Structure files: {"domain": n, "relations": {name: [[...], ...]},
// "functions": {name: {"a,b": v, ...}}}. Function argument tuples are encoded
// as comma-joined keys ("" for nullary).
struct StructureData {
  int domain = 0;
  std::map<std::string, Relation> relations;
  std::map<std::string, FnTable> functions;
};

StructureData parse_structure(const std::string& text);
std::string print_structure(const StructureData& s);

// Full state dump, relations in schema declaration order.
std::string print_state(const State& s, const DynamicProgram& p);

// Script files: one modification per line, e.g. "ins E 0 1".
ModificationScript parse_script(const std::string& text);
std::string print_script(const ModificationScript& script);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace dyncq
