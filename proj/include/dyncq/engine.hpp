#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dyncq/program.hpp"
#include "dyncq/state.hpp"

namespace dyncq {

struct Modification {
  ModKind kind = ModKind::Ins;
  std::string relation;
  Tuple tuple;
};
using ModificationScript = std::vector<Modification>;

std::string modification_to_string(const Modification& m);

// Builds the initial state for a domain of size n (n >= 1) from the input
// database, running the init specs in declaration order.
State initialize(const DynamicProgram& p, const std::map<std::string, Relation>& input_db, int n);

// Applies one modification. The new input database is the modified one; every
// auxiliary symbol is recomputed from the pre-modification state (redundant
// insertions and deletions still fire the rules). In the delta dialect with
// strict set, a tuple satisfying both the add and the remove formula raises
// DisjointnessError; otherwise removals win.
State apply_modification(const DynamicProgram& p, const State& s, const Modification& m,
                         bool strict = false);

void apply_to_input_db(std::map<std::string, Relation>& db, const Modification& m);

struct RunResult {
  State state;
  std::vector<Relation> query_trace;  // one snapshot per modification when traced
};

RunResult run_program(const DynamicProgram& p, const std::map<std::string, Relation>& input_db,
                      int n, const ModificationScript& script, bool trace = false,
                      bool strict = false);

// Edge R -> R' when an update rule for the auxiliary symbol R mentions the
// auxiliary symbol R'. Input relations are not nodes.
std::map<std::string, std::set<std::string>> dependency_graph(const DynamicProgram& p);

struct TopoResult {
  bool non_recursive = false;
  std::vector<std::string> order;  // dependencies before dependents; query as late as possible
  std::vector<std::string> cycle;  // witness cycle when recursive
};

TopoResult topo_order(const DynamicProgram& p);

}  // namespace dyncq
