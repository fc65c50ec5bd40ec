#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dyncq/engine.hpp"
#include "dyncq/program.hpp"
#include "dyncq/state.hpp"

namespace dyncq {

// Seeded generator behind all sampling. The stream is pinned to mt19937-64
// with modulo reduction so reports replay identically everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t next() { return gen_(); }
  int below(int k) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(k)); }
  bool flip() { return (gen_() & 1) != 0; }

 private:
  std::mt19937_64 gen_;
};

// Ground truth to compare a dynamic program against: a static formula
// evaluated from scratch, a named graph procedure, or another program run
// in lockstep on the same script.
struct Reference {
  enum class Kind { StaticFormula, Procedure, Program };

  Kind kind = Kind::StaticFormula;
  FormulaPtr formula;      // columns follow free variables in name order
  std::string procedure;   // reflexive-reachability | reachability | max-outdegree-set
  ProgramPtr program;

  static Reference static_formula(FormulaPtr f);
  static Reference named_procedure(std::string name);
  static Reference against(ProgramPtr p);
};

// Evaluates the reference on one input database. Procedures expect the
// database to hold exactly one relation (the graph); a Program reference is
// initialized on the database and its query relation read back.
Relation static_eval(const Reference& ref, const std::map<std::string, Relation>& db, int n);

struct DiffConfig {
  int min_domain = 1;
  int max_domain = 3;
  int max_steps = 3;
  bool exhaustive = false;   // all databases x the full script tree per domain
  int runs = 200;            // random mode: one sampled database and script per run
  std::uint64_t seed = 0;
  bool acyclic = false;      // single binary input; inserts must not close a
                             // cycle and deletes must name a present edge
  bool strict = false;       // strict delta application on the subject
  bool all_relations = false;  // Program references: compare same-name aux too
};

struct Divergence {
  int domain = 0;
  std::map<std::string, Relation> db;  // initial database
  ModificationScript script;           // prefix up to the failing step
  int step = 0;                        // 0 = right after initialization
  std::string relation;
  Tuple tuple;                         // a witness tuple from the difference
  Relation expected;
  Relation got;
  std::string note;                    // set when a run aborted instead of diverging
};

struct VerifyReport {
  bool pass = true;
  long long instances = 0;  // databases initialized
  long long scripts = 0;    // script prefixes compared
  std::uint64_t seed = 0;
  std::optional<Divergence> divergence;
};

// Runs the subject against the reference and compares the query relation
// after initialization and after every script prefix. Stops at the first
// divergence.
VerifyReport differential_check(const DynamicProgram& subject, const Reference& ref,
                                const DiffConfig& cfg);

std::string verify_report_json(const VerifyReport& report);

// All input databases over the schema, deterministic order. Throws
// LimitError when the tuple space exceeds 20 cells.
std::vector<std::map<std::string, Relation>> enumerate_databases(const Schema& schema, int n);

// All scripts of exactly the given length, deterministic order:
// kind (ins before del), then relation declaration order, then tuple order.
// Throws LimitError for length > 4.
std::vector<ModificationScript> enumerate_scripts(const Schema& schema, int n, int length);

std::map<std::string, Relation> random_database(const Schema& schema, int n, Rng& rng);
ModificationScript random_script(const Schema& schema, int n, int length, Rng& rng);

// No directed cycle (self-loops count as cycles).
bool relation_acyclic(const Relation& edges);

// Deterministic generator of small programs lying inside a pass guard.
// `key` is a pass id, or one of the fragment keys "UCQ" / "UCQNeg" for
// programs whose rule bodies stay inside that fragment.
ProgramPtr random_program(const std::string& key, std::uint64_t seed);

}  // namespace dyncq
