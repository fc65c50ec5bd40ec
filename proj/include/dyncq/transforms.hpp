#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dyncq/classify.hpp"
#include "dyncq/program.hpp"

namespace dyncq {

// One row per emitted update formula (or per structural obligation). `where`
// names the rule part for delta programs ("add"/"remove"); empty otherwise.
struct RuleCertificate {
  std::string aux;
  std::string trigger;
  std::string where;
  std::string check;
  bool ok = true;
};

struct PassReport {
  std::string pass;
  // Total on the input aux schema. Empty value means the symbol has no
  // carrier in the output (its content is not represented by any single
  // output relation).
  std::map<std::string, std::string> symbol_map;
  // Role -> minted name, in minting order. Names are pairwise distinct and
  // distinct from every symbol of the input program.
  std::vector<std::pair<std::string, std::string>> fresh_names;
  std::vector<RuleCertificate> certificates;

  bool all_ok() const;
};

struct PassResult {
  ProgramPtr program;
  PassReport report;
};

// Pass ids accepted by apply_pass, in canonical order.
const std::vector<std::string>& pass_ids();
bool is_pass_id(const std::string& id);
PassResult apply_pass(const std::string& id, const ProgramPtr& p);

PassResult make_query_atomic(const ProgramPtr& p);
PassResult add_complements(const ProgramPtr& p);
PassResult prop_to_propcqneg(const ProgramPtr& p);
PassResult remove_disjunction_ucqneg(const ProgramPtr& p);
PassResult remove_disjunction_ucq(const ProgramPtr& p);
PassResult remove_disjunction_fo(const ProgramPtr& p);
PassResult nullary_propcq(const ProgramPtr& p);
PassResult switch_quantifiers(const ProgramPtr& p);
PassResult qf_to_ucq(const ProgramPtr& p);
PassResult abs_to_delta(const ProgramPtr& p);
PassResult delta_to_abs(const ProgramPtr& p);
PassResult delta_remove_negation(const ProgramPtr& p);
PassResult qfo_to_delta_qfo(const ProgramPtr& p);
PassResult delta_ucqneg_to_ucqneg(const ProgramPtr& p);
PassResult delta_remove_disjunction(const ProgramPtr& p);
PassResult delta_nullary_propcq(const ProgramPtr& p);

// The family of all Boolean queries over k nullary input relations
// (k in 1..3). One relation per truth table; query_names[j] maintains the
// table whose row r (bit vector over the inputs, sorted by name, input l
// contributing 2^l) is bit r of j. The program's own query symbol is the
// all-true table. Dialect Absolute or Delta.
struct NullaryFamily {
  ProgramPtr program;
  std::vector<std::string> query_names;
};
NullaryFamily nullary_family(int k, Dialect dialect);

// JSON rendering of a report (used by the CLI --report option).
std::string pass_report_json(const PassReport& rep);

}  // namespace dyncq
