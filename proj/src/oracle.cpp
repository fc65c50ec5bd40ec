#include "dyncq/oracle.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyncq/classify.hpp"
#include "dyncq/errors.hpp"
#include "dyncq/eval.hpp"
#include "dyncq/normal_forms.hpp"
#include "dyncq/program_io.hpp"
#include "dyncq/transforms.hpp"

namespace dyncq {

Reference Reference::static_formula(FormulaPtr f) {
  Reference r;
  r.kind = Kind::StaticFormula;
  r.formula = std::move(f);
  return r;
}

Reference Reference::named_procedure(std::string name) {
  Reference r;
  r.kind = Kind::Procedure;
  r.procedure = std::move(name);
  return r;
}

Reference Reference::against(ProgramPtr p) {
  Reference r;
  r.kind = Kind::Program;
  r.program = std::move(p);
  return r;
}

namespace {

const Relation& single_relation(const std::map<std::string, Relation>& db,
                                const std::string& proc) {
  if (db.size() != 1)
    throw EvalError("procedure '" + proc + "' expects a database with exactly one relation");
  return db.begin()->second;
}

Relation closure(const Relation& edges, int n, bool reflexive) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (const auto& t : edges)
    if (t.size() == 2 && t[0] < n && t[1] < n) r[t[0]][t[1]] = true;
  if (reflexive)
    for (int i = 0; i < n; ++i) r[i][i] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (r[i][k])
        for (int j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  Relation out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (r[i][j]) out.insert({i, j});
  return out;
}

Relation max_outdegree_set(const Relation& edges, int n) {
  std::vector<int> deg(n, 0);
  for (const auto& t : edges)
    if (t.size() == 2 && t[0] < n) ++deg[t[0]];
  int best = 0;
  for (int d : deg) best = std::max(best, d);
  Relation out;
  for (int a = 0; a < n; ++a)
    if (deg[a] == best) out.insert({a});
  return out;
}

}  // namespace

Relation static_eval(const Reference& ref, const std::map<std::string, Relation>& db, int n) {
  switch (ref.kind) {
    case Reference::Kind::StaticFormula: {
      State st;
      st.n = n;
      st.input_db = db;
      auto fv = free_vars(ref.formula);
      std::vector<std::string> cols(fv.begin(), fv.end());
      return eval_to_relation(st, ref.formula, cols);
    }
    case Reference::Kind::Procedure: {
      const Relation& edges = single_relation(db, ref.procedure);
      if (ref.procedure == "reflexive-reachability") return closure(edges, n, true);
      if (ref.procedure == "reachability") return closure(edges, n, false);
      if (ref.procedure == "max-outdegree-set") return max_outdegree_set(edges, n);
      throw EvalError("unknown procedure '" + ref.procedure + "'");
    }
    case Reference::Kind::Program: {
      State st = initialize(*ref.program, db, n);
      return *st.find_relation(ref.program->query_symbol);
    }
  }
  throw EvalError("unhandled reference kind");
}

// ---------------------------------------------------------------------------
// enumeration and sampling
// ---------------------------------------------------------------------------

namespace {

struct Cell {
  std::string rel;
  Tuple tuple;
};

std::vector<Cell> all_cells(const Schema& schema, int n) {
  std::vector<Cell> cells;
  for (const auto& d : schema.input_relations)
    for (const auto& t : all_tuples(n, d.arity)) cells.push_back({d.name, t});
  return cells;
}

std::vector<Modification> all_modifications(const Schema& schema, int n) {
  std::vector<Modification> mods;
  for (ModKind kind : {ModKind::Ins, ModKind::Del})
    for (const auto& d : schema.input_relations)
      for (const auto& t : all_tuples(n, d.arity)) mods.push_back({kind, d.name, t});
  return mods;
}

std::map<std::string, Relation> empty_database(const Schema& schema) {
  std::map<std::string, Relation> db;
  for (const auto& d : schema.input_relations) db[d.name];
  return db;
}

bool closes_cycle(const Relation& edges, int a, int b) {
  if (a == b) return true;
  // inserting (a, b) closes a cycle iff b already reaches a
  std::set<int> seen{b};
  std::deque<int> work{b};
  while (!work.empty()) {
    int v = work.front();
    work.pop_front();
    if (v == a) return true;
    for (const auto& t : edges)
      if (t[0] == v && seen.insert(t[1]).second) work.push_back(t[1]);
  }
  return false;
}

}  // namespace

bool relation_acyclic(const Relation& edges) {
  for (const auto& t : edges)
    if (t.size() != 2) throw EvalError("acyclicity is defined for binary relations");
  std::set<int> nodes;
  for (const auto& t : edges) {
    nodes.insert(t[0]);
    nodes.insert(t[1]);
  }
  std::map<int, int> color;  // 0 new, 1 active, 2 done
  std::function<bool(int)> dfs = [&](int v) {
    color[v] = 1;
    for (const auto& t : edges) {
      if (t[0] != v) continue;
      int c = color[t[1]];
      if (c == 1) return false;
      if (c == 0 && !dfs(t[1])) return false;
    }
    color[v] = 2;
    return true;
  };
  for (int v : nodes)
    if (color[v] == 0 && !dfs(v)) return false;
  return true;
}

std::vector<std::map<std::string, Relation>> enumerate_databases(const Schema& schema, int n) {
  std::vector<Cell> cells = all_cells(schema, n);
  if (cells.size() > 20) throw LimitError("database enumeration too large");
  std::vector<std::map<std::string, Relation>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells.size()); ++mask) {
    std::map<std::string, Relation> db = empty_database(schema);
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) db[cells[i].rel].insert(cells[i].tuple);
    out.push_back(std::move(db));
  }
  return out;
}

std::vector<ModificationScript> enumerate_scripts(const Schema& schema, int n, int length) {
  if (length < 0 || length > 4) throw LimitError("script enumeration is limited to length 4");
  std::vector<Modification> mods = all_modifications(schema, n);
  double count = 1;
  for (int i = 0; i < length; ++i) count *= static_cast<double>(mods.size());
  if (count > 1'000'000) throw LimitError("script enumeration too large");
  std::vector<ModificationScript> out;
  ModificationScript cur;
  std::function<void(int)> go = [&](int left) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    for (const auto& m : mods) {
      cur.push_back(m);
      go(left - 1);
      cur.pop_back();
    }
  };
  go(length);
  return out;
}

std::map<std::string, Relation> random_database(const Schema& schema, int n, Rng& rng) {
  std::map<std::string, Relation> db = empty_database(schema);
  for (const auto& c : all_cells(schema, n))
    if (rng.flip()) db[c.rel].insert(c.tuple);
  return db;
}

ModificationScript random_script(const Schema& schema, int n, int length, Rng& rng) {
  std::vector<Modification> mods = all_modifications(schema, n);
  ModificationScript out;
  for (int i = 0; i < length; ++i) out.push_back(mods[rng.below(static_cast<int>(mods.size()))]);
  return out;
}

// ---------------------------------------------------------------------------
// differential harness
// ---------------------------------------------------------------------------

namespace {

constexpr long long kTreeNodeLimit = 5'000'000;

// One live run: the subject's state plus whatever the reference needs.
struct Instance {
  const DynamicProgram* subject = nullptr;
  const Reference* ref = nullptr;
  bool strict = false;
  int n = 0;
  State sub_state;
  State ref_state;                          // Program references
  std::map<std::string, Relation> cur_db;   // the evolving input database

  void init(const std::map<std::string, Relation>& db0) {
    cur_db = db0;
    sub_state = initialize(*subject, cur_db, n);
    if (ref->kind == Reference::Kind::Program) ref_state = initialize(*ref->program, cur_db, n);
  }

  void apply(const Modification& m) {
    sub_state = apply_modification(*subject, sub_state, m, strict);
    if (ref->kind == Reference::Kind::Program)
      ref_state = apply_modification(*ref->program, ref_state, m);
    apply_to_input_db(cur_db, m);
  }

  Relation expected_query() const {
    if (ref->kind == Reference::Kind::Program)
      return *ref_state.find_relation(ref->program->query_symbol);
    return static_eval(*ref, cur_db, n);
  }
};

Tuple first_difference(const Relation& expected, const Relation& got) {
  std::vector<Tuple> diff;
  std::set_symmetric_difference(expected.begin(), expected.end(), got.begin(), got.end(),
                                std::back_inserter(diff));
  return diff.empty() ? Tuple{} : diff.front();
}

struct Harness {
  const DynamicProgram& subject;
  const Reference& ref;
  const DiffConfig& cfg;
  VerifyReport report;
  std::vector<std::pair<std::string, std::string>> extra_pairs;  // subject aux, ref aux

  Harness(const DynamicProgram& s, const Reference& r, const DiffConfig& c)
      : subject(s), ref(r), cfg(c) {
    report.seed = cfg.seed;
    check_compatibility();
  }

  void check_compatibility() {
    int q_arity = *subject.schema.aux_arity(subject.query_symbol);
    switch (ref.kind) {
      case Reference::Kind::StaticFormula: {
        if (contains_function_terms(ref.formula))
          throw SchemaError("reference formula must be function-free");
        int k = static_cast<int>(free_vars(ref.formula).size());
        if (k != q_arity)
          throw SchemaError("reference formula has " + std::to_string(k) +
                            " free variables but the query has arity " + std::to_string(q_arity));
        break;
      }
      case Reference::Kind::Procedure: {
        int want = ref.procedure == "max-outdegree-set" ? 1 : 2;
        if (q_arity != want)
          throw SchemaError("procedure '" + ref.procedure + "' produces arity " +
                            std::to_string(want) + " but the query has arity " +
                            std::to_string(q_arity));
        break;
      }
      case Reference::Kind::Program: {
        int r_arity = *ref.program->schema.aux_arity(ref.program->query_symbol);
        if (q_arity != r_arity)
          throw SchemaError("query arities differ: " + std::to_string(q_arity) + " vs " +
                            std::to_string(r_arity));
        if (cfg.all_relations)
          for (const auto& d : subject.schema.aux_relations) {
            if (d.name == subject.query_symbol) continue;
            auto other = ref.program->schema.aux_arity(d.name);
            if (other && *other == d.arity) extra_pairs.push_back({d.name, d.name});
          }
        break;
      }
    }
    if (cfg.acyclic) {
      if (subject.schema.input_relations.size() != 1 ||
          subject.schema.input_relations[0].arity != 2)
        throw SchemaError("the acyclic constraint needs a single binary input relation");
    }
  }

  // Compares after the current prefix; fills the divergence on mismatch.
  bool compare(const Instance& inst, int domain,
               const std::map<std::string, Relation>& db0, const ModificationScript& prefix) {
    ++report.scripts;
    Relation expected = inst.expected_query();
    const Relation& got = *inst.sub_state.find_relation(subject.query_symbol);
    std::string bad_rel;
    Relation bad_expected, bad_got;
    if (expected != got) {
      bad_rel = subject.query_symbol;
      bad_expected = expected;
      bad_got = got;
    } else if (ref.kind == Reference::Kind::Program) {
      for (const auto& [mine, theirs] : extra_pairs) {
        const Relation& a = *inst.ref_state.find_relation(theirs);
        const Relation& b = *inst.sub_state.find_relation(mine);
        if (a != b) {
          bad_rel = mine;
          bad_expected = a;
          bad_got = b;
          break;
        }
      }
    }
    if (bad_rel.empty()) return true;
    Divergence d;
    d.domain = domain;
    d.db = db0;
    d.script = prefix;
    d.step = static_cast<int>(prefix.size());
    d.relation = bad_rel;
    d.expected = std::move(bad_expected);
    d.got = std::move(bad_got);
    d.tuple = first_difference(d.expected, d.got);
    report.pass = false;
    report.divergence = std::move(d);
    return false;
  }

  void record_abort(int domain, const std::map<std::string, Relation>& db0,
                    const ModificationScript& prefix, const std::string& what) {
    Divergence d;
    d.domain = domain;
    d.db = db0;
    d.script = prefix;
    d.step = static_cast<int>(prefix.size());
    d.note = what;
    report.pass = false;
    report.divergence = std::move(d);
  }

  const Relation& graph_of(const Instance& inst) const {
    return inst.cur_db.at(subject.schema.input_relations[0].name);
  }

  // Under the acyclic constraint scripts stay in the modification domain of
  // the acyclic-graph setting: insertions must not close a cycle (self-loops
  // included) and deletions must name a present edge.
  bool mod_allowed(const Instance& inst, const Modification& m) const {
    if (!cfg.acyclic) return true;
    const Relation& g = graph_of(inst);
    if (m.kind == ModKind::Del) return g.count(m.tuple) > 0;
    return !closes_cycle(g, m.tuple[0], m.tuple[1]);
  }

  void run_exhaustive() {
    long long nodes = 0;
    for (int n = cfg.min_domain; n <= cfg.max_domain && report.pass; ++n) {
      std::vector<Modification> mods = all_modifications(subject.schema, n);
      for (auto& db0 : enumerate_databases(subject.schema, n)) {
        if (!report.pass) break;
        if (cfg.acyclic && !relation_acyclic(db0.begin()->second)) continue;
        ++report.instances;
        Instance root;
        root.subject = &subject;
        root.ref = &ref;
        root.strict = cfg.strict;
        root.n = n;
        ModificationScript prefix;
        try {
          root.init(db0);
          if (!compare(root, n, db0, prefix)) break;
          std::function<void(const Instance&, int)> walk = [&](const Instance& inst,
                                                               int depth) {
            if (depth == cfg.max_steps || !report.pass) return;
            for (const auto& m : mods) {
              if (!report.pass) return;
              if (!mod_allowed(inst, m)) continue;
              if (++nodes > kTreeNodeLimit)
                throw LimitError("exhaustive script tree too large");
              Instance next = inst;
              prefix.push_back(m);
              next.apply(m);
              if (compare(next, n, db0, prefix)) walk(next, depth + 1);
              prefix.pop_back();
            }
          };
          walk(root, 0);
        } catch (const LimitError&) {
          throw;
        } catch (const Error& e) {
          record_abort(n, db0, prefix, e.what());
        }
      }
    }
  }

  void run_random() {
    Rng rng(cfg.seed);
    for (int run = 0; run < cfg.runs && report.pass; ++run) {
      int n = cfg.min_domain + rng.below(cfg.max_domain - cfg.min_domain + 1);
      std::map<std::string, Relation> db0 = random_database(subject.schema, n, rng);
      if (cfg.acyclic) {
        // keep tuples that leave the sampled graph acyclic, in tuple order
        Relation& edges = db0.begin()->second;
        Relation kept;
        for (const auto& t : edges)
          if (!closes_cycle(kept, t[0], t[1])) kept.insert(t);
        edges = std::move(kept);
      }
      ++report.instances;
      std::vector<Modification> mods = all_modifications(subject.schema, n);
      Instance inst;
      inst.subject = &subject;
      inst.ref = &ref;
      inst.strict = cfg.strict;
      inst.n = n;
      ModificationScript prefix;
      try {
        inst.init(db0);
        if (!compare(inst, n, db0, prefix)) break;
        for (int step = 0; step < cfg.max_steps; ++step) {
          std::vector<const Modification*> allowed;
          for (const auto& m : mods)
            if (mod_allowed(inst, m)) allowed.push_back(&m);
          if (allowed.empty()) break;
          Modification m = *allowed[rng.below(static_cast<int>(allowed.size()))];
          prefix.push_back(m);
          inst.apply(m);
          if (!compare(inst, n, db0, prefix)) break;
        }
      } catch (const Error& e) {
        record_abort(n, db0, prefix, e.what());
      }
    }
  }
};

}  // namespace

VerifyReport differential_check(const DynamicProgram& subject, const Reference& ref,
                                const DiffConfig& cfg) {
  Harness h(subject, ref, cfg);
  if (cfg.exhaustive)
    h.run_exhaustive();
  else
    h.run_random();
  return h.report;
}

std::string verify_report_json(const VerifyReport& report) {
  nlohmann::json j;
  j["pass"] = report.pass;
  j["instances"] = report.instances;
  j["scripts"] = report.scripts;
  j["seed"] = report.seed;
  j["generator"] = "mt19937-64";
  if (report.divergence) {
    const Divergence& d = *report.divergence;
    nlohmann::json jd;
    jd["domain"] = d.domain;
    nlohmann::json db = nlohmann::json::object();
    for (const auto& [name, rel] : d.db) db[name] = rel;
    jd["db"] = db;
    nlohmann::json script = nlohmann::json::array();
    for (const auto& m : d.script) script.push_back(modification_to_string(m));
    jd["script"] = script;
    jd["step"] = d.step;
    if (!d.note.empty()) {
      jd["note"] = d.note;
    } else {
      jd["relation"] = d.relation;
      jd["tuple"] = d.tuple;
      jd["expected"] = d.expected;
      jd["got"] = d.got;
    }
    j["divergence"] = jd;
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// seeded program generation
// ---------------------------------------------------------------------------

namespace {

// Random formulas over fixed variable pools. Bound variables are pushed onto
// the pool for the quantified subformula only.
struct FormulaGen {
  Rng& rng;
  std::vector<SymbolDecl> rels;
  std::vector<std::string> pool;
  bool quant = false;
  bool neg = true;
  bool eq = false;
  int next_bound = 0;

  FormulaPtr gen(int depth) {
    if (depth > 0) {
      int r = rng.below(quant ? 10 : 8);
      if (r >= 8) {
        std::string z = "z" + std::to_string(next_bound++);
        pool.push_back(z);
        FormulaPtr body = gen(depth - 1);
        pool.pop_back();
        return rng.flip() ? Formula::exists(z, std::move(body))
                          : Formula::forall(z, std::move(body));
      }
      if (r >= 6) return Formula::disj({gen(depth - 1), gen(depth - 1)});
      if (r >= 4) return Formula::conj({gen(depth - 1), gen(depth - 1)});
    }
    return literal();
  }

  FormulaPtr literal() {
    FormulaPtr a = atom();
    if (neg && rng.below(3) == 0) return Formula::negation(std::move(a));
    return a;
  }

  FormulaPtr atom() {
    if (eq && pool.size() >= 1 && rng.below(5) == 0)
      return Formula::eq(tvar(pick()), tvar(pick()));
    std::vector<const SymbolDecl*> usable;
    for (const auto& d : rels)
      if (d.arity == 0 || !pool.empty()) usable.push_back(&d);
    if (usable.empty()) return rng.flip() ? Formula::truth() : Formula::falsity();
    const SymbolDecl& d = *usable[rng.below(static_cast<int>(usable.size()))];
    std::vector<TermPtr> args;
    for (int i = 0; i < d.arity; ++i) args.push_back(tvar(pick()));
    return Formula::rel(d.name, std::move(args));
  }

  std::string pick() { return pool[rng.below(static_cast<int>(pool.size()))]; }
};

std::vector<std::string> numbered_vars(const std::string& stem, int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(stem + std::to_string(i + 1));
  return out;
}

std::vector<std::string> rule_pool(const Rule& shape) {
  std::vector<std::string> pool = shape.params;
  pool.insert(pool.end(), shape.targets.begin(), shape.targets.end());
  return pool;
}

InitSpecPtr random_init(Rng& rng, const std::vector<SymbolDecl>& inputs,
                        const std::vector<std::string>& cols, bool allow_eq) {
  if (rng.below(3) == 0) return InitSpec::empty();
  FormulaGen g{rng, inputs, cols};
  g.eq = allow_eq && !cols.empty();
  return InitSpec::from_formula(cols, g.gen(2));
}

// Free-form absolute programs: arbitrary first-order rule bodies.
DynamicProgram gen_abs_free(Rng& rng, bool prenex_bodies) {
  DynamicProgram p;
  p.dialect = Dialect::Absolute;
  int nin = 1 + rng.below(2);
  static const char* in_names[2] = {"E", "F"};
  for (int i = 0; i < nin; ++i) p.schema.input_relations.push_back({in_names[i], rng.below(3)});
  int naux = 1 + rng.below(2);
  static const char* aux_names[2] = {"R", "S"};
  for (int i = 0; i < naux; ++i) p.schema.aux_relations.push_back({aux_names[i], rng.below(3)});
  p.query_symbol = p.schema.aux_relations[rng.below(naux)].name;

  std::vector<SymbolDecl> atoms = p.schema.input_relations;
  atoms.insert(atoms.end(), p.schema.aux_relations.begin(), p.schema.aux_relations.end());
  for (const auto& d : p.schema.aux_relations) {
    std::vector<std::string> cols = numbered_vars("x", d.arity);
    p.inits[d.name] = random_init(rng, p.schema.input_relations, cols, true);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      Rule r;
      r.params = numbered_vars("u", *p.schema.input_arity(key.rel));
      r.targets = cols;
      FormulaGen g{rng, atoms, rule_pool(r)};
      g.eq = !rule_pool(r).empty();
      if (prenex_bodies) {
        int q = rng.below(3);
        std::vector<std::pair<bool, std::string>> prefix;
        for (int i = 0; i < q; ++i) {
          std::string z = "z" + std::to_string(g.next_bound++);
          prefix.push_back({rng.flip(), z});
          g.pool.push_back(z);
        }
        FormulaPtr body = g.gen(2);
        for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
          body = it->first ? Formula::exists(it->second, std::move(body))
                           : Formula::forall(it->second, std::move(body));
        r.formula = std::move(body);
      } else {
        g.quant = true;
        r.formula = g.gen(3);
      }
      p.rules[key] = std::move(r);
    }
  }
  return p;
}

// Delta programs with free-form add/remove parts.
DynamicProgram gen_delta_free(Rng& rng) {
  DynamicProgram p;
  p.dialect = Dialect::Delta;
  int nin = 1 + rng.below(2);
  static const char* in_names[2] = {"E", "F"};
  for (int i = 0; i < nin; ++i) p.schema.input_relations.push_back({in_names[i], rng.below(3)});
  int naux = 1 + rng.below(2);
  static const char* aux_names[2] = {"R", "S"};
  for (int i = 0; i < naux; ++i) p.schema.aux_relations.push_back({aux_names[i], rng.below(3)});
  p.query_symbol = p.schema.aux_relations[rng.below(naux)].name;

  std::vector<SymbolDecl> atoms = p.schema.input_relations;
  atoms.insert(atoms.end(), p.schema.aux_relations.begin(), p.schema.aux_relations.end());
  for (const auto& d : p.schema.aux_relations) {
    std::vector<std::string> cols = numbered_vars("x", d.arity);
    p.inits[d.name] = random_init(rng, p.schema.input_relations, cols, true);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      DeltaRule r;
      r.params = numbered_vars("u", *p.schema.input_arity(key.rel));
      r.targets = cols;
      FormulaGen g{rng, atoms, rule_pool({r.params, r.targets, nullptr})};
      g.quant = true;
      g.eq = !g.pool.empty();
      r.add = g.gen(2);
      r.remove = g.gen(2);
      p.delta_rules[key] = std::move(r);
    }
  }
  return p;
}

// Quantifier-free absolute programs over low arities (complement/CNF food).
DynamicProgram gen_abs_qf(Rng& rng) {
  DynamicProgram p;
  p.dialect = Dialect::Absolute;
  int nin = 1 + rng.below(2);
  static const char* in_names[2] = {"E", "F"};
  for (int i = 0; i < nin; ++i) p.schema.input_relations.push_back({in_names[i], rng.below(2)});
  int naux = 1 + rng.below(2);
  static const char* aux_names[2] = {"R", "S"};
  for (int i = 0; i < naux; ++i) p.schema.aux_relations.push_back({aux_names[i], rng.below(2)});
  p.query_symbol = p.schema.aux_relations[rng.below(naux)].name;

  std::vector<SymbolDecl> atoms = p.schema.input_relations;
  atoms.insert(atoms.end(), p.schema.aux_relations.begin(), p.schema.aux_relations.end());
  for (const auto& d : p.schema.aux_relations) {
    std::vector<std::string> cols = numbered_vars("x", d.arity);
    p.inits[d.name] = random_init(rng, p.schema.input_relations, cols, false);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      Rule r;
      r.params = numbered_vars("u", *p.schema.input_arity(key.rel));
      r.targets = cols;
      FormulaGen g{rng, atoms, rule_pool(r)};
      r.formula = g.gen(2);
      p.rules[key] = std::move(r);
    }
  }
  return p;
}

// Nullary programs, no equality: inputs are switches, rules propositional.
DynamicProgram gen_nullary(Rng& rng, Dialect dialect) {
  DynamicProgram p;
  p.dialect = dialect;
  int nin = 1 + rng.below(3);
  static const char* in_names[3] = {"A", "B", "C"};
  for (int i = 0; i < nin; ++i) p.schema.input_relations.push_back({in_names[i], 0});
  int naux = 1 + rng.below(2);
  static const char* aux_names[2] = {"R", "S"};
  for (int i = 0; i < naux; ++i) p.schema.aux_relations.push_back({aux_names[i], 0});
  p.query_symbol = p.schema.aux_relations[rng.below(naux)].name;

  std::vector<SymbolDecl> atoms = p.schema.input_relations;
  atoms.insert(atoms.end(), p.schema.aux_relations.begin(), p.schema.aux_relations.end());
  for (const auto& d : p.schema.aux_relations) {
    if (rng.below(3) == 0) {
      p.inits[d.name] = InitSpec::empty();
    } else {
      FormulaGen g{rng, p.schema.input_relations, {}};
      p.inits[d.name] = InitSpec::from_formula({}, g.gen(2));
    }
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      FormulaGen g{rng, atoms, {}};
      if (dialect == Dialect::Delta) {
        DeltaRule r;
        r.add = g.gen(2);
        r.remove = g.gen(2);
        p.delta_rules[key] = std::move(r);
      } else {
        Rule r;
        r.formula = g.gen(2);
        p.rules[key] = std::move(r);
      }
    }
  }
  return p;
}

// Propositional trees over nullary input atoms.
enum class BitShape { Monotone, Literals, AnyProp };

FormulaPtr gen_bit_formula(Rng& rng, const std::vector<SymbolDecl>& inputs, BitShape shape,
                           int depth) {
  if (depth == 0 || rng.below(3) == 0) {
    FormulaPtr a = Formula::rel(inputs[rng.below(static_cast<int>(inputs.size()))].name, {});
    if (shape != BitShape::Monotone && rng.below(3) == 0) return Formula::negation(std::move(a));
    return a;
  }
  if (shape == BitShape::AnyProp && rng.below(5) == 0)
    return Formula::negation(gen_bit_formula(rng, inputs, shape, depth - 1));
  FormulaPtr l = gen_bit_formula(rng, inputs, shape, depth - 1);
  FormulaPtr r = gen_bit_formula(rng, inputs, shape, depth - 1);
  return rng.flip() ? Formula::conj({std::move(l), std::move(r)})
                    : Formula::disj({std::move(l), std::move(r)});
}

// Substitutes the known post-state value of a nullary input atom.
FormulaPtr substitute_effect(const FormulaPtr& f, const std::string& rel, ModKind kind) {
  return rewrite_atoms(f, [&](const std::string& sym, const std::vector<TermPtr>&) -> FormulaPtr {
    if (sym != rel) return nullptr;
    return kind == ModKind::Ins ? Formula::truth() : Formula::falsity();
  });
}

// Each auxiliary bit tracks a fixed propositional function of the input
// switches, so the query is determined by which inputs are nonempty at every
// domain size; that keeps the programs inside the disjunction-removal guards.
DynamicProgram gen_bits(Rng& rng, BitShape shape, Dialect dialect) {
  DynamicProgram p;
  p.dialect = dialect;
  int nin = 1 + rng.below(2);
  static const char* in_names[2] = {"U", "W"};
  for (int i = 0; i < nin; ++i) p.schema.input_relations.push_back({in_names[i], 0});
  int naux = 1 + rng.below(2);
  static const char* aux_names[2] = {"R", "S"};
  for (int i = 0; i < naux; ++i) p.schema.aux_relations.push_back({aux_names[i], 0});
  p.query_symbol = p.schema.aux_relations[rng.below(naux)].name;

  for (const auto& d : p.schema.aux_relations) {
    FormulaPtr psi = gen_bit_formula(rng, p.schema.input_relations, shape, 2);
    p.inits[d.name] = InitSpec::from_formula({}, psi);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      if (dialect == Dialect::Delta) {
        DeltaRule r;
        r.add = substitute_effect(psi, key.rel, key.kind);
        r.remove = substitute_effect(negate_nnf(psi), key.rel, key.kind);
        p.delta_rules[key] = std::move(r);
      } else {
        Rule r;
        r.formula = substitute_effect(psi, key.rel, key.kind);
        p.rules[key] = std::move(r);
      }
    }
  }
  return p;
}

// QF-dialect programs with functions, if-then-else terms, and NNF rule bodies.
DynamicProgram gen_qf(Rng& rng) {
  DynamicProgram p;
  p.dialect = Dialect::QF;
  p.schema.input_relations.push_back({"E", 1 + rng.below(2)});
  int naux = 1 + rng.below(2);
  static const char* aux_names[2] = {"R", "S"};
  for (int i = 0; i < naux; ++i) p.schema.aux_relations.push_back({aux_names[i], rng.below(2)});
  p.schema.aux_functions.push_back({"f", 1});
  p.query_symbol = p.schema.aux_relations[rng.below(naux)].name;
  p.fn_inits["f"] = FnInitSpec{rng.flip() ? "succ-sat" : "zero"};

  auto term = [&](const std::vector<std::string>& pool, auto&& self, int depth) -> TermPtr {
    int r = rng.below(depth > 0 ? 6 : 3);
    TermPtr v = tvar(pool[rng.below(static_cast<int>(pool.size()))]);
    if (r < 3) return v;
    if (r < 5) return Term::fn("f", {std::move(v)});
    FormulaPtr cond = Formula::rel("R", std::vector<TermPtr>(
                                            p.schema.aux_relations[0].arity, tvar(pool[0])));
    return Term::ite(std::move(cond), self(pool, self, depth - 1), self(pool, self, depth - 1));
  };
  auto literal = [&](const std::vector<std::string>& pool) -> FormulaPtr {
    FormulaPtr a;
    int r = rng.below(4);
    if (r == 0) {
      a = Formula::eq(term(pool, term, 1), term(pool, term, 1));
    } else {
      const SymbolDecl& d = rng.flip() ? p.schema.input_relations[0]
                                       : p.schema.aux_relations[rng.below(naux)];
      std::vector<TermPtr> args;
      for (int i = 0; i < d.arity; ++i) args.push_back(term(pool, term, 1));
      a = Formula::rel(d.name, std::move(args));
    }
    if (rng.below(3) == 0) return Formula::negation(std::move(a));
    return a;
  };
  auto body = [&](const std::vector<std::string>& pool, int depth) {
    std::function<FormulaPtr(int)> go = [&](int d) -> FormulaPtr {
      if (d == 0 || rng.below(3) == 0) return literal(pool);
      FormulaPtr l = go(d - 1), r = go(d - 1);
      return rng.flip() ? Formula::conj({std::move(l), std::move(r)})
                        : Formula::disj({std::move(l), std::move(r)});
    };
    return go(depth);
  };

  for (const auto& d : p.schema.aux_relations) {
    std::vector<std::string> cols = numbered_vars("x", d.arity);
    p.inits[d.name] = random_init(rng, p.schema.input_relations, cols, false);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      Rule r;
      r.params = numbered_vars("u", *p.schema.input_arity(key.rel));
      r.targets = cols;
      std::vector<std::string> pool = rule_pool(r);
      if (pool.empty()) pool.push_back("u1");  // unreachable: E has arity >= 1
      r.formula = body(pool, 2);
      p.rules[key] = std::move(r);
    }
  }
  for (const auto& key : rule_keys_for(p.schema, "f")) {
    FnRule fr;
    fr.params = numbered_vars("u", *p.schema.input_arity(key.rel));
    fr.args = {"a1"};
    std::vector<std::string> pool = fr.params;
    pool.push_back("a1");
    fr.term = term(pool, term, 2);
    p.fn_rules[key] = std::move(fr);
  }
  return p;
}

// Absolute programs whose rule bodies are unions of conjunctive queries
// (optionally with negated atoms), used directly by fragment-keyed callers.
DynamicProgram gen_frag(Rng& rng, bool with_negation) {
  DynamicProgram p;
  p.dialect = Dialect::Absolute;
  int nin = 1 + rng.below(2);
  static const char* in_names[2] = {"E", "F"};
  for (int i = 0; i < nin; ++i)
    p.schema.input_relations.push_back({in_names[i], 1 + rng.below(2)});
  int naux = 1 + rng.below(2);
  static const char* aux_names[2] = {"R", "S"};
  for (int i = 0; i < naux; ++i) p.schema.aux_relations.push_back({aux_names[i], rng.below(2)});
  p.query_symbol = p.schema.aux_relations[rng.below(naux)].name;

  std::vector<SymbolDecl> atoms = p.schema.input_relations;
  atoms.insert(atoms.end(), p.schema.aux_relations.begin(), p.schema.aux_relations.end());
  auto cq = [&](const std::vector<std::string>& pool) -> FormulaPtr {
    std::vector<std::string> vars = pool;
    bool bound = rng.flip();
    if (bound) vars.push_back("z1");
    std::vector<FormulaPtr> lits;
    int count = 1 + rng.below(2);
    for (int i = 0; i < count; ++i) {
      const SymbolDecl& d = atoms[rng.below(static_cast<int>(atoms.size()))];
      std::vector<TermPtr> args;
      for (int a = 0; a < d.arity; ++a) args.push_back(tvar(vars[rng.below((int)vars.size())]));
      FormulaPtr atom = Formula::rel(d.name, std::move(args));
      if (with_negation && rng.below(3) == 0) atom = Formula::negation(std::move(atom));
      lits.push_back(std::move(atom));
    }
    FormulaPtr out = Formula::conj(std::move(lits));
    if (bound) out = Formula::exists("z1", std::move(out));
    return out;
  };

  for (const auto& d : p.schema.aux_relations) {
    std::vector<std::string> cols = numbered_vars("x", d.arity);
    p.inits[d.name] = random_init(rng, p.schema.input_relations, cols, false);
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      Rule r;
      r.params = numbered_vars("u", *p.schema.input_arity(key.rel));
      r.targets = cols;
      std::vector<std::string> pool = rule_pool(r);
      if (pool.empty()) {
        r.formula = cq({"z2"});
        r.formula = Formula::exists("z2", r.formula);
      } else {
        std::vector<FormulaPtr> parts;
        int disjuncts = 1 + rng.below(2);
        for (int i = 0; i < disjuncts; ++i) parts.push_back(cq(pool));
        r.formula = Formula::disj(std::move(parts));
      }
      p.rules[key] = std::move(r);
    }
  }
  return p;
}

DynamicProgram build_candidate(const std::string& key, std::uint64_t seed) {
  Rng rng(seed);
  if (key == "make-query-atomic" || key == "add-complements" || key == "abs-to-delta")
    return gen_abs_free(rng, false);
  if (key == "switch-quantifiers" || key == "qfo-to-delta-qfo") return gen_abs_free(rng, true);
  if (key == "prop-to-propcqneg") return gen_abs_qf(rng);
  if (key == "nullary-propcq") return gen_nullary(rng, Dialect::Absolute);
  if (key == "delta-nullary-propcq") return gen_nullary(rng, Dialect::Delta);
  if (key == "remove-disjunction-ucq") return gen_bits(rng, BitShape::Monotone, Dialect::Absolute);
  if (key == "remove-disjunction-ucqneg")
    return gen_bits(rng, BitShape::Literals, Dialect::Absolute);
  if (key == "remove-disjunction-fo") return gen_bits(rng, BitShape::AnyProp, Dialect::Absolute);
  if (key == "delta-ucqneg-to-ucqneg" || key == "delta-remove-disjunction")
    return gen_bits(rng, BitShape::Literals, Dialect::Delta);
  if (key == "delta-to-abs" || key == "delta-remove-negation") return gen_delta_free(rng);
  if (key == "qf-to-ucq") return gen_qf(rng);
  if (key == "UCQ") return gen_frag(rng, false);
  if (key == "UCQNeg") return gen_frag(rng, true);
  throw Error("unknown program generator '" + key + "'");
}

}  // namespace

ProgramPtr random_program(const std::string& key, std::uint64_t seed) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt);
    DynamicProgram cand = build_candidate(key, s);
    cand.validate();
    auto prog = std::make_shared<const DynamicProgram>(std::move(cand));
    if (is_pass_id(key)) {
      try {
        apply_pass(key, prog);
      } catch (const GuardError&) {
        continue;
      }
    }
    return prog;
  }
  throw Error("program generator for '" + key + "' kept violating the guard");
}

}  // namespace dyncq
