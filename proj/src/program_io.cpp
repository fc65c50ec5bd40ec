#include "dyncq/program_io.hpp"

#include <fstream>
#include <sstream>

#include "dyncq/errors.hpp"
#include "dyncq/parser.hpp"
#include "json.hpp"

namespace dyncq {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '$' || c == '#';
}

struct Line {
  int number;
  std::string text;
};

std::vector<Line> logical_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string t = trim(raw);
    if (t.empty() || t[0] == '#') continue;
    out.push_back({number, t});
  }
  return out;
}

// Single-line cursor for the program file syntax. Formula and term tails are
// cut out as substrings and handed to the formula parser.
struct Cursor {
  const std::string& s;
  size_t pos = 0;
  int line;

  Cursor(const std::string& text, int line_) : s(text), line(line_) {}

  void ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool at_end() {
    ws();
    return pos >= s.size();
  }
  char peek() {
    ws();
    return pos < s.size() ? s[pos] : '\0';
  }
  void expect(char c, const std::string& what) {
    if (peek() != c) throw ParseError("expected '" + std::string(1, c) + "' " + what, line);
    ++pos;
  }
  std::string word(const std::string& what) {
    ws();
    size_t start = pos;
    while (pos < s.size() && is_ident_char(s[pos])) ++pos;
    if (pos == start) throw ParseError("expected " + what, line);
    return s.substr(start, pos - start);
  }
  void expect_assign() {
    ws();
    if (pos + 1 >= s.size() || s[pos] != ':' || s[pos + 1] != '=') {
      throw ParseError("expected ':='", line);
    }
    pos += 2;
  }
  std::vector<std::string> opt_paren_names() {
    std::vector<std::string> names;
    if (peek() != '(') return names;
    ++pos;
    if (peek() == ')') {
      ++pos;
      return names;
    }
    for (;;) {
      names.push_back(word("a variable name"));
      char c = peek();
      if (c == ',') {
        ++pos;
        continue;
      }
      expect(')', "after the variable list");
      return names;
    }
  }
  std::string rest() {
    ws();
    std::string out = trim(s.substr(pos));
    pos = s.size();
    return out;
  }
  std::string until_closing_brace() {
    ws();
    size_t close = s.find('}', pos);
    if (close == std::string::npos) throw ParseError("expected '}'", line);
    std::string out = trim(s.substr(pos, close - pos));
    pos = close;
    return out;
  }
  void expect_end() {
    if (!at_end()) throw ParseError("trailing text '" + trim(s.substr(pos)) + "'", line);
  }
};

FormulaPtr parse_formula_at(const std::string& text, const Schema& schema, int line) {
  try {
    return parse_formula(text, schema);
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + ", in program line " + std::to_string(line));
  }
}

TermPtr parse_term_at(const std::string& text, const Schema& schema, int line) {
  try {
    return parse_term(text, schema);
  } catch (const ParseError& e) {
    throw ParseError(std::string(e.what()) + ", in program line " + std::to_string(line));
  }
}

// Dashes are not identifier characters, so procedure names are re-assembled
// from dash-separated words.
std::string parse_proc_name(Cursor& c) {
  std::string proc = c.word("a procedure name");
  while (c.peek() == '-') {
    ++c.pos;
    proc += "-" + c.word("a procedure name");
  }
  return proc;
}

InitSpecPtr parse_init_spec(Cursor& c, const Schema& schema, bool in_braces) {
  std::string head = c.word("an init spec");
  if (head == "empty") return InitSpec::empty();
  if (head == "full") return InitSpec::full();
  if (head == "proc") return InitSpec::procedure(parse_proc_name(c));
  if (head == "formula" || head == "evalinit") {
    if (c.peek() != '(') throw ParseError("expected '(' after '" + head + "'", c.line);
    std::vector<std::string> vars = c.opt_paren_names();
    std::string text = in_braces ? c.until_closing_brace() : c.rest();
    if (text.empty()) throw ParseError("missing init formula", c.line);
    FormulaPtr f = parse_formula_at(text, schema, c.line);
    return head == "formula" ? InitSpec::from_formula(std::move(vars), std::move(f))
                             : InitSpec::eval_on_init(std::move(vars), std::move(f));
  }
  if (head == "complement") return InitSpec::complement_of(parse_init_spec(c, schema, in_braces));
  if (head == "tagged") {
    std::string mode = c.word("'padded' or 'plain'");
    if (mode != "padded" && mode != "plain") {
      throw ParseError("expected 'padded' or 'plain' after 'tagged'", c.line);
    }
    return InitSpec::tagged(mode == "padded", parse_init_spec(c, schema, in_braces));
  }
  if (head == "onestep") {
    std::string base = c.word("a base program name");
    std::string symbol = c.word("a relation name");
    ModKind kind = modkind_from_name(c.word("'ins' or 'del'"));
    std::string rel = c.word("an input relation name");
    return InitSpec::one_step(std::move(base), std::move(symbol), kind, std::move(rel));
  }
  if (head == "size1") {
    c.expect('{', "after 'size1'");
    InitSpecPtr one = parse_init_spec(c, schema, true);
    c.expect('}', "after the size-1 spec");
    if (c.word("'else'") != "else") throw ParseError("expected 'else'", c.line);
    c.expect('{', "after 'else'");
    InitSpecPtr many = parse_init_spec(c, schema, true);
    c.expect('}', "after the else spec");
    return InitSpec::size_dispatch(std::move(one), std::move(many));
  }
  if (head == "fngraph") return InitSpec::fn_graph(parse_proc_name(c));
  if (head == "nonempty") {
    std::string ar = c.word("an arity");
    int inner_arity;
    try {
      inner_arity = std::stoi(ar);
    } catch (...) {
      throw ParseError("bad arity '" + ar + "' after 'nonempty'", c.line);
    }
    return InitSpec::nonempty_of(inner_arity, parse_init_spec(c, schema, in_braces));
  }
  throw ParseError("unknown init spec '" + head + "'", c.line);
}

ProgramPtr parse_block(const std::vector<Line>& lines);

size_t collect_base_block(const std::vector<Line>& lines, size_t start, std::vector<Line>& inner) {
  int depth = 1;
  size_t i = start;
  for (; i < lines.size(); ++i) {
    const std::string& t = lines[i].text;
    if (t == "}") {
      if (--depth == 0) return i + 1;
    } else if (t.rfind("base ", 0) == 0 && t.back() == '{') {
      ++depth;
    }
    inner.push_back(lines[i]);
  }
  throw ParseError("unterminated base block", lines[start - 1].number);
}

ProgramPtr parse_block(const std::vector<Line>& lines) {
  auto p = std::make_shared<DynamicProgram>();
  bool have_dialect = false;
  std::vector<Line> deferred;  // init and rule lines, parsed once the schema is known

  size_t i = 0;
  while (i < lines.size()) {
    const Line& ln = lines[i];
    Cursor c(ln.text, ln.number);
    std::string head = c.word("a program line");
    if (head == "dialect") {
      if (have_dialect) throw ParseError("duplicate dialect line", ln.number);
      p->dialect = dialect_from_name(c.word("a dialect name"));
      have_dialect = true;
      c.expect_end();
      ++i;
    } else if (head == "input" || head == "aux" || head == "fn") {
      std::string name = c.word("a symbol name");
      c.expect('/', "after the symbol name");
      std::string ar = c.word("an arity");
      int arity;
      try {
        arity = std::stoi(ar);
      } catch (...) {
        throw ParseError("bad arity '" + ar + "'", ln.number);
      }
      SymbolDecl decl{name, arity};
      if (head == "input") {
        p->schema.input_relations.push_back(decl);
      } else if (head == "fn") {
        p->schema.aux_functions.push_back(decl);
      } else {
        p->schema.aux_relations.push_back(decl);
        if (!c.at_end()) {
          if (c.word("'query'") != "query") throw ParseError("expected 'query'", ln.number);
          if (!p->query_symbol.empty()) throw ParseError("duplicate query marker", ln.number);
          p->query_symbol = name;
        }
      }
      c.expect_end();
      ++i;
    } else if (head == "base") {
      std::string name = c.word("a base program name");
      c.expect('{', "after the base name");
      c.expect_end();
      std::vector<Line> inner;
      i = collect_base_block(lines, i + 1, inner);
      p->bases.emplace_back(name, parse_block(inner));
    } else if (head == "init" || head == "on") {
      deferred.push_back(ln);
      ++i;
    } else {
      throw ParseError("unknown program line '" + head + "'", ln.number);
    }
  }
  if (!have_dialect) throw ParseError("missing dialect line");
  if (p->query_symbol.empty()) throw ParseError("no auxiliary relation is marked as the query");

  for (const Line& ln : deferred) {
    Cursor c(ln.text, ln.number);
    std::string head = c.word("a program line");
    if (head == "init") {
      std::string name = c.word("a symbol name");
      c.expect_assign();
      if (p->schema.is_fn(name)) {
        if (c.word("'fnproc'") != "fnproc") {
          throw ParseError("function inits use 'fnproc <name>'", ln.number);
        }
        p->fn_inits[name] = FnInitSpec{parse_proc_name(c)};
      } else {
        p->inits[name] = parse_init_spec(c, p->schema, false);
      }
      c.expect_end();
    } else {
      ModKind kind = modkind_from_name(c.word("'ins' or 'del'"));
      std::string rel = c.word("an input relation name");
      std::vector<std::string> params = c.opt_paren_names();
      std::string verb = c.word("'set', 'add', 'remove', or 'setfn'");
      std::string target = c.word("a symbol name");
      std::vector<std::string> targets = c.opt_paren_names();
      c.expect_assign();
      RuleKey key{target, kind, rel};
      if (verb == "setfn") {
        TermPtr term = parse_term_at(c.rest(), p->schema, ln.number);
        if (p->fn_rules.count(key)) throw ParseError("duplicate rule for " + target, ln.number);
        p->fn_rules[key] = FnRule{std::move(params), std::move(targets), std::move(term)};
        continue;
      }
      FormulaPtr f = parse_formula_at(c.rest(), p->schema, ln.number);
      if (verb == "set") {
        if (p->rules.count(key)) throw ParseError("duplicate rule for " + target, ln.number);
        p->rules[key] = Rule{std::move(params), std::move(targets), std::move(f)};
      } else if (verb == "add" || verb == "remove") {
        DeltaRule& r = p->delta_rules[key];
        FormulaPtr& slot = verb == "add" ? r.add : r.remove;
        if (slot) throw ParseError("duplicate " + verb + " rule for " + target, ln.number);
        if (r.add || r.remove) {
          if (r.params != params || r.targets != targets) {
            throw ParseError("add/remove rules for " + target + " under " + modkind_name(kind) +
                                 " " + rel + " must use the same variables",
                             ln.number);
          }
        } else {
          r.params = std::move(params);
          r.targets = std::move(targets);
        }
        slot = std::move(f);
      } else {
        throw ParseError("unknown rule verb '" + verb + "'", ln.number);
      }
    }
  }

  for (const auto& [key, r] : p->delta_rules) {
    if (!r.add || !r.remove) {
      throw ParseError("delta rule for " + key.aux + " under " + modkind_name(key.kind) + " " +
                       key.rel + " is missing its " + (r.add ? "remove" : "add") + " half");
    }
  }
  return p;
}

void print_init_spec(std::ostream& out, const InitSpecPtr& spec) {
  switch (spec->kind) {
    case InitSpec::Kind::Empty:
      out << "empty";
      return;
    case InitSpec::Kind::Full:
      out << "full";
      return;
    case InitSpec::Kind::Formula:
    case InitSpec::Kind::EvalOnInit: {
      out << (spec->kind == InitSpec::Kind::Formula ? "formula(" : "evalinit(");
      for (size_t i = 0; i < spec->vars.size(); ++i) {
        if (i) out << ", ";
        out << spec->vars[i];
      }
      out << ") " << print(spec->formula);
      return;
    }
    case InitSpec::Kind::ComplementOf:
      out << "complement ";
      print_init_spec(out, spec->inner);
      return;
    case InitSpec::Kind::Proc:
      out << "proc " << spec->proc;
      return;
    case InitSpec::Kind::OneStep:
      out << "onestep " << spec->base << " " << spec->symbol << " " << modkind_name(spec->mod_kind)
          << " " << spec->rel;
      return;
    case InitSpec::Kind::Tagged:
      out << "tagged " << (spec->padded ? "padded" : "plain") << " ";
      print_init_spec(out, spec->inner);
      return;
    case InitSpec::Kind::SizeDispatch:
      out << "size1 { ";
      print_init_spec(out, spec->inner);
      out << " } else { ";
      print_init_spec(out, spec->inner2);
      out << " }";
      return;
    case InitSpec::Kind::FnGraph:
      out << "fngraph " << spec->proc;
      return;
    case InitSpec::Kind::NonEmptyOf:
      out << "nonempty " << spec->inner_arity << " ";
      print_init_spec(out, spec->inner);
      return;
  }
}

void print_tuple_vars(std::ostream& out, const std::string& sym, const std::vector<std::string>& vars) {
  out << sym << "(";
  for (size_t i = 0; i < vars.size(); ++i) {
    if (i) out << ", ";
    out << vars[i];
  }
  out << ")";
}

}  // namespace

ProgramPtr parse_program(const std::string& text) {
  return parse_block(logical_lines(text));
}

std::string print_program(const DynamicProgram& p) {
  std::ostringstream out;
  out << "dialect " << dialect_name(p.dialect) << "\n";
  for (const auto& d : p.schema.input_relations) out << "input " << d.name << "/" << d.arity << "\n";
  for (const auto& d : p.schema.aux_relations) {
    out << "aux " << d.name << "/" << d.arity;
    if (d.name == p.query_symbol) out << " query";
    out << "\n";
  }
  for (const auto& d : p.schema.aux_functions) out << "fn " << d.name << "/" << d.arity << "\n";
  for (const auto& [name, base] : p.bases) {
    out << "base " << name << " {\n";
    std::istringstream inner(print_program(*base));
    std::string line;
    while (std::getline(inner, line)) out << "  " << line << "\n";
    out << "}\n";
  }
  for (const auto& d : p.schema.aux_relations) {
    out << "init " << d.name << " := ";
    print_init_spec(out, p.init_for(d.name));
    out << "\n";
  }
  for (const auto& d : p.schema.aux_functions) {
    out << "init " << d.name << " := fnproc " << p.fn_init_for(d.name).proc << "\n";
  }
  for (const auto& d : p.schema.aux_relations) {
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      if (p.dialect == Dialect::Delta) {
        const DeltaRule& r = p.delta_rule(key.aux, key.kind, key.rel);
        for (bool add : {true, false}) {
          out << "on " << modkind_name(key.kind) << " ";
          print_tuple_vars(out, key.rel, r.params);
          out << (add ? " add " : " remove ");
          print_tuple_vars(out, key.aux, r.targets);
          out << " := " << print(add ? r.add : r.remove) << "\n";
        }
      } else {
        const Rule& r = p.rule(key.aux, key.kind, key.rel);
        out << "on " << modkind_name(key.kind) << " ";
        print_tuple_vars(out, key.rel, r.params);
        out << " set ";
        print_tuple_vars(out, key.aux, r.targets);
        out << " := " << print(r.formula) << "\n";
      }
    }
  }
  for (const auto& d : p.schema.aux_functions) {
    for (const auto& key : rule_keys_for(p.schema, d.name)) {
      const FnRule& r = p.fn_rule(key.aux, key.kind, key.rel);
      out << "on " << modkind_name(key.kind) << " ";
      print_tuple_vars(out, key.rel, r.params);
      out << " setfn ";
      print_tuple_vars(out, key.aux, r.args);
      out << " := " << print(r.term) << "\n";
    }
  }
  return out.str();
}

namespace {

Tuple decode_fn_key(const std::string& key, const std::string& fn) {
  Tuple t;
  if (key.empty()) return t;
  size_t pos = 0;
  while (pos <= key.size()) {
    size_t comma = key.find(',', pos);
    std::string part = key.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      t.push_back(std::stoi(part));
    } catch (...) {
      throw ParseError("bad argument tuple '" + key + "' for function '" + fn + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return t;
}

std::string encode_fn_key(const Tuple& t) {
  std::string out;
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(t[i]);
  }
  return out;
}

}  // namespace

StructureData parse_structure(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad structure file: ") + e.what());
  }
  StructureData out;
  try {
    if (!j.is_object()) throw ParseError("structure file must be a JSON object");
    out.domain = j.at("domain").get<int>();
    if (j.count("relations")) {
      for (const auto& [name, rel] : j.at("relations").items()) {
        Relation r;
        for (const auto& tuple : rel) {
          Tuple t;
          for (const auto& v : tuple) t.push_back(v.get<int>());
          r.insert(std::move(t));
        }
        out.relations[name] = std::move(r);
      }
    }
    if (j.count("functions")) {
      for (const auto& [name, table] : j.at("functions").items()) {
        FnTable ft;
        for (const auto& [key, v] : table.items()) {
          ft[decode_fn_key(key, name)] = v.get<int>();
        }
        out.functions[name] = std::move(ft);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad structure file: ") + e.what());
  }
  return out;
}

std::string print_structure(const StructureData& s) {
  nlohmann::ordered_json j;
  j["domain"] = s.domain;
  j["relations"] = nlohmann::ordered_json::object();
  for (const auto& [name, rel] : s.relations) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& t : rel) arr.push_back(t);
    j["relations"][name] = std::move(arr);
  }
  if (!s.functions.empty()) {
    j["functions"] = nlohmann::ordered_json::object();
    for (const auto& [name, table] : s.functions) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (const auto& [args, v] : table) obj[encode_fn_key(args)] = v;
      j["functions"][name] = std::move(obj);
    }
  }
  return j.dump(2) + "\n";
}

std::string print_state(const State& s, const DynamicProgram& p) {
  nlohmann::ordered_json j;
  j["domain"] = s.n;
  j["relations"] = nlohmann::ordered_json::object();
  auto add_rel = [&](const std::string& name, const Relation& rel) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& t : rel) arr.push_back(t);
    j["relations"][name] = std::move(arr);
  };
  for (const auto& d : p.schema.input_relations) add_rel(d.name, s.input_db.at(d.name));
  for (const auto& d : p.schema.aux_relations) add_rel(d.name, s.aux_db.at(d.name));
  if (!p.schema.aux_functions.empty()) {
    j["functions"] = nlohmann::ordered_json::object();
    for (const auto& d : p.schema.aux_functions) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (const auto& [args, v] : s.aux_fns.at(d.name)) obj[encode_fn_key(args)] = v;
      j["functions"][d.name] = std::move(obj);
    }
  }
  return j.dump(2) + "\n";
}

ModificationScript parse_script(const std::string& text) {
  ModificationScript out;
  for (const Line& ln : logical_lines(text)) {
    Cursor c(ln.text, ln.number);
    Modification m;
    m.kind = modkind_from_name(c.word("'ins' or 'del'"));
    m.relation = c.word("a relation name");
    while (!c.at_end()) {
      std::string w = c.word("a domain element");
      try {
        m.tuple.push_back(std::stoi(w));
      } catch (...) {
        throw ParseError("bad domain element '" + w + "'", ln.number);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string print_script(const ModificationScript& script) {
  std::string out;
  for (const auto& m : script) out += modification_to_string(m) + "\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file '" + path + "'");
  out << content;
  if (!out.flush()) throw Error("cannot write file '" + path + "'");
}

}  // namespace dyncq
