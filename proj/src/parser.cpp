#include "dyncq/parser.hpp"

#include <map>
#include <set>

#include "dyncq/errors.hpp"

namespace dyncq {

namespace {

bool ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c == '#';
}
bool ident_char(char c) {
  return ident_start(c) || (c >= '0' && c <= '9') || c == '$';
}

enum class Tok { End, Ident, LParen, RParen, Comma, Dot, Bang, Amp, Pipe, Eq };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& cur() const { return cur_; }
  const Token& peek(int ahead) {
    while ((int)lookahead_.size() < ahead) lookahead_.push_back(scan());
    return lookahead_[ahead - 1];
  }
  void advance() {
    if (!lookahead_.empty()) {
      cur_ = lookahead_.front();
      lookahead_.erase(lookahead_.begin());
    } else {
      cur_ = scan();
    }
  }

 private:
  Token scan() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++col_;
        ++pos_;
      } else {
        break;
      }
    }
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Tok::End;
      return t;
    }
    char c = text_[pos_];
    auto one = [&](Tok k) {
      t.kind = k;
      t.text = std::string(1, c);
      ++pos_;
      ++col_;
      return t;
    };
    switch (c) {
      case '(': return one(Tok::LParen);
      case ')': return one(Tok::RParen);
      case ',': return one(Tok::Comma);
      case '.': return one(Tok::Dot);
      case '!': return one(Tok::Bang);
      case '&': return one(Tok::Amp);
      case '|': return one(Tok::Pipe);
      case '=': return one(Tok::Eq);
      default: break;
    }
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) {
        ++pos_;
        ++col_;
      }
      t.kind = Tok::Ident;
      t.text = text_.substr(start, pos_ - start);
      return t;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", line_, col_);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
  std::vector<Token> lookahead_;
};

class Parser {
 public:
  Parser(const std::string& text, const Schema* schema) : lex_(text), schema_(schema) {}

  FormulaPtr parse_formula_all() {
    auto f = parse_disj();
    expect_end();
    return f;
  }

  TermPtr parse_term_all() {
    auto t = parse_term();
    expect_end();
    return t;
  }

  Schema inferred_schema() const {
    Schema s;
    for (auto& name : inferred_order_) s.input_relations.push_back({name, inferred_.at(name)});
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { fail(msg, lex_.cur()); }
  [[noreturn]] void fail(const std::string& msg, const Token& at) {
    throw ParseError(msg, at.line, at.col);
  }

  void expect_end() {
    if (lex_.cur().kind != Tok::End) fail("trailing input after formula");
  }
  void expect(Tok k, const char* what) {
    if (lex_.cur().kind != k) fail(std::string("expected ") + what);
    lex_.advance();
  }

  static bool is_keyword(const std::string& s) {
    return s == "true" || s == "false" || s == "ite";
  }

  FormulaPtr parse_disj() {
    std::vector<FormulaPtr> kids{parse_conj()};
    while (lex_.cur().kind == Tok::Pipe) {
      lex_.advance();
      kids.push_back(parse_conj());
    }
    return kids.size() == 1 ? kids[0] : Formula::disj(std::move(kids));
  }

  FormulaPtr parse_conj() {
    std::vector<FormulaPtr> kids{parse_unary()};
    while (lex_.cur().kind == Tok::Amp) {
      lex_.advance();
      kids.push_back(parse_unary());
    }
    return kids.size() == 1 ? kids[0] : Formula::conj(std::move(kids));
  }

  FormulaPtr parse_unary() {
    const Token& t = lex_.cur();
    if (t.kind == Tok::Bang) {
      lex_.advance();
      return Formula::negation(parse_unary());
    }
    // Quantifier: the tokens E or A, immediately followed by an identifier
    // and a dot. Anything else starting with E/A is an atom or a term.
    if (t.kind == Tok::Ident && (t.text == "E" || t.text == "A") &&
        lex_.peek(1).kind == Tok::Ident && lex_.peek(2).kind == Tok::Dot) {
      bool ex = t.text == "E";
      Token var = lex_.peek(1);
      if (is_keyword(var.text)) fail("reserved word '" + var.text + "' as variable", var);
      lex_.advance();
      lex_.advance();
      lex_.advance();
      note_variable(var.text, var);
      auto body = parse_disj();  // quantifier scope extends maximally right
      return ex ? Formula::exists(var.text, body) : Formula::forall(var.text, body);
    }
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    const Token& t = lex_.cur();
    if (t.kind == Tok::LParen) {
      lex_.advance();
      auto f = parse_disj();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (t.kind == Tok::Ident && t.text == "true") {
      lex_.advance();
      return Formula::truth();
    }
    if (t.kind == Tok::Ident && t.text == "false") {
      lex_.advance();
      return Formula::falsity();
    }
    if (t.kind != Tok::Ident) fail("expected formula");
    // Relation atom, or a term followed by '='.
    Token head = t;
    if (is_relation_atom(head.text)) {
      lex_.advance();
      std::vector<TermPtr> args;
      if (lex_.cur().kind == Tok::LParen) {
        lex_.advance();
        if (lex_.cur().kind != Tok::RParen) {
          args.push_back(parse_term());
          while (lex_.cur().kind == Tok::Comma) {
            lex_.advance();
            args.push_back(parse_term());
          }
        }
        expect(Tok::RParen, "')'");
      }
      check_relation(head, args.size());
      return Formula::rel(head.text, std::move(args));
    }
    auto lhs = parse_term();
    if (lex_.cur().kind != Tok::Eq) fail("expected '=' after term");
    lex_.advance();
    auto rhs = parse_term();
    return Formula::eq(lhs, rhs);
  }

  // In schema mode an identifier is a relation atom iff declared as one. In
  // infer mode any identifier directly followed by '(' is one.
  bool is_relation_atom(const std::string& name) {
    if (is_keyword(name)) return false;
    if (schema_) return schema_->relation_arity(name).has_value();
    return lex_.peek(1).kind == Tok::LParen;
  }

  void check_relation(const Token& head, std::size_t nargs) {
    if (schema_) {
      int arity = *schema_->relation_arity(head.text);
      if ((std::size_t)arity != nargs)
        fail("relation '" + head.text + "' expects " + std::to_string(arity) + " arguments, got " +
                 std::to_string(nargs),
             head);
      return;
    }
    auto it = inferred_.find(head.text);
    if (it == inferred_.end()) {
      if (vars_.count(head.text))
        fail("'" + head.text + "' used both as variable and relation", head);
      inferred_[head.text] = (int)nargs;
      inferred_order_.push_back(head.text);
    } else if (it->second != (int)nargs) {
      fail("relation '" + head.text + "' used with inconsistent arities", head);
    }
  }

  void note_variable(const std::string& name, const Token& at) {
    if (schema_) return;
    if (inferred_.count(name)) fail("'" + name + "' used both as variable and relation", at);
    vars_.insert(name);
  }

  TermPtr parse_term() {
    const Token& t = lex_.cur();
    if (t.kind != Tok::Ident) fail("expected term");
    if (t.text == "ite") {
      if (!schema_) fail("function terms not allowed here");
      lex_.advance();
      expect(Tok::LParen, "'('");
      auto cond = parse_disj();
      if (!is_quantifier_free(cond)) fail("ite condition must be quantifier-free", t);
      expect(Tok::Comma, "','");
      auto t1 = parse_term();
      expect(Tok::Comma, "','");
      auto t2 = parse_term();
      expect(Tok::RParen, "')'");
      return Term::ite(cond, t1, t2);
    }
    if (t.text == "true" || t.text == "false") fail("reserved word '" + t.text + "' as term");
    Token head = t;
    if (schema_ && schema_->is_fn(head.text)) {
      lex_.advance();
      std::vector<TermPtr> args;
      if (lex_.cur().kind == Tok::LParen) {
        lex_.advance();
        if (lex_.cur().kind != Tok::RParen) {
          args.push_back(parse_term());
          while (lex_.cur().kind == Tok::Comma) {
            lex_.advance();
            args.push_back(parse_term());
          }
        }
        expect(Tok::RParen, "')'");
      }
      int arity = *schema_->fn_arity(head.text);
      if ((std::size_t)arity != args.size())
        fail("function '" + head.text + "' expects " + std::to_string(arity) + " arguments, got " +
                 std::to_string(args.size()),
             head);
      return Term::fn(head.text, std::move(args));
    }
    if (schema_ && schema_->relation_arity(head.text).has_value())
      fail("relation '" + head.text + "' in term position", head);
    lex_.advance();
    if (lex_.cur().kind == Tok::LParen)
      fail("unknown function '" + head.text + "'", head);
    note_variable(head.text, head);
    return Term::var(head.text);
  }

  Lexer lex_;
  const Schema* schema_;
  std::map<std::string, int> inferred_;
  std::vector<std::string> inferred_order_;
  std::set<std::string> vars_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const Schema& schema) {
  Parser p(text, &schema);
  return p.parse_formula_all();
}

TermPtr parse_term(const std::string& text, const Schema& schema) {
  Parser p(text, &schema);
  return p.parse_term_all();
}

InferredFormula parse_formula_infer(const std::string& text) {
  Parser p(text, nullptr);
  InferredFormula out;
  out.formula = p.parse_formula_all();
  out.schema = p.inferred_schema();
  return out;
}

}  // namespace dyncq
