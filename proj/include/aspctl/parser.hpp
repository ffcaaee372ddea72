#pragma once

// Recursive-descent parser for program text. Grammar summary:
//
//   program    = { directive | rule }
//   directive  = "#base." | "#cumulative" ident "." | "#volatile" ident "."
//              | "#external" ident "/" int "."
//   rule       = head [ ":-" body ] "." | ":-" body "."
//   head       = atom | [int] "{" atom { ";" atom } "}" [int]
//   body       = literal { "," literal }
//   literal    = atom | "not" atom | term cmp term
//   cmp        = "=" | "!=" | "<" | "<=" | ">" | ">="
//   atom       = ident [ "(" term { "," term } ")" ]
//   term       = addend { ("+"|"-") addend }
//   addend     = int | "-" int | variable | ident [ "(" term { "," term } ")" ]
//
// Identifiers start with a lowercase letter or underscore, variables with an
// uppercase letter. "%" starts a comment running to end of line.

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aspctl/program.hpp"

namespace aspctl {

struct Token {
  enum class Kind {
    end,
    ident,
    variable,
    integer,
    dot,
    comma,
    semicolon,
    lparen,
    rparen,
    lbrace,
    rbrace,
    arrow,  // ":-"
    slash,
    plus,
    minus,
    cmp,       // "=", "!=", "<", "<=", ">", ">="
    directive  // "#name"
  };

  Kind kind = Kind::end;
  std::string text;
  long long value = 0;
  CmpOp cmp_op = CmpOp::eq;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.col, msg);
  }

 private:
  void advance() {
    skip_space();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) return;  // end
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok_.kind = Token::Kind::integer;
      size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) bump();
      tok_.text = std::string(text_.substr(start, pos_ - start));
      tok_.value = std::stoll(tok_.text);
      return;
    }
    if (c == '_' || std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (text_[pos_] == '_' || std::isalnum(static_cast<unsigned char>(text_[pos_]))))
        bump();
      tok_.text = std::string(text_.substr(start, pos_ - start));
      tok_.kind = std::isupper(static_cast<unsigned char>(tok_.text[0])) ? Token::Kind::variable
                                                                         : Token::Kind::ident;
      return;
    }
    if (c == '#') {
      bump();
      size_t start = pos_;
      while (pos_ < text_.size() &&
             (text_[pos_] == '_' || std::isalnum(static_cast<unsigned char>(text_[pos_]))))
        bump();
      if (start == pos_) throw ParseError(tok_.line, tok_.col, "bare '#'");
      tok_.kind = Token::Kind::directive;
      tok_.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    auto single = [&](Token::Kind k) {
      tok_.kind = k;
      tok_.text = std::string(1, c);
      bump();
    };
    switch (c) {
      case '.': single(Token::Kind::dot); return;
      case ',': single(Token::Kind::comma); return;
      case ';': single(Token::Kind::semicolon); return;
      case '(': single(Token::Kind::lparen); return;
      case ')': single(Token::Kind::rparen); return;
      case '{': single(Token::Kind::lbrace); return;
      case '}': single(Token::Kind::rbrace); return;
      case '/': single(Token::Kind::slash); return;
      case '+': single(Token::Kind::plus); return;
      case '-': single(Token::Kind::minus); return;
      case ':':
        bump();
        if (pos_ < text_.size() && text_[pos_] == '-') {
          bump();
          tok_.kind = Token::Kind::arrow;
          tok_.text = ":-";
          return;
        }
        throw ParseError(tok_.line, tok_.col, "expected ':-'");
      case '=':
        bump();
        tok_.kind = Token::Kind::cmp;
        tok_.cmp_op = CmpOp::eq;
        tok_.text = "=";
        return;
      case '!':
        bump();
        if (pos_ < text_.size() && text_[pos_] == '=') {
          bump();
          tok_.kind = Token::Kind::cmp;
          tok_.cmp_op = CmpOp::ne;
          tok_.text = "!=";
          return;
        }
        throw ParseError(tok_.line, tok_.col, "expected '!='");
      case '<':
        bump();
        tok_.kind = Token::Kind::cmp;
        if (pos_ < text_.size() && text_[pos_] == '=') {
          bump();
          tok_.cmp_op = CmpOp::le;
          tok_.text = "<=";
        } else {
          tok_.cmp_op = CmpOp::lt;
          tok_.text = "<";
        }
        return;
      case '>':
        bump();
        tok_.kind = Token::Kind::cmp;
        if (pos_ < text_.size() && text_[pos_] == '=') {
          bump();
          tok_.cmp_op = CmpOp::ge;
          tok_.text = ">=";
        } else {
          tok_.cmp_op = CmpOp::gt;
          tok_.text = ">";
        }
        return;
      default:
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

namespace detail {

class RuleParser {
 public:
  explicit RuleParser(Lexer& lex) : lex_(lex) {}

  Term parse_term() {
    Term t = parse_addend();
    while (lex_.peek().kind == Token::Kind::plus || lex_.peek().kind == Token::Kind::minus) {
      bool plus = lex_.take().kind == Token::Kind::plus;
      Term rhs = parse_addend();
      t = plus ? Term::sum(std::move(t), std::move(rhs))
               : Term::difference(std::move(t), std::move(rhs));
    }
    return t;
  }

  Term parse_addend() {
    Token t = lex_.peek();
    switch (t.kind) {
      case Token::Kind::integer:
        lex_.take();
        return Term::integer(t.value);
      case Token::Kind::minus: {
        lex_.take();
        Token i = expect(Token::Kind::integer, "integer after '-'");
        return Term::integer(-i.value);
      }
      case Token::Kind::variable:
        lex_.take();
        return Term::variable(t.text);
      case Token::Kind::ident: {
        lex_.take();
        if (lex_.peek().kind != Token::Kind::lparen) return Term::symbol(t.text);
        lex_.take();
        std::vector<Term> args;
        args.push_back(parse_term());
        while (lex_.peek().kind == Token::Kind::comma) {
          lex_.take();
          args.push_back(parse_term());
        }
        expect(Token::Kind::rparen, "')'");
        return Term::compound(t.text, std::move(args));
      }
      default:
        lex_.fail("expected a term");
    }
  }

  Atom parse_atom() {
    Token t = lex_.peek();
    Term term = parse_term();
    return atom_from_term(term, t);
  }

  Atom atom_from_term(const Term& t, const Token& at) {
    if (t.is_symbol()) return Atom{t.name()};
    if (t.is_compound() && !t.is_arith()) return Atom{t.name(), t.args()};
    throw ParseError(at.line, at.col, "expected an atom, got term '" + t.str() + "'");
  }

  // literal := "not" atom | term [cmp term]
  void parse_body_literal(Rule& rule) {
    if (lex_.peek().kind == Token::Kind::ident && lex_.peek().text == "not") {
      lex_.take();
      rule.body_neg.push_back(parse_atom());
      return;
    }
    Token at = lex_.peek();
    Term lhs = parse_term();
    if (lex_.peek().kind == Token::Kind::cmp) {
      CmpOp op = lex_.take().cmp_op;
      Term rhs = parse_term();
      rule.builtins.push_back(Comparison{std::move(lhs), op, std::move(rhs)});
      return;
    }
    rule.body_pos.push_back(atom_from_term(lhs, at));
  }

  void parse_body(Rule& rule) {
    parse_body_literal(rule);
    while (lex_.peek().kind == Token::Kind::comma) {
      lex_.take();
      parse_body_literal(rule);
    }
  }

  Rule parse_rule() {
    Rule rule;
    rule.line = lex_.peek().line;
    rule.col = lex_.peek().col;
    if (lex_.peek().kind == Token::Kind::arrow) {
      lex_.take();
      rule.kind = Rule::HeadKind::constraint;
      parse_body(rule);
    } else if (lex_.peek().kind == Token::Kind::lbrace ||
               lex_.peek().kind == Token::Kind::integer) {
      rule.kind = Rule::HeadKind::choice;
      if (lex_.peek().kind == Token::Kind::integer) rule.choice.lower = lex_.take().value;
      expect(Token::Kind::lbrace, "'{'");
      rule.choice.elements.push_back(parse_atom());
      while (lex_.peek().kind == Token::Kind::semicolon) {
        lex_.take();
        rule.choice.elements.push_back(parse_atom());
      }
      expect(Token::Kind::rbrace, "'}'");
      if (lex_.peek().kind == Token::Kind::integer) rule.choice.upper = lex_.take().value;
      if (lex_.peek().kind == Token::Kind::arrow) {
        lex_.take();
        parse_body(rule);
      }
    } else {
      rule.head = parse_atom();
      if (lex_.peek().kind == Token::Kind::arrow) {
        lex_.take();
        parse_body(rule);
      }
    }
    expect(Token::Kind::dot, "'.'");
    if (auto v = unsafe_variable(rule))
      throw ParseError(rule.line, rule.col, "unsafe variable " + *v);
    return rule;
  }

  Token expect(Token::Kind kind, const char* what) {
    if (lex_.peek().kind != kind) lex_.fail(std::string("expected ") + what);
    return lex_.take();
  }

 private:
  Lexer& lex_;
};

}  // namespace detail

// Parses a complete reactive program. Rules appearing before any part
// directive land in an implicit base part. Rule order is preserved within
// each part, part order within the program.
inline ReactiveProgram parse_program(std::string_view text) {
  ReactiveProgram prog;
  Lexer lex(text);
  detail::RuleParser rules(lex);
  ProgramPart* current = nullptr;
  auto ensure_part = [&]() -> ProgramPart& {
    if (!current) {
      prog.parts.push_back(ProgramPart{});
      current = &prog.parts.back();
    }
    return *current;
  };
  while (lex.peek().kind != Token::Kind::end) {
    if (lex.peek().kind == Token::Kind::directive) {
      Token d = lex.take();
      if (d.text == "base") {
        rules.expect(Token::Kind::dot, "'.'");
        prog.parts.push_back(ProgramPart{ProgramPart::Kind::base, "", {}});
        current = &prog.parts.back();
      } else if (d.text == "cumulative" || d.text == "volatile") {
        Token p = rules.expect(Token::Kind::ident, "time parameter name");
        rules.expect(Token::Kind::dot, "'.'");
        prog.parts.push_back(ProgramPart{d.text == "cumulative" ? ProgramPart::Kind::cumulative
                                                                : ProgramPart::Kind::volatile_,
                                         p.text,
                                         {}});
        current = &prog.parts.back();
      } else if (d.text == "external") {
        Token name = rules.expect(Token::Kind::ident, "predicate name");
        rules.expect(Token::Kind::slash, "'/'");
        Token arity = rules.expect(Token::Kind::integer, "arity");
        rules.expect(Token::Kind::dot, "'.'");
        prog.externals.emplace_back(name.text, static_cast<int>(arity.value));
      } else {
        throw ParseError(d.line, d.col, "unknown directive #" + d.text);
      }
      continue;
    }
    ensure_part().rules.push_back(rules.parse_rule());
  }

  // A part's time parameter is reserved: base rules may not mention any
  // declared parameter, timed rules only their own part's.
  std::set<std::string> params;
  for (const ProgramPart& part : prog.parts)
    if (!part.parameter.empty()) params.insert(part.parameter);
  for (const ProgramPart& part : prog.parts)
    for (const Rule& r : part.rules)
      for (const std::string& p : params) {
        if (p == part.parameter) continue;
        if (r.uses_symbol(p))
          throw ParseError(r.line, r.col,
                           "time parameter '" + p + "' used outside its program part");
      }
  return prog;
}

// Parses a single ground term (used for config files and message payloads).
inline Term parse_term_text(std::string_view text) {
  Lexer lex(text);
  detail::RuleParser rules(lex);
  Term t = rules.parse_term();
  if (lex.peek().kind != Token::Kind::end) lex.fail("trailing input after term");
  return t;
}

// Parses a single atom, e.g. "_action(move_base,office2,1)".
inline Atom parse_atom_text(std::string_view text) {
  Lexer lex(text);
  detail::RuleParser rules(lex);
  Atom a = rules.parse_atom();
  if (lex.peek().kind != Token::Kind::end) lex.fail("trailing input after atom");
  return a;
}

}  // namespace aspctl
