#pragma once

// Online progressions: #step-delimited blocks of ground facts and integrity
// constraints streamed to the reactive solver at runtime. Items are
// persistent unless prefixed with #volatile, which scopes them to queries at
// exactly the step they were fed.

#include <string>
#include <string_view>
#include <vector>

#include "aspctl/parser.hpp"

namespace aspctl {

struct OnlineItem {
  enum class Kind { fact, constraint };

  Kind kind = Kind::fact;
  bool volatile_item = false;
  Atom fact;
  Rule constraint;

  static OnlineItem make_fact(Atom a, bool volatile_item = false) {
    OnlineItem item;
    item.kind = Kind::fact;
    item.volatile_item = volatile_item;
    item.fact = std::move(a);
    return item;
  }

  static OnlineItem make_constraint(Rule r, bool volatile_item = false) {
    OnlineItem item;
    item.kind = Kind::constraint;
    item.volatile_item = volatile_item;
    item.constraint = std::move(r);
    return item;
  }

  std::string str() const {
    std::string out;
    if (volatile_item) out += "#volatile ";
    out += kind == Kind::fact ? fact.str() + "." : constraint.str();
    return out;
  }

  bool operator==(const OnlineItem& o) const { return str() == o.str(); }
};

struct OnlineUpdate {
  int step = 0;
  std::vector<OnlineItem> items;

  bool operator==(const OnlineUpdate& o) const { return step == o.step && items == o.items; }
};

// Renders an update in the exact block form parse_online accepts.
inline std::string render_online(const OnlineUpdate& update) {
  std::string out = "#step " + std::to_string(update.step) + ".\n";
  for (const OnlineItem& item : update.items) out += item.str() + "\n";
  out += "#endstep.\n";
  return out;
}

// Parses one "#step N. ... #endstep." block. Items must be ground facts or
// ground integrity constraints; anything else is rejected with its position.
inline OnlineUpdate parse_online(std::string_view text) {
  Lexer lex(text);
  detail::RuleParser rules(lex);
  OnlineUpdate update;

  Token t = lex.take();
  if (t.kind != Token::Kind::directive || t.text != "step")
    throw ParseError(t.line, t.col, "expected '#step N.'");
  Token n = rules.expect(Token::Kind::integer, "step number");
  update.step = static_cast<int>(n.value);
  rules.expect(Token::Kind::dot, "'.'");

  bool pending_volatile = false;
  while (true) {
    Token head = lex.peek();
    if (head.kind == Token::Kind::end)
      throw ParseError(head.line, head.col, "missing '#endstep.'");
    if (head.kind == Token::Kind::directive) {
      lex.take();
      if (head.text == "endstep") {
        rules.expect(Token::Kind::dot, "'.'");
        if (pending_volatile)
          throw ParseError(head.line, head.col, "dangling '#volatile' before #endstep");
        break;
      }
      if (head.text == "volatile") {
        if (pending_volatile)
          throw ParseError(head.line, head.col, "duplicate '#volatile' prefix");
        pending_volatile = true;
        continue;
      }
      throw ParseError(head.line, head.col, "unexpected directive #" + head.text + " in update");
    }
    Rule r = rules.parse_rule();
    if (!r.ground())
      throw ParseError(r.line, r.col, "online items must be ground");
    OnlineItem item;
    item.volatile_item = pending_volatile;
    pending_volatile = false;
    if (r.kind == Rule::HeadKind::constraint) {
      item.kind = OnlineItem::Kind::constraint;
      item.constraint = std::move(r);
    } else if (r.kind == Rule::HeadKind::atom && r.body_pos.empty() && r.body_neg.empty() &&
               r.builtins.empty()) {
      item.kind = OnlineItem::Kind::fact;
      item.fact = std::move(r.head);
    } else {
      throw ParseError(r.line, r.col, "online items must be facts or integrity constraints");
    }
    update.items.push_back(std::move(item));
  }
  if (lex.peek().kind != Token::Kind::end)
    throw ParseError(lex.peek().line, lex.peek().col, "trailing input after #endstep");
  return update;
}

}  // namespace aspctl
