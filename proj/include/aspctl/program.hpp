#pragma once

// Rules and reactive programs. A reactive program is partitioned into a base
// part holding static knowledge, cumulative parts whose rule schemata are
// instantiated once per time step, and volatile parts that bind only at the
// horizon of the current query.

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aspctl/term.hpp"

namespace aspctl {

enum class CmpOp { eq, ne, lt, le, gt, ge };

inline const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "=";
    case CmpOp::ne: return "!=";
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
  }
  return "?";
}

// Comparison over ground terms. Equality and disequality are syntactic over
// arbitrary ground terms; the ordered operators require integers.
inline bool cmp_eval(CmpOp op, const Term& lhs, const Term& rhs) {
  Term l = lhs.evaluated();
  Term r = rhs.evaluated();
  switch (op) {
    case CmpOp::eq: return l == r;
    case CmpOp::ne: return l != r;
    default: break;
  }
  if (!l.is_integer() || !r.is_integer())
    throw GroundingError("ordered comparison over non-integer terms: " + l.str() + " " +
                         cmp_text(op) + " " + r.str());
  switch (op) {
    case CmpOp::lt: return l.value() < r.value();
    case CmpOp::le: return l.value() <= r.value();
    case CmpOp::gt: return l.value() > r.value();
    case CmpOp::ge: return l.value() >= r.value();
    default: return false;
  }
}

struct Comparison {
  Term lhs;
  CmpOp op = CmpOp::eq;
  Term rhs;

  bool ground() const { return lhs.ground() && rhs.ground(); }

  template <class Out>
  void collect_variables(Out& out) const {
    lhs.collect_variables(out);
    rhs.collect_variables(out);
  }

  Comparison substituted(const Binding& b) const {
    return {lhs.substituted(b), op, rhs.substituted(b)};
  }

  Comparison with_symbol(const std::string& name, const Term& repl) const {
    return {lhs.with_symbol(name, repl), op, rhs.with_symbol(name, repl)};
  }

  bool holds() const { return cmp_eval(op, lhs, rhs); }

  std::string str() const { return lhs.str() + cmp_text(op) + rhs.str(); }
};

struct ChoiceHead {
  std::optional<long long> lower;
  std::optional<long long> upper;
  std::vector<Atom> elements;
};

struct Rule {
  enum class HeadKind { atom, choice, constraint };

  HeadKind kind = HeadKind::atom;
  Atom head;          // kind == atom
  ChoiceHead choice;  // kind == choice
  std::vector<Atom> body_pos;
  std::vector<Atom> body_neg;
  std::vector<Comparison> builtins;
  int line = 0;
  int col = 0;

  static Rule fact(Atom a) {
    Rule r;
    r.head = std::move(a);
    return r;
  }

  static Rule constraint(std::vector<Atom> pos, std::vector<Atom> neg,
                         std::vector<Comparison> cmps = {}) {
    Rule r;
    r.kind = HeadKind::constraint;
    r.body_pos = std::move(pos);
    r.body_neg = std::move(neg);
    r.builtins = std::move(cmps);
    return r;
  }

  bool ground() const {
    auto all = [](const std::vector<Atom>& v) {
      for (const Atom& a : v)
        if (!a.ground()) return false;
      return true;
    };
    if (kind == HeadKind::atom && !head.ground()) return false;
    if (kind == HeadKind::choice && !all(choice.elements)) return false;
    for (const Comparison& c : builtins)
      if (!c.ground()) return false;
    return all(body_pos) && all(body_neg);
  }

  bool uses_symbol(const std::string& name) const {
    if (kind == HeadKind::atom && head.uses_symbol(name)) return true;
    if (kind == HeadKind::choice)
      for (const Atom& a : choice.elements)
        if (a.uses_symbol(name)) return true;
    for (const Atom& a : body_pos)
      if (a.uses_symbol(name)) return true;
    for (const Atom& a : body_neg)
      if (a.uses_symbol(name)) return true;
    for (const Comparison& c : builtins)
      if (c.lhs.uses_symbol(name) || c.rhs.uses_symbol(name)) return true;
    return false;
  }

  std::string body_str() const {
    std::ostringstream os;
    bool first = true;
    auto sep = [&] {
      if (!first) os << ", ";
      first = false;
    };
    for (const Atom& a : body_pos) {
      sep();
      a.print(os);
    }
    for (const Comparison& c : builtins) {
      sep();
      os << c.str();
    }
    for (const Atom& a : body_neg) {
      sep();
      os << "not ";
      a.print(os);
    }
    return os.str();
  }

  std::string str() const {
    std::ostringstream os;
    switch (kind) {
      case HeadKind::atom:
        head.print(os);
        break;
      case HeadKind::choice:
        if (choice.lower) os << *choice.lower << ' ';
        os << '{';
        for (size_t i = 0; i < choice.elements.size(); ++i) {
          if (i) os << "; ";
          choice.elements[i].print(os);
        }
        os << '}';
        if (choice.upper) os << ' ' << *choice.upper;
        break;
      case HeadKind::constraint:
        break;
    }
    std::string body = body_str();
    if (!body.empty()) {
      if (kind != HeadKind::constraint) os << ' ';
      os << ":- " << body;
    }
    os << '.';
    return os.str();
  }
};

// Returns the first variable violating safety: every variable occurring in
// the head, a negative literal, or a builtin comparison must also occur in a
// positive non-builtin body atom.
inline std::optional<std::string> unsafe_variable(const Rule& r) {
  std::set<std::string> bound;
  for (const Atom& a : r.body_pos) a.collect_variables(bound);
  std::set<std::string> used;
  if (r.kind == Rule::HeadKind::atom) r.head.collect_variables(used);
  if (r.kind == Rule::HeadKind::choice)
    for (const Atom& a : r.choice.elements) a.collect_variables(used);
  for (const Atom& a : r.body_neg) a.collect_variables(used);
  for (const Comparison& c : r.builtins) c.collect_variables(used);
  for (const std::string& v : used)
    if (!bound.count(v)) return v;
  return std::nullopt;
}

struct ProgramPart {
  enum class Kind { base, cumulative, volatile_ };

  Kind kind = Kind::base;
  std::string parameter;  // time parameter symbol for cumulative/volatile
  std::vector<Rule> rules;
};

struct ReactiveProgram {
  std::vector<ProgramPart> parts;
  std::vector<std::pair<std::string, int>> externals;  // (predicate, arity)

  bool is_external(const std::string& pred, int arity) const {
    for (const auto& [p, n] : externals)
      if (p == pred && n == arity) return true;
    return false;
  }

  // Predicates with occurrences anywhere in the program, as (name, arity).
  std::set<std::pair<std::string, int>> predicates() const {
    std::set<std::pair<std::string, int>> out;
    auto add = [&out](const Atom& a) { out.insert({a.predicate, a.arity()}); };
    for (const ProgramPart& part : parts)
      for (const Rule& r : part.rules) {
        if (r.kind == Rule::HeadKind::atom) add(r.head);
        if (r.kind == Rule::HeadKind::choice)
          for (const Atom& a : r.choice.elements) add(a);
        for (const Atom& a : r.body_pos) add(a);
        for (const Atom& a : r.body_neg) add(a);
      }
    for (const auto& e : externals) out.insert(e);
    return out;
  }
};

}  // namespace aspctl
