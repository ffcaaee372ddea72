#pragma once

// Terms and atoms of the logic-program fragment: integers, constant symbols,
// variables, and compound terms. Values throughout; no interning at this
// layer. Arithmetic over integers appears as compound terms with functor
// "+" or "-" and is folded away by evaluated() once arguments are ground.

#include <cstdint>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "aspctl/errors.hpp"

namespace aspctl {

class Term;
using Binding = std::unordered_map<std::string, Term>;

class Term {
 public:
  enum class Kind { integer, symbol, variable, compound };

  Term() : kind_(Kind::integer), value_(0) {}

  static Term integer(long long v) {
    Term t;
    t.kind_ = Kind::integer;
    t.value_ = v;
    return t;
  }

  static Term symbol(std::string name) {
    Term t;
    t.kind_ = Kind::symbol;
    t.name_ = std::move(name);
    return t;
  }

  static Term variable(std::string name) {
    Term t;
    t.kind_ = Kind::variable;
    t.name_ = std::move(name);
    return t;
  }

  static Term compound(std::string functor, std::vector<Term> args) {
    Term t;
    t.kind_ = Kind::compound;
    t.name_ = std::move(functor);
    t.args_ = std::move(args);
    return t;
  }

  static Term sum(Term lhs, Term rhs) {
    return compound("+", {std::move(lhs), std::move(rhs)});
  }

  static Term difference(Term lhs, Term rhs) {
    return compound("-", {std::move(lhs), std::move(rhs)});
  }

  Kind kind() const { return kind_; }
  bool is_integer() const { return kind_ == Kind::integer; }
  bool is_symbol() const { return kind_ == Kind::symbol; }
  bool is_variable() const { return kind_ == Kind::variable; }
  bool is_compound() const { return kind_ == Kind::compound; }

  // Compound with functor "+" or "-" and two arguments.
  bool is_arith() const {
    return kind_ == Kind::compound && args_.size() == 2 && (name_ == "+" || name_ == "-");
  }

  long long value() const { return value_; }
  const std::string& name() const { return name_; }
  const std::vector<Term>& args() const { return args_; }

  bool ground() const {
    if (kind_ == Kind::variable) return false;
    for (const Term& a : args_)
      if (!a.ground()) return false;
    return true;
  }

  int depth() const {
    if (kind_ != Kind::compound) return 1;
    int d = 0;
    for (const Term& a : args_) d = std::max(d, a.depth());
    return d + 1;
  }

  template <class Out>
  void collect_variables(Out& out) const {
    if (kind_ == Kind::variable) {
      out.insert(name_);
      return;
    }
    for (const Term& a : args_) a.collect_variables(out);
  }

  bool uses_symbol(const std::string& name) const {
    if (kind_ == Kind::symbol && name_ == name) return true;
    for (const Term& a : args_)
      if (a.uses_symbol(name)) return true;
    return false;
  }

  Term substituted(const Binding& binding) const {
    if (kind_ == Kind::variable) {
      auto it = binding.find(name_);
      return it == binding.end() ? *this : it->second;
    }
    if (kind_ != Kind::compound) return *this;
    std::vector<Term> args;
    args.reserve(args_.size());
    for (const Term& a : args_) args.push_back(a.substituted(binding));
    return compound(name_, std::move(args));
  }

  // Replaces every occurrence of the constant symbol `name` (the time
  // parameter of a program part) by `repl`.
  Term with_symbol(const std::string& name, const Term& repl) const {
    if (kind_ == Kind::symbol && name_ == name) return repl;
    if (kind_ != Kind::compound) return *this;
    std::vector<Term> args;
    args.reserve(args_.size());
    for (const Term& a : args_) args.push_back(a.with_symbol(name, repl));
    return compound(name_, std::move(args));
  }

  // Folds integer arithmetic. Requires arithmetic operands to reduce to
  // integers; other structure is preserved.
  Term evaluated() const {
    if (kind_ != Kind::compound) return *this;
    std::vector<Term> args;
    args.reserve(args_.size());
    for (const Term& a : args_) args.push_back(a.evaluated());
    if (is_arith()) {
      if (!args[0].is_integer() || !args[1].is_integer())
        throw GroundingError("arithmetic over non-integer term: " +
                             compound(name_, args).str());
      long long l = args[0].value(), r = args[1].value();
      return integer(name_ == "+" ? l + r : l - r);
    }
    return compound(name_, std::move(args));
  }

  // Folds arithmetic subtrees whose operands are integers and leaves the
  // rest (e.g. arithmetic still containing variables) untouched.
  Term partially_evaluated() const {
    if (kind_ != Kind::compound) return *this;
    std::vector<Term> args;
    args.reserve(args_.size());
    for (const Term& a : args_) args.push_back(a.partially_evaluated());
    if (is_arith() && args[0].is_integer() && args[1].is_integer()) {
      long long l = args[0].value(), r = args[1].value();
      return integer(name_ == "+" ? l + r : l - r);
    }
    return compound(name_, std::move(args));
  }

  // Total order: integers < symbols < variables < compounds, then content.
  int compare(const Term& o) const {
    if (kind_ != o.kind_) return static_cast<int>(kind_) < static_cast<int>(o.kind_) ? -1 : 1;
    switch (kind_) {
      case Kind::integer:
        return value_ < o.value_ ? -1 : value_ > o.value_ ? 1 : 0;
      case Kind::symbol:
      case Kind::variable:
        return name_.compare(o.name_) < 0 ? -1 : name_ == o.name_ ? 0 : 1;
      case Kind::compound: {
        if (int c = name_.compare(o.name_); c != 0) return c < 0 ? -1 : 1;
        if (args_.size() != o.args_.size()) return args_.size() < o.args_.size() ? -1 : 1;
        for (size_t i = 0; i < args_.size(); ++i)
          if (int c = args_[i].compare(o.args_[i]); c != 0) return c;
        return 0;
      }
    }
    return 0;
  }

  bool operator==(const Term& o) const { return compare(o) == 0; }
  bool operator!=(const Term& o) const { return compare(o) != 0; }
  bool operator<(const Term& o) const { return compare(o) < 0; }
  bool operator<=(const Term& o) const { return compare(o) <= 0; }
  bool operator>(const Term& o) const { return compare(o) > 0; }
  bool operator>=(const Term& o) const { return compare(o) >= 0; }

  size_t hash() const {
    size_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    mix(static_cast<size_t>(kind_));
    if (kind_ == Kind::integer)
      mix(std::hash<long long>{}(value_));
    else
      mix(std::hash<std::string>{}(name_));
    for (const Term& a : args_) mix(a.hash());
    return h;
  }

  void print(std::ostream& os) const {
    switch (kind_) {
      case Kind::integer:
        os << value_;
        break;
      case Kind::symbol:
      case Kind::variable:
        os << name_;
        break;
      case Kind::compound:
        if (is_arith()) {
          args_[0].print(os);
          os << name_;
          args_[1].print(os);
          break;
        }
        os << name_ << '(';
        for (size_t i = 0; i < args_.size(); ++i) {
          if (i) os << ',';
          args_[i].print(os);
        }
        os << ')';
        break;
    }
  }

  std::string str() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }

 private:
  Kind kind_;
  long long value_ = 0;
  std::string name_;
  std::vector<Term> args_;
};

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  t.print(os);
  return os;
}

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  Atom() = default;
  Atom(std::string pred, std::vector<Term> arguments = {})
      : predicate(std::move(pred)), args(std::move(arguments)) {}

  int arity() const { return static_cast<int>(args.size()); }

  bool ground() const {
    for (const Term& a : args)
      if (!a.ground()) return false;
    return true;
  }

  int term_depth() const {
    int d = 0;
    for (const Term& a : args) d = std::max(d, a.depth());
    return d;
  }

  template <class Out>
  void collect_variables(Out& out) const {
    for (const Term& a : args) a.collect_variables(out);
  }

  bool uses_symbol(const std::string& name) const {
    for (const Term& a : args)
      if (a.uses_symbol(name)) return true;
    return false;
  }

  Atom substituted(const Binding& b) const {
    Atom r{predicate};
    r.args.reserve(args.size());
    for (const Term& a : args) r.args.push_back(a.substituted(b));
    return r;
  }

  Atom with_symbol(const std::string& name, const Term& repl) const {
    Atom r{predicate};
    r.args.reserve(args.size());
    for (const Term& a : args) r.args.push_back(a.with_symbol(name, repl));
    return r;
  }

  Atom evaluated() const {
    Atom r{predicate};
    r.args.reserve(args.size());
    for (const Term& a : args) r.args.push_back(a.evaluated());
    return r;
  }

  int compare(const Atom& o) const {
    if (int c = predicate.compare(o.predicate); c != 0) return c < 0 ? -1 : 1;
    if (args.size() != o.args.size()) return args.size() < o.args.size() ? -1 : 1;
    for (size_t i = 0; i < args.size(); ++i)
      if (int c = args[i].compare(o.args[i]); c != 0) return c;
    return 0;
  }

  bool operator==(const Atom& o) const { return compare(o) == 0; }
  bool operator!=(const Atom& o) const { return compare(o) != 0; }
  bool operator<(const Atom& o) const { return compare(o) < 0; }

  size_t hash() const {
    size_t h = std::hash<std::string>{}(predicate);
    for (const Term& a : args) h ^= a.hash() + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }

  void print(std::ostream& os) const {
    os << predicate;
    if (!args.empty()) {
      os << '(';
      for (size_t i = 0; i < args.size(); ++i) {
        if (i) os << ',';
        args[i].print(os);
      }
      os << ')';
    }
  }

  std::string str() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }
};

inline std::ostream& operator<<(std::ostream& os, const Atom& a) {
  a.print(os);
  return os;
}

struct AtomHash {
  size_t operator()(const Atom& a) const { return a.hash(); }
};

}  // namespace aspctl
