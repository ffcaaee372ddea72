#pragma once

// Stable-model search over ground programs: chronological backtracking in a
// fixed atom order (lexicographic by atom text, false branch first) with
// forward/backward rule propagation and support counting. Stability is
// verified at every total assignment via the reduct, so the propagation only
// has to be sound, not complete. Intended for desk-scale programs; there is
// deliberately no clause learning.

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aspctl/ground.hpp"

namespace aspctl {

// A stable model projected onto non-internal atoms, sorted lexicographically
// by rendered text.
class AnswerSet {
 public:
  AnswerSet() = default;
  AnswerSet(std::vector<Atom> atoms, std::vector<std::string> reprs)
      : atoms_(std::move(atoms)), reprs_(std::move(reprs)) {}

  static AnswerSet of(std::vector<Atom> atoms) {
    std::vector<std::pair<std::string, Atom>> tmp;
    tmp.reserve(atoms.size());
    for (Atom& a : atoms) tmp.emplace_back(a.str(), std::move(a));
    std::sort(tmp.begin(), tmp.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Atom> as;
    std::vector<std::string> rs;
    for (auto& [r, a] : tmp) {
      rs.push_back(std::move(r));
      as.push_back(std::move(a));
    }
    return AnswerSet(std::move(as), std::move(rs));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  bool contains(const Atom& a) const {
    std::string repr = a.str();
    return std::binary_search(reprs_.begin(), reprs_.end(), repr);
  }

  // Atoms of the given predicate and arity, in lexicographic order.
  std::vector<Atom> project(std::string_view predicate, int arity) const {
    std::vector<Atom> out;
    for (const Atom& a : atoms_)
      if (a.predicate == predicate && a.arity() == arity) out.push_back(a);
    return out;
  }

  std::string render() const {
    std::string out;
    for (size_t i = 0; i < reprs_.size(); ++i) {
      if (i) out += ' ';
      out += reprs_[i];
    }
    return out;
  }

  bool operator==(const AnswerSet& o) const { return reprs_ == o.reprs_; }
  bool operator!=(const AnswerSet& o) const { return reprs_ != o.reprs_; }

 private:
  std::vector<Atom> atoms_;
  std::vector<std::string> reprs_;
};

// Gelfond-Lifschitz reduct: drops rules whose negative body intersects the
// candidate and strips negative literals from the rest.
inline std::vector<GroundRule> reduct(std::span<const GroundRule> rules,
                                      const std::vector<char>& candidate) {
  std::vector<GroundRule> out;
  for (const GroundRule& r : rules) {
    bool blocked = false;
    for (int n : r.neg)
      if (n < static_cast<int>(candidate.size()) && candidate[n]) {
        blocked = true;
        break;
      }
    if (blocked) continue;
    GroundRule d;
    d.head = r.head;
    d.pos = r.pos;
    out.push_back(std::move(d));
  }
  return out;
}

// Least model of a definite program (no negative literals) by forward
// chaining to fixpoint. Constraint rules (head -1) are ignored.
inline std::vector<char> least_model(std::span<const GroundRule> definite, int atom_count) {
  for (const GroundRule& r : definite)
    if (!r.neg.empty()) throw std::logic_error("least_model: program is not definite");
  std::vector<char> truth(atom_count, 0);
  std::vector<int> missing(definite.size());
  std::vector<std::vector<int>> watch(atom_count);
  std::vector<int> queue;
  for (size_t i = 0; i < definite.size(); ++i) {
    const GroundRule& r = definite[i];
    if (r.head < 0) continue;
    missing[i] = static_cast<int>(r.pos.size());
    for (int p : r.pos) watch[p].push_back(static_cast<int>(i));
    if (missing[i] == 0 && !truth[r.head]) {
      truth[r.head] = 1;
      queue.push_back(r.head);
    }
  }
  while (!queue.empty()) {
    int a = queue.back();
    queue.pop_back();
    for (int ri : watch[a]) {
      if (--missing[ri] == 0) {
        int h = definite[ri].head;
        if (h >= 0 && !truth[h]) {
          truth[h] = 1;
          queue.push_back(h);
        }
      }
    }
  }
  return truth;
}

// Atom-level wrappers over a GroundProgram snapshot.
inline GroundProgram reduct_program(const GroundProgram& p, const std::vector<Atom>& candidate) {
  std::vector<char> truth(p.atom_count(), 0);
  for (const Atom& a : candidate)
    if (auto id = p.find(a)) truth[*id] = 1;
  GroundProgram out;
  out.atoms = p.atoms;
  out.reprs = p.reprs;
  out.rules = reduct(p.rules, truth);
  return out;
}

inline std::vector<Atom> least_model_atoms(const GroundProgram& definite) {
  std::vector<char> truth = least_model(definite.rules, definite.atom_count());
  std::vector<Atom> out;
  for (int i = 0; i < definite.atom_count(); ++i)
    if (truth[i]) out.push_back(definite.atoms[i]);
  return out;
}

class ModelEnumerator {
 public:
  explicit ModelEnumerator(const GroundProgram& program) : p_(program) {
    n_ = p_.atom_count();
    value_.assign(n_, -1);
    live_support_.assign(n_, 0);
    rule_dead_.assign(p_.rules.size(), 0);
    occ_head_.resize(n_);
    occ_pos_.resize(n_);
    occ_neg_.resize(n_);
    for (size_t i = 0; i < p_.rules.size(); ++i) {
      const GroundRule& r = p_.rules[i];
      int ri = static_cast<int>(i);
      if (r.head >= 0) {
        ++live_support_[r.head];
        occ_head_[r.head].push_back(ri);
      }
      for (int a : r.pos) occ_pos_[a].push_back(ri);
      for (int a : r.neg) occ_neg_[a].push_back(ri);
    }
    bool ok = true;
    for (int a = 0; a < n_ && ok; ++a)
      if (live_support_[a] == 0) ok = assign(a, false);
    for (auto [a, v] : p_.assumptions)
      if (ok) ok = assign(a, v);
    for (size_t i = 0; i < p_.rules.size() && ok; ++i)
      ok = eval_rule(static_cast<int>(i));
    if (ok) ok = propagate();
    root_conflict_ = !ok;
  }

  // Yields the next stable model, or nullopt once the search space is
  // exhausted. Two enumerators over the same program yield identical
  // sequences.
  std::optional<AnswerSet> next() {
    if (exhausted_) return std::nullopt;
    if (!started_) {
      started_ = true;
      if (root_conflict_) {
        exhausted_ = true;
        return std::nullopt;
      }
    } else {
      if (!advance_after_conflict()) return std::nullopt;
    }
    while (true) {
      int a = next_unassigned();
      if (a < 0) {
        if (leaf_is_model()) return current_answer();
        if (!advance_after_conflict()) return std::nullopt;
        continue;
      }
      decisions_.push_back({a, false, trail_.size(), cursor_});
      if (!assign(a, false) || !propagate())
        if (!advance_after_conflict()) return std::nullopt;
    }
  }

  // Full truth assignment of the model produced by the last next() call,
  // indexed by program atom id (internal atoms included).
  std::vector<char> last_assignment() const {
    std::vector<char> out(n_, 0);
    for (int i = 0; i < n_; ++i) out[i] = value_[i] == 1;
    return out;
  }

 private:
  struct Event {
    enum Kind : unsigned char { assign_atom, rule_died, support_dec };
    Kind kind;
    int a;
  };

  struct Decision {
    int atom;
    bool tried_true;
    size_t trail_mark;
    int cursor_before;
  };

  bool assign(int a, bool v) {
    if (value_[a] != -1) return value_[a] == static_cast<signed char>(v);
    value_[a] = v ? 1 : 0;
    trail_.push_back({Event::assign_atom, a});
    if (v) {
      if (live_support_[a] == 0) return false;
      if (live_support_[a] == 1 && !backchain(a)) return false;
    }
    return true;
  }

  bool backchain(int a) {
    // Exactly one live rule can still support `a`; its body must hold.
    for (int ri : occ_head_[a]) {
      if (rule_dead_[ri]) continue;
      const GroundRule& r = p_.rules[ri];
      for (int pa : r.pos)
        if (!assign(pa, true)) return false;
      for (int na : r.neg)
        if (!assign(na, false)) return false;
      return true;
    }
    return false;
  }

  bool kill_rule(int ri) {
    if (rule_dead_[ri]) return true;
    rule_dead_[ri] = 1;
    trail_.push_back({Event::rule_died, ri});
    int h = p_.rules[ri].head;
    if (h < 0) return true;
    --live_support_[h];
    trail_.push_back({Event::support_dec, h});
    if (value_[h] == 1) {
      if (live_support_[h] == 0) return false;
      if (live_support_[h] == 1) return backchain(h);
    } else if (value_[h] == -1 && live_support_[h] == 0) {
      return assign(h, false);
    }
    return true;
  }

  bool eval_rule(int ri) {
    if (rule_dead_[ri]) return true;
    const GroundRule& r = p_.rules[ri];
    int unassigned = 0;
    int last_atom = -1;
    bool last_is_pos = false;
    for (int a : r.pos) {
      if (value_[a] == 0) return kill_rule(ri);
      if (value_[a] == -1) {
        ++unassigned;
        last_atom = a;
        last_is_pos = true;
      }
    }
    for (int a : r.neg) {
      if (value_[a] == 1) return kill_rule(ri);
      if (value_[a] == -1) {
        ++unassigned;
        last_atom = a;
        last_is_pos = false;
      }
    }
    if (unassigned == 0) {
      if (r.head < 0) return false;  // constraint fired
      return assign(r.head, true);
    }
    bool head_false = r.head < 0 || value_[r.head] == 0;
    if (head_false && unassigned == 1) return assign(last_atom, last_is_pos ? false : true);
    return true;
  }

  bool propagate() {
    while (prop_head_ < trail_.size()) {
      Event e = trail_[prop_head_++];
      if (e.kind != Event::assign_atom) continue;
      int a = e.a;
      for (int ri : occ_pos_[a])
        if (!eval_rule(ri)) return false;
      for (int ri : occ_neg_[a])
        if (!eval_rule(ri)) return false;
      for (int ri : occ_head_[a])
        if (!eval_rule(ri)) return false;
    }
    return true;
  }

  void undo_to(size_t mark) {
    while (trail_.size() > mark) {
      Event e = trail_.back();
      trail_.pop_back();
      switch (e.kind) {
        case Event::assign_atom:
          value_[e.a] = -1;
          break;
        case Event::rule_died:
          rule_dead_[e.a] = 0;
          break;
        case Event::support_dec:
          ++live_support_[e.a];
          break;
      }
    }
    prop_head_ = trail_.size();
  }

  bool backtrack_flip() {
    while (!decisions_.empty()) {
      Decision& d = decisions_.back();
      undo_to(d.trail_mark);
      cursor_ = d.cursor_before;
      if (!d.tried_true) {
        d.tried_true = true;
        if (assign(d.atom, true)) return true;
        continue;  // the flip conflicts right away; unwind further
      }
      decisions_.pop_back();
    }
    return false;
  }

  bool advance_after_conflict() {
    while (true) {
      if (!backtrack_flip()) {
        exhausted_ = true;
        return false;
      }
      if (propagate()) return true;
    }
  }

  int next_unassigned() {
    while (cursor_ < n_ && value_[cursor_] != -1) ++cursor_;
    return cursor_ < n_ ? cursor_ : -1;
  }

  bool leaf_is_model() const {
    for (const ChoiceBound& b : p_.bounds) {
      bool body = true;
      for (int a : b.pos)
        if (value_[a] != 1) body = false;
      for (int a : b.neg)
        if (value_[a] != 0) body = false;
      if (!body) continue;
      long long count = 0;
      for (int e : b.elements)
        if (value_[e] == 1) ++count;
      if (count < b.lower || count > b.upper) return false;
    }
    // Stability: the candidate must equal the least model of its reduct.
    std::vector<char> truth(n_, 0);
    for (int i = 0; i < n_; ++i) truth[i] = value_[i] == 1;
    std::vector<GroundRule> definite = reduct(p_.rules, truth);
    std::vector<char> least = least_model(definite, n_);
    return least == truth;
  }

  AnswerSet current_answer() const {
    std::vector<Atom> atoms;
    std::vector<std::string> reprs;
    for (int i = 0; i < n_; ++i)
      if (value_[i] == 1 && !p_.internal(i)) {
        atoms.push_back(p_.atoms[i]);
        reprs.push_back(p_.reprs[i]);
      }
    return AnswerSet(std::move(atoms), std::move(reprs));
  }

  const GroundProgram& p_;
  int n_ = 0;
  std::vector<signed char> value_;
  std::vector<int> live_support_;
  std::vector<char> rule_dead_;
  std::vector<std::vector<int>> occ_head_, occ_pos_, occ_neg_;
  std::vector<Event> trail_;
  size_t prop_head_ = 0;
  std::vector<Decision> decisions_;
  int cursor_ = 0;
  bool started_ = false;
  bool root_conflict_ = false;
  bool exhausted_ = false;
};

inline std::optional<AnswerSet> first_model(const GroundProgram& p) {
  ModelEnumerator e(p);
  return e.next();
}

inline std::vector<AnswerSet> all_models(const GroundProgram& p,
                                         size_t limit = static_cast<size_t>(-1)) {
  std::vector<AnswerSet> out;
  ModelEnumerator e(p);
  while (out.size() < limit) {
    auto m = e.next();
    if (!m) break;
    out.push_back(std::move(*m));
  }
  return out;
}

}  // namespace aspctl
