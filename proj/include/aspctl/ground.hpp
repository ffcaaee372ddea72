#pragma once

// Naive bottom-up instantiation. Variables range over the derivable atom
// universe, which grows monotonically as program layers and online facts are
// installed; instantiation re-runs to fixpoint so that facts arriving late
// (declared #external) still trigger every rule they enable.
//
// Choice heads are compiled away here: each ground element e gets a fresh
// complement atom ~e plus the pair of rules  e :- body, not ~e  and
// ~e :- body, not e. Cardinality bounds are kept separately and checked
// against full candidate models during search.

#include <algorithm>
#include <cassert>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "aspctl/config.hpp"
#include "aspctl/program.hpp"

namespace aspctl {

// Atoms with this predicate prefix are solver-internal (choice complements).
inline constexpr char kInternalPrefix = '~';

inline bool internal_atom(const Atom& a) {
  return !a.predicate.empty() && a.predicate[0] == kInternalPrefix;
}

class AtomTable {
 public:
  int intern(const Atom& a) {
    std::string repr = a.str();
    auto it = index_.find(repr);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(atoms_.size());
    atoms_.push_back(a);
    reprs_.push_back(repr);
    index_.emplace(std::move(repr), id);
    return id;
  }

  std::optional<int> find(const Atom& a) const {
    auto it = index_.find(a.str());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Atom& atom(int id) const { return atoms_[id]; }
  const std::string& repr(int id) const { return reprs_[id]; }
  size_t size() const { return atoms_.size(); }

 private:
  std::vector<Atom> atoms_;
  std::vector<std::string> reprs_;
  std::unordered_map<std::string, int> index_;
};

struct GroundRule {
  int head = -1;  // -1 marks an integrity constraint
  std::vector<int> pos;
  std::vector<int> neg;
};

struct ChoiceBound {
  std::vector<int> pos;
  std::vector<int> neg;
  std::vector<int> elements;
  long long lower = 0;
  long long upper = std::numeric_limits<long long>::max();
};

// Self-contained ground program snapshot handed to the solver. Atom ids are
// local and sorted by textual representation, which fixes both the branching
// order of the search and the rendering order of models.
struct GroundProgram {
  std::vector<Atom> atoms;
  std::vector<std::string> reprs;
  std::vector<GroundRule> rules;
  std::vector<ChoiceBound> bounds;
  std::vector<std::pair<int, bool>> assumptions;

  int atom_count() const { return static_cast<int>(atoms.size()); }

  std::optional<int> find(const Atom& a) const {
    std::string repr = a.str();
    auto it = std::lower_bound(reprs.begin(), reprs.end(), repr);
    if (it == reprs.end() || *it != repr) return std::nullopt;
    return static_cast<int>(it - reprs.begin());
  }

  bool internal(int id) const { return !reprs[id].empty() && reprs[id][0] == kInternalPrefix; }
};

class Grounder {
 public:
  Grounder(ReactiveProgram program, SolveConfig config)
      : program_(std::move(program)), config_(config) {
    for (size_t i = 0; i < program_.parts.size(); ++i)
      if (program_.parts[i].kind == ProgramPart::Kind::base)
        installed_.push_back({static_cast<int>(i), 0});
    refresh();
  }

  int grounded_horizon() const { return horizon_; }
  const AtomTable& atoms() const { return table_; }
  const std::vector<GroundRule>& rules() const { return rules_; }
  const std::vector<ChoiceBound>& bounds() const { return bounds_; }

  // Installs cumulative layers up to `step`. Already-grounded layers are
  // never re-installed; calling with step <= grounded_horizon() is a no-op.
  void advance_to(int step) {
    if (step > config_.horizon_cap) throw HorizonCapExceeded(config_.horizon_cap);
    for (int s = horizon_ + 1; s <= step; ++s)
      for (size_t i = 0; i < program_.parts.size(); ++i)
        if (program_.parts[i].kind == ProgramPart::Kind::cumulative)
          installed_.push_back({static_cast<int>(i), s});
    if (step > horizon_) horizon_ = step;
    refresh();
  }

  void add_fact(const Atom& atom) {
    if (!atom.ground()) throw GroundingError("online fact is not ground: " + atom.str());
    Atom a = atom.evaluated();
    check_depth(a);
    int id = table_.intern(a);
    mark_derivable(id, nullptr);
    emit_rule(GroundRule{id, {}, {}}, nullptr);
  }

  void add_constraint(const Rule& rule) {
    if (rule.kind != Rule::HeadKind::constraint || !rule.ground())
      throw GroundingError("expected a ground integrity constraint: " + rule.str());
    for (const Comparison& c : rule.builtins)
      if (!c.holds()) return;  // trivially satisfied
    GroundRule gr;
    for (const Atom& a : rule.body_pos) gr.pos.push_back(table_.intern(a.evaluated()));
    for (const Atom& a : rule.body_neg) gr.neg.push_back(table_.intern(a.evaluated()));
    std::sort(gr.pos.begin(), gr.pos.end());
    std::sort(gr.neg.begin(), gr.neg.end());
    emit_rule(std::move(gr), nullptr);
  }

  // Re-runs instantiation of every installed layer until nothing new appears.
  void refresh() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [part_idx, step] : installed_) {
        const ProgramPart& part = program_.parts[part_idx];
        for (const Rule& rule : part.rules)
          changed |= instantiate(rule, part.parameter, step, nullptr);
      }
    }
  }

  // Derivable universe snapshot, sorted by representation.
  std::vector<Atom> universe() const {
    std::vector<Atom> out;
    for (size_t id = 0; id < table_.size(); ++id)
      if (id < derivable_.size() && derivable_[id]) out.push_back(table_.atom(static_cast<int>(id)));
    std::sort(out.begin(), out.end());
    return out;
  }

  bool in_universe(const Atom& a) const {
    auto id = table_.find(a);
    return id && *id < static_cast<int>(derivable_.size()) && derivable_[*id];
  }

  // Assembles the program for a query at `horizon`: every persistent rule
  // plus the volatile parts instantiated at the horizon plus the given
  // step-volatile online items. The persistent state is left untouched.
  GroundProgram query_at(int horizon, const std::vector<Atom>& volatile_facts,
                         const std::vector<Rule>& volatile_constraints) {
    if (horizon > horizon_)
      throw std::logic_error("query_at: horizon " + std::to_string(horizon) +
                             " beyond grounded horizon " + std::to_string(horizon_));
    Overlay overlay;
    for (const Atom& a : volatile_facts) {
      Atom ev = a.evaluated();
      check_depth(ev);
      int id = table_.intern(ev);
      mark_derivable(id, &overlay);
      emit_rule(GroundRule{id, {}, {}}, &overlay);
    }
    for (const Rule& rule : volatile_constraints) {
      bool skip = false;
      for (const Comparison& c : rule.builtins)
        if (!c.holds()) skip = true;
      if (skip) continue;
      GroundRule gr;
      for (const Atom& a : rule.body_pos) gr.pos.push_back(table_.intern(a.evaluated()));
      for (const Atom& a : rule.body_neg) gr.neg.push_back(table_.intern(a.evaluated()));
      std::sort(gr.pos.begin(), gr.pos.end());
      std::sort(gr.neg.begin(), gr.neg.end());
      emit_rule(std::move(gr), &overlay);
    }

    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < program_.parts.size(); ++i) {
        const ProgramPart& part = program_.parts[i];
        if (part.kind != ProgramPart::Kind::volatile_) continue;
        for (const Rule& rule : part.rules)
          changed |= instantiate(rule, part.parameter, horizon, &overlay);
      }
      // Volatile heads may enable persistent schemata; those consequences
      // stay query-local.
      if (overlay.added_derivable) {
        for (const auto& [part_idx, step] : installed_) {
          const ProgramPart& part = program_.parts[part_idx];
          for (const Rule& rule : part.rules)
            changed |= instantiate(rule, part.parameter, step, &overlay);
        }
      }
    }
    return assemble(overlay);
  }

  GroundProgram snapshot() { return assemble(Overlay{}); }

 private:
  struct Overlay {
    std::vector<GroundRule> rules;
    std::vector<ChoiceBound> bounds;
    std::unordered_set<std::string> keys;
    std::unordered_set<int> derivable;
    std::map<std::pair<std::string, int>, std::vector<int>> by_pred;
    bool added_derivable = false;
  };

  void check_depth(const Atom& a) const {
    if (a.term_depth() > config_.term_depth_cap)
      throw GroundingError("term depth cap (" + std::to_string(config_.term_depth_cap) +
                           ") exceeded by atom " + a.str());
  }

  bool derivable_in(int id, const Overlay* overlay) const {
    if (id < static_cast<int>(derivable_.size()) && derivable_[id]) return true;
    return overlay && overlay->derivable.count(id);
  }

  bool mark_derivable(int id, Overlay* overlay) {
    if (derivable_in(id, overlay)) return false;
    const Atom& a = table_.atom(id);
    std::pair<std::string, int> key{a.predicate, a.arity()};
    if (overlay) {
      overlay->derivable.insert(id);
      overlay->by_pred[key].push_back(id);
      overlay->added_derivable = true;
    } else {
      if (id >= static_cast<int>(derivable_.size())) derivable_.resize(id + 1, 0);
      derivable_[id] = 1;
      by_pred_[key].push_back(id);
    }
    return true;
  }

  static std::string rule_key(const GroundRule& r) {
    std::string k = "R" + std::to_string(r.head) + "|";
    for (int p : r.pos) k += std::to_string(p) + ",";
    k += "|";
    for (int n : r.neg) k += std::to_string(n) + ",";
    return k;
  }

  static std::string bound_key(const ChoiceBound& b) {
    std::string k = "B" + std::to_string(b.lower) + "," + std::to_string(b.upper) + "|";
    for (int e : b.elements) k += std::to_string(e) + ",";
    k += "|";
    for (int p : b.pos) k += std::to_string(p) + ",";
    k += "|";
    for (int n : b.neg) k += std::to_string(n) + ",";
    return k;
  }

  bool emit_rule(GroundRule r, Overlay* overlay) {
    std::string key = rule_key(r);
    if (seen_.count(key)) return false;
    if (overlay) {
      if (!overlay->keys.insert(std::move(key)).second) return false;
      overlay->rules.push_back(std::move(r));
    } else {
      seen_.insert(std::move(key));
      rules_.push_back(std::move(r));
    }
    return true;
  }

  bool emit_bound(ChoiceBound b, Overlay* overlay) {
    std::string key = bound_key(b);
    if (bound_seen_.count(key)) return false;
    if (overlay) {
      if (!overlay->keys.insert(std::move(key)).second) return false;
      overlay->bounds.push_back(std::move(b));
    } else {
      bound_seen_.insert(std::move(key));
      bounds_.push_back(std::move(b));
    }
    return true;
  }

  // Matches a (possibly partially bound) pattern term against a ground term.
  static bool match_term(const Term& pattern, const Term& ground, Binding& binding) {
    switch (pattern.kind()) {
      case Term::Kind::integer:
        return ground.is_integer() && ground.value() == pattern.value();
      case Term::Kind::symbol:
        return ground.is_symbol() && ground.name() == pattern.name();
      case Term::Kind::variable: {
        auto it = binding.find(pattern.name());
        if (it != binding.end()) return it->second == ground;
        binding.emplace(pattern.name(), ground);
        return true;
      }
      case Term::Kind::compound: {
        if (pattern.is_arith())
          throw GroundingError("arithmetic over unbound variables in positive body: " +
                               pattern.str());
        if (!ground.is_compound() || ground.name() != pattern.name() ||
            ground.args().size() != pattern.args().size())
          return false;
        for (size_t i = 0; i < pattern.args().size(); ++i)
          if (!match_term(pattern.args()[i], ground.args()[i], binding)) return false;
        return true;
      }
    }
    return false;
  }

  static bool match_atom(const Atom& pattern, const Atom& ground, Binding& binding) {
    if (pattern.predicate != ground.predicate || pattern.args.size() != ground.args.size())
      return false;
    for (size_t i = 0; i < pattern.args.size(); ++i)
      if (!match_term(pattern.args[i], ground.args[i], binding)) return false;
    return true;
  }

  // Instantiates one rule schema with the part parameter substituted by
  // `step`. Returns true if anything new was emitted.
  bool instantiate(const Rule& rule, const std::string& parameter, int step, Overlay* overlay) {
    Rule timed = rule;
    if (!parameter.empty()) {
      Term value = Term::integer(step);
      if (timed.kind == Rule::HeadKind::atom) timed.head = timed.head.with_symbol(parameter, value);
      if (timed.kind == Rule::HeadKind::choice)
        for (Atom& a : timed.choice.elements) a = a.with_symbol(parameter, value);
      for (Atom& a : timed.body_pos) a = a.with_symbol(parameter, value);
      for (Atom& a : timed.body_neg) a = a.with_symbol(parameter, value);
      for (Comparison& c : timed.builtins) c = c.with_symbol(parameter, value);
    }
    Binding binding;
    std::vector<int> pos_ids;
    std::vector<char> builtin_done(timed.builtins.size(), 0);
    return join(timed, 0, binding, pos_ids, builtin_done, overlay);
  }

  bool join(const Rule& rule, size_t idx, Binding& binding, std::vector<int>& pos_ids,
            std::vector<char> builtin_done, Overlay* overlay) {
    // Evaluate every builtin whose variables are bound; prune on failure.
    for (size_t i = 0; i < rule.builtins.size(); ++i) {
      if (builtin_done[i]) continue;
      Comparison c = rule.builtins[i].substituted(binding);
      if (!c.ground()) continue;
      builtin_done[i] = 1;
      if (!c.holds()) return false;
    }
    if (idx == rule.body_pos.size()) return emit(rule, binding, pos_ids, overlay);

    Atom pattern = rule.body_pos[idx].substituted(binding);
    for (Term& t : pattern.args) t = t.partially_evaluated();
    std::pair<std::string, int> key{pattern.predicate, pattern.arity()};
    // Snapshot the candidates: emitting may extend the very index being
    // scanned; additions are picked up by the enclosing fixpoint.
    std::vector<int> candidates;
    if (auto it = by_pred_.find(key); it != by_pred_.end()) candidates = it->second;
    if (overlay) {
      if (auto it = overlay->by_pred.find(key); it != overlay->by_pred.end())
        candidates.insert(candidates.end(), it->second.begin(), it->second.end());
    }
    bool produced = false;
    for (int id : candidates) {
      Binding extended = binding;
      if (!match_atom(pattern, table_.atom(id), extended)) continue;
      pos_ids.push_back(id);
      produced |= join(rule, idx + 1, extended, pos_ids, builtin_done, overlay);
      pos_ids.pop_back();
    }
    return produced;
  }

  bool emit(const Rule& rule, const Binding& binding, const std::vector<int>& pos_ids,
            Overlay* overlay) {
    GroundRule base;
    base.pos = pos_ids;
    for (const Atom& a : rule.body_neg) {
      Atom ground = a.substituted(binding).evaluated();
      check_depth(ground);
      base.neg.push_back(table_.intern(ground));
    }
    std::sort(base.pos.begin(), base.pos.end());
    base.pos.erase(std::unique(base.pos.begin(), base.pos.end()), base.pos.end());
    std::sort(base.neg.begin(), base.neg.end());
    base.neg.erase(std::unique(base.neg.begin(), base.neg.end()), base.neg.end());

    bool produced = false;
    switch (rule.kind) {
      case Rule::HeadKind::constraint: {
        base.head = -1;
        produced |= emit_rule(std::move(base), overlay);
        break;
      }
      case Rule::HeadKind::atom: {
        Atom head = rule.head.substituted(binding).evaluated();
        check_depth(head);
        base.head = table_.intern(head);
        produced |= mark_derivable(base.head, overlay);
        produced |= emit_rule(std::move(base), overlay);
        break;
      }
      case Rule::HeadKind::choice: {
        std::vector<int> element_ids;
        for (const Atom& e : rule.choice.elements) {
          Atom ground = e.substituted(binding).evaluated();
          check_depth(ground);
          int id = table_.intern(ground);
          if (std::find(element_ids.begin(), element_ids.end(), id) == element_ids.end())
            element_ids.push_back(id);
        }
        for (int id : element_ids) {
          Atom complement = table_.atom(id);
          complement.predicate.insert(complement.predicate.begin(), kInternalPrefix);
          int cid = table_.intern(complement);
          produced |= mark_derivable(id, overlay);
          produced |= mark_derivable(cid, overlay);
          GroundRule on = base;
          on.head = id;
          on.neg.push_back(cid);
          std::sort(on.neg.begin(), on.neg.end());
          GroundRule off = base;
          off.head = cid;
          off.neg.push_back(id);
          std::sort(off.neg.begin(), off.neg.end());
          produced |= emit_rule(std::move(on), overlay);
          produced |= emit_rule(std::move(off), overlay);
        }
        if (rule.choice.lower || rule.choice.upper) {
          ChoiceBound bound;
          bound.pos = base.pos;
          bound.neg = base.neg;
          bound.elements = element_ids;
          if (rule.choice.lower) bound.lower = *rule.choice.lower;
          if (rule.choice.upper) bound.upper = *rule.choice.upper;
          produced |= emit_bound(std::move(bound), overlay);
        }
        break;
      }
    }
    return produced;
  }

  GroundProgram assemble(const Overlay& overlay) const {
    std::set<int> used;
    auto touch_rule = [&used](const GroundRule& r) {
      if (r.head >= 0) used.insert(r.head);
      used.insert(r.pos.begin(), r.pos.end());
      used.insert(r.neg.begin(), r.neg.end());
    };
    auto touch_bound = [&used](const ChoiceBound& b) {
      used.insert(b.pos.begin(), b.pos.end());
      used.insert(b.neg.begin(), b.neg.end());
      used.insert(b.elements.begin(), b.elements.end());
    };
    for (const GroundRule& r : rules_) touch_rule(r);
    for (const GroundRule& r : overlay.rules) touch_rule(r);
    for (const ChoiceBound& b : bounds_) touch_bound(b);
    for (const ChoiceBound& b : overlay.bounds) touch_bound(b);

    std::vector<std::pair<std::string, int>> order;
    order.reserve(used.size());
    for (int id : used) order.emplace_back(table_.repr(id), id);
    std::sort(order.begin(), order.end());

    GroundProgram out;
    std::unordered_map<int, int> remap;
    out.atoms.reserve(order.size());
    out.reprs.reserve(order.size());
    for (size_t i = 0; i < order.size(); ++i) {
      remap[order[i].second] = static_cast<int>(i);
      out.reprs.push_back(order[i].first);
      out.atoms.push_back(table_.atom(order[i].second));
    }
    auto map_rule = [&remap](const GroundRule& r) {
      GroundRule m;
      m.head = r.head < 0 ? -1 : remap.at(r.head);
      for (int p : r.pos) m.pos.push_back(remap.at(p));
      for (int n : r.neg) m.neg.push_back(remap.at(n));
      return m;
    };
    auto map_bound = [&remap](const ChoiceBound& b) {
      ChoiceBound m;
      m.lower = b.lower;
      m.upper = b.upper;
      for (int p : b.pos) m.pos.push_back(remap.at(p));
      for (int n : b.neg) m.neg.push_back(remap.at(n));
      for (int e : b.elements) m.elements.push_back(remap.at(e));
      return m;
    };
    for (const GroundRule& r : rules_) out.rules.push_back(map_rule(r));
    for (const GroundRule& r : overlay.rules) out.rules.push_back(map_rule(r));
    for (const ChoiceBound& b : bounds_) out.bounds.push_back(map_bound(b));
    for (const ChoiceBound& b : overlay.bounds) out.bounds.push_back(map_bound(b));
    return out;
  }

  friend std::vector<Rule> ground_part(const ProgramPart&, int, const std::vector<Atom>&);

  // Seeds a derivable atom without creating a fact rule (used by ground_part).
  void seed(const Atom& a) {
    int id = table_.intern(a.evaluated());
    mark_derivable(id, nullptr);
  }

  ReactiveProgram program_;
  SolveConfig config_;
  AtomTable table_;
  std::vector<char> derivable_;
  std::map<std::pair<std::string, int>, std::vector<int>> by_pred_;
  std::vector<GroundRule> rules_;
  std::vector<ChoiceBound> bounds_;
  std::unordered_set<std::string> seen_;
  std::unordered_set<std::string> bound_seen_;
  std::vector<std::pair<int, int>> installed_;  // (part index, step)
  int horizon_ = 0;
};

// Instantiates a single program part at `step` against a fixed universe of
// ground atoms, returning the produced ground rules (choice heads compiled).
// Rules whose positive body cannot be satisfied are dropped.
inline std::vector<Rule> ground_part(const ProgramPart& part, int step,
                                     const std::vector<Atom>& universe) {
  ReactiveProgram prog;
  prog.parts.push_back(part);
  SolveConfig cfg;
  Grounder g(ReactiveProgram{}, cfg);
  g.program_ = prog;
  for (const Atom& a : universe) g.seed(a);
  g.installed_.clear();
  g.installed_.push_back({0, step});
  g.refresh();
  std::vector<Rule> out;
  for (const GroundRule& gr : g.rules()) {
    Rule r;
    if (gr.head < 0) {
      r.kind = Rule::HeadKind::constraint;
    } else {
      r.kind = Rule::HeadKind::atom;
      r.head = g.atoms().atom(gr.head);
    }
    for (int p : gr.pos) r.body_pos.push_back(g.atoms().atom(p));
    for (int n : gr.neg) r.body_neg.push_back(g.atoms().atom(n));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace aspctl
