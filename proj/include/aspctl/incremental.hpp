#pragma once

// Incremental solving state: cumulative layers accumulate as the horizon
// grows, volatile program parts and step-volatile online items bind only at
// the horizon of the current query, and the horizon is extended until a
// model exists.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "aspctl/ground.hpp"
#include "aspctl/online.hpp"
#include "aspctl/solve.hpp"

namespace aspctl {

class IncrementalState {
 public:
  explicit IncrementalState(ReactiveProgram program, SolveConfig config = {})
      : config_(config), grounder_(std::move(program), config) {}

  int grounded_horizon() const { return grounder_.grounded_horizon(); }

  void advance_to(int k) { grounder_.advance_to(k); }

  // Installs one online item fed at `step`. Persistent items join the
  // accumulated program; volatile items only take part in queries at exactly
  // their step.
  void install(const OnlineItem& item, int step) {
    if (item.volatile_item) {
      volatile_items_[step].push_back(item);
      return;
    }
    if (item.kind == OnlineItem::Kind::fact)
      grounder_.add_fact(item.fact);
    else
      grounder_.add_constraint(item.constraint);
    grounder_.refresh();
  }

  // First model of the accumulated program with the volatile layer bound at
  // horizon k. Requires grounding to have reached k.
  std::optional<AnswerSet> solve_at_horizon(int k) {
    std::vector<Atom> vfacts;
    std::vector<Rule> vconstraints;
    if (auto it = volatile_items_.find(k); it != volatile_items_.end()) {
      for (const OnlineItem& item : it->second) {
        if (item.kind == OnlineItem::Kind::fact)
          vfacts.push_back(item.fact);
        else
          vconstraints.push_back(item.constraint);
      }
    }
    GroundProgram query = grounder_.query_at(k, vfacts, vconstraints);
    return first_model(query);
  }

  // Smallest horizon h >= lower_bound admitting a model, grounding further
  // layers on demand. Throws HorizonCapExceeded when the cap is hit first.
  std::pair<int, AnswerSet> solve_min_horizon(int lower_bound) {
    for (int h = std::max(lower_bound, 1);; ++h) {
      advance_to(h);  // throws past the cap
      if (auto model = solve_at_horizon(h)) return {h, std::move(*model)};
    }
  }

  const Grounder& grounder() const { return grounder_; }

 private:
  SolveConfig config_;
  Grounder grounder_;
  std::map<int, std::vector<OnlineItem>> volatile_items_;
};

}  // namespace aspctl
