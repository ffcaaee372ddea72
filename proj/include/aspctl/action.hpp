#pragma once

// Goal-oriented client/server protocol with the usual state machine:
//
//   pending -> active -> succeeded | aborted | preempting
//   pending -> preempted
//   preempting -> preempted
//
// A handle observes exactly one terminal state and exactly one result.
// Servers poll their endpoint (typically once per simulation tick), publish
// feedback while active, and finish goals themselves.

#include <any>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aspctl/errors.hpp"

namespace aspctl {

enum class GoalState { pending, active, preempting, succeeded, aborted, preempted };

inline const char* goal_state_name(GoalState s) {
  switch (s) {
    case GoalState::pending: return "pending";
    case GoalState::active: return "active";
    case GoalState::preempting: return "preempting";
    case GoalState::succeeded: return "succeeded";
    case GoalState::aborted: return "aborted";
    case GoalState::preempted: return "preempted";
  }
  return "?";
}

inline bool goal_state_terminal(GoalState s) {
  return s == GoalState::succeeded || s == GoalState::aborted || s == GoalState::preempted;
}

inline bool legal_goal_transition(GoalState from, GoalState to) {
  switch (from) {
    case GoalState::pending:
      return to == GoalState::active || to == GoalState::preempted;
    case GoalState::active:
      return to == GoalState::succeeded || to == GoalState::aborted ||
             to == GoalState::preempting;
    case GoalState::preempting:
      return to == GoalState::preempted;
    default:
      return false;
  }
}

namespace detail_action {

struct GoalRecordCore {
  std::mutex mu;
  uint64_t id = 0;
  GoalState state = GoalState::pending;
  std::any goal;
  std::optional<std::any> result;
  std::deque<std::any> feedback;
  bool cancel_requested = false;

  // All state changes funnel through here so illegal transitions and
  // duplicate results are impossible by construction.
  void transition(GoalState to, std::optional<std::any> res = std::nullopt) {
    if (!legal_goal_transition(state, to))
      throw ControlError(std::string("illegal goal transition ") + goal_state_name(state) +
                         " -> " + goal_state_name(to));
    if (goal_state_terminal(to)) {
      if (result.has_value()) throw ControlError("duplicate result for goal");
      if (res)
        result = std::move(*res);
      else
        result = std::any{};
    } else if (res) {
      throw ControlError("result supplied on non-terminal transition");
    }
    state = to;
  }
};

}  // namespace detail_action

// Client-side view of one goal.
class GoalHandle {
 public:
  GoalHandle() = default;
  explicit GoalHandle(std::shared_ptr<detail_action::GoalRecordCore> core)
      : core_(std::move(core)) {}

  bool valid() const { return core_ != nullptr; }

  GoalState state() const {
    std::lock_guard<std::mutex> lock(core_->mu);
    return core_->state;
  }

  bool done() const { return goal_state_terminal(state()); }

  // Requests cancellation. Pending goals terminate immediately; active goals
  // enter preempting until the server confirms. No-op once terminal.
  void cancel() {
    std::lock_guard<std::mutex> lock(core_->mu);
    if (goal_state_terminal(core_->state)) return;
    core_->cancel_requested = true;
    if (core_->state == GoalState::pending)
      core_->transition(GoalState::preempted);
    else if (core_->state == GoalState::active)
      core_->transition(GoalState::preempting);
  }

  // The result payload, available exactly at a terminal state.
  std::optional<std::any> result() const {
    std::lock_guard<std::mutex> lock(core_->mu);
    if (!goal_state_terminal(core_->state)) return std::nullopt;
    return core_->result;
  }

  template <class T>
  std::optional<T> result_as() const {
    auto r = result();
    if (!r || !r->has_value()) return std::nullopt;
    return std::any_cast<T>(*r);
  }

  std::vector<std::any> take_feedback() {
    std::lock_guard<std::mutex> lock(core_->mu);
    std::vector<std::any> out(core_->feedback.begin(), core_->feedback.end());
    core_->feedback.clear();
    return out;
  }

 private:
  std::shared_ptr<detail_action::GoalRecordCore> core_;
};

// Server-side endpoint. Owned by whichever component executes the goals.
class ActionServer {
 public:
  struct Ticket {
    uint64_t id = 0;
    std::any goal;
  };

  explicit ActionServer(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  // Next pending goal, transitioned to active. Cancelled pending goals are
  // skipped (they are already preempted).
  std::optional<Ticket> try_accept() {
    std::lock_guard<std::mutex> lock(mu_);
    while (!pending_.empty()) {
      auto core = pending_.front();
      pending_.pop_front();
      std::lock_guard<std::mutex> goal_lock(core->mu);
      if (core->state != GoalState::pending) continue;
      core->transition(GoalState::active);
      active_[core->id] = core;
      return Ticket{core->id, core->goal};
    }
    return std::nullopt;
  }

  bool has_pending() const {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& core : pending_) {
      std::lock_guard<std::mutex> goal_lock(core->mu);
      if (core->state == GoalState::pending) return true;
    }
    return false;
  }

  bool preempt_requested(uint64_t id) const {
    auto core = find(id);
    std::lock_guard<std::mutex> lock(core->mu);
    return core->cancel_requested || core->state == GoalState::preempting;
  }

  void publish_feedback(uint64_t id, std::any fb) {
    auto core = find(id);
    std::lock_guard<std::mutex> lock(core->mu);
    if (goal_state_terminal(core->state))
      throw ControlError("feedback after terminal state");
    core->feedback.push_back(std::move(fb));
  }

  void succeed(uint64_t id, std::any result) { finish(id, GoalState::succeeded, std::move(result)); }
  void abort(uint64_t id, std::any result) { finish(id, GoalState::aborted, std::move(result)); }

  // Confirms a preempt (or preempts an active goal server-side).
  void confirm_preempt(uint64_t id, std::any result = {}) {
    auto core = find(id);
    {
      std::lock_guard<std::mutex> lock(core->mu);
      if (core->state == GoalState::active) core->transition(GoalState::preempting);
      core->transition(GoalState::preempted, std::move(result));
    }
    forget(id);
  }

 private:
  friend class ActionHub;

  GoalHandle enqueue(std::any goal) {
    auto core = std::make_shared<detail_action::GoalRecordCore>();
    {
      std::lock_guard<std::mutex> lock(mu_);
      core->id = next_id_++;
      core->goal = std::move(goal);
      pending_.push_back(core);
    }
    return GoalHandle(core);
  }

  std::shared_ptr<detail_action::GoalRecordCore> find(uint64_t id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = active_.find(id);
    if (it == active_.end()) throw ControlError("unknown goal id on server '" + name_ + "'");
    return it->second;
  }

  void finish(uint64_t id, GoalState to, std::any result) {
    auto core = find(id);
    {
      std::lock_guard<std::mutex> lock(core->mu);
      core->transition(to, std::move(result));
    }
    forget(id);
  }

  void forget(uint64_t id) {
    std::lock_guard<std::mutex> lock(mu_);
    active_.erase(id);
  }

  std::string name_;
  mutable std::mutex mu_;
  uint64_t next_id_ = 1;
  std::deque<std::shared_ptr<detail_action::GoalRecordCore>> pending_;
  std::map<uint64_t, std::shared_ptr<detail_action::GoalRecordCore>> active_;
};

// Name registry connecting action clients to servers.
class ActionHub {
 public:
  std::shared_ptr<ActionServer> register_server(const std::string& name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = servers_[name];
    if (slot) throw ControlError("action server '" + name + "' already registered");
    slot = std::make_shared<ActionServer>(name);
    return slot;
  }

  GoalHandle send_goal(const std::string& server, std::any goal) {
    std::shared_ptr<ActionServer> s;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = servers_.find(server);
      if (it == servers_.end()) throw ControlError("unknown action server '" + server + "'");
      s = it->second;
    }
    return s->enqueue(std::move(goal));
  }

  bool has_server(const std::string& name) const {
    std::lock_guard<std::mutex> lock(mu_);
    return servers_.count(name) > 0;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<ActionServer>> servers_;
};

}  // namespace aspctl
