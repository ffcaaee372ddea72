#pragma once

// The task-control core: tracks client goals, turns queued events and action
// results into per-cycle online updates, solves, extracts the action for the
// current cycle, dispatches it over the bus, and waits for its result before
// opening the next cycle.
//
// Cycle workflow: build update -> feed -> solve -> extract -> dispatch on
// out_rosoclingo -> await result on in_rosoclingo -> update goal records.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aspctl/action.hpp"
#include "aspctl/bus.hpp"
#include "aspctl/interfaces.hpp"
#include "aspctl/server.hpp"

namespace aspctl {

enum class GoalStatus { pending, active, succeeded, preempted, aborted };

inline const char* goal_status_name(GoalStatus s) {
  switch (s) {
    case GoalStatus::pending: return "pending";
    case GoalStatus::active: return "active";
    case GoalStatus::succeeded: return "succeeded";
    case GoalStatus::preempted: return "preempted";
    case GoalStatus::aborted: return "aborted";
  }
  return "?";
}

inline bool goal_status_terminal(GoalStatus s) {
  return s == GoalStatus::succeeded || s == GoalStatus::preempted || s == GoalStatus::aborted;
}

struct GoalRecord {
  std::string id;
  Term goal;
  int submit_cycle = 0;
  GoalStatus status = GoalStatus::pending;
  int package = 0;
  bool picked = false;
  bool cancel_requested = false;
};

struct DispatchedAction {
  std::string interface;
  Term param;
  int cycle = 0;
};

// The _action projection of a model, ordered by step.
inline std::vector<Atom> plan_projection(const AnswerSet& model) {
  std::vector<Atom> atoms = model.project("_action", 3);
  std::vector<Atom> lib = model.project("_action_lib", 3);
  atoms.insert(atoms.end(), lib.begin(), lib.end());
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    long long sa = a.args[2].value(), sb = b.args[2].value();
    if (sa != sb) return sa < sb;
    return a.str() < b.str();
  });
  return atoms;
}

struct CycleReport {
  int cycle = 0;
  OnlineUpdate update;
  int horizon = 0;
  std::vector<Atom> plan;
  std::optional<DispatchedAction> action;
  std::optional<Term> result;
  bool solver_unsat = false;

  std::string update_line() const {
    std::string out = "#step " + std::to_string(update.step) + ".";
    for (const OnlineItem& item : update.items) out += " " + item.str();
    out += " #endstep.";
    return out;
  }

  std::string plan_line() const {
    if (plan.empty()) return "-";
    std::string out;
    for (size_t i = 0; i < plan.size(); ++i) {
      if (i) out += ' ';
      out += plan[i].str();
    }
    return out;
  }

  std::string action_line() const {
    if (!action) return "idle";
    return action->interface + " " + action->param.str();
  }

  std::string result_line() const { return result ? result->str() : "-"; }

  std::string render() const {
    std::ostringstream os;
    os << "cycle " << cycle << "\n";
    os << "  update: " << update_line() << "\n";
    if (solver_unsat) {
      os << "  error: unsatisfiable within horizon cap\n";
      return os.str();
    }
    os << "  horizon: " << horizon << "\n";
    os << "  plan: " << plan_line() << "\n";
    os << "  action: " << action_line() << "\n";
    os << "  result: " << result_line() << "\n";
    return os.str();
  }

  std::string render_kv() const {
    std::ostringstream os;
    os << "cycle=" << cycle << " horizon=" << (solver_unsat ? std::string("none")
                                                            : std::to_string(horizon))
       << " update=\"" << update_line() << "\" plan=\"" << plan_line() << "\" action=\""
       << action_line() << "\" result=\"" << result_line() << "\"";
    return os.str();
  }
};

struct ControllerOptions {
  int max_pump_per_cycle = 100000;
  bool check_horizon_minimality = false;
};

class Controller {
 public:
  using Options = ControllerOptions;

  Controller(ReactiveProgram program, Bus& bus, Executor& executor,
             Options options = Options(), SolveConfig solve_config = SolveConfig())
      : options_(options), server_(std::move(program), solve_config), bus_(&bus) {
    bus.advertise<InterfaceMsg>(kTopicOut);
    bus.advertise<InterfaceMsg>(kTopicIn);
    in_sub_ = bus.subscribe<InterfaceMsg>(
        kTopicIn, executor, [this](const InterfaceMsg& msg) { on_return(msg); });
  }

  int cycle() const { return cycle_; }
  const std::vector<GoalRecord>& goals() const { return records_; }
  const std::vector<Atom>& committed_actions() const { return committed_; }

  void set_pump(std::function<void()> pump) { pump_ = std::move(pump); }

  // Registers a goal of the form goal(From,To,Id); it is fed to the solver
  // at the start of the next cycle. Returns the tracking id.
  std::string submit_goal(const Term& goal) {
    validate_goal_term(goal);
    int package = static_cast<int>(goal.args()[2].value());
    for (const GoalRecord& r : records_)
      if (!goal_status_terminal(r.status) && r.package == package)
        throw ControlError("duplicate package identifier " + std::to_string(package) +
                           " in an active goal");
    GoalRecord rec;
    rec.id = "g" + std::to_string(records_.size() + 1);
    rec.goal = goal;
    rec.submit_cycle = cycle_;
    rec.package = package;
    records_.push_back(rec);
    {
      std::lock_guard<std::mutex> lock(mu_);
      queued_events_.push_back(Event{Event::Kind::request, rec.id, goal, package});
    }
    return rec.id;
  }

  // Queues the cancellation; it is fed as _request(cancel(Id),C) next cycle.
  void cancel_goal(const std::string& goal_id) {
    GoalRecord& rec = find_goal(goal_id);
    if (goal_status_terminal(rec.status))
      throw ControlError("goal " + goal_id + " is already terminal");
    if (rec.cancel_requested) return;
    rec.cancel_requested = true;
    std::lock_guard<std::mutex> lock(mu_);
    queued_events_.push_back(Event{Event::Kind::cancel, rec.id, Term{}, rec.package});
  }

  void cancel_package(int package) {
    for (GoalRecord& r : records_)
      if (!goal_status_terminal(r.status) && r.package == package) {
        cancel_goal(r.id);
        return;
      }
    throw ControlError("no active goal for package " + std::to_string(package));
  }

  GoalStatus goal_status(const std::string& goal_id) const {
    for (const GoalRecord& r : records_)
      if (r.id == goal_id) return r.status;
    throw ControlError("unknown goal id '" + goal_id + "'");
  }

  bool all_terminal() const {
    for (const GoalRecord& r : records_)
      if (!goal_status_terminal(r.status)) return false;
    return true;
  }

  bool has_pending_input() const {
    std::lock_guard<std::mutex> lock(mu_);
    return !queued_events_.empty() || !arrived_results_.empty();
  }

  // The update the next cycle would feed: commit constraints for every
  // action whose result arrived, pins for cycles that ran no action, then
  // queued request events, then the corresponding _return facts.
  OnlineUpdate build_update() const {
    std::lock_guard<std::mutex> lock(mu_);
    OnlineUpdate update;
    update.step = cycle_;
    for (const ArrivedResult& res : arrived_results_) {
      Atom action{"_action",
                  {Term::symbol(res.interface), res.param, Term::integer(res.cycle)}};
      update.items.push_back(OnlineItem::make_constraint(Rule::constraint({}, {action})));
    }
    // Idle cycles must be pinned like executed actions are: with nothing
    // forbidding them, a later solve may place a fabricated action on the
    // empty step whenever that shortens the plan, and then diverge from
    // what actually happened.
    if (server_.knows_predicate("some_action", 1))
      for (int idle_cycle : idle_pins_) {
        Atom occupied{"some_action", {Term::integer(idle_cycle)}};
        update.items.push_back(OnlineItem::make_constraint(Rule::constraint({occupied}, {})));
      }
    for (const Event& ev : queued_events_) {
      Term payload = ev.kind == Event::Kind::request
                         ? ev.goal
                         : Term::compound("cancel", {Term::integer(ev.package)});
      Atom request{"_request", {payload, Term::integer(cycle_)}};
      update.items.push_back(OnlineItem::make_fact(request));
    }
    for (const ArrivedResult& res : arrived_results_) {
      Atom ret{"_return",
               {Term::symbol(res.interface), res.value, Term::integer(res.cycle)}};
      update.items.push_back(OnlineItem::make_fact(ret));
    }
    return update;
  }

  // The unique action scheduled for `cycle` in the model, if any.
  static std::optional<std::pair<std::string, Term>> extract_action(const AnswerSet& model,
                                                                    int cycle) {
    std::optional<std::pair<std::string, Term>> found;
    for (const Atom& a : plan_projection(model)) {
      if (a.args[2].value() != cycle) continue;
      if (found)
        throw ControlError("more than one action at cycle " + std::to_string(cycle) +
                           " (encoding bug)");
      if (!a.args[0].is_symbol())
        throw ControlError("action interface is not a symbol: " + a.str());
      found = {a.args[0].name(), a.args[1]};
    }
    return found;
  }

  // Runs one full cycle and reports what happened.
  CycleReport run_cycle() {
    drain_client_api();
    CycleReport report;
    report.cycle = cycle_;
    report.update = build_update();

    std::vector<Event> fed_events;
    {
      std::lock_guard<std::mutex> lock(mu_);
      fed_events.assign(queued_events_.begin(), queued_events_.end());
      queued_events_.clear();
      for (const ArrivedResult& res : arrived_results_)
        committed_.push_back(Atom{
            "_action", {Term::symbol(res.interface), res.param, Term::integer(res.cycle)}});
      arrived_results_.clear();
      idle_pins_.clear();
    }
    server_.feed(report.update);
    for (const Event& ev : fed_events)
      if (ev.kind == Event::Kind::request) {
        GoalRecord& rec = find_goal(ev.goal_id);
        if (rec.status == GoalStatus::pending) rec.status = GoalStatus::active;
      }

    ReactiveServer::Answer answer;
    try {
      answer = server_.get_answer();
    } catch (const HorizonCapExceeded&) {
      report.solver_unsat = true;
      for (GoalRecord& r : records_)
        if (!goal_status_terminal(r.status)) r.status = GoalStatus::aborted;
      finish_client_goals();
      ++cycle_;
      return report;
    }
    if (options_.check_horizon_minimality && answer.horizon - 1 >= server_.last_step()) {
      if (server_.state().solve_at_horizon(answer.horizon - 1).has_value())
        throw ControlError("horizon minimality violated at cycle " + std::to_string(cycle_));
    }
    report.horizon = answer.horizon;
    report.plan = plan_projection(answer.model);

    auto action = extract_action(answer.model, cycle_);
    if (action) {
      report.action = DispatchedAction{action->first, action->second, cycle_};
      dispatched_ = report.action;
      Atom fact{"_action",
                {Term::symbol(action->first), action->second, Term::integer(cycle_)}};
      bus_->publish(kTopicOut, InterfaceMsg{action->first, {fact.str()}});
      report.result = await_result();
    }

    if (!report.action) {
      std::lock_guard<std::mutex> lock(mu_);
      idle_pins_.push_back(report.cycle);
    }

    // Cancellations fed this cycle complete immediately unless the package
    // is on board, in which case the goal stays active until the disposal
    // delivery comes back.
    for (const Event& ev : fed_events) {
      if (ev.kind != Event::Kind::cancel) continue;
      GoalRecord& rec = find_goal(ev.goal_id);
      if (!goal_status_terminal(rec.status) && !rec.picked) rec.status = GoalStatus::preempted;
    }
    finish_client_goals();
    ++cycle_;
    return report;
  }

  // Exposes the controller itself through the action protocol: goals arrive
  // as goal(From,To,Id) terms, cancellations through the handle, terminal
  // status through the result.
  void bind_client_api(ActionHub& hub, const std::string& name = "rosoclingo") {
    api_server_ = hub.register_server(name);
  }

  const ReactiveServer& reactive_server() const { return server_; }

 private:
  struct Event {
    enum class Kind { request, cancel };
    Kind kind;
    std::string goal_id;
    Term goal;
    int package = 0;
  };

  struct ArrivedResult {
    std::string interface;
    Term param;
    int cycle = 0;
    Term value;
  };

  static void validate_goal_term(const Term& goal) {
    bool ok = goal.is_compound() && goal.name() == "goal" && goal.args().size() == 3 &&
              goal.args()[0].is_symbol() && goal.args()[1].is_symbol() &&
              goal.args()[2].is_integer();
    if (!ok)
      throw ControlError("goal term must look like goal(from,to,id): " + goal.str());
  }

  GoalRecord& find_goal(const std::string& id) {
    for (GoalRecord& r : records_)
      if (r.id == id) return r;
    throw ControlError("unknown goal id '" + id + "'");
  }

  void on_return(const InterfaceMsg& msg) {
    for (const std::string& text : msg.facts) {
      Atom fact = parse_atom_text(text);
      if (fact.predicate != "_return" || fact.arity() != 3)
        throw ControlError("unexpected fact on " + std::string(kTopicIn) + ": " + text);
      std::lock_guard<std::mutex> lock(mu_);
      if (!dispatched_)
        throw ControlError("result with no outstanding action: " + text);
      if (fact.args[0].name() != dispatched_->interface ||
          fact.args[2].value() != dispatched_->cycle)
        throw ControlError("result does not match the outstanding action: " + text);
      ArrivedResult res;
      res.interface = dispatched_->interface;
      res.param = dispatched_->param;
      res.cycle = dispatched_->cycle;
      res.value = fact.args[1];
      arrived_results_.push_back(res);
      dispatched_.reset();
      result_flag_ = true;
    }
  }

  Term await_result() {
    if (!pump_) throw ControlError("no pump configured; cannot await action results");
    result_flag_ = false;
    for (int i = 0; i < options_.max_pump_per_cycle; ++i) {
      if (result_flag_) break;
      pump_();
    }
    if (!result_flag_)
      throw ControlError("no result after " + std::to_string(options_.max_pump_per_cycle) +
                         " pump steps at cycle " + std::to_string(cycle_));
    Term value;
    {
      std::lock_guard<std::mutex> lock(mu_);
      value = arrived_results_.back().value;
    }
    apply_result(value);
    return value;
  }

  void apply_result(const Term& value) {
    std::string interface;
    Term param;
    {
      std::lock_guard<std::mutex> lock(mu_);
      interface = arrived_results_.back().interface;
      param = arrived_results_.back().param;
    }
    bool failure = value.is_compound() && value.name() == "failure";
    if (failure) return;
    if (interface == "pickup") {
      int package = static_cast<int>(param.value());
      for (GoalRecord& r : records_)
        if (!goal_status_terminal(r.status) && r.package == package) r.picked = true;
    } else if (interface == "deliver") {
      int package = static_cast<int>(param.value());
      for (GoalRecord& r : records_)
        if (!goal_status_terminal(r.status) && r.package == package)
          r.status = r.cancel_requested ? GoalStatus::preempted : GoalStatus::succeeded;
    }
  }

  void drain_client_api() {
    if (!api_server_) return;
    while (auto ticket = api_server_->try_accept()) {
      const Term& goal = std::any_cast<const Term&>(ticket->goal);
      try {
        std::string id = submit_goal(goal);
        api_goals_[id] = ticket->id;
      } catch (const ControlError& e) {
        api_server_->abort(ticket->id, Term::symbol("rejected"));
      }
    }
    for (const auto& [goal_id, ticket] : api_goals_) {
      if (finished_api_.count(goal_id)) continue;
      if (api_server_->preempt_requested(ticket)) {
        GoalRecord& rec = find_goal(goal_id);
        if (!goal_status_terminal(rec.status) && !rec.cancel_requested) cancel_goal(goal_id);
      }
    }
  }

  void finish_client_goals() {
    if (!api_server_) return;
    for (const auto& [goal_id, ticket] : api_goals_) {
      if (finished_api_.count(goal_id)) continue;
      GoalStatus status = goal_status(goal_id);
      if (!goal_status_terminal(status)) continue;
      Term result = Term::symbol(goal_status_name(status));
      switch (status) {
        case GoalStatus::succeeded:
          api_server_->succeed(ticket, result);
          break;
        case GoalStatus::aborted:
          api_server_->abort(ticket, result);
          break;
        default:
          api_server_->confirm_preempt(ticket, result);
          break;
      }
      finished_api_.insert(goal_id);
    }
  }

  Options options_;
  ReactiveServer server_;
  Bus* bus_;
  Subscription in_sub_;
  std::function<void()> pump_;

  int cycle_ = 1;
  std::vector<GoalRecord> records_;
  std::deque<Event> queued_events_;
  std::vector<ArrivedResult> arrived_results_;
  std::vector<int> idle_pins_;
  std::optional<DispatchedAction> dispatched_;
  std::vector<Atom> committed_;
  bool result_flag_ = false;
  mutable std::mutex mu_;

  std::shared_ptr<ActionServer> api_server_;
  std::map<std::string, uint64_t> api_goals_;
  std::set<std::string> finished_api_;
};

}  // namespace aspctl
