#pragma once

// Interface layer: one adapter per action kind. Every adapter reads every
// message on out_rosoclingo, discards those addressed elsewhere, translates
// the action parameters (labels become poses for navigation), runs the goal
// through the action hub, and reports exactly one _return fact per dispatch
// on in_rosoclingo.

#include <any>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aspctl/action.hpp"
#include "aspctl/bus.hpp"
#include "aspctl/parser.hpp"
#include "aspctl/tags.hpp"

namespace aspctl {

inline constexpr const char* kTopicOut = "out_rosoclingo";
inline constexpr const char* kTopicIn = "in_rosoclingo";

class Adapter {
 public:
  Adapter(std::string interface, std::string server)
      : interface_(std::move(interface)), server_(std::move(server)) {}
  virtual ~Adapter() = default;

  const std::string& interface_name() const { return interface_; }

  void attach(Bus& bus, Executor& executor, ActionHub& hub) {
    bus_ = &bus;
    hub_ = &hub;
    sub_ = bus.subscribe<InterfaceMsg>(
        kTopicOut, executor, [this](const InterfaceMsg& msg) { adapter_dispatch(msg); });
  }

  // Handles one out_rosoclingo message; non-relevant messages are discarded.
  void adapter_dispatch(const InterfaceMsg& msg) {
    if (msg.interface != interface_) return;
    for (const std::string& text : msg.facts) {
      Atom fact = parse_atom_text(text);
      if ((fact.predicate != "_action" && fact.predicate != "_action_lib") || fact.arity() != 3)
        throw ControlError("unexpected fact on " + std::string(kTopicOut) + ": " + text);
      const Term& param = fact.args[1];
      int cycle = static_cast<int>(fact.args[2].value());
      if (outstanding_)
        throw ControlError("adapter '" + interface_ + "' already has an outstanding action");
      std::string reason;
      auto goal = translate(param, reason);
      if (!goal) {
        // Never drop silently: a translation failure reports immediately.
        report_failure(cycle, Term::symbol(reason.empty() ? "untranslatable" : reason));
        continue;
      }
      Pending p;
      p.param = param;
      p.cycle = cycle;
      p.handle = hub_->send_goal(server_, std::move(*goal));
      outstanding_ = std::move(p);
    }
  }

  // Polled by the driver; reports once the goal is done.
  void poll() {
    if (!outstanding_ || !outstanding_->handle.done()) return;
    adapter_report(outstanding_->handle.state());
  }

  // Maps the terminal state onto the return fact: succeeded carries the
  // achieved parameter, aborted and preempted carry failure(Reason).
  void adapter_report(GoalState state) {
    Term value;
    switch (state) {
      case GoalState::succeeded:
        value = success_value(*outstanding_);
        break;
      case GoalState::aborted:
        value = Term::compound("failure", {result_term()});
        break;
      case GoalState::preempted:
        value = Term::compound("failure", {Term::symbol("preempted")});
        break;
      default:
        return;
    }
    Atom ret{"_return", {Term::symbol(interface_), value, Term::integer(outstanding_->cycle)}};
    publish_return(ret);
    outstanding_.reset();
  }

  bool busy() const { return outstanding_.has_value(); }

 protected:
  struct Pending {
    Term param;
    int cycle = 0;
    GoalHandle handle;
  };

  // Turns the action parameter into the server's goal payload, or reports
  // why it cannot (e.g. a label without a tag).
  virtual std::optional<std::any> translate(const Term& param, std::string& reason) = 0;

  // Value carried by a success return: the achieved parameter.
  virtual Term success_value(const Pending& p) { return p.param; }

  Term result_term() const {
    auto r = outstanding_->handle.result_as<Term>();
    return r ? *r : Term::symbol("unknown");
  }

  void report_failure(int cycle, Term reason) {
    Atom ret{"_return",
             {Term::symbol(interface_), Term::compound("failure", {std::move(reason)}),
              Term::integer(cycle)}};
    publish_return(ret);
  }

  void publish_return(const Atom& fact) {
    bus_->publish(kTopicIn, InterfaceMsg{interface_, {fact.str()}});
  }

  std::string interface_;
  std::string server_;
  Bus* bus_ = nullptr;
  ActionHub* hub_ = nullptr;
  Subscription sub_;
  std::optional<Pending> outstanding_;
};

// Navigation adapter: label in, pose out via the tag table.
class MoveBaseAdapter : public Adapter {
 public:
  MoveBaseAdapter(TagTable tags, std::string interface = "move_base",
                  std::string server = "move_base")
      : Adapter(std::move(interface), std::move(server)), tags_(std::move(tags)) {}

 protected:
  std::optional<std::any> translate(const Term& param, std::string& reason) override {
    if (!param.is_symbol()) {
      reason = "bad_label";
      return std::nullopt;
    }
    auto pose = tags_.lookup(param.name());
    if (!pose) {
      reason = "unknown_label";
      return std::nullopt;
    }
    return std::any(*pose);
  }

 private:
  TagTable tags_;
};

// Pickup and delivery adapters: integer package id straight through.
class ManipAdapter : public Adapter {
 public:
  using Adapter::Adapter;

 protected:
  std::optional<std::any> translate(const Term& param, std::string& reason) override {
    if (!param.is_integer()) {
      reason = "bad_package_id";
      return std::nullopt;
    }
    return std::any(static_cast<int>(param.value()));
  }
};

struct AdapterSpec {
  std::string interface;
  std::string kind;    // "move_base" | "pickup" | "deliver"
  std::string server;  // defaults to the interface name
};

inline std::vector<AdapterSpec> default_adapter_specs() {
  return {{"move_base", "move_base", "move_base"},
          {"pickup", "pickup", "pickup"},
          {"deliver", "deliver", "deliver"}};
}

// Registry file: one "interface kind [server]" entry per line, '#' comments.
inline std::vector<AdapterSpec> parse_adapter_specs(std::istream& in) {
  std::vector<AdapterSpec> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    AdapterSpec spec;
    if (!(ls >> spec.interface)) continue;
    if (!(ls >> spec.kind)) throw ParseError(lineno, 1, "adapter entry needs 'interface kind'");
    if (!(ls >> spec.server)) spec.server = spec.interface;
    out.push_back(std::move(spec));
  }
  return out;
}

inline std::vector<std::unique_ptr<Adapter>> build_adapters(
    const std::vector<AdapterSpec>& specs, const TagTable& tags) {
  std::vector<std::unique_ptr<Adapter>> out;
  for (const AdapterSpec& spec : specs) {
    std::string server = spec.server.empty() ? spec.interface : spec.server;
    if (spec.kind == "move_base")
      out.push_back(std::make_unique<MoveBaseAdapter>(tags, spec.interface, server));
    else if (spec.kind == "pickup" || spec.kind == "deliver")
      out.push_back(std::make_unique<ManipAdapter>(spec.interface, server));
    else
      throw ControlError("unknown adapter kind '" + spec.kind + "'");
  }
  return out;
}

}  // namespace aspctl
