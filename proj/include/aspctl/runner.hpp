#pragma once

// Wires the whole stack together for a run: bus, world, adapters, and
// controller, driven by a scenario. The runner owns the tick clock; the
// controller's wait loop pumps it. Also hosts the interactive console.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aspctl/controller.hpp"
#include "aspctl/scenario.hpp"
#include "aspctl/world.hpp"

namespace aspctl {

struct RunConfig {
  std::vector<std::string> program_paths;
  std::string world_path;
  std::string tags_path;
  std::string scenario_path;
  std::string expect_path;
  std::string report_path;
  std::string report_kv_path;
  std::string adapters_path;
  int max_cycles = 50;
  int idle_poll_ms = 20;  // interactive-mode wait between input polls
  bool check_minimality = false;
  bool echo = false;
};

// Exit codes of Runner::run.
enum RunExit : int {
  run_ok = 0,
  run_trace_mismatch = 1,
  run_unsatisfiable = 2,
  run_max_cycles = 3,
};

class Runner {
 public:
  explicit Runner(const RunConfig& cfg) : cfg_(cfg) {
    if (cfg.program_paths.empty()) throw ControlError("no program files given");
    std::string text;
    for (const std::string& path : cfg.program_paths) text += slurp(path, "program") + "\n";
    ReactiveProgram program = parse_program(text);
    TagTable tags = TagTable::load(cfg.tags_path);
    world_.emplace(WorldConfig::load(cfg.world_path), tags);
    world_->attach(hub_);
    if (!cfg.scenario_path.empty()) scenario_ = Scenario::load(cfg.scenario_path);
    if (!cfg.expect_path.empty()) expect_ = ExpectedTrace::load(cfg.expect_path);

    Controller::Options opts;
    opts.check_horizon_minimality = cfg.check_minimality;
    controller_.emplace(std::move(program), bus_, executor_, opts);

    std::vector<AdapterSpec> specs;
    if (!cfg.adapters_path.empty()) {
      std::ifstream in(cfg.adapters_path);
      if (!in) throw ControlError("cannot open adapter registry '" + cfg.adapters_path + "'");
      specs = parse_adapter_specs(in);
    } else {
      specs = default_adapter_specs();
    }
    adapters_ = build_adapters(specs, tags);
    for (auto& a : adapters_) a->attach(bus_, adapter_executor_, hub_);

    controller_->set_pump([this] { pump(); });
  }

  World& world() { return *world_; }
  Controller& controller() { return *controller_; }
  const std::vector<CycleReport>& reports() const { return reports_; }

  // One simulated tick: world, then adapters, then message delivery.
  void pump() {
    world_->tick();
    adapter_executor_.spin_once();
    for (auto& a : adapters_) a->poll();
    executor_.spin_once();
  }

  // Runs the scenario to completion and writes reports. Exit code semantics
  // follow RunExit.
  int run() {
    size_t next_event = 0;
    int exit_code = run_ok;
    while (true) {
      int cycle = controller_->cycle();
      if (cycle > cfg_.max_cycles) {
        exit_code = run_max_cycles;
        break;
      }
      while (next_event < scenario_.events.size() &&
             scenario_.events[next_event].cycle <= cycle) {
        apply_event(scenario_.events[next_event]);
        ++next_event;
      }
      CycleReport report = controller_->run_cycle();
      if (cfg_.echo) std::cout << report.render();
      reports_.push_back(report);
      if (report.solver_unsat) {
        exit_code = run_unsatisfiable;
        break;
      }
      bool events_left = next_event < scenario_.events.size();
      if (!events_left && controller_->all_terminal()) break;
    }
    write_reports();
    if (exit_code == run_ok && expect_ && !trace_matches()) exit_code = run_trace_mismatch;
    return exit_code;
  }

  // Console mode: request/cancel/block/unblock/status/quit. Commands are
  // queued to cycle boundaries; each completed cycle prints its report.
  void interactive(std::istream& in, std::ostream& out) {
    struct Inbox {
      std::mutex mu;
      std::vector<std::string> lines;
      std::atomic<bool> eof{false};
    };
    auto inbox = std::make_shared<Inbox>();
    // The reader may stay blocked on a live terminal after 'quit'; it is
    // detached in that case and only joined once it has already finished.
    std::thread reader([inbox, &in] {
      std::string line;
      while (std::getline(in, line)) {
        std::lock_guard<std::mutex> lock(inbox->mu);
        inbox->lines.push_back(line);
      }
      inbox->eof = true;
    });
    bool quit = false;
    while (!quit) {
      std::vector<std::string> batch;
      {
        std::lock_guard<std::mutex> lock(inbox->mu);
        batch.swap(inbox->lines);
      }
      bool acted = false;
      for (const std::string& line : batch) {
        if (line == "quit") {
          quit = true;
          break;
        }
        acted |= apply_command(line, out);
      }
      if (quit) break;
      bool busy = !controller_->all_terminal() || controller_->has_pending_input();
      if (acted || busy) {
        CycleReport report = controller_->run_cycle();
        reports_.push_back(report);
        out << report.render() << std::flush;
        if (report.solver_unsat) break;
      } else if (inbox->eof) {
        break;
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.idle_poll_ms));
      }
    }
    if (inbox->eof)
      reader.join();
    else
      reader.detach();
  }

 private:
  static std::string slurp(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ControlError(std::string("cannot open ") + what + " '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  }

  void apply_event(const ScenarioEvent& ev) {
    switch (ev.kind) {
      case ScenarioEvent::Kind::request: {
        const std::string& from = ev.goal.args()[0].name();
        if (world_->package_exists(ev.package)) {
          auto loc = world_->package_location(ev.package);
          if (!loc || *loc != from)
            throw ControlError("package " + std::to_string(ev.package) + " is at " +
                               (loc ? *loc : std::string("the robot")) + ", not " + from);
        } else {
          world_->spawn_package(ev.package, from);
        }
        controller_->submit_goal(ev.goal);
        break;
      }
      case ScenarioEvent::Kind::cancel:
        controller_->cancel_package(ev.package);
        break;
      case ScenarioEvent::Kind::block:
        world_->block_edge(ev.a, ev.b);
        break;
      case ScenarioEvent::Kind::unblock:
        world_->unblock_edge(ev.a, ev.b);
        break;
    }
  }

  bool apply_command(const std::string& line, std::ostream& out) {
    std::istringstream ls(line);
    std::string cmd;
    if (!(ls >> cmd)) return false;
    try {
      if (cmd == "request") {
        std::string from, to;
        int id;
        if (!(ls >> from >> to >> id)) throw ControlError("usage: request <from> <to> <id>");
        ScenarioEvent ev;
        ev.kind = ScenarioEvent::Kind::request;
        ev.goal =
            Term::compound("goal", {Term::symbol(from), Term::symbol(to), Term::integer(id)});
        ev.package = id;
        apply_event(ev);
        return true;
      }
      if (cmd == "cancel") {
        int id;
        if (!(ls >> id)) throw ControlError("usage: cancel <id>");
        controller_->cancel_package(id);
        return true;
      }
      if (cmd == "block" || cmd == "unblock") {
        std::string a, b;
        if (!(ls >> a >> b)) throw ControlError("usage: " + cmd + " <a> <b>");
        if (cmd == "block")
          world_->block_edge(a, b);
        else
          world_->unblock_edge(a, b);
        return true;
      }
      if (cmd == "status") {
        for (const GoalRecord& r : controller_->goals())
          out << r.id << " " << r.goal.str() << " " << goal_status_name(r.status) << "\n";
        out << std::flush;
        return false;
      }
      throw ControlError("unknown command '" + cmd + "'");
    } catch (const ControlError& e) {
      out << "error: " << e.what() << "\n"
          << "usage: request <from> <to> <id> | cancel <id> | block <a> <b> | "
             "unblock <a> <b> | status | quit\n"
          << std::flush;
      return false;
    }
  }

  bool trace_matches() {
    for (const auto& [cycle, expected] : expect_->plans) {
      const CycleReport* found = nullptr;
      for (const CycleReport& r : reports_)
        if (r.cycle == cycle) found = &r;
      std::vector<std::string> actual;
      if (found)
        for (const Atom& a : found->plan) actual.push_back(a.str());
      if (!found || actual != expected) {
        std::cerr << "trace mismatch at cycle " << cycle << "\n  expected:";
        for (const std::string& s : expected) std::cerr << ' ' << s;
        std::cerr << "\n  actual:";
        for (const std::string& s : actual) std::cerr << ' ' << s;
        std::cerr << "\n";
        return false;
      }
    }
    return true;
  }

  void write_reports() const {
    if (!cfg_.report_path.empty()) {
      std::ofstream out(cfg_.report_path);
      for (const CycleReport& r : reports_) out << r.render();
    }
    if (!cfg_.report_kv_path.empty()) {
      std::ofstream out(cfg_.report_kv_path);
      for (const CycleReport& r : reports_) out << r.render_kv() << "\n";
    }
  }

  RunConfig cfg_;
  Bus bus_;
  Executor executor_;          // controller's executor
  Executor adapter_executor_;  // adapters' executor
  ActionHub hub_;
  std::optional<World> world_;
  std::optional<Controller> controller_;
  std::vector<std::unique_ptr<Adapter>> adapters_;
  Scenario scenario_;
  std::optional<ExpectedTrace> expect_;
  std::vector<CycleReport> reports_;
};

// Scenario entry point used by the command line.
inline int run(const RunConfig& cfg) {
  Runner runner(cfg);
  return runner.run();
}

}  // namespace aspctl
