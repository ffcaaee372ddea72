#include <catch2/catch.hpp>

#include <regex>

#include "aspctl/controller.hpp"
#include "aspctl/runner.hpp"
#include "testutil.hpp"

using namespace aspctl;

namespace {

// Full stack against the linear office floor.
struct Stack {
  RunConfig cfg;
  std::unique_ptr<Runner> runner;

  explicit Stack(const std::string& scenario = "") {
    cfg.program_paths = {testutil::asset_path("encodings/offices4.map.lp"),
                         testutil::asset_path("encodings/mailbot.lp")};
    cfg.world_path = testutil::asset_path("worlds/offices4.world");
    cfg.tags_path = testutil::asset_path("tags/offices4.tags");
    if (!scenario.empty()) cfg.scenario_path = testutil::asset_path(scenario);
    runner = std::make_unique<Runner>(cfg);
  }

  Controller& ctl() { return runner->controller(); }
};

std::string squash(const std::string& s) {
  return std::regex_replace(s, std::regex("\\s+"), " ");
}

Term goal_term(const std::string& from, const std::string& to, int id) {
  return Term::compound("goal",
                        {Term::symbol(from), Term::symbol(to), Term::integer(id)});
}

AnswerSet model_of(const std::vector<std::string>& atom_texts) {
  std::vector<Atom> atoms;
  for (const std::string& t : atom_texts) atoms.push_back(parse_atom_text(t));
  return AnswerSet::of(std::move(atoms));
}

}  // namespace

TEST_CASE("goal submissions are validated") {
  Stack stack;
  Controller& ctl = stack.ctl();
  std::string id = ctl.submit_goal(goal_term("office3", "office2", 1));
  CHECK(ctl.goal_status(id) == GoalStatus::pending);
  // Same package while the first goal is live.
  CHECK_THROWS_AS(ctl.submit_goal(goal_term("office1", "office4", 1)), ControlError);
  // Malformed terms.
  CHECK_THROWS_AS(ctl.submit_goal(Term::symbol("goal")), ControlError);
  CHECK_THROWS_AS(ctl.submit_goal(parse_term_text("goal(office1,office2,x)")), ControlError);
  // Second distinct goal is fine; both are tracked.
  std::string id2 = ctl.submit_goal(goal_term("office1", "office4", 2));
  CHECK(ctl.goals().size() == 2);
  CHECK(id2 != id);
}

TEST_CASE("cancel validation") {
  Stack stack;
  Controller& ctl = stack.ctl();
  CHECK_THROWS_AS(ctl.cancel_goal("g99"), ControlError);
  CHECK_THROWS_AS(ctl.cancel_package(5), ControlError);
  std::string id = ctl.submit_goal(goal_term("office3", "office2", 1));
  ctl.cancel_goal(id);
  ctl.cancel_goal(id);  // idempotent while queued
}

TEST_CASE("extract_action picks the unique current-cycle atom") {
  AnswerSet plan3 = model_of({"_action(move_base,office2,1)", "_action(move_base,office3,2)",
                              "_action(pickup,2,4)", "_action(move_base,office4,5)",
                              "_action(deliver,2,6)"});
  auto a1 = Controller::extract_action(plan3, 1);
  REQUIRE(a1);
  CHECK(a1->first == "move_base");
  CHECK(a1->second.str() == "office2");
  CHECK_FALSE(Controller::extract_action(plan3, 3).has_value());  // idle step
  auto a6 = Controller::extract_action(plan3, 6);
  REQUIRE(a6);
  CHECK(a6->first == "deliver");
  CHECK(a6->second.str() == "2");

  AnswerSet lib = model_of({"_action_lib(move_base,office2,1)"});
  auto synonym = Controller::extract_action(lib, 1);
  REQUIRE(synonym);
  CHECK(synonym->first == "move_base");

  AnswerSet doubled = model_of({"_action(move_base,office2,1)", "_action(pickup,1,1)"});
  CHECK_THROWS_AS(Controller::extract_action(doubled, 1), ControlError);
}

TEST_CASE("cycle updates render to the reference listings") {
  Stack stack("scenarios/mailbot_table1.scenario");
  int rc = stack.runner->run();
  REQUIRE(rc == 0);
  const auto& reports = stack.runner->reports();
  REQUIRE(reports.size() == 6);

  CHECK(squash(reports[0].update_line()) ==
        "#step 1. _request(goal(office3,office2,1),1). #endstep.");
  CHECK(squash(reports[1].update_line()) ==
        "#step 2. :- not _action(move_base,office2,1). _return(move_base,office2,1). "
        "#endstep.");
  CHECK(squash(reports[2].update_line()) ==
        "#step 3. :- not _action(move_base,office3,2). _request(cancel(1),3). "
        "_return(move_base,office3,2). #endstep.");
  // The pickup of the second package reports its id as the return value.
  CHECK(squash(reports[4].update_line()) ==
        "#step 5. :- not _action(pickup,2,4). _return(pickup,2,4). #endstep.");
}

TEST_CASE("goal records traverse only legal status paths") {
  Stack stack("scenarios/mailbot_table1.scenario");

  // Observe statuses after every cycle by running manually.
  std::map<std::string, std::vector<GoalStatus>> seen;
  size_t next_event = 0;
  const Scenario scenario = Scenario::load(stack.cfg.scenario_path);
  while (true) {
    int cycle = stack.ctl().cycle();
    if (cycle > 20) break;
    while (next_event < scenario.events.size() && scenario.events[next_event].cycle <= cycle) {
      const ScenarioEvent& ev = scenario.events[next_event];
      if (ev.kind == ScenarioEvent::Kind::request) {
        stack.runner->world().spawn_package(ev.package, ev.goal.args()[0].name());
        stack.ctl().submit_goal(ev.goal);
      } else if (ev.kind == ScenarioEvent::Kind::cancel) {
        stack.ctl().cancel_package(ev.package);
      }
      ++next_event;
    }
    stack.ctl().run_cycle();
    for (const GoalRecord& r : stack.ctl().goals()) seen[r.id].push_back(r.status);
    if (next_event == scenario.events.size() && stack.ctl().all_terminal()) break;
  }

  auto rank = [](GoalStatus s) {
    switch (s) {
      case GoalStatus::pending: return 0;
      case GoalStatus::active: return 1;
      default: return 2;
    }
  };
  for (const auto& [id, path] : seen) {
    for (size_t i = 1; i < path.size(); ++i) {
      CHECK(rank(path[i]) >= rank(path[i - 1]));
      if (goal_status_terminal(path[i - 1])) CHECK(path[i] == path[i - 1]);
    }
  }
  CHECK(stack.ctl().goal_status("g1") == GoalStatus::preempted);
  CHECK(stack.ctl().goal_status("g2") == GoalStatus::succeeded);
}

TEST_CASE("commit soundness: plans keep every committed action verbatim") {
  Stack stack("scenarios/mailbot_table1.scenario");
  REQUIRE(stack.runner->run() == 0);
  std::vector<Atom> committed;
  for (const CycleReport& report : stack.runner->reports()) {
    // Every action committed before this cycle appears in this plan.
    for (const Atom& c : committed) {
      bool found = false;
      for (const Atom& a : report.plan)
        if (a == c) found = true;
      INFO("cycle " << report.cycle << " missing " << c.str());
      CHECK(found);
    }
    if (report.action && report.result) {
      committed.push_back(Atom{"_action",
                               {Term::symbol(report.action->interface), report.action->param,
                                Term::integer(report.cycle)}});
    }
  }
  CHECK(committed.size() == 5);
}

TEST_CASE("unsatisfiable goals abort every open goal") {
  Stack stack;
  // office9 exists nowhere; nothing can ever serve the request.
  RunConfig cfg = stack.cfg;
  std::unique_ptr<Runner> runner = std::make_unique<Runner>(cfg);
  Controller& ctl = runner->controller();
  // Use a small cap so the test stays quick.
  Controller::Options opts;
  SolveConfig scfg;
  scfg.horizon_cap = 4;
  Bus bus;
  Executor ex;
  Controller tiny(parse_program(testutil::mail_program()), bus, ex, opts, scfg);
  tiny.set_pump([] {});
  std::string a = tiny.submit_goal(goal_term("office3", "office9", 1));
  std::string b = tiny.submit_goal(goal_term("office1", "office2", 2));
  CycleReport report = tiny.run_cycle();
  CHECK(report.solver_unsat);
  CHECK(tiny.goal_status(a) == GoalStatus::aborted);
  CHECK(tiny.goal_status(b) == GoalStatus::aborted);
  (void)ctl;
}

TEST_CASE("clients can drive the controller through the action protocol") {
  Stack stack;
  ActionHub hub;
  stack.ctl().bind_client_api(hub);
  stack.runner->world().spawn_package(1, "office3");
  GoalHandle h = hub.send_goal("rosoclingo", goal_term("office3", "office2", 1));
  CHECK(h.state() == GoalState::pending);
  while (!h.done() && stack.ctl().cycle() < 10) stack.ctl().run_cycle();
  CHECK(h.state() == GoalState::succeeded);
  CHECK(h.result_as<Term>()->str() == "succeeded");
}
