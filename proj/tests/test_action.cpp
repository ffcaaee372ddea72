#include <catch2/catch.hpp>

#include <random>

#include "aspctl/action.hpp"
#include "aspctl/term.hpp"

using namespace aspctl;

TEST_CASE("goal against a trivially succeeding server") {
  ActionHub hub;
  auto server = hub.register_server("echo");
  GoalHandle h = hub.send_goal("echo", std::string("payload"));
  CHECK(h.state() == GoalState::pending);
  auto ticket = server->try_accept();
  REQUIRE(ticket.has_value());
  CHECK(h.state() == GoalState::active);
  server->publish_feedback(ticket->id, std::string("half way"));
  server->succeed(ticket->id, std::any_cast<std::string>(ticket->goal));
  CHECK(h.state() == GoalState::succeeded);
  CHECK(h.result_as<std::string>() == "payload");
  CHECK(h.take_feedback().size() == 1);
}

TEST_CASE("cancel semantics per state") {
  ActionHub hub;
  auto server = hub.register_server("s");

  GoalHandle pending = hub.send_goal("s", 1);
  pending.cancel();
  CHECK(pending.state() == GoalState::preempted);
  pending.cancel();  // no-op on terminal
  CHECK(pending.state() == GoalState::preempted);
  CHECK_FALSE(server->try_accept().has_value());  // cancelled goals are skipped

  GoalHandle active = hub.send_goal("s", 2);
  auto ticket = server->try_accept();
  REQUIRE(ticket);
  active.cancel();
  CHECK(active.state() == GoalState::preempting);
  CHECK(server->preempt_requested(ticket->id));
  server->confirm_preempt(ticket->id);
  CHECK(active.state() == GoalState::preempted);
}

TEST_CASE("handles reach exactly one terminal state with exactly one result") {
  ActionHub hub;
  auto server = hub.register_server("s");
  GoalHandle h = hub.send_goal("s", 0);
  auto ticket = server->try_accept();
  server->succeed(ticket->id, 42);
  CHECK(h.result_as<int>() == 42);
  // The server forgets finished goals; finishing twice cannot happen.
  CHECK_THROWS_AS(server->succeed(ticket->id, 43), ControlError);
  CHECK_THROWS_AS(server->abort(ticket->id, 0), ControlError);
  CHECK(h.result_as<int>() == 42);
}

TEST_CASE("feedback after a terminal state is rejected") {
  ActionHub hub;
  auto server = hub.register_server("s");
  GoalHandle h = hub.send_goal("s", 0);
  auto ticket = server->try_accept();
  server->abort(ticket->id, std::string("broken"));
  CHECK_THROWS_AS(server->publish_feedback(ticket->id, 1), ControlError);
  CHECK(h.state() == GoalState::aborted);
}

TEST_CASE("unknown servers and transition table") {
  ActionHub hub;
  CHECK_THROWS_AS(hub.send_goal("ghost", 0), ControlError);
  CHECK(legal_goal_transition(GoalState::pending, GoalState::active));
  CHECK(legal_goal_transition(GoalState::pending, GoalState::preempted));
  CHECK(legal_goal_transition(GoalState::active, GoalState::succeeded));
  CHECK(legal_goal_transition(GoalState::active, GoalState::aborted));
  CHECK(legal_goal_transition(GoalState::active, GoalState::preempting));
  CHECK(legal_goal_transition(GoalState::preempting, GoalState::preempted));
  CHECK_FALSE(legal_goal_transition(GoalState::pending, GoalState::succeeded));
  CHECK_FALSE(legal_goal_transition(GoalState::succeeded, GoalState::active));
  CHECK_FALSE(legal_goal_transition(GoalState::preempting, GoalState::succeeded));
  CHECK_FALSE(legal_goal_transition(GoalState::aborted, GoalState::preempted));
}

// Randomized interleavings of client and server operations; the shared
// record enforces the state machine, so the fuzz asserts that nothing we do
// here can produce an illegal transition, a lost result, or a second result.
TEST_CASE("randomized protocol fuzzing stays legal") {
  std::mt19937 rng(97);
  std::uniform_int_distribution<int> op(0, 5);
  for (int trial = 0; trial < 300; ++trial) {
    ActionHub hub;
    auto server = hub.register_server("s");
    std::vector<GoalHandle> handles;
    std::vector<uint64_t> accepted;
    for (int step = 0; step < 30; ++step) {
      switch (op(rng)) {
        case 0:
          handles.push_back(hub.send_goal("s", step));
          break;
        case 1:
          if (!handles.empty()) handles[rng() % handles.size()].cancel();
          break;
        case 2:
          if (auto t = server->try_accept()) accepted.push_back(t->id);
          break;
        case 3:
          if (!accepted.empty()) {
            size_t i = rng() % accepted.size();
            uint64_t id = accepted[i];
            accepted.erase(accepted.begin() + i);
            // Legal server behavior: honor a preempt first. Nothing here
            // may throw; a throw is exactly the bug the fuzz looks for.
            if (server->preempt_requested(id))
              server->confirm_preempt(id, 0);
            else
              server->succeed(id, 0);
          }
          break;
        case 4:
          if (!accepted.empty()) {
            uint64_t id = accepted.back();
            accepted.pop_back();
            if (server->preempt_requested(id))
              server->confirm_preempt(id, 0);
            else
              server->abort(id, 0);
          }
          break;
        case 5:
          if (!accepted.empty()) server->publish_feedback(accepted.back(), step);
          break;
      }
    }
    // Drain: every accepted goal finishes exactly once.
    for (uint64_t id : accepted) {
      if (server->preempt_requested(id))
        server->confirm_preempt(id, 0);
      else
        server->succeed(id, 0);
    }
    while (auto t = server->try_accept()) server->succeed(t->id, 0);
    for (GoalHandle& h : handles) {
      if (!h.done()) h.cancel();
      CHECK(h.done());
      CHECK(h.result().has_value());
    }
  }
}
