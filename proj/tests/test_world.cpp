#include <catch2/catch.hpp>

#include <sstream>

#include "aspctl/world.hpp"
#include "testutil.hpp"

using namespace aspctl;

namespace {

struct Rig {
  ActionHub hub;
  World world;

  explicit Rig(const std::string& world_file, const std::string& tag_file)
      : world(WorldConfig::load(testutil::asset_path(world_file)),
              TagTable::load(testutil::asset_path(tag_file))) {
    world.attach(hub);
  }

  // Ticks until the handle finishes; hard cap keeps failures loud.
  GoalState drive(GoalHandle& h, int cap = 200) {
    for (int i = 0; i < cap && !h.done(); ++i) world.tick();
    REQUIRE(h.done());
    return h.state();
  }

  Pose pose_of(const std::string& label) {
    return *TagTable::load(testutil::asset_path("tags/offices4.tags")).lookup(label);
  }
};

}  // namespace

TEST_CASE("tag tables look up and snap poses") {
  std::istringstream text("# tags\noffice1 0 0 0\noffice2 2 0 1.57\n");
  TagTable tags = TagTable::parse(text);
  REQUIRE(tags.size() == 2);
  CHECK(tags.lookup("office2")->theta == Approx(1.57));
  CHECK_FALSE(tags.lookup("attic").has_value());
  // Snap within tolerance, deterministic, and same label every time.
  CHECK(tags.nearest(Pose{2.2, 0.1, 0}, 0.5) == "office2");
  CHECK(tags.nearest(Pose{2.2, 0.1, 0}, 0.5) == "office2");
  CHECK_FALSE(tags.nearest(Pose{10, 10, 0}, 0.5).has_value());
  std::istringstream bad("office1 0 0\n");
  CHECK_THROWS_AS(TagTable::parse(bad), ParseError);
  std::istringstream dup("office1 0 0 0\noffice1 1 1 0\n");
  CHECK_THROWS_AS(TagTable::parse(dup), ControlError);
}

TEST_CASE("world file parsing and validation") {
  WorldConfig cfg = WorldConfig::load(testutil::asset_path("worlds/offices4.world"));
  CHECK(cfg.locations.size() == 4);
  CHECK(cfg.edges.size() == 3);
  CHECK(cfg.robot == "office1");
  CHECK(cfg.capacity == 3);

  std::istringstream bad_robot("locations:\na b\nedges:\na b 1\nrobot:\nc\n");
  CHECK_THROWS_AS(WorldConfig::parse(bad_robot), ControlError);
  std::istringstream disconnected("locations:\na b c\nedges:\na b 1\nrobot:\na\n");
  CHECK_THROWS_AS(WorldConfig::parse(disconnected), ControlError);
  std::istringstream bogus("things:\nx\n");
  CHECK_THROWS_AS(WorldConfig::parse(bogus), ParseError);
}

TEST_CASE("navigation to the neighbouring office succeeds") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  GoalHandle h = rig.hub.send_goal("move_base", Pose{2.0, 0.0, 0.0});  // office2
  CHECK(rig.drive(h) == GoalState::succeeded);
  CHECK(rig.world.robot_location() == "office2");
  CHECK(h.result_as<Term>()->str() == "office2");
}

TEST_CASE("navigation succeeded implies the robot is at the goal label") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  for (const char* label : {"office3", "office1", "office4"}) {
    Pose p = rig.pose_of(label);
    GoalHandle h = rig.hub.send_goal("move_base", p);
    CHECK(rig.drive(h) == GoalState::succeeded);
    CHECK(rig.world.robot_location() == label);
  }
}

TEST_CASE("edge durations govern traversal time") {
  std::istringstream text("locations:\na b\nedges:\na b 3\nrobot:\na\n");
  WorldConfig cfg = WorldConfig::parse(text);
  std::istringstream tags_text("a 0 0 0\nb 2 0 0\n");
  ActionHub hub;
  World world(cfg, TagTable::parse(tags_text));
  world.attach(hub);
  GoalHandle h = hub.send_goal("move_base", Pose{2, 0, 0});
  world.tick();  // accept
  world.tick();  // progress 1
  world.tick();  // progress 2
  CHECK_FALSE(h.done());
  world.tick();  // progress 3: arrival
  CHECK(h.state() == GoalState::succeeded);
  CHECK(world.robot_location() == "b");
}

TEST_CASE("blocked edge with no detour aborts after the recovery attempt") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  GoalHandle to2 = rig.hub.send_goal("move_base", Pose{2.0, 0.0, 0.0});
  rig.drive(to2);
  rig.world.block_edge("office2", "office3");
  GoalHandle to3 = rig.hub.send_goal("move_base", Pose{4.0, 0.0, 0.0});
  CHECK(rig.drive(to3) == GoalState::aborted);
  CHECK(to3.result_as<Term>()->str() == "blocked(office2,office3)");
  CHECK(rig.world.robot_location() == "office2");
}

TEST_CASE("a scheduled blockage clears after its window") {
  std::istringstream text(
      "locations:\na b\nedges:\na b 1\nblocked:\na b 0 4\nrobot:\na\ncapacity:\n1\n");
  WorldConfig cfg = WorldConfig::parse(text);
  std::istringstream tags_text("a 0 0 0\nb 2 0 0\n");
  TagTable tags = TagTable::parse(tags_text);
  ActionHub hub;
  World world(cfg, tags);
  world.attach(hub);
  CHECK(world.edge_blocked("a", "b"));
  GoalHandle h = hub.send_goal("move_base", Pose{2, 0, 0});
  for (int i = 0; i < 50 && !h.done(); ++i) world.tick();
  // First attempt runs into the window and aborts (no detour exists).
  CHECK(h.state() == GoalState::aborted);
  while (world.now() < 4) world.tick();
  CHECK_FALSE(world.edge_blocked("a", "b"));
  GoalHandle again = hub.send_goal("move_base", Pose{2, 0, 0});
  for (int i = 0; i < 50 && !again.done(); ++i) world.tick();
  CHECK(again.state() == GoalState::succeeded);
}

TEST_CASE("a new navigation goal preempts the active one") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  GoalHandle far = rig.hub.send_goal("move_base", Pose{6.0, 0.0, 0.0});  // office4
  rig.world.tick();  // accept
  rig.world.tick();  // first edge done: office2
  GoalHandle back = rig.hub.send_goal("move_base", Pose{0.0, 0.0, 0.0});
  rig.world.tick();  // preempt fires
  CHECK(far.state() == GoalState::preempted);
  // The robot stopped at the last reached location.
  std::string stopped = rig.world.robot_location();
  CHECK((stopped == "office1" || stopped == "office2"));
  CHECK(rig.drive(back) == GoalState::succeeded);
  CHECK(rig.world.robot_location() == "office1");
}

TEST_CASE("a pose matching no tag aborts") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  GoalHandle h = rig.hub.send_goal("move_base", Pose{50.0, 50.0, 0.0});
  CHECK(rig.drive(h) == GoalState::aborted);
  CHECK(h.result_as<Term>()->str() == "unknown_pose");
}

TEST_CASE("pickup preconditions") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  rig.world.spawn_package(1, "office1");
  rig.world.spawn_package(2, "office3");

  GoalHandle ok = rig.hub.send_goal("pickup", 1);
  CHECK(rig.drive(ok) == GoalState::succeeded);
  CHECK(rig.world.package_carried(1));

  GoalHandle wrong = rig.hub.send_goal("pickup", 2);
  CHECK(rig.drive(wrong) == GoalState::aborted);
  CHECK(wrong.result_as<Term>()->str() == "wrong_location");

  GoalHandle twice = rig.hub.send_goal("pickup", 1);
  CHECK(rig.drive(twice) == GoalState::aborted);
}

TEST_CASE("the fourth simultaneous pickup aborts on capacity") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  for (int id = 1; id <= 4; ++id) rig.world.spawn_package(id, "office1");
  for (int id = 1; id <= 3; ++id) {
    GoalHandle h = rig.hub.send_goal("pickup", id);
    CHECK(rig.drive(h) == GoalState::succeeded);
  }
  CHECK(rig.world.carried_count() == 3);
  GoalHandle fourth = rig.hub.send_goal("pickup", 4);
  CHECK(rig.drive(fourth) == GoalState::aborted);
  CHECK(fourth.result_as<Term>()->str() == "capacity_exceeded");
  CHECK(rig.world.carried_count() == 3);
  CHECK(rig.world.max_carried_observed() <= 3);
}

TEST_CASE("deliver places the package at the robot's location") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  rig.world.spawn_package(1, "office1");
  GoalHandle take = rig.hub.send_goal("pickup", 1);
  rig.drive(take);
  GoalHandle go = rig.hub.send_goal("move_base", Pose{2.0, 0.0, 0.0});
  rig.drive(go);
  GoalHandle drop = rig.hub.send_goal("deliver", 1);
  CHECK(rig.drive(drop) == GoalState::succeeded);
  CHECK(rig.world.package_location(1) == "office2");
  CHECK(rig.world.carried_count() == 0);

  GoalHandle not_carried = rig.hub.send_goal("deliver", 1);
  CHECK(rig.drive(not_carried) == GoalState::aborted);
  CHECK(not_carried.result_as<Term>()->str() == "not_carried");
}

TEST_CASE("package conservation holds across a busy run") {
  Rig rig("worlds/offices4.world", "tags/offices4.tags");
  rig.world.spawn_package(1, "office1");
  rig.world.spawn_package(2, "office2");
  auto one_place = [&](int id) {
    bool carried = rig.world.package_carried(id);
    auto loc = rig.world.package_location(id);
    return carried != loc.has_value();
  };
  GoalHandle take = rig.hub.send_goal("pickup", 1);
  rig.drive(take);
  for (int i = 0; i < 5; ++i) {
    rig.world.tick();
    CHECK(one_place(1));
    CHECK(one_place(2));
  }
  rig.world.check_invariants();
}
