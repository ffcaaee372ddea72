#include <catch2/catch.hpp>

#include <sstream>

#include "aspctl/interfaces.hpp"
#include "aspctl/world.hpp"
#include "testutil.hpp"

using namespace aspctl;

namespace {

struct Rig {
  Bus bus;
  Executor adapter_ex;
  Executor sink_ex;
  ActionHub hub;
  World world;
  std::vector<std::string> returns;
  Subscription sink;
  std::vector<std::unique_ptr<Adapter>> adapters;

  Rig()
      : world(WorldConfig::load(testutil::asset_path("worlds/offices4.world")),
              TagTable::load(testutil::asset_path("tags/offices4.tags"))) {
    bus.advertise<InterfaceMsg>(kTopicOut);
    bus.advertise<InterfaceMsg>(kTopicIn);
    world.attach(hub);
    sink = bus.subscribe<InterfaceMsg>(kTopicIn, sink_ex, [this](const InterfaceMsg& m) {
      returns.insert(returns.end(), m.facts.begin(), m.facts.end());
    });
    adapters = build_adapters(default_adapter_specs(),
                              TagTable::load(testutil::asset_path("tags/offices4.tags")));
    for (auto& a : adapters) a->attach(bus, adapter_ex, hub);
  }

  void dispatch(const std::string& interface, const std::string& fact) {
    bus.publish(kTopicOut, InterfaceMsg{interface, {fact}});
    adapter_ex.spin_once();
  }

  void pump_until(size_t want, int cap = 200) {
    for (int i = 0; i < cap && returns.size() < want; ++i) {
      world.tick();
      for (auto& a : adapters) a->poll();
      sink_ex.spin_once();
    }
  }

  void pump_ticks(int ticks) {
    for (int i = 0; i < ticks; ++i) {
      world.tick();
      for (auto& a : adapters) a->poll();
      sink_ex.spin_once();
    }
  }
};

}  // namespace

TEST_CASE("move_base adapter translates the label and reports the result") {
  Rig rig;
  rig.dispatch("move_base", "_action(move_base,office2,1)");
  rig.pump_until(1);
  REQUIRE(rig.returns.size() == 1);
  CHECK(rig.returns[0] == "_return(move_base,office2,1)");
  CHECK(rig.world.robot_location() == "office2");
}

TEST_CASE("adapters discard messages addressed to other interfaces") {
  Rig rig;
  rig.dispatch("pickup", "_action(pickup,7,1)");  // no such package: aborts
  rig.pump_until(1);
  REQUIRE(rig.returns.size() == 1);
  // Only the pickup adapter answered; move_base stayed silent.
  CHECK(rig.returns[0] == "_return(pickup,failure(unknown_package),1)");
}

TEST_CASE("unknown labels fail immediately without touching the world") {
  Rig rig;
  rig.dispatch("move_base", "_action(move_base,attic,7)");
  rig.sink_ex.spin_once();
  REQUIRE(rig.returns.size() == 1);
  CHECK(rig.returns[0] == "_return(move_base,failure(unknown_label),7)");
  CHECK(rig.world.robot_location() == "office1");
}

TEST_CASE("the action_lib keyword spelling is accepted") {
  Rig rig;
  rig.dispatch("move_base", "_action_lib(move_base,office2,1)");
  rig.pump_until(1);
  REQUIRE(rig.returns.size() == 1);
  CHECK(rig.returns[0] == "_return(move_base,office2,1)");
}

TEST_CASE("aborted navigation reports the blocked edge") {
  Rig rig;
  rig.dispatch("move_base", "_action(move_base,office2,1)");
  rig.pump_until(1);
  rig.returns.clear();
  rig.world.block_edge("office2", "office3");
  rig.dispatch("move_base", "_action(move_base,office3,2)");
  rig.pump_until(1);
  REQUIRE(rig.returns.size() == 1);
  CHECK(rig.returns[0] == "_return(move_base,failure(blocked(office2,office3)),2)");
}

TEST_CASE("exactly one report per dispatched action") {
  Rig rig;
  rig.world.spawn_package(1, "office1");
  std::vector<std::pair<std::string, std::string>> script = {
      {"pickup", "_action(pickup,1,1)"},
      {"move_base", "_action(move_base,office2,2)"},
      {"deliver", "_action(deliver,1,3)"},
      {"deliver", "_action(deliver,1,4)"},  // fails: not carried
  };
  for (const auto& [iface, fact] : script) {
    size_t before = rig.returns.size();
    rig.dispatch(iface, fact);
    rig.pump_until(before + 1);
    CHECK(rig.returns.size() == before + 1);
  }
  // A few extra pump rounds must not produce more reports.
  size_t total = rig.returns.size();
  rig.pump_ticks(10);
  CHECK(rig.returns.size() == total);
}

TEST_CASE("adapter registry files parse") {
  std::istringstream in(
      "# registry\nmove_base move_base\npickup pickup\ndeliver deliver deliver\n");
  auto specs = parse_adapter_specs(in);
  REQUIRE(specs.size() == 3);
  CHECK(specs[0].interface == "move_base");
  CHECK(specs[2].server == "deliver");
  std::istringstream bad("move_base\n");
  CHECK_THROWS_AS(parse_adapter_specs(bad), ParseError);
  CHECK_THROWS_AS(build_adapters({{"x", "teleport", ""}}, TagTable{}), ControlError);
}
