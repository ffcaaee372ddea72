#include <catch2/catch.hpp>

#include <string>
#include <thread>
#include <vector>

#include "aspctl/bus.hpp"

using namespace aspctl;

namespace {

struct Note {
  static constexpr const char* kind_name = "test/Note";
  int from = 0;
  int seq = 0;
};

struct Other {
  static constexpr const char* kind_name = "test/Other";
};

}  // namespace

TEST_CASE("every subscriber receives every message") {
  Bus bus;
  Executor ex;
  bus.advertise<Note>("chatter");
  std::vector<int> got_a, got_b;
  auto sub_a = bus.subscribe<Note>("chatter", ex, [&](const Note& n) { got_a.push_back(n.seq); });
  auto sub_b = bus.subscribe<Note>("chatter", ex, [&](const Note& n) { got_b.push_back(n.seq); });
  bus.publish("chatter", Note{0, 1});
  bus.publish("chatter", Note{0, 2});
  ex.spin_once();
  CHECK(got_a == std::vector<int>{1, 2});
  CHECK(got_b == std::vector<int>{1, 2});
}

TEST_CASE("no replay for late subscribers") {
  Bus bus;
  Executor ex;
  bus.advertise<Note>("chatter");
  bus.publish("chatter", Note{0, 1});
  std::vector<int> got;
  auto sub = bus.subscribe<Note>("chatter", ex, [&](const Note& n) { got.push_back(n.seq); });
  bus.publish("chatter", Note{0, 2});
  ex.spin_once();
  CHECK(got == std::vector<int>{2});
}

TEST_CASE("publish requires a matching advertise") {
  Bus bus;
  Executor ex;
  CHECK_THROWS_AS(bus.publish("nowhere", Note{}), ControlError);
  bus.advertise<Note>("typed");
  CHECK_THROWS_AS(bus.publish("typed", Other{}), ControlError);
  auto sub = bus.subscribe<Note>("typed", ex, [](const Note&) {});
  CHECK_THROWS_AS(
      (void)bus.subscribe<Other>("typed", ex, [](const Other&) {}), ControlError);
}

TEST_CASE("interleaved publishers keep a consistent per-topic order") {
  Bus bus;
  Executor ex_a, ex_b;
  bus.advertise<Note>("mixed");
  std::vector<std::pair<int, int>> got_a, got_b;
  auto sub_a = bus.subscribe<Note>("mixed", ex_a,
                                   [&](const Note& n) { got_a.push_back({n.from, n.seq}); });
  auto sub_b = bus.subscribe<Note>("mixed", ex_b,
                                   [&](const Note& n) { got_b.push_back({n.from, n.seq}); });

  constexpr int kEach = 200;
  std::atomic<bool> done_one{false}, done_two{false};
  std::thread pub_one([&] {
    for (int i = 0; i < kEach; ++i) bus.publish("mixed", Note{1, i});
    done_one = true;
  });
  std::thread pub_two([&] {
    for (int i = 0; i < kEach; ++i) bus.publish("mixed", Note{2, i});
    done_two = true;
  });
  while (!done_one || !done_two || ex_a.pending() || ex_b.pending()) {
    ex_a.spin_once();
    ex_b.spin_once();
  }
  pub_one.join();
  pub_two.join();

  // No loss, and both subscribers saw the identical total order.
  REQUIRE(got_a.size() == 2 * kEach);
  CHECK(got_a == got_b);
  // Per-publisher FIFO within the merged stream.
  for (int from : {1, 2}) {
    int expect = 0;
    for (const auto& [f, seq] : got_a)
      if (f == from) CHECK(seq == expect++);
    CHECK(expect == kEach);
  }
}

TEST_CASE("full queues block the publisher until the subscriber drains") {
  Bus bus(2);  // tiny queues
  Executor ex;
  bus.advertise<Note>("narrow");
  std::vector<int> got;
  auto sub = bus.subscribe<Note>("narrow", ex, [&](const Note& n) { got.push_back(n.seq); });
  std::atomic<bool> done{false};
  std::thread pub([&] {
    for (int i = 0; i < 10; ++i) bus.publish("narrow", Note{0, i});
    done = true;
  });
  // The publisher cannot finish before some draining happened.
  while (!done) ex.spin_once();
  pub.join();
  ex.spin_once();
  REQUIRE(got.size() == 10);
  for (int i = 0; i < 10; ++i) CHECK(got[i] == i);
}

TEST_CASE("interface messages carry parseable ground facts") {
  Bus bus;
  Executor ex;
  bus.advertise<InterfaceMsg>("out_rosoclingo");
  std::vector<std::string> got;
  auto sub = bus.subscribe<InterfaceMsg>("out_rosoclingo", ex, [&](const InterfaceMsg& m) {
    got.insert(got.end(), m.facts.begin(), m.facts.end());
  });
  bus.publish("out_rosoclingo",
              InterfaceMsg{"move_base", {"_action(move_base,office2,1)"}});
  ex.spin_once();
  REQUIRE(got.size() == 1);
  CHECK(got[0] == "_action(move_base,office2,1)");
}
