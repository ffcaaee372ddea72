#include <catch2/catch.hpp>

#include <random>

#include "aspctl/online.hpp"

using namespace aspctl;

TEST_CASE("parsing the first request update") {
  OnlineUpdate u = parse_online("#step 1.\n_request(goal(office3,office2,1),1).\n#endstep.");
  CHECK(u.step == 1);
  REQUIRE(u.items.size() == 1);
  CHECK(u.items[0].kind == OnlineItem::Kind::fact);
  CHECK_FALSE(u.items[0].volatile_item);
  CHECK(u.items[0].fact.str() == "_request(goal(office3,office2,1),1)");
}

TEST_CASE("parsing a commit constraint plus result") {
  OnlineUpdate u = parse_online(
      "#step 2.\n:- not _action(move_base,office2,1).\n_return(move_base,office2,1).\n#endstep.");
  CHECK(u.step == 2);
  REQUIRE(u.items.size() == 2);
  CHECK(u.items[0].kind == OnlineItem::Kind::constraint);
  CHECK(u.items[0].constraint.str() == ":- not _action(move_base,office2,1).");
  CHECK(u.items[1].kind == OnlineItem::Kind::fact);
}

TEST_CASE("empty update block") {
  OnlineUpdate u = parse_online("#step 3. #endstep.");
  CHECK(u.step == 3);
  CHECK(u.items.empty());
}

TEST_CASE("volatile prefix marks single items") {
  OnlineUpdate u = parse_online("#step 4.\n#volatile :- not goal(4).\nother(4).\n#endstep.");
  REQUIRE(u.items.size() == 2);
  CHECK(u.items[0].volatile_item);
  CHECK_FALSE(u.items[1].volatile_item);
}

TEST_CASE("malformed update blocks are rejected") {
  CHECK_THROWS_AS(parse_online("#step x. #endstep."), ParseError);
  CHECK_THROWS_AS(parse_online("#step 1. p(a)."), ParseError);  // missing endstep
  CHECK_THROWS_AS(parse_online("p(a). #endstep."), ParseError);
  CHECK_THROWS_AS(parse_online("#step 1. p(X). #endstep."), ParseError);  // not ground
  CHECK_THROWS_AS(parse_online("#step 1. p(a) :- q(a). #endstep."), ParseError);
  CHECK_THROWS_AS(parse_online("#step 1. #volatile #endstep."), ParseError);
  CHECK_THROWS_AS(parse_online("#step 1. #endstep. junk."), ParseError);
}

TEST_CASE("render and parse round trip") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> coin(0, 1), nitems(0, 5), val(1, 9);
  for (int trial = 0; trial < 50; ++trial) {
    OnlineUpdate u;
    u.step = trial + 1;
    int count = nitems(rng);
    for (int i = 0; i < count; ++i) {
      bool vol = coin(rng) == 1;
      if (coin(rng)) {
        Atom fact{"ev", {Term::integer(val(rng)), Term::symbol("x")}};
        u.items.push_back(OnlineItem::make_fact(fact, vol));
      } else {
        Rule c = Rule::constraint({}, {Atom{"done", {Term::integer(val(rng))}}});
        u.items.push_back(OnlineItem::make_constraint(c, vol));
      }
    }
    OnlineUpdate back = parse_online(render_online(u));
    CHECK(back == u);
  }
}
