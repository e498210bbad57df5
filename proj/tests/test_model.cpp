#include <doctest.h>

#include "convoy/traffic.hpp"
#include "convoy/world.hpp"
#include "fixtures.hpp"

using namespace convoy;
using namespace convoy::testing;

TEST_CASE("entity view of an individual uses its own fields") {
  const WorldState world = example_world();
  const auto e = entity_view(world, 37);
  CHECK(e.id == 37);
  CHECK(e.desired_speed == doctest::Approx(kmh_to_mps(93.0)));
  CHECK(e.front_position == 70.0);
  CHECK(e.rear_position == 70.0);  // l := p for individuals
}

TEST_CASE("entity view of a platoon mixes leader and last member") {
  WorldState world = example_world();
  VehicleState leader;
  leader.id = 100;
  leader.desired_speed = 30.0;
  leader.position = 500.0;
  leader.role = VehicleRole::Leader;
  leader.platoon_id = 100;
  VehicleState follower;
  follower.id = 101;
  follower.desired_speed = 28.0;
  follower.position = 490.0;
  follower.role = VehicleRole::Follower;
  follower.cf_mode = CfMode::Cacc;
  follower.platoon_id = 100;
  world.vehicles.emplace(100, leader);
  world.vehicles.emplace(101, follower);
  world.platoons.emplace(100, Platoon{100, {100, 101}});

  const auto e = entity_view(world, 100);
  CHECK(e.id == 100);
  CHECK(e.desired_speed == 30.0);
  CHECK(e.front_position == 500.0);
  CHECK(e.rear_position == 490.0);

  CHECK_THROWS_AS(entity_view(world, 101), std::invalid_argument);
  CHECK_THROWS_AS(entity_view(world, 999), std::out_of_range);
}

TEST_CASE("searcher and target availability") {
  WorldState world = example_world();
  VehicleState& v = world.vehicles.at(13);
  CHECK(is_available_searcher(v));
  CHECK(is_available_target(v));

  v.maneuver = JoinManeuver{5, 100.0};
  CHECK_FALSE(is_available_searcher(v));
  CHECK_FALSE(is_available_target(v));
  v.maneuver.reset();

  v.inbound_joiner = 37;
  CHECK_FALSE(is_available_searcher(v));
  CHECK_FALSE(is_available_target(v));
  v.inbound_joiner = kNoVehicle;

  v.role = VehicleRole::Leader;
  CHECK_FALSE(is_available_searcher(v));
  CHECK(is_available_target(v));

  v.role = VehicleRole::Follower;
  CHECK_FALSE(is_available_searcher(v));
  CHECK_FALSE(is_available_target(v));
}

TEST_CASE("desired speed draws stay within the configured band") {
  ScenarioConfig cfg;
  Rng rng(123);
  double sum = 0.0;
  const int n = 20000;
  int clamped = 0;
  for (int i = 0; i < n; ++i) {
    const double v = sample_desired_speed(rng, cfg);
    CHECK(v >= cfg.speed_min);
    CHECK(v <= cfg.speed_max);
    if (v == cfg.speed_min || v == cfg.speed_max) ++clamped;
    sum += v;
  }
  CHECK(sum / n == doctest::Approx(cfg.speed_mean).epsilon(0.01));
  // The band is ~3.4 sigma wide, so clamping is rare but present.
  CHECK(clamped < n / 100);
}
