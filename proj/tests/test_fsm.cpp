#include "doctest.h"
#include "rowpomdp/fsm.hpp"

using namespace rowpomdp;

namespace {

// Ego from the south going straight, due at its line at step 4.
Observation base_obs(Phase phase = Phase::Approaching) {
  Observation o;
  o.ego.approach = Approach::South;
  o.ego.intent = Intent::Straight;
  o.ego.phase = phase;
  o.ego.distance_to_line = phase == Phase::Approaching ? 20.0 : 0.0;
  o.ego.speed = phase == Phase::Approaching ? 5.0 : 0.0;
  o.ego.arrival_step = 4;
  o.ego.arrival_rank = 1;
  return o;
}

VehicleReading reading(int id, Approach from, double distance, double speed, int rank) {
  VehicleReading r;
  r.id = id;
  r.approach = from;
  r.noisy_distance = distance;
  r.noisy_speed = speed;
  r.noisy_arrival_rank = rank;
  return r;
}

Action decide(const Observation& o) {
  FsmMemory m;
  return fsm_plan(o, m).action;
}

}  // namespace

TEST_CASE("fsm: open road is Go") { CHECK(decide(base_obs()) == Action::Go); }

TEST_CASE("fsm: tie with a vehicle on the right yields, on the left goes") {
  Observation o = base_obs();
  o.vehicles.push_back(reading(1, right_neighbor(Approach::South), 20.0, 5.0, 2));
  CHECK(decide(o) == Action::Yield);
  Observation at_line = base_obs(Phase::AtLine);
  at_line.timestep = 4;
  at_line.vehicles.push_back(reading(1, right_neighbor(Approach::South), 0.0, 0.0, 2));
  CHECK(decide(at_line) == Action::Stop);
  Observation left = base_obs();
  left.vehicles.push_back(reading(1, Approach::West, 20.0, 5.0, 2));
  CHECK(decide(left) == Action::Go);
}

TEST_CASE("fsm: pedestrians on the ego's legs stop it") {
  Observation o = base_obs();
  o.pedestrians[index(Approach::North)] = true;
  CHECK(decide(o) == Action::Stop);
  Observation side = base_obs();
  side.pedestrians[index(Approach::East)] = true;
  CHECK(decide(side) == Action::Go);
}

TEST_CASE("fsm: a conflicting vehicle in the box or an earlier arrival means hold") {
  Observation o = base_obs();
  auto r = reading(1, Approach::West, 0.0, 5.0, 1);
  r.in_intersection = true;
  o.vehicles.push_back(r);
  CHECK(decide(o) == Action::Yield);

  Observation earlier = base_obs();
  earlier.ego.arrival_rank = 2;
  earlier.vehicles.push_back(reading(1, Approach::West, 5.0, 5.0, 1));
  CHECK(decide(earlier) == Action::Yield);

  // An oncoming right turn stays clear of the ego's straight path.
  Observation harmless = base_obs();
  harmless.ego.arrival_rank = 2;
  auto oncoming = reading(1, Approach::North, 5.0, 5.0, 1);
  oncoming.turn_signal = Intent::Right;
  harmless.vehicles.push_back(oncoming);
  REQUIRE_FALSE(paths_conflict({Approach::South, Intent::Straight}, {Approach::North, Intent::Right}));
  CHECK(decide(harmless) == Action::Go);
}

TEST_CASE("fsm: once in the box the ego keeps going") {
  Observation o = base_obs(Phase::InIntersection);
  o.pedestrians.fill(true);
  CHECK(decide(o) == Action::Go);
}

TEST_CASE("fsm: a dropped frame repeats the last action") {
  FsmMemory m;
  Observation o = base_obs();
  o.vehicles.push_back(reading(1, right_neighbor(Approach::South), 20.0, 5.0, 2));
  REQUIRE(fsm_plan(o, m).action == Action::Yield);
  Observation dropped = base_obs();
  dropped.frame_dropped = true;
  const auto d = fsm_plan(dropped, m);
  CHECK(d.action == Action::Yield);
  CHECK(d.intent_predictions.count(1) == 1);
  // With no history, a dropped frame is judged on what little it shows.
  CHECK(decide(dropped) == Action::Go);
}

TEST_CASE("fsm: turn signals are trusted only near the line or when slow") {
  auto r = reading(1, Approach::East, 30.0, 7.0, 2);
  r.turn_signal = Intent::Left;
  CHECK(fsm_intent_estimate(r) == Intent::Straight);
  r.noisy_distance = 12.0;
  CHECK(fsm_intent_estimate(r) == Intent::Left);
  r.noisy_distance = 30.0;
  r.noisy_speed = 3.0;
  CHECK(fsm_intent_estimate(r) == Intent::Left);
  r.in_intersection = true;
  r.turn_signal = Intent::Right;
  CHECK(fsm_intent_estimate(r) == Intent::Right);
}

TEST_CASE("fsm property: never Go with a conflicting vehicle visibly in the box") {
  Rng rng(21);
  for (int k = 0; k < 3000; ++k) {
    Observation o = base_obs(rng.bernoulli(0.5) ? Phase::AtLine : Phase::Approaching);
    o.ego.approach = static_cast<Approach>(rng.uniform_int(0, 3));
    o.ego.intent = kIntents[static_cast<std::size_t>(rng.uniform_int(0, 2))];
    auto r = reading(1, static_cast<Approach>(rng.uniform_int(0, 3)), 0.0, 5.0, rng.uniform_int(1, 3));
    r.in_intersection = true;
    r.turn_signal = kIntents[static_cast<std::size_t>(rng.uniform_int(0, 2))];
    if (r.approach == o.ego.approach) continue;
    o.vehicles.push_back(r);
    if (paths_conflict(o.ego.path(), {r.approach, r.turn_signal})) CHECK(decide(o) != Action::Go);
  }
}
