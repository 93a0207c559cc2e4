#include "rowpomdp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace rowpomdp {

void SimConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidConfig("sim config: gamma must lie in [0, 1]");
  if (horizon < 1) throw InvalidConfig("sim config: horizon must be >= 1");
  if (!(slippery_brake_failure_prob >= 0.0 && slippery_brake_failure_prob <= 1.0)) {
    throw InvalidConfig("sim config: slippery_brake_failure_prob must lie in [0, 1]");
  }
  if (perception_latency < 0) throw InvalidConfig("sim config: perception_latency must be >= 0");
  if (!reward.valid()) {
    throw InvalidConfig("sim config: reward weights must satisfy collision < unsafe < 0 < progress");
  }
}

bool is_terminal(const WorldState& s, int horizon) {
  return s.collision_occurred || s.ego.phase == Phase::Cleared || s.timestep >= horizon;
}

bool pedestrian_present_at(const PedestrianFlag& p, int timestep) {
  return p.start_step >= 0 && p.start_step <= timestep && timestep < p.start_step + p.duration;
}

bool pedestrian_waiting_at(const PedestrianFlag& p, int timestep) {
  return p.start_step > timestep && p.start_step - timestep <= kPedestrianWarningSteps;
}

double apparent_speed(const VehicleState& v) {
  if (v.phase == Phase::Approaching && v.compliant && v.distance_to_line <= 3.0 * v.speed) return 0.5 * v.speed;
  return v.speed;
}

Interval earliest_box_interval(const VehicleState& v, int timestep) {
  const int k = crossing_steps(v.intent);
  switch (v.phase) {
    case Phase::InIntersection:
      return {timestep, timestep + v.box_steps_left - 1};
    case Phase::AtLine:
      return {timestep + 1, timestep + k};
    case Phase::Approaching: {
      const int a = predicted_arrival_step(v, timestep);
      return v.compliant ? Interval{a + 1, a + k} : Interval{a, a + k - 1};
    }
    case Phase::Cleared:
      break;
  }
  return {};
}

int min_steps_to_clear(const VehicleState& ego) {
  const int k = crossing_steps(ego.intent);
  switch (ego.phase) {
    case Phase::Approaching:
      return static_cast<int>(std::ceil(ego.distance_to_line / ego.speed - 1e-9)) + 1 + k;
    case Phase::AtLine:
      return 1 + k;
    case Phase::InIntersection:
      return ego.box_steps_left;
    case Phase::Cleared:
      return 0;
  }
  return 0;
}

RightOfWay assess_right_of_way(const WorldState& s, int vehicle_id) {
  RightOfWay r;
  const VehicleState* me = s.find(vehicle_id);
  if (me == nullptr || me->phase == Phase::InIntersection || me->phase == Phase::Cleared) {
    r.committed = true;
    return r;
  }
  r.at_line = me->phase == Phase::AtLine;
  const int t = s.timestep;
  const Path my_path = me->path();

  for (Approach leg : kApproaches) {
    if (!path_uses_leg(my_path, leg)) continue;
    const auto& ped = s.pedestrians[static_cast<std::size_t>(index(leg))];
    if (ped.present || (r.at_line && pedestrian_present_at(ped, t + 1))) r.pedestrian = true;
  }

  const Interval mine = earliest_box_interval(*me, t);
  auto consider = [&](const VehicleState& u) {
    if (u.id == me->id || u.cleared() || !paths_conflict(my_path, u.path())) return;
    if (!u.compliant && earliest_box_interval(u, t).overlaps(mine)) r.stop_runner_imminent = true;
    if (u.phase == Phase::InIntersection) r.conflict_in_box = true;
    if (u.arrival_step < me->arrival_step) r.earlier_arrival = true;
    if (u.arrival_step == me->arrival_step) {
      if (u.approach == right_neighbor(me->approach)) r.tie_on_right = true;
      if (me->intent == Intent::Left && u.approach == opposite(me->approach) &&
          u.intent != Intent::Left) {
        r.left_turn_tie = true;
      }
    }
    if (u.arrival_rank < me->arrival_rank) r.lower_rank = true;
  };
  consider(s.ego);
  for (const auto& u : s.others) consider(u);
  return r;
}

Action ground_truth_action(const WorldState& s) { return assess_right_of_way(s, s.ego.id).action(); }

bool is_unsafe_maneuver(const WorldState& s, Action a) {
  return caution(a) < caution(ground_truth_action(s));
}

double reward(const WorldState& s, Action a, const WorldState& next, const RewardWeights& w) {
  double r = w.step_cost;
  if (next.collision_occurred && !s.collision_occurred) {
    r += w.collision_penalty;
  } else {
    const int rule = caution(ground_truth_action(s));
    if (caution(a) < rule) r += w.unsafe_penalty;
    if (caution(a) > rule) r += w.hesitation_penalty;
  }
  if (next.ego.phase == Phase::Cleared && s.ego.phase != Phase::Cleared) r += w.progress_reward;
  return r;
}

namespace {

void arrive(VehicleState& v, int next_t) {
  v.distance_to_line = 0.0;
  v.arrival_step = next_t;
  if (v.compliant) {
    v.phase = Phase::AtLine;
    v.speed = 0.0;
  } else {
    v.phase = Phase::InIntersection;
    v.box_steps_left = crossing_steps(v.intent);
  }
}

void cross(VehicleState& v, int next_t) {
  if (--v.box_steps_left <= 0) {
    v.box_steps_left = 0;
    v.phase = Phase::Cleared;
    v.clear_step = next_t;
  }
}

void move_other(const WorldState& s, VehicleState& v) {
  const int next_t = s.timestep + 1;
  switch (v.phase) {
    case Phase::Approaching:
      v.distance_to_line -= v.speed;
      if (v.distance_to_line <= 1e-9) arrive(v, next_t);
      break;
    case Phase::AtLine:
      if (assess_right_of_way(s, v.id).action() == Action::Go) {
        v.phase = Phase::InIntersection;
        v.box_steps_left = crossing_steps(v.intent);
      }
      break;
    case Phase::InIntersection:
      cross(v, next_t);
      break;
    case Phase::Cleared:
      break;
  }
}

void move_ego(VehicleState& ego, Action a, bool brake_failed, int next_t) {
  switch (ego.phase) {
    case Phase::Approaching: {
      double travel = 0.0;
      if (a == Action::Go) travel = ego.speed;
      if (a == Action::Yield) travel = 0.5 * ego.speed;
      if (a == Action::Stop && brake_failed) travel = ego.speed;
      ego.distance_to_line -= travel;
      if (ego.distance_to_line <= 1e-9) {
        ego.distance_to_line = 0.0;
        ego.phase = Phase::AtLine;
        ego.arrival_step = next_t;
        ego.speed = 0.0;
      }
      break;
    }
    case Phase::AtLine:
      if (a == Action::Go) {
        ego.phase = Phase::InIntersection;
        ego.box_steps_left = crossing_steps(ego.intent);
      }
      break;
    case Phase::InIntersection:
      if (a == Action::Go) cross(ego, next_t);
      break;
    case Phase::Cleared:
      break;
  }
}

WorldState step_world(const WorldState& s, Action a, Rng& rng, const SimConfig& cfg, bool ego_active) {
  // One brake draw per step regardless of action keeps stream usage fixed.
  const bool brake_failed = rng.uniform() < cfg.slippery_brake_failure_prob && s.slippery &&
                            s.ego.phase == Phase::Approaching && s.ego.speed > 0.0;
  WorldState next = s;
  for (auto& v : next.others) move_other(s, v);
  const Phase ego_before = s.ego.phase;
  if (ego_active) move_ego(next.ego, a, brake_failed, s.timestep + 1);
  next.timestep = s.timestep + 1;
  for (auto& p : next.pedestrians) {
    p.present = pedestrian_present_at(p, next.timestep);
    p.steps_remaining = p.present ? p.start_step + p.duration - next.timestep : 0;
  }
  assign_arrival_ranks(next);

  if (ego_active && next.ego.phase == Phase::InIntersection) {
    const Path ego_path = next.ego.path();
    for (const auto& v : next.others) {
      if (v.phase == Phase::InIntersection && paths_conflict(ego_path, v.path())) {
        next.collision_occurred = true;
      }
    }
    if (ego_before == Phase::AtLine) {
      for (Approach leg : kApproaches) {
        if (path_uses_leg(ego_path, leg) && next.pedestrians[static_cast<std::size_t>(index(leg))].present) {
          next.collision_occurred = true;
        }
      }
    }
  }
  return next;
}

}  // namespace

WorldState transition(const WorldState& s, Action a, Rng& rng, const SimConfig& cfg) {
  if (is_terminal(s, cfg.horizon)) throw ContractViolation("transition called on a terminal state");
  return step_world(s, a, rng, cfg, true);
}

WorldState advance_traffic(const WorldState& s, Rng& rng, const SimConfig& cfg) {
  return step_world(s, Action::Stop, rng, cfg, false);
}

Observation observe(const WorldState& s, Rng& rng, const ObservationNoise& noise) {
  Observation o;
  o.timestep = s.timestep;
  o.ego = s.ego;
  o.frame_dropped = rng.uniform() < noise.dropout_prob;
  // Every vehicle consumes the same number of draws, seen or not.
  for (const auto& v : s.others) {
    const bool occluded = rng.uniform() < noise.occlusion_prob;
    const double dn = rng.normal(0.0, 1.0);
    const double sn = rng.normal(0.0, 1.0);
    const int rank_shift = rng.uniform_int(-noise.rank_noise, noise.rank_noise);
    const bool signal_true = rng.uniform() < noise.signal_accuracy;
    const int signal_other = rng.uniform_int(1, 2);
    if (o.frame_dropped || occluded || v.cleared()) continue;
    VehicleReading r;
    r.id = v.id;
    r.approach = v.approach;
    r.noisy_distance = v.distance_to_line + noise.position_sigma * dn;
    r.noisy_speed = apparent_speed(v) + noise.speed_sigma * sn;
    const int n_vehicles = static_cast<int>(s.others.size()) + 1;
    r.noisy_arrival_rank = std::clamp(v.arrival_rank + rank_shift, 1, n_vehicles);
    r.in_intersection = v.phase == Phase::InIntersection;
    if (r.in_intersection || signal_true) {
      r.turn_signal = v.intent;
    } else {
      r.turn_signal = static_cast<Intent>((index(v.intent) + signal_other) % 3);
    }
    o.vehicles.push_back(r);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const bool occluded = rng.uniform() < noise.occlusion_prob;
    const bool curb_occluded = rng.uniform() < noise.occlusion_prob;
    o.pedestrians[i] = !o.frame_dropped && !occluded && s.pedestrians[i].present;
    if (o.pedestrians[i]) o.pedestrian_steps_left[i] = s.pedestrians[i].steps_remaining;
    if (!o.frame_dropped && !curb_occluded && pedestrian_waiting_at(s.pedestrians[i], s.timestep)) {
      o.pedestrian_countdown[i] = s.pedestrians[i].start_step - s.timestep;
    }
  }
  return o;
}

std::uint64_t state_digest(const WorldState& s) {
  std::uint64_t h = hash_tag("state");
  auto mix = [&](std::uint64_t v) { h = splitmix64(h ^ v); };
  auto mix_double = [&](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    mix(bits);
  };
  auto mix_vehicle = [&](const VehicleState& v) {
    mix(static_cast<std::uint64_t>(v.id));
    mix(static_cast<std::uint64_t>(index(v.approach)) | (static_cast<std::uint64_t>(index(v.intent)) << 8) |
        (static_cast<std::uint64_t>(index(v.phase)) << 16) | (static_cast<std::uint64_t>(v.compliant) << 24));
    mix(static_cast<std::uint64_t>(v.arrival_rank));
    mix(static_cast<std::uint64_t>(v.arrival_step));
    mix(static_cast<std::uint64_t>(v.box_steps_left));
    mix_double(v.distance_to_line);
    mix_double(v.speed);
  };
  mix_vehicle(s.ego);
  for (const auto& v : s.others) mix_vehicle(v);
  for (const auto& p : s.pedestrians) {
    mix(static_cast<std::uint64_t>(p.present) | (static_cast<std::uint64_t>(p.steps_remaining) << 8));
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(p.start_step)));
  }
  mix(static_cast<std::uint64_t>(s.timestep) | (static_cast<std::uint64_t>(s.slippery) << 32) |
      (static_cast<std::uint64_t>(s.collision_occurred) << 33));
  return h;
}

}  // namespace rowpomdp
