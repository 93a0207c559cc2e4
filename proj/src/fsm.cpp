#include "rowpomdp/fsm.hpp"

#include <algorithm>
#include <cmath>

namespace rowpomdp {

namespace {

constexpr double kSignalTrustDistance = 15.0;
constexpr double kSlowSpeed = 5.0;
constexpr double kAtLineDistance = 0.75;

int estimated_arrival(const VehicleReading& r, int timestep) {
  if (r.in_intersection || r.noisy_distance <= kAtLineDistance) return timestep;
  const double v = std::max(r.noisy_speed, 0.5);
  return timestep + static_cast<int>(std::ceil(r.noisy_distance / v));
}

}  // namespace

Intent fsm_intent_estimate(const VehicleReading& r) {
  if (r.in_intersection) return r.turn_signal;
  if (r.turn_signal == Intent::Straight) return Intent::Straight;
  if (r.noisy_distance <= kSignalTrustDistance || r.noisy_speed < kSlowSpeed) return r.turn_signal;
  return Intent::Straight;
}

Action fsm_rule_action(const Observation& o, const std::map<int, Intent>& intents) {
  const VehicleState& ego = o.ego;
  if (ego.phase == Phase::InIntersection || ego.phase == Phase::Cleared) return Action::Go;
  const Action hold = ego.phase == Phase::AtLine ? Action::Stop : Action::Yield;
  const Path mine = ego.path();

  for (Approach leg : kApproaches) {
    if (o.pedestrians[index(leg)] && path_uses_leg(mine, leg)) return Action::Stop;
  }

  const int ego_arrival = ego.arrival_step;
  for (const auto& r : o.vehicles) {
    auto it = intents.find(r.id);
    const Intent guess = it != intents.end() ? it->second : fsm_intent_estimate(r);
    if (!paths_conflict(mine, {r.approach, guess})) continue;
    if (r.in_intersection) return hold;
    if (r.noisy_arrival_rank < ego.arrival_rank) return hold;
    const int eta = estimated_arrival(r, o.timestep);
    const bool tie = eta == ego_arrival;
    if (tie && r.approach == right_neighbor(ego.approach)) return hold;
    if (tie && ego.intent == Intent::Left && r.approach == opposite(ego.approach) &&
        guess != Intent::Left) {
      return hold;
    }
  }
  return Action::Go;
}

PlannerDecision fsm_plan(const Observation& o, FsmMemory& memory) {
  PlannerDecision d;
  if (o.frame_dropped && memory.last_action) {
    d.action = *memory.last_action;
    d.intent_predictions = memory.last_intents;
    d.diagnostics["held_previous"] = 1.0;
    return d;
  }
  // Vehicles that drop out of view keep their last estimate.
  d.intent_predictions = memory.last_intents;
  std::map<int, Intent> current;
  for (const auto& r : o.vehicles) current[r.id] = d.intent_predictions[r.id] = fsm_intent_estimate(r);
  d.action = fsm_rule_action(o, current);
  memory.last_action = d.action;
  memory.last_intents = d.intent_predictions;
  return d;
}

PlannerDecision OraclePlanner::decide(const PlannerInput& in) {
  PlannerDecision d;
  if (in.truth == nullptr) throw ContractViolation("oracle planner needs the true state");
  d.action = ground_truth_action(*in.truth);
  for (const auto& v : in.truth->others) {
    if (!v.cleared()) d.intent_predictions[v.id] = v.intent;
  }
  return d;
}

}  // namespace rowpomdp
