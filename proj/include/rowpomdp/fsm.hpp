#pragma once

#include <map>
#include <optional>

#include "rowpomdp/planner.hpp"

namespace rowpomdp {

/// Intent heuristic from one vehicle reading:
///  - in the box the path is visible, so the reading is taken as is;
///  - a turn signal is trusted once the vehicle is within 15 m of its line
///    or moving slower than 5 m/step;
///  - anything else (far away and fast, or no turn shown) is Straight.
Intent fsm_intent_estimate(const VehicleReading& r);

/// Rule cascade on the observed picture, in priority order: pedestrians,
/// vehicles already in the box, earlier arrivals, right-hand vehicles on
/// ties, left-turn conflicts. Holding is Stop at the line and Yield while
/// approaching.
Action fsm_rule_action(const Observation& o, const std::map<int, Intent>& intents);

struct FsmMemory {
  std::optional<Action> last_action;
  std::map<int, Intent> last_intents;
};

/// Dropped frames repeat the previous decision.
PlannerDecision fsm_plan(const Observation& o, FsmMemory& memory);

class FsmPlanner final : public Planner {
 public:
  std::string_view name() const override { return "fsm"; }
  void reset() override { memory_ = {}; }
  PlannerDecision decide(const PlannerInput& in) override { return fsm_plan(in.observation, memory_); }

 private:
  FsmMemory memory_;
};

/// Full-knowledge reference driver; reads the true state.
class OraclePlanner final : public Planner {
 public:
  std::string_view name() const override { return "oracle"; }
  PlannerDecision decide(const PlannerInput& in) override;
};

}  // namespace rowpomdp
