#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rowpomdp/belief.hpp"
#include "rowpomdp/domain.hpp"
#include "rowpomdp/rng.hpp"
#include "rowpomdp/sim.hpp"

namespace rowpomdp {

struct PlannerDecision {
  Action action = Action::Stop;
  std::map<int, Intent> intent_predictions;  // vehicle id -> predicted intent
  double compute_time = 0.0;                 // seconds, filled in by the harness
  std::map<std::string, double> diagnostics;
};

/// Everything a planner may look at for one decision. `truth` is only
/// populated for the reference oracle.
struct PlannerInput {
  const Observation& observation;
  const Belief* belief = nullptr;
  const WorldState* truth = nullptr;
  Rng* rng = nullptr;
};

class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::string_view name() const = 0;
  virtual bool uses_belief() const { return false; }
  /// Per-episode state reset.
  virtual void reset() {}
  virtual PlannerDecision decide(const PlannerInput& in) = 0;
};

/// Picks the best-scoring action with ties broken Stop > Yield > Go.
template <class Score>
Action argmax_action(const Score& score) {
  Action best = Action::Stop;
  for (Action a : kActions) {
    if (score(a) > score(best)) best = a;
  }
  return best;
}

/// Maximum a-posteriori intent for every vehicle present in the belief.
std::map<int, Intent> belief_intent_predictions(const Belief& b);

}  // namespace rowpomdp
