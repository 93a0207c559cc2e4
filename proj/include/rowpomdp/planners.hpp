#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rowpomdp/despot.hpp"
#include "rowpomdp/fsm.hpp"
#include "rowpomdp/planner.hpp"
#include "rowpomdp/pomcp.hpp"
#include "rowpomdp/qmdp.hpp"
#include "rowpomdp/search.hpp"

namespace rowpomdp {

enum class RolloutPolicy : std::uint8_t { Random, Fsm };

/// Generative intersection model for the tree searches: the simulator's
/// transition and reward, with observations reduced to a coarse key
/// (dropout, pedestrian sightings, ego phase, and per visible vehicle
/// whether it is in the box or near its line).
class IntersectionModel {
 public:
  using State = WorldState;

  IntersectionModel(const SimConfig& sim, RolloutPolicy rollout = RolloutPolicy::Random)
      : sim_(sim), rollout_(rollout) {}

  StepOutcome<WorldState> step(const WorldState& s, Action a, Rng& rng) const;
  bool is_terminal(const WorldState& s) const;
  double discount() const { return sim_.gamma; }
  Action rollout_action(const WorldState& s, Rng& rng) const;
  /// FSM rules on a sampled observation of `s`.
  Action default_action(const WorldState& s, Rng& rng) const;
  /// Return of clearing as fast as physically possible with no penalties.
  double upper_bound(const WorldState& s) const;

  const SimConfig& sim() const { return sim_; }

 private:
  SimConfig sim_;
  RolloutPolicy rollout_;
};

std::uint64_t observation_key(const Observation& o);

class PomcpPlanner final : public Planner {
 public:
  PomcpPlanner(const SimConfig& sim, PomcpConfig cfg, RolloutPolicy rollout = RolloutPolicy::Random);
  std::string_view name() const override { return "pomcp"; }
  bool uses_belief() const override { return true; }
  PlannerDecision decide(const PlannerInput& in) override;

 private:
  IntersectionModel model_;
  PomcpConfig cfg_;
};

class DespotPlanner final : public Planner {
 public:
  DespotPlanner(const SimConfig& sim, DespotConfig cfg);
  std::string_view name() const override { return "despot"; }
  bool uses_belief() const override { return true; }
  PlannerDecision decide(const PlannerInput& in) override;

 private:
  IntersectionModel model_;
  DespotConfig cfg_;
};

struct PlannerSettings {
  SimConfig sim;
  PomcpConfig pomcp;
  RolloutPolicy pomcp_rollout = RolloutPolicy::Random;
  DespotConfig despot;
  CompactDynamics compact;
};

/// The four compared planners, in report order.
const std::vector<std::string>& benchmark_planners();

/// "fsm", "qmdp", "pomcp", "despot" or "oracle"; throws
/// std::invalid_argument otherwise.
std::unique_ptr<Planner> make_planner(std::string_view name, const PlannerSettings& settings);

}  // namespace rowpomdp
