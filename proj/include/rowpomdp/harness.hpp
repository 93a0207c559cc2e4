#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rowpomdp/belief.hpp"
#include "rowpomdp/planners.hpp"
#include "rowpomdp/scenario.hpp"
#include "rowpomdp/sim.hpp"

namespace rowpomdp {

struct RunConfig {
  int n_scenarios = 60;
  ScenarioConfig scenario;
  SimConfig sim;
  int n_particles = 150;
  PomcpConfig pomcp;
  RolloutPolicy pomcp_rollout = RolloutPolicy::Random;
  DespotConfig despot;
  CompactDynamics compact;
  double deadline = 0.05;  // seconds per decision
  int workers = 1;
  std::vector<std::string> planners = benchmark_planners();
  std::uint64_t seed = 42;
  // Traffic keeps moving after the ego's episode ends, up to this many
  // multiples of the horizon, to measure when everyone has cleared.
  int drain_factor = 3;

  /// Copies the horizon and sensor noise, which both configs carry, from
  /// the scenario config into the sim config.
  void sync_echoes() {
    sim.horizon = scenario.horizon;
    sim.noise = ObservationNoise::from(scenario);
  }
  BeliefConfig belief() const;
  PlannerSettings planner_settings() const;
  int completion_limit() const { return drain_factor * sim.horizon; }
  void validate() const;
};

struct StepRecord {
  int timestep = 0;
  std::uint64_t state_digest = 0;
  Phase ego_phase = Phase::Approaching;  // before acting
  double ego_distance = 0.0;
  Observation observation;  // as delivered to the planner
  Action action = Action::Stop;
  Action oracle_action = Action::Stop;  // rule-of-the-road action on the true state
  std::map<int, Intent> predicted_intents;
  std::map<int, Intent> true_intents;  // vehicles not yet cleared
  double reward = 0.0;
  double compute_time = 0.0;
  bool deadline_met = true;
  bool near_miss = false;
  bool degenerate_belief = false;

  int intent_correct() const;
  int intent_total() const { return static_cast<int>(true_intents.size()); }
};

/// Step at which a vehicle would enter the box if it kept its current
/// speed: now if it is in the box or waiting at the line.
int predicted_entry_step(const VehicleState& v, int t);

/// The ego and a vehicle on a conflicting path, both still to clear, are
/// predicted to enter the box at most one step apart.
bool is_near_miss(const WorldState& s);

struct EpisodeResult {
  int scenario_id = 0;
  std::uint64_t scenario_seed = 0;
  bool adversarial = false;
  std::string planner;
  std::vector<StepRecord> steps;
  std::string error;  // set when the planner failed; the episode stops there

  bool collision = false;
  int collision_step = -1;
  int collision_vehicle = -1;  // other vehicle involved, -1 for a pedestrian
  int ego_clear_step = -1;
  std::map<int, int> clear_steps;         // vehicle id -> step cleared, -1 if never
  std::map<int, int> oracle_clear_steps;  // same, in the oracle-driven run
  int completion_time = 0;                // all vehicles cleared (censored)
  double total_reward = 0.0;

  bool failed() const { return !error.empty(); }
  /// "failed", "collision", "cleared" (the ego got through) or "timeout".
  std::string outcome() const;
  int decisions() const { return static_cast<int>(steps.size()); }
  int action_correct() const;
  int intent_correct() const;
  int intent_total() const;
  int on_time() const;
  double compute_time_sum() const;
  int near_misses() const;
  int vehicles_cleared() const;
  int efficient_vehicles() const;
};

/// Runs one planner on one scenario. World randomness at step t is drawn
/// from streams derived from (scenario seed, t), so every planner faces the
/// same pedestrians, brake failures and sensor noise for the same states.
/// `oracle` (the oracle-driven run of the same scenario) fills in
/// oracle_clear_steps.
EpisodeResult run_episode(const Scenario& scn, Planner& planner, const RunConfig& cfg,
                          const EpisodeResult* oracle = nullptr);

EpisodeResult run_oracle_episode(const Scenario& scn, const RunConfig& cfg);

/// All (scenario, planner) episodes, ordered by scenario id and then by
/// the order of cfg.planners regardless of the worker count. The oracle
/// run of each scenario always comes last in its group. A planner that
/// throws yields a failed episode instead of aborting the suite.
std::vector<EpisodeResult> run_suite(const std::vector<Scenario>& suite, const RunConfig& cfg);

enum class SubsetFilter : std::uint8_t { All, Adversarial, NonAdversarial };

/// Rates are fractions in [0, 1]; reports print them as percentages.
/// One step is one simulated second.
struct PlannerMetrics {
  std::string planner;
  int episodes = 0;
  int failed_episodes = 0;  // counted as not collision-free
  double collision_free_rate = 0.0;
  double action_accuracy = 0.0;
  double intent_accuracy = 0.0;
  double flow_efficiency = 0.0;
  double mean_completion_time = 0.0;
  double throughput = 0.0;  // vehicles cleared per second
  double mean_reward = 0.0;
  double near_miss_recovery = 0.0;  // near-miss episodes that still ended collision-free
  // Wall-clock dependent.
  double mean_processing_time = 0.0;
  double real_time_fraction = 0.0;
};

/// Throws std::invalid_argument when no episode matches.
std::vector<PlannerMetrics> compute_metrics(const std::vector<EpisodeResult>& episodes,
                                            const std::vector<std::string>& planner_order,
                                            SubsetFilter filter = SubsetFilter::All);

struct RadarAxis {
  std::string name;
  bool lower_is_better = false;
};
const std::vector<RadarAxis>& radar_axes();
std::vector<double> radar_raw(const PlannerMetrics& m);

/// Min-max scaling per axis across planners; lower-is-better axes are
/// inverted. An axis on which all planners tie maps to 1.
std::vector<std::vector<double>> normalize_for_radar(const std::vector<PlannerMetrics>& metrics);

}  // namespace rowpomdp
