#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "rowpomdp/domain.hpp"
#include "rowpomdp/rng.hpp"
#include "rowpomdp/scenario.hpp"

namespace rowpomdp {

struct ObservationNoise {
  double position_sigma = 1.0;
  double speed_sigma = 0.5;
  int rank_noise = 1;
  double occlusion_prob = 0.15;
  double dropout_prob = 0.02;
  double signal_accuracy = 0.85;

  static ObservationNoise from(const ScenarioConfig& cfg) {
    return {cfg.position_noise_sigma, cfg.speed_noise_sigma, cfg.arrival_noise,
            cfg.occlusion_prob,       cfg.dropout_prob,      cfg.signal_accuracy};
  }
};

struct SimConfig {
  double gamma = 0.95;
  int horizon = 12;
  RewardWeights reward;
  double slippery_brake_failure_prob = 0.2;
  int perception_latency = 1;  // steps
  ObservationNoise noise;

  void validate() const;
};

/// One detected vehicle. Occluded vehicles are simply absent.
struct VehicleReading {
  int id = 0;
  Approach approach = Approach::North;
  double noisy_distance = 0.0;
  double noisy_speed = 0.0;
  int noisy_arrival_rank = 1;
  Intent turn_signal = Intent::Straight;  // exact once the vehicle is in the box
  bool in_intersection = false;
  bool visible = true;
  friend bool operator==(const VehicleReading&, const VehicleReading&) = default;
};

struct Observation {
  int timestep = 0;
  bool frame_dropped = false;
  VehicleState ego;  // the ego's own state is known exactly
  std::vector<VehicleReading> vehicles;
  std::array<bool, 4> pedestrians{};  // sighting per crosswalk
  // For a sighted pedestrian, steps until the crosswalk is clear.
  std::array<int, 4> pedestrian_steps_left{};
  // Someone at the curb: steps until they step out (0 = nobody waiting).
  std::array<int, 4> pedestrian_countdown{};
  friend bool operator==(const Observation&, const Observation&) = default;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

bool is_terminal(const WorldState& s, int horizon);

/// Advances the world one step (dt = 1 s). Throws ContractViolation on a
/// terminal state.
WorldState transition(const WorldState& s, Action a, Rng& rng, const SimConfig& cfg);

/// Moves the remaining traffic once the ego has left the scene; used to
/// measure when all vehicles clear.
WorldState advance_traffic(const WorldState& s, Rng& rng, const SimConfig& cfg);

Observation observe(const WorldState& s, Rng& rng, const ObservationNoise& noise);

/// Whether `a` is less cautious than the rule-of-the-road action.
bool is_unsafe_maneuver(const WorldState& s, Action a);

double reward(const WorldState& s, Action a, const WorldState& next, const RewardWeights& w);

/// Right-of-way picture from one vehicle's point of view, on the true state.
struct RightOfWay {
  bool committed = false;  // already in the box or gone
  bool at_line = false;
  bool pedestrian = false;
  bool stop_runner_imminent = false;
  bool conflict_in_box = false;
  bool earlier_arrival = false;
  bool tie_on_right = false;
  bool left_turn_tie = false;
  bool lower_rank = false;

  bool must_hold() const {
    return stop_runner_imminent || conflict_in_box || earlier_arrival || tie_on_right ||
           left_turn_tie || lower_rank;
  }
  /// Cascade: pedestrians, stop-runners, occupied box, earlier arrivals,
  /// right-hand ties, left-turn ties. Holding at the line is a Stop.
  Action action() const {
    if (committed) return Action::Go;
    if (pedestrian) return Action::Stop;
    if (must_hold()) return at_line ? Action::Stop : Action::Yield;
    return Action::Go;
  }
};

RightOfWay assess_right_of_way(const WorldState& s, int vehicle_id);

/// Full-knowledge safe action for the ego.
Action ground_truth_action(const WorldState& s);

/// Box occupancy interval [first, last] (inclusive timesteps) a vehicle
/// would have if it entered as early as possible.
struct Interval {
  int first = 0;
  int last = -1;
  bool overlaps(const Interval& o) const { return first <= o.last && o.first <= last; }
};
Interval earliest_box_interval(const VehicleState& v, int timestep);

bool pedestrian_present_at(const PedestrianFlag& p, int timestep);

/// Pedestrians can be seen at the curb this many steps before they step out.
inline constexpr int kPedestrianWarningSteps = 2;
bool pedestrian_waiting_at(const PedestrianFlag& p, int timestep);

/// Speed a sensor would read: compliant drivers brake visibly over their
/// last three steps before the line, stop-runners do not.
double apparent_speed(const VehicleState& v);

/// Fastest possible steps for the ego to clear from `s` (always Go).
int min_steps_to_clear(const VehicleState& ego);

/// Stable 64-bit digest of a state, for logs.
std::uint64_t state_digest(const WorldState& s);

}  // namespace rowpomdp
