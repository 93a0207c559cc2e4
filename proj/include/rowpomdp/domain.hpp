#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rowpomdp {

// Approaches are indexed clockwise starting at North.
enum class Approach : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };
enum class Intent : std::uint8_t { Straight = 0, Left = 1, Right = 2 };
// Ordered from most to least cautious; this is also the tie-break order.
enum class Action : std::uint8_t { Stop = 0, Yield = 1, Go = 2 };
enum class Phase : std::uint8_t { Approaching = 0, AtLine = 1, InIntersection = 2, Cleared = 3 };

inline constexpr std::array<Approach, 4> kApproaches{Approach::North, Approach::East,
                                                     Approach::South, Approach::West};
inline constexpr std::array<Intent, 3> kIntents{Intent::Straight, Intent::Left, Intent::Right};
inline constexpr std::array<Action, 3> kActions{Action::Stop, Action::Yield, Action::Go};
inline constexpr int kNumActions = 3;

constexpr int index(Approach a) { return static_cast<int>(a); }
constexpr int index(Intent i) { return static_cast<int>(i); }
constexpr int index(Action a) { return static_cast<int>(a); }
constexpr int index(Phase p) { return static_cast<int>(p); }

/// Higher value means more cautious (Go < Yield < Stop).
constexpr int caution(Action a) { return 2 - static_cast<int>(a); }

std::string_view to_string(Approach a);
std::string_view to_string(Intent i);
std::string_view to_string(Action a);
std::string_view to_string(Phase p);

std::optional<Approach> parse_approach(std::string_view s);
std::optional<Intent> parse_intent(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Phase> parse_phase(std::string_view s);

/// Approach whose traffic is on the right-hand side of a vehicle arriving
/// from `a` (right-hand traffic).
constexpr Approach right_neighbor(Approach a) {
  return static_cast<Approach>((index(a) + 3) % 4);
}
constexpr Approach opposite(Approach a) { return static_cast<Approach>((index(a) + 2) % 4); }

/// Leg a vehicle leaves through.
constexpr Approach exit_leg(Approach from, Intent intent) {
  switch (intent) {
    case Intent::Straight:
      return opposite(from);
    case Intent::Right:
      return right_neighbor(from);
    case Intent::Left:
      return opposite(right_neighbor(from));
  }
  return opposite(from);
}

struct Path {
  Approach approach;
  Intent intent;
  friend constexpr bool operator==(const Path&, const Path&) = default;
};

/// True iff the two planned paths cross, merge into the same exit lane, or
/// share the entry lane inside the single conflict box.
///
/// Lanes are modelled as eight points on the box boundary in clockwise order
/// N_in, N_out, E_in, E_out, S_in, S_out, W_in, W_out; a path is the chord
/// from its entry point to its exit point and two chords cross iff their
/// endpoints interleave.
bool paths_conflict(Path a, Path b);

/// Box occupancy in steps: 2 for Straight/Right, 3 for Left.
constexpr int crossing_steps(Intent i) { return i == Intent::Left ? 3 : 2; }

struct VehicleState {
  int id = 0;
  Approach approach = Approach::North;
  Intent intent = Intent::Straight;
  int arrival_rank = 1;
  // Step at which the vehicle reaches (or reached) its stop line; ties in
  // this value are arrival ties.
  int arrival_step = 0;
  double distance_to_line = 0.0;  // m
  double speed = 0.0;             // nominal approach speed, m/step
  bool compliant = true;
  Phase phase = Phase::Approaching;
  int box_steps_left = 0;  // > 0 only while InIntersection
  int clear_step = -1;     // timestep at which the vehicle became Cleared

  Path path() const { return {approach, intent}; }
  bool cleared() const { return phase == Phase::Cleared; }
  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

/// A pedestrian crossing one leg of the intersection. `start_step` may lie in
/// the future (scheduled appearance); `steps_remaining` counts down while the
/// pedestrian is on the crosswalk.
struct PedestrianFlag {
  bool present = false;
  int steps_remaining = 0;
  int start_step = -1;  // -1: none scheduled
  int duration = 0;
  friend bool operator==(const PedestrianFlag&, const PedestrianFlag&) = default;
};

struct WorldState {
  VehicleState ego;
  std::vector<VehicleState> others;  // at most 3
  std::array<PedestrianFlag, 4> pedestrians{};
  bool slippery = false;
  int timestep = 0;
  bool collision_occurred = false;

  const VehicleState* find(int id) const;
  friend bool operator==(const WorldState&, const WorldState&) = default;
};

inline constexpr int kMaxOtherVehicles = 3;

struct RewardWeights {
  double collision_penalty = -100.0;
  double unsafe_penalty = -10.0;
  double progress_reward = 10.0;
  double step_cost = -1.0;
  // Charged when the ego is more cautious than the right-of-way rule asks
  // (holding when it has the right of way).
  double hesitation_penalty = -5.0;

  /// collision < unsafe < 0 < progress, step_cost <= 0,
  /// unsafe <= hesitation <= 0.
  bool valid() const;
  RewardWeights scaled(double k) const {
    return {collision_penalty * k, unsafe_penalty * k, progress_reward * k, step_cost * k,
            hesitation_penalty * k};
  }
};

/// True when pedestrian traffic on `leg` blocks a vehicle following `p`
/// (the path enters or exits through that leg).
constexpr bool path_uses_leg(Path p, Approach leg) {
  return p.approach == leg || exit_leg(p.approach, p.intent) == leg;
}

/// Recomputes arrival_step of approaching vehicles and assigns unique
/// arrival ranks: earlier arrival first; ties resolved by the right-hand rule
/// and left-turn yielding, then by id.
void assign_arrival_ranks(WorldState& s);

/// Predicted arrival step of a vehicle that keeps its nominal speed.
int predicted_arrival_step(const VehicleState& v, int timestep);

}  // namespace rowpomdp
