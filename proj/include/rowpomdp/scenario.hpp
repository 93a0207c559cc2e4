#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rowpomdp/domain.hpp"

namespace rowpomdp {

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScenarioConfig {
  std::array<double, 3> intent_weights{0.55, 0.30, 0.15};  // straight, left, right
  double pedestrian_prob_min = 0.12;
  double pedestrian_prob_max = 0.25;
  double position_noise_sigma = 1.0;  // m
  double speed_noise_sigma = 0.5;     // m/step
  int arrival_noise = 1;              // +/- steps (rank perturbation bound)
  double occlusion_prob = 0.15;
  double dropout_prob = 0.02;
  double slippery_prob = 0.12;
  double signal_accuracy = 0.85;  // P(turn signal shows the true intent)
  double adversarial_fraction = 1.0 / 3.0;
  int max_other_vehicles = 3;
  double noncompliance_prob = 0.05;
  double adversarial_noncompliance_prob = 0.30;
  int horizon = 12;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;

  /// Compliance prior for a scenario whose adversarial flag is unknown.
  double mixed_noncompliance_prob() const {
    return adversarial_fraction * adversarial_noncompliance_prob +
           (1.0 - adversarial_fraction) * noncompliance_prob;
  }
  double mean_pedestrian_prob() const {
    return 0.5 * (pedestrian_prob_min + pedestrian_prob_max);
  }
};

struct EgoSpec {
  Approach approach = Approach::North;
  Intent intent = Intent::Straight;
  double distance = 20.0;
  double speed = 5.0;
  friend bool operator==(const EgoSpec&, const EgoSpec&) = default;
};

struct OtherSpec {
  Approach approach = Approach::East;
  Intent intent = Intent::Straight;
  int arrival_offset = 0;  // steps after the ego's nominal arrival
  bool compliant = true;
  double speed = 5.0;
  double distance = 20.0;
  friend bool operator==(const OtherSpec&, const OtherSpec&) = default;
};

struct PedestrianSpec {
  Approach approach = Approach::North;
  int start_step = 0;
  int duration = 1;
  friend bool operator==(const PedestrianSpec&, const PedestrianSpec&) = default;
};

struct Scenario {
  int id = 0;
  std::uint64_t seed = 0;
  bool adversarial = false;
  EgoSpec ego;
  std::vector<OtherSpec> others;
  std::vector<PedestrianSpec> pedestrians;
  bool slippery = false;
  friend bool operator==(const Scenario&, const Scenario&) = default;

  /// Steps the ego needs to reach its stop line at nominal speed.
  int ego_arrival_steps() const;
  bool has_simultaneous_arrival() const;
  bool has_stop_runner() const;
  /// A pedestrian appearing after the first step on a leg the ego uses.
  bool has_pedestrian_intrusion() const;
};

Scenario generate_scenario(std::uint64_t seed, const ScenarioConfig& cfg, bool adversarial);

/// ceil(n * adversarial_fraction) adversarial scenarios first, then the rest.
std::vector<Scenario> generate_suite(std::uint64_t base_seed, int n, const ScenarioConfig& cfg);

int adversarial_count(int n, double fraction);

/// Ground-truth world state at timestep 0.
WorldState make_initial_state(const Scenario& scn);

}  // namespace rowpomdp
