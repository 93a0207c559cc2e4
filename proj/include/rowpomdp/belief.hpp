#pragma once

#include <array>
#include <stdexcept>

#include "rowpomdp/particle_filter.hpp"
#include "rowpomdp/scenario.hpp"
#include "rowpomdp/sim.hpp"

namespace rowpomdp {

/// Prior and likelihood settings for tracking the hidden parts of the
/// world: other drivers' intents, compliance, exact kinematics and
/// pedestrians.
struct BeliefConfig {
  int n_particles = 150;
  std::array<double, 3> intent_prior{0.55, 0.30, 0.15};
  double noncompliance_prior = 0.05 / 3.0 * 2.0 + 0.30 / 3.0;
  double pedestrian_prior = 0.185;
  double intrusion_prior = 0.08;  // per crosswalk, appearance later in the episode
  double min_speed = 3.0;
  double max_speed = 8.0;
  // Likelihood assigned to an observation that contradicts a discrete field.
  double mismatch_likelihood = 1e-3;
  double ego_rank_mismatch_likelihood = 0.05;
  // After resampling, chance per approaching vehicle of redrawing its
  // intent and compliance, to keep hypotheses from dying out.
  double rejuvenation_prob = 0.1;
  ObservationNoise noise;
  SimConfig sim;

  static BeliefConfig from(const ScenarioConfig& scfg, const SimConfig& sim, int n_particles);
};

struct Belief {
  pf::ParticleSet<WorldState> particles;
  int history_length = 0;  // action/observation pairs absorbed

  std::size_t size() const { return particles.size(); }
};

class UnknownVehicle : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// b0: the ego and road condition come from the scenario, everything about
/// the other road users is sampled from the prior conditioned on `first_obs`.
Belief init_belief(const Scenario& scn, const Observation& first_obs, const BeliefConfig& cfg, Rng& rng);

struct UpdateStats {
  bool degenerate = false;  // every particle contradicted the observation
  int births = 0;           // vehicles seen for the first time
  bool resampled = false;
};

/// Bayes filter step: push every particle through the transition model,
/// weight by the observation likelihood, reinvigorate on collapse, resample
/// when the effective sample size drops below half.
Belief update(const Belief& b, Action a, const Observation& o, const BeliefConfig& cfg, Rng& rng,
              UpdateStats* stats = nullptr);

/// Transition only (no evidence); used to bridge perception latency.
Belief predict(const Belief& b, Action a, const BeliefConfig& cfg, Rng& rng);

/// Overwrites the ego in every particle with the (exactly known) current
/// ego state and re-ranks arrivals.
void set_ego(Belief& b, const VehicleState& ego);

/// Log-likelihood of `o` given hypothesis `s`, plus the number of
/// discrete contradictions.
struct ObservationFit {
  double log_likelihood = 0.0;
  int contradictions = 0;
};
ObservationFit observation_fit(const Observation& o, const WorldState& s, const BeliefConfig& cfg);

/// Posterior over (Straight, Left, Right) for one vehicle.
std::array<double, 3> intent_marginal(const Belief& b, int vehicle_id);

/// Posterior probability that a pedestrian is on each crosswalk.
std::array<double, 4> pedestrian_marginal(const Belief& b);

}  // namespace rowpomdp
