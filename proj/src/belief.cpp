#include "rowpomdp/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rowpomdp {

BeliefConfig BeliefConfig::from(const ScenarioConfig& scfg, const SimConfig& sim, int n_particles) {
  BeliefConfig cfg;
  cfg.n_particles = n_particles;
  cfg.intent_prior = scfg.intent_weights;
  cfg.noncompliance_prior = scfg.mixed_noncompliance_prob();
  cfg.pedestrian_prior = scfg.mean_pedestrian_prob();
  cfg.noise = ObservationNoise::from(scfg);
  cfg.sim = sim;
  return cfg;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double gaussian_log_pdf(double x, double mean, double sigma, double mismatch, int& contradictions) {
  if (sigma <= 0.0) {
    if (std::abs(x - mean) < 1e-9) return 0.0;
    ++contradictions;
    return std::log(mismatch);
  }
  const double z = (x - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * kLog2Pi;
}

double log_or_mismatch(double p, double mismatch, int& contradictions) {
  if (p > 0.0) return std::log(p);
  ++contradictions;
  return std::log(mismatch);
}

double rank_probability(int true_rank, int observed, int noise, int n_vehicles) {
  int hits = 0;
  for (int d = -noise; d <= noise; ++d) {
    if (std::clamp(true_rank + d, 1, n_vehicles) == observed) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(2 * noise + 1);
}

Intent sample_intent(const std::array<double, 3>& w, Rng& rng) {
  const double total = w[0] + w[1] + w[2];
  const double u = rng.uniform() * total;
  if (u < w[0]) return Intent::Straight;
  if (u < w[0] + w[1]) return Intent::Left;
  return Intent::Right;
}

Intent sample_intent_given_signal(const BeliefConfig& cfg, Intent signal, Rng& rng) {
  std::array<double, 3> post{};
  for (Intent i : kIntents) {
    const double lik = i == signal ? cfg.noise.signal_accuracy : (1.0 - cfg.noise.signal_accuracy) / 2.0;
    post[static_cast<std::size_t>(index(i))] = cfg.intent_prior[static_cast<std::size_t>(index(i))] * lik;
  }
  if (post[0] + post[1] + post[2] <= 0.0) return signal;
  return sample_intent(post, rng);
}

// With `signal_informed`, the intent is drawn from the posterior given the
// turn signal. Births during an update draw from the prior instead, since
// the update then weights them by that same reading.
VehicleState sample_vehicle(const VehicleReading& r, int t, const BeliefConfig& cfg, Rng& rng,
                            bool signal_informed = true) {
  VehicleState v;
  v.id = r.id;
  v.approach = r.approach;
  v.compliant = !rng.bernoulli(cfg.noncompliance_prior);
  if (r.in_intersection) {
    v.intent = r.turn_signal;
    const int k = crossing_steps(v.intent);
    v.phase = Phase::InIntersection;
    v.box_steps_left = rng.uniform_int(1, k);
    v.distance_to_line = 0.0;
    v.speed = rng.uniform(cfg.min_speed, cfg.max_speed);
    v.arrival_step = t - (k - v.box_steps_left) - (v.compliant ? 1 : 0);
    return v;
  }
  v.intent = signal_informed ? sample_intent_given_signal(cfg, r.turn_signal, rng)
                             : sample_intent(cfg.intent_prior, rng);
  const double d = r.noisy_distance + rng.normal(0.0, cfg.noise.position_sigma);
  double speed = r.noisy_speed + rng.normal(0.0, cfg.noise.speed_sigma);
  // A compliant driver this close is braking; its cruise speed is higher.
  if (v.compliant && d <= 6.0 * speed) speed *= 2.0;
  if (d <= 0.5 && speed < 0.5 * cfg.min_speed) {
    // Waiting at the line: only compliant drivers stop.
    v.compliant = true;
    v.phase = Phase::AtLine;
    v.distance_to_line = 0.0;
    v.speed = 0.0;
    v.arrival_step = t - rng.uniform_int(0, 1);
  } else {
    v.phase = Phase::Approaching;
    v.distance_to_line = std::max(d, 0.1);
    v.speed = std::clamp(speed, cfg.min_speed, cfg.max_speed);
  }
  return v;
}

// `steps_left` is the sighted pedestrian's remaining crossing time, 0 if unseen.
PedestrianFlag sample_pedestrian(int steps_left, int t, const BeliefConfig& cfg, Rng& rng) {
  PedestrianFlag p;
  const double occ = cfg.noise.occlusion_prob;
  const double prior = cfg.pedestrian_prior;
  const double hidden_now = prior * occ / (prior * occ + (1.0 - prior));
  if (steps_left > 0) {
    p.start_step = t;
    p.duration = steps_left;
  } else if (rng.bernoulli(hidden_now)) {
    p.start_step = std::max(0, t - rng.uniform_int(0, 1));
    p.duration = (t - p.start_step) + rng.uniform_int(1, 4);
  } else if (rng.bernoulli(cfg.intrusion_prior)) {
    p.start_step = t + rng.uniform_int(1, 6);
    p.duration = rng.uniform_int(2, 4);
  } else {
    return p;
  }
  p.present = pedestrian_present_at(p, t);
  p.steps_remaining = p.present ? p.start_step + p.duration - t : 0;
  return p;
}

const VehicleReading* find_reading(const Observation& o, int id) {
  for (const auto& r : o.vehicles) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

VehicleState* find_other(WorldState& s, int id) {
  for (auto& v : s.others) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

void sort_others(WorldState& s) {
  std::sort(s.others.begin(), s.others.end(),
            [](const VehicleState& a, const VehicleState& b) { return a.id < b.id; });
}

int add_births(WorldState& s, const Observation& o, const BeliefConfig& cfg, Rng& rng) {
  int births = 0;
  for (const auto& r : o.vehicles) {
    if (find_other(s, r.id) != nullptr) continue;
    if (static_cast<int>(s.others.size()) >= kMaxOtherVehicles) break;
    s.others.push_back(sample_vehicle(r, s.timestep, cfg, rng, false));
    ++births;
  }
  if (births > 0) sort_others(s);
  return births;
}

// Someone seen waiting at a curb steps out within the warning window.
void add_waiting_pedestrians(WorldState& s, const Observation& o, Rng& rng) {
  for (std::size_t i = 0; i < 4; ++i) {
    auto& p = s.pedestrians[i];
    const int countdown = o.pedestrian_countdown[i];
    if (countdown <= 0 || p.present || p.start_step == s.timestep + countdown) continue;
    p.start_step = s.timestep + countdown;
    p.duration = rng.uniform_int(2, 4);
    p.steps_remaining = 0;
  }
}

void sync_ego(WorldState& s, const Observation& o) {
  s.ego = o.ego;
  s.collision_occurred = false;
  assign_arrival_ranks(s);
}

// Pull a contradicted hypothesis back toward the observation and re-draw one
// hidden discrete field.
void reinvigorate(WorldState& s, const Observation& o, const BeliefConfig& cfg, Rng& rng) {
  for (const auto& r : o.vehicles) {
    VehicleState* v = find_other(s, r.id);
    if (v == nullptr) continue;
    const bool in_box = v->phase == Phase::InIntersection;
    if (r.in_intersection != in_box || v->cleared()) {
      *v = sample_vehicle(r, s.timestep, cfg, rng);
    } else if (v->phase == Phase::Approaching) {
      v->distance_to_line = std::max(0.1, r.noisy_distance + rng.normal(0.0, cfg.noise.position_sigma));
    }
  }
  if (!s.others.empty()) {
    auto& v = s.others[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(s.others.size()) - 1))];
    if (v.phase == Phase::Approaching) {
      if (rng.bernoulli(0.5)) {
        v.intent = sample_intent(cfg.intent_prior, rng);
      } else {
        v.compliant = !rng.bernoulli(cfg.noncompliance_prior);
      }
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (o.pedestrians[i] && s.pedestrians[i].steps_remaining != o.pedestrian_steps_left[i]) {
      s.pedestrians[i] = sample_pedestrian(o.pedestrian_steps_left[i], s.timestep, cfg, rng);
    }
  }
  assign_arrival_ranks(s);
}

void rejuvenate(WorldState& s, const Observation& o, const BeliefConfig& cfg, Rng& rng) {
  bool changed = false;
  for (auto& v : s.others) {
    if (v.phase != Phase::Approaching || !rng.bernoulli(cfg.rejuvenation_prob)) continue;
    const VehicleReading* r = find_reading(o, v.id);
    v.intent = r != nullptr ? sample_intent_given_signal(cfg, r->turn_signal, rng) : sample_intent(cfg.intent_prior, rng);
    v.compliant = !rng.bernoulli(cfg.noncompliance_prior);
    changed = true;
  }
  if (changed) assign_arrival_ranks(s);
}

WorldState advance_particle(const WorldState& s, Action a, const BeliefConfig& cfg, Rng& rng) {
  WorldState base = s;
  base.collision_occurred = false;
  if (is_terminal(base, cfg.sim.horizon)) {
    ++base.timestep;
    return base;
  }
  return transition(base, a, rng, cfg.sim);
}

}  // namespace

ObservationFit observation_fit(const Observation& o, const WorldState& s, const BeliefConfig& cfg) {
  ObservationFit fit;
  if (o.frame_dropped) return fit;
  const auto& noise = cfg.noise;
  const double miss = cfg.mismatch_likelihood;
  int& bad = fit.contradictions;
  double ll = 0.0;
  const int n_vehicles = static_cast<int>(s.others.size()) + 1;

  if (s.ego.arrival_rank != o.ego.arrival_rank) ll += std::log(cfg.ego_rank_mismatch_likelihood);

  for (const auto& v : s.others) {
    const VehicleReading* r = find_reading(o, v.id);
    if (r == nullptr) {
      if (!v.cleared()) ll += log_or_mismatch(noise.occlusion_prob, miss, bad);
      continue;
    }
    if (v.cleared()) {
      ll += std::log(miss);
      ++bad;
      continue;
    }
    ll += log_or_mismatch(1.0 - noise.occlusion_prob, miss, bad);
    ll += gaussian_log_pdf(r->noisy_distance, v.distance_to_line, noise.position_sigma, miss, bad);
    ll += gaussian_log_pdf(r->noisy_speed, apparent_speed(v), noise.speed_sigma, miss, bad);
    ll += log_or_mismatch(rank_probability(v.arrival_rank, r->noisy_arrival_rank, noise.rank_noise, n_vehicles),
                          miss, bad);
    const bool in_box = v.phase == Phase::InIntersection;
    if (r->in_intersection != in_box) {
      ll += std::log(miss);
      ++bad;
    } else if (in_box) {
      ll += log_or_mismatch(r->turn_signal == v.intent ? 1.0 : 0.0, miss, bad);
    } else {
      const double p = r->turn_signal == v.intent ? noise.signal_accuracy : (1.0 - noise.signal_accuracy) / 2.0;
      ll += log_or_mismatch(p, miss, bad);
    }
  }
  for (const auto& r : o.vehicles) {
    if (s.find(r.id) == nullptr) {
      ll += std::log(miss);
      ++bad;
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const PedestrianFlag& p = s.pedestrians[i];
    if (p.present) {
      ll += log_or_mismatch(o.pedestrians[i] ? 1.0 - noise.occlusion_prob : noise.occlusion_prob, miss, bad);
      if (o.pedestrians[i] && o.pedestrian_steps_left[i] != p.steps_remaining) {
        ll += std::log(miss);
        ++bad;
      }
    } else if (o.pedestrians[i]) {
      ll += std::log(miss);
      ++bad;
    }
    if (pedestrian_waiting_at(p, s.timestep)) {
      const int countdown = p.start_step - s.timestep;
      if (o.pedestrian_countdown[i] == 0) {
        ll += std::log(noise.occlusion_prob);
      } else {
        ll += log_or_mismatch(o.pedestrian_countdown[i] == countdown ? 1.0 - noise.occlusion_prob : 0.0, miss, bad);
      }
    } else if (o.pedestrian_countdown[i] > 0) {
      ll += std::log(miss);
      ++bad;
    }
  }
  fit.log_likelihood = ll;
  return fit;
}

Belief init_belief(const Scenario& scn, const Observation& first_obs, const BeliefConfig& cfg, Rng& rng) {
  const int n = std::max(1, cfg.n_particles);
  Belief b;
  b.particles.states.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    WorldState s;
    s.timestep = first_obs.timestep;
    s.slippery = scn.slippery;
    s.ego = first_obs.ego;
    // Retry a few times for ranks within the sensor's +/- bound.
    for (int attempt = 0; attempt < 10; ++attempt) {
      s.others.clear();
      for (const auto& r : first_obs.vehicles) s.others.push_back(sample_vehicle(r, s.timestep, cfg, rng));
      sort_others(s);
      assign_arrival_ranks(s);
      bool consistent = true;
      for (const auto& r : first_obs.vehicles) {
        const VehicleState* v = s.find(r.id);
        if (std::abs(v->arrival_rank - r.noisy_arrival_rank) > cfg.noise.rank_noise) consistent = false;
      }
      if (consistent) break;
    }
    for (std::size_t k = 0; k < 4; ++k) {
      s.pedestrians[k] = sample_pedestrian(first_obs.pedestrians[k] ? first_obs.pedestrian_steps_left[k] : 0, s.timestep, cfg, rng);
    }
    add_waiting_pedestrians(s, first_obs, rng);
    assign_arrival_ranks(s);
    b.particles.states.push_back(std::move(s));
  }
  b.particles.weights.assign(static_cast<std::size_t>(n), 1.0 / n);
  return b;
}

Belief predict(const Belief& b, Action a, const BeliefConfig& cfg, Rng& rng) {
  Belief next = b;
  for (auto& s : next.particles.states) s = advance_particle(s, a, cfg, rng);
  return next;
}

Belief update(const Belief& b, Action a, const Observation& o, const BeliefConfig& cfg, Rng& rng,
              UpdateStats* stats) {
  UpdateStats local;
  Belief next = b;
  auto& states = next.particles.states;
  auto& weights = next.particles.weights;
  for (auto& s : states) {
    s = advance_particle(s, a, cfg, rng);
    s.timestep = o.timestep;
    local.births += add_births(s, o, cfg, rng);
    add_waiting_pedestrians(s, o, rng);
    sync_ego(s, o);
  }

  std::vector<double> ll(states.size());
  bool all_contradicted = true;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const ObservationFit fit = observation_fit(o, states[i], cfg);
    ll[i] = fit.log_likelihood;
    if (fit.contradictions == 0 && weights[i] > 0.0) all_contradicted = false;
  }

  if (all_contradicted && !o.frame_dropped) {
    local.degenerate = true;
    const auto picks = pf::systematic_resample(weights, states.size(), rng);
    std::vector<WorldState> fresh;
    fresh.reserve(states.size());
    for (std::size_t i : picks) {
      WorldState s = states[i];
      reinvigorate(s, o, cfg, rng);
      sync_ego(s, o);
      fresh.push_back(std::move(s));
    }
    states = std::move(fresh);
    weights.assign(states.size(), 1.0 / static_cast<double>(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i) ll[i] = observation_fit(o, states[i], cfg).log_likelihood;
  }

  if (!std::isfinite(pf::reweight_log(weights, ll))) {
    weights.assign(states.size(), 1.0 / static_cast<double>(states.size()));
  }
  const double ess = pf::effective_sample_size(weights);
  if (ess < 0.5 * static_cast<double>(states.size())) {
    next.particles.resample(states.size(), rng);
    for (auto& s : next.particles.states) rejuvenate(s, o, cfg, rng);
    local.resampled = true;
  }
  ++next.history_length;
  if (stats != nullptr) *stats = local;
  return next;
}

void set_ego(Belief& b, const VehicleState& ego) {
  for (auto& s : b.particles.states) {
    s.ego = ego;
    s.collision_occurred = false;
    assign_arrival_ranks(s);
  }
}

std::array<double, 3> intent_marginal(const Belief& b, int vehicle_id) {
  std::array<double, 3> m{};
  double total = 0.0;
  for (std::size_t i = 0; i < b.particles.size(); ++i) {
    const VehicleState* v = b.particles.states[i].find(vehicle_id);
    if (v == nullptr) continue;
    m[static_cast<std::size_t>(index(v->intent))] += b.particles.weights[i];
    total += b.particles.weights[i];
  }
  if (total <= 0.0) throw UnknownVehicle("intent_marginal: vehicle " + std::to_string(vehicle_id) + " not in belief");
  for (double& x : m) x /= total;
  return m;
}

std::array<double, 4> pedestrian_marginal(const Belief& b) {
  std::array<double, 4> m{};
  for (std::size_t i = 0; i < b.particles.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (b.particles.states[i].pedestrians[k].present) m[k] += b.particles.weights[i];
    }
  }
  return m;
}

}  // namespace rowpomdp
