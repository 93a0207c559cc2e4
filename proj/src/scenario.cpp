#include "rowpomdp/scenario.hpp"

#include <algorithm>
#include <cmath>

#include "rowpomdp/rng.hpp"

namespace rowpomdp {

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidConfig(std::string("scenario config: ") + name + " must lie in [0, 1]");
  }
}

Intent sample_intent(Rng& rng, const std::array<double, 3>& w) {
  const double u = rng.uniform();
  if (u < w[0]) return Intent::Straight;
  if (u < w[0] + w[1]) return Intent::Left;
  return Intent::Right;
}

double place_other(Rng& rng, double speed, int ego_arrival, int offset) {
  // ceil(distance / speed) == ego_arrival + offset
  const double frac = rng.uniform();
  return speed * (static_cast<double>(ego_arrival + offset) - frac);
}

void set_pedestrian(Scenario& scn, PedestrianSpec p) {
  auto it = std::find_if(scn.pedestrians.begin(), scn.pedestrians.end(),
                         [&](const PedestrianSpec& q) { return q.approach == p.approach; });
  if (it != scn.pedestrians.end()) {
    *it = p;
  } else {
    scn.pedestrians.push_back(p);
  }
  std::sort(scn.pedestrians.begin(), scn.pedestrians.end(),
            [](const PedestrianSpec& a, const PedestrianSpec& b) {
              return index(a.approach) < index(b.approach);
            });
}

}  // namespace

void ScenarioConfig::validate() const {
  for (double w : intent_weights) require_probability(w, "intent_weights");
  const double sum = intent_weights[0] + intent_weights[1] + intent_weights[2];
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidConfig("scenario config: intent_weights must sum to 1");
  require_probability(pedestrian_prob_min, "pedestrian_prob_min");
  require_probability(pedestrian_prob_max, "pedestrian_prob_max");
  if (pedestrian_prob_min > pedestrian_prob_max) {
    throw InvalidConfig("scenario config: pedestrian_prob_min exceeds pedestrian_prob_max");
  }
  require_probability(occlusion_prob, "occlusion_prob");
  require_probability(dropout_prob, "dropout_prob");
  require_probability(slippery_prob, "slippery_prob");
  require_probability(signal_accuracy, "signal_accuracy");
  require_probability(adversarial_fraction, "adversarial_fraction");
  require_probability(noncompliance_prob, "noncompliance_prob");
  require_probability(adversarial_noncompliance_prob, "adversarial_noncompliance_prob");
  if (position_noise_sigma < 0.0 || speed_noise_sigma < 0.0) {
    throw InvalidConfig("scenario config: noise sigmas must be non-negative");
  }
  if (arrival_noise < 0) throw InvalidConfig("scenario config: arrival_noise must be >= 0");
  if (max_other_vehicles < 0 || max_other_vehicles > kMaxOtherVehicles) {
    throw InvalidConfig("scenario config: max_other_vehicles must lie in [0, 3]");
  }
  if (horizon < 1) throw InvalidConfig("scenario config: horizon must be >= 1");
}

int Scenario::ego_arrival_steps() const {
  return static_cast<int>(std::ceil(ego.distance / ego.speed - 1e-9));
}

bool Scenario::has_simultaneous_arrival() const {
  return std::any_of(others.begin(), others.end(),
                     [](const OtherSpec& o) { return o.arrival_offset == 0; });
}

bool Scenario::has_stop_runner() const {
  return std::any_of(others.begin(), others.end(), [](const OtherSpec& o) { return !o.compliant; });
}

bool Scenario::has_pedestrian_intrusion() const {
  const Path ego_path{ego.approach, ego.intent};
  return std::any_of(pedestrians.begin(), pedestrians.end(), [&](const PedestrianSpec& p) {
    return p.start_step > 0 && path_uses_leg(ego_path, p.approach);
  });
}

Scenario generate_scenario(std::uint64_t seed, const ScenarioConfig& cfg, bool adversarial) {
  cfg.validate();
  Rng rng(seed);
  Scenario scn;
  scn.seed = seed;
  scn.adversarial = adversarial;

  scn.ego.approach = static_cast<Approach>(rng.uniform_int(0, 3));
  scn.ego.intent = sample_intent(rng, cfg.intent_weights);
  scn.ego.distance = rng.uniform(10.0, 30.0);
  scn.ego.speed = rng.uniform(3.0, 8.0);
  const int ego_arrival = scn.ego_arrival_steps();

  std::vector<Approach> free;
  for (Approach a : kApproaches) {
    if (a != scn.ego.approach) free.push_back(a);
  }
  for (int i = static_cast<int>(free.size()) - 1; i > 0; --i) {
    std::swap(free[static_cast<std::size_t>(i)],
              free[static_cast<std::size_t>(rng.uniform_int(0, i))]);
  }
  const int n_others = cfg.max_other_vehicles == 0 ? 0 : rng.uniform_int(1, cfg.max_other_vehicles);
  const double noncompliance =
      adversarial ? cfg.adversarial_noncompliance_prob : cfg.noncompliance_prob;
  for (int i = 0; i < n_others; ++i) {
    OtherSpec o;
    o.approach = free[static_cast<std::size_t>(i)];
    o.intent = sample_intent(rng, cfg.intent_weights);
    o.arrival_offset = rng.uniform_int(0, 3);
    o.compliant = !rng.bernoulli(noncompliance);
    o.speed = rng.uniform(3.0, 8.0);
    o.distance = place_other(rng, o.speed, ego_arrival, o.arrival_offset);
    scn.others.push_back(o);
  }

  const double ped_prob = rng.uniform(cfg.pedestrian_prob_min, cfg.pedestrian_prob_max);
  for (Approach a : kApproaches) {
    if (rng.bernoulli(ped_prob)) {
      set_pedestrian(scn, {a, 0, rng.uniform_int(2, 5)});
    }
  }
  scn.slippery = rng.bernoulli(cfg.slippery_prob);

  if (adversarial) {
    bool simultaneous = rng.bernoulli(0.5);
    bool stop_runner = rng.bernoulli(0.5);
    bool intrusion = rng.bernoulli(0.5);
    if (scn.others.empty()) {
      simultaneous = stop_runner = false;
      intrusion = true;
    } else if (!simultaneous && !stop_runner && !intrusion) {
      switch (rng.uniform_int(0, 2)) {
        case 0: simultaneous = true; break;
        case 1: stop_runner = true; break;
        default: intrusion = true; break;
      }
    }
    if (simultaneous) {
      const int n = static_cast<int>(scn.others.size());
      const int first = rng.uniform_int(0, n - 1);
      std::vector<int> tied{first};
      if (n > 1 && rng.bernoulli(0.5)) tied.push_back((first + rng.uniform_int(1, n - 1)) % n);
      for (int k : tied) {
        auto& o = scn.others[static_cast<std::size_t>(k)];
        o.arrival_offset = 0;
        o.distance = place_other(rng, o.speed, ego_arrival, 0);
      }
    }
    if (stop_runner) {
      // Prefer a vehicle whose path crosses the ego's, and have it reach the
      // line one step after the ego so it blows through as the ego starts.
      const int n = static_cast<int>(scn.others.size());
      int k = rng.uniform_int(0, n - 1);
      for (int j = 0; j < n; ++j) {
        const auto& o = scn.others[static_cast<std::size_t>((k + j) % n)];
        if (paths_conflict({scn.ego.approach, scn.ego.intent}, {o.approach, o.intent})) {
          k = (k + j) % n;
          break;
        }
      }
      auto& runner = scn.others[static_cast<std::size_t>(k)];
      runner.compliant = false;
      runner.arrival_offset = 1;
      runner.distance = place_other(rng, runner.speed, ego_arrival, 1);
    }
    if (intrusion) {
      // Steps onto the ego's entry or exit crosswalk just as the ego would cross.
      const Approach leg =
          rng.bernoulli(0.5) ? scn.ego.approach : exit_leg(scn.ego.approach, scn.ego.intent);
      const int start = ego_arrival + rng.uniform_int(1, 2);
      set_pedestrian(scn, {leg, start, rng.uniform_int(2, 4)});
    }
  }
  return scn;
}

int adversarial_count(int n, double fraction) {
  return static_cast<int>(std::ceil(static_cast<double>(n) * fraction - 1e-9));
}

std::vector<Scenario> generate_suite(std::uint64_t base_seed, int n, const ScenarioConfig& cfg) {
  cfg.validate();
  if (n < 1) throw InvalidConfig("scenario suite size must be >= 1");
  const int n_adv = adversarial_count(n, cfg.adversarial_fraction);
  std::vector<Scenario> suite;
  suite.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = derive_seed(base_seed, hash_tag("scenario"), static_cast<std::uint64_t>(i));
    Scenario scn = generate_scenario(seed, cfg, i < n_adv);
    scn.id = i;
    suite.push_back(std::move(scn));
  }
  return suite;
}

WorldState make_initial_state(const Scenario& scn) {
  WorldState s;
  s.ego.id = 0;
  s.ego.approach = scn.ego.approach;
  s.ego.intent = scn.ego.intent;
  s.ego.distance_to_line = scn.ego.distance;
  s.ego.speed = scn.ego.speed;
  s.ego.compliant = true;
  int id = 1;
  for (const auto& o : scn.others) {
    VehicleState v;
    v.id = id++;
    v.approach = o.approach;
    v.intent = o.intent;
    v.distance_to_line = o.distance;
    v.speed = o.speed;
    v.compliant = o.compliant;
    s.others.push_back(v);
  }
  for (const auto& p : scn.pedestrians) {
    auto& flag = s.pedestrians[static_cast<std::size_t>(index(p.approach))];
    flag.start_step = p.start_step;
    flag.duration = p.duration;
    flag.present = p.start_step <= 0 && 0 < p.start_step + p.duration;
    flag.steps_remaining = flag.present ? p.start_step + p.duration : 0;
  }
  s.slippery = scn.slippery;
  assign_arrival_ranks(s);
  return s;
}

}  // namespace rowpomdp
