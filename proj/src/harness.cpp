#include "rowpomdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace rowpomdp {

BeliefConfig RunConfig::belief() const { return BeliefConfig::from(scenario, sim, n_particles); }

PlannerSettings RunConfig::planner_settings() const {
  PlannerSettings s;
  s.sim = sim;
  s.pomcp = pomcp;
  s.pomcp_rollout = pomcp_rollout;
  s.despot = despot;
  s.compact = compact;
  return s;
}

void RunConfig::validate() const {
  scenario.validate();
  sim.validate();
  pomcp.validate();
  despot.validate();
  if (n_scenarios < 1) throw InvalidConfig("n_scenarios must be >= 1");
  if (sim.horizon != scenario.horizon) throw InvalidConfig("horizon differs between scenario and sim configs");
  if (n_particles < 1) throw InvalidConfig("n_particles must be >= 1");
  if (!(deadline > 0.0)) throw InvalidConfig("deadline must be > 0");
  if (workers < 1) throw InvalidConfig("workers must be >= 1");
  if (drain_factor < 1) throw InvalidConfig("drain_factor must be >= 1");
  if (planners.empty()) throw InvalidConfig("planners: at least one planner is required");
  for (const auto& p : planners) {
    if (p != "oracle" && std::find(benchmark_planners().begin(), benchmark_planners().end(), p) ==
                             benchmark_planners().end()) {
      throw InvalidConfig("planners: unknown planner '" + p + "'");
    }
  }
}

int StepRecord::intent_correct() const {
  int n = 0;
  for (const auto& [id, intent] : true_intents) {
    auto it = predicted_intents.find(id);
    if (it != predicted_intents.end() && it->second == intent) ++n;
  }
  return n;
}

int predicted_entry_step(const VehicleState& v, int t) {
  if (v.phase != Phase::Approaching) return t;
  return t + static_cast<int>(std::ceil(v.distance_to_line / std::max(v.speed, 0.5)));
}

bool is_near_miss(const WorldState& s) {
  if (s.ego.cleared()) return false;
  const int ego_entry = predicted_entry_step(s.ego, s.timestep);
  return std::any_of(s.others.begin(), s.others.end(), [&](const VehicleState& v) {
    return !v.cleared() && paths_conflict(s.ego.path(), v.path()) &&
           std::abs(predicted_entry_step(v, s.timestep) - ego_entry) <= 1;
  });
}

std::string EpisodeResult::outcome() const {
  if (failed()) return "failed";
  if (collision) return "collision";
  return ego_clear_step >= 0 ? "cleared" : "timeout";
}

int EpisodeResult::action_correct() const {
  return static_cast<int>(
      std::count_if(steps.begin(), steps.end(), [](const StepRecord& r) { return r.action == r.oracle_action; }));
}

int EpisodeResult::intent_correct() const {
  int n = 0;
  for (const auto& r : steps) n += r.intent_correct();
  return n;
}

int EpisodeResult::intent_total() const {
  int n = 0;
  for (const auto& r : steps) n += r.intent_total();
  return n;
}

int EpisodeResult::on_time() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& r) { return r.deadline_met; }));
}

double EpisodeResult::compute_time_sum() const {
  double t = 0.0;
  for (const auto& r : steps) t += r.compute_time;
  return t;
}

int EpisodeResult::near_misses() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& r) { return r.near_miss; }));
}

int EpisodeResult::vehicles_cleared() const {
  return static_cast<int>(
      std::count_if(clear_steps.begin(), clear_steps.end(), [](const auto& kv) { return kv.second >= 0; }));
}

int EpisodeResult::efficient_vehicles() const {
  int n = 0;
  for (const auto& [id, c] : clear_steps) {
    auto it = oracle_clear_steps.find(id);
    const int oc = it == oracle_clear_steps.end() ? -1 : it->second;
    if (oc < 0 || (c >= 0 && c <= oc)) ++n;
  }
  return n;
}

namespace {

Rng world_stream(const Scenario& scn, std::string_view tag, int t) {
  return Rng(derive_seed(scn.seed, hash_tag(tag), static_cast<std::uint64_t>(t)));
}

}  // namespace

EpisodeResult run_episode(const Scenario& scn, Planner& planner, const RunConfig& cfg, const EpisodeResult* oracle) {
  EpisodeResult res;
  res.scenario_id = scn.id;
  res.scenario_seed = scn.seed;
  res.adversarial = scn.adversarial;
  res.planner = std::string(planner.name());
  planner.reset();

  const std::string name(planner.name());
  Rng planner_rng(derive_seed(scn.seed, hash_tag("planner/" + name)));
  Rng belief_rng(derive_seed(scn.seed, hash_tag("belief/" + name)));
  const BeliefConfig bcfg = cfg.belief();
  const int latency = cfg.sim.perception_latency;
  const bool needs_belief = planner.uses_belief();
  const bool is_oracle = name == "oracle";

  WorldState s = make_initial_state(scn);
  std::vector<Observation> obs;
  std::vector<Action> actions;
  Rng first_obs_rng = world_stream(scn, "observe", 0);
  obs.push_back(observe(s, first_obs_rng, cfg.sim.noise));

  std::optional<Belief> filtered;
  int filtered_step = 0;
  if (needs_belief) filtered = init_belief(scn, obs[0], bcfg, belief_rng);

  while (!is_terminal(s, cfg.sim.horizon)) {
    const int t = s.timestep;
    const int seen = std::max(0, t - latency);
    StepRecord rec;
    rec.timestep = t;
    rec.state_digest = state_digest(s);
    rec.ego_phase = s.ego.phase;
    rec.ego_distance = s.ego.distance_to_line;

    while (filtered && filtered_step < seen) {
      UpdateStats st;
      filtered = update(*filtered, actions[filtered_step], obs[filtered_step + 1], bcfg, belief_rng, &st);
      ++filtered_step;
      rec.degenerate_belief = rec.degenerate_belief || st.degenerate;
    }
    // Own kinematics are known now; everything else arrives late.
    Observation delivered = obs[seen];
    const int perceived_rank = delivered.ego.arrival_rank;
    delivered.ego = s.ego;
    delivered.ego.arrival_rank = perceived_rank;

    std::optional<Belief> plan_belief;
    if (filtered) {
      plan_belief = *filtered;
      for (int k = seen; k < t; ++k) plan_belief = predict(*plan_belief, actions[k], bcfg, belief_rng);
      set_ego(*plan_belief, s.ego);
    }

    PlannerInput in{delivered, plan_belief ? &*plan_belief : nullptr, is_oracle ? &s : nullptr, &planner_rng};
    PlannerDecision dec;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      dec = planner.decide(in);
    } catch (const std::exception& e) {
      res.error = e.what();
      break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.compute_time = std::chrono::duration<double>(t1 - t0).count();
    rec.deadline_met = rec.compute_time <= cfg.deadline;
    rec.observation = std::move(delivered);
    rec.action = dec.action;
    rec.oracle_action = ground_truth_action(s);
    rec.predicted_intents = std::move(dec.intent_predictions);
    for (const auto& v : s.others) {
      if (!v.cleared()) rec.true_intents[v.id] = v.intent;
    }
    rec.near_miss = is_near_miss(s);

    Rng step_rng = world_stream(scn, "transition", t);
    WorldState next = transition(s, dec.action, step_rng, cfg.sim);
    rec.reward = reward(s, dec.action, next, cfg.sim.reward);
    if (next.collision_occurred && !s.collision_occurred) {
      res.collision_step = t;
      for (const auto& v : next.others) {
        if (v.phase == Phase::InIntersection && paths_conflict(next.ego.path(), v.path())) res.collision_vehicle = v.id;
      }
    }
    res.total_reward += rec.reward;
    res.steps.push_back(rec);
    actions.push_back(dec.action);
    s = std::move(next);
    Rng obs_rng = world_stream(scn, "observe", s.timestep);
    obs.push_back(observe(s, obs_rng, cfg.sim.noise));
  }

  res.collision = s.collision_occurred;
  res.ego_clear_step = s.ego.cleared() ? s.ego.clear_step : -1;

  // Let the rest of the traffic finish; an ego that never cleared is
  // taken off the road so it does not hold anyone up.
  WorldState d = s;
  if (!d.ego.cleared()) {
    d.ego.phase = Phase::Cleared;
    d.ego.box_steps_left = 0;
  }
  const int limit = cfg.completion_limit();
  auto others_done = [&] {
    return std::all_of(d.others.begin(), d.others.end(), [](const VehicleState& v) { return v.cleared(); });
  };
  while (!others_done() && d.timestep < limit) {
    Rng drain_rng = world_stream(scn, "drain", d.timestep);
    d = advance_traffic(d, drain_rng, cfg.sim);
  }

  res.clear_steps[s.ego.id] = res.ego_clear_step;
  int last = res.ego_clear_step;
  bool all = res.ego_clear_step >= 0;
  for (const auto& v : d.others) {
    const int c = v.cleared() ? v.clear_step : -1;
    res.clear_steps[v.id] = c;
    if (c < 0) all = false;
    last = std::max(last, c);
  }
  res.completion_time = all ? last : limit;
  if (oracle != nullptr) res.oracle_clear_steps = oracle->clear_steps;
  return res;
}

EpisodeResult run_oracle_episode(const Scenario& scn, const RunConfig& cfg) {
  OraclePlanner oracle;
  EpisodeResult r = run_episode(scn, oracle, cfg);
  r.oracle_clear_steps = r.clear_steps;
  return r;
}

namespace {

template <class Job>
void parallel_for(std::size_t n, int workers, Job&& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&](int worker) {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i, worker);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  const int k = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (k == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < k; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<EpisodeResult> run_suite(const std::vector<Scenario>& suite, const RunConfig& cfg) {
  cfg.validate();
  std::vector<EpisodeResult> oracle(suite.size());
  parallel_for(suite.size(), cfg.workers, [&](std::size_t i, int) { oracle[i] = run_oracle_episode(suite[i], cfg); });

  std::vector<std::string> names;
  for (const auto& p : cfg.planners) {
    if (p != "oracle") names.push_back(p);
  }
  const PlannerSettings settings = cfg.planner_settings();
  // One planner instance per (worker, planner name); QMDP solves once per instance.
  std::vector<std::map<std::string, std::unique_ptr<Planner>>> pools(static_cast<std::size_t>(cfg.workers));
  const std::size_t per = names.size();
  std::vector<EpisodeResult> runs(suite.size() * per);
  parallel_for(runs.size(), cfg.workers, [&](std::size_t j, int worker) {
    const std::size_t i = j / per;
    const std::string& name = names[j % per];
    auto& slot = pools[static_cast<std::size_t>(worker)][name];
    if (!slot) slot = make_planner(name, settings);
    runs[j] = run_episode(suite[i], *slot, cfg, &oracle[i]);
  });

  std::vector<EpisodeResult> out;
  out.reserve(runs.size() + oracle.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    for (std::size_t k = 0; k < per; ++k) out.push_back(std::move(runs[i * per + k]));
    out.push_back(std::move(oracle[i]));
  }
  return out;
}

std::vector<PlannerMetrics> compute_metrics(const std::vector<EpisodeResult>& episodes,
                                            const std::vector<std::string>& planner_order,
                                            SubsetFilter filter) {
  std::vector<PlannerMetrics> out;
  bool any = false;
  for (const auto& name : planner_order) {
    PlannerMetrics m;
    m.planner = name;
    long decisions = 0, correct = 0, intent_ok = 0, intent_n = 0, vehicles = 0, efficient = 0, cleared = 0,
         on_time = 0;
    long collision_free = 0, near_miss_eps = 0, recovered = 0;
    double completion = 0.0, reward_sum = 0.0, compute = 0.0;
    for (const auto& e : episodes) {
      if (e.planner != name) continue;
      if (filter == SubsetFilter::Adversarial && !e.adversarial) continue;
      if (filter == SubsetFilter::NonAdversarial && e.adversarial) continue;
      ++m.episodes;
      any = true;
      if (e.failed()) ++m.failed_episodes;
      decisions += e.decisions();
      correct += e.action_correct();
      intent_ok += e.intent_correct();
      intent_n += e.intent_total();
      vehicles += static_cast<long>(e.clear_steps.size());
      efficient += e.efficient_vehicles();
      cleared += e.vehicles_cleared();
      on_time += e.on_time();
      compute += e.compute_time_sum();
      completion += e.completion_time;
      reward_sum += e.total_reward;
      const bool safe = !e.collision && !e.failed();
      if (safe) ++collision_free;
      if (e.near_misses() > 0) {
        ++near_miss_eps;
        if (safe) ++recovered;
      }
    }
    auto ratio = [](double a, double b, double empty) { return b > 0 ? a / b : empty; };
    m.collision_free_rate = ratio(collision_free, m.episodes, 0.0);
    m.action_accuracy = ratio(correct, decisions, 0.0);
    m.intent_accuracy = ratio(intent_ok, intent_n, 0.0);
    m.flow_efficiency = ratio(efficient, vehicles, 0.0);
    m.mean_completion_time = ratio(completion, m.episodes, 0.0);
    m.throughput = ratio(cleared, completion, 0.0);
    m.mean_reward = ratio(reward_sum, m.episodes, 0.0);
    m.near_miss_recovery = ratio(recovered, near_miss_eps, 1.0);
    m.mean_processing_time = ratio(compute, decisions, 0.0);
    m.real_time_fraction = ratio(on_time, decisions, 0.0);
    out.push_back(m);
  }
  if (!any) throw std::invalid_argument("compute_metrics: no episodes for the requested planners");
  return out;
}

const std::vector<RadarAxis>& radar_axes() {
  static const std::vector<RadarAxis> axes{
      {"action_accuracy", false}, {"intent_accuracy", false},      {"collision_free_rate", false},
      {"flow_efficiency", false}, {"time_to_completion", true},    {"processing_time", true},
      {"throughput", false},      {"real_time_fraction", false},
  };
  return axes;
}

std::vector<double> radar_raw(const PlannerMetrics& m) {
  return {m.action_accuracy,      m.intent_accuracy,      m.collision_free_rate, m.flow_efficiency,
          m.mean_completion_time, m.mean_processing_time, m.throughput,          m.real_time_fraction};
}

std::vector<std::vector<double>> normalize_for_radar(const std::vector<PlannerMetrics>& metrics) {
  const auto& axes = radar_axes();
  std::vector<std::vector<double>> raw;
  for (const auto& m : metrics) raw.push_back(radar_raw(m));
  std::vector<std::vector<double>> out(raw.size(), std::vector<double>(axes.size(), 1.0));
  for (std::size_t k = 0; k < axes.size(); ++k) {
    double lo = 1e300, hi = -1e300;
    for (const auto& r : raw) {
      lo = std::min(lo, r[k]);
      hi = std::max(hi, r[k]);
    }
    if (!(hi - lo > 1e-12)) continue;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const double x = (raw[i][k] - lo) / (hi - lo);
      out[i][k] = axes[k].lower_is_better ? 1.0 - x : x;
    }
  }
  return out;
}

}  // namespace rowpomdp
