#include "rowpomdp/io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rowpomdp {

namespace {

template <class E>
E enum_from(const Json& j, std::optional<E> (*parse)(std::string_view), const char* what) {
  const auto s = j.get<std::string>();
  auto v = parse(s);
  if (!v) throw IoError(std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

Json intent_map(const std::map<int, Intent>& m) {
  Json j = Json::object();
  for (const auto& [id, intent] : m) j[std::to_string(id)] = to_string(intent);
  return j;
}

std::map<int, Intent> intent_map_from(const Json& j) {
  std::map<int, Intent> m;
  for (const auto& [k, v] : j.items()) m[std::stoi(k)] = enum_from(v, parse_intent, "intent");
  return m;
}

Json step_map(const std::map<int, int>& m) {
  Json j = Json::object();
  for (const auto& [id, step] : m) j[std::to_string(id)] = step;
  return j;
}

std::map<int, int> step_map_from(const Json& j) {
  std::map<int, int> m;
  for (const auto& [k, v] : j.items()) m[std::stoi(k)] = v.get<int>();
  return m;
}

}  // namespace

void to_json(Json& j, const Scenario& s) {
  j = Json{{"id", s.id},
           {"seed", s.seed},
           {"adversarial", s.adversarial},
           {"slippery", s.slippery},
           {"ego",
            {{"approach", to_string(s.ego.approach)},
             {"intent", to_string(s.ego.intent)},
             {"distance", s.ego.distance},
             {"speed", s.ego.speed}}}};
  j["others"] = Json::array();
  for (const auto& o : s.others) {
    j["others"].push_back({{"approach", to_string(o.approach)},
                           {"intent", to_string(o.intent)},
                           {"arrival_offset", o.arrival_offset},
                           {"compliant", o.compliant},
                           {"speed", o.speed},
                           {"distance", o.distance}});
  }
  j["pedestrians"] = Json::array();
  for (const auto& p : s.pedestrians) {
    j["pedestrians"].push_back(
        {{"approach", to_string(p.approach)}, {"start_step", p.start_step}, {"duration", p.duration}});
  }
}

void from_json(const Json& j, Scenario& s) {
  s.id = j.at("id").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.adversarial = j.at("adversarial").get<bool>();
  s.slippery = j.at("slippery").get<bool>();
  const Json& e = j.at("ego");
  s.ego.approach = enum_from(e.at("approach"), parse_approach, "approach");
  s.ego.intent = enum_from(e.at("intent"), parse_intent, "intent");
  s.ego.distance = e.at("distance").get<double>();
  s.ego.speed = e.at("speed").get<double>();
  s.others.clear();
  for (const auto& o : j.at("others")) {
    OtherSpec spec;
    spec.approach = enum_from(o.at("approach"), parse_approach, "approach");
    spec.intent = enum_from(o.at("intent"), parse_intent, "intent");
    spec.arrival_offset = o.at("arrival_offset").get<int>();
    spec.compliant = o.at("compliant").get<bool>();
    spec.speed = o.at("speed").get<double>();
    spec.distance = o.at("distance").get<double>();
    s.others.push_back(spec);
  }
  s.pedestrians.clear();
  for (const auto& p : j.at("pedestrians")) {
    PedestrianSpec spec;
    spec.approach = enum_from(p.at("approach"), parse_approach, "approach");
    spec.start_step = p.at("start_step").get<int>();
    spec.duration = p.at("duration").get<int>();
    s.pedestrians.push_back(spec);
  }
}

void to_json(Json& j, const VehicleState& v) {
  j = Json{{"id", v.id},
           {"approach", to_string(v.approach)},
           {"intent", to_string(v.intent)},
           {"phase", to_string(v.phase)},
           {"distance", v.distance_to_line},
           {"speed", v.speed},
           {"arrival_rank", v.arrival_rank},
           {"arrival_step", v.arrival_step},
           {"box_steps_left", v.box_steps_left},
           {"clear_step", v.clear_step}};
}

void to_json(Json& j, const Observation& o) {
  j = Json{{"timestep", o.timestep}, {"frame_dropped", o.frame_dropped}, {"ego", o.ego}};
  j["vehicles"] = Json::array();
  for (const auto& r : o.vehicles) {
    j["vehicles"].push_back({{"id", r.id},
                             {"approach", to_string(r.approach)},
                             {"distance", r.noisy_distance},
                             {"speed", r.noisy_speed},
                             {"arrival_rank", r.noisy_arrival_rank},
                             {"turn_signal", to_string(r.turn_signal)},
                             {"in_intersection", r.in_intersection}});
  }
  j["pedestrians"] = o.pedestrians;
  j["pedestrian_steps_left"] = o.pedestrian_steps_left;
  j["pedestrian_countdown"] = o.pedestrian_countdown;
}

void to_json(Json& j, const ScenarioConfig& c) {
  j = Json{{"intent_weights", c.intent_weights},
           {"pedestrian_prob_min", c.pedestrian_prob_min},
           {"pedestrian_prob_max", c.pedestrian_prob_max},
           {"position_noise_sigma", c.position_noise_sigma},
           {"speed_noise_sigma", c.speed_noise_sigma},
           {"arrival_noise", c.arrival_noise},
           {"occlusion_prob", c.occlusion_prob},
           {"dropout_prob", c.dropout_prob},
           {"slippery_prob", c.slippery_prob},
           {"signal_accuracy", c.signal_accuracy},
           {"adversarial_fraction", c.adversarial_fraction},
           {"max_other_vehicles", c.max_other_vehicles},
           {"noncompliance_prob", c.noncompliance_prob},
           {"adversarial_noncompliance_prob", c.adversarial_noncompliance_prob},
           {"horizon", c.horizon}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_suite(const std::filesystem::path& path, const SuiteFile& suite) {
  Json j{{"schema", kSuiteSchema}, {"seed", suite.seed}, {"config", suite.config}, {"scenarios", suite.scenarios}};
  write_text(path, j.dump(1) + "\n");
}

SuiteFile read_suite(const std::filesystem::path& path) {
  try {
    const Json j = Json::parse(read_text(path));
    if (j.value("schema", "") != kSuiteSchema) throw IoError("not a scenario suite (schema mismatch)");
    SuiteFile s;
    s.seed = j.at("seed").get<std::uint64_t>();
    const Json& c = j.at("config");
    s.config.intent_weights = c.at("intent_weights").get<std::array<double, 3>>();
    s.config.pedestrian_prob_min = c.at("pedestrian_prob_min").get<double>();
    s.config.pedestrian_prob_max = c.at("pedestrian_prob_max").get<double>();
    s.config.position_noise_sigma = c.at("position_noise_sigma").get<double>();
    s.config.speed_noise_sigma = c.at("speed_noise_sigma").get<double>();
    s.config.arrival_noise = c.at("arrival_noise").get<int>();
    s.config.occlusion_prob = c.at("occlusion_prob").get<double>();
    s.config.dropout_prob = c.at("dropout_prob").get<double>();
    s.config.slippery_prob = c.at("slippery_prob").get<double>();
    s.config.signal_accuracy = c.at("signal_accuracy").get<double>();
    s.config.adversarial_fraction = c.at("adversarial_fraction").get<double>();
    s.config.max_other_vehicles = c.at("max_other_vehicles").get<int>();
    s.config.noncompliance_prob = c.at("noncompliance_prob").get<double>();
    s.config.adversarial_noncompliance_prob = c.at("adversarial_noncompliance_prob").get<double>();
    s.config.horizon = c.at("horizon").get<int>();
    s.scenarios = j.at("scenarios").get<std::vector<Scenario>>();
    return s;
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

Json episode_to_json(const EpisodeResult& e) {
  Json j{{"schema", kEpisodeSchema},
         {"scenario_id", e.scenario_id},
         {"scenario_seed", e.scenario_seed},
         {"adversarial", e.adversarial},
         {"planner", e.planner},
         {"outcome", e.outcome()},
         {"collision", e.collision},
         {"collision_step", e.collision_step},
         {"collision_vehicle", e.collision_vehicle},
         {"ego_clear_step", e.ego_clear_step},
         {"completion_time", e.completion_time},
         {"total_reward", e.total_reward},
         {"steps_to_clear", step_map(e.clear_steps)},
         {"oracle_steps_to_clear", step_map(e.oracle_clear_steps)}};
  if (e.failed()) j["error"] = e.error;
  j["steps"] = Json::array();
  for (const auto& r : e.steps) {
    j["steps"].push_back({{"timestep", r.timestep},
                          {"state_digest", r.state_digest},
                          {"ego_phase", to_string(r.ego_phase)},
                          {"ego_distance", r.ego_distance},
                          {"observation", r.observation},
                          {"action", to_string(r.action)},
                          {"oracle_action", to_string(r.oracle_action)},
                          {"predicted_intents", intent_map(r.predicted_intents)},
                          {"true_intents", intent_map(r.true_intents)},
                          {"reward", r.reward},
                          {"compute_time", r.compute_time},
                          {"deadline_met", r.deadline_met},
                          {"near_miss", r.near_miss},
                          {"degenerate_belief", r.degenerate_belief}});
  }
  return j;
}

EpisodeResult episode_from_json(const Json& j) {
  if (j.value("schema", "") != kEpisodeSchema) throw IoError("not an episode record (schema mismatch)");
  EpisodeResult e;
  e.scenario_id = j.at("scenario_id").get<int>();
  e.scenario_seed = j.at("scenario_seed").get<std::uint64_t>();
  e.adversarial = j.at("adversarial").get<bool>();
  e.planner = j.at("planner").get<std::string>();
  e.error = j.value("error", "");
  e.collision = j.at("collision").get<bool>();
  e.collision_step = j.at("collision_step").get<int>();
  e.collision_vehicle = j.at("collision_vehicle").get<int>();
  e.ego_clear_step = j.at("ego_clear_step").get<int>();
  e.completion_time = j.at("completion_time").get<int>();
  e.total_reward = j.at("total_reward").get<double>();
  e.clear_steps = step_map_from(j.at("steps_to_clear"));
  e.oracle_clear_steps = step_map_from(j.at("oracle_steps_to_clear"));
  for (const auto& s : j.at("steps")) {
    StepRecord r;
    r.timestep = s.at("timestep").get<int>();
    r.state_digest = s.at("state_digest").get<std::uint64_t>();
    r.ego_phase = enum_from(s.at("ego_phase"), parse_phase, "phase");
    r.ego_distance = s.at("ego_distance").get<double>();
    r.action = enum_from(s.at("action"), parse_action, "action");
    r.oracle_action = enum_from(s.at("oracle_action"), parse_action, "action");
    r.predicted_intents = intent_map_from(s.at("predicted_intents"));
    r.true_intents = intent_map_from(s.at("true_intents"));
    r.reward = s.at("reward").get<double>();
    r.compute_time = s.at("compute_time").get<double>();
    r.deadline_met = s.at("deadline_met").get<bool>();
    r.near_miss = s.at("near_miss").get<bool>();
    r.degenerate_belief = s.at("degenerate_belief").get<bool>();
    e.steps.push_back(std::move(r));
  }
  return e;
}

void write_episodes(const std::filesystem::path& path, const std::vector<EpisodeResult>& episodes) {
  std::string text;
  for (const auto& e : episodes) text += episode_to_json(e).dump() + "\n";
  write_text(path, text);
}

std::vector<EpisodeResult> read_episodes(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<EpisodeResult> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(episode_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  if (out.empty()) throw IoError(path.string() + ": no episode records");
  return out;
}

namespace {

using Handler = std::function<void(const YAML::Node&, const std::string&)>;
using Fields = std::map<std::string, Handler>;

template <class T>
Handler field(T& out) {
  return [&out](const YAML::Node& n, const std::string& key) {
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      throw InvalidConfig("config key '" + key + "' has the wrong type");
    }
  };
}

void apply(const YAML::Node& node, const std::string& prefix, const Fields& fields) {
  if (!node.IsMap()) throw InvalidConfig("config section '" + prefix + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    auto it = fields.find(key);
    if (it == fields.end()) throw InvalidConfig("unknown config key '" + full + "'");
    it->second(kv.second, full);
  }
}

Handler section(const Fields& fields) {
  return [fields](const YAML::Node& n, const std::string& key) { apply(n, key, fields); };
}

Handler rollout_field(RolloutPolicy& out) {
  return [&out](const YAML::Node& n, const std::string& key) {
    const auto s = n.as<std::string>("");
    if (s == "random") {
      out = RolloutPolicy::Random;
    } else if (s == "fsm") {
      out = RolloutPolicy::Fsm;
    } else {
      throw InvalidConfig("config key '" + key + "' must be 'random' or 'fsm'");
    }
  };
}

}  // namespace

RunConfig config_from_yaml(const std::string& text) {
  RunConfig cfg;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw InvalidConfig(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull()) return cfg;
  ScenarioConfig& sc = cfg.scenario;
  SimConfig& sim = cfg.sim;
  RewardWeights& rw = sim.reward;
  CompactDynamics& cd = cfg.compact;
  int horizon = sc.horizon;
  const Fields top{
      {"seed", field(cfg.seed)},
      {"scenarios", field(cfg.n_scenarios)},
      {"horizon", field(horizon)},
      {"deadline", field(cfg.deadline)},
      {"planners", field(cfg.planners)},
      {"workers", field(cfg.workers)},
      {"particles", field(cfg.n_particles)},
      {"drain_factor", field(cfg.drain_factor)},
      {"scenario", section({{"intent_weights", field(sc.intent_weights)},
                            {"pedestrian_prob_min", field(sc.pedestrian_prob_min)},
                            {"pedestrian_prob_max", field(sc.pedestrian_prob_max)},
                            {"position_noise_sigma", field(sc.position_noise_sigma)},
                            {"speed_noise_sigma", field(sc.speed_noise_sigma)},
                            {"arrival_noise", field(sc.arrival_noise)},
                            {"occlusion_prob", field(sc.occlusion_prob)},
                            {"dropout_prob", field(sc.dropout_prob)},
                            {"slippery_prob", field(sc.slippery_prob)},
                            {"signal_accuracy", field(sc.signal_accuracy)},
                            {"adversarial_fraction", field(sc.adversarial_fraction)},
                            {"max_other_vehicles", field(sc.max_other_vehicles)},
                            {"noncompliance_prob", field(sc.noncompliance_prob)},
                            {"adversarial_noncompliance_prob", field(sc.adversarial_noncompliance_prob)}})},
      {"sim", section({{"gamma", field(sim.gamma)},
                       {"slippery_brake_failure_prob", field(sim.slippery_brake_failure_prob)},
                       {"perception_latency", field(sim.perception_latency)},
                       {"reward", section({{"collision_penalty", field(rw.collision_penalty)},
                                           {"unsafe_penalty", field(rw.unsafe_penalty)},
                                           {"hesitation_penalty", field(rw.hesitation_penalty)},
                                           {"progress_reward", field(rw.progress_reward)},
                                           {"step_cost", field(rw.step_cost)}})}})},
      {"pomcp", section({{"simulations", field(cfg.pomcp.n_simulations)},
                         {"max_depth", field(cfg.pomcp.max_depth)},
                         {"ucb_constant", field(cfg.pomcp.exploration)},
                         {"rollout", rollout_field(cfg.pomcp_rollout)}})},
      {"despot", section({{"scenarios", field(cfg.despot.n_scenarios)},
                          {"max_depth", field(cfg.despot.max_depth)},
                          {"lambda", field(cfg.despot.lambda)},
                          {"xi", field(cfg.despot.xi)},
                          {"max_trials", field(cfg.despot.max_trials)},
                          {"rollout_horizon", field(cfg.despot.rollout_horizon)}})},
      {"qmdp", section({{"arrive_go", field(cd.arrive_go)},
                        {"arrive_yield", field(cd.arrive_yield)},
                        {"arrive_stop", field(cd.arrive_stop)},
                        {"clear_go", field(cd.clear_go)},
                        {"ped_leave", field(cd.ped_leave)},
                        {"ped_appear", field(cd.ped_appear)},
                        {"conflict_leave", field(cd.conflict_leave)},
                        {"conflict_appear", field(cd.conflict_appear)},
                        {"other_first_resolve", field(cd.other_first_resolve)},
                        {"tie_resolve", field(cd.tie_resolve)},
                        {"lose_priority_go", field(cd.lose_priority_go)},
                        {"lose_priority_wait", field(cd.lose_priority_wait)},
                        {"collide_ped", field(cd.collide_ped)},
                        {"collide_conflict", field(cd.collide_conflict)},
                        {"collide_other_first", field(cd.collide_other_first)},
                        {"collide_tie", field(cd.collide_tie)},
                        {"collide_in_box_conflict", field(cd.collide_in_box_conflict)}})},
  };
  apply(root, "", top);
  sc.horizon = horizon;
  cfg.sync_echoes();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return config_from_yaml(text);
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
}

std::string config_to_yaml(const RunConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  const ScenarioConfig& sc = cfg.scenario;
  const RewardWeights& rw = cfg.sim.reward;
  const CompactDynamics& cd = cfg.compact;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "scenarios" << YAML::Value << cfg.n_scenarios;
  out << YAML::Key << "horizon" << YAML::Value << sc.horizon;
  out << YAML::Key << "deadline" << YAML::Value << cfg.deadline;
  out << YAML::Key << "planners" << YAML::Value << YAML::Flow << cfg.planners;
  out << YAML::Key << "workers" << YAML::Value << cfg.workers;
  out << YAML::Key << "particles" << YAML::Value << cfg.n_particles;
  out << YAML::Key << "drain_factor" << YAML::Value << cfg.drain_factor;
  out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "intent_weights" << YAML::Value << YAML::Flow
      << std::vector<double>(sc.intent_weights.begin(), sc.intent_weights.end());
  out << YAML::Key << "pedestrian_prob_min" << YAML::Value << sc.pedestrian_prob_min;
  out << YAML::Key << "pedestrian_prob_max" << YAML::Value << sc.pedestrian_prob_max;
  out << YAML::Key << "position_noise_sigma" << YAML::Value << sc.position_noise_sigma;
  out << YAML::Key << "speed_noise_sigma" << YAML::Value << sc.speed_noise_sigma;
  out << YAML::Key << "arrival_noise" << YAML::Value << sc.arrival_noise;
  out << YAML::Key << "occlusion_prob" << YAML::Value << sc.occlusion_prob;
  out << YAML::Key << "dropout_prob" << YAML::Value << sc.dropout_prob;
  out << YAML::Key << "slippery_prob" << YAML::Value << sc.slippery_prob;
  out << YAML::Key << "signal_accuracy" << YAML::Value << sc.signal_accuracy;
  out << YAML::Key << "adversarial_fraction" << YAML::Value << sc.adversarial_fraction;
  out << YAML::Key << "max_other_vehicles" << YAML::Value << sc.max_other_vehicles;
  out << YAML::Key << "noncompliance_prob" << YAML::Value << sc.noncompliance_prob;
  out << YAML::Key << "adversarial_noncompliance_prob" << YAML::Value << sc.adversarial_noncompliance_prob;
  out << YAML::EndMap;
  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gamma" << YAML::Value << cfg.sim.gamma;
  out << YAML::Key << "slippery_brake_failure_prob" << YAML::Value << cfg.sim.slippery_brake_failure_prob;
  out << YAML::Key << "perception_latency" << YAML::Value << cfg.sim.perception_latency;
  out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "collision_penalty" << YAML::Value << rw.collision_penalty;
  out << YAML::Key << "unsafe_penalty" << YAML::Value << rw.unsafe_penalty;
  out << YAML::Key << "hesitation_penalty" << YAML::Value << rw.hesitation_penalty;
  out << YAML::Key << "progress_reward" << YAML::Value << rw.progress_reward;
  out << YAML::Key << "step_cost" << YAML::Value << rw.step_cost;
  out << YAML::EndMap << YAML::EndMap;
  out << YAML::Key << "pomcp" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "simulations" << YAML::Value << cfg.pomcp.n_simulations;
  out << YAML::Key << "max_depth" << YAML::Value << cfg.pomcp.max_depth;
  out << YAML::Key << "ucb_constant" << YAML::Value << cfg.pomcp.exploration;
  out << YAML::Key << "rollout" << YAML::Value << (cfg.pomcp_rollout == RolloutPolicy::Fsm ? "fsm" : "random");
  out << YAML::EndMap;
  out << YAML::Key << "despot" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "scenarios" << YAML::Value << cfg.despot.n_scenarios;
  out << YAML::Key << "max_depth" << YAML::Value << cfg.despot.max_depth;
  out << YAML::Key << "lambda" << YAML::Value << cfg.despot.lambda;
  out << YAML::Key << "xi" << YAML::Value << cfg.despot.xi;
  out << YAML::Key << "max_trials" << YAML::Value << cfg.despot.max_trials;
  out << YAML::Key << "rollout_horizon" << YAML::Value << cfg.despot.rollout_horizon;
  out << YAML::EndMap;
  out << YAML::Key << "qmdp" << YAML::Value << YAML::BeginMap;
  const std::pair<const char*, double> dyn[] = {
      {"arrive_go", cd.arrive_go},
      {"arrive_yield", cd.arrive_yield},
      {"arrive_stop", cd.arrive_stop},
      {"clear_go", cd.clear_go},
      {"ped_leave", cd.ped_leave},
      {"ped_appear", cd.ped_appear},
      {"conflict_leave", cd.conflict_leave},
      {"conflict_appear", cd.conflict_appear},
      {"other_first_resolve", cd.other_first_resolve},
      {"tie_resolve", cd.tie_resolve},
      {"lose_priority_go", cd.lose_priority_go},
      {"lose_priority_wait", cd.lose_priority_wait},
      {"collide_ped", cd.collide_ped},
      {"collide_conflict", cd.collide_conflict},
      {"collide_other_first", cd.collide_other_first},
      {"collide_tie", cd.collide_tie},
      {"collide_in_box_conflict", cd.collide_in_box_conflict},
  };
  for (const auto& [k, v] : dyn) out << YAML::Key << k << YAML::Value << v;
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace rowpomdp
