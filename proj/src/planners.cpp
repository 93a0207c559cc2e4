#include "rowpomdp/planners.hpp"

#include <stdexcept>
#include <string>

namespace rowpomdp {

namespace {

constexpr double kNearLine = 2.0;

}  // namespace

std::uint64_t observation_key(const Observation& o) {
  std::uint64_t h = o.frame_dropped ? 1 : 2;
  auto mix = [&](std::uint64_t v) { h = splitmix64(h ^ v); };
  mix(static_cast<std::uint64_t>(index(o.ego.phase)));
  for (int i = 0; i < 4; ++i) mix(o.pedestrians[i] ? 1u << i : 0u);
  for (const auto& r : o.vehicles) {
    const std::uint64_t bits = (r.in_intersection ? 1u : 0u) | (r.noisy_distance < kNearLine ? 2u : 0u);
    mix((static_cast<std::uint64_t>(r.id) << 8) | bits);
  }
  return h;
}

StepOutcome<WorldState> IntersectionModel::step(const WorldState& s, Action a, Rng& rng) const {
  StepOutcome<WorldState> out;
  out.next = transition(s, a, rng, sim_);
  out.reward = reward(s, a, out.next, sim_.reward);
  out.terminal = rowpomdp::is_terminal(out.next, sim_.horizon);
  out.obs_key = observation_key(observe(out.next, rng, sim_.noise));
  return out;
}

bool IntersectionModel::is_terminal(const WorldState& s) const { return rowpomdp::is_terminal(s, sim_.horizon); }

Action IntersectionModel::rollout_action(const WorldState& s, Rng& rng) const {
  if (rollout_ == RolloutPolicy::Fsm) return default_action(s, rng);
  return kActions[rng.uniform_int(0, kNumActions - 1)];
}

Action IntersectionModel::default_action(const WorldState& s, Rng& rng) const {
  return fsm_rule_action(observe(s, rng, sim_.noise), {});
}

double IntersectionModel::upper_bound(const WorldState& s) const {
  if (is_terminal(s)) return 0.0;
  const auto& w = sim_.reward;
  const int remaining = sim_.horizon - s.timestep;
  const int m = min_steps_to_clear(s.ego);
  const int steps = std::min(m, remaining);
  double total = 0.0;
  double g = 1.0;
  for (int i = 0; i < steps; ++i) {
    total += g * w.step_cost;
    if (i + 1 == m) total += g * w.progress_reward;
    g *= sim_.gamma;
  }
  return total;
}

std::map<int, Intent> belief_intent_predictions(const Belief& b) {
  std::map<int, std::array<double, 3>> mass;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = b.particles.weights[i];
    for (const auto& v : b.particles.states[i].others) {
      if (v.cleared()) continue;
      mass[v.id][index(v.intent)] += w;
    }
  }
  std::map<int, Intent> out;
  for (const auto& [id, m] : mass) {
    Intent best = Intent::Straight;
    for (Intent k : kIntents) {
      if (m[index(k)] > m[index(best)]) best = k;
    }
    out[id] = best;
  }
  return out;
}

PomcpPlanner::PomcpPlanner(const SimConfig& sim, PomcpConfig cfg, RolloutPolicy rollout)
    : model_(sim, rollout), cfg_(cfg) {
  cfg_.validate();
}

PlannerDecision PomcpPlanner::decide(const PlannerInput& in) {
  if (in.belief == nullptr || in.rng == nullptr) throw ContractViolation("pomcp planner needs a belief and rng");
  Pomcp<IntersectionModel> search(model_, cfg_);
  const auto& ps = in.belief->particles;
  const auto r = search.plan(ps.states, ps.weights, *in.rng);
  PlannerDecision d;
  d.action = r.action;
  d.intent_predictions = belief_intent_predictions(*in.belief);
  d.diagnostics["tree_nodes"] = static_cast<double>(r.tree_nodes);
  d.diagnostics["max_depth"] = r.max_depth_reached;
  for (Action a : kActions) d.diagnostics["visits_" + std::string(to_string(a))] = r.root_visits[index(a)];
  return d;
}

DespotPlanner::DespotPlanner(const SimConfig& sim, DespotConfig cfg) : model_(sim), cfg_(cfg) { cfg_.validate(); }

PlannerDecision DespotPlanner::decide(const PlannerInput& in) {
  if (in.belief == nullptr || in.rng == nullptr) throw ContractViolation("despot planner needs a belief and rng");
  Despot<IntersectionModel> search(model_, cfg_);
  const auto& ps = in.belief->particles;
  const auto r = search.plan(ps.states, ps.weights, *in.rng);
  PlannerDecision d;
  d.action = r.action;
  d.intent_predictions = belief_intent_predictions(*in.belief);
  d.diagnostics["tree_nodes"] = static_cast<double>(r.tree_nodes);
  d.diagnostics["trials"] = r.trials;
  d.diagnostics["lower"] = r.lower;
  d.diagnostics["upper"] = r.upper;
  d.diagnostics["bound_violations"] = r.bound_violations;
  return d;
}

const std::vector<std::string>& benchmark_planners() {
  static const std::vector<std::string> names{"fsm", "qmdp", "pomcp", "despot"};
  return names;
}

std::unique_ptr<Planner> make_planner(std::string_view name, const PlannerSettings& s) {
  if (name == "fsm") return std::make_unique<FsmPlanner>();
  if (name == "qmdp") return std::make_unique<QmdpPlanner>(s.sim, s.compact);
  if (name == "pomcp") return std::make_unique<PomcpPlanner>(s.sim, s.pomcp, s.pomcp_rollout);
  if (name == "despot") return std::make_unique<DespotPlanner>(s.sim, s.despot);
  if (name == "oracle") return std::make_unique<OraclePlanner>();
  throw std::invalid_argument("unknown planner '" + std::string(name) + "'");
}

}  // namespace rowpomdp
