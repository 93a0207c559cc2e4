#include "rowpomdp/qmdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace rowpomdp {

void CompactModel::check() const {
  const auto n = static_cast<std::size_t>(n_states);
  if (transitions.size() != n || rewards.size() != n || terminal.size() != n) {
    throw std::invalid_argument("compact model: table sizes differ from n_states");
  }
  for (int s = 0; s < n_states; ++s) {
    if (terminal[s]) continue;
    for (int a = 0; a < kNumActions; ++a) {
      double total = 0.0;
      for (auto [t, p] : transitions[s][a]) {
        if (t < 0 || t >= n_states || p < 0.0) {
          throw std::invalid_argument("compact model: bad transition from state " + std::to_string(s));
        }
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("compact model: row (" + std::to_string(s) + "," + std::to_string(a) +
                                    ") sums to " + std::to_string(total));
      }
    }
  }
}

double QTable::value(int s) const { return *std::max_element(q[s].begin(), q[s].end()); }

Action QTable::best_action(int s) const {
  return argmax_action([&](Action a) { return q[s][index(a)]; });
}

QTable qmdp_solve(const CompactModel& m, double gamma, double tol, int max_iterations) {
  m.check();
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  QTable out;
  out.q.assign(m.n_states, {0.0, 0.0, 0.0});
  std::vector<double> v(m.n_states, 0.0);
  for (int it = 1; it <= max_iterations; ++it) {
    double residual = 0.0;
    auto next = out.q;
    for (int s = 0; s < m.n_states; ++s) {
      if (m.terminal[s]) continue;
      for (int a = 0; a < kNumActions; ++a) {
        double e = 0.0;
        for (auto [t, p] : m.transitions[s][a]) e += p * v[t];
        next[s][a] = m.rewards[s][a] + gamma * e;
        residual = std::max(residual, std::abs(next[s][a] - out.q[s][a]));
      }
    }
    out.q = std::move(next);
    for (int s = 0; s < m.n_states; ++s) v[s] = m.terminal[s] ? 0.0 : out.value(s);
    out.iterations = it;
    out.residual = residual;
    if (residual < tol) return out;
  }
  throw NonConvergence("value iteration did not converge in " + std::to_string(max_iterations) +
                       " sweeps (residual " + std::to_string(out.residual) + ")");
}

int compact_index(const CompactState& c) {
  return ((index(c.phase) * 3 + static_cast<int>(c.priority)) * 2 + (c.pedestrian ? 1 : 0)) * 2 +
         (c.conflict ? 1 : 0);
}

CompactState compact_from_index(int i) {
  if (i < 0 || i >= kCompactStates) throw std::out_of_range("compact state index");
  CompactState c;
  c.conflict = i % 2 == 1;
  i /= 2;
  c.pedestrian = i % 2 == 1;
  i /= 2;
  c.priority = static_cast<Priority>(i % 3);
  c.phase = static_cast<Phase>(i / 3);
  return c;
}

CompactState encode_compact(const WorldState& s) {
  const RightOfWay ro = assess_right_of_way(s, s.ego.id);
  CompactState c;
  c.phase = s.ego.phase;
  c.pedestrian = ro.pedestrian;
  c.conflict = ro.stop_runner_imminent || ro.conflict_in_box;
  if (ro.earlier_arrival || ro.lower_rank) {
    c.priority = Priority::OtherFirst;
  } else if (ro.tie_on_right || ro.left_turn_tie) {
    c.priority = Priority::Tie;
  }
  return c;
}

Action compact_safe_action(const CompactState& c) {
  if (c.phase == Phase::InIntersection || c.phase == Phase::Cleared) return Action::Go;
  if (c.pedestrian) return Action::Stop;
  if (c.conflict || c.priority != Priority::EgoFirst) {
    return c.phase == Phase::AtLine ? Action::Stop : Action::Yield;
  }
  return Action::Go;
}

namespace {

double collision_prob(const CompactState& c, Action a, const CompactDynamics& d) {
  if (c.phase == Phase::InIntersection) return c.conflict ? d.collide_in_box_conflict : 0.0;
  if (c.phase != Phase::AtLine || a != Action::Go) return 0.0;
  double safe = 1.0;
  if (c.pedestrian) safe *= 1.0 - d.collide_ped;
  if (c.conflict) safe *= 1.0 - d.collide_conflict;
  if (c.priority == Priority::OtherFirst) safe *= 1.0 - d.collide_other_first;
  if (c.priority == Priority::Tie) safe *= 1.0 - d.collide_tie;
  return 1.0 - safe;
}

std::vector<std::pair<Phase, double>> next_phase(const CompactState& c, Action a, const CompactDynamics& d) {
  switch (c.phase) {
    case Phase::Approaching: {
      const double p = a == Action::Go ? d.arrive_go : a == Action::Yield ? d.arrive_yield : d.arrive_stop;
      return {{Phase::AtLine, p}, {Phase::Approaching, 1.0 - p}};
    }
    case Phase::AtLine:
      return {{a == Action::Go ? Phase::InIntersection : Phase::AtLine, 1.0}};
    case Phase::InIntersection:
      if (a == Action::Go) return {{Phase::Cleared, d.clear_go}, {Phase::InIntersection, 1.0 - d.clear_go}};
      return {{Phase::InIntersection, 1.0}};
    case Phase::Cleared:
      break;
  }
  return {{Phase::Cleared, 1.0}};
}

std::vector<std::pair<Priority, double>> next_priority(Priority p, Action a, bool approaching,
                                                       const CompactDynamics& d) {
  switch (p) {
    case Priority::EgoFirst: {
      const double lose = (a == Action::Go || !approaching) ? d.lose_priority_go : d.lose_priority_wait;
      return {{Priority::EgoFirst, 1.0 - lose}, {Priority::OtherFirst, lose}};
    }
    case Priority::OtherFirst:
      return {{Priority::EgoFirst, d.other_first_resolve}, {Priority::OtherFirst, 1.0 - d.other_first_resolve}};
    case Priority::Tie:
      return {{Priority::EgoFirst, d.tie_resolve}, {Priority::Tie, 1.0 - d.tie_resolve}};
  }
  return {{p, 1.0}};
}

std::vector<std::pair<bool, double>> next_flag(bool on, double leave, double appear) {
  return on ? std::vector<std::pair<bool, double>>{{false, leave}, {true, 1.0 - leave}}
            : std::vector<std::pair<bool, double>>{{true, appear}, {false, 1.0 - appear}};
}

}  // namespace

CompactModel intersection_compact_model(const RewardWeights& w, const CompactDynamics& d) {
  CompactModel m;
  m.n_states = kCompactStates;
  m.transitions.resize(kCompactStates);
  m.rewards.assign(kCompactStates, {0.0, 0.0, 0.0});
  m.terminal.assign(kCompactStates, false);
  const int crash = compact_index({Phase::Cleared, Priority::EgoFirst, false, false});

  for (int s = 0; s < kCompactStates; ++s) {
    const CompactState c = compact_from_index(s);
    if (c.phase == Phase::Cleared) {
      m.terminal[s] = true;
      continue;
    }
    const Action safe = compact_safe_action(c);
    for (Action a : kActions) {
      const double p_col = collision_prob(c, a, d);
      std::map<int, double> acc;
      if (p_col > 0.0) acc[crash] += p_col;
      double p_clear = 0.0;
      for (auto [ph, pp] : next_phase(c, a, d)) {
        if (ph == Phase::Cleared && c.phase != Phase::Cleared) p_clear += pp;
        for (auto [pr, pq] : next_priority(c.priority, a, c.phase == Phase::Approaching, d)) {
          for (auto [ped, pe] : next_flag(c.pedestrian, d.ped_leave, d.ped_appear)) {
            for (auto [con, pc] : next_flag(c.conflict, d.conflict_leave, d.conflict_appear)) {
              const double p = (1.0 - p_col) * pp * pq * pe * pc;
              if (p > 0.0) acc[compact_index({ph, pr, ped, con})] += p;
            }
          }
        }
      }
      m.transitions[s][index(a)].assign(acc.begin(), acc.end());
      double r = w.step_cost + p_col * w.collision_penalty;
      if (caution(a) < caution(safe)) r += (1.0 - p_col) * w.unsafe_penalty;
      if (caution(a) > caution(safe)) r += (1.0 - p_col) * w.hesitation_penalty;
      r += (1.0 - p_col) * p_clear * w.progress_reward;
      m.rewards[s][index(a)] = r;
    }
  }
  return m;
}

QmdpPlanner::QmdpPlanner(const SimConfig& sim, const CompactDynamics& dyn)
    : table_(qmdp_solve(intersection_compact_model(sim.reward, dyn), sim.gamma)) {}

std::array<double, kNumActions> qmdp_action_values(const Belief& b, const QTable& q) {
  std::array<double, kNumActions> out{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < b.size(); ++i) {
    const int s = compact_index(encode_compact(b.particles.states[i]));
    for (int a = 0; a < kNumActions; ++a) out[a] += b.particles.weights[i] * q.q[s][a];
  }
  return out;
}

PlannerDecision QmdpPlanner::decide(const PlannerInput& in) {
  if (in.belief == nullptr) throw ContractViolation("qmdp planner needs a belief");
  const auto values = qmdp_action_values(*in.belief, table_);
  PlannerDecision d;
  d.action = argmax_action([&](Action a) { return values[index(a)]; });
  d.intent_predictions = belief_intent_predictions(*in.belief);
  for (Action a : kActions) d.diagnostics["q_" + std::string(to_string(a))] = values[index(a)];
  return d;
}

}  // namespace rowpomdp
