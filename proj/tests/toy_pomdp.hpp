#pragma once

// A two-state crossing problem small enough to solve exactly: the way ahead
// is clear or blocked, Go ends the episode (+10 if clear, -100 if blocked),
// Yield pays 1 for a noisy look, Stop pays 3 for an exact one, and the
// hidden state flips with a small probability each step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rowpomdp/domain.hpp"
#include "rowpomdp/rng.hpp"
#include "rowpomdp/search.hpp"

namespace toy {

using rowpomdp::Action;
using rowpomdp::Rng;
using rowpomdp::StepOutcome;

struct State {
  bool blocked = false;
  bool done = false;
};

struct Crossing {
  using State = toy::State;
  double gamma = 0.95;
  double flip = 0.1;
  double yield_accuracy = 0.8;
  double go_clear = 10.0;
  double go_blocked = -100.0;
  double yield_cost = -1.0;
  double stop_cost = -3.0;

  // obs key: 0 reads clear, 1 reads blocked, 2 nothing (episode over).
  StepOutcome<State> step(const State& s, Action a, Rng& rng) const {
    StepOutcome<State> out;
    if (a == Action::Go) {
      out.reward = s.blocked ? go_blocked : go_clear;
      out.next = {s.blocked, true};
      out.terminal = true;
      out.obs_key = 2;
      return out;
    }
    State n = s;
    if (rng.uniform() < flip) n.blocked = !n.blocked;
    const double acc = a == Action::Stop ? 1.0 : yield_accuracy;
    const bool truthful = rng.uniform() < acc;
    out.next = n;
    out.reward = a == Action::Stop ? stop_cost : yield_cost;
    out.obs_key = (truthful ? n.blocked : !n.blocked) ? 1 : 0;
    return out;
  }
  Action rollout_action(const State&, Rng& rng) const {
    return rowpomdp::kActions[static_cast<std::size_t>(rng.uniform_int(0, 2))];
  }
  double discount() const { return gamma; }
  bool is_terminal(const State& s) const { return s.done; }
  double upper_bound(const State& s) const { return s.done ? 0.0 : go_clear; }
  Action default_action(const State&, Rng&) const { return Action::Yield; }
};

struct ExactResult {
  std::array<double, 3> q{};
  double value = 0.0;
  Action best = Action::Stop;
};

/// Finite-horizon expectimax over the belief P(blocked) = p, `depth` steps.
inline ExactResult expectimax(const Crossing& m, double p, int depth) {
  ExactResult r;
  if (depth == 0) return r;
  for (Action a : rowpomdp::kActions) {
    double q = 0.0;
    if (a == Action::Go) {
      q = p * m.go_blocked + (1.0 - p) * m.go_clear;
    } else {
      const double p_next = p * (1.0 - m.flip) + (1.0 - p) * m.flip;
      const double acc = a == Action::Stop ? 1.0 : m.yield_accuracy;
      q = a == Action::Stop ? m.stop_cost : m.yield_cost;
      for (int reads_blocked = 0; reads_blocked < 2; ++reads_blocked) {
        const double like_b = reads_blocked ? acc : 1.0 - acc;
        const double like_c = reads_blocked ? 1.0 - acc : acc;
        const double po = p_next * like_b + (1.0 - p_next) * like_c;
        if (po <= 0.0) continue;
        const double post = p_next * like_b / po;
        q += m.gamma * po * expectimax(m, post, depth - 1).value;
      }
    }
    r.q[rowpomdp::index(a)] = q;
  }
  r.best = Action::Stop;
  for (Action a : rowpomdp::kActions) {
    if (r.q[rowpomdp::index(a)] > r.q[rowpomdp::index(r.best)]) r.best = a;
  }
  r.value = r.q[rowpomdp::index(r.best)];
  return r;
}

/// Particles for belief p: `n` states with the blocked fraction rounded.
inline std::vector<State> particles_for(double p, int n) {
  std::vector<State> out;
  const int blocked = static_cast<int>(std::lround(p * n));
  for (int i = 0; i < n; ++i) out.push_back({i < blocked, false});
  return out;
}

/// Belief for instance `k` of a batch: a spread of P(blocked) values.
inline double instance_belief(std::uint64_t seed) {
  Rng rng(rowpomdp::derive_seed(seed, 0x746f79ULL));
  return rng.uniform(0.0, 0.6);
}

}  // namespace toy
