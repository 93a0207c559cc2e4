#include <cmath>
#include <vector>

#include "doctest.h"
#include "rowpomdp/qmdp.hpp"
#include "rowpomdp/sim.hpp"
#include "oracles.hpp"

using namespace rowpomdp;

TEST_CASE("compact model is a valid 48-state MDP") {
  const auto m = intersection_compact_model(RewardWeights{});
  CHECK(m.n_states == 48);
  CHECK_NOTHROW(m.check());
  for (int i = 0; i < kCompactStates; ++i) CHECK(compact_index(compact_from_index(i)) == i);
}

TEST_CASE("qmdp value iteration matches policy iteration to 1e-6") {
  SimConfig sim;
  const auto m = intersection_compact_model(sim.reward);
  const QTable table = qmdp_solve(m, sim.gamma);
  const double worst = oracles::qmdp_max_error(m, table, sim.gamma);
  CHECK(worst < 1e-6);
}

TEST_CASE("gamma zero gives the immediate expected reward") {
  const auto m = intersection_compact_model(RewardWeights{});
  const QTable t = qmdp_solve(m, 1e-12);
  for (int s = 0; s < m.n_states; ++s) {
    if (m.terminal[s]) continue;
    for (int a = 0; a < kNumActions; ++a) CHECK(t.q[s][a] == doctest::Approx(m.rewards[s][a]).epsilon(1e-9));
  }
}

TEST_CASE("scaling every reward keeps the greedy action") {
  SimConfig sim;
  const QTable base = qmdp_solve(intersection_compact_model(sim.reward), sim.gamma);
  const QTable scaled = qmdp_solve(intersection_compact_model(sim.reward.scaled(7.5)), sim.gamma);
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> b(kCompactStates);
    double total = 0.0;
    for (double& x : b) total += x = rng.uniform() < 0.2 ? rng.uniform() : 0.0;
    if (total <= 0.0) continue;
    auto pick = [&](const QTable& t) {
      return argmax_action([&](Action a) {
        double v = 0.0;
        for (int s = 0; s < kCompactStates; ++s) v += b[s] / total * t.q[s][index(a)];
        return v;
      });
    };
    CHECK(pick(base) == pick(scaled));
  }
}

TEST_CASE("value iteration reports non-convergence") {
  const auto m = intersection_compact_model(RewardWeights{});
  CHECK_THROWS_AS(qmdp_solve(m, 0.95, 1e-10, 3), NonConvergence);
  CHECK_THROWS_AS(qmdp_solve(m, 1.5), std::invalid_argument);
}

TEST_CASE("malformed compact models are rejected") {
  auto m = intersection_compact_model(RewardWeights{});
  m.transitions[0][0].front().second += 0.1;
  CHECK_THROWS_AS(m.check(), std::invalid_argument);
}

TEST_CASE("compact safe action follows the rules of the road") {
  CHECK(compact_safe_action({Phase::AtLine, Priority::EgoFirst, true, false}) == Action::Stop);
  CHECK(compact_safe_action({Phase::Approaching, Priority::OtherFirst, false, false}) == Action::Yield);
  CHECK(compact_safe_action({Phase::AtLine, Priority::Tie, false, false}) == Action::Stop);
  CHECK(compact_safe_action({Phase::Approaching, Priority::EgoFirst, false, false}) == Action::Go);
  CHECK(compact_safe_action({Phase::InIntersection, Priority::OtherFirst, true, true}) == Action::Go);
}

TEST_CASE("solved policy is the safe action in every clear-cut state") {
  SimConfig sim;
  const QTable t = qmdp_solve(intersection_compact_model(sim.reward), sim.gamma);
  for (int s = 0; s < kCompactStates; ++s) {
    const CompactState c = compact_from_index(s);
    if (c.phase == Phase::Cleared) continue;
    CHECK_MESSAGE(t.best_action(s) == compact_safe_action(c), "state " << s);
  }
}
