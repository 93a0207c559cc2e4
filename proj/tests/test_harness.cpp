#include <stdexcept>

#include "doctest.h"
#include "rowpomdp/fsm.hpp"
#include "rowpomdp/harness.hpp"

using namespace rowpomdp;

namespace {

StepRecord step(Action a, Action oracle, double compute, bool on_time) {
  StepRecord r;
  r.action = a;
  r.oracle_action = oracle;
  r.compute_time = compute;
  r.deadline_met = on_time;
  return r;
}

// Two hand-scored episodes of planner "p": one clean, one collision.
std::vector<EpisodeResult> fixture() {
  EpisodeResult a;
  a.scenario_id = 1;
  a.planner = "p";
  a.steps.push_back(step(Action::Go, Action::Go, 0.01, true));
  a.steps.push_back(step(Action::Go, Action::Stop, 0.03, false));
  a.steps[0].true_intents = {{1, Intent::Left}};
  a.steps[0].predicted_intents = {{1, Intent::Left}};
  a.steps[1].true_intents = {{1, Intent::Left}};
  a.steps[1].predicted_intents = {{1, Intent::Right}};
  a.ego_clear_step = 5;
  a.clear_steps = {{0, 5}, {1, 4}};
  a.oracle_clear_steps = {{0, 5}, {1, 3}};
  a.completion_time = 6;

  EpisodeResult b;
  b.scenario_id = 0;
  b.adversarial = true;
  b.planner = "p";
  b.steps.push_back(step(Action::Stop, Action::Stop, 0.02, true));
  b.steps[0].near_miss = true;
  b.collision = true;
  b.clear_steps = {{0, -1}, {1, 2}};
  b.oracle_clear_steps = {{0, 4}, {1, 2}};
  b.completion_time = 10;
  return {a, b};
}

PlannerMetrics with_collision_free(const std::string& name, double rate) {
  PlannerMetrics m;
  m.planner = name;
  m.collision_free_rate = rate;
  return m;
}

class Boom final : public Planner {
 public:
  std::string_view name() const override { return "boom"; }
  PlannerDecision decide(const PlannerInput&) override { throw std::runtime_error("planner exploded"); }
};

}  // namespace

TEST_CASE("metrics on a hand-scored fixture") {
  const auto m = compute_metrics(fixture(), {"p"}).at(0);
  CHECK(m.episodes == 2);
  CHECK(m.collision_free_rate == doctest::Approx(0.5));
  CHECK(m.action_accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(m.intent_accuracy == doctest::Approx(0.5));
  CHECK(m.flow_efficiency == doctest::Approx(0.5));
  CHECK(m.mean_completion_time == doctest::Approx(8.0));
  CHECK(m.throughput == doctest::Approx(3.0 / 16.0));
  CHECK(m.mean_processing_time == doctest::Approx(0.02));
  CHECK(m.real_time_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(m.near_miss_recovery == doctest::Approx(0.0));

  const auto adv = compute_metrics(fixture(), {"p"}, SubsetFilter::Adversarial).at(0);
  CHECK(adv.episodes == 1);
  CHECK(adv.collision_free_rate == 0.0);
  const auto calm = compute_metrics(fixture(), {"p"}, SubsetFilter::NonAdversarial).at(0);
  CHECK(calm.collision_free_rate == 1.0);
  CHECK(calm.near_miss_recovery == 1.0);
}

TEST_CASE("metrics reject an empty selection") {
  CHECK_THROWS_AS(compute_metrics({}, {"p"}), std::invalid_argument);
  CHECK_THROWS_AS(compute_metrics(fixture(), {"q"}), std::invalid_argument);
}

TEST_CASE("failed episodes count against the collision-free rate") {
  auto eps = fixture();
  eps[0].error = "boom";
  const auto m = compute_metrics(eps, {"p"}).at(0);
  CHECK(m.failed_episodes == 1);
  CHECK(m.collision_free_rate == 0.0);
  CHECK(eps[0].outcome() == "failed");
  CHECK(eps[1].outcome() == "collision");
}

TEST_CASE("radar normalization maps the worst planner to 0 and the best to 1") {
  const std::vector<PlannerMetrics> ms{with_collision_free("fsm", 0.617), with_collision_free("qmdp", 0.933),
                                       with_collision_free("pomcp", 0.989), with_collision_free("despot", 0.933)};
  const auto n = normalize_for_radar(ms);
  const std::size_t axis = 2;
  REQUIRE(radar_axes()[axis].name == "collision_free_rate");
  CHECK(n[0][axis] == 0.0);
  CHECK(n[2][axis] == 1.0);
  CHECK(n[1][axis] == doctest::Approx((0.933 - 0.617) / (0.989 - 0.617)));
  CHECK(n[1][axis] == n[3][axis]);
  // Axes on which everybody ties map to 1.
  for (std::size_t k = 0; k < radar_axes().size(); ++k) {
    if (k != axis) CHECK(n[0][k] == 1.0);
  }
  // Scaling already-scaled values changes nothing.
  std::vector<PlannerMetrics> again;
  for (std::size_t i = 0; i < ms.size(); ++i) again.push_back(with_collision_free(ms[i].planner, n[i][axis]));
  const auto n2 = normalize_for_radar(again);
  for (std::size_t i = 0; i < ms.size(); ++i) CHECK(n2[i][axis] == doctest::Approx(n[i][axis]));
}

TEST_CASE("radar inverts lower-is-better axes") {
  PlannerMetrics fast, slow;
  fast.mean_completion_time = 10.0;
  slow.mean_completion_time = 20.0;
  const auto n = normalize_for_radar({fast, slow});
  const std::size_t axis = 4;
  REQUIRE(radar_axes()[axis].lower_is_better);
  CHECK(n[0][axis] == 1.0);
  CHECK(n[1][axis] == 0.0);
}

TEST_CASE("near-miss prediction") {
  VehicleState v;
  v.distance_to_line = 10.0;
  v.speed = 4.0;
  CHECK(predicted_entry_step(v, 2) == 5);
  v.phase = Phase::AtLine;
  CHECK(predicted_entry_step(v, 2) == 2);

  Scenario scn;
  scn.ego = {Approach::South, Intent::Straight, 10.0, 5.0};
  scn.others.push_back({Approach::East, Intent::Straight, 0, true, 5.0, 15.0});
  CHECK(is_near_miss(make_initial_state(scn)));
  scn.others[0].distance = 50.0;
  CHECK_FALSE(is_near_miss(make_initial_state(scn)));
  scn.others[0] = {Approach::North, Intent::Straight, 0, true, 5.0, 15.0};
  REQUIRE_FALSE(paths_conflict({Approach::South, Intent::Straight}, {Approach::North, Intent::Straight}));
  CHECK_FALSE(is_near_miss(make_initial_state(scn)));
}

TEST_CASE("a throwing planner yields a failed episode") {
  RunConfig cfg;
  const auto scn = generate_suite(3, 1, cfg.scenario).front();
  Boom boom;
  const EpisodeResult r = run_episode(scn, boom, cfg);
  CHECK(r.failed());
  CHECK(r.error.find("planner exploded") != std::string::npos);
  CHECK(r.steps.empty());
}

TEST_CASE("every planner sees the same world for the same state") {
  RunConfig cfg;
  for (const auto& scn : generate_suite(8, 10, cfg.scenario)) {
    FsmPlanner fsm;
    const EpisodeResult a = run_episode(scn, fsm, cfg);
    const EpisodeResult o = run_oracle_episode(scn, cfg);
    REQUIRE_FALSE(a.steps.empty());
    CHECK(a.steps[0].state_digest == o.steps[0].state_digest);
    CHECK(a.steps[0].observation == o.steps[0].observation);
  }
}

TEST_CASE("suite results do not depend on the worker count") {
  RunConfig cfg;
  cfg.planners = {"fsm", "qmdp", "pomcp", "despot"};
  const auto suite = generate_suite(4, 6, cfg.scenario);
  cfg.workers = 1;
  const auto one = run_suite(suite, cfg);
  cfg.workers = 3;
  const auto three = run_suite(suite, cfg);
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].planner == three[i].planner);
    CHECK(one[i].scenario_id == three[i].scenario_id);
    CHECK(one[i].total_reward == three[i].total_reward);
    CHECK(one[i].clear_steps == three[i].clear_steps);
    REQUIRE(one[i].steps.size() == three[i].steps.size());
    for (std::size_t k = 0; k < one[i].steps.size(); ++k) {
      CHECK(one[i].steps[k].action == three[i].steps[k].action);
      CHECK(one[i].steps[k].state_digest == three[i].steps[k].state_digest);
      CHECK(one[i].steps[k].predicted_intents == three[i].steps[k].predicted_intents);
    }
  }
}

TEST_CASE("run config validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.planners = {"nope"};
  CHECK_THROWS(cfg.validate());
  cfg = RunConfig{};
  cfg.workers = 0;
  CHECK_THROWS(cfg.validate());
  cfg = RunConfig{};
  cfg.deadline = -1.0;
  CHECK_THROWS(cfg.validate());
}
