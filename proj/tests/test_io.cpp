#include <filesystem>

#include "doctest.h"
#include "rowpomdp/io.hpp"
#include "rowpomdp/report.hpp"

using namespace rowpomdp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rowpomdp_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Json without_observations(Json j) {
  for (auto& s : j.at("steps")) s.erase("observation");
  return j;
}

}  // namespace

TEST_CASE("scenario suites survive a file round trip") {
  TempDir dir("suite");
  SuiteFile suite;
  suite.seed = 77;
  suite.config.occlusion_prob = 0.2;
  suite.scenarios = generate_suite(77, 12, suite.config);
  write_suite(dir.path / "nested" / "suite.json", suite);
  const SuiteFile back = read_suite(dir.path / "nested" / "suite.json");
  CHECK(back.seed == 77);
  CHECK(back.config.occlusion_prob == 0.2);
  CHECK(back.scenarios == suite.scenarios);
}

TEST_CASE("episode logs survive a file round trip") {
  TempDir dir("episodes");
  RunConfig cfg;
  cfg.planners = {"fsm", "qmdp"};
  auto episodes = run_suite(generate_suite(2, 3, cfg.scenario), cfg);
  episodes[1].error = "planner exploded";
  write_episodes(dir.path / "episodes.jsonl", episodes);
  const auto back = read_episodes(dir.path / "episodes.jsonl");
  REQUIRE(back.size() == episodes.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(without_observations(episode_to_json(back[i])) == without_observations(episode_to_json(episodes[i])));
  }
  CHECK(back[1].failed());
}

TEST_CASE("malformed files are reported with their path") {
  TempDir dir("bad");
  write_text(dir.path / "junk.jsonl", "{\"schema\": \"something else\"}\n");
  CHECK_THROWS_AS(read_episodes(dir.path / "junk.jsonl"), IoError);
  CHECK_THROWS_AS(read_suite(dir.path / "junk.jsonl"), IoError);
  CHECK_THROWS_AS(read_text(dir.path / "missing.json"), IoError);
  try {
    read_suite(dir.path / "junk.jsonl");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("junk.jsonl") != std::string::npos);
  }
}

TEST_CASE("the shipped default config equals the built-in defaults") {
  const RunConfig file = load_config(fs::path(ROWPOMDP_CONFIGS) / "default.yaml");
  CHECK(config_to_yaml(file) == config_to_yaml(RunConfig{}));
}

TEST_CASE("config yaml round trip") {
  RunConfig cfg;
  cfg.seed = 9;
  cfg.workers = 3;
  cfg.planners = {"pomcp", "fsm"};
  cfg.pomcp.n_simulations = 321;
  cfg.pomcp_rollout = RolloutPolicy::Fsm;
  cfg.despot.lambda = 0.5;
  cfg.scenario.signal_accuracy = 0.7;
  cfg.sim.reward.hesitation_penalty = -2.0;
  cfg.sync_echoes();
  const RunConfig back = config_from_yaml(config_to_yaml(cfg));
  CHECK(config_to_yaml(back) == config_to_yaml(cfg));
  CHECK(back.pomcp.n_simulations == 321);
  CHECK(back.pomcp_rollout == RolloutPolicy::Fsm);
  CHECK(back.sim.noise.signal_accuracy == 0.7);
}

TEST_CASE("config errors name the offending key") {
  try {
    config_from_yaml("pomcp:\n  bogus: 1\n");
    FAIL("expected InvalidConfig");
  } catch (const InvalidConfig& e) {
    CHECK(std::string(e.what()).find("pomcp.bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_yaml("horizon: twelve\n"), InvalidConfig);
  CHECK_THROWS_AS(config_from_yaml("planners: [fsm, magic]\n"), InvalidConfig);
  CHECK(config_from_yaml("").seed == RunConfig{}.seed);
}

TEST_CASE("deterministic reports are identical across runs") {
  RunConfig cfg;
  cfg.planners = {"fsm", "qmdp"};
  const auto suite = generate_suite(5, 4, cfg.scenario);
  const auto a = run_suite(suite, cfg);
  const auto b = run_suite(suite, cfg);
  CHECK(metrics_csv(a, cfg.planners) == metrics_csv(b, cfg.planners));
  CHECK(accuracy_heatmap_csv(a, cfg.planners) == accuracy_heatmap_csv(b, cfg.planners));
  CHECK(trajectories_json(a, cfg.planners) == trajectories_json(b, cfg.planners));
}
