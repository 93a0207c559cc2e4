// Acceptance checks: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "oracles.hpp"
#include "rowpomdp/despot.hpp"
#include "rowpomdp/harness.hpp"
#include "rowpomdp/io.hpp"
#include "rowpomdp/planners.hpp"
#include "rowpomdp/pomcp.hpp"
#include "rowpomdp/report.hpp"
#include "stats.hpp"
#include "toy_pomdp.hpp"

using namespace rowpomdp;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s  %d  %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string pct(double rate) { return fmt("%.1f%%", 100.0 * rate); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Per-planner metrics averaged over seeds.
struct Averages {
  std::map<std::string, PlannerMetrics> all, adversarial, calm;
};

void accumulate(std::map<std::string, PlannerMetrics>& into, const std::vector<PlannerMetrics>& ms, double w) {
  for (const auto& m : ms) {
    auto& a = into[m.planner];
    a.planner = m.planner;
    a.collision_free_rate += w * m.collision_free_rate;
    a.action_accuracy += w * m.action_accuracy;
    a.mean_processing_time += w * m.mean_processing_time;
    a.real_time_fraction += w * m.real_time_fraction;
  }
}

constexpr int kSeeds = 10;
constexpr std::uint64_t kFirstSeed = 1000;
const std::vector<std::string> kProbabilistic{"qmdp", "pomcp", "despot"};

}  // namespace

int main() {
  RunConfig cfg;

  // 1 to 4 share one 10-seed benchmark run.
  Averages avg;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < kSeeds; ++k) {
    cfg.seed = kFirstSeed + static_cast<std::uint64_t>(k);
    const auto episodes = run_suite(generate_suite(cfg.seed, cfg.n_scenarios, cfg.scenario), cfg);
    accumulate(avg.all, compute_metrics(episodes, cfg.planners, SubsetFilter::All), 1.0 / kSeeds);
    accumulate(avg.adversarial, compute_metrics(episodes, cfg.planners, SubsetFilter::Adversarial), 1.0 / kSeeds);
    accumulate(avg.calm, compute_metrics(episodes, cfg.planners, SubsetFilter::NonAdversarial), 1.0 / kSeeds);
  }
  const double bench_seconds = seconds_since(t0);

  {
    const auto& a = avg.all;
    const auto& fsm = a.at("fsm");
    bool ok = bench_seconds < 300.0;
    ok = ok && a.at("pomcp").collision_free_rate >= a.at("despot").collision_free_rate;
    ok = ok && a.at("pomcp").collision_free_rate >= a.at("qmdp").collision_free_rate;
    std::string detail = "collision-free/accuracy fsm " + pct(fsm.collision_free_rate) + "/" + pct(fsm.action_accuracy);
    for (const auto& p : kProbabilistic) {
      const auto& m = a.at(p);
      ok = ok && m.collision_free_rate >= fsm.collision_free_rate + 0.15;
      ok = ok && m.action_accuracy >= fsm.action_accuracy + 0.10;
      detail += ", " + p + " " + pct(m.collision_free_rate) + "/" + pct(m.action_accuracy);
    }
    detail += ", " + fmt("%.0f s", bench_seconds);
    verdict(1, "10-seed ranking and margins over fsm", ok, detail);
  }
  {
    const double cf = avg.all.at("pomcp").collision_free_rate;
    verdict(2, "pomcp collision-free rate >= 90%", cf >= 0.90, pct(cf));
  }
  {
    auto drop = [&](const std::string& p) {
      return avg.calm.at(p).action_accuracy - avg.adversarial.at(p).action_accuracy;
    };
    const double fsm_drop = drop("fsm");
    bool ok = fsm_drop >= 0.10;
    std::string detail = "accuracy drop fsm " + fmt("%.1f", 100.0 * fsm_drop);
    for (const auto& p : kProbabilistic) {
      ok = ok && drop(p) <= fsm_drop;
      detail += ", " + p + " " + fmt("%.1f", 100.0 * drop(p));
    }
    verdict(3, "adversarial degradation", ok, detail + " points");
  }
  {
    const auto& a = avg.all;
    bool ok = true;
    std::string detail;
    for (const auto& p : cfg.planners) {
      const bool cheap = p == "fsm" || p == "qmdp";
      const double t = a.at(p).mean_processing_time;
      ok = ok && t <= (cheap ? 0.002 : 0.05);
      // Averaging ten exact 1.0s in floating point can land an ulp short.
      if (cheap) ok = ok && a.at(p).real_time_fraction >= 1.0 - 1e-12;
      detail += (detail.empty() ? "" : ", ") + p + " " + fmt("%.4f s", t) + " rt " + fmt("%.3f", a.at(p).real_time_fraction);
    }
    verdict(4, "decision latency", ok, detail);
  }

  {
    RunConfig oc;
    int collisions = 0, episodes = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      for (const auto& scn : generate_suite(seed, 60, oc.scenario)) {
        collisions += run_oracle_episode(scn, oc).collision ? 1 : 0;
        ++episodes;
      }
    }
    verdict(5, "oracle driving is collision-free", collisions == 0,
            std::to_string(collisions) + " collisions in " + std::to_string(episodes) + " episodes");
  }

  {
    SimConfig sim;
    const auto model = intersection_compact_model(sim.reward);
    const double q_err = oracles::qmdp_max_error(model, qmdp_solve(model, sim.gamma), sim.gamma);

    constexpr int kDepth = 3, kInstances = 200;
    toy::Crossing toy_model;
    PomcpConfig pc;
    pc.n_simulations = 10000;
    pc.max_depth = kDepth;
    DespotConfig dc;
    dc.n_scenarios = 256;
    dc.max_depth = kDepth;
    dc.max_trials = 500;
    dc.lambda = 0.0;
    dc.rollout_horizon = kDepth;
    Pomcp<toy::Crossing> pomcp(toy_model, pc);
    Despot<toy::Crossing> despot(toy_model, dc);
    int pomcp_agree = 0, despot_agree = 0;
    for (int k = 0; k < kInstances; ++k) {
      const double p = toy::instance_belief(static_cast<std::uint64_t>(k));
      const auto exact = toy::expectimax(toy_model, p, kDepth);
      const auto particles = toy::particles_for(p, 1000);
      const std::vector<double> w(particles.size(), 1.0 / static_cast<double>(particles.size()));
      auto agrees = [&](Action a) { return exact.q[index(a)] >= exact.value - 1e-9; };
      Rng r1(derive_seed(static_cast<std::uint64_t>(k), 1)), r2(derive_seed(static_cast<std::uint64_t>(k), 2));
      pomcp_agree += agrees(pomcp.plan(particles, w, r1).action) ? 1 : 0;
      despot_agree += agrees(despot.plan(particles, w, r2).action) ? 1 : 0;
    }
    const bool ok = q_err < 1e-6 && pomcp_agree >= 190 && despot_agree >= 180;
    verdict(6, "planners match exact solutions", ok,
            "qmdp max |dQ| " + fmt("%.1e", q_err) + ", pomcp " + std::to_string(pomcp_agree) + "/200, despot " +
                std::to_string(despot_agree) + "/200");
  }

  {
    // Particle filter against the exact forward algorithm on random
    // discrete chains of 2 to 50 states, 10^4 particles.
    double toy_tv = 0.0, weight_err = 0.0;
    for (int n : {2, 5, 10, 25, 50}) {
      for (std::uint64_t k = 0; k < 10; ++k) {
        const auto r = oracles::track_hmm(oracles::random_hmm(100 * static_cast<std::uint64_t>(n) + k, n, 4), 10000, 20, k);
        toy_tv = std::max(toy_tv, r.worst_tv);
        weight_err = std::max(weight_err, r.worst_weight_error);
      }
    }
    // Intersection belief: intent marginal of one tracked vehicle against
    // exact enumeration (reported, not scored), and normalization along
    // full episodes.
    const auto intent = oracles::track_intent(30, 10000);
    weight_err = std::max(weight_err, intent.worst_weight_error);
    RunConfig bc;
    const BeliefConfig belief_cfg = bc.belief();
    for (const auto& scn : generate_suite(11, 60, bc.scenario)) {
      WorldState s = make_initial_state(scn);
      Rng world(scn.seed), rng(scn.seed + 1);
      Belief b = init_belief(scn, observe(s, world, bc.sim.noise), belief_cfg, rng);
      while (!is_terminal(s, bc.sim.horizon)) {
        const Action a = ground_truth_action(s);
        s = transition(s, a, world, bc.sim);
        b = update(b, a, observe(s, world, bc.sim.noise), belief_cfg, rng);
        double sum = 0.0;
        for (double x : b.particles.weights) sum += x;
        weight_err = std::max(weight_err, std::abs(sum - 1.0));
      }
    }
    verdict(7, "belief matches exact enumeration", toy_tv < 0.05 && weight_err < 1e-9,
            "worst toy TV " + fmt("%.4f", toy_tv) + ", worst |sum w - 1| " + fmt("%.1e", weight_err) +
                ", intersection intent TV " + fmt("%.4f", intent.worst_tv));
  }

  {
    RunConfig pc;
    const auto suite = generate_suite(pc.seed, pc.n_scenarios, pc.scenario);
    const fs::path root = fs::temp_directory_path() / "rowpomdp_acceptance";
    fs::remove_all(root);
    const std::vector<std::string> files{"metrics.csv", "accuracy_heatmap.csv", "trajectories.json"};
    std::vector<std::string> contents;
    for (int workers : {1, 1, 3}) {
      pc.workers = workers;
      const auto episodes = run_suite(suite, pc);
      const fs::path dir = root / ("run" + std::to_string(contents.size()));
      export_reports(episodes, pc.planners, pc.deadline, dir);
      std::string all;
      for (const auto& f : files) all += read_text(dir / f);
      contents.push_back(all);
    }
    fs::remove_all(root);
    const bool ok = contents[0] == contents[1] && contents[0] == contents[2];
    verdict(8, "reports are byte-identical across runs and worker counts", ok,
            "2 runs with 1 worker, 1 run with 3 workers, " + std::to_string(contents[0].size()) + " bytes");
  }

  {
    ScenarioConfig sc;
    std::array<int, 3> counts{};
    int total = 0;
    for (int i = 0; i < 10000; ++i) {
      const Scenario s = generate_scenario(derive_seed(3, 5, static_cast<std::uint64_t>(i)), sc, false);
      ++counts[index(s.ego.intent)];
      ++total;
      for (const auto& o : s.others) {
        ++counts[index(o.intent)];
        ++total;
      }
    }
    bool ok = true;
    std::string detail = "intents";
    for (Intent i : kIntents) {
      ok = ok && stats::within_binomial(counts[index(i)], total, sc.intent_weights[index(i)], 3.0);
      detail += " " + fmt("%.3f", static_cast<double>(counts[index(i)]) / total);
    }
    ObservationNoise noise;
    noise.dropout_prob = 0.0;
    noise.occlusion_prob = 0.0;
    Scenario one;
    one.others.push_back({Approach::East, Intent::Straight, 0, true, 5.0, 25.0});
    const WorldState s = make_initial_state(one);
    std::vector<double> err;
    Rng rng(77);
    for (int k = 0; k < 20000; ++k) err.push_back(observe(s, rng, noise).vehicles.at(0).noisy_distance - 25.0);
    const double var = stats::variance(err);
    ok = ok && std::abs(var - 1.0) <= 0.05;
    int adversarial = 0;
    for (const auto& scn : generate_suite(42, 60, sc)) adversarial += scn.adversarial ? 1 : 0;
    ok = ok && adversarial == 20;
    verdict(9, "scenario and sensor statistics", ok,
            detail + ", position noise variance " + fmt("%.3f", var) + ", " + std::to_string(adversarial) +
                "/60 adversarial");
  }

  return failures;
}
