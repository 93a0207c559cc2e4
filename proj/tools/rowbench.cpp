// rowbench: generate scenario suites, run the planner benchmark, export reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rowpomdp/io.hpp"
#include "rowpomdp/report.hpp"

namespace fs = std::filesystem;
using namespace rowpomdp;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<int> scenarios;
  std::optional<int> horizon;
  std::optional<double> deadline;
  std::optional<std::string> planners;
  std::optional<int> workers;
  std::string out = "rowbench_out";
  std::optional<std::string> config;
  std::optional<std::string> suite;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--scenarios", f.scenarios, "Number of scenarios");
  cmd->add_option("--horizon", f.horizon, "Decision steps per episode");
  cmd->add_option("--deadline", f.deadline, "Seconds allowed per decision");
  cmd->add_option("--planners", f.planners, "Comma-separated planners (fsm,qmdp,pomcp,despot,oracle)");
  cmd->add_option("--workers", f.workers, "Episodes run in parallel");
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--config", f.config, "YAML run configuration");
}

std::vector<std::string> split_planners(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string valid_planner_names() {
  std::string s;
  for (const auto& p : benchmark_planners()) s += p + ", ";
  return s + "oracle";
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config ? load_config(*f.config) : RunConfig{};
  if (f.seed) cfg.seed = *f.seed;
  if (f.scenarios) cfg.n_scenarios = *f.scenarios;
  if (f.horizon) cfg.scenario.horizon = *f.horizon;
  if (f.deadline) cfg.deadline = *f.deadline;
  if (f.workers) cfg.workers = *f.workers;
  if (f.planners) {
    cfg.planners = split_planners(*f.planners);
    for (const auto& p : cfg.planners) {
      if (p != "oracle" && std::find(benchmark_planners().begin(), benchmark_planners().end(), p) ==
                               benchmark_planners().end()) {
        throw UsageError("unknown planner '" + p + "'; valid names: " + valid_planner_names());
      }
    }
  }
  cfg.sync_echoes();
  cfg.validate();
  return cfg;
}

SuiteFile make_suite(const RunConfig& cfg) {
  return {cfg.seed, cfg.scenario, generate_suite(cfg.seed, cfg.n_scenarios, cfg.scenario)};
}

int cmd_generate(const Flags& f) {
  const RunConfig cfg = resolve(f);
  const SuiteFile suite = make_suite(cfg);
  const fs::path path = fs::path(f.out) / "suite.json";
  write_suite(path, suite);
  int adv = 0;
  for (const auto& s : suite.scenarios) adv += s.adversarial ? 1 : 0;
  std::printf("%s: %d scenarios, %d adversarial\n", path.string().c_str(), static_cast<int>(suite.scenarios.size()),
              adv);
  return 0;
}

int cmd_run(const Flags& f) {
  RunConfig cfg = resolve(f);
  const fs::path out(f.out);
  std::vector<Scenario> scenarios;
  if (f.suite) {
    SuiteFile suite = read_suite(*f.suite);
    scenarios = std::move(suite.scenarios);
    cfg.scenario = suite.config;
    if (f.horizon) cfg.scenario.horizon = *f.horizon;
    cfg.sync_echoes();
    cfg.validate();
  } else {
    scenarios = make_suite(cfg).scenarios;
  }
  const auto episodes = run_suite(scenarios, cfg);
  write_episodes(out / "episodes.jsonl", episodes);
  std::vector<std::string> planners;
  for (const auto& p : cfg.planners) planners.push_back(p);
  write_text(out / "metrics.csv", metrics_csv(episodes, planners));
  write_text(out / "run_config.yaml", config_to_yaml(cfg));
  int failed = 0;
  for (const auto& e : episodes) failed += e.failed() ? 1 : 0;
  std::printf("%d episodes over %d scenarios written to %s", static_cast<int>(episodes.size()),
              static_cast<int>(scenarios.size()), (out / "episodes.jsonl").string().c_str());
  if (failed > 0) std::printf(" (%d failed)", failed);
  std::printf("\n");
  return 0;
}

int cmd_report(const Flags& f, const std::optional<std::string>& logs) {
  const fs::path out(f.out);
  const fs::path log_path = logs ? fs::path(*logs) : out / "episodes.jsonl";
  const auto episodes = read_episodes(log_path);
  std::vector<std::string> planners = f.planners ? split_planners(*f.planners) : planners_in(episodes);
  double deadline = f.deadline.value_or(RunConfig{}.deadline);
  if (!f.deadline && f.config) deadline = load_config(*f.config).deadline;
  const auto written = export_reports(episodes, planners, deadline, out);
  std::cout << summary_table(compute_metrics(episodes, planners));
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Right-of-way planner benchmark"};
  app.require_subcommand(1);
  Flags f;
  std::optional<std::string> logs;
  auto* gen = app.add_subcommand("generate", "Generate a scenario suite");
  auto* run = app.add_subcommand("run", "Run planners over a suite and log episodes");
  auto* rep = app.add_subcommand("report", "Export metrics and figure data from episode logs");
  for (auto* c : {gen, run, rep}) add_common(c, f);
  run->add_option("--suite", f.suite, "Suite JSON from 'generate' (default: generate from --seed)");
  rep->add_option("--logs", logs, "Episode log (default: <out>/episodes.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*gen) return cmd_generate(f);
    if (*run) return cmd_run(f);
    return cmd_report(f, logs);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsageError;
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
}
