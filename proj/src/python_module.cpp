#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rowpomdp/harness.hpp"
#include "rowpomdp/io.hpp"
#include "rowpomdp/report.hpp"

namespace py = pybind11;
using namespace rowpomdp;

namespace {

SubsetFilter parse_subset(const std::string& s) {
  if (s == "all") return SubsetFilter::All;
  if (s == "adversarial") return SubsetFilter::Adversarial;
  if (s == "non_adversarial") return SubsetFilter::NonAdversarial;
  throw std::invalid_argument("subset must be all, adversarial or non_adversarial");
}

py::dict metrics_dict(const PlannerMetrics& m) {
  py::dict d;
  d["planner"] = m.planner;
  d["episodes"] = m.episodes;
  d["failed_episodes"] = m.failed_episodes;
  d["collision_free_rate"] = m.collision_free_rate;
  d["action_accuracy"] = m.action_accuracy;
  d["intent_accuracy"] = m.intent_accuracy;
  d["flow_efficiency"] = m.flow_efficiency;
  d["mean_completion_time"] = m.mean_completion_time;
  d["throughput"] = m.throughput;
  d["mean_reward"] = m.mean_reward;
  d["near_miss_recovery"] = m.near_miss_recovery;
  d["mean_processing_time"] = m.mean_processing_time;
  d["real_time_fraction"] = m.real_time_fraction;
  return d;
}

std::vector<std::string> actions_of(const EpisodeResult& e, bool oracle) {
  std::vector<std::string> out;
  for (const auto& s : e.steps) out.emplace_back(to_string(oracle ? s.oracle_action : s.action));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Right-of-way intersection POMDP simulator and planners";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<Action>(m, "Action").value("Stop", Action::Stop).value("Yield", Action::Yield).value("Go", Action::Go);
  py::enum_<Intent>(m, "Intent")
      .value("Straight", Intent::Straight)
      .value("Left", Intent::Left)
      .value("Right", Intent::Right);
  py::enum_<Approach>(m, "Approach")
      .value("North", Approach::North)
      .value("East", Approach::East)
      .value("South", Approach::South)
      .value("West", Approach::West);

  m.def("paths_conflict",
        [](Approach a, Intent ia, Approach b, Intent ib) { return paths_conflict({a, ia}, {b, ib}); });
  m.def("right_neighbor", &right_neighbor);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("intent_weights", &ScenarioConfig::intent_weights)
      .def_readwrite("pedestrian_prob_min", &ScenarioConfig::pedestrian_prob_min)
      .def_readwrite("pedestrian_prob_max", &ScenarioConfig::pedestrian_prob_max)
      .def_readwrite("position_noise_sigma", &ScenarioConfig::position_noise_sigma)
      .def_readwrite("occlusion_prob", &ScenarioConfig::occlusion_prob)
      .def_readwrite("dropout_prob", &ScenarioConfig::dropout_prob)
      .def_readwrite("slippery_prob", &ScenarioConfig::slippery_prob)
      .def_readwrite("adversarial_fraction", &ScenarioConfig::adversarial_fraction)
      .def_readwrite("horizon", &ScenarioConfig::horizon)
      .def("validate", &ScenarioConfig::validate);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("id", &Scenario::id)
      .def_readonly("seed", &Scenario::seed)
      .def_readonly("adversarial", &Scenario::adversarial)
      .def_readonly("slippery", &Scenario::slippery)
      .def_property_readonly("n_others", [](const Scenario& s) { return s.others.size(); })
      .def("to_json", [](const Scenario& s) { return Json(s).dump(); })
      .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; });

  m.def("generate_suite", &generate_suite, py::arg("seed"), py::arg("n") = 60,
        py::arg("config") = ScenarioConfig{});

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("n_scenarios", &RunConfig::n_scenarios)
      .def_readwrite("workers", &RunConfig::workers)
      .def_readwrite("planners", &RunConfig::planners)
      .def_readwrite("deadline", &RunConfig::deadline)
      .def_readwrite("n_particles", &RunConfig::n_particles)
      .def_readwrite("scenario", &RunConfig::scenario)
      .def("sync", &RunConfig::sync_echoes)
      .def("validate", &RunConfig::validate)
      .def("to_yaml", &config_to_yaml);

  m.def("config_from_yaml", &config_from_yaml);
  m.def("load_config", &load_config);

  py::class_<EpisodeResult>(m, "Episode")
      .def_readonly("scenario_id", &EpisodeResult::scenario_id)
      .def_readonly("planner", &EpisodeResult::planner)
      .def_readonly("adversarial", &EpisodeResult::adversarial)
      .def_readonly("collision", &EpisodeResult::collision)
      .def_readonly("total_reward", &EpisodeResult::total_reward)
      .def_readonly("error", &EpisodeResult::error)
      .def_property_readonly("outcome", &EpisodeResult::outcome)
      .def_property_readonly("decisions", &EpisodeResult::decisions)
      .def_property_readonly("actions", [](const EpisodeResult& e) { return actions_of(e, false); })
      .def_property_readonly("oracle_actions", [](const EpisodeResult& e) { return actions_of(e, true); })
      .def("to_json", [](const EpisodeResult& e) { return episode_to_json(e).dump(); });

  m.def("run_suite", &run_suite, py::arg("scenarios"), py::arg("config"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "compute_metrics",
      [](const std::vector<EpisodeResult>& eps, const std::vector<std::string>& planners, const std::string& subset) {
        py::list out;
        for (const auto& pm : compute_metrics(eps, planners, parse_subset(subset))) out.append(metrics_dict(pm));
        return out;
      },
      py::arg("episodes"), py::arg("planners"), py::arg("subset") = "all");
  m.def("metrics_csv", &metrics_csv);
  m.def("accuracy_heatmap_csv", &accuracy_heatmap_csv);
  m.def("trajectories_json", &trajectories_json);
  m.def("export_reports", &export_reports, py::arg("episodes"), py::arg("planners"), py::arg("deadline"),
        py::arg("directory"));
}
