#include "rowpomdp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "rowpomdp/io.hpp"

namespace rowpomdp {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pct(double rate) { return fmt("%.2f", 100.0 * rate); }

const char* subset_name(SubsetFilter f) {
  switch (f) {
    case SubsetFilter::Adversarial:
      return "adversarial";
    case SubsetFilter::NonAdversarial:
      return "non_adversarial";
    case SubsetFilter::All:
      break;
  }
  return "all";
}

bool has_subset(const std::vector<EpisodeResult>& episodes, SubsetFilter f) {
  return std::any_of(episodes.begin(), episodes.end(), [&](const EpisodeResult& e) {
    return f == SubsetFilter::All || e.adversarial == (f == SubsetFilter::Adversarial);
  });
}

// Scenario ids with their adversarial flag, adversarial first.
std::vector<std::pair<int, bool>> scenario_rows(const std::vector<EpisodeResult>& episodes) {
  std::map<int, bool> ids;
  for (const auto& e : episodes) ids[e.scenario_id] = e.adversarial;
  std::vector<std::pair<int, bool>> rows(ids.begin(), ids.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second && !b.second; });
  return rows;
}

const EpisodeResult* find_episode(const std::vector<EpisodeResult>& episodes, int scenario, const std::string& planner) {
  for (const auto& e : episodes) {
    if (e.scenario_id == scenario && e.planner == planner) return &e;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> planners_in(const std::vector<EpisodeResult>& episodes) {
  std::vector<std::string> seen;
  for (const auto& e : episodes) {
    if (std::find(seen.begin(), seen.end(), e.planner) == seen.end()) seen.push_back(e.planner);
  }
  std::vector<std::string> out;
  for (const auto& p : benchmark_planners()) {
    if (std::find(seen.begin(), seen.end(), p) != seen.end()) out.push_back(p);
  }
  std::vector<std::string> rest;
  for (const auto& p : seen) {
    if (p != "oracle" && std::find(out.begin(), out.end(), p) == out.end()) rest.push_back(p);
  }
  std::sort(rest.begin(), rest.end());
  out.insert(out.end(), rest.begin(), rest.end());
  if (out.empty() && !seen.empty()) out.push_back("oracle");
  return out;
}

std::string metrics_csv(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners) {
  std::string out =
      "subset,planner,episodes,failed_episodes,action_accuracy_pct,intent_accuracy_pct,collision_free_pct,"
      "flow_efficiency_pct,avg_time_to_completion_s,throughput_veh_per_s,near_miss_recovery_pct,mean_reward\n";
  for (SubsetFilter f : {SubsetFilter::All, SubsetFilter::Adversarial, SubsetFilter::NonAdversarial}) {
    if (!has_subset(episodes, f)) continue;
    for (const auto& m : compute_metrics(episodes, planners, f)) {
      if (m.episodes == 0) continue;
      out += std::string(subset_name(f)) + "," + m.planner + "," + std::to_string(m.episodes) + "," +
             std::to_string(m.failed_episodes) + "," + pct(m.action_accuracy) + "," + pct(m.intent_accuracy) + "," +
             pct(m.collision_free_rate) + "," + pct(m.flow_efficiency) + "," + fmt("%.4f", m.mean_completion_time) +
             "," + fmt("%.6f", m.throughput) + "," + pct(m.near_miss_recovery) + "," + fmt("%.4f", m.mean_reward) +
             "\n";
    }
  }
  return out;
}

std::string accuracy_heatmap_csv(const std::vector<EpisodeResult>& episodes,
                                 const std::vector<std::string>& planners) {
  std::string out = "row,scenario_id,adversarial";
  for (const auto& p : planners) out += "," + p;
  out += "\n";
  int row = 0;
  for (const auto& [id, adv] : scenario_rows(episodes)) {
    out += std::to_string(++row) + "," + std::to_string(id) + "," + (adv ? "1" : "0");
    for (const auto& p : planners) {
      const EpisodeResult* e = find_episode(episodes, id, p);
      out += ",";
      if (e != nullptr && e->decisions() > 0) {
        out += pct(static_cast<double>(e->action_correct()) / e->decisions());
      }
    }
    out += "\n";
  }
  return out;
}

std::string trajectories_json(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners) {
  auto actions = [](const EpisodeResult& e) {
    Json a = Json::array();
    for (const auto& r : e.steps) a.push_back(to_string(r.action));
    return a;
  };
  Json root = Json::array();
  for (const auto& [id, adv] : scenario_rows(episodes)) {
    Json s{{"scenario_id", id}, {"adversarial", adv}};
    if (const EpisodeResult* o = find_episode(episodes, id, "oracle")) s["ground_truth"] = actions(*o);
    Json rows = Json::object();
    for (const auto& p : planners) {
      const EpisodeResult* e = find_episode(episodes, id, p);
      if (e == nullptr) continue;
      Json oracle_actions = Json::array();
      for (const auto& r : e->steps) oracle_actions.push_back(to_string(r.oracle_action));
      rows[p] = {{"actions", actions(*e)}, {"oracle_actions", oracle_actions}, {"outcome", e->outcome()}};
    }
    s["planners"] = rows;
    root.push_back(s);
  }
  return root.dump(1) + "\n";
}

std::string timing_csv(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners) {
  std::string out = "planner,decisions,mean_processing_time_s,max_processing_time_s,real_time_fraction\n";
  for (const auto& m : compute_metrics(episodes, planners)) {
    long n = 0;
    double worst = 0.0;
    for (const auto& e : episodes) {
      if (e.planner != m.planner) continue;
      n += e.decisions();
      for (const auto& r : e.steps) worst = std::max(worst, r.compute_time);
    }
    out += m.planner + "," + std::to_string(n) + "," + fmt("%.7f", m.mean_processing_time) + "," +
           fmt("%.7f", worst) + "," + fmt("%.4f", m.real_time_fraction) + "\n";
  }
  return out;
}

std::string processing_time_csv(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners,
                                 double deadline) {
  std::string out = "planner,scenario_id,timestep,compute_time_s,deadline_s,deadline_met\n";
  for (const auto& p : planners) {
    for (const auto& e : episodes) {
      if (e.planner != p) continue;
      for (const auto& r : e.steps) {
        out += p + "," + std::to_string(e.scenario_id) + "," + std::to_string(r.timestep) + "," +
               fmt("%.7f", r.compute_time) + "," + fmt("%.4f", deadline) + "," + (r.deadline_met ? "1" : "0") + "\n";
      }
    }
  }
  return out;
}

std::string radar_csv(const std::vector<PlannerMetrics>& metrics) {
  const auto& axes = radar_axes();
  std::string out = "planner";
  for (const auto& a : axes) out += "," + a.name;
  out += "\n";
  const auto norm = normalize_for_radar(metrics);
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    out += metrics[i].planner;
    for (double v : norm[i]) out += "," + fmt("%.4f", v);
    out += "\n";
  }
  return out;
}

std::string radar_svg(const std::vector<PlannerMetrics>& metrics) {
  static const char* kColors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
  const auto& axes = radar_axes();
  const auto norm = normalize_for_radar(metrics);
  const double cx = 260, cy = 250, r = 170;
  const double k = static_cast<double>(axes.size());
  auto point = [&](std::size_t i, double v) {
    const double a = -M_PI / 2 + 2 * M_PI * static_cast<double>(i) / k;
    return std::make_pair(cx + r * v * std::cos(a), cy + r * v * std::sin(a));
  };
  std::string out =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"520\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n<rect width=\"640\" height=\"520\" fill=\"white\"/>\n";
  for (double ring : {0.25, 0.5, 0.75, 1.0}) {
    out += "<polygon fill=\"none\" stroke=\"#ccc\" points=\"";
    for (std::size_t i = 0; i < axes.size(); ++i) {
      auto [x, y] = point(i, ring);
      out += fmt("%.1f", x) + "," + fmt("%.1f", y) + " ";
    }
    out += "\"/>\n";
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    auto [x, y] = point(i, 1.0);
    auto [lx, ly] = point(i, 1.12);
    out += "<line x1=\"" + fmt("%.1f", cx) + "\" y1=\"" + fmt("%.1f", cy) + "\" x2=\"" + fmt("%.1f", x) + "\" y2=\"" +
           fmt("%.1f", y) + "\" stroke=\"#ccc\"/>\n";
    out += "<text x=\"" + fmt("%.1f", lx) + "\" y=\"" + fmt("%.1f", ly) + "\" text-anchor=\"middle\">" +
           axes[i].name + "</text>\n";
  }
  for (std::size_t p = 0; p < metrics.size(); ++p) {
    const char* color = kColors[p % 6];
    out += "<polygon fill=\"" + std::string(color) + "\" fill-opacity=\"0.15\" stroke=\"" + color +
           "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < axes.size(); ++i) {
      auto [x, y] = point(i, norm[p][i]);
      out += fmt("%.1f", x) + "," + fmt("%.1f", y) + " ";
    }
    out += "\"/>\n";
    out += "<text x=\"540\" y=\"" + fmt("%.0f", 40.0 + 18.0 * static_cast<double>(p)) + "\" fill=\"" + color + "\">" +
           metrics[p].planner + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string summary_table(const std::vector<PlannerMetrics>& metrics) {
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %9s %9s %9s %9s %10s %10s %9s %8s\n", "planner", "action%", "intent%",
                "nocoll%", "flow%", "complete_s", "proc_s", "veh/s", "rt_frac");
  std::string out = line;
  for (const auto& m : metrics) {
    std::snprintf(line, sizeof line, "%-8s %9.1f %9.1f %9.1f %9.1f %10.2f %10.5f %9.3f %8.3f\n", m.planner.c_str(),
                  100 * m.action_accuracy, 100 * m.intent_accuracy, 100 * m.collision_free_rate,
                  100 * m.flow_efficiency, m.mean_completion_time, m.mean_processing_time, m.throughput,
                  m.real_time_fraction);
    out += line;
  }
  return out;
}

std::vector<std::filesystem::path> export_reports(const std::vector<EpisodeResult>& episodes,
                                                  const std::vector<std::string>& planners, double deadline,
                                                  const std::filesystem::path& dir) {
  const auto metrics = compute_metrics(episodes, planners);
  const std::vector<std::pair<std::string, std::string>> files{
      {"metrics.csv", metrics_csv(episodes, planners)},
      {"accuracy_heatmap.csv", accuracy_heatmap_csv(episodes, planners)},
      {"trajectories.json", trajectories_json(episodes, planners)},
      {"timing.csv", timing_csv(episodes, planners)},
      {"processing_time.csv", processing_time_csv(episodes, planners, deadline)},
      {"radar.csv", radar_csv(metrics)},
      {"radar.svg", radar_svg(metrics)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, text] : files) {
    write_text(dir / name, text);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace rowpomdp
