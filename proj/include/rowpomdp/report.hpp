#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rowpomdp/harness.hpp"

namespace rowpomdp {

/// Planners present in `episodes`, in benchmark order, then any others by
/// name. The oracle is left out unless it is the only one.
std::vector<std::string> planners_in(const std::vector<EpisodeResult>& episodes);

// Deterministic outputs: identical for identical inputs, whatever the
// worker count or machine load.

/// One row per (subset, planner): rates as percentages, times in seconds.
std::string metrics_csv(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners);
/// Per-scenario action accuracy per planner, adversarial scenarios first.
std::string accuracy_heatmap_csv(const std::vector<EpisodeResult>& episodes,
                                 const std::vector<std::string>& planners);
/// Per-scenario action sequences, with the oracle-driven run as the
/// ground-truth row.
std::string trajectories_json(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners);

// Wall-clock dependent outputs.

std::string timing_csv(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners);
/// Every decision's compute time against the deadline.
std::string processing_time_csv(const std::vector<EpisodeResult>& episodes, const std::vector<std::string>& planners,
                                 double deadline);
std::string radar_csv(const std::vector<PlannerMetrics>& metrics);
std::string radar_svg(const std::vector<PlannerMetrics>& metrics);

/// Fixed-width table of the headline metrics for a terminal.
std::string summary_table(const std::vector<PlannerMetrics>& metrics);

/// Writes every report file into `dir` and returns their paths.
std::vector<std::filesystem::path> export_reports(const std::vector<EpisodeResult>& episodes,
                                                  const std::vector<std::string>& planners, double deadline,
                                                  const std::filesystem::path& dir);

}  // namespace rowpomdp
