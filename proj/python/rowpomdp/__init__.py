"""Right-of-way intersection POMDP benchmark."""

from ._core import (
    Action,
    Approach,
    Episode,
    Intent,
    IoError,
    RunConfig,
    Scenario,
    ScenarioConfig,
    accuracy_heatmap_csv,
    compute_metrics,
    config_from_yaml,
    export_reports,
    generate_suite,
    load_config,
    metrics_csv,
    paths_conflict,
    right_neighbor,
    run_suite,
    trajectories_json,
)

__all__ = [
    "Action",
    "Approach",
    "Episode",
    "Intent",
    "IoError",
    "RunConfig",
    "Scenario",
    "ScenarioConfig",
    "accuracy_heatmap_csv",
    "compute_metrics",
    "config_from_yaml",
    "export_reports",
    "generate_suite",
    "load_config",
    "metrics_csv",
    "paths_conflict",
    "right_neighbor",
    "run_suite",
    "trajectories_json",
]
