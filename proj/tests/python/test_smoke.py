import json
import os
import subprocess
from pathlib import Path

import pytest

import rowpomdp as rp

CONFIGS = Path(os.environ.get("ROWPOMDP_CONFIGS", Path(__file__).resolve().parents[2] / "configs"))
ROWBENCH = os.environ.get("ROWBENCH", "")


def small_config(planners=("fsm", "qmdp"), workers=1):
    cfg = rp.RunConfig()
    cfg.planners = list(planners)
    cfg.workers = workers
    return cfg


def test_suite_is_deterministic_with_a_third_adversarial():
    a = rp.generate_suite(42, 60)
    b = rp.generate_suite(42, 60)
    assert a == b
    assert sum(s.adversarial for s in a) == 20
    assert all(s.adversarial for s in a[:20])
    first = json.loads(a[0].to_json())
    assert first["seed"] == a[0].seed


def test_conflicts_are_symmetric():
    for a in rp.Approach.__members__.values():
        for ia in rp.Intent.__members__.values():
            for b in rp.Approach.__members__.values():
                for ib in rp.Intent.__members__.values():
                    assert rp.paths_conflict(a, ia, b, ib) == rp.paths_conflict(b, ib, a, ia)


def test_run_and_metrics():
    cfg = small_config()
    episodes = rp.run_suite(rp.generate_suite(3, 6), cfg)
    # The oracle reference run is logged alongside the requested planners.
    assert len(episodes) == 18
    assert {e.planner for e in episodes} == {"fsm", "qmdp", "oracle"}
    for e in episodes:
        assert 1 <= e.decisions <= 12
        assert len(e.actions) == len(e.oracle_actions) == e.decisions
        assert e.outcome in {"collision", "cleared", "timeout"}
    for m in rp.compute_metrics(episodes, cfg.planners):
        assert 0.0 <= m["collision_free_rate"] <= 1.0
        assert 0.0 <= m["action_accuracy"] <= 1.0
        assert m["episodes"] == 6


def test_reports_do_not_depend_on_workers():
    suite = rp.generate_suite(5, 6)
    one = rp.run_suite(suite, small_config(("fsm", "pomcp"), workers=1))
    three = rp.run_suite(suite, small_config(("fsm", "pomcp"), workers=3))
    planners = ["fsm", "pomcp"]
    assert rp.metrics_csv(one, planners) == rp.metrics_csv(three, planners)
    assert rp.trajectories_json(one, planners) == rp.trajectories_json(three, planners)


def test_config_files():
    cfg = rp.load_config(str(CONFIGS / "default.yaml"))
    assert cfg.to_yaml() == rp.RunConfig().to_yaml()
    with pytest.raises(ValueError, match="pomcp.bogus"):
        rp.config_from_yaml("pomcp:\n  bogus: 1\n")
    bad = rp.ScenarioConfig()
    bad.occlusion_prob = 2.0
    with pytest.raises(ValueError):
        bad.validate()
    with pytest.raises(ValueError):
        rp.generate_suite(1, 0)


def test_export_reports(tmp_path):
    cfg = small_config()
    episodes = rp.run_suite(rp.generate_suite(2, 3), cfg)
    written = rp.export_reports(episodes, cfg.planners, cfg.deadline, str(tmp_path / "out"))
    names = {Path(p).name for p in written}
    assert {"metrics.csv", "accuracy_heatmap.csv", "trajectories.json", "radar.svg"} <= names


@pytest.mark.skipif(not ROWBENCH, reason="rowbench not built")
def test_cli_pipeline_and_exit_codes(tmp_path):
    def run(*args):
        return subprocess.run([ROWBENCH, *args], capture_output=True, text=True)

    assert run("generate", "--seed", "7", "--scenarios", "6", "--out", str(tmp_path / "g")).returncode == 0
    outputs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        r = run("run", "--suite", str(tmp_path / "g" / "suite.json"), "--planners", "fsm,qmdp",
                "--workers", workers, "--out", str(out))
        assert r.returncode == 0, r.stderr
        assert run("report", "--logs", str(out / "episodes.jsonl"), "--out", str(out)).returncode == 0
        outputs.append((out / "metrics.csv").read_bytes() + (out / "accuracy_heatmap.csv").read_bytes())
    assert outputs[0] == outputs[1]
    assert run("run", "--horizon", "-3").returncode == 1
    assert run("frobnicate").returncode == 1
    assert run("report", "--logs", str(tmp_path / "missing"), "--out", str(tmp_path / "r")).returncode == 2
