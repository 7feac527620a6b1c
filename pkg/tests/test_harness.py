import csv
import json

import numpy as np
import pytest

from netmig.dynamics import SimConfig
from netmig.harness import (
    PRESETS,
    ExperimentSpec,
    emit,
    preset,
    read_series_csv,
    run_experiment,
)

FAST = SimConfig(t_max=6, approach="deterministic")


@pytest.fixture(scope="module")
def small_result():
    spec = preset("fig6", n_profiles=2, n_replicas=2, seed=3, base=FAST)
    return run_experiment(spec)


def test_fig6_arms():
    assert set(preset("fig6").arms) == {"pce_only", "sdn_only", "pce_sdn"}


def test_every_preset_is_valid():
    for name in PRESETS:
        spec = preset(name, 1, 1)
        for arm in spec.arms:
            spec.arm_config(arm)


def test_single_run_aggregate():
    spec = ExperimentSpec("one", FAST, n_profiles=1, n_replicas=1)
    res = run_experiment(spec)
    arm = res["default"]
    assert (arm.std == 0).all()
    assert (arm.mean == arm.runs[0].series[:, 1:4]).all()


def test_invalid_arm_aborts():
    spec = ExperimentSpec("bad", FAST, arms={"ok": {}, "broken": {"c_sdn": 0.25}}, n_profiles=1, n_replicas=1)
    with pytest.raises(ValueError, match="broken"):
        run_experiment(spec)


def test_bad_counts():
    with pytest.raises(ValueError):
        ExperimentSpec("x", FAST, n_profiles=0)


def test_arms_are_paired(small_result):
    a, b = small_result["pce_only"], small_result["sdn_only"]
    assert [r.config.profile_seed for r in a.runs] == [r.config.profile_seed for r in b.runs]
    seeds = {r.config.profile_seed for r in a.runs}
    assert len(seeds) == 2


def test_aggregate_bounds(small_result):
    for arm in small_result.arms.values():
        c = arm.counts
        assert (arm.mean >= c.min(axis=0) - 1e-12).all()
        assert (arm.mean <= c.max(axis=0) + 1e-12).all()
        pct = arm.cause_percentages()
        assert sum(pct.values()) == pytest.approx(100.0, abs=0.01)


def test_csv_round_trip_and_reaggregation(tmp_path, small_result):
    emit(small_result, "csv", tmp_path)
    for name, arm in small_result.arms.items():
        table = read_series_csv(tmp_path / f"{name}.csv")
        assert table[:, 0].tolist() == arm.steps.tolist()
        assert table[:, [1, 3, 5]] == pytest.approx(arm.mean)
        assert table[:, [2, 4, 6]] == pytest.approx(arm.std)
        # recompute the mean from the per-run files only
        raw = [read_series_csv(p) for p in sorted((tmp_path / "runs").glob(f"{name}__p*_r??.csv"))]
        assert len(raw) == len(arm.runs)
        assert np.mean([r[:, 1:4] for r in raw], axis=0) == pytest.approx(table[:, [1, 3, 5]])


def test_manifest_complete(tmp_path, small_result):
    emit(small_result, "csv", tmp_path)
    doc = json.loads((tmp_path / "manifest.json").read_text())
    keys = set(FAST.flat())
    for name, arm in doc["arms"].items():
        assert set(arm["config"]) == keys
        assert len(arm["runs"]) == 4
    assert doc["software"]["version"]


def test_json_agrees_with_csv(tmp_path, small_result):
    emit(small_result, "csv", tmp_path / "c")
    emit(small_result, "json", tmp_path / "j")
    for name in small_result.arms:
        table = read_series_csv(tmp_path / "c" / f"{name}.csv")
        doc = json.loads((tmp_path / "j" / f"{name}.json").read_text())
        rows = np.array([[r[k] for k in ("step", "pce_mean", "pce_std", "sdn_mean", "sdn_std", "both_mean", "both_std")]
                         for r in doc["series"]])
        assert (rows == table).all()
        with open(tmp_path / "c" / "runs" / f"{name}__p000_r00_records.csv") as fh:
            recs = list(csv.DictReader(fh))
        assert [r["island"] for r in recs] == [str(r["island"]) for r in doc["runs"][0]["records"]]


def test_unwritable_path(tmp_path, small_result):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit(small_result, "csv", blocker / "sub")


def test_parallel_matches_serial(tmp_path):
    spec = preset("fig10", n_profiles=2, n_replicas=1, seed=9, base=FAST)
    emit(run_experiment(spec, workers=1), "csv", tmp_path / "a")
    emit(run_experiment(spec, workers=2), "csv", tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
