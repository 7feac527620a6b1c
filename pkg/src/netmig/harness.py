"""Experiment presets, replication and aggregation, and result files."""

from __future__ import annotations

import csv
import enum
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from netmig import __version__, kernels
from netmig.dynamics import Cause, RunResult, SimConfig, Simulator
from netmig.economics import validate_params
from netmig.topology import Topology, TopologyConfig, generate_topology


@dataclass
class ExperimentSpec:
    name: str
    base: SimConfig
    arms: dict[str, dict] = field(default_factory=lambda: {"default": {}})
    n_profiles: int = 50
    n_replicas: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_profiles < 1 or self.n_replicas < 1:
            raise ValueError("n_profiles and n_replicas must be >= 1")

    def arm_config(self, arm: str) -> SimConfig:
        return self.base.with_values(**dict(self.arms[arm]))


def _sized(n: int) -> dict:
    return {"n_total": n, "n_transit": TopologyConfig.scaled(n).n_transit}


_DET = {"approach": "deterministic"}

PRESETS: dict[str, tuple[dict, dict[str, dict]]] = {
    "fig5": ({}, {"default": {}}),
    "fig6": (
        _DET,
        {
            "pce_only": {"technologies": ("pce",)},
            "sdn_only": {"technologies": ("sdn",)},
            "pce_sdn": {},
        },
    ),
    "fig7": (
        _DET,
        {
            "none": {},
            "max3": {"early_adopters": 3, "early_adopter_kind": "max"},
            "min3": {"early_adopters": 3, "early_adopter_kind": "min"},
            "min5": {"early_adopters": 5, "early_adopter_kind": "min"},
        },
    ),
    "fig8": (
        {},
        {
            "single_det": {"equi_cost": "single", "approach": "deterministic"},
            "single_prob": {"equi_cost": "single", "approach": "probabilistic"},
            "multi_det": {"equi_cost": "multi", "approach": "deterministic"},
            "multi_prob": {"equi_cost": "multi", "approach": "probabilistic"},
        },
    ),
    "fig9": ({**_DET, **_sized(150)}, {"eta_1.5": {"eta": 1.5}, "eta_1.0": {"eta": 1.0}}),
    "fig10": (_DET, {"single": {"equi_cost": "single"}, "multi": {"equi_cost": "multi"}}),
    "fig11": (_DET, {"n50": _sized(50), "n100": _sized(100), "n150": _sized(150)}),
    "fig12": (
        {},
        {"deterministic": {"approach": "deterministic"}, "probabilistic": {"approach": "probabilistic"}},
    ),
}


def preset(name: str, n_profiles: int = 50, n_replicas: int = 5, seed: int = 0,
           base: SimConfig | None = None) -> ExperimentSpec:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    overrides, arms = PRESETS[name]
    base = (base or SimConfig()).with_values(**overrides)
    return ExperimentSpec(name, base, {k: dict(v) for k, v in arms.items()}, n_profiles, n_replicas, seed)


def run_seeds(seed: int, profile: int, replica: int) -> tuple[int, int]:
    """(profile_seed, replica_seed). Arms share them, so arms are paired."""
    ps = int(np.random.SeedSequence([seed, profile]).generate_state(1)[0])
    rs = int(np.random.SeedSequence([seed, profile, replica, 1]).generate_state(1)[0])
    return ps, rs


@lru_cache(maxsize=8)
def cached_topology(cfg: TopologyConfig) -> Topology:
    return generate_topology(cfg)


def _one_run(cfg: SimConfig) -> RunResult:
    return Simulator(cfg, cached_topology(cfg.topology)).run()


@dataclass
class ArmResult:
    name: str
    config: SimConfig
    runs: list[RunResult]
    keys: list[tuple[int, int]]

    @property
    def counts(self) -> np.ndarray:
        """Shape ``(runs, steps, 3)``: pce, sdn, both counts."""
        return np.stack([r.series[:, 1:4] for r in self.runs])

    @property
    def steps(self) -> np.ndarray:
        return self.runs[0].series[:, 0]

    @property
    def mean(self) -> np.ndarray:
        return self.counts.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.counts.std(axis=0)

    def cause_percentages(self) -> dict[str, float]:
        tally = {c.value: 0 for c in Cause}
        for r in self.runs:
            for rec in r.records:
                tally[rec.cause.value] += 1
        total = sum(tally.values())
        if total == 0:
            return {k: 0.0 for k in tally}
        return {k: 100.0 * v / total for k, v in tally.items()}


@dataclass
class AggregateResult:
    spec: ExperimentSpec
    arms: dict[str, ArmResult]

    def __getitem__(self, arm: str) -> ArmResult:
        return self.arms[arm]


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> AggregateResult:
    """Run every arm over ``n_profiles x n_replicas`` paired seeds and aggregate."""
    configs = {arm: spec.arm_config(arm) for arm in spec.arms}
    bad = {arm: validate_params(c.econ) for arm, c in configs.items()}
    bad = {arm: v for arm, v in bad.items() if v}
    if bad:
        raise ValueError(f"invalid economic parameters in arms: {bad}")

    keys = [(p, r) for p in range(spec.n_profiles) for r in range(spec.n_replicas)]
    jobs = []
    for arm, cfg in configs.items():
        for p, r in keys:
            ps, rs = run_seeds(spec.seed, p, r)
            jobs.append(cfg.with_values(profile_seed=ps, replica_seed=rs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_run, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_one_run(c) for c in jobs]

    arms = {}
    for idx, (arm, cfg) in enumerate(configs.items()):
        chunk = results[idx * len(keys) : (idx + 1) * len(keys)]
        arms[arm] = ArmResult(arm, cfg, chunk, keys)
    return AggregateResult(spec, arms)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return list(value)
    return value


SERIES_HEADER = ("step", "pce_mean", "pce_std", "sdn_mean", "sdn_std", "both_mean", "both_std")
RECORD_HEADER = ("step", "island", "transition", "payoff", "cause")


def series_rows(arm: ArmResult):
    mean, std = arm.mean, arm.std
    for k, step in enumerate(arm.steps):
        yield (int(step), mean[k, 0], std[k, 0], mean[k, 1], std[k, 1], mean[k, 2], std[k, 2])


def record_rows(run: RunResult):
    for r in run.records:
        yield (r.step, r.island, f"{r.before}->{r.after}", r.payoff, r.cause.value)


def manifest(result: AggregateResult) -> dict:
    spec = result.spec
    return {
        "experiment": spec.name,
        "software": {"package": "netmig", "version": __version__, "kernel_backend": kernels.BACKEND},
        "n_profiles": spec.n_profiles,
        "n_replicas": spec.n_replicas,
        "seed": spec.seed,
        "arms": {
            name: {
                "config": {k: _jsonable(v) for k, v in arm.config.flat().items()},
                "runs": [
                    {"profile": p, "replica": r, "profile_seed": ps, "replica_seed": rs}
                    for (p, r), (ps, rs) in zip(arm.keys, (run_seeds(spec.seed, p, r) for p, r in arm.keys))
                ],
                "cause_percentages": arm.cause_percentages(),
            }
            for name, arm in result.arms.items()
        },
    }


def emit(result: AggregateResult, fmt: str, path: str | Path) -> list[Path]:
    """Write per-arm series, per-run raw files and a manifest under ``path``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, arm in result.arms.items():
        if fmt == "csv":
            f = out / f"{name}.csv"
            _write_csv(f, SERIES_HEADER, series_rows(arm))
            written.append(f)
            runs_dir = out / "runs"
            runs_dir.mkdir(exist_ok=True)
            for (p, r), run in zip(arm.keys, arm.runs):
                f = runs_dir / f"{name}__p{p:03d}_r{r:02d}.csv"
                _write_csv(f, RunResult.COLUMNS, run.series.tolist())
                g = runs_dir / f"{name}__p{p:03d}_r{r:02d}_records.csv"
                _write_csv(g, RECORD_HEADER, record_rows(run))
                written += [f, g]
        else:
            f = out / f"{name}.json"
            doc = {
                "arm": name,
                "series": [dict(zip(SERIES_HEADER, row)) for row in series_rows(arm)],
                "runs": [
                    {
                        "profile": p,
                        "replica": r,
                        "series": run.series.tolist(),
                        "records": [dict(zip(RECORD_HEADER, row)) for row in record_rows(run)],
                    }
                    for (p, r), run in zip(arm.keys, arm.runs)
                ],
            }
            f.write_text(json.dumps(doc, default=float, indent=1))
            written.append(f)
    causes = out / "causes.csv"
    _write_csv(
        causes,
        ("arm", *[c.value for c in Cause]),
        ((name, *arm.cause_percentages().values()) for name, arm in result.arms.items()),
    )
    m = out / "manifest.json"
    m.write_text(json.dumps(manifest(result), indent=1, sort_keys=True))
    return written + [causes, m]


def read_series_csv(path: str | Path) -> np.ndarray:
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(x) for x in row] for row in rows[1:]])
