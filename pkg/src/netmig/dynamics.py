"""Time-stepped migration simulation."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, fields, replace

import numpy as np

from netmig import economics as econ
from netmig.economics import EconParams, StrategySet
from netmig.influence import (
    Approach,
    InfluenceConfig,
    all_coefficients,
    estimate_states,
    estimate_traffic,
)
from netmig.routing import (
    EquiCost,
    RoutingPrefs,
    RoutingTable,
    TrafficState,
    provision,
    routing_table,
    single_path_choices,
)
from netmig.topology import Topology, TopologyConfig, generate_topology

log = logging.getLogger(__name__)

_ARRIVAL_TAG = 0xA7
_SWEEP_TAG = 0x5E


class Cause(str, enum.Enum):
    OPEX_ONLY = "opex_only"
    TRAFFIC_ONLY = "traffic_only"
    BOTH = "both"


@dataclass(frozen=True)
class SimConfig:
    """Everything one run needs. Field names double as config-file keys."""

    n_total: int = 100
    n_seed: int = 16
    n_transit: int = 39
    stub_attach_degree: int = 2
    transit_attach_degree: int = 2
    topology_seed: int = 7
    relevant_radius: int = 5
    approach: Approach = Approach.PROBABILISTIC
    mc_samples: int = 16
    equi_cost: EquiCost = EquiCost.MULTI
    arrival_rate: float = 0.05
    t_max: int = 200
    max_sweeps: int = 10
    early_adopters: int = 0
    early_adopter_kind: str = "max"
    technologies: tuple[str, ...] = ("pce", "sdn")
    profile_seed: int = 0
    replica_seed: int = 0
    econ: EconParams = field(default_factory=EconParams)

    @property
    def topology(self) -> TopologyConfig:
        return TopologyConfig(
            n_total=self.n_total,
            n_seed=self.n_seed,
            n_transit=self.n_transit,
            stub_attach_degree=self.stub_attach_degree,
            transit_attach_degree=self.transit_attach_degree,
            rng_seed=self.topology_seed,
        )

    @property
    def influence(self) -> InfluenceConfig:
        return InfluenceConfig(self.relevant_radius, Approach(self.approach), self.mc_samples)

    @property
    def routing(self) -> RoutingPrefs:
        return RoutingPrefs(EquiCost(self.equi_cost))

    def flat(self) -> dict:
        """Field -> value with the economic coefficients inlined."""
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "econ"}
        out.update(self.econ.as_dict())
        return out

    def with_values(self, **kw) -> "SimConfig":
        """Copy with flat overrides; economic coefficients may be given by name."""
        econ_names = {f.name for f in fields(EconParams)}
        econ_kw = {k: kw.pop(k) for k in list(kw) if k in econ_names}
        unknown = set(kw) - {f.name for f in fields(self)}
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, econ=replace(self.econ, **econ_kw), **kw)


@dataclass
class MigrationRecord:
    island: int
    step: int
    before: StrategySet
    after: StrategySet
    payoff: float
    traffic_before: float
    traffic_after: float
    estimated_traffic: float
    opex_before: float
    opex_after: float
    cause: Cause | None = None


_EPS = 1e-9


def classify_cause(r: MigrationRecord) -> Cause:
    """Why a migration paid off, from realized traffic and OpEx."""
    scale = max(1.0, abs(r.traffic_before))
    d_traffic = r.traffic_after - r.traffic_before
    d_opex = r.opex_after - r.opex_before
    gained = d_traffic > _EPS * scale
    saved = d_opex < -_EPS * scale
    if gained and saved:
        return Cause.BOTH
    if gained:
        return Cause.TRAFFIC_ONLY
    if saved:
        return Cause.OPEX_ONLY
    raise AssertionError(
        f"island {r.island} migrated at step {r.step} without gaining traffic or saving OpEx"
    )


@dataclass
class SimState:
    t: int
    states: np.ndarray
    traffic: TrafficState
    history: list[MigrationRecord] = field(default_factory=list)


@dataclass
class RunResult:
    config: SimConfig
    series: np.ndarray  # columns: step, pce_count, sdn_count, both_count, unroutable
    records: list[MigrationRecord]
    final_states: np.ndarray
    sweep_limit_hits: int = 0

    COLUMNS = ("step", "pce_count", "sdn_count", "both_count", "unroutable")


class Simulator:
    """One run: topology, routing table and seeded streams bound to a config."""

    def __init__(self, config: SimConfig, topology: Topology | None = None):
        bad = econ.validate_params(config.econ)
        if bad:
            raise ValueError(f"invalid economic parameters, violated: {', '.join(bad)}")
        self.config = config
        self.topology = topology or generate_topology(config.topology)
        self.table: RoutingTable = routing_table(self.topology)
        self.prefs = config.routing
        self.icfg = config.influence
        self.choice = single_path_choices(self.table.n_pairs, config.replica_seed)
        self.arrival_rng = np.random.default_rng([config.profile_seed, _ARRIVAL_TAG])
        self.transits = np.array(self.topology.transits, dtype=np.int64)
        self.sweep_limit_hits = 0

    def initial_state(self) -> SimState:
        states = np.zeros((self.topology.n, 2), dtype=np.uint8)
        for i in early_adopters(self.topology, self.config.early_adopters, self.config.early_adopter_kind):
            states[i, 0] = 1
        demands = np.ones(self.table.n_pairs)
        return SimState(0, states, self.provision(demands, states))

    def provision(self, demands: np.ndarray, states: np.ndarray) -> TrafficState:
        pce = np.ascontiguousarray(states[:, 0])
        return provision(self.topology, demands, pce, self.prefs, self.choice, self.table)

    def arrivals(self, state: SimState, rate: float | None = None) -> np.ndarray:
        rate = self.config.arrival_rate if rate is None else rate
        if rate < 0:
            raise ValueError("arrival rate must be >= 0")
        if rate == 0:
            return state.traffic.demands
        return state.traffic.demands + self.arrival_rng.poisson(rate, self.table.n_pairs)

    def agent_decide(self, state: SimState, i: int, coefficients: np.ndarray | None = None):
        """Best positive-payoff transition for transit ``i`` as ``(target, payoff, T')``, or None."""
        a = StrategySet(*state.states[i].tolist())
        options = econ.feasible_transitions(a, self.config.technologies)
        if not options:
            return None
        est = estimate_states(self.topology, i, state.states, self.icfg, coefficients)
        traffic = float(state.traffic.transit_load[i])
        by_pce: dict[int, float] = {}
        best = None
        for b in options:
            if b.pce not in by_pce:
                by_pce[b.pce] = estimate_traffic(
                    self.table, i, b, est, state.traffic.demands, self.prefs, self.icfg,
                    self.choice, self.config.replica_seed, state.t,
                )
            t_after = by_pce[b.pce]
            value = econ.payoff(self.config.econ, a, b, traffic, t_after)
            # ties go to the larger set, then to PCE
            key = (value, b.pce + b.sdn, b.pce)
            if best is None or key > best[0]:
                best = (key, b, value, t_after)
        if best is None or not best[2] > 0:
            return None
        return best[1], best[2], best[3]

    def cascade(self, state: SimState) -> int:
        """Sweep transits until nobody moves; returns the number of migrations.

        Causes are classified once the cascade has settled, against the
        traffic each migrant carries after the final re-route.
        """
        fresh: list[MigrationRecord] = []
        for sweep in range(self.config.max_sweeps):
            order = np.random.default_rng(
                [self.config.replica_seed, state.t, sweep, _SWEEP_TAG]
            ).permutation(self.transits)
            coeffs = all_coefficients(self.topology, state.states, self.icfg.relevant_radius)
            moved = 0
            for i in order.tolist():
                if state.states[i].all():
                    continue
                decision = self.agent_decide(state, i, coeffs)
                if decision is None:
                    continue
                fresh.append(self._apply(state, i, *decision))
                coeffs = all_coefficients(self.topology, state.states, self.icfg.relevant_radius)
                moved += 1
            if not moved:
                break
        else:
            self.sweep_limit_hits += 1
            log.warning("cascade hit max_sweeps=%d at step %d", self.config.max_sweeps, state.t)
        self._settle(state, fresh)
        return len(fresh)

    def _apply(self, state: SimState, i: int, target: StrategySet, value: float, t_est: float):
        a = StrategySet(*state.states[i].tolist())
        t_before = float(state.traffic.transit_load[i])
        state.states[i] = target
        state.traffic = self.provision(state.traffic.demands, state.states)
        rec = MigrationRecord(
            island=i,
            step=state.t,
            before=a,
            after=target,
            payoff=value,
            traffic_before=t_before,
            traffic_after=float("nan"),
            estimated_traffic=t_est,
            opex_before=econ.opex(self.config.econ, a, t_before),
            opex_after=float("nan"),
        )
        state.history.append(rec)
        return rec

    def _settle(self, state: SimState, fresh: list[MigrationRecord]) -> None:
        state.traffic = self.provision(state.traffic.demands, state.states)
        for rec in fresh:
            rec.traffic_after = float(state.traffic.transit_load[rec.island])
            rec.opex_after = econ.opex(self.config.econ, rec.after, rec.traffic_after)
            rec.cause = classify_cause(rec)

    def counts(self, state: SimState) -> tuple[int, int, int, int]:
        s = state.states
        return (
            int(s[:, 0].sum()),
            int(s[:, 1].sum()),
            int((s[:, 0] & s[:, 1]).sum()),
            state.traffic.unroutable,
        )

    def run(self) -> RunResult:
        state = self.initial_state()
        rows = [(0, *self.counts(state))]
        for t in range(1, self.config.t_max + 1):
            state.t = t
            demands = self.arrivals(state)
            state.traffic = self.provision(demands, state.states)
            self.cascade(state)
            rows.append((t, *self.counts(state)))
        self.final = state
        return RunResult(
            self.config,
            np.array(rows, dtype=np.int64),
            state.history,
            state.states.copy(),
            self.sweep_limit_hits,
        )


def early_adopters(t: Topology, k: int, kind: str = "max") -> list[int]:
    """``k`` transits of highest (``"max"``) or lowest (``"min"``) degree; ties by island id."""
    if k <= 0:
        return []
    if kind not in ("max", "min"):
        raise ValueError(f"early adopter kind must be 'max' or 'min', got {kind!r}")
    sign = -1 if kind == "max" else 1
    ranked = sorted(t.transits, key=lambda i: (sign * t.degree[i], i))
    return ranked[:k]


def run(config: SimConfig, topology: Topology | None = None) -> RunResult:
    return Simulator(config, topology).run()


def saturation(series: np.ndarray) -> np.ndarray:
    """Final (pce, sdn, both) counts of a run's series."""
    return series[-1, 1:4]


def is_monotone(series: np.ndarray) -> bool:
    return bool((np.diff(series[:, 1:4], axis=0) >= 0).all())

