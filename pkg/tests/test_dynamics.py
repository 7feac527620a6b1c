import numpy as np
import pytest

from netmig import economics as econ
from netmig.dynamics import (
    Cause,
    MigrationRecord,
    SimConfig,
    SimState,
    Simulator,
    classify_cause,
    early_adopters,
    is_monotone,
    run,
)
from netmig.economics import BOTH, NONE, PCE_ONLY, EconParams
from netmig.topology import C2P, P2P

from conftest import make_topology

SHORT = SimConfig(t_max=12)


@pytest.fixture(scope="module")
def default_run():
    sim = Simulator(SimConfig(t_max=25, profile_seed=3, replica_seed=4))
    return sim, sim.run()


def test_arrivals(default_topology):
    sim = Simulator(SHORT.with_values(arrival_rate=2.0), default_topology)
    state = sim.initial_state()
    assert (state.traffic.demands == 1).all()
    assert (sim.arrivals(state, 0.0) == state.traffic.demands).all()
    draws = np.concatenate([sim.arrivals(state) - state.traffic.demands for _ in range(28)])
    assert len(draws) >= 10**5
    assert draws.mean() == pytest.approx(2.0, rel=0.01)
    assert (draws >= 0).all()


def test_decide_absorbing_and_idle(default_topology):
    sim = Simulator(SHORT, default_topology)
    state = sim.initial_state()
    i = default_topology.transits[0]
    state.states[i] = (1, 1)
    assert sim.agent_decide(state, i) is None
    # with no demand anywhere every payoff is -inf
    state.states[i] = (0, 0)
    state.traffic = sim.provision(np.zeros_like(state.traffic.demands), state.states)
    assert all(sim.agent_decide(state, j) is None for j in default_topology.transits)


def test_decide_positive_at_equal_traffic(default_topology):
    sim = Simulator(SHORT.with_values(approach="deterministic"), default_topology)
    state = sim.initial_state()
    i = int(np.argmax(state.traffic.transit_load))
    target, value, _ = sim.agent_decide(state, i)
    assert value > 0 and target in econ.feasible_transitions(NONE)


# s1=0, s2=1 are stubs. Route 0-2-3-1 through A=2, B=3 ties with 0-4-5-1 through
# C=4, D=5, which already run PCE. E, F, G (6, 7, 8) are adopting customers of B.
CASCADE_EDGES = [
    (0, 2, C2P), (2, 3, P2P), (1, 3, C2P),
    (0, 4, C2P), (4, 5, P2P), (1, 5, C2P),
    (6, 3, C2P), (7, 3, C2P), (8, 3, C2P),
]


@pytest.fixture
def cascade_sim():
    topo = make_topology(9, CASCADE_EDGES, stubs={0, 1})
    topo.validate()
    cfg = SimConfig(approach="deterministic", relevant_radius=2, t_max=1)
    sim = Simulator(cfg, topo)
    states = np.zeros((9, 2), dtype=np.uint8)
    states[[4, 5, 6, 7, 8]] = 1
    demands = np.ones(sim.table.n_pairs)
    return sim, SimState(1, states, sim.provision(demands, states))


def test_cascade_fixture(cascade_sim):
    sim, state = cascade_sim
    assert state.traffic.transit_load[[2, 3]].tolist() == [0.0, 0.0]
    # B sees A staying put (A's neighbourhood has no adopters): nothing to gain yet
    assert sim.agent_decide(state, 3) is None
    # A expects B to follow its adopting neighbourhood (3/5 > 1/2) and half of both demands
    target, value, t_est = sim.agent_decide(state, 2)
    assert target == BOTH and t_est == pytest.approx(1.0)
    manual = {b: econ.payoff(sim.config.econ, NONE, b, 0.0, 1.0 if b.pce else 0.0)
              for b in econ.feasible_transitions(NONE)}
    assert value == pytest.approx(manual[BOTH]) == pytest.approx(5 / 7)
    assert manual[BOTH] == max(manual.values())

    sim.cascade(state)
    assert state.states[2].tolist() == [1, 1] and state.states[3].tolist() == [1, 1]
    assert [r.island for r in state.history] == [2, 3]
    assert all(r.payoff > 0 for r in state.history)
    # both went from carrying nothing to half of each demand, paying new OpEx
    assert [r.cause for r in state.history] == [Cause.TRAFFIC_ONLY] * 2
    assert [r.traffic_after for r in state.history] == [1.0, 1.0]


def test_cascade_fixed_point(default_topology):
    sim = Simulator(SHORT, default_topology)
    state = sim.initial_state()
    state.traffic = sim.provision(np.zeros_like(state.traffic.demands), state.states)
    before = state.states.copy()
    assert sim.cascade(state) == 0
    assert (state.states == before).all()


def _rec(t0, t1, a, b):
    p = EconParams()
    return MigrationRecord(0, 1, a, b, 1.0, t0, t1, t1, econ.opex(p, a, t0), econ.opex(p, b, t1))


def test_classify_cause():
    assert classify_cause(_rec(4, 4, NONE, PCE_ONLY)) is Cause.OPEX_ONLY
    r = _rec(1, 9, NONE, PCE_ONLY)
    assert (r.opex_before, r.opex_after) == pytest.approx((1.3, 0.9 * 3))
    assert classify_cause(r) is Cause.TRAFFIC_ONLY
    assert classify_cause(_rec(4, 5, NONE, BOTH)) is Cause.BOTH
    with pytest.raises(AssertionError):
        classify_cause(_rec(0, 0, NONE, BOTH))


def test_flat_profile_without_stimulus(default_topology):
    cfg = SHORT.with_values(arrival_rate=0.0, technologies=("sdn",), c_sdn=0.9)
    assert econ.validate_params(cfg.econ) == []
    r = run(cfg, default_topology)
    assert not r.series[:, 1:4].any()
    assert r.records == []


def test_invalid_params_refused():
    with pytest.raises(ValueError, match="sdn_capex_margin"):
        Simulator(SHORT.with_values(c_sdn=0.25))


def test_run_is_deterministic(default_topology):
    cfg = SHORT.with_values(profile_seed=11, replica_seed=12)
    a, b = run(cfg, default_topology), run(cfg, default_topology)
    assert (a.series == b.series).all()
    assert [(r.island, r.step, r.after, r.payoff) for r in a.records] == [
        (r.island, r.step, r.after, r.payoff) for r in b.records
    ]


def test_run_invariants(default_run):
    sim, result = default_run
    s = result.series
    assert is_monotone(s)
    assert (s[:, 3] <= np.minimum(s[:, 1], s[:, 2])).all()
    assert len(result.records) <= 2 * len(sim.topology.transits)
    assert all(r.payoff > 0 for r in result.records)
    steps = [r.step for r in result.records]
    assert steps == sorted(steps)
    stubs = list(sim.topology.stubs)
    assert not result.final_states[stubs].any()


def test_reprovision_idempotent(default_run):
    sim, _ = default_run
    fresh = sim.provision(sim.final.traffic.demands, sim.final.states)
    assert fresh.transit_load == pytest.approx(sim.final.traffic.transit_load)


def test_saturation_only_on_loaded_transits(default_run):
    sim, result = default_run
    migrated = np.flatnonzero(result.final_states.any(axis=1))
    assert (sim.final.traffic.transit_load[migrated] > 0).all()


def test_early_adopters(default_topology):
    top = early_adopters(default_topology, 3, "max")
    low = early_adopters(default_topology, 3, "min")
    deg = default_topology.degree
    others = set(default_topology.transits) - set(top)
    assert min(deg[top]) >= max(deg[list(others)])
    others = set(default_topology.transits) - set(low)
    assert max(deg[low]) <= min(deg[list(others)])
    sim = Simulator(SHORT.with_values(early_adopters=3, early_adopter_kind="min"), default_topology)
    assert sorted(np.flatnonzero(sim.initial_state().states[:, 0])) == sorted(low)


def test_technology_restriction(default_topology):
    r = run(SHORT.with_values(technologies=("pce",), t_max=3), default_topology)
    assert not r.series[:, 2].any()
    assert r.series[-1, 1] > 0
