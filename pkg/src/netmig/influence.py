"""Circles of influence and neighbour-strategy estimation.

Adoption state is carried as an ``(n, 2)`` uint8 array, column 0 for PCE and
column 1 for SDN.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from netmig import kernels
from netmig.economics import StrategySet
from netmig.routing import EquiCost, RoutingPrefs, RoutingTable
from netmig.topology import Topology

TECHS = ("pce", "sdn")
_MC_TAG = 0x3C


class Approach(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    PROBABILISTIC = "probabilistic"


@dataclass(frozen=True)
class InfluenceConfig:
    relevant_radius: int = 5
    approach: Approach = Approach.PROBABILISTIC
    mc_samples: int = 16

    def __post_init__(self):
        if self.relevant_radius < 1:
            raise ValueError("relevant_radius must be >= 1")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")


def as_state_array(states, n: int | None = None) -> np.ndarray:
    if isinstance(states, np.ndarray) and states.ndim == 2:
        return states.astype(np.uint8, copy=False)
    if isinstance(states, dict):
        out = np.zeros((n, 2), dtype=np.uint8)
        for i, s in states.items():
            out[i] = s
        return out
    return np.array([tuple(s) for s in states], dtype=np.uint8).reshape(-1, 2)


@lru_cache(maxsize=16)
def influence_weights(t: Topology, radius: int) -> np.ndarray:
    """``w[i, j] = 1/dist(i, j)`` inside i's circle, else 0."""
    d = t.distances
    inside = (d > 0) & (d < radius)
    w = np.zeros_like(d)
    w[inside] = 1.0 / d[inside]
    w.setflags(write=False)
    return w


def circle_of_influence(t: Topology, i: int, radius: int) -> list[int]:
    """Islands other than ``i`` strictly closer than ``radius`` hops."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    return np.flatnonzero(influence_weights(t, radius)[i]).tolist()


def _tech_column(tech: str | int) -> int:
    return tech if isinstance(tech, int) else TECHS.index(tech)


def effective_migration_coefficient(t: Topology, i: int, tech, states, radius: int) -> float:
    """Inverse-distance weighted share of adopters of ``tech`` around ``i``; 0 for an empty circle."""
    w = influence_weights(t, radius)[i]
    den = w.sum()
    if den == 0.0:
        return 0.0
    bits = as_state_array(states, t.n)[:, _tech_column(tech)]
    return float(w @ bits / den)


def all_coefficients(t: Topology, states: np.ndarray, radius: int) -> np.ndarray:
    """Coefficients of every island for both technologies, shape ``(n, 2)``."""
    w = influence_weights(t, radius)
    den = w.sum(axis=1)
    num = w @ states.astype(float)
    return np.divide(num, den[:, None], out=np.zeros_like(num), where=den[:, None] > 0)


def estimate_states(
    t: Topology, i: int, states, cfg: InfluenceConfig, coefficients: np.ndarray | None = None
) -> np.ndarray:
    """Next-step adoption estimate as seen by island ``i``.

    Returns an ``(n, 2)`` float array: definite bits (deterministic) or
    adoption probabilities (probabilistic). Only members of ``i``'s circle
    are re-estimated, and never below their current bits.
    """
    cur = as_state_array(states, t.n)
    x = all_coefficients(t, cur, cfg.relevant_radius) if coefficients is None else coefficients
    est = cur.astype(float)
    circle = circle_of_influence(t, i, cfg.relevant_radius)
    if not circle:
        return est
    if cfg.approach == Approach.DETERMINISTIC:
        guess = (x[circle] > 0.5).astype(float)
    else:
        guess = x[circle]
    est[circle] = np.maximum(est[circle], guess)
    return est


def mc_stream(seed: int, step: int, island: int) -> np.random.Generator:
    return np.random.default_rng([seed, step, island, _MC_TAG])


def estimate_traffic(
    table: RoutingTable,
    i: int,
    candidate: StrategySet,
    est: np.ndarray,
    demands: np.ndarray,
    prefs: RoutingPrefs,
    cfg: InfluenceConfig,
    choice: np.ndarray,
    seed: int = 0,
    step: int = 0,
) -> float:
    """Expected transit load of ``i`` after it moves to ``candidate``.

    Only PCE bits steer routing, so the SDN half of the estimate is ignored.
    Probabilistic estimates are averaged over ``cfg.mc_samples`` draws from a
    stream keyed on ``(seed, step, i)``; every candidate of one decision sees
    the same draws.
    """
    ids, pptr, nptr, nodes = table.through(i)
    if len(ids) == 0:
        return 0.0
    multipath = prefs.equi_cost == EquiCost.MULTI
    prob = est[:, 0]
    fixed = (prob == 0.0) | (prob == 1.0)
    fixed[i] = True
    if cfg.approach == Approach.DETERMINISTIC or fixed.all():
        pce = (prob >= 0.5).astype(np.uint8)
        pce[i] = candidate[0]
        return float(kernels.load_at(i, pce, demands, choice, multipath, ids, pptr, nptr, nodes))
    # draw for every island so the sample matrix does not depend on which ones are uncertain
    u = mc_stream(seed, step, i).random((cfg.mc_samples, len(prob)))
    rows = (u < prob).astype(np.uint8)
    rows[:, i] = candidate[0]
    loads = kernels.load_at_batch(i, rows, demands, choice, multipath, ids, pptr, nptr, nodes)
    return float(loads.mean())
