"""Strategy lattice and the money side of a migration: CapEx, OpEx, revenue, payoff."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple


class StrategySet(NamedTuple):
    pce: int = 0
    sdn: int = 0

    def __str__(self) -> str:
        return f"{self.pce}{self.sdn}"

    def covers(self, other: "StrategySet") -> bool:
        return self.pce >= other.pce and self.sdn >= other.sdn


NONE = StrategySet(0, 0)
PCE_ONLY = StrategySet(1, 0)
SDN_ONLY = StrategySet(0, 1)
BOTH = StrategySet(1, 1)
LATTICE = (NONE, PCE_ONLY, SDN_ONLY, BOTH)


class InfeasibleTransition(ValueError):
    pass


@dataclass(frozen=True)
class EconParams:
    """CapEx (``c_*``), coupling (``eta``) and OpEx (``a_*``) coefficients.

    ``a_nopce``/``a_nosdn`` are the OpEx coefficients of running without the
    technology (manual operation).
    """

    c_pce: float = 0.3
    c_sdn: float = 0.4
    eta: float = 1.5
    a_pce: float = 0.1
    a_sdn: float = 0.2
    a_nopce: float = 0.5
    a_nosdn: float = 0.8

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


# Constraint names reported by validate_params.
RANGE = "range"
PCE_OPEX_ORDER = "pce_opex_order"  # a_pce < a_nopce
SDN_OPEX_ORDER = "sdn_opex_order"  # a_sdn < a_nosdn
PCE_CAPEX_FLOOR = "pce_capex_floor"  # c_pce > max(a_pce + a_nosdn, (a_pce + a_sdn) / eta)
SDN_CAPEX_FLOOR = "sdn_capex_floor"  # c_sdn > max(a_nopce + a_sdn, (a_pce + a_sdn) / eta)
JOINT_CAPEX = "joint_capex"  # (c_pce + c_sdn) / eta > (a_pce + a_sdn) / eta
PCE_CAPEX_MARGIN = "pce_capex_margin"  # c_pce > a_pce + a_sdn
SDN_CAPEX_MARGIN = "sdn_capex_margin"  # c_sdn > a_pce + a_sdn

_TOL = 1e-12


def validate_params(p: EconParams, strict: bool = False) -> list[str]:
    """Names of the violated coefficient constraints; empty means usable.

    The default gate checks the coefficient ranges, the OpEx ordering, the
    joint-migration bound and the two reduced CapEx bounds (the latter
    inclusive of equality). The default coefficients sit exactly on
    the reduced PCE bound and do not satisfy the two per-technology ``max``
    bounds, so those only gate with ``strict=True``, which also makes every
    inequality strict.
    """
    bad = []
    unit = (p.c_pce, p.c_sdn, p.a_pce, p.a_sdn, p.a_nopce, p.a_nosdn)
    if not all(0.0 <= v <= 1.0 for v in unit) or not 1.0 <= p.eta <= 2.0:
        bad.append(RANGE)
    if not p.a_pce < p.a_nopce:
        bad.append(PCE_OPEX_ORDER)
    if not p.a_sdn < p.a_nosdn:
        bad.append(SDN_OPEX_ORDER)
    joint_opex = (p.a_pce + p.a_sdn) / p.eta
    if strict:
        if not p.c_pce > max(p.a_pce + p.a_nosdn, joint_opex):
            bad.append(PCE_CAPEX_FLOOR)
        if not p.c_sdn > max(p.a_nopce + p.a_sdn, joint_opex):
            bad.append(SDN_CAPEX_FLOOR)
    if not (p.c_pce + p.c_sdn) / p.eta > joint_opex:
        bad.append(JOINT_CAPEX)
    floor = 0.0 if strict else -_TOL
    if not p.c_pce - (p.a_pce + p.a_sdn) > floor:
        bad.append(PCE_CAPEX_MARGIN)
    if not p.c_sdn - (p.a_pce + p.a_sdn) > floor:
        bad.append(SDN_CAPEX_MARGIN)
    return bad


def feasible_transitions(a: StrategySet, allowed: tuple[str, ...] = ("pce", "sdn")) -> list[StrategySet]:
    """Strict supersets of ``a`` reachable when only ``allowed`` technologies exist."""
    out = []
    for b in LATTICE:
        if b == a or not b.covers(a):
            continue
        if b.pce > a.pce and "pce" not in allowed:
            continue
        if b.sdn > a.sdn and "sdn" not in allowed:
            continue
        out.append(StrategySet(*b))
    return out


def capex_coefficient(p: EconParams, a: StrategySet, b: StrategySet) -> float:
    if a == b:
        return 0.0
    if not b.covers(a):
        raise InfeasibleTransition(f"cannot migrate {a} -> {b}")
    adds_pce, adds_sdn = b.pce > a.pce, b.sdn > a.sdn
    if adds_pce and adds_sdn:
        return (p.c_pce + p.c_sdn) / p.eta
    return p.c_pce if adds_pce else p.c_sdn


def opex_coefficient(p: EconParams, a: StrategySet) -> float:
    if a.pce and a.sdn:
        return (p.a_pce + p.a_sdn) / p.eta
    return (p.a_pce if a.pce else p.a_nopce) + (p.a_sdn if a.sdn else p.a_nosdn)


def capex(p: EconParams, a: StrategySet, b: StrategySet, traffic_after: float) -> float:
    return capex_coefficient(p, a, b) * math.sqrt(traffic_after)


def opex(p: EconParams, a: StrategySet, traffic: float) -> float:
    return opex_coefficient(p, a) * math.sqrt(traffic)


def revenue(traffic: float) -> float:
    return traffic**2


def payoff(p: EconParams, a: StrategySet, b: StrategySet, traffic: float, traffic_after: float) -> float:
    """Return on investment of migrating ``a -> b`` as traffic moves to ``traffic_after``.

    Staying put pays 0. A migration with zero CapEx (only when
    ``traffic_after`` is 0) pays ``+inf`` or ``-inf`` by the sign of its net gain.
    """
    a, b = StrategySet(*a), StrategySet(*b)
    cost = capex(p, a, b, traffic_after)
    if a == b:
        return 0.0
    gain = (
        revenue(traffic_after)
        - revenue(traffic)
        - cost
        - (opex(p, b, traffic_after) - opex(p, a, traffic))
    )
    if cost > 0.0:
        return gain / cost
    return math.inf if gain > 0 else -math.inf
