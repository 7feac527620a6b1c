"""No-Valley-Prefer-Customer path selection and transit-load accounting."""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from netmig import kernels
from netmig.topology import STUB, Topology

UP, DOWN = 0, 1

_PROVIDER, _PEER, _CUSTOMER = "provider", "peer", "customer"


class PathClass(enum.IntEnum):
    """Class of the first hop; lower values are preferred."""

    CUSTOMER = 0
    PEER = 1
    PROVIDER = 2


_CLASS_OF = {_CUSTOMER: PathClass.CUSTOMER, _PEER: PathClass.PEER, _PROVIDER: PathClass.PROVIDER}


class EquiCost(str, enum.Enum):
    SINGLE = "single"
    MULTI = "multi"


@dataclass(frozen=True)
class RoutingPrefs:
    equi_cost: EquiCost = EquiCost.MULTI
    tech_preference: str = "pce"


def _step(phase: int, rel: str) -> int | None:
    """Phase after traversing an edge of kind ``rel``, or None if it makes a valley."""
    if phase == UP:
        return UP if rel == _PROVIDER else DOWN
    return DOWN if rel == _CUSTOMER else None


def is_valley_free(t: Topology, path) -> bool:
    if len(set(path)) != len(path):
        return False
    phase = UP
    for u, v in zip(path, path[1:]):
        rel = t.relation.get((u, v))
        if rel is None:
            return False
        phase = _step(phase, rel)
        if phase is None:
            return False
    return True


def path_class(t: Topology, path) -> PathClass:
    return _CLASS_OF[t.relation[(path[0], path[1])]]


def valley_free_paths(t: Topology, src: int, dst: int) -> set[tuple[int, ...]]:
    """Every simple valley-free path from ``src`` to ``dst``.

    Exponential in general; meant for small graphs and checks. Provisioning
    uses :func:`candidate_paths`, which only explores the preferred paths.
    """
    out: set[tuple[int, ...]] = set()
    path = [src]

    def walk(u: int, phase: int) -> None:
        for v in t.neighbors[u]:
            if v in path:
                continue
            nxt = _step(phase, t.relation[(u, v)])
            if nxt is None:
                continue
            path.append(v)
            if v == dst:
                out.add(tuple(path))
            else:
                walk(v, nxt)
            path.pop()

    if src != dst:
        walk(src, UP)
    return out


def _remaining_hops(t: Topology, dst: int) -> tuple[list[float], list[float]]:
    """Lower bounds on valley-free hops left to ``dst`` from each (island, phase)."""
    down = [math.inf] * t.n
    down[dst] = 0
    heap = [(0, dst)]
    # DOWN phase only moves provider -> customer, so search backwards along customer -> provider
    while heap:
        d, v = heapq.heappop(heap)
        if d > down[v]:
            continue
        for u in t.neighbors[v]:
            if t.relation[(u, v)] == _CUSTOMER and d + 1 < down[u]:
                down[u] = d + 1
                heapq.heappush(heap, (d + 1, u))
    up = list(down)
    for u in range(t.n):
        for v in t.neighbors[u]:
            if t.relation[(u, v)] != _PROVIDER:
                up[u] = min(up[u], 1 + down[v])
    heap = [(d, u) for u, d in enumerate(up) if d < math.inf]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > up[v]:
            continue
        for u in t.neighbors[v]:
            if t.relation[(u, v)] == _PROVIDER and d + 1 < up[u]:
                up[u] = d + 1
                heapq.heappush(heap, (d + 1, u))
    return up, down


def candidate_paths(t: Topology, src: int, dst: int) -> list[tuple[int, ...]]:
    """Valley-free paths of the best first-hop class, shortest within that class.

    These are the paths that survive the state-independent part of the tie
    break; they are returned in sorted order.
    """
    if src == dst:
        return []
    bound = dict(zip((UP, DOWN), _remaining_hops(t, dst)))
    by_class: dict[PathClass, list[int]] = {}
    for v in t.neighbors[src]:
        by_class.setdefault(_CLASS_OF[t.relation[(src, v)]], []).append(v)

    for cls in sorted(by_class):
        starts = []
        for v in by_class[cls]:
            phase = _step(UP, t.relation[(src, v)])
            h = 0 if v == dst else bound[phase][v]
            if h < math.inf:
                starts.append((v, phase, 1 + h))
        if not starts:
            continue
        limit = min(s[2] for s in starts)
        while limit <= t.n - 1:
            found = _bounded_search(t, src, dst, starts, limit, bound)
            if found:
                return sorted(found)
            limit += 1
    return []


def _bounded_search(t, src, dst, starts, limit, bound) -> list[tuple[int, ...]]:
    found = []
    path = [src]
    on_path = {src}

    def walk(u: int, phase: int) -> None:
        depth = len(path) - 1
        for v in t.neighbors[u]:
            if v in on_path:
                continue
            nxt = _step(phase, t.relation[(u, v)])
            if nxt is None:
                continue
            if v == dst:
                if depth + 1 == limit:
                    found.append(tuple(path) + (v,))
                continue
            if depth + 1 + bound[nxt][v] > limit:
                continue
            path.append(v)
            on_path.add(v)
            walk(v, nxt)
            on_path.discard(v)
            path.pop()

    for v, phase, lb in starts:
        if lb > limit:
            continue
        if v == dst:
            if limit == 1:
                found.append((src, v))
            continue
        path.append(v)
        on_path.add(v)
        walk(v, phase)
        on_path.discard(v)
        path.pop()
    return found


def fully_migrated(path, pce) -> bool:
    return all(pce[x] for x in path[1:-1])


def best_paths(
    t: Topology,
    src: int,
    dst: int,
    pce_states,
    prefs: RoutingPrefs = RoutingPrefs(),
    rng: np.random.Generator | None = None,
) -> list[tuple[int, ...]]:
    """Preferred paths for one demand given the islands' PCE bits.

    Among the candidate paths, the ones whose every intermediate island runs
    PCE win if there are any. ``SINGLE`` returns one survivor chosen with
    ``rng``.
    """
    paths = candidate_paths(t, src, dst)
    full = [p for p in paths if fully_migrated(p, pce_states)]
    survivors = full or paths
    if prefs.equi_cost == EquiCost.SINGLE and survivors:
        if rng is None:
            raise ValueError("single-path selection needs a random generator")
        return [survivors[_pick_index(rng.random(), len(survivors))]]
    return survivors


def _pick_index(u: float, k: int) -> int:
    return min(int(math.floor(u * k)), k - 1)


@dataclass
class RoutingTable:
    """Precomputed candidate paths for every ordered stub pair, as CSR arrays."""

    n: int
    pairs: list[tuple[int, int]]
    paths: list[tuple[int, ...]]
    pair_ptr: np.ndarray
    node_ptr: np.ndarray
    nodes: np.ndarray
    pair_index: dict[tuple[int, int], int] = field(repr=False)
    _sub: dict[int, tuple] = field(default_factory=dict, repr=False)

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def all_ids(self) -> np.ndarray:
        return np.arange(self.n_pairs, dtype=np.int64)

    def unroutable(self) -> np.ndarray:
        return np.flatnonzero(np.diff(self.pair_ptr) == 0)

    def through(self, i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Sub-table of the pairs with at least one candidate crossing island ``i``."""
        if i not in self._sub:
            ids, pptr, nptr, nodes = [], [0], [0], []
            for k in range(self.n_pairs):
                lo, hi = self.pair_ptr[k], self.pair_ptr[k + 1]
                seg = self.nodes[self.node_ptr[lo] : self.node_ptr[hi]]
                if not (seg == i).any():
                    continue
                ids.append(k)
                for q in range(lo, hi):
                    part = self.nodes[self.node_ptr[q] : self.node_ptr[q + 1]]
                    nodes.extend(part.tolist())
                    nptr.append(len(nodes))
                pptr.append(len(nptr) - 1)
            self._sub[i] = (
                np.array(ids, dtype=np.int64),
                np.array(pptr, dtype=np.int64),
                np.array(nptr, dtype=np.int64),
                np.array(nodes, dtype=np.int64),
            )
        return self._sub[i]


def build_table(t: Topology, pairs=None) -> RoutingTable:
    """Routing table over ``pairs`` (default: all ordered stub pairs)."""
    if pairs is None:
        pairs = [(s, d) for s in t.stubs for d in t.stubs if s != d]
    cache: dict[tuple[int, int], list[tuple[int, ...]]] = {}
    paths: list[tuple[int, ...]] = []
    pair_ptr, node_ptr, nodes = [0], [0], []
    for s, d in pairs:
        if (d, s) in cache and t.roles[s] == t.roles[d] == STUB:
            # both endpoints start uphill, so the reversed candidate set is the same
            cands = sorted(p[::-1] for p in cache[(d, s)])
        else:
            cands = candidate_paths(t, s, d)
        cache[(s, d)] = cands
        for p in cands:
            paths.append(p)
            nodes.extend(p[1:-1])
            node_ptr.append(len(nodes))
        pair_ptr.append(len(paths))
    return RoutingTable(
        n=t.n,
        pairs=list(pairs),
        paths=paths,
        pair_ptr=np.array(pair_ptr, dtype=np.int64),
        node_ptr=np.array(node_ptr, dtype=np.int64),
        nodes=np.array(nodes, dtype=np.int64),
        pair_index={p: k for k, p in enumerate(pairs)},
    )


@lru_cache(maxsize=8)
def routing_table(t: Topology) -> RoutingTable:
    return build_table(t)


@dataclass
class TrafficState:
    demands: np.ndarray
    transit_load: np.ndarray
    path_volume: np.ndarray
    unroutable: int = 0

    def demand_map(self, table: RoutingTable) -> dict[tuple[int, int], float]:
        return {p: float(v) for p, v in zip(table.pairs, self.demands)}


def pce_vector(states, n: int) -> np.ndarray:
    """uint8 PCE bits from a sequence/mapping of ``(pce, sdn)`` states or raw bits."""
    out = np.zeros(n, dtype=np.uint8)
    items = states.items() if isinstance(states, dict) else enumerate(states)
    for i, s in items:
        out[i] = s[0] if isinstance(s, tuple) else s
    return out


def single_path_choices(n_pairs: int, seed: int) -> np.ndarray:
    """Per-pair uniforms fixing which survivor a single-path demand rides."""
    return np.random.default_rng([seed, 0x50A7]).random(n_pairs)


def provision(
    t: Topology,
    demands: np.ndarray,
    states,
    prefs: RoutingPrefs = RoutingPrefs(),
    choice: np.ndarray | None = None,
    table: RoutingTable | None = None,
) -> TrafficState:
    """Route every stub-pair demand from scratch and tally per-island transit load."""
    table = table or routing_table(t)
    demands = np.asarray(demands, dtype=float)
    if (demands < 0).any():
        raise ValueError("demands must be non-negative")
    pce = states if isinstance(states, np.ndarray) else pce_vector(states, t.n)
    multipath = prefs.equi_cost == EquiCost.MULTI
    if choice is None:
        choice = np.zeros(table.n_pairs)
    vol = kernels.path_volumes(
        pce, demands, choice, multipath, table.all_ids, table.pair_ptr, table.node_ptr, table.nodes
    )
    load = kernels.island_loads(vol, table.node_ptr, table.nodes, t.n)
    dead = table.unroutable()
    return TrafficState(demands, load, vol, int((demands[dead] > 0).sum()))


def load_demands(path: str | Path, table: RoutingTable) -> np.ndarray:
    """Read ``demand <src> <dst> <volume>`` lines into a per-pair demand vector."""
    out = np.zeros(table.n_pairs)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] != "demand" or len(parts) != 4:
                raise ValueError(f"unrecognised record {line!r}")
            key = (int(parts[1]), int(parts[2]))
            vol = float(parts[3])
            if vol < 0 or key not in table.pair_index:
                raise ValueError(f"bad demand {line!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        out[table.pair_index[key]] += vol
    return out
