"""Inter-island graph: scale-free growth, business relations and hop distances."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

C2P = "c2p"
P2P = "p2p"
TRANSIT = "transit"
STUB = "stub"

UNREACHABLE = math.inf


class TopologyError(ValueError):
    """Raised for invalid configs, invariant breaches and malformed topology files."""


@dataclass(frozen=True)
class TopologyConfig:
    n_total: int = 100
    n_seed: int = 16
    n_transit: int = 39
    stub_attach_degree: int = 2
    transit_attach_degree: int = 2
    rng_seed: int = 0

    def check(self) -> None:
        if self.n_seed < 2:
            raise TopologyError(f"n_seed must be >= 2, got {self.n_seed}")
        if not self.n_seed <= self.n_transit:
            raise TopologyError("n_seed must not exceed n_transit")
        if self.n_transit >= self.n_total:
            raise TopologyError("n_transit must be < n_total (at least one stub island)")
        if self.stub_attach_degree < 1 or self.transit_attach_degree < 1:
            raise TopologyError("attachment degrees must be >= 1")

    @classmethod
    def scaled(cls, n_total: int, **kwargs) -> "TopologyConfig":
        """Config keeping the 39% transit share of the 100-island reference."""
        return cls(n_total=n_total, n_transit=(n_total * 39) // 100, **kwargs)


@dataclass(frozen=True)
class Topology:
    """Labeled island graph.

    Islands are ``0..n-1``. Each edge is ``(a, b, rel)``; with ``rel == "c2p"``
    island ``a`` is a customer of ``b``. P2P edges are stored with ``a < b``.
    """

    n: int
    edges: tuple[tuple[int, int, str], ...]
    roles: tuple[str, ...]
    rng_seed: int = field(default=0, compare=False)

    @property
    def islands(self) -> range:
        return range(self.n)

    @cached_property
    def transits(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == TRANSIT)

    @cached_property
    def stubs(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roles) if r == STUB)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b, _ in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(x)) for x in adj)

    @cached_property
    def degree(self) -> np.ndarray:
        return np.array([len(x) for x in self.neighbors], dtype=np.int64)

    @cached_property
    def relation(self) -> dict[tuple[int, int], str]:
        """Directed view: ``relation[(u, v)]`` is how ``v`` looks from ``u``.

        Values are ``"provider"``, ``"customer"`` or ``"peer"``.
        """
        rel: dict[tuple[int, int], str] = {}
        for a, b, kind in self.edges:
            if kind == C2P:
                rel[(a, b)] = "provider"
                rel[(b, a)] = "customer"
            else:
                rel[(a, b)] = rel[(b, a)] = "peer"
        return rel

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs undirected hop counts; ``inf`` where unreachable."""
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import shortest_path

        if not self.edges:
            d = np.full((self.n, self.n), np.inf)
            np.fill_diagonal(d, 0.0)
            return d
        rows = [a for a, b, _ in self.edges] + [b for a, b, _ in self.edges]
        cols = [b for a, b, _ in self.edges] + [a for a, b, _ in self.edges]
        adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n, self.n))
        return shortest_path(adj, method="D", directed=False, unweighted=True)

    def validate(self) -> None:
        """Raise :class:`TopologyError` if any structural invariant is broken."""
        seen = set()
        for a, b, kind in self.edges:
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise TopologyError(f"edge ({a}, {b}) references unknown island")
            if a == b:
                raise TopologyError(f"self-loop on island {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise TopologyError(f"duplicate edge between {a} and {b}")
            seen.add(key)
            if kind not in (C2P, P2P):
                raise TopologyError(f"unknown relation {kind!r}")
            if kind == C2P and self.roles[b] == STUB:
                raise TopologyError(f"stub island {b} is provider for island {a}")
            if self.roles[a] == STUB and self.roles[b] == STUB:
                raise TopologyError(f"stub islands {a} and {b} are adjacent")
            if kind == P2P and STUB in (self.roles[a], self.roles[b]):
                raise TopologyError(f"stub island in peer edge ({a}, {b})")
        if self.n and not np.isfinite(self.distances[0]).all():
            raise TopologyError("topology is not connected")


def _pick(rng: np.random.Generator, pool: list[int], weights: np.ndarray, k: int) -> list[int]:
    p = weights[pool].astype(float)
    p /= p.sum()
    chosen = rng.choice(len(pool), size=min(k, len(pool)), replace=False, p=p)
    return sorted(pool[c] for c in chosen)


def generate_topology(config: TopologyConfig) -> Topology:
    """Grow a scale-free island graph from a fully meshed P2P seed.

    Islands ``n_seed..n_transit-1`` join as transits and buy transit (C2P) from
    ``transit_attach_degree`` existing islands picked by degree. The remaining
    islands are stubs, each a customer of ``stub_attach_degree`` transits, again
    chosen by degree.
    """
    config.check()
    rng = np.random.default_rng(config.rng_seed)
    degree = np.zeros(config.n_total, dtype=np.int64)
    edges: list[tuple[int, int, str]] = []

    for a in range(config.n_seed):
        for b in range(a + 1, config.n_seed):
            edges.append((a, b, P2P))
    degree[: config.n_seed] = config.n_seed - 1

    for new in range(config.n_seed, config.n_transit):
        for target in _pick(rng, list(range(new)), degree, config.transit_attach_degree):
            edges.append((new, target, C2P))
            degree[new] += 1
            degree[target] += 1

    transit_pool = list(range(config.n_transit))
    for new in range(config.n_transit, config.n_total):
        for target in _pick(rng, transit_pool, degree, config.stub_attach_degree):
            edges.append((new, target, C2P))
            degree[new] += 1
            degree[target] += 1

    roles = tuple(TRANSIT if i < config.n_transit else STUB for i in range(config.n_total))
    return Topology(config.n_total, tuple(edges), roles, rng_seed=config.rng_seed)


def hop_distance(t: Topology, i: int, j: int) -> float:
    """Shortest undirected hop count, ignoring business relations."""
    if i == j:
        return 0
    d = t.distances[i, j]
    return int(d) if np.isfinite(d) else UNREACHABLE


def bfs_distances(t: Topology, src: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in t.neighbors[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def dumps(t: Topology) -> str:
    lines = [f"islands {t.n}", f"seed {t.rng_seed}"]
    lines += [f"edge {a} {b} {kind}" for a, b, kind in t.edges]
    lines += [f"role {i} {r}" for i, r in enumerate(t.roles)]
    return "\n".join(lines) + "\n"


def loads(text: str) -> Topology:
    n = None
    seed = 0
    edges = []
    roles: dict[int, str] = {}
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "islands" and len(parts) == 2 and n is None:
                n = int(parts[1])
            elif n is None:
                raise TopologyError("expected 'islands <n>' header")
            elif parts[0] == "seed" and len(parts) == 2:
                seed = int(parts[1])
            elif parts[0] == "edge" and len(parts) == 4 and parts[3] in (C2P, P2P):
                a, b = int(parts[1]), int(parts[2])
                if parts[3] == P2P and a > b:
                    a, b = b, a
                edges.append((a, b, parts[3]))
            elif parts[0] == "role" and len(parts) == 3 and parts[2] in (TRANSIT, STUB):
                i = int(parts[1])
                if not 0 <= i < n or i in roles:
                    raise TopologyError(f"bad or repeated island id {i}")
                roles[i] = parts[2]
            else:
                raise TopologyError(f"unrecognised record {line!r}")
        except (ValueError, IndexError) as exc:
            raise TopologyError(f"line {lineno}: {exc}") from None
    if n is None:
        raise TopologyError("empty topology file")
    missing = [i for i in range(n) if i not in roles]
    if missing:
        raise TopologyError(
            f"line {lineno}: file ends before role of island {missing[0]} ({len(missing)} missing)"
        )
    topo = Topology(n, tuple(edges), tuple(roles[i] for i in range(n)), rng_seed=seed)
    topo.validate()
    return topo


def save_topology(t: Topology, path: str | Path) -> None:
    Path(path).write_text(dumps(t))


def load_topology(path: str | Path) -> Topology:
    return loads(Path(path).read_text())
