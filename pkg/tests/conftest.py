import numpy as np
import pytest

from netmig.topology import C2P, P2P, STUB, TRANSIT, Topology, TopologyConfig, generate_topology


def make_topology(n, edges, stubs=()):
    roles = tuple(STUB if i in stubs else TRANSIT for i in range(n))
    norm = tuple((min(a, b), max(a, b), k) if k == P2P else (a, b, k) for a, b, k in edges)
    return Topology(n, norm, roles)


# Islands N1..N12 are ids 0..11. N2, N4, N6 sit one hop from N1; N3, N5, N7 and
# N10 two hops; N8, N9, N11, N12 further out.
FIG3_EDGES = [
    (0, 1, P2P), (0, 3, P2P), (0, 5, P2P),
    (1, 2, P2P), (3, 4, P2P), (5, 6, P2P), (3, 9, P2P),
    (2, 7, P2P), (4, 8, P2P), (6, 10, P2P), (10, 11, P2P),
]
# adoption bits of N1..N12 for the worked example; N8/N9 are adopters outside the circle
FIG3_BITS = [0, 1, 0, 0, 1, 0, 0, 1, 1, 1, 0, 0]


@pytest.fixture(scope="session")
def fig3():
    return make_topology(12, FIG3_EDGES)


@pytest.fixture(scope="session")
def default_topology():
    return generate_topology(TopologyConfig(rng_seed=7))


@pytest.fixture
def diamond():
    """Four peered transits 0-3; stubs 4..7 each dual-homed, giving 4 equal paths 4->5."""
    edges = [(a, b, P2P) for a in range(4) for b in range(a + 1, 4)]
    homes = {4: (0, 1), 5: (2, 3), 6: (0, 2), 7: (1, 3)}
    edges += [(s, p, C2P) for s, ps in homes.items() for p in ps]
    return make_topology(8, edges, stubs={4, 5, 6, 7})


def random_labeled_graph(rng: np.random.Generator, n: int, p: float = 0.45):
    """Connected-or-not simple graph with random C2P orientation / P2P labels."""
    edges = []
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                r = rng.random()
                if r < 0.4:
                    edges.append((a, b, C2P))
                elif r < 0.8:
                    edges.append((b, a, C2P))
                else:
                    edges.append((a, b, P2P))
    return make_topology(n, edges)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
