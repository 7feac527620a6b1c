"""Time the compiled and numpy kernels on the default 100-island topology.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from netmig import _pykernels
from netmig.routing import routing_table, single_path_choices
from netmig.topology import TopologyConfig, generate_topology

try:
    from netmig import _ckernels
except ImportError:
    _ckernels = None


def cases(table, n):
    rng = np.random.default_rng(0)
    pce = rng.integers(0, 2, n).astype(np.uint8)
    rows = rng.integers(0, 2, (16, n)).astype(np.uint8)
    demand = rng.poisson(3.0, table.n_pairs).astype(float)
    choice = single_path_choices(table.n_pairs, 0)
    all_args = (table.all_ids, table.pair_ptr, table.node_ptr, table.nodes)
    transit = max(range(n), key=lambda i: len(table.through(i)[0]))
    sub = table.through(transit)
    return {
        "path_volumes": lambda k: k.path_volumes(pce, demand, choice, True, *all_args),
        "island_loads": lambda k: k.island_loads(
            k.path_volumes(pce, demand, choice, True, *all_args), table.node_ptr, table.nodes, n),
        "load_at": lambda k: k.load_at(transit, pce, demand, choice, True, *sub),
        "load_at_batch16": lambda k: k.load_at_batch(transit, rows, demand, choice, True, *sub),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    t = generate_topology(TopologyConfig())
    table = routing_table(t)
    backends = {"numpy": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{table.n_pairs} pairs, {len(table.nodes)} path entries, repeat={args.repeat}")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases(table, t.n).items():
        times = {b: min(timeit.repeat(lambda: fn(k), number=args.repeat, repeat=3)) / args.repeat
                 for b, k in backends.items()}
        speed = times["numpy"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:<16}" + "".join(f"{v * 1e6:>10.1f}us" for v in times.values()) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
