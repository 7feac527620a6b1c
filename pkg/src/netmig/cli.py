"""Command line entry point: ``netmig run | validate | topo``."""

import argparse
import logging
import sys

from netmig.config import ConfigError, load_config
from netmig.dynamics import SimConfig
from netmig.economics import validate_params
from netmig.harness import PRESETS, emit, preset, run_experiment
from netmig.topology import TopologyConfig, generate_topology, save_topology


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netmig", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment preset")
    run.add_argument("--preset", required=True, choices=sorted(PRESETS))
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--profiles", type=int, default=50)
    run.add_argument("--replicas", type=int, default=5)
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--config", help="flat key = value file overriding defaults")
    run.add_argument("--workers", type=int, default=1)

    val = sub.add_parser("validate", help="check a config file's economic parameters")
    val.add_argument("--config", required=True)
    val.add_argument("--strict", action="store_true", help="gate on every literal inequality")

    topo = sub.add_parser("topo", help="generate and save a topology")
    topo.add_argument("--n", type=int, default=100)
    topo.add_argument("--seed", type=int, default=7)
    topo.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "topo":
        t = generate_topology(TopologyConfig.scaled(args.n, rng_seed=args.seed))
        save_topology(t, args.out)
        print(f"wrote {args.out}: {len(t.transits)} transit, {len(t.stubs)} stub islands")
        return 0

    try:
        base = load_config(args.config) if args.config else SimConfig()
    except (ConfigError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        bad = validate_params(base.econ, strict=args.strict)
        if bad:
            print("violated: " + ", ".join(bad))
            return 1
        print("ok")
        return 0

    spec = preset(args.preset, args.profiles, args.replicas, args.seed, base)
    try:
        result = run_experiment(spec, workers=args.workers)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    files = emit(result, args.format, args.out)
    for name, arm in result.arms.items():
        pce, sdn, both = arm.mean[-1]
        print(f"{name:>14}: pce={pce:.2f} sdn={sdn:.2f} both={both:.2f}")
    print(f"wrote {len(files)} files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
