"""Command-line interface.

Subcommands communicate only through the documented text formats (topology,
tree dump, schedule dump, sweep config), so each stage can be audited or
replaced independently. Exit codes: 0 success, 1 verifier violations,
2 usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    parse_sweep_config,
    plot_data,
    run_sweep,
    summarize,
    summary_csv,
    trials_csv,
)
from .model import Params
from .netgen import GenerationError, dump_topology, generate_network, load_topology
from .scheduler import (
    CandidatePolicy,
    aggregation_delay,
    brute_force_optimal,
    dump_schedule,
    load_schedule,
    schedule,
    verify_schedule,
)
from .tree import build_ddas_tree, build_spt_tree, compute_layers, dump_tree, load_tree

_POLICY_BY_NAME = {
    "all-leaves": CandidatePolicy.ALL_LEAVES,
    "layered": CandidatePolicy.DEEPEST_LAYER_ONLY,
}


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--nodes", type=int, required=True, help="number of nodes incl. sink")
    parser.add_argument("--area", type=float, default=100.0, help="deployment square side (m)")
    parser.add_argument("--range", dest="comm_range", type=float, default=20.0,
                        help="communication range (m)")
    parser.add_argument("--irange", dest="interference_range", type=float, default=None,
                        help="interference range (m), defaults to --range")
    parser.add_argument("--period", type=int, default=20, help="working period length (slots)")
    parser.add_argument("--active", type=int, default=2, help="active slots per period")
    parser.add_argument("--channels", type=int, default=3, help="number of channels")
    parser.add_argument("--seed", type=int, default=0, help="generation seed")


def _params_from_args(args: argparse.Namespace) -> Params:
    return Params(
        node_count=args.nodes,
        area_side=args.area,
        comm_range=args.comm_range,
        interference_range=args.interference_range,
        period_length=args.period,
        active_slot_count=args.active,
        channel_count=args.channels,
        rng_seed=args.seed,
    )


def _cmd_gen(args: argparse.Namespace) -> int:
    net = generate_network(_params_from_args(args))
    _write(args.dump_topology, dump_topology(net))
    return 0


def _cmd_tree(args: argparse.Namespace) -> int:
    net = load_topology(_read(args.load_topology))
    layering = compute_layers(net)
    build = build_ddas_tree if args.method == "ddas" else build_spt_tree
    _write(args.dump_tree, dump_tree(build(net, layering), layering))
    return 0


def _cmd_sched(args: argparse.Namespace) -> int:
    net = load_topology(_read(args.load_topology))
    tree = load_tree(_read(args.load_tree), net.node_count)
    sched = schedule(net, tree, _POLICY_BY_NAME[args.policy])
    _write(args.dump_schedule, dump_schedule(sched))
    out = sys.stderr if args.dump_schedule == "-" else sys.stdout
    print(f"delay {aggregation_delay(sched)}", file=out)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    net = load_topology(_read(args.load_topology))
    tree = load_tree(_read(args.load_tree), net.node_count)
    sched = load_schedule(_read(args.load_schedule))
    violations = verify_schedule(net, tree, sched)
    if violations:
        for v in violations:
            print(v)
        print(f"{len(violations)} violation(s)")
        return 1
    print("ok")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    net = load_topology(_read(args.load_topology))
    tree = load_tree(_read(args.load_tree), net.node_count)
    horizon = args.horizon if args.horizon is not None else 3 * net.params.period_length
    best = brute_force_optimal(net, tree, horizon)
    if best is None:
        print("none")
    else:
        print(f"delay {aggregation_delay(best)}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = parse_sweep_config(_read(args.config))
    result = run_sweep(spec, jobs=args.jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trials.csv").write_text(trials_csv(result))
    (out_dir / "summary.csv").write_text(summary_csv(result))
    print(f"wrote {out_dir / 'trials.csv'}")
    print(f"wrote {out_dir / 'summary.csv'}")
    if args.emit_plotdata:
        plot_path = out_dir / f"fig_{spec.swept_field}.dat"
        plot_path.write_text(plot_data(result))
        print(f"wrote {plot_path}")
    for row in summarize(result):
        print(
            f"{spec.swept_field}={row.value}: ndas {row.baseline_mean:.2f} "
            f"ddas {row.improved_mean:.2f} improvement {row.improvement:.1%}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aggsched",
        description="Aggregation scheduling for duty-cycled multichannel sensor networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a connected topology file")
    _add_param_flags(p)
    p.add_argument("--dump-topology", default="-", help="output path, - for stdout")
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("tree", help="build an aggregation tree from a topology")
    p.add_argument("--load-topology", default="-", help="topology path, - for stdin")
    p.add_argument("--method", choices=("ddas", "spt"), default="ddas")
    p.add_argument("--dump-tree", default="-", help="output path, - for stdout")
    p.set_defaults(handler=_cmd_tree)

    p = sub.add_parser("sched", help="schedule transmissions over a tree")
    p.add_argument("--load-topology", required=True)
    p.add_argument("--load-tree", required=True)
    p.add_argument("--policy", choices=sorted(_POLICY_BY_NAME), default="all-leaves")
    p.add_argument("--dump-schedule", default="-", help="output path, - for stdout")
    p.set_defaults(handler=_cmd_sched)

    p = sub.add_parser("verify", help="check a schedule against topology and tree")
    p.add_argument("--load-topology", required=True)
    p.add_argument("--load-tree", required=True)
    p.add_argument("--load-schedule", required=True)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("oracle", help="exact minimum delay for a tiny instance")
    p.add_argument("--load-topology", required=True)
    p.add_argument("--load-tree", required=True)
    p.add_argument("--horizon", type=int, default=None,
                   help="slot horizon, defaults to 3 periods")
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    p.add_argument("--config", required=True, help="key=value sweep config path")
    p.add_argument("--out-dir", required=True, help="directory for CSV outputs")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--emit-plotdata", action="store_true",
                   help="also write one whitespace-separated file for plotting")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, GenerationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
