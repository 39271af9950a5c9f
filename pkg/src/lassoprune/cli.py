"""Command-line front end: gen / prune / eval / sweep.

    lassoprune gen --out problem/ --seed 7 --pattern semi:2:4
    lassoprune prune problem/manifest.json --parallel 4
    lassoprune eval problem/manifest.json
    lassoprune sweep problem/manifest.json --out sweeps/

Exit status: 0 on success, 1 if any unit failed (or eval found missing
files), 2 on bad arguments or invalid inputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import FormatError, GraphError, ParameterError, ShapeError
from .runner import (
    eval_error,
    generate_problem,
    load_manifest,
    report_ok,
    run_prune,
    sweep,
    tuner_from_options,
    tuner_to_options,
)
from .sparsity import parse_pattern

_TUNER_FLAGS = ("lambda0", "K", "T", "epsilon", "xi", "stop_tol")


def _add_tuner_flags(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("tuner options")
    group.add_argument("--lambda0", type=float, help="initial L1 penalty (default 1e-5)")
    group.add_argument("--K", type=int, help="solver iterations per round (default 20)")
    group.add_argument("--T", type=int, help="non-improving rounds allowed (default 3)")
    group.add_argument(
        "--epsilon", type=float, help="relative-improvement stop threshold (default 1e-6)"
    )
    group.add_argument(
        "--xi", type=float, help="rounding-share threshold for the bisection (default 0.3)"
    )
    group.add_argument(
        "--stop-tol", dest="stop_tol", type=float, help="solver early-stop tolerance"
    )
    group.add_argument(
        "--deterministic",
        action="store_true",
        help="pin deterministic reductions (already the default behaviour)",
    )


def _tuner_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for flag in _TUNER_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = value
    if getattr(args, "deterministic", False):
        overrides["deterministic"] = True
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lassoprune",
        description="Layer-wise pruning of linear operators by L1-regularized "
        "output reconstruction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic problem + manifest")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--units", type=int, default=2)
    gen.add_argument("--nodes", type=int, default=2, help="nodes per unit (chain)")
    gen.add_argument("--rows", type=int, default=8)
    gen.add_argument("--cols", type=int, default=8)
    gen.add_argument("--samples", type=int, default=128, help="calibration columns")
    gen.add_argument("--activation", choices=("none", "relu"), default="relu")
    gen.add_argument("--pattern", default="unstructured:0.5")
    gen.add_argument("--warm", choices=("magnitude", "wanda"), default="wanda")
    _add_tuner_flags(gen)

    prune = sub.add_parser("prune", help="prune all units of a manifest")
    prune.add_argument("manifest")
    prune.add_argument("--parallel", type=int, default=1, metavar="N")
    prune.add_argument("--no-correction", action="store_true")
    prune.add_argument("--report", help="report path (default: next to the manifest)")
    prune.add_argument("--pruned-dir", help="write pruned arrays here instead")
    prune.add_argument("--pattern", help="override the manifest pattern")
    prune.add_argument("--warm", choices=("magnitude", "wanda"))
    prune.add_argument("--seed", type=int, help="override the manifest seed (echo only)")
    _add_tuner_flags(prune)

    ev = sub.add_parser("eval", help="held-out output errors of pruned units")
    ev.add_argument("manifest")
    ev.add_argument("--pruned-dir")
    ev.add_argument("--samples", type=int, help="held-out columns (default: as calibration)")

    sw = sub.add_parser("sweep", help="prune at several unstructured rates")
    sw.add_argument("manifest")
    sw.add_argument("--out", required=True, help="output directory for reports")
    sw.add_argument(
        "--rates",
        default="0.1,0.2,0.3,0.4,0.5,0.6,0.7",
        help="comma-separated unstructured rates",
    )
    sw.add_argument("--parallel", type=int, default=1, metavar="N")
    sw.add_argument("--no-correction", action="store_true")
    return parser


def _cmd_gen(args) -> int:
    manifest = generate_problem(
        args.out,
        seed=args.seed,
        units=args.units,
        nodes_per_unit=args.nodes,
        rows=args.rows,
        cols=args.cols,
        samples=args.samples,
        activation=args.activation,
        pattern=args.pattern,
        warm=args.warm,
        tuner=_tuner_overrides(args) or None,
    )
    print(manifest)
    return 0


def _cmd_prune(args) -> int:
    manifest = load_manifest(args.manifest)
    overrides = _tuner_overrides(args)
    if overrides:
        merged = tuner_to_options(manifest.tuner) | overrides
        manifest = dataclasses.replace(manifest, tuner=tuner_from_options(merged))
    if args.pattern:
        manifest = dataclasses.replace(manifest, pattern=parse_pattern(args.pattern))
    if args.warm:
        manifest = dataclasses.replace(manifest, warm=args.warm)
    if args.seed is not None:
        manifest = dataclasses.replace(manifest, seed=args.seed)
    report_path = args.report or (manifest.base_dir / "report.json")
    report = run_prune(
        manifest,
        parallelism=args.parallel,
        corrected=not args.no_correction,
        report_path=report_path,
        pruned_dir=args.pruned_dir,
    )
    print(report_path)
    return 0 if report_ok(report) else 1


def _cmd_eval(args) -> int:
    result = eval_error(args.manifest, pruned_dir=args.pruned_dir, samples=args.samples)
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0 if all("error" not in u for u in result["units"].values()) else 1


def _cmd_sweep(args) -> int:
    rates = [float(r) for r in args.rates.split(",") if r.strip()]
    summary = sweep(
        args.manifest,
        rates,
        args.out,
        parallelism=args.parallel,
        corrected=not args.no_correction,
    )
    print(json.dumps(summary, indent=2, sort_keys=True))
    failed = sum(entry["failed_units"] for entry in summary["per_rate"].values())
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"gen": _cmd_gen, "prune": _cmd_prune, "eval": _cmd_eval, "sweep": _cmd_sweep}
    try:
        return handlers[args.command](args)
    except (ParameterError, ShapeError, GraphError, FormatError, FileNotFoundError) as exc:
        print(f"lassoprune: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
