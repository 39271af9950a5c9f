"""Manifest handling, synthetic problem generation, the unit runner, and
report emission: the operational shell around the solver.

A manifest is a JSON file describing units (nodes, weight files, wiring,
activations), a calibration-activation file, the target pattern, warm-start
kind, tuner overrides, and a seed. ``run_prune`` prunes all units (optionally
in parallel), writes each pruned weight matrix next to its original with a
``.pruned`` suffix, and returns a JSON-ready report. Reports are
deterministic for a fixed seed apart from fields ending in ``_seconds``.
"""

from __future__ import annotations

import dataclasses
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, ShapeError
from .npyio import load_array, save_array
from .solver import FistaSettings
from .sparsity import (
    SemiStructured,
    SparsityPattern,
    Unstructured,
    format_pattern,
    parse_pattern,
    sparsity_of,
)
from .tuner import TunerConfig
from .unitgraph import (
    WARM_START_KINDS,
    OperatorNode,
    PruneUnit,
    UnitPruneResult,
    dense_forward,
    prune_unit,
    prune_unit_uncorrected,
)

MANIFEST_VERSION = 1
REPORT_VERSION = 1
_EVAL_STREAM = 104729  # decorrelates held-out activations from calibration


@dataclass
class NodeSpec:
    name: str
    weights: str
    input_ref: str | None = None
    activation: str = "none"


@dataclass
class UnitSpec:
    name: str
    nodes: list[NodeSpec]
    calibration: str | None = None  # overrides the manifest-level file


@dataclass
class Manifest:
    seed: int
    pattern: SparsityPattern
    warm: str
    calibration: str
    tuner: TunerConfig
    units: list[UnitSpec]
    base_dir: Path = field(default_factory=Path)
    version: int = MANIFEST_VERSION


def tuner_from_options(options: dict | None) -> TunerConfig:
    """Build a TunerConfig from the external option names used by manifests
    and the command line (lambda0, xi, T, epsilon, K, stop_tol, ...)."""
    options = dict(options or {})
    fista = FistaSettings(
        max_iters=int(options.pop("K", 20)),
        stop_tol=float(options.pop("stop_tol", 1e-6)),
        deterministic=bool(options.pop("deterministic", True)),
    )
    cfg = TunerConfig(
        lambda_init=float(options.pop("lambda0", 1e-5)),
        lambda_lo=float(options.pop("lambda_lo", 0.0)),
        lambda_hi=float(options.pop("lambda_hi", 1e6)),
        ratio_threshold=float(options.pop("xi", 0.3)),
        patience=int(options.pop("T", 3)),
        improvement_tol=float(options.pop("epsilon", 1e-6)),
        fista=fista,
    )
    if options:
        raise ParameterError(f"unknown tuner options: {sorted(options)}")
    return cfg


def tuner_to_options(cfg: TunerConfig) -> dict:
    return {
        "lambda0": cfg.lambda_init,
        "lambda_lo": cfg.lambda_lo,
        "lambda_hi": cfg.lambda_hi,
        "xi": cfg.ratio_threshold,
        "T": cfg.patience,
        "epsilon": cfg.improvement_tol,
        "K": cfg.fista.max_iters,
        "stop_tol": cfg.fista.stop_tol,
        "deterministic": cfg.fista.deterministic,
    }


def load_manifest(path, validate: bool = True) -> Manifest:
    """Parse and (by default) fully validate a manifest file.

    Validation loads every referenced array and wires up each unit, so shape
    clashes and missing files fail here rather than mid-run.
    """
    path = Path(path)
    raw = json.loads(path.read_text())
    if raw.get("version") != MANIFEST_VERSION:
        raise ParameterError(
            f"unsupported manifest version {raw.get('version')!r}; "
            f"expected {MANIFEST_VERSION}"
        )
    warm = raw.get("warm_start", "wanda")
    if warm not in WARM_START_KINDS:
        raise ParameterError(f"unknown warm start kind {warm!r}")
    units = []
    for unit_raw in raw["units"]:
        nodes = [
            NodeSpec(
                name=node["id"],
                weights=node["weights"],
                input_ref=node.get("input"),
                activation=node.get("activation", "none"),
            )
            for node in unit_raw["nodes"]
        ]
        units.append(UnitSpec(unit_raw["name"], nodes, unit_raw.get("calibration")))
    names = [u.name for u in units]
    if len(set(names)) != len(names):
        raise ParameterError(f"duplicate unit names in {path}")
    manifest = Manifest(
        seed=int(raw["seed"]),
        pattern=parse_pattern(raw["pattern"]),
        warm=warm,
        calibration=raw["calibration"],
        tuner=tuner_from_options(raw.get("tuner")),
        units=units,
        base_dir=path.parent,
    )
    if validate:
        for spec in manifest.units:
            build_unit(manifest, spec)
    return manifest


def save_manifest(manifest: Manifest, path) -> Path:
    doc = {
        "version": manifest.version,
        "seed": manifest.seed,
        "pattern": format_pattern(manifest.pattern),
        "warm_start": manifest.warm,
        "calibration": manifest.calibration,
        "tuner": tuner_to_options(manifest.tuner),
        "units": [
            {
                "name": spec.name,
                **({"calibration": spec.calibration} if spec.calibration else {}),
                "nodes": [
                    {
                        "id": node.name,
                        "weights": node.weights,
                        "input": node.input_ref,
                        "activation": node.activation,
                    }
                    for node in spec.nodes
                ],
            }
            for spec in manifest.units
        ],
    }
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def build_unit(manifest: Manifest, spec: UnitSpec) -> tuple[PruneUnit, np.ndarray]:
    """Load a unit's weights plus its calibration input."""
    calib = load_array(manifest.base_dir / (spec.calibration or manifest.calibration))
    nodes = [
        OperatorNode(
            name=node.name,
            weight=load_array(manifest.base_dir / node.weights),
            input_ref=node.input_ref,
            activation=node.activation,
        )
        for node in spec.nodes
    ]
    return PruneUnit(spec.name, calib.shape[0], tuple(nodes)), calib


def generate_problem(
    out_dir,
    seed: int = 0,
    units: int = 2,
    nodes_per_unit: int = 2,
    rows: int = 8,
    cols: int = 8,
    samples: int = 128,
    activation: str = "relu",
    pattern: str = "unstructured:0.5",
    warm: str = "wanda",
    tuner: dict | None = None,
) -> Path:
    """Write a synthetic chain-unit problem and return the manifest path.

    Weights are Gaussian with 1/sqrt(fan_in) scale; the calibration input is
    standard Gaussian with ``samples`` columns. The draw order is fixed
    (calibration first, then units in order, nodes in order), so identical
    seeds produce byte-identical files. ``activation="relu"`` puts a relu on
    every node but the last of each chain; ``"none"`` disables activations.
    """
    if activation not in ("none", "relu"):
        raise ParameterError(f"unknown activation mix {activation!r}")
    if min(units, nodes_per_unit, rows, cols, samples) < 1:
        raise ParameterError("units, nodes, dims and samples must all be positive")
    parsed = parse_pattern(pattern)  # fail fast on typos
    if isinstance(parsed, SemiStructured):
        fan_ins = {cols} | ({rows} if nodes_per_unit > 1 else set())
        for fan_in in fan_ins:
            if fan_in % parsed.group_size:
                raise ShapeError(
                    f"fan-in {fan_in} is not divisible by group size "
                    f"{parsed.group_size}; the generated problem could never "
                    f"satisfy {pattern!r}"
                )
    cfg = tuner_from_options(tuner)  # validates the overrides
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    calib_file = "calibration.npy"
    save_array(out_dir / calib_file, rng.standard_normal((cols, samples)))

    unit_specs = []
    for u in range(units):
        nodes = []
        for i in range(nodes_per_unit):
            fan_in = cols if i == 0 else rows
            weight = rng.standard_normal((rows, fan_in)) / np.sqrt(fan_in)
            fname = f"unit{u}_n{i}.npy"
            save_array(out_dir / fname, weight)
            act = "relu" if activation == "relu" and i < nodes_per_unit - 1 else "none"
            nodes.append(
                NodeSpec(
                    name=f"n{i}",
                    weights=fname,
                    input_ref=None if i == 0 else f"n{i - 1}",
                    activation=act,
                )
            )
        unit_specs.append(UnitSpec(f"unit{u}", nodes))

    manifest = Manifest(
        seed=seed,
        pattern=parse_pattern(pattern),
        warm=warm,
        calibration=calib_file,
        tuner=cfg,
        units=unit_specs,
        base_dir=out_dir,
    )
    return save_manifest(manifest, out_dir / "manifest.json")


def pruned_path(manifest: Manifest, weights: str, pruned_dir=None) -> Path:
    """`unit0_n0.npy` -> `unit0_n0.pruned.npy`, optionally in ``pruned_dir``."""
    original = Path(weights)
    name = original.stem + ".pruned" + original.suffix
    if pruned_dir is not None:
        return Path(pruned_dir) / name
    return manifest.base_dir / original.parent / name


def _unit_record(
    manifest: Manifest,
    spec: UnitSpec,
    result: UnitPruneResult,
    pruned_dir,
) -> dict:
    nodes = {}
    for node in spec.nodes:
        res = result.node_results[node.name]
        out_path = pruned_path(manifest, node.weights, pruned_dir)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        save_array(out_path, res.weights)
        nodes[node.name] = {
            "best_total_error": res.best_total_error,
            "achieved_sparsity": sparsity_of(res.weights),
            "outer_iterations": res.outer_iterations,
            "fista_iterations": res.fista_iterations,
            "stop_reason": res.stop_reason,
            "lambda_trace": [list(entry) for entry in res.lambda_trace],
            "pruned_file": str(out_path),
            "wall_seconds": result.node_seconds[node.name],
        }
    return {
        "status": "ok",
        "unit_output_error": result.unit_output_error,
        "nodes": nodes,
    }


def run_prune(
    manifest,
    parallelism: int = 1,
    corrected: bool = True,
    report_path=None,
    pruned_dir=None,
) -> dict:
    """Prune every unit of a manifest and return the report.

    Units run concurrently up to ``parallelism``; they are independent, so
    the outputs do not depend on the worker count. A unit that fails leaves
    no pruned files behind and appears in the report with status "failed".
    """
    if isinstance(manifest, (str, Path)):
        manifest = load_manifest(manifest)
    if parallelism < 1:
        raise ParameterError(f"parallelism must be >= 1, got {parallelism}")
    started = time.perf_counter()

    def work(spec: UnitSpec) -> UnitPruneResult:
        unit, calib = build_unit(manifest, spec)
        runner = prune_unit if corrected else prune_unit_uncorrected
        return runner(unit, calib, manifest.pattern, manifest.warm, manifest.tuner)

    outcomes: list[UnitPruneResult | Exception] = []
    if parallelism == 1:
        for spec in manifest.units:
            try:
                outcomes.append(work(spec))
            except Exception as exc:  # noqa: BLE001 - recorded per unit
                outcomes.append(exc)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(work, spec) for spec in manifest.units]
            for future in futures:
                try:
                    outcomes.append(future.result())
                except Exception as exc:  # noqa: BLE001
                    outcomes.append(exc)

    units = {}
    for spec, outcome in zip(manifest.units, outcomes):
        if isinstance(outcome, Exception):
            units[spec.name] = {
                "status": "failed",
                "error": f"{type(outcome).__name__}: {outcome}",
            }
        else:
            units[spec.name] = _unit_record(manifest, spec, outcome, pruned_dir)

    report = {
        "version": REPORT_VERSION,
        "seed": manifest.seed,
        "pattern": format_pattern(manifest.pattern),
        "warm_start": manifest.warm,
        "corrected": corrected,
        "config": tuner_to_options(manifest.tuner),
        "units": units,
        "total_seconds": time.perf_counter() - started,
    }
    if report_path is not None:
        Path(report_path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def report_ok(report: dict) -> bool:
    return all(unit.get("status") == "ok" for unit in report["units"].values())


def strip_timing(obj):
    """Recursive copy of a report with every ``*_seconds`` field removed."""
    if isinstance(obj, dict):
        return {
            key: strip_timing(value)
            for key, value in obj.items()
            if not key.endswith("_seconds")
        }
    if isinstance(obj, list):
        return [strip_timing(item) for item in obj]
    return obj


def eval_error(manifest, pruned_dir=None, samples: int | None = None) -> dict:
    """Dense-vs-pruned unit output errors on fresh held-out activations.

    The held-out input is drawn from a stream decorrelated from (but fully
    determined by) the manifest seed. Units whose pruned files are missing
    get an explicit error entry instead of failing the whole evaluation.
    """
    if isinstance(manifest, (str, Path)):
        manifest = load_manifest(manifest)
    rng = np.random.default_rng([manifest.seed, _EVAL_STREAM])
    units: dict[str, dict] = {}
    for spec in manifest.units:
        dense_unit, calib = build_unit(manifest, spec)
        holdout = rng.standard_normal((calib.shape[0], samples or calib.shape[1]))
        try:
            pruned_nodes = tuple(
                dataclasses.replace(
                    node, weight=load_array(pruned_path(manifest, ns.weights, pruned_dir))
                )
                for node, ns in zip(dense_unit.nodes, spec.nodes)
            )
        except FileNotFoundError as exc:
            units[spec.name] = {"error": f"missing pruned file: {exc.filename}"}
            continue
        pruned_unit = PruneUnit(spec.name, dense_unit.input_dim, pruned_nodes)
        dense_out = dense_forward(dense_unit, holdout)
        pruned_out = dense_forward(pruned_unit, holdout)
        gap_sq = sum(
            float(np.sum((dense_out[s] - pruned_out[s]) ** 2))
            for s in dense_unit.sink_names()
        )
        units[spec.name] = {"output_error": float(np.sqrt(gap_sq))}
    return {"units": units}


def sweep(
    manifest,
    rates,
    out_dir,
    parallelism: int = 1,
    corrected: bool = True,
) -> dict:
    """Run ``run_prune`` once per unstructured rate and summarize.

    Each rate gets its own pruned-file directory and report under
    ``out_dir``; the summary (also written to ``out_dir/sweep.json``) holds
    the mean node error and mean unit output error per rate, ready for
    plotting error against sparsity.
    """
    if isinstance(manifest, (str, Path)):
        manifest = load_manifest(manifest)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary: dict = {"rates": [float(r) for r in rates], "per_rate": {}}
    for rate in rates:
        tag = f"{float(rate):g}"
        swept = dataclasses.replace(manifest, pattern=Unstructured(float(rate)))
        report_file = out_dir / f"report_rate{tag}.json"
        report = run_prune(
            swept,
            parallelism=parallelism,
            corrected=corrected,
            report_path=report_file,
            pruned_dir=out_dir / f"rate{tag}",
        )
        node_errors = [
            node["best_total_error"]
            for unit in report["units"].values()
            if unit["status"] == "ok"
            for node in unit["nodes"].values()
        ]
        unit_errors = [
            unit["unit_output_error"]
            for unit in report["units"].values()
            if unit["status"] == "ok"
        ]
        summary["per_rate"][tag] = {
            "report": str(report_file),
            "mean_best_total_error": float(np.mean(node_errors)) if node_errors else None,
            "mean_unit_output_error": float(np.mean(unit_errors)) if unit_errors else None,
            "failed_units": sum(
                1 for unit in report["units"].values() if unit["status"] != "ok"
            ),
        }
    (out_dir / "sweep.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
