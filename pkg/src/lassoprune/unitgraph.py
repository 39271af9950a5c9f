"""Pruning units: small DAGs of linear operators pruned in sequence.

A unit is an ordered list of nodes, each holding a weight matrix, reading
either the unit input (``input_ref=None``) or the output of an earlier node,
with an optional relu on its output. Chains and fan-out (several nodes
reading the same source) are supported; fan-in is not.

``prune_unit`` walks the nodes in order. Each node's reconstruction target is
its output in the fully dense unit, while the solver input is the propagated
output of the already-pruned predecessors, so errors made upstream are
corrected rather than compounded. ``prune_unit_uncorrected`` feeds every node
its dense input instead and exists for ablation comparisons.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import GraphError, ParameterError, ShapeError
from .linalg import Matrix, as_matrix, frobenius_norm
from .sparsity import (
    SemiStructured,
    SparsityPattern,
    Unstructured,
    round_to_pattern,
    zero_lowest_per_group,
    zero_lowest_per_row,
)
from .tuner import OperatorPruneResult, TunerConfig, prune_operator

ACTIVATIONS = ("none", "relu")
WARM_START_KINDS = ("magnitude", "wanda")


@dataclass(frozen=True, eq=False)
class OperatorNode:
    name: str
    weight: Matrix
    input_ref: str | None = None  # None reads the unit input
    activation: str = "none"

    def __post_init__(self):
        object.__setattr__(self, "weight", as_matrix(self.weight, f"weight of {self.name!r}"))
        if self.activation not in ACTIVATIONS:
            raise ParameterError(
                f"node {self.name!r}: unknown activation {self.activation!r}"
            )


@dataclass(frozen=True, eq=False)
class PruneUnit:
    name: str
    input_dim: int
    nodes: tuple[OperatorNode, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if self.input_dim < 1:
            raise GraphError(f"unit {self.name!r}: input_dim must be positive")
        if not self.nodes:
            raise GraphError(f"unit {self.name!r} has no nodes")
        produced: dict[str, int] = {}
        for node in self.nodes:
            if node.name in produced:
                raise GraphError(f"unit {self.name!r}: duplicate node {node.name!r}")
            if node.input_ref is None:
                in_dim = self.input_dim
            elif node.input_ref in produced:
                in_dim = produced[node.input_ref]
            else:
                raise GraphError(
                    f"unit {self.name!r}: edge {node.input_ref!r} -> {node.name!r} "
                    f"does not point at an earlier node"
                )
            if node.weight.shape[1] != in_dim:
                source = node.input_ref or "unit input"
                raise GraphError(
                    f"unit {self.name!r}: edge {source!r} -> {node.name!r} expects "
                    f"{node.weight.shape[1]} features but the source produces {in_dim}"
                )
            produced[node.name] = node.weight.shape[0]

    def sink_names(self) -> list[str]:
        referenced = {n.input_ref for n in self.nodes if n.input_ref is not None}
        return [n.name for n in self.nodes if n.name not in referenced]


@dataclass
class UnitPruneResult:
    unit_name: str
    node_results: dict[str, OperatorPruneResult]
    unit_output_error: float
    node_seconds: dict[str, float] = field(default_factory=dict)


def _activate(kind: str, out: Matrix) -> Matrix:
    return np.maximum(out, 0.0) if kind == "relu" else out


def dense_forward(unit: PruneUnit, x: Matrix) -> dict[str, Matrix]:
    """Post-activation output of every node, computed with dense weights."""
    x = as_matrix(x, "x")
    if x.shape[0] != unit.input_dim:
        raise ShapeError(
            f"unit {unit.name!r} expects {unit.input_dim} input features, "
            f"got {x.shape[0]}"
        )
    outputs: dict[str, Matrix] = {}
    for node in unit.nodes:
        source = x if node.input_ref is None else outputs[node.input_ref]
        outputs[node.name] = _activate(node.activation, node.weight @ source)
    return outputs


def warm_start(
    kind: str, weight: Matrix, acts: Matrix, pattern: SparsityPattern
) -> Matrix:
    """Initial sparse estimate to seed the solver.

    ``magnitude`` zeroes the smallest-magnitude entries via the rounding
    operator. ``wanda`` scores each entry by |weight| times the Euclidean
    norm of the matching input-feature row of ``acts`` and zeroes the
    lowest-scoring entries per output row (unstructured) or per m-group
    (semi-structured). With identity activations all row norms are 1 and the
    wanda scores reduce to plain magnitudes.
    """
    if kind not in WARM_START_KINDS:
        raise ParameterError(f"unknown warm start kind {kind!r}")
    weight = as_matrix(weight, "weight")
    if kind == "magnitude":
        return round_to_pattern(weight, pattern)
    acts = as_matrix(acts, "acts")
    if acts.shape[0] != weight.shape[1]:
        raise ShapeError(
            f"activations {acts.shape} incompatible with weight {weight.shape}"
        )
    feature_norms = np.sqrt(np.sum(acts * acts, axis=1))
    scores = np.abs(weight) * feature_norms[np.newaxis, :]
    if isinstance(pattern, Unstructured):
        # rounding up keeps every row at or above the global floor count, so
        # the warm start always satisfies the pattern it seeds
        per_row = int(np.ceil(pattern.rate * weight.shape[1]))
        return zero_lowest_per_row(weight, scores, per_row)
    assert isinstance(pattern, SemiStructured)
    return zero_lowest_per_group(weight, scores, pattern)


def _prune_nodes(
    unit: PruneUnit,
    x: Matrix,
    pattern: SparsityPattern,
    warm: str,
    cfg: TunerConfig | None,
    corrected: bool,
) -> UnitPruneResult:
    x = as_matrix(x, "x")
    if x.shape[0] != unit.input_dim:
        raise ShapeError(
            f"unit {unit.name!r} expects {unit.input_dim} input features, "
            f"got {x.shape[0]}"
        )
    dense_feed: dict[str, Matrix] = {}
    pruned_feed: dict[str, Matrix] = {}
    results: dict[str, OperatorPruneResult] = {}
    seconds: dict[str, float] = {}
    for node in unit.nodes:
        dense_src = x if node.input_ref is None else dense_feed[node.input_ref]
        propagated = x if node.input_ref is None else pruned_feed[node.input_ref]
        # the ablation switch changes what the solver fits against, never how
        # the pruned network itself is evaluated
        solver_src = propagated if corrected else dense_src
        started = time.perf_counter()
        seed = warm_start(warm, node.weight, solver_src, pattern)
        try:
            result = prune_operator(node.weight, dense_src, solver_src, pattern, seed, cfg)
        except Exception as exc:
            raise type(exc)(f"node {node.name!r}: {exc}") from exc
        seconds[node.name] = time.perf_counter() - started
        results[node.name] = result
        dense_feed[node.name] = _activate(node.activation, node.weight @ dense_src)
        pruned_feed[node.name] = _activate(node.activation, result.weights @ propagated)
    gap_sq = sum(
        frobenius_norm(dense_feed[s] - pruned_feed[s]) ** 2 for s in unit.sink_names()
    )
    return UnitPruneResult(unit.name, results, float(np.sqrt(gap_sq)), seconds)


def prune_unit(
    unit: PruneUnit,
    x: Matrix,
    pattern: SparsityPattern,
    warm: str = "wanda",
    cfg: TunerConfig | None = None,
) -> UnitPruneResult:
    """Prune every node with intra-unit error correction.

    Nodes are visited in order; each solve fits the dense target using the
    propagated outputs of the already-pruned upstream nodes as its input.
    ``unit_output_error`` is the Frobenius distance between the dense and
    pruned outputs at the unit's sink nodes.
    """
    return _prune_nodes(unit, x, pattern, warm, cfg, corrected=True)


def prune_unit_uncorrected(
    unit: PruneUnit,
    x: Matrix,
    pattern: SparsityPattern,
    warm: str = "wanda",
    cfg: TunerConfig | None = None,
) -> UnitPruneResult:
    """Ablation variant: every node is fit against its dense input."""
    return _prune_nodes(unit, x, pattern, warm, cfg, corrected=False)
