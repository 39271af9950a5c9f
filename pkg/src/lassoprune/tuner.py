"""Outer loop: alternate solves and rounding while adapting the L1 penalty.

One operator is pruned by repeating

    solve (warm-started at the best candidate so far)
    round to the target pattern
    score:  e_total = ||rounded @ acts - target||_F
            e_round = e_total - ||unrounded @ acts - target||_F

and keeping the best rounded candidate seen. The penalty is adjusted by
bisection on ``[lambda_lo, lambda_hi]``: a rounding share ``e_round/e_total``
above ``ratio_threshold`` means the solve left too little sparsity for the
rounding step, so the penalty moves up; otherwise it moves down. The loop
stops after ``patience`` total non-improving rounds, when an accepted
improvement falls below ``improvement_tol`` (relative), or when the
bisection interval collapses.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import NumericalError, ParameterError, ShapeError
from .linalg import Matrix, as_matrix, frobenius_norm, matmul
from .solver import FistaSettings, fista_run
from .sparsity import SparsityPattern, round_to_pattern, satisfies_pattern

log = logging.getLogger(__name__)

STOP_NON_IMPROVEMENT = "non_improvement"
STOP_EPSILON = "epsilon"
STOP_INTERVAL_COLLAPSE = "interval_collapse"

# Interval width below this fraction of lambda_hi counts as collapsed.
INTERVAL_COLLAPSE_REL = 1e-12


@dataclass(frozen=True)
class TunerConfig:
    """Hyperparameters of the outer pruning loop.

    ``patience`` counts non-improving rounds over the whole run (it is never
    reset by an improvement). ``improvement_tol`` stops the loop once an
    accepted improvement is relatively tiny; until the first improvement it
    never fires.
    """

    lambda_init: float = 1e-5
    lambda_lo: float = 0.0
    lambda_hi: float = 1e6
    ratio_threshold: float = 0.3
    patience: int = 3
    improvement_tol: float = 1e-6
    fista: FistaSettings = field(default_factory=FistaSettings)

    def __post_init__(self):
        if not 0.0 <= self.lambda_lo < self.lambda_init < self.lambda_hi:
            raise ParameterError(
                f"need lambda_lo < lambda_init < lambda_hi, got "
                f"[{self.lambda_lo}, {self.lambda_init}, {self.lambda_hi}]"
            )
        if not 0.0 < self.ratio_threshold < 1.0:
            raise ParameterError(
                f"ratio_threshold must lie in (0, 1), got {self.ratio_threshold}"
            )
        if self.patience < 1:
            raise ParameterError(f"patience must be >= 1, got {self.patience}")
        if self.improvement_tol < 0:
            raise ParameterError(
                f"improvement_tol must be >= 0, got {self.improvement_tol}"
            )


@dataclass(frozen=True)
class BisectionState:
    lo: float
    hi: float
    lam: float

    def __post_init__(self):
        if not self.lo <= self.lam <= self.hi:
            raise ParameterError(
                f"penalty {self.lam} outside interval [{self.lo}, {self.hi}]"
            )

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class OperatorPruneResult:
    weights: Matrix
    best_total_error: float
    lambda_trace: list[tuple[float, float, float]]  # (lam, e_total, e_round)
    outer_iterations: int
    stop_reason: str
    fista_iterations: int = 0


def compute_errors(
    rounded: Matrix, unrounded: Matrix, acts: Matrix, target: Matrix
) -> tuple[float, float]:
    """Total error of the rounded candidate and the share rounding added."""
    e_total = frobenius_norm(matmul(rounded, acts) - target)
    e_round = e_total - frobenius_norm(matmul(unrounded, acts) - target)
    return e_total, e_round


def bisect_lambda(state: BisectionState, ratio: float, threshold: float) -> BisectionState:
    """One bisection step on the penalty interval.

    ``ratio`` is clamped to [0, 1] first (rounding can accidentally reduce
    error, making it negative). Above ``threshold`` the new interval is the
    upper half; otherwise the lower half. The interval never widens.
    """
    if math.isnan(ratio):
        raise ParameterError("ratio is NaN")
    clamped = min(max(ratio, 0.0), 1.0)
    if clamped > threshold:
        return BisectionState(state.lam, state.hi, 0.5 * (state.lam + state.hi))
    return BisectionState(state.lo, state.lam, 0.5 * (state.lo + state.lam))


def prune_operator(
    weight: Matrix,
    dense_input: Matrix,
    solver_input: Matrix,
    pattern: SparsityPattern,
    warm_start: Matrix,
    cfg: TunerConfig | None = None,
) -> OperatorPruneResult:
    """Prune one linear operator to ``pattern``.

    The reconstruction target is ``weight @ dense_input``; the solver fits
    against ``solver_input`` (the input the pruned operator will actually
    see; pass the same matrix twice outside unit propagation). The returned
    weights always satisfy ``pattern``, and the best candidate is initialized
    to the rounded warm start, so the result is never worse than that.
    """
    cfg = cfg or TunerConfig()
    weight = as_matrix(weight, "weight")
    dense_input = as_matrix(dense_input, "dense_input")
    solver_input = as_matrix(solver_input, "solver_input")
    warm = as_matrix(warm_start, "warm_start")
    if solver_input.shape != dense_input.shape:
        raise ShapeError(
            f"solver input {solver_input.shape} must match dense input "
            f"{dense_input.shape}"
        )
    if warm.shape != weight.shape:
        raise ShapeError(
            f"warm start {warm.shape} must match weight {weight.shape}"
        )

    target = matmul(weight, dense_input)
    if not satisfies_pattern(warm, pattern):
        log.warning("warm start violates the target pattern; rounding it first")
    best = round_to_pattern(warm, pattern)
    e_best = frobenius_norm(best @ solver_input - target)
    if e_best == 0.0:
        return OperatorPruneResult(best, 0.0, [], 0, STOP_EPSILON, 0)

    state = BisectionState(cfg.lambda_lo, cfg.lambda_hi, cfg.lambda_init)
    trace: list[tuple[float, float, float]] = []
    misses = 0
    relative_gain = math.inf
    inner_total = 0
    while True:
        try:
            solved = fista_run(target, solver_input, state.lam, best, cfg.fista)
        except NumericalError as exc:
            raise NumericalError(f"solve failed at lambda={state.lam:g}: {exc}") from exc
        inner_total += solved.iterations_used
        candidate = round_to_pattern(solved.weights, pattern)
        e_total, e_round = compute_errors(candidate, solved.weights, solver_input, target)
        trace.append((state.lam, e_total, e_round))
        if e_total < e_best:
            best = candidate
            relative_gain = (e_best - e_total) / e_best
            e_best = e_total
        else:
            misses += 1
        if e_total == 0.0:
            reason = STOP_EPSILON  # nothing left to improve; ratio is undefined
            break
        state = bisect_lambda(state, e_round / e_total, cfg.ratio_threshold)
        if misses >= cfg.patience:
            reason = STOP_NON_IMPROVEMENT
            break
        if relative_gain < cfg.improvement_tol:
            reason = STOP_EPSILON
            break
        if state.width < INTERVAL_COLLAPSE_REL * cfg.lambda_hi:
            reason = STOP_INTERVAL_COLLAPSE
            break
    return OperatorPruneResult(best, e_best, trace, len(trace), reason, inner_total)
