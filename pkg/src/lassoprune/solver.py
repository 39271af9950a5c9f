"""Accelerated proximal-gradient solver for the pruning objective.

The problem solved here, for a fixed penalty ``lam``:

    minimize over W:   0.5 * ||W @ acts - target||_F^2 + lam * sum(|W|)

``target`` is the output of the dense operator on its calibration input and
``acts`` is the input the pruned operator will actually see. The smooth term
is handled by gradient steps of size ``1/L`` (``L`` = largest eigenvalue of
``acts @ acts.T``), the L1 term by soft shrinkage, and a Nesterov momentum
step combines the two most recent shrinkage outputs for the O(1/k^2) rate.

``lasso_oracle`` solves the same problem by cyclic coordinate descent. It is
deliberately a different algorithm with no shared iteration code, so tests
can certify the accelerated solver against it. ``kkt_residual`` measures how
far a candidate is from satisfying the subgradient optimality conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, OracleError, ParameterError, ShapeError
from .linalg import Matrix, as_matrix, frobenius_norm, lipschitz_constant, soft_shrinkage


@dataclass(frozen=True)
class FistaSettings:
    """Iteration budget and stopping rule for one solve.

    ``stop_tol`` bounds the Frobenius distance between consecutive iterates;
    0 disables early stopping. ``deterministic`` pins sequential reductions;
    all current kernels are deterministic either way.
    """

    max_iters: int = 20
    stop_tol: float = 1e-6
    deterministic: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.stop_tol < 0:
            raise ParameterError(f"stop_tol must be >= 0, got {self.stop_tol}")


@dataclass
class FistaResult:
    weights: Matrix
    iterations_used: int
    objective_trace: list[float] = field(default_factory=list)
    converged_by_tol: bool = False


def _next_momentum_weight(t: float) -> float:
    """Momentum-weight recurrence: t0 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2."""
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))


def _check_problem(weights: Matrix, acts: Matrix, target: Matrix, lam: float):
    if weights.shape[1] != acts.shape[0]:
        raise ShapeError(
            f"weights {weights.shape} incompatible with activations {acts.shape}"
        )
    expected = (weights.shape[0], acts.shape[1])
    if target.shape != expected:
        raise ShapeError(f"target shape {target.shape} should be {expected}")
    if lam < 0:
        raise ParameterError(f"penalty must be non-negative, got {lam}")


def objective(weights: Matrix, acts: Matrix, target: Matrix, lam: float) -> float:
    """0.5 * ||weights @ acts - target||_F^2 + lam * sum(|weights|)."""
    weights = as_matrix(weights, "weights")
    acts = as_matrix(acts, "acts")
    target = as_matrix(target, "target")
    _check_problem(weights, acts, target, lam)
    residual = weights @ acts - target
    return 0.5 * float(np.sum(residual * residual)) + lam * float(np.abs(weights).sum())


def fista_run(
    target: Matrix,
    acts: Matrix,
    lam: float,
    warm_start: Matrix,
    settings: FistaSettings | None = None,
) -> FistaResult:
    """Run the accelerated solver from ``warm_start``.

    Each iteration takes a gradient step at the extrapolated point, applies
    soft shrinkage with threshold ``lam / L``, updates the momentum weight
    ``t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`` from ``t_0 = 1``, and
    extrapolates along the difference of the last two shrinkage outputs.
    The shrinkage output is the per-iteration solution estimate: it is what
    the stopping rule compares, what the objective trace records, and what
    the final result returns.

    Zero activations make the smooth term constant, so the all-zero matrix
    is returned immediately. Non-finite iterates raise ``NumericalError``
    naming the iteration.
    """
    settings = settings or FistaSettings()
    target = as_matrix(target, "target")
    acts = as_matrix(acts, "acts")
    warm = as_matrix(warm_start, "warm_start")
    _check_problem(warm, acts, target, lam)

    step_bound = lipschitz_constant(acts)
    if step_bound == 0.0:
        return FistaResult(np.zeros_like(warm), 0, [], True)

    gram = acts @ acts.T
    corr = target @ acts.T

    prox_prev = warm
    extrap = warm
    t = 1.0
    trace: list[float] = []
    iterations = 0
    converged = False
    for k in range(settings.max_iters):
        with np.errstate(over="ignore", invalid="ignore"):  # checked right below
            gradient = extrap @ gram - corr
            stepped = extrap - gradient / step_bound
        if not np.all(np.isfinite(stepped)):
            raise NumericalError(f"non-finite iterate at iteration {k + 1}")
        prox = soft_shrinkage(stepped, lam / step_bound)
        t_next = _next_momentum_weight(t)
        extrap = prox + ((t - 1.0) / t_next) * (prox - prox_prev)
        move = frobenius_norm(prox - prox_prev)
        trace.append(objective(prox, acts, target, lam))
        prox_prev = prox
        t = t_next
        iterations = k + 1
        if move < settings.stop_tol:
            converged = True
            break
    return FistaResult(prox_prev, iterations, trace, converged)


def lasso_oracle(
    target: Matrix,
    acts: Matrix,
    lam: float,
    tol: float = 1e-12,
    max_cycles: int = 100_000,
) -> Matrix:
    """Independent reference solution by cyclic coordinate descent.

    Starts from zero and sweeps coordinates (columns of the unknown) until the
    largest single-coordinate change in a full cycle drops below ``tol``.
    Intended for certifying ``fista_run`` in tests, not for production solves.
    """
    target = as_matrix(target, "target")
    acts = as_matrix(acts, "acts")
    if lam < 0:
        raise ParameterError(f"penalty must be non-negative, got {lam}")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")

    gram = acts @ acts.T
    corr = target @ acts.T
    rows, cols = corr.shape
    weights = np.zeros((rows, cols))
    diag = np.diag(gram).copy()
    for _ in range(max_cycles):
        worst = 0.0
        for j in range(cols):
            if diag[j] == 0.0:
                continue  # feature j never fires; its weight stays 0
            partial = corr[:, j] - weights @ gram[:, j] + weights[:, j] * diag[j]
            updated = np.sign(partial) * np.maximum(np.abs(partial) - lam, 0.0) / diag[j]
            worst = max(worst, float(np.max(np.abs(updated - weights[:, j]))))
            weights[:, j] = updated
        if worst < tol:
            return weights
    raise OracleError(
        f"coordinate descent did not reach tol={tol} within {max_cycles} cycles"
    )


def kkt_residual(weights: Matrix, acts: Matrix, target: Matrix, lam: float) -> float:
    """Largest violation of the subgradient optimality conditions.

    For nonzero entries the stationarity condition is ``grad + lam*sign = 0``;
    for zero entries it is ``|grad| <= lam``. Returns the max violation over
    all entries; an exact minimizer scores 0.
    """
    weights = as_matrix(weights, "weights")
    acts = as_matrix(acts, "acts")
    target = as_matrix(target, "target")
    _check_problem(weights, acts, target, lam)
    gradient = (weights @ acts - target) @ acts.T
    nonzero = weights != 0.0
    at_nonzero = np.abs(gradient + lam * np.sign(weights))[nonzero]
    at_zero = np.maximum(np.abs(gradient) - lam, 0.0)[~nonzero]
    return max(
        float(at_nonzero.max(initial=0.0)),
        float(at_zero.max(initial=0.0)),
    )
