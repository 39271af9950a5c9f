"""Dense matrix primitives used by the pruning solver.

All routines take and return 2-D float64 numpy arrays. Inputs are validated
on entry: matrices must be two-dimensional, non-empty, and finite. Everything
here is a pure function, so concurrent callers are safe.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ConvergenceWarning, ParameterError, ShapeError

Matrix = np.ndarray


def as_matrix(a, name: str = "matrix") -> Matrix:
    """Validate ``a`` as a non-empty, finite, 2-D float64 array."""
    out = np.asarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={out.ndim}")
    rows, cols = out.shape
    if rows == 0 or cols == 0:
        raise ShapeError(f"{name} must be non-empty, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ParameterError(f"{name} contains non-finite entries")
    return out


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product ``a @ b`` with shape checking."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def frobenius_norm(a: Matrix) -> float:
    """Square root of the sum of squared entries."""
    return float(np.linalg.norm(as_matrix(a)))


def lipschitz_constant(acts: Matrix, tol: float = 1e-6, max_iters: int = 1000) -> float:
    """Largest eigenvalue of ``acts @ acts.T`` (the squared spectral norm).

    Computed by power iteration on the smaller of the two Gram matrices,
    which share their nonzero spectrum. The start vector is the normalized
    all-ones vector with a tiny index-dependent perturbation so that runs
    are deterministic. Iteration stops once the relative change of the
    Rayleigh quotient drops below ``tol``; hitting ``max_iters`` first
    emits a ``ConvergenceWarning`` and returns the best estimate.

    An all-zero input returns exactly 0.0.
    """
    a = as_matrix(acts, "acts")
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if max_iters < 1:
        raise ParameterError(f"max_iters must be >= 1, got {max_iters}")

    rows, cols = a.shape
    gram = a @ a.T if rows <= cols else a.T @ a
    if not gram.any():
        return 0.0

    dim = gram.shape[0]
    v = np.ones(dim) + 1e-8 * np.arange(1, dim + 1)
    v /= np.linalg.norm(v)
    estimate = float(v @ gram @ v)
    for _ in range(max_iters):
        w = gram @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # start vector fell in the null space; reseed once and continue
            v = np.arange(1.0, dim + 1)
            v /= np.linalg.norm(v)
            continue
        v = w / norm_w
        refined = float(v @ gram @ v)
        if abs(refined - estimate) <= tol * max(abs(refined), np.finfo(float).tiny):
            return max(refined, 0.0)
        estimate = refined
    warnings.warn(
        f"power iteration did not reach tol={tol} within {max_iters} iterations",
        ConvergenceWarning,
        stacklevel=2,
    )
    return max(estimate, 0.0)


def soft_shrinkage(a: Matrix, rho: float) -> Matrix:
    """Elementwise shrink-toward-zero by ``rho``.

    Entries with ``|x| <= rho`` become 0; the rest move ``rho`` toward zero.
    This is the proximal operator of ``rho * sum(|x|)``. ``rho == 0`` returns
    the input unchanged.
    """
    a = as_matrix(a)
    if rho < 0:
        raise ParameterError(f"rho must be non-negative, got {rho}")
    return np.sign(a) * np.maximum(np.abs(a) - rho, 0.0)
