"""Sparsity patterns, the mask-only rounding step, and sparsity measurement.

Two pattern kinds are supported:

* ``Unstructured(rate)``: a fraction of all entries, chosen globally over
  the matrix, is set to zero. The count is ``floor(rate * size)``, so tiny
  matrices may land marginally below the requested rate.
* ``SemiStructured(zeros_per_group, group_size)``: within every contiguous
  group of ``group_size`` entries along each row, exactly ``zeros_per_group``
  entries are zeroed ("2:4" style; overall sparsity is their ratio).

Rounding is mask-only: surviving entries are bit-identical to the input.
Ties between equal selection scores are broken by the smaller row-major
index, so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError
from .linalg import Matrix, as_matrix


@dataclass(frozen=True)
class Unstructured:
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ParameterError(f"unstructured rate must lie in (0, 1), got {self.rate}")


@dataclass(frozen=True)
class SemiStructured:
    zeros_per_group: int
    group_size: int

    def __post_init__(self):
        if not 0 < self.zeros_per_group < self.group_size:
            raise ParameterError(
                f"need 0 < zeros_per_group < group_size, got "
                f"{self.zeros_per_group}:{self.group_size}"
            )


SparsityPattern = Unstructured | SemiStructured


def parse_pattern(text: str) -> SparsityPattern:
    """Parse ``"unstructured:0.5"`` or ``"semi:2:4"``."""
    parts = text.strip().split(":")
    if parts[0] == "unstructured" and len(parts) == 2:
        try:
            rate = float(parts[1])
        except ValueError:
            raise ParameterError(f"bad unstructured rate in {text!r}") from None
        return Unstructured(rate)
    if parts[0] == "semi" and len(parts) == 3:
        try:
            n, m = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParameterError(f"bad semi-structured counts in {text!r}") from None
        return SemiStructured(n, m)
    raise ParameterError(
        f"unrecognized pattern {text!r}; expected 'unstructured:<rate>' or 'semi:<n>:<m>'"
    )


def format_pattern(pattern: SparsityPattern) -> str:
    if isinstance(pattern, Unstructured):
        return f"unstructured:{pattern.rate:g}"
    return f"semi:{pattern.zeros_per_group}:{pattern.group_size}"


def target_rate(pattern: SparsityPattern) -> float:
    """Fraction of entries the pattern removes (up to the floor rule)."""
    if isinstance(pattern, Unstructured):
        return pattern.rate
    return pattern.zeros_per_group / pattern.group_size


def _check_groups(cols: int, pattern: SemiStructured):
    if cols % pattern.group_size != 0:
        raise ShapeError(
            f"column count {cols} is not divisible by group size {pattern.group_size}"
        )


def zero_lowest_global(w: Matrix, scores: Matrix, count: int) -> Matrix:
    """Copy of ``w`` with the ``count`` lowest-score entries zeroed (stable ties)."""
    out = np.array(w)
    if count > 0:
        order = np.argsort(scores.ravel(), kind="stable")[:count]
        out.flat[order] = 0.0
    return out


def zero_lowest_per_row(w: Matrix, scores: Matrix, count: int) -> Matrix:
    """Copy of ``w`` zeroing the ``count`` lowest-score entries in each row."""
    out = np.array(w)
    if count > 0:
        order = np.argsort(scores, axis=1, kind="stable")[:, :count]
        np.put_along_axis(out, order, 0.0, axis=1)
    return out


def zero_lowest_per_group(w: Matrix, scores: Matrix, pattern: SemiStructured) -> Matrix:
    """Copy of ``w`` zeroing the lowest-score entries of every m-group per row."""
    _check_groups(w.shape[1], pattern)
    out = np.array(w)
    rows = w.shape[0]
    groups = w.shape[1] // pattern.group_size
    shaped = out.reshape(rows, groups, pattern.group_size)
    ranked = np.argsort(
        scores.reshape(rows, groups, pattern.group_size), axis=2, kind="stable"
    )[:, :, : pattern.zeros_per_group]
    np.put_along_axis(shaped, ranked, 0.0, axis=2)
    return out


def round_to_pattern(w: Matrix, pattern: SparsityPattern) -> Matrix:
    """Zero the smallest-magnitude entries so ``w`` meets ``pattern`` exactly.

    Unstructured selection is matrix-global; semi-structured selection is per
    group within each row. Surviving entries are returned untouched.
    """
    w = as_matrix(w, "w")
    scores = np.abs(w)
    if isinstance(pattern, Unstructured):
        count = int(np.floor(pattern.rate * w.size))
        return zero_lowest_global(w, scores, count)
    return zero_lowest_per_group(w, scores, pattern)


def sparsity_of(w: Matrix) -> float:
    """Fraction of exactly-zero entries."""
    w = as_matrix(w, "w")
    return float(np.mean(w == 0.0))


def satisfies_pattern(w: Matrix, pattern: SparsityPattern) -> bool:
    """True iff ``w`` has at least the zeros ``pattern`` demands, in place."""
    w = as_matrix(w, "w")
    zeros = w == 0.0
    if isinstance(pattern, Unstructured):
        return int(zeros.sum()) >= int(np.floor(pattern.rate * w.size))
    _check_groups(w.shape[1], pattern)
    rows = w.shape[0]
    groups = w.shape[1] // pattern.group_size
    per_group = zeros.reshape(rows, groups, pattern.group_size).sum(axis=2)
    return bool(np.all(per_group >= pattern.zeros_per_group))
