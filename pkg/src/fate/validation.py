"""Input validation helpers used at module boundaries.

All public entry points funnel array-likes through these so that shape and
finiteness problems surface as the package's own error types with readable
messages instead of deep numpy tracebacks.
"""
from __future__ import annotations

import numpy as np

from .exceptions import EmptyInput, LabelOutOfRange, NotSymmetric, ShapeMismatch

__all__ = [
    "as_matrix",
    "as_labels",
    "check_square",
    "check_symmetric",
    "check_same_rows",
]


def as_matrix(a, name: str = "array", *, allow_empty: bool = True) -> np.ndarray:
    """Coerce to a C-contiguous float64 2-D array and verify finiteness."""
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim == 1:
        out = out.reshape(-1, 1)
    if out.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got ndim={out.ndim}")
    if not allow_empty and out.shape[0] == 0:
        raise EmptyInput(f"{name} has zero rows")
    if out.size and not np.isfinite(out).all():
        raise ValueError(f"{name} contains NaN or Inf")
    return out


def as_labels(a, name: str = "labels", *, num_classes: int | None = None) -> np.ndarray:
    """Coerce to a 1-D int64 label vector, checking range when known."""
    arr = np.asarray(a)
    if arr.ndim != 1:
        raise ShapeMismatch(f"{name} must be 1-D, got ndim={arr.ndim}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        flt = np.asarray(arr, dtype=np.float64)
        if not np.isfinite(flt).all() or not np.all(flt == np.round(flt)):
            raise LabelOutOfRange(f"{name} must hold integers")
        arr = flt
    out = arr.astype(np.int64, copy=False)
    if out.size:
        lo, hi = int(out.min()), int(out.max())
        if lo < 0:
            raise LabelOutOfRange(f"{name} contains negative label {lo}")
        if num_classes is not None and hi >= num_classes:
            raise LabelOutOfRange(
                f"{name} contains label {hi} outside [0, {num_classes})"
            )
    return np.ascontiguousarray(out)


def check_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {a.shape}")


def check_symmetric(a: np.ndarray, name: str = "matrix", *, rtol: float = 1e-10) -> None:
    """Raise :class:`NotSymmetric` when ``a`` differs from its transpose."""
    check_square(a, name)
    if a.size == 0:
        return
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > rtol * scale:
        raise NotSymmetric(f"{name} is not symmetric within rtol={rtol:g}")


def check_same_rows(name_a: str, a: np.ndarray, name_b: str, b: np.ndarray) -> None:
    if a.shape[0] != b.shape[0]:
        raise ShapeMismatch(
            f"{name_a} has {a.shape[0]} rows but {name_b} has {b.shape[0]}"
        )
