"""Kernelized statistical dependence between a representation and labels.

The measure is the squared Frobenius norm of a doubly-centered cross-Gram
block, normalized by the squared row count:

    dep = (1 / n^2) * || Theta @ K @ H @ L_A ||_F^2

with ``H = I - (1/n) 11^T`` and ``K ~= L_X @ L_X.T``.  Everything is
evaluated through thin factors, so no n-by-n matrix is ever formed:
``Theta @ K @ H @ L_A == (Theta @ L_X) @ (L_X.T @ center(L_A))``.

Conditional variants restrict rows to a class slice of a conditioning label
and normalize by the slice size instead.  Three slicing policies are
supported, one per fairness notion:

- ``dp``: one unconditional term;
- ``eo``: one term conditioned on the designated positive class;
- ``eoo``: one term per target class.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import BadConfig, EmptyClass, LabelOutOfRange, ShapeMismatch
from .kernels import GramFactor, center, onehot_factor
from .validation import as_labels, as_matrix

__all__ = [
    "NOTIONS",
    "ConditionSlice",
    "DepTerm",
    "slice_by_label",
    "notion_slices",
    "dep_empirical",
    "dep_of_representation",
    "dep_terms_for_notion",
]

#: Supported fairness notions: demographic parity, equalized odds
#: (single-class conditioning), equality of opportunity (all classes).
NOTIONS = ("dp", "eo", "eoo")


def check_notion(notion: str) -> str:
    if notion not in NOTIONS:
        raise BadConfig(f"notion must be one of {NOTIONS}, got {notion!r}")
    return notion


@dataclass(frozen=True)
class ConditionSlice:
    """Row subset on which a conditional dependence term is evaluated.

    ``label is None`` marks the unconditional (all-rows) slice.
    """

    indices: np.ndarray
    label: int | None = None

    @property
    def n(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class DepTerm:
    """One additive term of a notion's fairness penalty."""

    weight: float
    cond: ConditionSlice
    value: float


def slice_by_label(y, label: int, *, num_classes: int | None = None) -> ConditionSlice:
    """Rows where ``y == label``; empty slices are an error."""
    y = as_labels(y, "y", num_classes=num_classes)
    c = int(y.max()) + 1 if (num_classes is None and y.size) else (num_classes or 0)
    if label < 0 or label >= c:
        raise LabelOutOfRange(f"label {label} outside [0, {c})")
    idx = np.flatnonzero(y == label)
    if idx.size == 0:
        raise EmptyClass(f"no rows with label {label}")
    return ConditionSlice(idx, int(label))


def unconditional_slice(n: int) -> ConditionSlice:
    return ConditionSlice(np.arange(n), None)


def notion_slices(y, notion: str, *, positive_class: int = 1,
                  num_classes: int | None = None) -> list[ConditionSlice]:
    """The conditioning slices a notion's fairness penalty sums over."""
    check_notion(notion)
    y = as_labels(y, "y", num_classes=num_classes)
    if notion == "dp":
        return [unconditional_slice(y.size)]
    c = int(y.max()) + 1 if num_classes is None else int(num_classes)
    if notion == "eo":
        return [slice_by_label(y, positive_class, num_classes=c)]
    return [slice_by_label(y, cls, num_classes=c) for cls in range(c)]


def dep_empirical(theta, x_factor: GramFactor, a_factor: GramFactor) -> float:
    """Dependence of the encoded rows ``Theta @ K`` on the labels behind ``a_factor``.

    ``theta`` has shape (r, n) and acts in sample space; both factors cover
    the same n rows.  Computed entirely in factored form.
    """
    theta = as_matrix(theta, "theta")
    n = x_factor.n
    if theta.shape[1] != n:
        raise ShapeMismatch(f"theta has {theta.shape[1]} columns but factors cover {n} rows")
    if a_factor.n != n:
        raise ShapeMismatch(f"x_factor covers {n} rows but a_factor covers {a_factor.n}")
    if n == 0:
        raise ShapeMismatch("factors cover zero rows")
    tl = theta @ x_factor.L                       # (r, m)
    cross = x_factor.L.T @ center(a_factor.L)     # (m, c)
    return float(np.linalg.norm(tl @ cross) ** 2) / float(n) ** 2


def dep_of_representation(z, a, cond: ConditionSlice | None = None, *,
                          num_classes: int | None = None) -> float:
    """Dependence of an explicit representation ``z`` on discrete labels ``a``.

    Equals ``(1 / n_c^2) * || z_c.T @ H @ onehot(a_c) ||_F^2`` over the slice
    rows; identical to :func:`dep_empirical` when ``z`` is an encoder applied
    to the slice.
    """
    z = as_matrix(z, "z")
    a = as_labels(a, "a", num_classes=num_classes)
    if z.shape[0] != a.size:
        raise ShapeMismatch(f"z has {z.shape[0]} rows but a has {a.size}")
    if cond is not None:
        z = z[cond.indices]
        a = a[cond.indices]
    if z.shape[0] == 0:
        raise EmptyClass("slice has no rows")
    la = onehot_factor(a, num_classes=num_classes or int(a.max()) + 1)
    cross = z.T @ center(la)
    return float(np.linalg.norm(cross) ** 2) / float(z.shape[0]) ** 2


def dep_terms_for_notion(y, s, notion: str, *, z=None, theta=None,
                         x_factor: GramFactor | None = None,
                         positive_class: int = 1,
                         num_s_classes: int | None = None) -> list[DepTerm]:
    """Evaluate every fairness term of ``notion`` for a representation.

    The representation is given either explicitly (``z``, one row per sample)
    or as a sample-space encoder (``theta`` with its ``x_factor``); the two
    agree because ``(Theta @ K)[:, slice] == (L @ Theta.T)[slice].T``.
    """
    y = as_labels(y, "y")
    s = as_labels(s, "s", num_classes=num_s_classes)
    if (z is None) == (theta is None):
        raise BadConfig("provide exactly one of z or theta")
    if theta is not None:
        if x_factor is None:
            raise BadConfig("theta requires its x_factor")
        z = x_factor.L @ (as_matrix(theta, "theta") @ x_factor.L).T
    z = as_matrix(z, "z")
    if z.shape[0] != y.size or y.size != s.size:
        raise ShapeMismatch("z, y and s must cover the same rows")
    c_s = int(s.max()) + 1 if num_s_classes is None else int(num_s_classes)
    terms = []
    for cond in notion_slices(y, notion, positive_class=positive_class):
        value = dep_of_representation(z, s, cond, num_classes=c_s)
        terms.append(DepTerm(1.0, cond, value))
    return terms
