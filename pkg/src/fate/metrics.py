"""Group fairness violations of binary predictions, plus accuracy.

All three violations compare positive-prediction rates across sensitive
groups and are returned in [0, 1]:

- ``dpv``:   |P(Yhat=1 | S=a) - P(Yhat=1 | S=b)|
- ``eod``:   the same gap restricted to rows whose true label is the
  positive class
- ``eood``:  the per-true-class gap averaged over the true classes

With more than two groups the pairwise gap is aggregated with ``max`` by
default (``aggregate="mean"`` averages the pairs instead).
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .exceptions import EmptyGroup, ShapeMismatch, SingleClass
from .validation import as_labels

__all__ = ["accuracy", "dpv", "eod", "eood"]

AGGREGATES = ("max", "mean")


def accuracy(y_pred, y_true) -> float:
    y_pred = as_labels(y_pred, "y_pred")
    y_true = as_labels(y_true, "y_true")
    if y_pred.size != y_true.size:
        raise ShapeMismatch(f"y_pred has {y_pred.size} rows, y_true has {y_true.size}")
    if y_pred.size == 0:
        raise EmptyGroup("no rows to score")
    return float(np.mean(y_pred == y_true))


def _gap(rates: dict, aggregate: str) -> float:
    if aggregate not in AGGREGATES:
        from .exceptions import BadConfig

        raise BadConfig(f"aggregate must be one of {AGGREGATES}, got {aggregate!r}")
    pairs = [abs(rates[a] - rates[b]) for a, b in combinations(sorted(rates), 2)]
    return float(max(pairs)) if aggregate == "max" else float(np.mean(pairs))


def _positive_rates(y_pred: np.ndarray, s: np.ndarray, rows: np.ndarray,
                    context: str) -> dict:
    groups = np.unique(s)
    if groups.size < 2:
        raise SingleClass(f"need at least two sensitive groups, found {groups.size}")
    rates = {}
    for g in groups:
        members = rows[s[rows] == g]
        if members.size == 0:
            raise EmptyGroup(f"group {g} has no rows {context}")
        rates[int(g)] = float(np.mean(y_pred[members] == 1))
    return rates


def _check_binary_pred(y_pred: np.ndarray) -> None:
    if y_pred.size and int(y_pred.max()) > 1:
        from .exceptions import LabelOutOfRange

        raise LabelOutOfRange("predictions must be binary (0/1)")


def dpv(y_pred, s, *, aggregate: str = "max") -> float:
    """Demographic parity violation of binary predictions."""
    y_pred = as_labels(y_pred, "y_pred")
    s = as_labels(s, "s")
    if y_pred.size != s.size:
        raise ShapeMismatch(f"y_pred has {y_pred.size} rows, s has {s.size}")
    if y_pred.size == 0:
        raise EmptyGroup("no rows to score")
    _check_binary_pred(y_pred)
    rates = _positive_rates(y_pred, s, np.arange(y_pred.size), "overall")
    return _gap(rates, aggregate)


def eod(y_pred, y_true, s, *, positive_class: int = 1, aggregate: str = "max") -> float:
    """Equalized-odds violation on the positive class only."""
    y_pred = as_labels(y_pred, "y_pred")
    y_true = as_labels(y_true, "y_true")
    s = as_labels(s, "s")
    if not y_pred.size == y_true.size == s.size:
        raise ShapeMismatch("y_pred, y_true and s must cover the same rows")
    if y_pred.size == 0:
        raise EmptyGroup("no rows to score")
    _check_binary_pred(y_pred)
    rows = np.flatnonzero(y_true == positive_class)
    if rows.size == 0:
        raise EmptyGroup(f"no rows with true class {positive_class}")
    rates = _positive_rates(y_pred, s, rows, f"within true class {positive_class}")
    return _gap(rates, aggregate)


def eood(y_pred, y_true, s, *, aggregate: str = "max") -> float:
    """Equality-of-opportunity violation averaged over the true classes."""
    y_pred = as_labels(y_pred, "y_pred")
    y_true = as_labels(y_true, "y_true")
    s = as_labels(s, "s")
    if not y_pred.size == y_true.size == s.size:
        raise ShapeMismatch("y_pred, y_true and s must cover the same rows")
    if y_pred.size == 0:
        raise EmptyGroup("no rows to score")
    _check_binary_pred(y_pred)
    classes = np.unique(y_true)
    gaps = []
    for cls in classes:
        rows = np.flatnonzero(y_true == cls)
        rates = _positive_rates(y_pred, s, rows, f"within true class {cls}")
        gaps.append(_gap(rates, aggregate))
    return float(np.mean(gaps))
