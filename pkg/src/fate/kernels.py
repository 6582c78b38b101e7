"""Kernel feature maps and Gram factors.

Every kernel here is consumed through a thin factor ``L`` with
``K ~= L @ L.T``; downstream code works with ``L`` only, so an n-by-n Gram
matrix is never materialized on the random-features path.  Supported kinds:

``gaussian-rff``
    Random Fourier features of the Gaussian kernel
    ``k(x, x') = exp(-||x - x'||^2 / (2 sigma^2))``.
``linear``
    The data matrix itself (``K = X @ X.T``).
``delta``
    One-hot label factor (``K[i, j] = 1`` iff labels match).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import BadConfig, DimensionMismatch, EmptyInput
from .validation import as_labels, as_matrix

__all__ = [
    "KernelConfig",
    "GramFactor",
    "BasisMap",
    "RandomFourierFeatures",
    "median_heuristic_bandwidth",
    "resolve_bandwidth",
    "rff_features",
    "onehot_factor",
    "center",
    "gram_factor",
]

KERNEL_KINDS = ("gaussian-rff", "linear", "delta")

#: Largest subsample used by the median heuristic.
MEDIAN_HEURISTIC_MAX_ROWS = 2000

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class KernelConfig:
    """How to turn raw rows into a Gram factor.

    ``bandwidth`` is either a positive float or the string ``"median"``,
    meaning: resolve via the median heuristic on the data at hand.
    """

    kind: str = "gaussian-rff"
    rff_dim: int = 1000
    bandwidth: float | str = "median"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise BadConfig(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian-rff" and self.rff_dim <= 0:
            raise BadConfig(f"rff_dim must be positive, got {self.rff_dim}")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "median":
                raise BadConfig(f"bandwidth must be positive or 'median', got {self.bandwidth!r}")
        elif not self.bandwidth > 0:
            raise BadConfig(f"bandwidth must be positive, got {self.bandwidth}")

    def with_seed(self, seed: int) -> "KernelConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class GramFactor:
    """Thin factor ``L`` of a Gram matrix ``K ~= L @ L.T``."""

    L: np.ndarray
    kind: str

    @property
    def n(self) -> int:
        return self.L.shape[0]

    @property
    def m(self) -> int:
        return self.L.shape[1]

    def rows(self, idx: np.ndarray) -> "GramFactor":
        """Restrict to a row subset (same basis, fewer anchor rows)."""
        return GramFactor(np.ascontiguousarray(self.L[idx]), self.kind)


def median_heuristic_bandwidth(x, *, max_rows: int = MEDIAN_HEURISTIC_MAX_ROWS,
                               seed: SeedLike = 0) -> float:
    """Median pairwise Euclidean distance, on a seeded subsample when large.

    Returns 1.0 when the median distance is zero (e.g. all rows identical),
    so the result is always a usable bandwidth.
    """
    x = as_matrix(x, "x", allow_empty=False)
    n = x.shape[0]
    if n == 1:
        return 1.0
    if n > max_rows:
        idx = _rng(seed).choice(n, size=max_rows, replace=False)
        idx.sort()
        x = x[idx]
    med = float(np.median(pdist(x)))
    return med if med > 0.0 else 1.0


def resolve_bandwidth(x, bandwidth: float | str, seed: SeedLike = 0) -> float:
    if isinstance(bandwidth, str):
        return median_heuristic_bandwidth(x, seed=seed)
    if not bandwidth > 0:
        raise BadConfig(f"bandwidth must be positive, got {bandwidth}")
    return float(bandwidth)


class RandomFourierFeatures(BaseEstimator, TransformerMixin):
    """Random Fourier feature map of the Gaussian kernel.

    ``fit`` resolves the bandwidth and draws the projection; ``transform``
    maps rows to ``sqrt(2 / n_components) * cos(x @ W.T + b)`` with
    ``W ~ Normal(0, sigma^-2)`` and ``b ~ Uniform[0, 2*pi)``, both taken from
    the seeded stream (W first, then b).
    """

    def __init__(self, n_components: int = 1000, bandwidth: float | str = "median",
                 seed: SeedLike = 0):
        self.n_components = n_components
        self.bandwidth = bandwidth
        self.seed = seed

    def fit(self, X, y=None):
        X = as_matrix(X, "X", allow_empty=False)
        if self.n_components <= 0:
            raise BadConfig(f"n_components must be positive, got {self.n_components}")
        rng = _rng(self.seed)
        self.sigma_ = resolve_bandwidth(X, self.bandwidth, seed=rng)
        self.n_features_in_ = X.shape[1]
        self.weights_ = rng.normal(
            0.0, 1.0 / self.sigma_, size=(self.n_components, self.n_features_in_)
        )
        self.offsets_ = rng.uniform(0.0, 2.0 * np.pi, size=self.n_components)
        return self

    def transform(self, X) -> np.ndarray:
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"fitted on {self.n_features_in_} features, got {X.shape[1]}"
            )
        scale = np.sqrt(2.0 / self.n_components)
        return scale * np.cos(X @ self.weights_.T + self.offsets_)


def rff_features(x, config: KernelConfig) -> np.ndarray:
    """One-shot random Fourier features of ``x`` under ``config``."""
    if config.kind != "gaussian-rff":
        raise BadConfig(f"rff_features requires kind 'gaussian-rff', got {config.kind!r}")
    rff = RandomFourierFeatures(config.rff_dim, config.bandwidth, config.seed)
    return rff.fit(x).transform(x)


def onehot_factor(labels, num_classes: int | None = None) -> np.ndarray:
    """One-hot matrix (n, c); exact Gram factor of the delta kernel."""
    labels = as_labels(labels, "labels", num_classes=num_classes)
    if labels.size == 0:
        raise EmptyInput("labels is empty")
    c = int(labels.max()) + 1 if num_classes is None else int(num_classes)
    if c < 1:
        raise BadConfig(f"num_classes must be >= 1, got {c}")
    out = np.zeros((labels.size, c))
    out[np.arange(labels.size), labels] = 1.0
    return out


def center(m) -> np.ndarray:
    """Subtract column means: the action of ``H = I - (1/n) * ones`` on rows."""
    m = as_matrix(m, "m")
    if m.shape[0] == 0:
        return m
    return m - m.mean(axis=0, keepdims=True)


def gram_factor(x, config: KernelConfig) -> GramFactor:
    """Factor the configured kernel's Gram matrix without building it.

    gaussian-rff returns the feature matrix itself, linear returns the data
    matrix, delta one-hot-encodes integer labels.
    """
    if config.kind == "gaussian-rff":
        return GramFactor(rff_features(x, config), config.kind)
    if config.kind == "linear":
        return GramFactor(as_matrix(x, "x", allow_empty=False).copy(), config.kind)
    if config.kind == "delta":
        return GramFactor(onehot_factor(np.asarray(x).reshape(-1)), config.kind)
    raise BadConfig(f"unknown kernel kind {config.kind!r}")


@dataclass
class BasisMap:
    """Reusable feature-space basis: a fitted RFF map, or identity for linear.

    The trade-off pipeline draws this once per run so that the encoder's
    basis stays fixed while the upstream feature extractor moves.
    """

    kind: str
    rff: RandomFourierFeatures | None = None
    n_features_in_: int | None = None

    @classmethod
    def fit(cls, x, config: KernelConfig, seed: SeedLike | None = None) -> "BasisMap":
        x = as_matrix(x, "x", allow_empty=False)
        if config.kind == "gaussian-rff":
            rff = RandomFourierFeatures(
                config.rff_dim, config.bandwidth,
                config.seed if seed is None else seed,
            ).fit(x)
            return cls("gaussian-rff", rff, x.shape[1])
        if config.kind == "linear":
            return cls("linear", None, x.shape[1])
        raise BadConfig(f"no feature basis for kernel kind {config.kind!r}")

    @property
    def dim(self) -> int:
        return self.rff.n_components if self.rff is not None else self.n_features_in_

    def transform(self, x) -> np.ndarray:
        x = as_matrix(x, "x")
        if x.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"basis fitted on {self.n_features_in_} features, got {x.shape[1]}"
            )
        return self.rff.transform(x) if self.rff is not None else x

    def factor(self, x) -> GramFactor:
        return GramFactor(self.transform(x), self.kind)
