"""Closed-form fair encoder.

Given a Gram factor ``L`` of the input kernel, target labels ``y`` and
sensitive labels ``s``, the encoder maximizing

    (1 - lam) * dep(Z, Y)  -  lam * sum_c dep(Z, S | c)

over disentangled encodings ``Z`` is obtained from the top-r eigenvectors of
the generalized problem ``B u = tau C u`` with

    B = (1 - lam)/n^2 * Gy @ Gy.T - lam * sum_c (1/n_c^2) * Gs_c @ Gs_c.T
    C = (1/n) * L.T @ H @ L + gamma * I

where ``Gy = L.T @ H @ onehot(y)`` and ``Gs_c`` is the analogous slice-local
cross term for the sensitive labels.  The encoder weights are the minimum-norm
realization ``Theta = U.T @ pinv(L)``, stored in basis coordinates (r, m) so
new rows are encoded as ``features @ Theta.T``.  The achieved objective equals
the sum of the top-r eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .dependence import check_notion, notion_slices
from .exceptions import BadConfig, DimensionMismatch, RankTooHigh, SingleClass
from .kernels import (
    GramFactor,
    KernelConfig,
    RandomFourierFeatures,
    center,
    gram_factor,
    onehot_factor,
)
from .linalg import generalized_sym_eig, pinv_apply
from .validation import as_labels, as_matrix

__all__ = [
    "EncoderProblem",
    "FairEncoder",
    "build_B",
    "build_C",
    "solve_encoder",
    "FairKernelEncoder",
]


@dataclass(frozen=True)
class EncoderProblem:
    """Inputs of one closed-form solve: factor, labels, notion, knobs."""

    x_factor: GramFactor
    y: np.ndarray
    s: np.ndarray
    notion: str = "dp"
    lam: float = 0.0
    gamma: float = 1e-4
    r: int | None = None
    positive_class: int = 1

    def __post_init__(self):
        check_notion(self.notion)
        if not 0.0 <= self.lam < 1.0:
            raise BadConfig(f"lam must lie in [0, 1), got {self.lam}")
        if not self.gamma > 0.0:
            raise BadConfig(f"gamma must be positive, got {self.gamma}")
        y = as_labels(self.y, "y")
        s = as_labels(self.s, "s")
        if y.size != self.x_factor.n or s.size != self.x_factor.n:
            raise DimensionMismatch(
                f"factor covers {self.x_factor.n} rows, y has {y.size}, s has {s.size}"
            )
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "s", s)

    @property
    def num_classes(self) -> int:
        return int(self.y.max()) + 1

    @property
    def rank(self) -> int:
        if self.r is not None:
            return int(self.r)
        return max(self.num_classes - 1, 1)


@dataclass(frozen=True)
class FairEncoder:
    """A solved encoder: weights in basis coordinates plus its provenance."""

    theta: np.ndarray
    lam: float
    gamma: float
    notion: str
    objective_value: float
    eigenvalues: np.ndarray

    @property
    def rank(self) -> int:
        return self.theta.shape[0]

    def encode_features(self, features) -> np.ndarray:
        """Encode rows already expressed in the basis the solve used."""
        features = as_matrix(features, "features")
        if features.shape[1] != self.theta.shape[1]:
            raise DimensionMismatch(
                f"encoder basis has {self.theta.shape[1]} columns, got {features.shape[1]}"
            )
        return features @ self.theta.T


def build_C(x_factor: GramFactor, gamma: float) -> np.ndarray:
    """Disentanglement metric ``(1/n) L.T H L + gamma I`` (always PD)."""
    if not gamma > 0.0:
        raise BadConfig(f"gamma must be positive, got {gamma}")
    lc = center(x_factor.L)
    c = (lc.T @ lc) / x_factor.n
    c[np.diag_indices_from(c)] += gamma
    return 0.5 * (c + c.T)


def build_B(problem: EncoderProblem) -> np.ndarray:
    """Utility-minus-fairness objective matrix in basis coordinates."""
    l = problem.x_factor.L
    n = problem.x_factor.n
    y, s = problem.y, problem.s
    c_y = problem.num_classes
    if c_y < 2:
        raise SingleClass("y must contain at least two classes")
    c_s = int(s.max()) + 1

    gy = l.T @ center(onehot_factor(y, c_y))
    b = ((1.0 - problem.lam) / float(n) ** 2) * (gy @ gy.T)
    if problem.lam > 0.0:
        for cond in notion_slices(y, problem.notion,
                                  positive_class=problem.positive_class,
                                  num_classes=c_y):
            ls = l[cond.indices]
            gs = ls.T @ center(onehot_factor(s[cond.indices], c_s))
            b -= (problem.lam / float(cond.n) ** 2) * (gs @ gs.T)
    return 0.5 * (b + b.T)


def solve_encoder(problem: EncoderProblem) -> FairEncoder:
    """Closed-form solve via the generalized symmetric eigenproblem.

    Raises
    ------
    SingleClass
        If ``y`` holds fewer than two classes.
    RankTooHigh
        If the requested rank exceeds the basis dimension.
    """
    l = problem.x_factor.L
    r = problem.rank
    if r < 1:
        raise BadConfig(f"rank must be >= 1, got {r}")
    if r > l.shape[1]:
        raise RankTooHigh(f"rank {r} exceeds basis dimension {l.shape[1]}")
    b = build_B(problem)
    c = build_C(problem.x_factor, problem.gamma)
    values, vectors = generalized_sym_eig(b, c)
    u = vectors[:, :r]
    taus = values[:r].copy()
    theta_sample_t = pinv_apply(l, u)             # (n, r): Theta.T in sample space
    theta = (l.T @ theta_sample_t).T              # (r, m): U.T @ pinv(L) @ L
    return FairEncoder(
        theta=np.ascontiguousarray(theta),
        lam=problem.lam,
        gamma=problem.gamma,
        notion=problem.notion,
        objective_value=float(taus.sum()),
        eigenvalues=taus,
    )


class FairKernelEncoder(BaseEstimator, TransformerMixin):
    """Estimator facade: fit on (X, y, s), transform X to a fair encoding.

    Parameters
    ----------
    lam : float in [0, 1)
        Fairness pressure; 0 ignores the sensitive labels entirely.
    notion : {"dp", "eo", "eoo"}
    kernel : KernelConfig or None
        Input-kernel configuration (default: seeded Gaussian RFF).
    gamma : float
        Ridge weight in the disentanglement metric.
    r : int or None
        Encoding width; defaults to one less than the number of classes.
    positive_class : int
        Conditioning class of the "eo" notion.
    """

    def __init__(self, lam: float = 0.0, notion: str = "dp",
                 kernel: KernelConfig | None = None, gamma: float = 1e-4,
                 r: int | None = None, positive_class: int = 1):
        self.lam = lam
        self.notion = notion
        self.kernel = kernel
        self.gamma = gamma
        self.r = r
        self.positive_class = positive_class

    def fit(self, X, y, s):
        X = as_matrix(X, "X", allow_empty=False)
        cfg = self.kernel if self.kernel is not None else KernelConfig()
        if cfg.kind == "delta":
            raise BadConfig("delta kernel is reserved for labels, not features")
        if cfg.kind == "gaussian-rff":
            self.basis_ = RandomFourierFeatures(cfg.rff_dim, cfg.bandwidth, cfg.seed).fit(X)
            factor = GramFactor(self.basis_.transform(X), cfg.kind)
        else:
            self.basis_ = None
            factor = gram_factor(X, cfg)
        self.n_features_in_ = X.shape[1]
        problem = EncoderProblem(
            x_factor=factor, y=y, s=s, notion=self.notion, lam=self.lam,
            gamma=self.gamma, r=self.r, positive_class=self.positive_class,
        )
        self.encoder_ = solve_encoder(problem)
        self.theta_ = self.encoder_.theta
        self.eigenvalues_ = self.encoder_.eigenvalues
        self.objective_value_ = self.encoder_.objective_value
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "encoder_"):
            raise NotFittedError("FairKernelEncoder is not fitted")
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(
                f"fitted on {self.n_features_in_} features, got {X.shape[1]}"
            )
        features = self.basis_.transform(X) if self.basis_ is not None else X
        return self.encoder_.encode_features(features)
