"""Small numpy networks with hand-derived gradients.

Two consumers: the feature extractor trained by gradient ascent on the
kernelized utility-fairness objective (the encoder stays frozen during that
phase), and downstream softmax classifiers trained by cross-entropy descent.
All gradients are written out explicitly; a finite-difference gate in the
test suite checks them end to end.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .exceptions import (
    BadConfig,
    DegenerateBatch,
    DivergenceDetected,
    ShapeMismatch,
)
from .kernels import BasisMap, onehot_factor
from .validation import as_labels, as_matrix

__all__ = [
    "Mlp",
    "SgdConfig",
    "EncoderMap",
    "init_mlp",
    "mlp_forward",
    "objective_and_grad",
    "cosine_lr",
    "sgd_ascent",
    "train_feature_extractor",
    "LogisticClassifier",
    "MlpClassifier",
    "train_classifier",
]

logger = logging.getLogger(__name__)

ACTIVATIONS = ("relu", "tanh")

#: Smoothing constant inside the row-normalization square root.
NORM_EPS = 1e-12


@dataclass
class Mlp:
    """Fully connected net; weights are (out, in), biases (out,).

    Hidden layers apply the activation, the last layer is affine, and the
    output rows are optionally scaled to unit Euclidean norm.
    """

    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)
    activation: str = "relu"
    normalize: bool = True

    @property
    def sizes(self) -> list:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def params(self) -> list:
        return list(self.weights) + list(self.biases)

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                   self.activation, self.normalize)


def init_mlp(sizes, activation: str = "relu", normalize: bool = True,
             rng: np.random.Generator | None = None) -> Mlp:
    """Seeded He/Xavier-style initialization (zero biases)."""
    if activation not in ACTIVATIONS:
        raise BadConfig(f"activation must be one of {ACTIVATIONS}, got {activation!r}")
    sizes = [int(v) for v in sizes]
    if len(sizes) < 2 or any(v <= 0 for v in sizes):
        raise BadConfig(f"sizes must be >= 2 positive widths, got {sizes}")
    rng = rng or np.random.default_rng(0)
    gain = 2.0 if activation == "relu" else 1.0
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(gain / fan_in), size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Mlp(weights, biases, activation, normalize)


def _act(p: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(p, 0.0) if kind == "relu" else np.tanh(p)


def _act_grad(p: np.ndarray, a: np.ndarray, kind: str) -> np.ndarray:
    return (p > 0.0).astype(p.dtype) if kind == "relu" else 1.0 - a * a


def _forward_cache(net: Mlp, x: np.ndarray):
    acts = [x]
    pres = []
    h = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        p = h @ w.T + b
        pres.append(p)
        h = _act(p, net.activation) if i < last else p
        acts.append(h)
    if net.normalize:
        rho = np.sqrt(np.sum(h * h, axis=1, keepdims=True) + NORM_EPS)
        return h / rho, (acts, pres, h, rho)
    return h, (acts, pres, h, None)


def mlp_forward(net: Mlp, x) -> np.ndarray:
    """Map rows through the net (hidden activations, affine head, optional
    unit-norm rows)."""
    x = as_matrix(x, "x")
    if x.shape[1] != net.weights[0].shape[1]:
        raise ShapeMismatch(
            f"net expects {net.weights[0].shape[1]} input features, got {x.shape[1]}"
        )
    out, _ = _forward_cache(net, x)
    return out


def _backward(net: Mlp, cache, d_out: np.ndarray):
    """Gradients of a scalar w.r.t. every weight and bias given d(scalar)/d(output)."""
    acts, pres, raw, rho = cache
    if net.normalize:
        xt = raw / rho
        d_raw = (d_out - xt * np.sum(xt * d_out, axis=1, keepdims=True)) / rho
    else:
        d_raw = d_out
    gw = [None] * len(net.weights)
    gb = [None] * len(net.biases)
    last = len(net.weights) - 1
    dh = d_raw
    for i in range(last, -1, -1):
        dp = dh if i == last else dh * _act_grad(pres[i], acts[i + 1], net.activation)
        gw[i] = dp.T @ acts[i]
        gb[i] = dp.sum(axis=0)
        if i > 0:
            dh = dp @ net.weights[i]
    return gw, gb


class EncoderMap(NamedTuple):
    """Frozen tail of the pipeline during phase-2 ascent: basis map + encoder."""

    basis: BasisMap
    theta: np.ndarray  # (r, basis.dim)


def _batch_slices(y: np.ndarray, notion: str, positive_class: int, c_y: int):
    if notion == "dp":
        return [np.arange(y.size)]
    classes = [positive_class] if notion == "eo" else list(range(c_y))
    return [np.flatnonzero(y == cls) for cls in classes]


def objective_and_grad(net: Mlp, x, y, s, enc: EncoderMap, lam: float,
                       notion: str, *, positive_class: int = 1,
                       num_y_classes: int | None = None,
                       num_s_classes: int | None = None,
                       strict: bool = False):
    """Utility-minus-fairness objective and its gradient w.r.t. the net.

    J = (1 - lam) * dep(Z, Y) - lam * sum_c dep(Z, S | c) with
    Z = rff(net(x)) @ theta.T; the encoder map stays constant.  Slices with
    fewer than two rows in the batch are skipped with a warning (or raise
    :class:`DegenerateBatch` when ``strict``).

    Returns
    -------
    (float, (list, list))
        Objective value and gradients aligned with ``net.weights`` /
        ``net.biases``.
    """
    x = as_matrix(x, "x", allow_empty=False)
    y = as_labels(y, "y", num_classes=num_y_classes)
    s = as_labels(s, "s", num_classes=num_s_classes)
    if not x.shape[0] == y.size == s.size:
        raise ShapeMismatch("x, y and s must cover the same rows")
    if not 0.0 <= lam < 1.0:
        raise BadConfig(f"lam must lie in [0, 1), got {lam}")
    c_y = int(num_y_classes or y.max() + 1)
    c_s = int(num_s_classes or s.max() + 1)
    n = x.shape[0]

    xt, cache = _forward_cache(net, x)
    if enc.basis.kind == "gaussian-rff":
        rff = enc.basis.rff
        pre = xt @ rff.weights_.T + rff.offsets_
        scale = np.sqrt(2.0 / rff.n_components)
        phi = scale * np.cos(pre)
    else:
        pre, scale, phi = None, None, xt
    z = phi @ enc.theta.T

    gy = onehot_factor(y, c_y)
    gy = gy - gy.mean(axis=0)
    j = (1.0 - lam) * float(np.linalg.norm(z.T @ gy) ** 2) / n**2
    dz = ((1.0 - lam) * 2.0 / n**2) * (gy @ (gy.T @ z))

    if lam > 0.0:
        for rows in _batch_slices(y, notion, positive_class, c_y):
            if rows.size < 2:
                if strict:
                    raise DegenerateBatch(
                        f"batch slice for notion {notion!r} has {rows.size} rows"
                    )
                logger.warning("skipping fairness slice with %d rows", rows.size)
                continue
            gs = onehot_factor(s[rows], c_s)
            gs = gs - gs.mean(axis=0)
            zc = z[rows]
            j -= lam * float(np.linalg.norm(zc.T @ gs) ** 2) / rows.size**2
            dz[rows] -= (lam * 2.0 / rows.size**2) * (gs @ (gs.T @ zc))

    dphi = dz @ enc.theta
    if enc.basis.kind == "gaussian-rff":
        dxt = (dphi * (-scale * np.sin(pre))) @ enc.basis.rff.weights_
    else:
        dxt = dphi
    gw, gb = _backward(net, cache, dxt)
    return j, (gw, gb)


def cosine_lr(lr0: float, step: int, total: int) -> float:
    """Cosine annealing ``lr0 * (1 + cos(pi * t / T)) / 2`` for t in [0, T)."""
    if total <= 0:
        return lr0
    t = min(max(step, 0), total)
    return lr0 * 0.5 * (1.0 + np.cos(np.pi * t / total))


@dataclass(frozen=True)
class SgdConfig:
    """Minibatch SGD hyperparameters (cosine-annealed by default)."""

    lr: float = 1e-2
    epochs: int = 50
    batch_size: int = 256
    schedule: str = "cosine-annealing"

    def __post_init__(self):
        if not self.lr > 0:
            raise BadConfig(f"lr must be positive, got {self.lr}")
        if self.epochs < 1:
            raise BadConfig(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size is not None and self.batch_size < 1:
            raise BadConfig(f"batch_size must be >= 1 or None, got {self.batch_size}")
        if self.schedule not in ("cosine-annealing", "constant"):
            raise BadConfig(f"unknown schedule {self.schedule!r}")

    def lr_at(self, step: int, total: int) -> float:
        if self.schedule == "constant":
            return self.lr
        return cosine_lr(self.lr, step, total)


def sgd_ascent(params: list, step_fn: Callable, n_rows: int, config: SgdConfig,
               rng: np.random.Generator, *, start_step: int = 0,
               total_steps: int | None = None) -> list:
    """Generic minibatch gradient ascent; mutates ``params`` in place.

    ``step_fn(rows) -> (value, grads)`` with ``grads`` aligned to ``params``.
    Shuffling is drawn from ``rng`` once per epoch, so a fixed generator state
    reproduces the run exactly.  Returns the per-step objective trace.

    Raises
    ------
    DivergenceDetected
        On a non-finite objective or parameter.
    """
    batch = config.batch_size or n_rows
    n_batches = max(1, -(-n_rows // batch))
    total = total_steps if total_steps is not None else config.epochs * n_batches
    trace = []
    step = start_step
    for _ in range(config.epochs):
        order = rng.permutation(n_rows)
        for k in range(n_batches):
            rows = order[k * batch:(k + 1) * batch]
            if rows.size == 0:
                continue
            value, grads = step_fn(rows)
            if not np.isfinite(value):
                raise DivergenceDetected(f"objective became {value!r}")
            lr = config.lr_at(step, total)
            for p, g in zip(params, grads):
                p += lr * g
                if not np.isfinite(p).all():
                    raise DivergenceDetected("parameters became non-finite")
            trace.append(float(value))
            step += 1
    return trace


def train_feature_extractor(net: Mlp, x, y, s, enc: EncoderMap, lam: float,
                            notion: str, config: SgdConfig,
                            rng: np.random.Generator, *,
                            positive_class: int = 1,
                            num_y_classes: int | None = None,
                            num_s_classes: int | None = None,
                            start_step: int = 0,
                            total_steps: int | None = None) -> list:
    """One ascent phase on the kernel objective with the encoder frozen."""
    x = as_matrix(x, "x", allow_empty=False)
    y = as_labels(y, "y")
    s = as_labels(s, "s")

    def step_fn(rows):
        j, (gw, gb) = objective_and_grad(
            net, x[rows], y[rows], s[rows], enc, lam, notion,
            positive_class=positive_class,
            num_y_classes=num_y_classes or int(y.max()) + 1,
            num_s_classes=num_s_classes or int(s.max()) + 1,
        )
        return j, gw + gb

    return sgd_ascent(net.params(), step_fn, x.shape[0], config, rng,
                      start_step=start_step, total_steps=total_steps)


# -- downstream classifiers ---------------------------------------------------

def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class _SoftmaxBase(BaseEstimator, ClassifierMixin):
    """Shared standardize + cross-entropy SGD machinery."""

    def _standardize_fit(self, x: np.ndarray) -> np.ndarray:
        self.mean_ = x.mean(axis=0)
        self.scale_ = np.maximum(x.std(axis=0), 1e-12)
        return (x - self.mean_) / self.scale_

    def _standardize(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean_) / self.scale_

    def _fit_ce(self, x, y, params, logits_fn, backward_fn, lr, epochs,
                batch_size, seed):
        n = x.shape[0]
        rng = np.random.default_rng(seed)
        cfg = SgdConfig(lr=lr, epochs=epochs, batch_size=batch_size or n)
        yh = onehot_factor(y, self.n_classes_)

        def step_fn(rows):
            p, caches = logits_fn(x[rows])
            probs = _softmax(p)
            ce = -float(np.mean(np.log(probs[np.arange(rows.size), y[rows]] + 1e-300)))
            dlogits = (probs - yh[rows]) / rows.size
            grads = backward_fn(dlogits, caches)
            # ascent loop maximizes, so feed it the negated CE and gradients
            return -ce, [-g for g in grads]

        sgd_ascent(params, step_fn, n, cfg, rng)

    def predict_proba(self, x) -> np.ndarray:
        if not hasattr(self, "classes_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted")
        x = self._standardize(as_matrix(x, "x"))
        logits, _ = self._logits(x)
        return _softmax(logits)

    def predict(self, x) -> np.ndarray:
        return self.predict_proba(x).argmax(axis=1)


class LogisticClassifier(_SoftmaxBase):
    """Multinomial logistic regression trained by full-batch gradient descent."""

    def __init__(self, lr: float = 0.5, epochs: int = 300,
                 batch_size: int | None = None, seed: int = 0):
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, x, y):
        x = self._standardize_fit(as_matrix(x, "x", allow_empty=False))
        y = as_labels(y, "y")
        self.n_classes_ = int(y.max()) + 1
        self.classes_ = np.arange(self.n_classes_)
        self.coef_ = np.zeros((self.n_classes_, x.shape[1]))
        self.intercept_ = np.zeros(self.n_classes_)

        def logits_fn(xb):
            return xb @ self.coef_.T + self.intercept_, xb

        def backward_fn(dlogits, xb):
            return [dlogits.T @ xb, dlogits.sum(axis=0)]

        self._fit_ce(x, y, [self.coef_, self.intercept_], logits_fn, backward_fn,
                     self.lr, self.epochs, self.batch_size, self.seed)
        return self

    def _logits(self, x):
        return x @ self.coef_.T + self.intercept_, None


class MlpClassifier(_SoftmaxBase):
    """Softmax MLP with ``hidden_layers`` hidden blocks of width ``hidden``.

    The default single hidden block makes it a two-layer network; raise
    ``hidden_layers`` for a deeper head.
    """

    def __init__(self, hidden: int = 32, hidden_layers: int = 1,
                 activation: str = "relu", lr: float = 0.1, epochs: int = 300,
                 batch_size: int | None = None, seed: int = 0):
        self.hidden = hidden
        self.hidden_layers = hidden_layers
        self.activation = activation
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    def fit(self, x, y):
        x = self._standardize_fit(as_matrix(x, "x", allow_empty=False))
        y = as_labels(y, "y")
        if self.hidden_layers < 1:
            raise BadConfig(f"hidden_layers must be >= 1, got {self.hidden_layers}")
        self.n_classes_ = int(y.max()) + 1
        self.classes_ = np.arange(self.n_classes_)
        rng = np.random.default_rng(self.seed)
        sizes = [x.shape[1]] + [self.hidden] * self.hidden_layers + [self.n_classes_]
        self.net_ = init_mlp(sizes, self.activation, normalize=False, rng=rng)

        def logits_fn(xb):
            logits, cache = _forward_cache(self.net_, xb)
            return logits, cache

        def backward_fn(dlogits, cache):
            gw, gb = _backward(self.net_, cache, dlogits)
            return gw + gb

        self._fit_ce(x, y, self.net_.params(), logits_fn, backward_fn,
                     self.lr, self.epochs, self.batch_size, self.seed)
        return self

    def _logits(self, x):
        return _forward_cache(self.net_, x)


def train_classifier(z, y, kind: str = "mlp-2layer", *, seed: int = 0,
                     hidden_layers: int = 1, epochs: int | None = None):
    """Fit a downstream classifier of the requested kind on (z, y)."""
    if kind == "logistic":
        clf = LogisticClassifier(seed=seed, **({"epochs": epochs} if epochs else {}))
    elif kind == "mlp-2layer":
        clf = MlpClassifier(seed=seed, hidden_layers=hidden_layers,
                            **({"epochs": epochs} if epochs else {}))
    else:
        raise BadConfig(f"unknown classifier kind {kind!r}")
    return clf.fit(z, y)
