"""Trade-off frontier estimation and representation scoring.

Two frontiers are estimated from (X, Y, S) samples:

- the data-space frontier ("dst"): the best accuracy any representation of X
  can reach at a given unfairness level, and
- the label-space frontier ("lst"): the same ceiling when the encoder sees
  the labels themselves (one-hot Y and S, plus X by default), i.e. the limit
  with unlimited extra data.

Each point runs an alternating scheme: a closed-form encoder solve on the
current features, then SGD ascent on the feature extractor with the encoder
frozen, repeated ``rounds`` times (plus a final re-solve), then a downstream
classifier whose accuracy and group-fairness violation become the point.

Randomness: every point derives its streams from
``SeedSequence(root_seed, spawn_key=(round(lam * 1e6), seed))``, split in
order (net init, kernel basis, SGD shuffling, classifier init).  Points are
therefore reproducible independently of sweep scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .data import Dataset
from .dependence import check_notion
from .encoder import EncoderProblem, solve_encoder
from .exceptions import (
    BadConfig,
    EmptyCurve,
    FateError,
    PartialFailure,
    ShapeMismatch,
)
from .kernels import BasisMap, KernelConfig, onehot_factor
from .metrics import accuracy, dpv, eod, eood
from .nn import EncoderMap, SgdConfig, init_mlp, mlp_forward, train_classifier, train_feature_extractor
from .validation import as_labels, as_matrix

__all__ = [
    "DEFAULT_LAMBDA_GRID",
    "DEFAULT_SEEDS",
    "REGIONS",
    "EstimatorConfig",
    "TradeoffPoint",
    "CurveBin",
    "TradeoffCurve",
    "EvaluationReport",
    "estimate_dst_point",
    "estimate_lst_point",
    "sweep",
    "pareto_front",
    "dist_to_curve",
    "classify_region",
    "evaluate_representation",
    "unfairness_for_notion",
]

#: Pressure grid: a coarse ramp plus two near-limit values.
DEFAULT_LAMBDA_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)

DEFAULT_SEEDS = (0, 1, 2, 3, 4)

REGIONS = ("possible", "possible-with-extra-data", "impossible")

MODES = ("dst", "lst")


@dataclass(frozen=True)
class EstimatorConfig:
    """Every knob of a frontier estimation run."""

    kernel: KernelConfig = field(default_factory=KernelConfig)
    gamma: float = 1e-4
    r: int | None = None
    rounds: int = 20
    sgd: SgdConfig = field(default_factory=lambda: SgdConfig(lr=1e-2, epochs=2, batch_size=256))
    hidden: tuple = (64, 32)
    activation: str = "relu"
    normalize_features: bool = True
    classifier: str = "mlp-2layer"
    classifier_epochs: int | None = None
    classifier_depth: int = 1
    include_x: bool = True
    positive_class: int = 1
    root_seed: int = 0
    bin_width: float = 0.01
    workers: int | None = None

    def __post_init__(self):
        if self.rounds < 1:
            raise BadConfig(f"rounds must be >= 1, got {self.rounds}")
        if not self.bin_width > 0:
            raise BadConfig(f"bin_width must be positive, got {self.bin_width}")
        if len(self.hidden) < 1 or any(int(h) <= 0 for h in self.hidden):
            raise BadConfig(f"hidden must be positive widths, got {self.hidden}")


@dataclass(frozen=True)
class TradeoffPoint:
    """One (accuracy, unfairness) outcome of the pipeline."""

    lam: float
    seed: int
    accuracy: float
    unfairness: float
    objective_value: float
    notion: str
    mode: str


@dataclass(frozen=True)
class CurveBin:
    lo: float
    hi: float
    count: int
    unfairness_mean: float
    accuracy_mean: float
    accuracy_var: float


@dataclass
class TradeoffCurve:
    """Raw sweep points plus aggregation and frontier views."""

    points: list
    notion: str
    mode: str
    bin_width: float = 0.01
    failures: list = field(default_factory=list)

    def __post_init__(self):
        self.points = sorted(self.points, key=lambda p: (p.lam, p.seed))

    def bins(self) -> list:
        """Per-unfairness-bin mean/variance of accuracy, ordered by bin."""
        if not self.points:
            raise EmptyCurve("curve has no points")
        groups: dict = {}
        for p in self.points:
            groups.setdefault(int(np.floor(p.unfairness / self.bin_width + 1e-12)), []).append(p)
        out = []
        for idx in sorted(groups):
            members = groups[idx]
            accs = np.array([p.accuracy for p in members])
            unfs = np.array([p.unfairness for p in members])
            out.append(CurveBin(
                lo=idx * self.bin_width,
                hi=(idx + 1) * self.bin_width,
                count=len(members),
                unfairness_mean=float(unfs.mean()),
                accuracy_mean=float(accs.mean()),
                accuracy_var=float(accs.var()),
            ))
        return out

    def pareto(self) -> list:
        return pareto_front(self.points)

    def interpolate_accuracy(self, unfairness: float) -> tuple[float, bool]:
        """Frontier accuracy at an unfairness level, clamped at the ends.

        Interpolates over the Pareto envelope, so no raw point of this curve
        ever lies above the interpolation.  Returns ``(value, clamped)``.
        """
        front = self.pareto()
        xs = np.array([p.unfairness for p in front])
        ys = np.array([p.accuracy for p in front])
        if unfairness <= xs[0]:
            return float(ys[0]), unfairness < xs[0]
        if unfairness >= xs[-1]:
            return float(ys[-1]), unfairness > xs[-1]
        return float(np.interp(unfairness, xs, ys)), False

    @property
    def max_unfairness(self) -> float:
        if not self.points:
            raise EmptyCurve("curve has no points")
        return max(p.unfairness for p in self.points)


def pareto_front(points: Iterable) -> list:
    """Non-dominated subset, ordered by unfairness ascending.

    A point is dominated when another has accuracy at least as high and
    unfairness at most as high, with one comparison strict.  Exact duplicates
    do not dominate each other and are all kept.
    """
    pts = sorted(points, key=lambda p: (p.unfairness, -p.accuracy))
    if not pts:
        raise EmptyCurve("no points")
    front = [pts[0]]
    for p in pts[1:]:
        last = front[-1]
        if p.unfairness == last.unfairness and p.accuracy == last.accuracy:
            front.append(p)
        elif p.accuracy > last.accuracy:
            front.append(p)
    return front


def unfairness_for_notion(y_pred, y_true, s, notion: str, *,
                          positive_class: int = 1) -> float:
    """The violation metric a notion's sweep reports for its points."""
    check_notion(notion)
    if notion == "dp":
        return dpv(y_pred, s)
    if notion == "eo":
        return eod(y_pred, y_true, s, positive_class=positive_class)
    return eood(y_pred, y_true, s)


def _lst_inputs(dataset: Dataset, include_x: bool) -> np.ndarray:
    parts = [
        onehot_factor(dataset.y, dataset.num_y_classes),
        onehot_factor(dataset.s, dataset.num_s_classes),
    ]
    if include_x:
        parts.append(dataset.x)
    return np.concatenate(parts, axis=1)


def _estimate_point(dataset: Dataset, lam: float, notion: str,
                    config: EstimatorConfig, seed: int, mode: str) -> TradeoffPoint:
    check_notion(notion)
    if not 0.0 <= lam < 1.0:
        raise BadConfig(f"lam must lie in [0, 1), got {lam}")
    x = dataset.x if mode == "dst" else _lst_inputs(dataset, config.include_x)
    y, s = dataset.y, dataset.s
    c_y, c_s = dataset.num_y_classes, dataset.num_s_classes

    ss = np.random.SeedSequence(config.root_seed,
                                spawn_key=(int(round(lam * 1e6)), int(seed)))
    k_net, k_basis, k_sgd, k_clf = ss.spawn(4)

    net = init_mlp([x.shape[1], *config.hidden], config.activation,
                   config.normalize_features, rng=np.random.default_rng(k_net))
    basis = BasisMap.fit(mlp_forward(net, x), config.kernel,
                         seed=np.random.default_rng(k_basis))

    sgd_rng = np.random.default_rng(k_sgd)
    n = x.shape[0]
    batch = config.sgd.batch_size or n
    steps_per_round = config.sgd.epochs * max(1, -(-n // batch))
    total_steps = config.rounds * steps_per_round

    if lam > 0.0:  # at lam == 0 the first closed-form solve is already optimal
        for rnd in range(config.rounds):
            factor = basis.factor(mlp_forward(net, x))
            encoder = solve_encoder(EncoderProblem(
                x_factor=factor, y=y, s=s, notion=notion, lam=lam,
                gamma=config.gamma, r=config.r, positive_class=config.positive_class,
            ))
            train_feature_extractor(
                net, x, y, s, EncoderMap(basis, encoder.theta), lam, notion,
                config.sgd, sgd_rng, positive_class=config.positive_class,
                num_y_classes=c_y, num_s_classes=c_s,
                start_step=rnd * steps_per_round, total_steps=total_steps,
            )
    factor = basis.factor(mlp_forward(net, x))
    encoder = solve_encoder(EncoderProblem(
        x_factor=factor, y=y, s=s, notion=notion, lam=lam,
        gamma=config.gamma, r=config.r, positive_class=config.positive_class,
    ))

    z = encoder.encode_features(factor.L)
    clf = train_classifier(z, y, kind=config.classifier, seed=k_clf,
                           hidden_layers=config.classifier_depth,
                           epochs=config.classifier_epochs)
    y_hat = clf.predict(z)
    return TradeoffPoint(
        lam=float(lam), seed=int(seed),
        accuracy=accuracy(y_hat, y),
        unfairness=unfairness_for_notion(y_hat, y, s, notion,
                                         positive_class=config.positive_class),
        objective_value=encoder.objective_value,
        notion=notion, mode=mode,
    )


def estimate_dst_point(dataset: Dataset, lam: float, notion: str,
                       config: EstimatorConfig | None = None,
                       seed: int = 0) -> TradeoffPoint:
    """One data-space trade-off point at fairness pressure ``lam``."""
    return _estimate_point(dataset, lam, notion, config or EstimatorConfig(), seed, "dst")


def estimate_lst_point(dataset: Dataset, lam: float, notion: str,
                       config: EstimatorConfig | None = None,
                       seed: int = 0) -> TradeoffPoint:
    """One label-space trade-off point; the encoder sees one-hot Y and S
    (plus X when ``config.include_x``)."""
    return _estimate_point(dataset, lam, notion, config or EstimatorConfig(), seed, "lst")


def _sweep_job(args):
    dataset, lam, notion, config, seed, mode = args
    try:
        return ("ok", lam, seed, _estimate_point(dataset, lam, notion, config, seed, mode))
    except FateError as exc:
        return ("err", lam, seed, exc.kind, str(exc))
    except Exception as exc:  # keep the pool alive; record and move on
        return ("err", lam, seed, "Error", str(exc))


def resolve_workers(explicit: int | None = None) -> int:
    """Worker count: explicit argument, then FATE_THREADS, then cpu count."""
    if explicit is not None:
        if explicit < 1:
            raise BadConfig(f"workers must be >= 1, got {explicit}")
        return int(explicit)
    env = os.environ.get("FATE_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise BadConfig(f"FATE_THREADS must be an integer, got {env!r}") from exc
        if value < 1:
            raise BadConfig(f"FATE_THREADS must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def sweep(dataset: Dataset, lam_grid: Sequence | None, notion: str,
          config: EstimatorConfig | None = None,
          seeds: Sequence | None = None, *, mode: str = "dst",
          workers: int | None = None) -> TradeoffCurve:
    """Estimate a full trade-off curve over a pressure grid and seed set.

    Jobs are independent and may run in a process pool (``workers`` argument,
    else ``FATE_THREADS``, else the CPU count); results are reduced in a
    fixed (lam, seed) order, so the curve does not depend on scheduling.
    Failed jobs are recorded on ``curve.failures`` instead of aborting the
    sweep; if every job fails, :class:`PartialFailure` is raised.
    """
    config = config or EstimatorConfig()
    if mode not in MODES:
        raise BadConfig(f"mode must be one of {MODES}, got {mode!r}")
    check_notion(notion)
    grid = [float(v) for v in (lam_grid if lam_grid is not None else DEFAULT_LAMBDA_GRID)]
    if not grid:
        raise BadConfig("lambda grid is empty")
    for lam in grid:
        if not 0.0 <= lam < 1.0:
            raise BadConfig(f"lam must lie in [0, 1), got {lam}")
    seed_list = [int(v) for v in (seeds if seeds is not None else DEFAULT_SEEDS)]
    if not seed_list:
        raise BadConfig("seed list is empty")

    jobs = [(dataset, lam, notion, config, seed, mode)
            for lam in grid for seed in seed_list]
    n_workers = resolve_workers(workers if workers is not None else config.workers)
    if n_workers <= 1 or len(jobs) == 1:
        raw = [_sweep_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            raw = list(pool.map(_sweep_job, jobs))

    points, failures = [], []
    for item in sorted(raw, key=lambda t: (t[1], t[2])):
        if item[0] == "ok":
            points.append(item[3])
        else:
            failures.append({"lam": item[1], "seed": item[2],
                             "kind": item[3], "message": item[4]})
    if not points:
        raise PartialFailure("every sweep job failed", failures=failures)
    return TradeoffCurve(points, notion, mode, config.bin_width, failures)


def _acc_unf(point) -> tuple[float, float]:
    if hasattr(point, "accuracy"):
        return float(point.accuracy), float(point.unfairness)
    acc, unf = point
    return float(acc), float(unf)


def dist_to_curve(point, curve: TradeoffCurve, *, weight: float = 0.5,
                  max_unfairness: float | None = None,
                  max_accuracy: float = 1.0) -> float:
    """Weighted normalized distance from a point to the nearest curve point.

    ``sqrt(w * ((u_c - u_p) / max_unfairness)^2
          + (1 - w) * ((a_c - a_p) / max_accuracy)^2)`` minimized over the
    curve's raw points.  Default normalizers: accuracy by 1, unfairness by
    the largest value seen across the curve and the point (1 if all zero).
    """
    if not curve.points:
        raise EmptyCurve("curve has no points")
    if not 0.0 <= weight <= 1.0:
        raise BadConfig(f"weight must lie in [0, 1], got {weight}")
    acc, unf = _acc_unf(point)
    if max_unfairness is None:
        max_unfairness = max([unf] + [p.unfairness for p in curve.points])
        if max_unfairness <= 0.0:
            max_unfairness = 1.0
    if not max_unfairness > 0 or not max_accuracy > 0:
        raise BadConfig("normalizers must be positive")
    best = np.inf
    for p in curve.points:
        du = (p.unfairness - unf) / max_unfairness
        da = (p.accuracy - acc) / max_accuracy
        best = min(best, weight * du * du + (1.0 - weight) * da * da)
    return float(np.sqrt(best))


def classify_region(point, dst_curve: TradeoffCurve, lst_curve: TradeoffCurve) -> str:
    """Place a point against the two frontiers.

    Above the label-space frontier: ``impossible``.  Between the two:
    ``possible-with-extra-data``.  Otherwise ``possible``.
    """
    acc, unf = _acc_unf(point)
    lst_acc, _ = lst_curve.interpolate_accuracy(unf)
    if acc > lst_acc:
        return "impossible"
    dst_acc, _ = dst_curve.interpolate_accuracy(unf)
    if acc > dst_acc:
        return "possible-with-extra-data"
    return "possible"


@dataclass(frozen=True)
class EvaluationReport:
    """How an external representation scores against estimated frontiers."""

    accuracy: float
    unfairness: float
    dist_dst: float
    dist_lst: float
    region: str
    notion: str
    classifier: str
    normalizers: dict


def evaluate_representation(z, y, s, dst_curve: TradeoffCurve,
                            lst_curve: TradeoffCurve, notion: str, *,
                            classifier: str = "logistic", seed: int = 0,
                            positive_class: int = 1,
                            weight: float = 0.5) -> EvaluationReport:
    """Score representation rows ``z`` against both frontiers.

    Trains a downstream classifier on (z, y), measures its accuracy and the
    notion's violation, then reports weighted distances to each curve and the
    feasibility region.
    """
    z = as_matrix(z, "z", allow_empty=False)
    y = as_labels(y, "y")
    s = as_labels(s, "s")
    if not z.shape[0] == y.size == s.size:
        raise ShapeMismatch("z, y and s must cover the same rows")
    check_notion(notion)
    clf = train_classifier(z, y, kind=classifier, seed=seed)
    y_hat = clf.predict(z)
    acc = accuracy(y_hat, y)
    unf = unfairness_for_notion(y_hat, y, s, notion, positive_class=positive_class)
    max_unf = max([unf]
                  + [p.unfairness for p in dst_curve.points]
                  + [p.unfairness for p in lst_curve.points])
    if max_unf <= 0.0:
        max_unf = 1.0
    point = (acc, unf)
    return EvaluationReport(
        accuracy=acc,
        unfairness=unf,
        dist_dst=dist_to_curve(point, dst_curve, weight=weight,
                               max_unfairness=max_unf),
        dist_lst=dist_to_curve(point, lst_curve, weight=weight,
                               max_unfairness=max_unf),
        region=classify_region(point, dst_curve, lst_curve),
        notion=notion,
        classifier=classifier,
        normalizers={"max_unfairness": max_unf, "max_accuracy": 1.0,
                     "weight": weight},
    )
