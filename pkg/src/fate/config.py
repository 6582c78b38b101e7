"""Run configuration: JSON form, validation, digests, dataset resolution.

A run config fully determines a sweep.  The canonical JSON form (defaults
filled in, keys sorted) is hashed with SHA-256; outputs carry that digest so
any export can be traced back to, and reproduced from, its configuration.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

from .data import Dataset, SyntheticSpec, generate_synthetic, load_csv
from .dependence import check_notion
from .exceptions import BadConfig, BadSpec, IoError
from .kernels import KernelConfig
from .nn import SgdConfig
from .tradeoff import DEFAULT_LAMBDA_GRID, DEFAULT_SEEDS, MODES, EstimatorConfig

__all__ = [
    "RunConfig",
    "parse_run_config",
    "load_run_config",
    "run_config_to_dict",
    "config_digest",
    "dataset_from_config",
]


@dataclass(frozen=True)
class RunConfig:
    """Dataset source + sweep shape + estimator knobs."""

    data: dict
    notion: str = "dp"
    mode: str = "dst"
    lambda_grid: tuple = tuple(DEFAULT_LAMBDA_GRID)
    seeds: tuple = tuple(DEFAULT_SEEDS)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)


def _take(obj: dict, allowed: dict, what: str) -> dict:
    """Pop known keys with defaults; reject unknown ones."""
    unknown = set(obj) - set(allowed)
    if unknown:
        raise BadConfig(f"unknown {what} keys: {sorted(unknown)}")
    return {k: obj.get(k, default) for k, default in allowed.items()}


def parse_run_config(obj: dict) -> RunConfig:
    """Validate a JSON object into a :class:`RunConfig`."""
    if not isinstance(obj, dict):
        raise BadConfig("run config must be a JSON object")
    top = _take(obj, {
        "data": None, "notion": "dp", "mode": "dst",
        "lambda_grid": list(DEFAULT_LAMBDA_GRID), "seeds": list(DEFAULT_SEEDS),
        "estimator": {},
    }, "run config")
    if not isinstance(top["data"], dict):
        raise BadConfig("config requires a 'data' object")
    data = dict(top["data"])
    if ("csv" in data) == ("synthetic" in data):
        raise BadConfig("'data' must hold exactly one of 'csv' or 'synthetic'")
    if "csv" in data:
        data = _take(data, {"csv": None, "target": "y", "sensitive": "s",
                            "features": None}, "data")
        if not isinstance(data["csv"], str):
            raise BadConfig("'data.csv' must be a path string")
    else:
        spec = _take(data, {"synthetic": None}, "data")["synthetic"]
        if not isinstance(spec, dict):
            raise BadConfig("'data.synthetic' must be an object")
        fields = _take(spec, {
            "n": 1000, "d": 10, "c_y": 2, "c_s": 2, "rho": 0.0,
            "mode": "separable", "boundary": "blobs", "noise": 1.0, "seed": 0,
        }, "synthetic spec")
        try:
            SyntheticSpec(**fields)  # validate eagerly for early errors
        except BadSpec:
            raise
        data = {"synthetic": fields}

    check_notion(top["notion"])
    if top["mode"] not in MODES:
        raise BadConfig(f"mode must be one of {MODES}, got {top['mode']!r}")

    est = top["estimator"]
    if not isinstance(est, dict):
        raise BadConfig("'estimator' must be an object")
    est = _take(est, {
        "kernel": {}, "gamma": 1e-4, "r": None, "rounds": 20, "sgd": {},
        "hidden": [64, 32], "activation": "relu", "normalize_features": True,
        "classifier": "mlp-2layer", "classifier_epochs": None,
        "classifier_depth": 1, "include_x": True, "positive_class": 1,
        "root_seed": 0, "bin_width": 0.01, "workers": None,
    }, "estimator")
    kernel = _take(est["kernel"] if isinstance(est["kernel"], dict) else {}, {
        "kind": "gaussian-rff", "rff_dim": 1000, "bandwidth": "median", "seed": 0,
    }, "kernel")
    sgd = _take(est["sgd"] if isinstance(est["sgd"], dict) else {}, {
        "lr": 1e-2, "epochs": 2, "batch_size": 256, "schedule": "cosine-annealing",
    }, "sgd")
    estimator = EstimatorConfig(
        kernel=KernelConfig(**kernel),
        gamma=est["gamma"], r=est["r"], rounds=est["rounds"],
        sgd=SgdConfig(**sgd),
        hidden=tuple(int(h) for h in est["hidden"]),
        activation=est["activation"],
        normalize_features=bool(est["normalize_features"]),
        classifier=est["classifier"],
        classifier_epochs=est["classifier_epochs"],
        classifier_depth=est["classifier_depth"],
        include_x=bool(est["include_x"]),
        positive_class=est["positive_class"],
        root_seed=est["root_seed"],
        bin_width=est["bin_width"],
        workers=est["workers"],
    )
    grid = tuple(float(v) for v in top["lambda_grid"])
    seeds = tuple(int(v) for v in top["seeds"])
    return RunConfig(data=data, notion=top["notion"], mode=top["mode"],
                     lambda_grid=grid, seeds=seeds, estimator=estimator)


def load_run_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadConfig(f"{path} is not valid JSON: {exc}") from exc
    return parse_run_config(obj)


def run_config_to_dict(cfg: RunConfig) -> dict:
    """Canonical dict form with every default made explicit."""
    est = asdict(cfg.estimator)
    est["kernel"] = asdict(cfg.estimator.kernel)
    est["sgd"] = asdict(cfg.estimator.sgd)
    est["hidden"] = list(cfg.estimator.hidden)
    return {
        "data": cfg.data,
        "notion": cfg.notion,
        "mode": cfg.mode,
        "lambda_grid": list(cfg.lambda_grid),
        "seeds": list(cfg.seeds),
        "estimator": est,
    }


def config_digest(cfg: RunConfig | dict) -> str:
    """SHA-256 of the canonical (sorted-key, compact) JSON form."""
    obj = run_config_to_dict(cfg) if isinstance(cfg, RunConfig) else cfg
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def dataset_from_config(cfg: RunConfig) -> Dataset:
    if "synthetic" in cfg.data:
        return generate_synthetic(SyntheticSpec(**cfg.data["synthetic"]))
    return load_csv(cfg.data["csv"], cfg.data["target"], cfg.data["sensitive"],
                    cfg.data["features"])
