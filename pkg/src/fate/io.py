"""On-disk formats for curves, evaluation reports, and export manifests.

Curve files are JSON with an integer ``"schema"`` field (currently 1) so old
readers can refuse new files loudly instead of misreading them.  Floats pass
through ``json`` unmodified, which round-trips IEEE doubles exactly: a curve
written and re-read classifies points bit-identically.
"""
from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone

from .dependence import NOTIONS
from .exceptions import IoError, SchemaError
from .tradeoff import MODES, EvaluationReport, TradeoffCurve, TradeoffPoint

__all__ = [
    "CURVE_SCHEMA",
    "curve_to_dict",
    "curve_from_dict",
    "save_curve",
    "load_curve",
    "report_to_dict",
    "report_from_dict",
    "write_json",
    "read_json",
    "sha256_file",
    "utc_now",
]

CURVE_SCHEMA = 1

_POINT_FIELDS = ("lam", "seed", "accuracy", "unfairness", "objective_value")


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_json(path, obj) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def curve_to_dict(curve: TradeoffCurve, *, config_digest: str | None = None,
                  created_at: str | None = None) -> dict:
    """Serializable form: raw points plus derived bins and Pareto front.

    The raw points are authoritative; bins and the front are included for
    consumers that only want the aggregates.
    """
    from . import __version__

    def point_dict(p):
        return {k: getattr(p, k) for k in _POINT_FIELDS}

    return {
        "schema": CURVE_SCHEMA,
        "kind": "tradeoff-curve",
        "meta": {
            "mode": curve.mode,
            "notion": curve.notion,
            "bin_width": curve.bin_width,
            "created_at": created_at if created_at is not None else utc_now(),
            "config_digest": config_digest,
            "version": __version__,
        },
        "points": [point_dict(p) for p in curve.points],
        "bins": [vars(b).copy() for b in curve.bins()],
        "pareto": [point_dict(p) for p in curve.pareto()],
        "gaps": list(curve.failures),
    }


def _require(obj: dict, key: str, types, what: str):
    if key not in obj:
        raise SchemaError(f"{what} is missing {key!r}")
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool):
        raise SchemaError(f"{what} field {key!r} has type "
                          f"{type(val).__name__}, expected {types}")
    return val


def curve_from_dict(obj) -> TradeoffCurve:
    """Validate and rebuild a curve; bins/front are recomputed from points."""
    if not isinstance(obj, dict):
        raise SchemaError("curve file must hold a JSON object")
    schema = _require(obj, "schema", int, "curve")
    if schema != CURVE_SCHEMA:
        raise SchemaError(f"unsupported curve schema {schema}, "
                          f"this reader handles {CURVE_SCHEMA}")
    if obj.get("kind") != "tradeoff-curve":
        raise SchemaError(f"not a trade-off curve file: kind={obj.get('kind')!r}")
    meta = _require(obj, "meta", dict, "curve")
    mode = _require(meta, "mode", str, "curve meta")
    notion = _require(meta, "notion", str, "curve meta")
    if mode not in MODES:
        raise SchemaError(f"unknown curve mode {mode!r}")
    if notion not in NOTIONS:
        raise SchemaError(f"unknown curve notion {notion!r}")
    bin_width = float(_require(meta, "bin_width", (int, float), "curve meta"))
    raw_points = _require(obj, "points", list, "curve")
    points = []
    for i, entry in enumerate(raw_points):
        if not isinstance(entry, dict):
            raise SchemaError(f"curve point {i} is not an object")
        vals = {}
        for key in _POINT_FIELDS:
            vals[key] = _require(entry, key, (int, float), f"curve point {i}")
        points.append(TradeoffPoint(
            lam=float(vals["lam"]), seed=int(vals["seed"]),
            accuracy=float(vals["accuracy"]),
            unfairness=float(vals["unfairness"]),
            objective_value=float(vals["objective_value"]),
            notion=notion, mode=mode,
        ))
    gaps = obj.get("gaps", [])
    if not isinstance(gaps, list):
        raise SchemaError("curve field 'gaps' must be a list")
    return TradeoffCurve(points, notion, mode, bin_width, list(gaps))


def save_curve(path, curve: TradeoffCurve, *, config_digest: str | None = None) -> None:
    write_json(path, curve_to_dict(curve, config_digest=config_digest))


def load_curve(path) -> TradeoffCurve:
    return curve_from_dict(read_json(path))


def report_to_dict(report: EvaluationReport, *, sources: dict | None = None,
                   created_at: str | None = None) -> dict:
    return {
        "schema": CURVE_SCHEMA,
        "kind": "evaluation-report",
        "created_at": created_at if created_at is not None else utc_now(),
        "notion": report.notion,
        "classifier": report.classifier,
        "accuracy": report.accuracy,
        "unfairness": report.unfairness,
        "dist_dst": report.dist_dst,
        "dist_lst": report.dist_lst,
        "region": report.region,
        "normalizers": dict(report.normalizers),
        "sources": sources or {},
    }


def report_from_dict(obj) -> EvaluationReport:
    if not isinstance(obj, dict):
        raise SchemaError("report file must hold a JSON object")
    schema = _require(obj, "schema", int, "report")
    if schema != CURVE_SCHEMA:
        raise SchemaError(f"unsupported report schema {schema}")
    if obj.get("kind") != "evaluation-report":
        raise SchemaError(f"not an evaluation report: kind={obj.get('kind')!r}")
    region = _require(obj, "region", str, "report")
    normalizers = obj.get("normalizers", {})
    if not isinstance(normalizers, dict):
        raise SchemaError("report field 'normalizers' must be an object")
    return EvaluationReport(
        accuracy=float(_require(obj, "accuracy", (int, float), "report")),
        unfairness=float(_require(obj, "unfairness", (int, float), "report")),
        dist_dst=float(_require(obj, "dist_dst", (int, float), "report")),
        dist_lst=float(_require(obj, "dist_lst", (int, float), "report")),
        region=region,
        notion=_require(obj, "notion", str, "report"),
        classifier=str(obj.get("classifier", "")),
        normalizers=dict(normalizers),
    )
