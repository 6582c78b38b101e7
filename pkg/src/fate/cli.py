"""Command-line front end.

Subcommands::

    fate gen-data   write a seeded synthetic dataset as CSV
    fate sweep      estimate a trade-off curve from a run config
    fate eval-repr  score an external representation against two curves
    fate report     export curves and reports as plot-ready CSV files

Exit codes: 0 on success, 1 on error, 2 when a sweep finished with gaps
(some jobs failed but a curve was still produced).  Errors are written to
stderr as one JSON object with ``"kind"`` and ``"message"`` fields so
callers never have to scrape tracebacks.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from dataclasses import fields as dataclass_fields
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import (config_digest, dataset_from_config, load_run_config,
                     run_config_to_dict)
from .data import SyntheticSpec, generate_synthetic, load_embeddings, save_dataset_csv
from .exceptions import BadConfig, FateError, IoError, PartialFailure
from .io import (load_curve, read_json, report_from_dict, report_to_dict,
                 save_curve, sha256_file, utc_now, write_json)
from .tradeoff import evaluate_representation, sweep

__all__ = ["main", "build_parser"]

_POINT_CSV_HEADER = "lam,seed,accuracy,unfairness,objective_value"


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; we reserve 2 for
    partial results, so turn usage problems into ordinary errors."""

    def error(self, message):
        raise BadConfig(message)


def _emit_error(kind: str, message: str, extra: dict | None = None) -> None:
    payload = {"kind": kind, "message": message}
    if extra:
        payload.update(extra)
    print(json.dumps(payload), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    gen = sub.add_parser("gen-data", help="write a seeded synthetic dataset")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--spec", help="JSON file with generator fields")
    for fld in dataclass_fields(SyntheticSpec):
        flag = "--" + fld.name.replace("_", "-")
        if fld.name in ("mode", "boundary"):
            gen.add_argument(flag, type=str)
        elif fld.name in ("rho", "noise"):
            gen.add_argument(flag, type=float)
        else:
            gen.add_argument(flag, type=int)
    gen.set_defaults(func=_cmd_gen_data)

    sw = sub.add_parser("sweep", help="estimate a trade-off curve")
    sw.add_argument("--config", required=True, help="run config JSON")
    sw.add_argument("--out", required=True, help="output directory")
    sw.add_argument("--mode", choices=("dst", "lst"),
                    help="override the config's mode")
    sw.add_argument("--notion", choices=("dp", "eo", "eoo"),
                    help="override the config's fairness notion")
    sw.add_argument("--workers", type=int, default=None,
                    help="parallel jobs (default: FATE_THREADS or CPU count)")
    sw.set_defaults(func=_cmd_sweep)

    ev = sub.add_parser("eval-repr", help="score a representation against curves")
    ev.add_argument("--embeddings", required=True,
                    help="representation rows (.csv or binary matrix)")
    ev.add_argument("--labels", required=True, help="CSV with label columns")
    ev.add_argument("--dst", required=True, help="data-space curve JSON")
    ev.add_argument("--lst", required=True, help="label-space curve JSON")
    ev.add_argument("--notion", required=True, choices=("dp", "eo", "eoo"))
    ev.add_argument("--out", required=True, help="report JSON path")
    ev.add_argument("--target", default="y")
    ev.add_argument("--sensitive", default="s")
    ev.add_argument("--classifier", default="logistic")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--positive-class", type=int, default=1)
    ev.set_defaults(func=_cmd_eval_repr)

    rp = sub.add_parser("report", help="export plot-ready CSVs")
    rp.add_argument("--curve", action="append", default=[],
                    help="curve JSON (repeatable)")
    rp.add_argument("--points", action="append", default=[],
                    help="evaluation report JSON (repeatable)")
    rp.add_argument("--out", required=True, help="output directory")
    rp.set_defaults(func=_cmd_report)
    return parser


def _cmd_gen_data(args) -> int:
    fields = {}
    if args.spec:
        obj = read_json(args.spec)
        if not isinstance(obj, dict):
            raise BadConfig("generator spec must be a JSON object")
        fields.update(obj)
    for fld in dataclass_fields(SyntheticSpec):
        val = getattr(args, fld.name)
        if val is not None:
            fields[fld.name] = val
    known = {f.name for f in dataclass_fields(SyntheticSpec)}
    unknown = set(fields) - known
    if unknown:
        raise BadConfig(f"unknown generator keys: {sorted(unknown)}")
    spec = SyntheticSpec(**fields)
    dataset = generate_synthetic(spec)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    save_dataset_csv(out, dataset)
    write_json(out.with_name(out.name + ".meta.json"), {
        "schema": 1,
        "kind": "synthetic-data",
        "created_at": utc_now(),
        "spec": {f.name: getattr(spec, f.name) for f in dataclass_fields(SyntheticSpec)},
        "csv_sha256": sha256_file(out),
    })
    print(f"wrote {dataset.n} rows x {dataset.x.shape[1]} features to {out}")
    return 0


def _points_csv_lines(points) -> list:
    lines = [_POINT_CSV_HEADER]
    for p in points:
        lines.append(f"{repr(p.lam)},{p.seed},{repr(p.accuracy)},"
                     f"{repr(p.unfairness)},{repr(p.objective_value)}")
    return lines


def _cmd_sweep(args) -> int:
    run = load_run_config(args.config)
    if args.mode:
        run = replace(run, mode=args.mode)
    if args.notion:
        run = replace(run, notion=args.notion)
    digest = config_digest(run)
    dataset = dataset_from_config(run)
    curve = sweep(dataset, run.lambda_grid, run.notion, run.estimator,
                  run.seeds, mode=run.mode, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config_copy = out / "config.json"
    if args.mode or args.notion:
        # flags changed the effective run; write the canonical form so the
        # output directory alone reproduces the curve
        write_json(config_copy, run_config_to_dict(run))
    elif Path(args.config).resolve() != config_copy.resolve():
        shutil.copyfile(args.config, config_copy)
    save_curve(out / "curve.json", curve, config_digest=digest)
    (out / "points.csv").write_text("\n".join(_points_csv_lines(curve.points)) + "\n")
    print(f"wrote {len(curve.points)} points ({run.mode}, {run.notion}) to {out}")
    print(f"config digest: {digest}")
    if curve.failures:
        _emit_error("PartialFailure",
                    f"{len(curve.failures)} of "
                    f"{len(curve.failures) + len(curve.points)} jobs failed",
                    {"failures": curve.failures})
        return 2
    return 0


def _cmd_eval_repr(args) -> int:
    z, y, s = load_embeddings(args.embeddings, args.labels,
                              args.target, args.sensitive)
    dst_curve = load_curve(args.dst)
    lst_curve = load_curve(args.lst)
    report = evaluate_representation(
        z, y, s, dst_curve, lst_curve, args.notion,
        classifier=args.classifier, seed=args.seed,
        positive_class=args.positive_class)
    write_json(args.out, report_to_dict(report, sources={
        "embeddings": str(args.embeddings),
        "labels": str(args.labels),
        "dst_curve": str(args.dst),
        "lst_curve": str(args.lst),
    }))
    print(f"accuracy={report.accuracy:.4f} unfairness={report.unfairness:.4f} "
          f"region={report.region}")
    return 0


def _unique_name(base: str, taken: set) -> str:
    name, i = base, 1
    while name in taken:
        root, dot, ext = base.rpartition(".")
        name = f"{root}-{i}.{ext}" if dot else f"{base}-{i}"
        i += 1
    taken.add(name)
    return name


def _cmd_report(args) -> int:
    if not args.curve and not args.points:
        raise BadConfig("report needs at least one --curve or --points input")
    # read every input before writing anything, so a bad input cannot leave
    # a half-written bundle behind
    curves = [(path, load_curve(path)) for path in args.curve]
    reports = [(path, report_from_dict(read_json(path))) for path in args.points]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    taken: set = set()
    files: dict = {}

    # percent scale to match the usual presentation of accuracy/violation axes
    for path, curve in curves:
        source = _unique_name(Path(path).stem, taken)
        name = source + "_bins.csv"
        lines = ["source,unfairness,acc_mean,acc_var,count"]
        for b in curve.bins():
            lines.append(f"{source},{repr(b.unfairness_mean * 100.0)},"
                         f"{repr(b.accuracy_mean * 100.0)},"
                         f"{repr(b.accuracy_var * 1e4)},{b.count}")
        (out / name).write_text("\n".join(lines) + "\n")
        files[name] = {"source": str(path), "kind": "curve-bins",
                       "sha256": sha256_file(out / name)}

    if reports:
        rows = ["source,unfairness,accuracy,dist_dst,dist_lst,region"]
        for path, rep in reports:
            rows.append(f"{Path(path).stem},{repr(rep.unfairness * 100.0)},"
                        f"{repr(rep.accuracy * 100.0)},{repr(rep.dist_dst)},"
                        f"{repr(rep.dist_lst)},{rep.region}")
        name = _unique_name("points.csv", taken)
        (out / name).write_text("\n".join(rows) + "\n")
        files[name] = {"source": [str(p) for p in args.points],
                       "kind": "evaluation-points",
                       "sha256": sha256_file(out / name)}

    write_json(out / "manifest.json", {
        "schema": 1,
        "kind": "report-manifest",
        "created_at": utc_now(),
        "files": files,
    })
    print(f"wrote {len(files)} files + manifest.json to {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_help()
            return 1
        return int(args.func(args))
    except PartialFailure as exc:
        _emit_error(exc.kind, str(exc), {"failures": exc.failures})
        return 2
    except FateError as exc:
        _emit_error(exc.kind, str(exc))
        return 1
    except OSError as exc:
        _emit_error("IoError", str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
