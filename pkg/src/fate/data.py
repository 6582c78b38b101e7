"""Datasets: CSV loading, synthetic generation, discretization, embeddings.

CSV conventions: one header row; the target and sensitive columns may hold
strings or numbers and are mapped to contiguous indices by sorted order of
the distinct values (numeric sort when every value parses as a number,
lexicographic otherwise), so the mapping is independent of row order.

Binary matrices use a tiny container: ``FATEMAT1`` magic, u32 row and column
counts, then little-endian float64 row-major payload.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    BadConfig,
    BadSpec,
    DegenerateColumn,
    EmptyFile,
    IoError,
    MissingColumn,
    ParseError,
    RowCountMismatch,
)
from .validation import as_labels, as_matrix

__all__ = [
    "Dataset",
    "SyntheticSpec",
    "load_csv",
    "save_dataset_csv",
    "discretize_column",
    "generate_synthetic",
    "load_embeddings",
    "save_matrix",
    "load_matrix",
]

MATRIX_MAGIC = b"FATEMAT1"


@dataclass
class Dataset:
    """Feature rows plus aligned target and sensitive label vectors."""

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    feature_names: list = field(default_factory=list)
    y_values: list = field(default_factory=list)
    s_values: list = field(default_factory=list)

    def __post_init__(self):
        self.x = as_matrix(self.x, "x", allow_empty=False)
        self.y = as_labels(self.y, "y")
        self.s = as_labels(self.s, "s")
        if not self.x.shape[0] == self.y.size == self.s.size:
            raise RowCountMismatch(
                f"x has {self.x.shape[0]} rows, y {self.y.size}, s {self.s.size}"
            )
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.x.shape[1])]

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def num_y_classes(self) -> int:
        return int(self.y.max()) + 1

    @property
    def num_s_classes(self) -> int:
        return int(self.s.max()) + 1


def _label_map(values: list) -> tuple[list, dict]:
    """Sorted distinct values -> contiguous indices (numeric sort if possible)."""
    distinct = sorted(set(values))
    try:
        distinct = sorted(distinct, key=float)
    except ValueError:
        pass
    return distinct, {v: i for i, v in enumerate(distinct)}


def load_csv(path, target: str, sensitive: str, features: list | None = None) -> Dataset:
    """Load a dataset from a headered CSV file.

    Feature columns default to every column other than the target and
    sensitive ones, in file order.

    Raises
    ------
    IoError, EmptyFile, MissingColumn, ParseError
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if not rows:
        raise EmptyFile(f"{path} has no rows")
    header, body = rows[0], rows[1:]
    if not body:
        raise EmptyFile(f"{path} has a header but no data rows")
    for name in [target, sensitive] + list(features or []):
        if name not in header:
            raise MissingColumn(f"column {name!r} not in {path} header {header}")
    if features is None:
        features = [c for c in header if c not in (target, sensitive)]
    col = {name: header.index(name) for name in header}

    width = len(header)
    for i, row in enumerate(body):
        if len(row) != width:
            raise ParseError(f"{path}: row {i + 2} has {len(row)} cells, expected {width}")

    x = np.empty((len(body), len(features)))
    for j, name in enumerate(features):
        cj = col[name]
        for i, row in enumerate(body):
            try:
                v = float(row[cj])
            except ValueError as exc:
                raise ParseError(
                    f"{path}: row {i + 2}, column {name!r}: cannot parse {row[cj]!r}"
                ) from exc
            if not np.isfinite(v):
                raise ParseError(f"{path}: row {i + 2}, column {name!r}: non-finite value")
            x[i, j] = v

    y_raw = [row[col[target]] for row in body]
    s_raw = [row[col[sensitive]] for row in body]
    y_values, y_map = _label_map(y_raw)
    s_values, s_map = _label_map(s_raw)
    y = np.array([y_map[v] for v in y_raw], dtype=np.int64)
    s = np.array([s_map[v] for v in s_raw], dtype=np.int64)
    return Dataset(x, y, s, list(features), y_values, s_values)


def save_dataset_csv(path, dataset: Dataset) -> None:
    """Write features plus ``y``/``s`` columns; inverse of :func:`load_csv`."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(dataset.feature_names) + ["y", "s"])
            for i in range(dataset.n):
                writer.writerow(
                    [repr(float(v)) for v in dataset.x[i]]
                    + [int(dataset.y[i]), int(dataset.s[i])]
                )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def discretize_column(values, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-frequency discretization; returns (codes, interior edges).

    Codes count the edges at or below each value, so ties go to the upper
    bin.  Duplicated quantiles are merged, which can yield fewer bins than
    requested on heavily repeated data.

    Raises
    ------
    BadConfig
        If ``bins < 2``.
    DegenerateColumn
        If the column is constant.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.isfinite(values).all():
        raise ParseError("column contains non-finite values")
    if bins < 2:
        raise BadConfig(f"bins must be >= 2, got {bins}")
    if values.size == 0:
        raise EmptyFile("column has no values")
    if np.all(values == values[0]):
        raise DegenerateColumn("column is constant")
    qs = np.arange(1, bins) / bins
    edges = np.unique(np.quantile(values, qs))
    codes = np.searchsorted(edges, values, side="right").astype(np.int64)
    return codes, edges


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a seeded synthetic dataset.

    ``rho`` is the probability the sensitive label copies the target's
    generating factor.  ``mode="entangled"`` mixes all coordinates through a
    random rotation.  ``boundary="radial"`` puts the target classes on
    concentric shells (not linearly separable) instead of Gaussian blobs.
    """

    n: int = 1000
    d: int = 10
    c_y: int = 2
    c_s: int = 2
    rho: float = 0.0
    mode: str = "separable"
    boundary: str = "blobs"
    noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise BadSpec(f"n must be >= 2, got {self.n}")
        if self.d < 2:
            raise BadSpec(f"d must be >= 2, got {self.d}")
        if self.c_y < 2 or self.c_s < 2:
            raise BadSpec("c_y and c_s must be >= 2")
        if not 0.0 <= self.rho <= 1.0:
            raise BadSpec(f"rho must lie in [0, 1], got {self.rho}")
        if self.mode not in ("separable", "entangled"):
            raise BadSpec(f"mode must be separable|entangled, got {self.mode!r}")
        if self.boundary not in ("blobs", "radial"):
            raise BadSpec(f"boundary must be blobs|radial, got {self.boundary!r}")
        if self.noise < 0:
            raise BadSpec(f"noise must be >= 0, got {self.noise}")
        if self.boundary == "radial" and self.d < 4:
            raise BadSpec("radial boundary needs d >= 4")


def _class_means(rng: np.random.Generator, classes: int, dims: int,
                 scale: float) -> np.ndarray:
    """Well-separated seeded class means (orthonormal rows when possible)."""
    raw = rng.normal(size=(max(classes, dims), dims))
    if classes <= dims:
        q, _ = np.linalg.qr(raw.T)
        return scale * q.T[:classes]
    return scale * raw[:classes] / np.linalg.norm(raw[:classes], axis=1, keepdims=True)


#: Distance scale between adjacent class means, in noise units.
SIGNAL_SCALE = 2.4


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Draw a dataset from the spec; fully determined by ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n, spec.d
    u_y = rng.integers(0, spec.c_y, size=n)
    copied = rng.random(n) < spec.rho
    u_s = np.where(copied, u_y % spec.c_s, rng.integers(0, spec.c_s, size=n))

    # The features encode the target only; the sensitive label touches x
    # purely through its correlation (rho) with the target.  This makes the
    # demographic-parity trade-off non-degenerate: the only way to decorrelate
    # a representation from s is to give up target separation.
    d_y = max(2, min(3, d // 2))

    if spec.boundary == "blobs":
        means_y = _class_means(rng, spec.c_y, d_y, SIGNAL_SCALE)
        block_y = means_y[u_y] + spec.noise * rng.normal(size=(n, d_y))
    else:
        radii = 1.0 + SIGNAL_SCALE * np.arange(spec.c_y)
        dirs = rng.normal(size=(n, d_y))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        r = radii[u_y] + 0.25 * spec.noise * rng.normal(size=n)
        block_y = dirs * r[:, None]

    rest = d - d_y
    blocks = [block_y]
    if rest > 0:
        blocks.append(spec.noise * rng.normal(size=(n, rest)))
    x = np.concatenate(blocks, axis=1)

    if spec.mode == "entangled":
        q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        x = x @ q.T

    return Dataset(x, u_y.astype(np.int64), u_s.astype(np.int64))


def save_matrix(path, matrix) -> None:
    """Write a matrix in the FATEMAT1 container."""
    matrix = as_matrix(matrix, "matrix")
    rows, cols = matrix.shape
    try:
        with Path(path).open("wb") as fh:
            fh.write(struct.pack("<8sII", MATRIX_MAGIC, rows, cols))
            fh.write(np.ascontiguousarray(matrix, dtype="<f8").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_matrix(path) -> np.ndarray:
    """Read a FATEMAT1 container back into a float64 matrix."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    header = struct.calcsize("<8sII")
    if len(blob) < header:
        raise ParseError(f"{path}: truncated header")
    magic, rows, cols = struct.unpack_from("<8sII", blob)
    if magic != MATRIX_MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}")
    expected = header + rows * cols * 8
    if len(blob) != expected:
        raise ParseError(f"{path}: expected {expected} bytes, found {len(blob)}")
    data = np.frombuffer(blob, dtype="<f8", offset=header, count=rows * cols)
    return data.reshape(rows, cols).astype(np.float64)


def load_embeddings(path, labels_path, target: str = "y",
                    sensitive: str = "s") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Load representation rows (CSV or FATEMAT1) plus aligned labels.

    The labels file is a headered CSV holding the target and sensitive
    columns (extra columns are ignored).

    Raises
    ------
    RowCountMismatch
        If the two files disagree on the row count.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        z = _load_numeric_csv(path)
    else:
        z = load_matrix(path)
    # a labels file may carry arbitrary extra columns; request no features
    labels = load_csv(labels_path, target, sensitive, features=[])
    if z.shape[0] != labels.n:
        raise RowCountMismatch(
            f"{path} has {z.shape[0]} rows but {labels_path} has {labels.n}"
        )
    return z, labels.y, labels.s


def _load_numeric_csv(path: Path) -> np.ndarray:
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise EmptyFile(f"{path} has no rows")
    start = 0
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        start = 1  # header row
    body = rows[start:]
    if not body:
        raise EmptyFile(f"{path} has no data rows")
    width = len(body[0])
    out = np.empty((len(body), width))
    for i, row in enumerate(body):
        if len(row) != width:
            raise ParseError(f"{path}: row {i + start + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError as exc:
                raise ParseError(
                    f"{path}: row {i + start + 1}, column {j}: cannot parse {cell!r}"
                ) from exc
    if not np.isfinite(out).all():
        raise ParseError(f"{path}: non-finite values present")
    return out
