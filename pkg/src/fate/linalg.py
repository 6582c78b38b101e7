"""Dense symmetric linear algebra used by the encoder solve.

Four primitives: a rank-revealing PSD Cholesky factorization, a symmetric
eigensolver with a deterministic ordering convention, a symmetric-definite
generalized eigensolver built on explicit Cholesky reduction, and a
minimum-norm least-squares apply of a pseudo-inverse.  LAPACK (via numpy and
scipy) does the heavy lifting; this module owns the contracts: ordering,
tolerances, and the error vocabulary.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .exceptions import (
    IndefiniteBeyondJitter,
    NoConvergence,
    NotPositiveDefinite,
    RankDeficient,
    ShapeMismatch,
)
from .validation import as_matrix, check_symmetric

__all__ = [
    "EigResult",
    "cholesky_psd",
    "sym_eig",
    "generalized_sym_eig",
    "pinv_apply",
]

#: Relative threshold below which trailing pivots are dropped as zero.
PIVOT_DROP_RTOL = 1e-10

#: Relative reconstruction accuracy the returned factor must achieve.
RECONSTRUCTION_RTOL = 1e-8


class EigResult(NamedTuple):
    """Eigenvalues in descending order and eigenvectors as matching columns."""

    values: np.ndarray
    vectors: np.ndarray


def cholesky_psd(a, jitter: float = 0.0) -> np.ndarray:
    """Factor a symmetric PSD matrix as ``a ~= f @ f.T`` with full-column-rank ``f``.

    Uses a pivoted (rank-revealing) Cholesky factorization; trailing pivots
    smaller than ``PIVOT_DROP_RTOL`` times the largest diagonal entry are
    dropped, so the returned factor has exactly the numerical rank many
    columns.  Eigenvalues of ``a`` as low as ``-jitter`` are tolerated and
    clipped to zero.

    Parameters
    ----------
    a : array-like, shape (n, n)
        Symmetric positive semidefinite matrix.
    jitter : float
        Most negative eigenvalue magnitude still accepted as roundoff.

    Returns
    -------
    ndarray, shape (n, rank)
        Factor with ``max_norm(a - f @ f.T) <= 1e-8 * max(1, frob(a))``.

    Raises
    ------
    NotSymmetric
        If ``a`` deviates from its transpose beyond 1e-10 relative.
    IndefiniteBeyondJitter
        If the most negative eigenvalue of ``a`` is below ``-jitter``.
    """
    a = as_matrix(a, "a")
    check_symmetric(a, "a")
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    max_diag = float(a.diagonal().max(initial=0.0))
    if max_diag <= 0.0:
        # Zero (or negative-diagonal) matrix: either everything is roundoff
        # or the matrix is genuinely indefinite; decide via the spectrum.
        return _eigen_factor(a, jitter)

    c, piv, rank, _info = lapack.dpstrf(a, tol=PIVOT_DROP_RTOL * max_diag, lower=1)
    factor = np.zeros((n, rank))
    factor[piv - 1, :] = np.tril(c)[:, :rank]
    if _reconstructs(a, factor):
        return np.ascontiguousarray(factor)
    # dpstrf signals "rank deficient or indefinite" identically; fall back to
    # the spectral route, which distinguishes the two.
    return _eigen_factor(a, jitter)


def _reconstructs(a: np.ndarray, factor: np.ndarray) -> bool:
    err = np.linalg.norm(a - factor @ factor.T)
    return err <= RECONSTRUCTION_RTOL * max(1.0, float(np.linalg.norm(a)))


def _eigen_factor(a: np.ndarray, jitter: float) -> np.ndarray:
    w, q = np.linalg.eigh(a)
    if w.size and float(w[0]) < -jitter:
        raise IndefiniteBeyondJitter(
            f"most negative eigenvalue {w[0]:.3e} is below -jitter={-jitter:.3e}"
        )
    w = np.clip(w, 0.0, None)
    keep = w > PIVOT_DROP_RTOL * max(float(w.max(initial=0.0)), 0.0)
    factor = q[:, keep] * np.sqrt(w[keep])
    return np.ascontiguousarray(factor[:, ::-1])  # largest pivot first


def sym_eig(a) -> EigResult:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Eigenvector columns are orthonormal and sign-canonicalized (the entry of
    largest magnitude in each column is made positive) so repeated calls on
    identical input are bitwise reproducible.

    Raises
    ------
    NotSymmetric
        If ``a`` is not symmetric within 1e-10 relative tolerance.
    NoConvergence
        If the underlying iteration fails.
    """
    a = as_matrix(a, "a")
    check_symmetric(a, "a")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise NoConvergence(str(exc)) from exc
    w = w[::-1].copy()
    v = v[:, ::-1]
    return EigResult(w, _canonical_signs(v))


def _canonical_signs(v: np.ndarray) -> np.ndarray:
    v = np.ascontiguousarray(v)
    if v.size == 0:
        return v
    lead = np.abs(v).argmax(axis=0)
    signs = np.sign(v[lead, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def generalized_sym_eig(b, c) -> EigResult:
    """Solve ``b @ u = tau * c @ u`` for symmetric ``b`` and PD ``c``.

    Reduction: ``c = r @ r.T`` (Cholesky), then the ordinary symmetric
    problem on ``r^-1 @ b @ r^-T``, then back-substitution.  Returned
    eigenvectors are c-orthonormal (``u_i.T @ c @ u_j = delta_ij``) and
    eigenvalues are in descending order.

    Raises
    ------
    ShapeMismatch
        If ``b`` and ``c`` differ in shape.
    NotSymmetric
        If either operand is not symmetric.
    NotPositiveDefinite
        If the smallest eigenvalue of ``c`` is not above ``1e-12`` times the
        largest.
    """
    b = as_matrix(b, "b")
    c = as_matrix(c, "c")
    if b.shape != c.shape:
        raise ShapeMismatch(f"b has shape {b.shape} but c has shape {c.shape}")
    check_symmetric(b, "b")
    check_symmetric(c, "c")
    wc = np.linalg.eigvalsh(c)
    if wc.size == 0:
        return EigResult(np.zeros(0), np.zeros((0, 0)))
    if float(wc[0]) <= 1e-12 * max(float(wc[-1]), 0.0) or float(wc[-1]) <= 0.0:
        raise NotPositiveDefinite(
            f"c has eigenvalue range [{wc[0]:.3e}, {wc[-1]:.3e}]"
        )
    r = np.linalg.cholesky(c)
    rb = solve_triangular(r, b, lower=True)
    mid = solve_triangular(r, rb.T, lower=True).T
    mid = 0.5 * (mid + mid.T)
    values, w = sym_eig(mid)
    vectors = solve_triangular(r, w, lower=True, trans="T")
    return EigResult(values, np.ascontiguousarray(vectors))


def pinv_apply(l, v) -> np.ndarray:
    """Minimum-norm solution ``x`` of ``l.T @ x = v`` in the least-squares sense.

    Equivalent to ``pinv(l.T) @ v`` without forming the pseudo-inverse.

    Parameters
    ----------
    l : array-like, shape (n, m)
    v : array-like, shape (m, r)

    Raises
    ------
    ShapeMismatch
        If ``l`` has a different column count than ``v`` has rows.
    RankDeficient
        If ``l`` has numerical rank zero while being nonempty.
    """
    l = as_matrix(l, "l")
    v = as_matrix(v, "v")
    if l.shape[1] != v.shape[0]:
        raise ShapeMismatch(
            f"l has {l.shape[1]} columns but v has {v.shape[0]} rows"
        )
    if l.size == 0:
        return np.zeros((l.shape[0], v.shape[1]))
    x, _res, rank, _sv = np.linalg.lstsq(l.T, v, rcond=None)
    if rank == 0:
        raise RankDeficient("l has numerical rank zero")
    return np.ascontiguousarray(x)
