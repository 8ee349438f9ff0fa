"""Small dense linear algebra layer: design assembly, pivoted-QR least squares,
and covariance computation.

Every function is pure. Solves go through a column-pivoted QR factorization
for stability; the normal-equations route exists only as an independent
oracle inside the test suite. Dense storage only; the dimensions in play are
at most a few hundred columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InsufficientData, RankDeficient

#: A pivot smaller than RANK_TOL times the largest pivot marks the design
#: as numerically rank deficient.
RANK_TOL = 1e-10


def as_vector(values, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float array."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array (1-D input becomes a single column)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class OlsSolution:
    """Least-squares coefficients plus the diagnostics downstream code needs.

    ``condition_estimate`` is the ratio of extreme diagonals of the pivoted-QR
    R factor, a cheap proxy for the design's condition number.
    """

    beta: np.ndarray
    residuals: np.ndarray
    rank_ok: bool
    condition_estimate: float


def build_design(x_rows) -> np.ndarray:
    """Prepend an all-ones intercept column to the covariate rows."""
    x = as_matrix(x_rows, "x_rows")
    if x.shape[0] < 1:
        raise InsufficientData("need at least one row to build a design matrix")
    return np.column_stack([np.ones(x.shape[0]), x])


def ols_solve(design, y) -> OlsSolution:
    """Solve ``min ||y - design @ beta||_2`` by column-pivoted QR.

    Raises RankDeficient (with the condition estimate attached) instead of
    returning a silently unstable solution when the smallest R diagonal falls
    below ``RANK_TOL`` times the largest.
    """
    a = as_matrix(design, "design")
    b = as_vector(y, "y")
    n, k = a.shape
    if k < 1:
        raise DimensionMismatch("design must have at least one column")
    if b.shape[0] != n:
        raise DimensionMismatch(f"design has {n} rows but y has {b.shape[0]}")
    if n < k:
        raise InsufficientData(f"need at least {k} rows to fit {k} coefficients, got {n}")
    q, r, perm = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    largest = float(diag.max())
    smallest = float(diag.min())
    condition = largest / smallest if smallest > 0 else float("inf")
    if smallest <= RANK_TOL * largest:
        raise RankDeficient(
            f"design is numerically rank deficient (condition estimate {condition:.3e})",
            condition_estimate=condition,
        )
    z = scipy.linalg.solve_triangular(r, q.T @ b)
    beta = np.empty(k)
    beta[perm] = z
    residuals = b - a @ beta
    return OlsSolution(beta=beta, residuals=residuals, rank_ok=True, condition_estimate=condition)


def sample_cov(x_rows, center) -> np.ndarray:
    """Average outer product of the rows about ``center`` (divisor = row count).

    Returns (1/n) * sum_k (x_k - center)(x_k - center)^T, symmetrized.
    """
    x = as_matrix(x_rows, "x_rows")
    c = as_vector(center, "center")
    if x.shape[0] < 1:
        raise InsufficientData("need at least one row for a covariance")
    if x.shape[1] != c.shape[0]:
        raise DimensionMismatch(
            f"rows have {x.shape[1]} columns but center has {c.shape[0]} entries"
        )
    d = x - c
    cov = d.T @ d / x.shape[0]
    return (cov + cov.T) / 2.0
