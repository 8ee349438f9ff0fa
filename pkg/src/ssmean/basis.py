"""Covariate augmentation: appending function-of-covariate columns so the
least-squares estimators approach the oracle risk.

Added columns are computed on the pooled labeled+unlabeled rows and split
back, so labeled and unlabeled rows are transformed identically. The
trig-on-rank family follows the pooled empirical-CDF rank transform
z = rank/N - (N+1)/(2N) (average ranks on ties) and the orthonormal basis
sqrt(2) cos(2 pi k z), sqrt(2) sin(2 pi k z).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .errors import DimensionOverflow, InvalidArgs
from .estimators import Dataset, MeanEstimate, estimate_ls, estimate_ssls


class BasisFamily(str, Enum):
    POLYNOMIAL = "polynomial"
    TRIG_ON_RANK = "trig_on_rank"
    CUSTOM = "custom"


@dataclass(frozen=True)
class BasisSpec:
    """A family of q added covariate functions.

    Polynomial: column k (0-based) is covariate ``k % p`` raised to the power
    ``2 + k // p`` (all squares first, then cubes, ...). Trig-on-rank: the
    same cycling over covariates with increasing trigonometric basis index.
    Custom: ``funcs`` maps a covariate row to each added value.
    """

    family: BasisFamily
    q: int
    params: tuple[float, ...] = ()
    funcs: tuple[Callable[[np.ndarray], float], ...] = ()

    def __post_init__(self):
        if self.q < 0:
            raise InvalidArgs(f"q must be nonnegative, got {self.q}")
        if self.family is BasisFamily.CUSTOM and len(self.funcs) != self.q:
            raise InvalidArgs(
                f"custom basis needs exactly q={self.q} functions, got {len(self.funcs)}"
            )

    def label(self) -> str:
        names = {
            BasisFamily.POLYNOMIAL: "poly",
            BasisFamily.TRIG_ON_RANK: "trig",
            BasisFamily.CUSTOM: "custom",
        }
        return f"{names[self.family]}:{self.q}"


def _icbrt(n: int) -> int:
    """Exact floor(n ** (1/3)) for nonnegative integers."""
    q = round(n ** (1.0 / 3.0))
    while q ** 3 > n:
        q -= 1
    while (q + 1) ** 3 <= n:
        q += 1
    return q


def default_q(n: int, p: int = 1) -> int:
    """Cube-root growth rule for the number of added columns, capped so the
    augmented dimension keeps p + q <= n - 2."""
    if n < 4:
        raise InvalidArgs(f"default_q needs n >= 4, got {n}")
    q = max(1, _icbrt(n))
    return min(q, max(n - 2 - p, 0))


def default_basis_spec(n: int, p: int) -> BasisSpec:
    """Family by dimension (trig-on-rank for p = 1, polynomial otherwise), q
    by the cube-root rule."""
    family = BasisFamily.TRIG_ON_RANK if p == 1 else BasisFamily.POLYNOMIAL
    return BasisSpec(family=family, q=default_q(n, p))


def parse_basis_spec(text: str, n: int, p: int) -> BasisSpec | None:
    """Parse the CLI literal: ``none``, ``auto``, ``poly:K`` or ``trig:K``
    with K the number of added columns."""
    lowered = text.strip().lower()
    if lowered == "none":
        return None
    if lowered == "auto":
        return default_basis_spec(n, p)
    head, sep, tail = lowered.partition(":")
    families = {"poly": BasisFamily.POLYNOMIAL, "trig": BasisFamily.TRIG_ON_RANK}
    if not sep or head not in families:
        raise InvalidArgs(f"unrecognized basis spec {text!r} (use none, auto, poly:K or trig:K)")
    try:
        q = int(tail)
    except ValueError:
        raise InvalidArgs(f"basis count in {text!r} is not an integer") from None
    if q < 0:
        raise InvalidArgs(f"basis count must be nonnegative, got {q}")
    return BasisSpec(family=families[head], q=q)


def _rank_transform(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    ranks = rankdata(values, method="average")
    return ranks / n - (n + 1) / (2 * n)


def _trig_column(z: np.ndarray, index: int) -> np.ndarray:
    # index 1, 2, 3, 4, ... -> sqrt2 cos(2 pi z), sqrt2 sin(2 pi z), sqrt2 cos(4 pi z), ...
    k = (index + 1) // 2
    phase = 2.0 * math.pi * k * z
    return math.sqrt(2.0) * (np.cos(phase) if index % 2 == 1 else np.sin(phase))


def _added_columns(pooled: np.ndarray, spec: BasisSpec) -> np.ndarray:
    p = pooled.shape[1]
    cols = np.empty((pooled.shape[0], spec.q))
    if spec.family is BasisFamily.POLYNOMIAL:
        for k in range(spec.q):
            cols[:, k] = pooled[:, k % p] ** (2 + k // p)
    elif spec.family is BasisFamily.TRIG_ON_RANK:
        z_by_col = {j: _rank_transform(pooled[:, j]) for j in {k % p for k in range(spec.q)}}
        for k in range(spec.q):
            cols[:, k] = _trig_column(z_by_col[k % p], 1 + k // p)
    else:
        for k in range(spec.q):
            cols[:, k] = np.asarray([float(spec.funcs[k](row)) for row in pooled])
    return cols


def augment(ds: Dataset, spec: BasisSpec) -> Dataset:
    """Append the family's q columns to both labeled and unlabeled covariates.

    The known covariate mean survives only for the trig-on-rank family (its
    columns have closed-form zero means under the ideal setting); otherwise it
    is dropped, which forces the semi-supervised estimator downstream.
    """
    if spec.q == 0:
        return ds
    n, m, p = ds.n, ds.m, ds.p
    if p + spec.q > n - 2:
        raise DimensionOverflow(
            f"augmented dimension p+q={p + spec.q} exceeds n-2={n - 2}"
        )
    cols = _added_columns(ds.pooled_x(), spec)
    new_x = np.column_stack([ds.x, cols[:n]])
    new_xu = np.column_stack([ds.x_unlabeled, cols[n:]])
    mu = None
    if ds.known_mu is not None and spec.family is BasisFamily.TRIG_ON_RANK:
        mu = np.concatenate([ds.known_mu, np.zeros(spec.q)])
    return Dataset(y=ds.y, x=new_x, x_unlabeled=new_xu, known_mu=mu)


def estimate_ls_augmented(
    ds: Dataset, spec: BasisSpec, alpha: float = 0.05, truncate: bool = False
) -> MeanEstimate:
    """Ideal-setting estimator on the augmented covariates."""
    est = estimate_ls(augment(ds, spec), alpha, truncate)
    return dataclasses.replace(est, basis=spec)


def estimate_ssls_augmented(
    ds: Dataset, spec: BasisSpec, alpha: float = 0.05, truncate: bool = False
) -> MeanEstimate:
    """Semi-supervised estimator on the augmented covariates."""
    est = estimate_ssls(augment(ds, spec), alpha, truncate)
    return dataclasses.replace(est, basis=spec)
