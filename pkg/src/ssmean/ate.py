"""Semi-supervised average-treatment-effect estimation for randomized designs.

Each group gets its own OLS fit; the effect estimate contrasts the two
coefficient vectors at the covariate mean pooled over treatment, control and
any extra unlabeled rows. Block sums are accumulated group by group so that
swapping treatment and control negates the estimate exactly and leaves the
variance bit-for-bit unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InsufficientData
from .estimators import Dataset, RegressionFit, fit_regression, z_quantile
from .linalg import as_matrix, as_vector


@dataclass(frozen=True)
class AteDataset:
    """Labeled treatment rows, labeled control rows, and extra covariate rows
    representing the same population."""

    y_t: np.ndarray
    x_t: np.ndarray
    y_c: np.ndarray
    x_c: np.ndarray
    extra_x: Optional[np.ndarray] = None

    def __post_init__(self):
        y_t = as_vector(self.y_t, "y_t")
        x_t = as_matrix(self.x_t, "x_t")
        y_c = as_vector(self.y_c, "y_c")
        x_c = as_matrix(self.x_c, "x_c")
        p = x_t.shape[1]
        if x_c.shape[1] != p:
            raise DimensionMismatch(
                f"treatment has {p} covariates but control has {x_c.shape[1]}"
            )
        extra = self.extra_x
        if extra is None:
            extra = np.empty((0, p))
        extra = as_matrix(extra, "extra_x")
        if extra.shape[1] != p:
            raise DimensionMismatch(
                f"groups have {p} covariates but extra_x has {extra.shape[1]}"
            )
        if y_t.shape[0] != x_t.shape[0] or y_c.shape[0] != x_c.shape[0]:
            raise DimensionMismatch("response/covariate row counts differ within a group")
        for name, count in (("treatment", y_t.shape[0]), ("control", y_c.shape[0])):
            if count < p + 2:
                raise InsufficientData(f"{name} group needs at least p + 2 = {p + 2} rows")
        for name, arr in (
            ("y_t", y_t), ("x_t", x_t), ("y_c", y_c), ("x_c", x_c), ("extra_x", extra)
        ):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_t(self) -> int:
        return self.y_t.shape[0]

    @property
    def n_c(self) -> int:
        return self.y_c.shape[0]

    @property
    def m(self) -> int:
        return self.extra_x.shape[0]

    @property
    def p(self) -> int:
        return self.x_t.shape[1]


@dataclass(frozen=True)
class AteEstimate:
    """Treatment-effect estimate with its variance and z-interval.

    ``v_hat2`` is the full variance of the estimate (half-width is
    z * sqrt(v_hat2), with no further division by a sample size).
    """

    d_hat: float
    v_hat2: float
    ci_lower: float
    ci_upper: float
    alpha: float
    fit_t: RegressionFit
    fit_c: RegressionFit
    mu_hat: np.ndarray

    @property
    def ci_length(self) -> float:
        return self.ci_upper - self.ci_lower


def _centered_outer_sum(x: np.ndarray, center: np.ndarray) -> np.ndarray:
    d = x - center
    return d.T @ d


def estimate_ate(ds: AteDataset, alpha: float = 0.05) -> AteEstimate:
    """Contrast the two group fits at the pooled covariate mean.

    The variance adds the per-group MSE/n terms and the slope-difference
    quadratic form in the pooled centered second-moment matrix (divisor
    n_t + n_c + m, no degrees-of-freedom correction; intercepts excluded).
    """
    total = ds.n_t + ds.n_c + ds.m
    sums = ds.x_t.sum(axis=0) + ds.x_c.sum(axis=0) + ds.extra_x.sum(axis=0)
    mu_hat = sums / total

    fit_t = fit_regression(Dataset(y=ds.y_t, x=ds.x_t))
    fit_c = fit_regression(Dataset(y=ds.y_c, x=ds.x_c))

    slope_diff = fit_t.beta2 - fit_c.beta2
    d_hat = float((fit_t.beta1 - fit_c.beta1) + mu_hat @ slope_diff)

    outer = (
        _centered_outer_sum(ds.x_t, mu_hat)
        + _centered_outer_sum(ds.x_c, mu_hat)
        + _centered_outer_sum(ds.extra_x, mu_hat)
    )
    sigma_x = (outer + outer.T) / (2.0 * total)
    quad = float(slope_diff @ sigma_x @ slope_diff) / total
    v_hat2 = fit_t.mse / ds.n_t + fit_c.mse / ds.n_c + quad

    half = z_quantile(alpha) * math.sqrt(max(v_hat2, 0.0))
    return AteEstimate(
        d_hat=d_hat,
        v_hat2=v_hat2,
        ci_lower=d_hat - half,
        ci_upper=d_hat + half,
        alpha=alpha,
        fit_t=fit_t,
        fit_c=fit_c,
        mu_hat=mu_hat,
    )
