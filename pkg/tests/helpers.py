"""Shared oracles and property checks used by the unit tests and the
acceptance suite.

The brute-force OLS routes here deliberately avoid the library's QR path:
one solves the normal equations with an LU solve, the other inverts the Gram
matrix by explicit Gauss-Jordan elimination.
"""

from __future__ import annotations

import numpy as np

from ssmean import (
    Dataset,
    build_design,
    estimate_ls,
    estimate_sample_mean,
    estimate_ssls,
    fit_regression,
    ols_solve,
)
from ssmean.estimators import _adjusted_point


def normal_equations_beta(design, y) -> np.ndarray:
    """Independent OLS oracle: LU solve of the normal equations."""
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.linalg.solve(design.T @ design, design.T @ y)


def gauss_jordan_inverse(a) -> np.ndarray:
    """Explicit dense inversion by Gauss-Jordan with partial pivoting."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    aug = np.concatenate([a.copy(), np.eye(n)], axis=1)
    for i in range(n):
        pivot = i + int(np.argmax(np.abs(aug[i:, i])))
        aug[[i, pivot]] = aug[[pivot, i]]
        aug[i] = aug[i] / aug[i, i]
        for k in range(n):
            if k != i:
                aug[k] = aug[k] - aug[k, i] * aug[i]
    return aug[:, n:]


def random_regression(rng, n: int, p: int):
    x = rng.standard_normal((n, p))
    beta = rng.standard_normal(p)
    y = 0.5 + x @ beta + rng.standard_normal(n)
    return x, y


def check_ols_brute_force(rng, instances: int = 200) -> float:
    """QR solve vs normal equations on random small instances; returns the
    worst relative coefficient error (also asserts residual orthogonality)."""
    worst = 0.0
    for _ in range(instances):
        p = int(rng.integers(1, 9))
        n = int(rng.integers(p + 3, 51))
        x, y = random_regression(rng, n, p)
        design = build_design(x)
        sol = ols_solve(design, y)
        brute = normal_equations_beta(design, y)
        rel = np.linalg.norm(sol.beta - brute) / max(1.0, np.linalg.norm(brute))
        worst = max(worst, rel)
        gram_resid = np.abs(design.T @ sol.residuals).max()
        assert gram_resid <= 1e-8 * max(1.0, np.abs(design.T @ y).max())
    return worst


def check_affine_invariance(rng, trials: int = 20) -> float:
    """theta_ls is unchanged by x -> Ux + a, mu -> U mu + a; returns the worst
    relative deviation over random invertible transforms."""
    worst = 0.0
    for _ in range(trials):
        p = int(rng.integers(1, 5))
        n = int(rng.integers(p + 6, 40))
        x, y = random_regression(rng, n, p)
        mu = rng.standard_normal(p)
        base = estimate_ls(Dataset(y=y, x=x, known_mu=mu)).theta_hat
        q, _ = np.linalg.qr(rng.standard_normal((p, p)))
        u = q @ np.diag(rng.uniform(0.5, 2.0, p))
        a = rng.standard_normal(p)
        moved = estimate_ls(Dataset(y=y, x=x @ u.T + a, known_mu=u @ mu + a)).theta_hat
        worst = max(worst, abs(moved - base) / max(1.0, abs(base)))
    return worst


def check_two_formula_agreement(rng, trials: int = 50) -> float:
    """mu_vec' beta_hat against ybar - beta2' (xbar - mu); worst relative gap."""
    worst = 0.0
    for _ in range(trials):
        p = int(rng.integers(1, 6))
        n = int(rng.integers(p + 4, 60))
        x, y = random_regression(rng, n, p)
        mu = rng.standard_normal(p)
        ds = Dataset(y=y, x=x, known_mu=mu)
        fit = fit_regression(ds)
        via_mu_vec = fit.beta1 + mu @ fit.beta2
        via_adjustment = estimate_ls(ds).theta_hat
        worst = max(worst, abs(via_mu_vec - via_adjustment) / max(1.0, abs(via_mu_vec)))
    return worst


def check_convex_combination(rng, trials: int = 50) -> None:
    """nu2 lies between min and max of (MSE, sigma2_y)."""
    for _ in range(trials):
        p = int(rng.integers(1, 5))
        n = int(rng.integers(p + 4, 50))
        m = int(rng.integers(0, 80))
        x, y = random_regression(rng, n, p)
        ds = Dataset(y=y, x=x, x_unlabeled=rng.standard_normal((m, p)))
        est = estimate_ssls(ds)
        mse = est.fit.mse
        sigma2 = float(np.var(y, ddof=1))
        slack = 1e-12 * max(1.0, mse, sigma2)
        assert min(mse, sigma2) - slack <= est.variance_per_n <= max(mse, sigma2) + slack


def check_m0_reduction(rng, trials: int = 30) -> None:
    """With no unlabeled rows the semi-supervised estimator is the sample
    mean and its variance estimate equals sigma2_y exactly."""
    for _ in range(trials):
        p = int(rng.integers(1, 5))
        n = int(rng.integers(p + 4, 50))
        x, y = random_regression(rng, n, p)
        ds = Dataset(y=y, x=x)
        ssls = estimate_ssls(ds)
        mean = estimate_sample_mean(ds)
        assert abs(ssls.theta_hat - mean.theta_hat) <= 1e-12
        assert ssls.variance_per_n == mean.variance_per_n


def check_ci_ordering(rng, trials: int = 50) -> None:
    """The regression interval is shorter than the traditional one exactly
    when MSE < sigma2_y."""
    for _ in range(trials):
        p = int(rng.integers(1, 5))
        n = int(rng.integers(p + 4, 50))
        x, y = random_regression(rng, n, p)
        ds = Dataset(y=y, x=x, known_mu=np.zeros(p))
        ls = estimate_ls(ds)
        mean = estimate_sample_mean(ds)
        assert (ls.fit.mse < mean.variance_per_n) == (ls.ci_length < mean.ci_length)


def check_shared_code_path(rng, trials: int = 20) -> None:
    """Feeding known_mu through the semi-supervised adjustment helper gives
    the ideal estimator's point value bit-for-bit."""
    for _ in range(trials):
        p = int(rng.integers(1, 5))
        n = int(rng.integers(p + 4, 40))
        x, y = random_regression(rng, n, p)
        mu = rng.standard_normal(p)
        ds = Dataset(y=y, x=x, x_unlabeled=rng.standard_normal((7, p)), known_mu=mu)
        fit = fit_regression(ds)
        assert _adjusted_point(ds, fit, ds.known_mu) == estimate_ls(ds).theta_hat
