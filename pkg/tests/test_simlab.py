import json
import math

import numpy as np
import pytest
from scipy import integrate

from ssmean import InvalidSpec
from ssmean.simlab import (
    P3_NORMALIZER,
    DgpSpec,
    draw,
    format_report_text,
    frozen_params,
    make_cell,
    p3_sampler,
    report_rows,
    rng_stream,
    run_table1,
    run_table2,
    write_report_csv,
    write_report_json,
)


class TestRngStreams:
    def test_same_stream_reproduces(self):
        a = rng_stream(123, 7).random(1000)
        b = rng_stream(123, 7).random(1000)
        assert np.array_equal(a, b)

    def test_distinct_streams_uncorrelated(self):
        a = rng_stream(123, 1).standard_normal(100_000)
        b = rng_stream(123, 2).standard_normal(100_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.01

    def test_normal_transform_moments(self):
        z = rng_stream(9, 4).standard_normal(1_000_000)
        n = z.shape[0]
        assert abs(z.mean()) <= 4.0 / math.sqrt(n)
        assert abs(z.var(ddof=1) - 1.0) <= 4.0 * math.sqrt(2.0 / n)


class TestHeavyTailSampler:
    def test_normalizer_matches_quadrature(self):
        val, _ = integrate.quad(lambda x: 1.0 / (1.0 + abs(x) ** 3), -np.inf, np.inf)
        assert val == pytest.approx(P3_NORMALIZER, abs=1e-6)

    def test_closed_form_cdf_matches_quadrature(self):
        sampler = p3_sampler()
        for t in (0.3, 1.0, 4.0, 50.0, 800.0):
            num, _ = integrate.quad(lambda x: 1.0 / (1.0 + x**3), 0.0, t)
            assert sampler.cdf_one_sided(t) == pytest.approx(
                num / (P3_NORMALIZER / 2.0), abs=1e-8
            )

    def test_inverse_cdf_accuracy(self):
        sampler = p3_sampler()
        a = np.concatenate([
            np.linspace(0.0, 0.999, 3001),
            1.0 - np.geomspace(1e-3, 1e-9, 200),
        ])
        x = sampler.ppf_one_sided(a)
        assert np.all(np.diff(sampler.ppf_one_sided(np.linspace(0, 0.9999, 500))) > 0)
        err = np.abs(sampler.cdf_one_sided(x) - a)
        assert err.max() <= 1e-6

    def test_sample_symmetry_and_distribution(self):
        sampler = p3_sampler()
        draws = sampler.sample(rng_stream(5, 1), 200_000)
        n = draws.shape[0]
        assert np.all(np.isfinite(draws))
        # sign symmetry
        assert abs(np.mean(draws > 0) - 0.5) <= 4.0 * math.sqrt(0.25 / n)
        # P(X <= 1) against the closed-form CDF
        target = 0.5 + float(sampler.cdf_one_sided(1.0)) / 2.0
        hit = np.mean(draws <= 1.0)
        assert abs(hit - target) <= 4.0 * math.sqrt(target * (1 - target) / n)


class TestDgps:
    def test_draw_deterministic(self):
        spec = DgpSpec("heavy-tail", n=40, p=2, m=15, seed=21)
        a = draw(spec, 3)
        b = draw(spec, 3)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.x_unlabeled, b.x_unlabeled)
        c = draw(spec, 4)
        assert not np.array_equal(a.y, c.y)

    def test_invalid_specs(self):
        with pytest.raises(InvalidSpec):
            DgpSpec("weibull", n=10, p=1)
        with pytest.raises(InvalidSpec):
            DgpSpec("poisson", n=0, p=1)
        with pytest.raises(InvalidSpec):
            draw(DgpSpec("poisson", n=5, p=1), -1)

    def test_theta_by_setting(self):
        assert DgpSpec("heavy-tail", n=10, p=3, seed=1).theta_true == 0.0
        assert DgpSpec("poisson", n=10, p=3, seed=1).theta_true == 100.0
        quad = DgpSpec("gauss-quad", n=10, p=3, seed=1)
        params = frozen_params(quad)
        expected = params.beta[0] + params.mu @ params.mu + params.mu @ params.beta[1:]
        assert quad.theta_true == float(expected)
        lin = DgpSpec("gauss-linear", n=10, p=3, seed=1)
        assert lin.theta_true == frozen_params(lin).beta[0]

    def test_known_mu_per_setting(self):
        np.testing.assert_array_equal(
            draw(DgpSpec("poisson", n=5, p=2, seed=0), 0).known_mu, [10.0, 10.0]
        )
        np.testing.assert_array_equal(
            draw(DgpSpec("heavy-tail", n=5, p=2, seed=0), 0).known_mu, [0.0, 0.0]
        )
        quad = DgpSpec("gauss-quad", n=5, p=2, seed=0)
        np.testing.assert_array_equal(draw(quad, 0).known_mu, frozen_params(quad).mu)

    def test_poisson_mean_matches_tower_property(self):
        ds = draw(DgpSpec("poisson", n=1_000_000, p=1, seed=77), 0)
        # Var(Y) = E Var(Y|X) + Var E(Y|X) = 100 + 100 Var(X_1) = 1100
        assert abs(ds.y.mean() - 100.0) <= 3.0 * math.sqrt(1100.0 / ds.n)

    def test_gauss_quad_estimand_is_intercept_coefficient(self):
        spec = DgpSpec("gauss-quad", n=400_000, p=2, m=0, seed=13)
        ds = draw(spec, 0)
        se = ds.y.std(ddof=1) / math.sqrt(ds.n)
        assert abs(ds.y.mean() - spec.theta_true) <= 4.0 * se

    def test_population_residual_moments(self):
        # The total deviation against the population slope has mean zero and
        # is uncorrelated with the covariates. For the quadratic setting the
        # population slope is beta2 + 2 mu and the intercept beta1 - ||mu||^2
        # (the quadratic surface contributes Cov(X, ||X||^2) = 2 Sigma mu).
        spec = DgpSpec("gauss-quad", n=100_000, p=2, m=0, seed=29)
        params = frozen_params(spec)
        ds = draw(spec, 0)
        pop_slope = params.beta[1:] + 2.0 * params.mu
        pop_intercept = params.beta[0] - params.mu @ params.mu
        delta = ds.y - pop_intercept - ds.x @ pop_slope
        n = ds.n
        assert abs(delta.mean()) <= 3.0 * delta.std(ddof=1) / math.sqrt(n)
        for j in range(spec.p):
            w = ds.x[:, j] * delta
            assert abs(w.mean()) <= 4.0 * w.std(ddof=1) / math.sqrt(n)

    def test_gauss_linear_noise_scale(self):
        spec = DgpSpec("gauss-linear", n=200_000, p=1, m=0, seed=3, tau2=4.0)
        params = frozen_params(spec)
        ds = draw(spec, 0)
        resid = ds.y - params.beta[0] - ds.x @ params.beta[1:]
        assert resid.var(ddof=1) == pytest.approx(4.0, rel=0.05)


class TestRunner:
    def test_single_rep_equals_single_loss(self):
        cell = make_cell("gauss-linear", n=30, p=1, m_values=(0,), seed=11)
        report = run_table1([cell], reps=1)[0]
        from ssmean import estimate_sample_mean, truncate_to_band

        ds = draw(cell.spec, 0)
        est = estimate_sample_mean(ds, 0.05)
        clamped, _ = truncate_to_band(est.theta_hat, ds.y)
        expected = (clamped - cell.spec.theta_true) ** 2
        mean_col = next(c for c in report.columns if c.estimator == "mean")
        assert mean_col.avg_sq_loss == expected
        assert math.isnan(mean_col.loss_se)

    def test_ssls_inf_column_equals_ls(self):
        cell = make_cell("gauss-linear", n=40, p=2, m_values=(float("inf"),), seed=2)
        report = run_table1([cell], reps=25)[0]
        by_label = {c.label: c for c in report.columns}
        assert by_label["ssls(m=inf)"].avg_sq_loss == by_label["ls"].avg_sq_loss

    def test_degenerate_alpha_limit(self):
        cell = make_cell("gauss-linear", n=40, p=1, m_values=(0,), seed=4)
        report = run_table2([cell], alpha=1.0 - 1e-9, reps=30)[0]
        for col in report.columns:
            assert col.avg_ci_length <= 1e-6
            assert col.miscoverage == 1.0

    def test_miscoverage_times_reps_is_integer(self):
        cell = make_cell("gauss-quad", n=25, p=1, m_values=(0, 10), seed=5)
        report = run_table2([cell], reps=40)[0]
        for col in report.columns:
            assert col.misses == round(col.miscoverage * col.reps)
            assert 0.0 <= col.miscoverage <= 1.0
            assert col.avg_sq_loss >= 0.0

    def test_cell_validates_m_values(self):
        with pytest.raises(InvalidSpec):
            make_cell("poisson", n=20, p=1, m_values=(-1,))
        spec_cell = make_cell("poisson", n=20, p=1, m_values=(10,))
        from ssmean.simlab import SimulationCell

        with pytest.raises(InvalidSpec):
            SimulationCell(spec=spec_cell.spec, m_values=(20,))

    def test_thread_count_does_not_change_results(self):
        cell = make_cell("gauss-quad", n=30, p=2, m_values=(0, 8), seed=6)
        serial = run_table1([cell], reps=16, threads=1)
        threaded = run_table1([cell], reps=16, threads=4)
        assert serial == threaded

    def test_poisson_sample_mean_risk_matches_total_variance(self):
        # Law of total variance: Var(Y) = 100 + 100 Var(X_1) = 1100, so the
        # sample-mean loss at n=100 averages 11 (the analytic target, not the
        # printed table constant).
        cell = make_cell("poisson", n=100, p=1, m_values=(), seed=14)
        report = run_table1([cell], estimators=("mean",), reps=3000)[0]
        col = report.columns[0]
        assert abs(col.avg_sq_loss - 11.0) <= 3.0 * col.loss_se

    def test_weighted_risk_identity_and_monotonicity(self):
        # Semi-supervised risk is the m-weighted mix of the mean and the
        # ideal-estimator risks on the exactly linear Gaussian setting.
        cell = make_cell("gauss-linear", n=50, p=2,
                         m_values=(0, 50, 200, float("inf")), seed=8)
        report = run_table1([cell], reps=4000)[0]
        cols = {c.label: c for c in report.columns}
        n, m = 50, 50
        mixed = (n / (n + m)) * cols["mean"].avg_sq_loss + (m / (n + m)) * cols["ls"].avg_sq_loss
        se = (
            cols["ssls(m=50)"].loss_se
            + (n / (n + m)) * cols["mean"].loss_se
            + (m / (n + m)) * cols["ls"].loss_se
        )
        assert abs(cols["ssls(m=50)"].avg_sq_loss - mixed) <= 3.0 * se
        ordered = ["mean", "ssls(m=50)", "ssls(m=200)", "ssls(m=inf)"]
        for hi, lo in zip(ordered, ordered[1:]):
            slack = 3.0 * (cols[hi].loss_se + cols[lo].loss_se)
            assert cols[lo].avg_sq_loss <= cols[hi].avg_sq_loss + slack


class TestReports:
    def _reports(self):
        cell = make_cell("gauss-linear", n=30, p=1, m_values=(0, 10, float("inf")), seed=9)
        return run_table1([cell], reps=12)

    def test_rows_structure(self):
        rows = report_rows(self._reports())
        assert [r["estimator"] for r in rows] == ["mean", "ssls", "ssls", "ssls", "ls"]
        assert [r["m"] for r in rows] == [None, 0, 10, "inf", None]
        assert all(r["setting"] == "gauss-linear" for r in rows)

    def test_csv_and_json_deterministic(self, tmp_path):
        reports = self._reports()
        for writer, name in ((write_report_csv, "r.csv"), (write_report_json, "r.json")):
            a, b = tmp_path / f"a_{name}", tmp_path / f"b_{name}"
            writer(reports, a)
            writer(self._reports(), b)
            assert a.read_bytes() == b.read_bytes()

    def test_json_loads_back(self, tmp_path):
        path = tmp_path / "rep.json"
        write_report_json(self._reports(), path)
        rows = json.loads(path.read_text())
        assert len(rows) == 5
        assert {"setting", "p", "n", "m", "estimator", "loss", "ci_length",
                "miscoverage", "mc_se"} <= set(rows[0])

    def test_text_prints_both_coverage_labels(self):
        text = format_report_text(self._reports())
        assert "coverage" in text and "miscoverage" in text
        assert "ssls(m=inf)" in text
