import math

import numpy as np
import pytest

from gamlss_boost.simulation import (
    GAUSSIAN_TRUTH,
    NEGBIN_TRUTH,
    WEIBULL_TRUTH,
    run_study,
    sample_negbin,
    sample_weibull,
    simulate_gaussian,
    simulate_negbin,
    simulate_weibull,
)

N = 100_000


def test_truth_constants():
    assert GAUSSIAN_TRUTH[1][0] == (1.0, 2.0, 0.5, -1.0, 0.0, 0.0)
    assert GAUSSIAN_TRUTH[0][1] == 2.0
    assert NEGBIN_TRUTH[0] == (-0.5, 0.0)
    assert WEIBULL_TRUTH[0] == (0.6, 0.0)


def test_shapes_and_informative():
    d, truth = simulate_gaussian(50, 150, 1)
    assert (d.n, d.p) == (50, 156)
    assert truth.informative == [{0, 1, 2, 3}, {2, 3, 4, 5}]
    d, _ = simulate_negbin(40, 0, 1)
    assert set(np.unique(d.X[:, 3:6])) <= {0.0, 1.0}


def test_reproducible():
    a, _ = simulate_weibull(30, 2, 5)
    b, _ = simulate_weibull(30, 2, 5)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)


def test_gaussian_sd_at_zero(rng):
    sd = math.exp(2.0)
    y = rng.normal(0.0, sd, N)
    assert np.std(y) == pytest.approx(sd, rel=0.05)
    d, _ = simulate_gaussian(N, 0, 2)
    # at x = 0 both predictors reduce to their intercepts
    near = np.all(np.abs(d.X) < 0.25, axis=1)
    assert near.sum() > 10


def test_nb_variance_identity(rng):
    for mu, alpha in ((math.exp(-0.5), 1.0), (3.0, 0.4)):
        y = sample_negbin(np.full(N, mu), np.full(N, alpha), rng)
        assert np.var(y) / (mu + alpha * mu**2) == pytest.approx(1.0, rel=0.05)
        assert y.mean() == pytest.approx(mu, rel=0.02)


def test_nb_alpha_override_is_poisson():
    d, _ = simulate_negbin(N, 0, 3, alpha_override=1e-8)
    X = d.X
    eta = -0.5 - 0.5 * X[:, 0] + 0.3 * X[:, 1] + 0.5 * X[:, 3] - 0.3 * X[:, 4]
    pearson = np.mean((d.y - np.exp(eta)) ** 2 / np.exp(eta))
    assert pearson == pytest.approx(1.0, rel=0.05)


def test_weibull_exponential_case(rng):
    y = sample_weibull(np.ones(N), np.ones(N), rng)
    assert y.mean() == pytest.approx(1.0, rel=0.02)


def test_weibull_median(rng):
    lam, k = math.exp(0.6), 1.0
    y = sample_weibull(np.full(N, lam), np.full(N, k), rng)
    assert np.median(y) == pytest.approx(lam * math.log(2) ** (1 / k), rel=0.02)
    y = sample_weibull(np.full(N, 2.0), np.full(N, 3.0), rng)
    assert np.median(y) == pytest.approx(2.0 * math.log(2) ** (1 / 3), rel=0.02)


def test_small_study(tmp_path):
    res = run_study("weibull", ["A-BL"], B=1, n=80, noise_levels=(0, 3), folds=3, max_m=40)
    assert [(r["scheme"], r["noise"]) for r in res.metrics] == [("A-BL", 0), ("A-BL", 3)]
    paths = res.write_csv(tmp_path, timing=False)
    assert [p.split("/")[-1] for p in paths] == [
        "study_coefficients.csv", "study_metrics.csv", "study_summary.csv",
    ]
    summary = (tmp_path / "study_summary.csv").read_text().splitlines()
    assert summary[0].startswith("scheme,noise,statistic,m_stop,seconds,SCR")
    assert {line.split(",")[2] for line in summary[1:]} == {"1st Qu.", "Median", "3rd Qu."}
    rows = (tmp_path / "study_metrics.csv").read_text().splitlines()
    assert all(line.endswith(",NA") for line in rows[1:])


def test_study_rejects_unknown_scheme():
    with pytest.raises(ValueError):
        run_study("negbin", ["BL-F"], B=1)
