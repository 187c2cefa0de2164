import math

import numpy as np
import pytest

from gamlss_boost.base_learners import select_best
from gamlss_boost.errors import DegenerateBaseLearnerError, SchemeError
from gamlss_boost.families import get_family
from gamlss_boost.simulation import simulate_negbin
from gamlss_boost.steps import (
    Analytic,
    BLRatio,
    Fixed,
    LineSearch,
    SchemeSpec,
    StepLengthCache,
    analytic_gaussian_mu,
    analytic_nb_mu,
    approx_nb_mu_step,
    approx_weibull_lambda_step,
    bl_ratio,
    compute_iteration_steps,
    golden_section,
    line_search,
    preset,
    valid_presets,
)

from conftest import random_state


def test_golden_section_quadratic():
    x = golden_section(lambda v: (v - 1.2345) ** 2, 0.0, 10.0, 1e-8)
    assert x == pytest.approx(1.2345, abs=1e-8)


def test_gaussian_unit_step(rng):
    y = rng.normal(size=30)
    etas = np.vstack([rng.normal(size=30), np.zeros(30)])
    h = y - etas[0]
    res = line_search("gaussian", etas, 0, h, y)
    assert res.nu == pytest.approx(1.0, abs=1e-4) and not res.at_boundary
    assert analytic_gaussian_mu(etas, h, y) == pytest.approx(1.0, abs=1e-14)
    assert line_search("gaussian", etas, 0, 4 * h, y).nu == pytest.approx(0.25, abs=1e-4)
    assert analytic_gaussian_mu(etas, 4 * h, y) == pytest.approx(0.25, abs=1e-14)


def test_gaussian_analytic_orthogonal(rng):
    y = rng.normal(size=20)
    etas = np.vstack([np.zeros(20), rng.normal(size=20)])
    w = np.exp(-2 * etas[1])
    r = (y - etas[0]) * w
    h = rng.normal(size=20)
    h -= (h @ r) / (r @ r) * r
    assert analytic_gaussian_mu(etas, h, y) == pytest.approx(0.0, abs=1e-12)


def test_gaussian_analytic_vs_line_search(rng):
    for _ in range(20):
        etas, y = random_state("gaussian", 80, rng)
        h = 0.2 * (y - etas[0]) * np.exp(-2 * etas[1]) + 0.05 * rng.normal(size=80)
        nu_ls = line_search("gaussian", etas, 0, h, y, 0, 10, 1e-4).nu
        assert abs(analytic_gaussian_mu(etas, h, y) - nu_ls) < 1e-3


def test_boundary_flag():
    y = np.array([10.0, 12.0, 8.0])
    etas = np.zeros((2, 3))
    res = line_search("gaussian", etas, 0, np.full(3, 0.1), y, 0.0, 1.0)
    assert res.at_boundary and res.nu == 1.0


def test_zero_direction_errors():
    with pytest.raises(DegenerateBaseLearnerError):
        line_search("gaussian", np.zeros((2, 3)), 0, np.zeros(3), np.ones(3))
    with pytest.raises(DegenerateBaseLearnerError):
        approx_weibull_lambda_step(np.zeros((2, 3)), np.zeros(3), np.ones(3), 0.5)
    with pytest.raises(DegenerateBaseLearnerError):
        bl_ratio(0.1, 1.0, 0.0)


def test_nb_line_search_matches_grid():
    d, _ = simulate_negbin(500, 0, 11)
    fam = get_family("negbin")
    etas = np.repeat(fam.init_offsets(d.y)[:, None], d.n, axis=1)
    h = select_best(fam.negative_gradient(0, etas, d.y), d.X)[1].h
    nu = line_search(fam, etas, 0, h, d.y, 0.0, 20.0, 1e-4).nu
    # along eta_mu only y*eta_mu - (y + 1/alpha)*ln(1 + alpha*mu) varies
    grid = np.arange(0.0, 20.0 + 5e-5, 1e-4)
    r = np.exp(-etas[1])
    losses = np.empty(grid.size)
    for start in range(0, grid.size, 5000):
        em = etas[0] + grid[start:start + 5000, None] * h
        ll = d.y * em - (d.y + r) * np.logaddexp(0.0, em + etas[1])
        losses[start:start + 5000] = -ll.sum(axis=1)
    assert abs(nu - grid[np.argmin(losses)]) <= 1e-4


def test_nb_fixed_point():
    d, _ = simulate_negbin(500, 0, 3)
    fam = get_family("negbin")
    etas = np.repeat(fam.init_offsets(d.y)[:, None], d.n, axis=1)
    h = select_best(fam.negative_gradient(0, etas, d.y), d.X)[1].h
    nu_opt = line_search(fam, etas, 0, h, d.y, 0.0, 20.0, 1e-12).nu
    assert approx_nb_mu_step(etas, h, d.y, nu_opt) == pytest.approx(nu_opt, rel=1e-6)


def test_nb_tiny_alpha_matches_poisson(rng):
    n = 300
    x = rng.uniform(-1, 1, n)
    y = rng.poisson(np.exp(0.3 + 0.5 * x)).astype(float)
    etas = np.vstack([np.full(n, math.log(y.mean())), np.full(n, math.log(1e-6))])
    h = 0.5 * (x - x.mean())
    nu_ls = line_search("negbin", etas, 0, h, y, 0, 20, 1e-8).nu
    # one first-order step from zero, then one more from that estimate
    nu = approx_nb_mu_step(etas, h, y, 0.0)
    nu = approx_nb_mu_step(etas, h, y, nu)
    assert abs(nu - nu_ls) / nu_ls < 1e-2


def test_weibull_zero_numerator(rng):
    lam = np.exp(rng.normal(size=25))
    etas = np.vstack([np.log(lam), np.zeros(25)])
    h = rng.normal(size=25)
    assert approx_weibull_lambda_step(etas, h, lam, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_cached_analytic_fallback_chain():
    d, _ = simulate_negbin(300, 0, 5)
    fam = get_family("negbin")
    etas = np.repeat(fam.init_offsets(d.y)[:, None], d.n, axis=1)
    j, bl = select_best(fam.negative_gradient(0, etas, d.y), d.X)
    cache = StepLengthCache()
    first = analytic_nb_mu(etas, bl.h, d.y, cache, j)
    assert cache.lookup(0, j) == first.nu and not first.fallback
    # another covariate falls back to the parameter-level entry
    assert cache.lookup(0, j + 1) == first.nu
    second = analytic_nb_mu(etas, bl.h, d.y, cache, j)
    assert second.nu == pytest.approx(first.nu, rel=1e-3)


def test_bl_ratio_examples():
    assert bl_ratio(0.1, 2.0, 4.0) == pytest.approx(0.05)
    assert bl_ratio(0.37, 3.0, 3.0) == 0.37
    rng = np.random.default_rng(0)
    for _ in range(200):
        nu, a, b = rng.uniform(1e-4, 10, 3)
        assert bl_ratio(nu, a, b) * b == pytest.approx(nu * a, rel=1e-15)


def test_presets():
    assert preset("F-F", "gaussian").rules == (Fixed(0.1), Fixed(0.1))
    nb = preset("LS-LS", "negbin").rules
    assert (nb[0].lo, nb[0].hi, nb[1].lo, nb[1].hi) == (0, 20, 0, 200)
    assert preset("A-BL", "gaussian").rules == (Analytic(10.0), BLRatio(0))
    assert preset("BL-F", "gaussian").rules[0] == BLRatio(1)
    assert "BL-F" not in valid_presets("weibull") and "F-BL" in valid_presets("negbin")
    with pytest.raises(SchemeError, match="valid presets"):
        preset("BL-F", "negbin")
    with pytest.raises(SchemeError):
        SchemeSpec((Fixed(), Analytic()), "bad").validate("gaussian")
    with pytest.raises(SchemeError):
        SchemeSpec((BLRatio(1), BLRatio(0))).validate("gaussian")


def test_iteration_steps_composition(rng):
    etas, y = random_state("gaussian", 100, rng)
    X = rng.normal(size=(100, 3))
    fam = get_family("gaussian")
    learners = [select_best(fam.negative_gradient(k, etas, y), X)[1] for k in (0, 1)]
    st = compute_iteration_steps(fam, preset("A-BL", fam), learners, etas, y, StepLengthCache(), 0.1)
    assert st.nu[0] == pytest.approx(0.1 * analytic_gaussian_mu(etas, learners[0].h, y))
    assert st.nu[1] == pytest.approx(st.nu[0] * learners[0].sqnorm / learners[1].sqnorm)
    ff = compute_iteration_steps(fam, preset("F-F", fam), learners, etas, y, StepLengthCache(), 0.1)
    np.testing.assert_array_equal(ff.nu, [0.1, 0.1])
    ls = compute_iteration_steps(
        fam, SchemeSpec((LineSearch(0, 10), LineSearch(0, 10))), learners, etas, y,
        StepLengthCache(), 0.5,
    )
    np.testing.assert_allclose(ls.nu, 0.5 * ls.nu_star)
