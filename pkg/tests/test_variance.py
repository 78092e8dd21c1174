import numpy as np
import pytest

from roughfut import (
    BergomiParams,
    ForwardVarianceCurve,
    HestonParams,
    InvalidParamError,
    RBergomiParams,
    TimeGrid,
)
from roughfut.sim.variance import classical_variance, rbergomi_paths, rbergomi_variance
from roughfut.sim.volterra import scheme_node_variance, volterra_paths

FLAT04 = ForwardVarianceCurve.flat(0.04)


def test_rbergomi_eta_zero_is_the_curve():
    grid = TimeGrid.regular(1.0, 50)
    curve = ForwardVarianceCurve(knots=(0.5, 1.0), levels=(0.04, 0.09))
    params = RBergomiParams(h=0.1, eta=0.0, xi0=curve)
    v, _, diag = rbergomi_paths(params, grid, 16, seed=1)
    np.testing.assert_allclose(v, np.tile(curve(grid.times), (16, 1)))
    assert diag["truncated_fraction"] == 0.0


def test_rbergomi_mean_matches_curve():
    grid = TimeGrid.regular(0.5, 300)
    params = RBergomiParams(h=0.1, eta=1.5, xi0=FLAT04)
    n = 40_000
    v, _, _ = rbergomi_paths(params, grid, n, seed=77)
    k = grid.index_of(0.5)
    se = np.std(v[:, k], ddof=1) / np.sqrt(n)
    assert abs(np.mean(v[:, k]) - 0.04) < 4.0 * se


def test_rbergomi_discrete_lognormal_mean_identity():
    """E[v] under the scheme is xi0 * exp(eta^2 (var_scheme - t^(2H))/2);
    check the scheme against its own exact discrete mean, tightly."""
    grid = TimeGrid.regular(0.5, 100)
    h, eta = 0.15, 1.8
    params = RBergomiParams(h=h, eta=eta, xi0=FLAT04)
    n = 60_000
    v, _, _ = rbergomi_paths(params, grid, n, seed=9)
    var_s = scheme_node_variance(h, grid)
    k = grid.index_of(0.5)
    exact = 0.04 * np.exp(0.5 * eta ** 2 * (var_s[k] - grid.times[k] ** (2 * h)))
    se = np.std(v[:, k], ddof=1) / np.sqrt(n)
    assert abs(np.mean(v[:, k]) - exact) < 3.5 * se


def test_rbergomi_variance_reuses_driver():
    grid = TimeGrid.regular(1.0, 20)
    w, _ = volterra_paths(0.25, grid, 8, seed=2)
    params = RBergomiParams(h=0.25, eta=1.0, xi0=FLAT04)
    v = rbergomi_variance(params, w, grid)
    t = grid.times
    expected = 0.04 * np.exp(1.0 * w - 0.5 * t ** 0.5)
    np.testing.assert_allclose(v, expected)


def test_bergomi_eta_zero_is_the_curve():
    grid = TimeGrid.regular(1.0, 40)
    curve = ForwardVarianceCurve(knots=(1.0,), levels=(0.09,), left_value=0.04)
    params = BergomiParams(eta=0.0, kappa=2.0, xi0=curve)
    v, _, _ = classical_variance(params, grid, 8, seed=3)
    np.testing.assert_allclose(v, np.tile(curve(grid.times), (8, 1)))


def test_bergomi_small_kappa_limit_equals_rbergomi_h_half():
    """kappa -> 0 turns the OU factor into the Brownian motion itself,
    which is the H = 1/2 Volterra driver; paths must coincide."""
    grid = TimeGrid.regular(1.0, 64)
    seed = 1234
    bparams = BergomiParams(eta=1.1, kappa=1e-12, xi0=FLAT04)
    rparams = RBergomiParams(h=0.5, eta=1.1, xi0=FLAT04)
    vb, dwb, _ = classical_variance(bparams, grid, 32, seed=seed)
    vr, dwr, _ = rbergomi_paths(rparams, grid, 32, seed=seed)
    np.testing.assert_allclose(dwb, dwr, atol=1e-12)
    np.testing.assert_allclose(vb, vr, rtol=1e-6)


def test_bergomi_ou_mean_and_variance():
    grid = TimeGrid.regular(1.0, 100)
    kappa, eta = 2.0, 1.0
    params = BergomiParams(eta=eta, kappa=kappa, xi0=FLAT04)
    n = 40_000
    v, _, _ = classical_variance(params, grid, n, seed=21)
    k = grid.index_of(1.0)
    se = np.std(v[:, k], ddof=1) / np.sqrt(n)
    assert abs(np.mean(v[:, k]) - 0.04) < 4.0 * se
    # variance of log v equals eta^2 Var(X_t) with the stationary OU law
    var_x = (1.0 - np.exp(-2.0 * kappa)) / (2.0 * kappa)
    lv = np.log(v[:, k])
    assert np.var(lv, ddof=1) == pytest.approx(eta ** 2 * var_x, rel=0.05)


def test_heston_euler_recursion_exact_at_eta_zero():
    grid = TimeGrid.regular(1.0, 300)
    kappa, v0, vbar = 3.0, 0.09, 0.04
    params = HestonParams(eta=0.0, kappa=kappa, v0=v0,
                          vbar=ForwardVarianceCurve.flat(vbar))
    v, _, diag = classical_variance(params, grid, 4, seed=5)
    dt = 1.0 / 300
    ks = np.arange(grid.n_steps + 1)
    discrete = vbar + (v0 - vbar) * (1.0 - kappa * dt) ** ks
    np.testing.assert_allclose(v[0], discrete, rtol=1e-12)
    # and the Euler solution tracks the ODE within O(1/n)
    ode = vbar + (v0 - vbar) * np.exp(-kappa * grid.times)
    assert np.max(np.abs(v[0] - ode)) < 1.5 * kappa ** 2 * (v0 - vbar) * dt
    assert diag["truncated_fraction"] == 0.0


def test_heston_mean_reversion_statistics():
    grid = TimeGrid.regular(1.0, 200)
    params = HestonParams(eta=0.5, kappa=3.0, v0=0.04,
                          vbar=ForwardVarianceCurve.flat(0.04))
    n = 20_000
    v, _, diag = classical_variance(params, grid, n, seed=6)
    k = grid.index_of(1.0)
    se = np.std(v[:, k], ddof=1) / np.sqrt(n)
    assert abs(np.mean(v[:, k]) - 0.04) < 4.0 * se
    assert 0.0 <= diag["truncated_fraction"] <= 1.0
    assert np.all(v >= 0.0)


def test_classical_variance_rejects_unknown_params():
    grid = TimeGrid.regular(1.0, 10)
    with pytest.raises(InvalidParamError):
        classical_variance(object(), grid, 4, seed=0)


def test_param_validation():
    with pytest.raises(InvalidParamError):
        RBergomiParams(h=0.0, eta=1.0, xi0=FLAT04)
    with pytest.raises(InvalidParamError):
        RBergomiParams(h=0.1, eta=-1.0, xi0=FLAT04)
    with pytest.raises(InvalidParamError):
        BergomiParams(eta=1.0, kappa=0.0, xi0=FLAT04)
    with pytest.raises(InvalidParamError):
        HestonParams(eta=1.0, kappa=0.0, v0=0.04, vbar=FLAT04)
    with pytest.raises(InvalidParamError):
        HestonParams(eta=1.0, kappa=1.0, v0=-0.04, vbar=FLAT04)
