import numpy as np
import pytest

from roughfut import InvalidParamError, TimeGrid
from roughfut.sim.volterra import (
    draw_noise,
    kernel_interval_means,
    scheme_node_variance,
    volterra_paths,
    _uniform_history_kernel,
)

from oracles import volterra_cross_cov


def test_h_half_reduces_to_brownian_cumsum():
    grid = TimeGrid.regular(1.0, 128)
    w, dw2 = volterra_paths(0.5, grid, n_paths=64, seed=11)
    expected = np.concatenate(
        [np.zeros((64, 1)), np.cumsum(dw2, axis=1)], axis=1)
    np.testing.assert_allclose(w, expected, atol=1e-10)


def test_deterministic_given_seed():
    grid = TimeGrid.regular(0.5, 100)
    a = volterra_paths(0.1, grid, 32, seed=5)
    b = volterra_paths(0.1, grid, 32, seed=5)
    c = volterra_paths(0.1, grid, 32, seed=6)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert not np.array_equal(a[0], c[0])


def test_invalid_inputs_rejected():
    grid = TimeGrid.regular(1.0, 10)
    for h in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(InvalidParamError):
            volterra_paths(h, grid, 8, seed=0)
    with pytest.raises(InvalidParamError):
        volterra_paths(0.3, grid, 0, seed=0)


def test_draw_noise_layout_and_determinism():
    z1, z2 = draw_noise(43, 16, 20)
    z1b, z2b = draw_noise(43, 16, 20)
    assert z1.shape == z2.shape == (16, 20)
    assert np.array_equal(z1, z1b) and np.array_equal(z2, z2b)
    assert not np.array_equal(z1, z2)


@pytest.mark.parametrize("h", [0.1, 0.3, 0.5])
def test_discretization_variance_close_to_fbm_law(h):
    """Deterministic bias check: scheme variance vs t^(2H) within 1%."""
    grid = TimeGrid.regular(1.0, 300)
    var = scheme_node_variance(h, grid)
    for t in (0.25, 1.0):
        k = grid.index_of(t)
        assert abs(var[k] / t ** (2 * h) - 1.0) < 0.01


@pytest.mark.parametrize("h", [0.1, 0.3])
def test_sample_variance_matches_scheme_variance(h):
    grid = TimeGrid.regular(1.0, 100)
    n = 40_000
    w, _ = volterra_paths(h, grid, n, seed=101)
    var_exact = scheme_node_variance(h, grid)
    for t in (0.25, 1.0):
        k = grid.index_of(t)
        sample = np.var(w[:, k], ddof=1)
        se = var_exact[k] * np.sqrt(2.0 / (n - 1))
        assert abs(sample - var_exact[k]) < 4.0 * se


def test_sample_mean_is_zero():
    grid = TimeGrid.regular(1.0, 50)
    n = 40_000
    w, _ = volterra_paths(0.3, grid, n, seed=7)
    k = grid.index_of(1.0)
    se = np.std(w[:, k], ddof=1) / np.sqrt(n)
    assert abs(np.mean(w[:, k])) < 4.0 * se


def test_cross_covariance_matches_quadrature_oracle():
    h = 0.3
    grid = TimeGrid.regular(1.0, 100)
    n = 50_000
    w, _ = volterra_paths(h, grid, n, seed=23)
    i = grid.index_of(0.5)
    j = grid.index_of(1.0)
    sample = float(np.cov(w[:, i], w[:, j])[0, 1])
    oracle = volterra_cross_cov(h, 0.5, 1.0)
    assert abs(sample / oracle - 1.0) < 0.04


def test_uniform_kernel_equals_interval_means_on_uniform_grid():
    grid = TimeGrid.regular(1.0, 40)
    alpha = 0.1 - 0.5
    w = kernel_interval_means(grid, alpha)
    ker = _uniform_history_kernel(grid.uniform_dt, alpha, grid.n_steps + 1)
    for k in range(2, grid.n_steps + 1):
        for j in range(k - 1):
            assert w[k, j] == pytest.approx(ker[k - j], rel=1e-12)


def test_nonuniform_grid_path_consistent_with_fft_path():
    """A one-ulp-ish perturbation of the last node flips the code path
    from FFT convolution to the generic weights; results must agree."""
    times = np.linspace(0.0, 1.0, 81)
    uniform = TimeGrid(times=times, steps_per_year=80)
    bumped = times.copy()
    bumped[-1] += 1e-9
    nonuniform = TimeGrid(times=bumped, steps_per_year=80)
    assert uniform.uniform_dt is not None
    assert nonuniform.uniform_dt is None
    wa, _ = volterra_paths(0.2, uniform, 16, seed=3)
    wb, _ = volterra_paths(0.2, nonuniform, 16, seed=3)
    np.testing.assert_allclose(wa, wb, rtol=1e-5, atol=1e-7)


def test_quadrature_oracle_self_check():
    # At s = t the closed form is t^(2H), and at H = 1/2 the kernel is
    # constant so Cov(W~_s, W~_t) = min(s, t) exactly.
    for h in (0.1, 0.3, 0.45):
        assert volterra_cross_cov(h, 1.0, 1.0) == pytest.approx(1.0, rel=1e-9)
    for s in (0.2, 0.5, 0.9):
        assert volterra_cross_cov(0.5, s, 1.0) == pytest.approx(s, rel=1e-9)
