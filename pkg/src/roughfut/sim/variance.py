"""Variance path construction for the exponential and Heston-type models."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParamError
from .grids import TimeGrid
from .params import BergomiParams, HestonParams, RBergomiParams
from .volterra import draw_noise, volterra_paths


def rbergomi_variance(params: RBergomiParams, w_tilde: np.ndarray,
                      grid: TimeGrid) -> np.ndarray:
    """Rough Bergomi variance v_t = xi0(t) exp(eta W~_t - eta^2 t^(2H)/2).

    ``w_tilde`` is the Volterra driver from :func:`volterra_paths` for the
    same Hurst parameter and grid.
    """
    t = grid.times
    xi = params.xi0(t)
    drift = 0.5 * params.eta ** 2 * t ** (2.0 * params.h)
    return xi * np.exp(params.eta * w_tilde - drift)


def _bergomi_ou(kappa: float, grid: TimeGrid, z1: np.ndarray, z2: np.ndarray):
    """Exact OU recursion driven by dW2, returned with the dW2 increments.

    The per-step innovation is drawn jointly with dW2 so that the kappa -> 0
    limit reproduces the Brownian path itself.
    """
    dt = grid.dt
    sqdt = np.sqrt(dt)
    dw2 = z1 * sqdt
    if kappa > 0.0:
        cov = -np.expm1(-kappa * dt) / kappa          # Cov(dW2, innovation)
        var = -np.expm1(-2.0 * kappa * dt) / (2.0 * kappa)
        decay = np.exp(-kappa * dt)
    else:
        cov = dt
        var = dt
        decay = np.ones_like(dt)
    c1 = cov / sqdt
    c2 = np.sqrt(np.maximum(var - c1 ** 2, 0.0))
    innov = z1 * c1 + z2 * c2

    n_paths, n_steps = z1.shape
    x = np.zeros((n_paths, n_steps + 1))
    for k in range(n_steps):
        x[:, k + 1] = x[:, k] * decay[k] + innov[:, k]
    return x, dw2


def classical_variance(params, grid: TimeGrid, n_paths: int, seed):
    """Variance paths for the classical Bergomi or Heston model.

    Returns
    -------
    (v, dw2, diagnostics) : tuple
        v has shape (n_paths, n_nodes). For Heston, v is the
        full-truncation state clipped at zero; the fraction of negative
        pre-clip nodes is reported in diagnostics.
    """
    n_steps = grid.n_steps
    z1, z2 = draw_noise(seed, n_paths, n_steps)
    if isinstance(params, BergomiParams):
        x, dw2 = _bergomi_ou(params.kappa, grid, z1, z2)
        t = grid.times
        if params.kappa > 0.0:
            var_x = -np.expm1(-2.0 * params.kappa * t) / (2.0 * params.kappa)
        else:
            var_x = t.copy()
        v = params.xi0(t) * np.exp(params.eta * x - 0.5 * params.eta ** 2 * var_x)
        return v, dw2, {"truncated_fraction": 0.0}
    if isinstance(params, HestonParams):
        dt = grid.dt
        dw2 = z1 * np.sqrt(dt)
        vbar = params.vbar(grid.times)
        v = np.empty((n_paths, n_steps + 1))
        v[:, 0] = params.v0
        cur = np.full(n_paths, params.v0)
        n_neg = 0
        for k in range(n_steps):
            pos = np.maximum(cur, 0.0)
            cur = cur + params.kappa * (vbar[k] - pos) * dt[k] \
                + params.eta * np.sqrt(pos) * dw2[:, k]
            n_neg += int(np.count_nonzero(cur < 0.0))
            v[:, k + 1] = np.maximum(cur, 0.0)
        frac = n_neg / float(n_paths * n_steps)
        return v, dw2, {"truncated_fraction": frac}
    raise InvalidParamError(f"unsupported classical model {type(params).__name__}")


def rbergomi_paths(params: RBergomiParams, grid: TimeGrid, n_paths: int, seed):
    """Convenience wrapper: Volterra driver plus rough Bergomi variance."""
    w_tilde, dw2 = volterra_paths(params.h, grid, n_paths, seed)
    v = rbergomi_variance(params, w_tilde, grid)
    return v, dw2, {"truncated_fraction": 0.0}
