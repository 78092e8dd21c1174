"""Euler scheme for the normalized spot under any of the variance models."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParamError
from .grids import TimeGrid
from .params import SpotParams


def spot_paths(spot: SpotParams, v: np.ndarray, dw2: np.ndarray,
               grid: TimeGrid, seed) -> np.ndarray:
    """Simulate s_t with ds = a(1-s)dt + sqrt(v) s dW1, s_0 = 1.

    dW1 = rho dW2 + sqrt(1-rho^2) dWp with dWp drawn here from ``seed``
    and rho the correlation in force at the left node of each step.
    Paths are floored at zero and stay there once floored; the diffusion
    vanishes at zero so the floor is effectively absorbing.
    """
    n_paths, n_steps = dw2.shape
    if v.shape != (n_paths, n_steps + 1):
        raise InvalidParamError("variance and increment shapes do not match")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    gen = np.random.Generator(np.random.Philox(ss))
    z3 = gen.standard_normal((n_paths, n_steps))

    a = spot.mean_reversion
    dt = grid.dt
    sqdt = np.sqrt(dt)
    rho = np.atleast_1d(np.asarray(spot.corr_at(grid.times[:-1]), dtype=float))
    if rho.size == 1:
        rho = np.full(n_steps, rho[0])
    orth = np.sqrt(1.0 - rho ** 2)

    s = np.empty((n_paths, n_steps + 1))
    s[:, 0] = 1.0
    cur = s[:, 0].copy()
    for k in range(n_steps):
        vol = np.sqrt(np.maximum(v[:, k], 0.0))
        dw1 = rho[k] * dw2[:, k] + orth[k] * sqdt[k] * z3[:, k]
        nxt = cur + a * (1.0 - cur) * dt[k] + vol * cur * dw1
        nxt = np.where(cur <= 0.0, 0.0, np.maximum(nxt, 0.0))
        s[:, k + 1] = nxt
        cur = nxt
    return s
