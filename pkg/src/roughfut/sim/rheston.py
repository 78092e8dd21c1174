"""Rough Heston variance paths, parameterized by the forward variance curve.

The model, written against its own forward variance curve xi0, is

    v_t = xi0(t) - kappa * int_0^t K(t-s) (v_s - xi0(s)) ds
                 + eta  * int_0^t K(t-s) sqrt(v_s) dW2_s,

with the power kernel K(tau) = tau^(H-1/2) / Gamma(H+1/2). Two backends
are provided:

- "hqe": one-step quadratic-exponential sampling of the singular kernel
  contribution, moment-matched per interval, with older intervals entering
  future nodes through variance-matched kernel averages and the
  mean-reversion term through exact kernel interval means.
- "euler": left-point Volterra-Euler discretization with full truncation
  (sqrt(v) replaced by sqrt(max(v, 0)) while the state itself stays
  signed). The returned v can therefore dip below zero on this backend;
  clipping the output would bias its mean upward, and every consumer
  of variance paths already applies max(v, 0).

Both preserve E[v_t] = xi0(t) at the discrete level up to sampling noise
(the hqe backend additionally floors rare negative conditional means,
which is counted in the diagnostics).
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.stats import norm

from ..errors import InvalidParamError
from .grids import TimeGrid
from .params import RHestonParams
from .volterra import draw_noise

PSI_SWITCH = 1.5


def _history_weights(grid: TimeGrid, h: float):
    """Variance-matched and mean kernel averages for past intervals.

    bstar[m, j] = sqrt(mean of K^2 over [t_m - t_{j+1}, t_m - t_j]),
    cmean[m, j] = mean of K over the same span, for j <= m-2.
    """
    al = h + 0.5
    g_al = gamma_fn(al)
    t = grid.times
    n_nodes = len(t)
    bstar = np.zeros((n_nodes, n_nodes - 1))
    cmean = np.zeros((n_nodes, n_nodes - 1))
    for m in range(2, n_nodes):
        d1 = t[m] - t[: m - 1]
        d0 = t[m] - t[1:m]
        span = d1 - d0
        b2 = (d1 ** (2.0 * h) - d0 ** (2.0 * h)) / (2.0 * h * g_al ** 2 * span)
        bstar[m, : m - 1] = np.sqrt(b2)
        cmean[m, : m - 1] = (d1 ** al - d0 ** al) / (al * g_al * span)
    return bstar, cmean


def _qe_sample(mean: np.ndarray, var: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Andersen quadratic-exponential draw matching (mean, var), mean > 0."""
    out = np.empty_like(mean)
    psi = var / mean ** 2

    quad = psi <= PSI_SWITCH
    if np.any(quad):
        pq = np.maximum(psi[quad], 1e-12)
        inv2 = 2.0 / pq
        b2 = inv2 - 1.0 + np.sqrt(inv2) * np.sqrt(np.maximum(inv2 - 1.0, 0.0))
        a = mean[quad] / (1.0 + b2)
        out[quad] = a * (np.sqrt(b2) + z[quad]) ** 2

    expo = ~quad
    if np.any(expo):
        pe = psi[expo]
        p = (pe - 1.0) / (pe + 1.0)
        beta = (1.0 - p) / mean[expo]
        u = norm.cdf(z[expo])
        val = np.zeros_like(p)
        hit = u > p
        val[hit] = np.log((1.0 - p[hit]) / (1.0 - u[hit])) / beta[hit]
        out[expo] = val
    return out


def _deterministic_variance(xi: np.ndarray, grid: TimeGrid, n_paths: int, seed):
    """eta = 0 case shared by both backends: v solves the noise-free
    Volterra equation, whose solution is the curve itself."""
    z1, _ = draw_noise(seed, n_paths, grid.n_steps)
    dw2 = z1 * np.sqrt(grid.dt)
    v = np.tile(xi, (n_paths, 1))
    return v, dw2, {"truncated_fraction": 0.0}


def _rheston_hqe(params: RHestonParams, grid: TimeGrid, n_paths: int, seed):
    h, eta, kappa = params.h, params.eta, params.kappa
    al = h + 0.5
    g_al = gamma_fn(al)
    t = grid.times
    dt = grid.dt
    n_steps = grid.n_steps
    xi = params.xi0(t)
    if eta == 0.0:
        return _deterministic_variance(xi, grid, n_paths, seed)

    k1 = dt ** al / (al * g_al)                      # int_0^dt K
    k2 = dt ** (2.0 * h) / (2.0 * h * g_al ** 2)     # int_0^dt K^2
    w_resid = np.sqrt(np.maximum(dt - k1 ** 2 / k2, 0.0))
    bstar, cmean = _history_weights(grid, h)

    z1, z2 = draw_noise(seed, n_paths, n_steps)

    v = np.empty((n_paths, n_steps + 1))
    v[:, 0] = xi[0]
    dw2 = np.empty((n_paths, n_steps))
    xihat = np.tile(xi, (n_paths, 1))
    y = np.zeros(n_paths)                            # v - xi0 at the current node
    n_floored = 0

    for j in range(n_steps):
        m_next = xihat[:, j + 1] - kappa * k1[j] * y
        floored = m_next <= 0.0
        n_floored += int(np.count_nonzero(floored))
        mp = np.where(floored, 0.0, m_next)

        vbar = np.maximum((2.0 * h * v[:, j] + mp) / (1.0 + 2.0 * h), 0.0)
        var_u = eta ** 2 * k2[j] * vbar

        v_next = np.zeros(n_paths)
        live = (mp > 0.0)
        det = live & (var_u <= 1e-14 * np.maximum(mp, 1e-30) ** 2)
        v_next[det] = mp[det]
        rnd = live & ~det
        if np.any(rnd):
            v_next[rnd] = _qe_sample(mp[rnd], var_u[rnd], z1[rnd, j])

        u_centered = v_next - mp
        w = (k1[j] / k2[j]) * u_centered / eta \
            + w_resid[j] * np.sqrt(vbar) * z2[:, j]

        safe = np.sqrt(np.where(vbar > 0.0, vbar, 1.0))
        dw2[:, j] = np.where(vbar > 0.0, w / safe, 0.0)

        y_next = v_next - xi[j + 1]
        if j + 2 <= n_steps:
            ybar = 0.5 * (y + y_next)
            upd = np.outer(w, eta * bstar[j + 2:, j])
            upd -= np.outer(ybar, kappa * dt[j] * cmean[j + 2:, j])
            xihat[:, j + 2:] += upd
        y = y_next
        v[:, j + 1] = v_next

    frac = n_floored / float(n_paths * n_steps)
    return v, dw2, {"truncated_fraction": frac}


def _rheston_euler(params: RHestonParams, grid: TimeGrid, n_paths: int, seed):
    h, eta, kappa = params.h, params.eta, params.kappa
    al = h + 0.5
    g_al = gamma_fn(al)
    t = grid.times
    dt = grid.dt
    n_steps = grid.n_steps
    xi = params.xi0(t)
    if eta == 0.0:
        return _deterministic_variance(xi, grid, n_paths, seed)

    z1, _ = draw_noise(seed, n_paths, n_steps)
    dw2 = z1 * np.sqrt(dt)

    v = np.empty((n_paths, n_steps + 1))
    v[:, 0] = xi[0]
    incr = np.empty((n_paths, n_steps))              # kernel-free increments
    raw = np.full(n_paths, xi[0])
    n_neg = 0
    for k in range(n_steps):
        pos = np.maximum(raw, 0.0)
        incr[:, k] = kappa * (xi[k] - raw) * dt[k] + eta * np.sqrt(pos) * dw2[:, k]
        ker = (t[k + 1] - t[: k + 1]) ** (h - 0.5) / g_al
        raw = xi[k + 1] + incr[:, : k + 1] @ ker
        n_neg += int(np.count_nonzero(raw < 0.0))
        v[:, k + 1] = raw
    frac = n_neg / float(n_paths * n_steps)
    return v, dw2, {"truncated_fraction": frac}


def rheston_variance(params: RHestonParams, grid: TimeGrid, n_paths: int, seed,
                     backend: str = "hqe"):
    """Simulate rough Heston variance paths.

    Returns
    -------
    (v, dw2, diagnostics) : tuple
        v has shape (n_paths, n_nodes); nonnegative on the hqe backend,
        signed on euler (see module docstring). dw2 holds effective
        Brownian increments of the variance driver for spot correlation;
        for the hqe backend these are the moment-matched integrated
        auxiliaries rescaled to increment units.
    """
    if np.any(params.xi0(grid.times) <= 0.0):
        raise InvalidParamError(
            "forward variance curve must be strictly positive on the grid")
    if backend == "hqe":
        return _rheston_hqe(params, grid, n_paths, seed)
    if backend == "euler":
        return _rheston_euler(params, grid, n_paths, seed)
    raise InvalidParamError(f"unknown rough Heston backend {backend!r}")


def forward_variance_from_heston(v0: float, vbar, kappa: float, h: float,
                                 times: np.ndarray) -> np.ndarray:
    """Solve xi(u) = v0 + kappa/Gamma(H+1/2) int_0^u (u-s)^(H-1/2)(vbar(s)-xi(s)) ds.

    Product-integration solver treating the non-kernel factor as piecewise
    linear between grid nodes. ``vbar`` is a callable of time. Used to map
    (v0, vbar, kappa) into the forward variance curve the simulators take.
    """
    al = h + 0.5
    g_al = gamma_fn(al)
    t = np.asarray(times, dtype=float)
    n = len(t)
    vb = np.array([vbar(u) for u in t], dtype=float) if callable(vbar) \
        else np.full(n, float(vbar))
    xi = np.empty(n)
    xi[0] = v0
    lam = kappa / g_al
    for k in range(1, n):
        d1 = t[k] - t[: k]
        d0 = t[k] - t[1: k + 1]
        m0 = (d1 ** al - d0 ** al) / al
        m1 = (d1 ** (al + 1.0) - d0 ** (al + 1.0)) / (al + 1.0)
        span = d1 - d0
        g = vb[: k + 1] - xi[: k + 1]                # g[k] unknown, set below
        left = (m1 - d0 * m0) / span                 # weight on g_j
        right = (d1 * m0 - m1) / span                # weight on g_{j+1}
        s_known = np.sum(left * g[: k]) + np.sum(right[: k - 1] * g[1: k])
        c_k = right[k - 1]
        xi[k] = (v0 + lam * (s_known + c_k * vb[k])) / (1.0 + lam * c_k)
    return xi
