"""Hybrid-scheme simulation of the Riemann-Liouville Volterra process.

Simulates W_tilde(t) = sqrt(2H) * int_0^t (t-s)^(H-1/2) dW2_s on a time
grid. The contribution of the most recent interval is drawn exactly from
the joint Gaussian law of (dW2, int (t-s)^(H-1/2) dW2); older intervals
enter through a Riemann sum with the kernel evaluated at the power-mean
point of each interval, which on a uniform grid reduces to the optimal
evaluation points b_k = ((k^(a+1)-(k-1)^(a+1))/(a+1))^(1/a), a = H-1/2.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import fftconvolve

from ..errors import InvalidParamError
from .grids import TimeGrid

_CONV_CHUNK_ELEMS = 4_000_000


def draw_noise(seed, n_paths: int, n_steps: int):
    """Two (n_paths, n_steps) standard normal blocks from a Philox stream.

    The first block drives the variance Brownian motion dW2, the second
    the auxiliary variable of whichever scheme consumes it. Layout is
    fixed so that runs with equal seeds agree across schemes.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    gen = np.random.Generator(np.random.Philox(ss))
    z1 = gen.standard_normal((n_paths, n_steps))
    z2 = gen.standard_normal((n_paths, n_steps))
    return z1, z2


def kernel_interval_means(grid: TimeGrid, alpha: float) -> np.ndarray:
    """Mean of r^alpha over [t_k - t_{j+1}, t_k - t_j] for j <= k-2.

    Returns a lower-triangular (n_nodes, n_steps) matrix of history
    weights; entries with j > k-2 are zero.
    """
    t = grid.times
    n_nodes = len(t)
    w = np.zeros((n_nodes, n_nodes - 1))
    for k in range(2, n_nodes):
        d1 = t[k] - t[: k - 1]
        d0 = t[k] - t[1:k]
        w[k, : k - 1] = (d1 ** (alpha + 1.0) - d0 ** (alpha + 1.0)) / (
            (alpha + 1.0) * (d1 - d0))
    return w


def _uniform_history_kernel(dt: float, alpha: float, n_nodes: int) -> np.ndarray:
    ell = np.arange(n_nodes, dtype=float)
    ker = np.zeros(n_nodes)
    ker[2:] = dt ** alpha * (ell[2:] ** (alpha + 1.0) -
                             (ell[2:] - 1.0) ** (alpha + 1.0)) / (alpha + 1.0)
    return ker


def _convolve_history(dw2: np.ndarray, ker: np.ndarray) -> np.ndarray:
    """FFT convolution of path increments with the history kernel, chunked."""
    n_paths, n_steps = dw2.shape
    n_nodes = n_steps + 1
    out = np.empty((n_paths, n_nodes))
    chunk = max(1, _CONV_CHUNK_ELEMS // max(n_steps, 1))
    for lo in range(0, n_paths, chunk):
        hi = min(lo + chunk, n_paths)
        conv = fftconvolve(dw2[lo:hi], ker[None, :], mode="full", axes=1)
        out[lo:hi] = conv[:, :n_nodes]
    return out


def volterra_paths(h: float, grid: TimeGrid, n_paths: int, seed):
    """Simulate the Volterra driver and its Brownian increments.

    Parameters
    ----------
    h : float
        Hurst parameter in (0, 1).
    grid : TimeGrid
    n_paths : int
    seed : int or numpy SeedSequence

    Returns
    -------
    (w_tilde, dw2) : tuple of ndarray
        w_tilde has shape (n_paths, n_nodes) with w_tilde[:, 0] = 0 and
        Var(w_tilde[:, k]) ~= t_k^(2H). dw2 has shape (n_paths, n_steps)
        and holds the increments of the driving Brownian motion.
    """
    if not 0.0 < h < 1.0:
        raise InvalidParamError("h must lie in (0, 1)")
    if n_paths <= 0:
        raise InvalidParamError("n_paths must be positive")
    alpha = h - 0.5
    dt = grid.dt
    n_steps = grid.n_steps

    z1, z2 = draw_noise(seed, n_paths, n_steps)
    sqdt = np.sqrt(dt)
    dw2 = z1 * sqdt

    # Exact joint draw for the nearest interval: Cov(dW2, I) = dt^(H+1/2)/(H+1/2),
    # Var(I) = dt^(2H)/(2H).
    c1 = dt ** h / (h + 0.5)
    resid = dt ** (2.0 * h) * (1.0 / (2.0 * h) - 1.0 / (h + 0.5) ** 2)
    c2 = np.sqrt(np.maximum(resid, 0.0))
    near = z1 * c1 + z2 * c2

    udt = grid.uniform_dt
    if udt is not None:
        ker = _uniform_history_kernel(udt, alpha, n_steps + 1)
        hist = _convolve_history(dw2, ker)
    else:
        w = kernel_interval_means(grid, alpha)
        hist = np.zeros((n_paths, n_steps + 1))
        for k in range(2, n_steps + 1):
            hist[:, k] = dw2[:, : k - 1] @ w[k, : k - 1]

    w_tilde = hist
    w_tilde[:, 1:] += near
    w_tilde[:, 0] = 0.0
    w_tilde *= np.sqrt(2.0 * h)
    return w_tilde, dw2


def scheme_node_variance(h: float, grid: TimeGrid) -> np.ndarray:
    """Exact Var(w_tilde[:, k]) under the discretization, for bias checks."""
    alpha = h - 0.5
    dt = grid.dt
    n_nodes = len(grid.times)
    w = kernel_interval_means(grid, alpha)
    var = np.zeros(n_nodes)
    var[1:] = dt ** (2.0 * h) / (2.0 * h)
    for k in range(2, n_nodes):
        var[k] += np.sum(w[k, : k - 1] ** 2 * dt[: k - 1])
    return 2.0 * h * var
