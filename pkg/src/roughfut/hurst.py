"""Roughness (Hurst) estimation from daily realized-volatility series.

The estimator regresses log absolute-increment moments of log RV on log
lag. For each moment order q and lag delta (in days),

    m(q, delta) = (1/N) * sum_{k=1..N} |log RV_{k*delta} - log RV_{(k-1)*delta}|^q

over non-overlapping increments, N = floor((len(rv) - 1) / delta). If
log m is linear in log delta with slope zeta_q, then H_q = zeta_q / q.
The pooled estimate combines the per-q slopes by inverse-variance
weighting. Multiple contracts enter a fixed-effects regression with a
common slope and one intercept per contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRegressionError, InsufficientDataError, InvalidParamError

DEFAULT_QS = (0.5, 1.0, 1.5, 2.0, 3.0)


@dataclass(frozen=True)
class MomentTable:
    """Empirical m(q, delta) for one contract's RV series."""

    contract: str
    qs: tuple
    deltas: tuple
    m: np.ndarray          # shape (len(qs), len(deltas))
    n_days: int

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        object.__setattr__(self, "m", m)
        m.setflags(write=False)
        if m.shape != (len(self.qs), len(self.deltas)):
            raise InvalidParamError("moment matrix shape mismatch")


@dataclass(frozen=True)
class RegressionLine:
    """One per-q regression: log m(q, .) on log delta."""

    q: float
    slope: float
    slope_se: float
    r_squared: float
    h: float
    h_se: float
    intercepts: tuple      # one per contract (fixed effects)
    n_points: int


@dataclass(frozen=True)
class HurstFit:
    lines: tuple                   # RegressionLine per q
    h: float                       # pooled estimate
    h_se: float
    pooled: bool                   # fixed-effects pooling across contracts
    in_range: bool                 # pooled H inside (0, 1)
    dropped_points: int            # zero-moment cells excluded from the fit

    @property
    def h_by_q(self) -> dict:
        return {line.q: line.h for line in self.lines}


def moments(rv, qs=DEFAULT_QS, deltas=None, contract: str = "series") -> MomentTable:
    """Absolute-increment moments of log RV at each (q, delta).

    rv must be strictly positive (zero-RV days are excluded upstream).
    Raises InsufficientDataError when a requested delta exceeds half the
    series length.
    """
    rv = np.asarray(rv, dtype=float)
    if rv.ndim != 1 or len(rv) < 2:
        raise InsufficientDataError("need a 1-d RV series with >= 2 days")
    if np.any(rv <= 0.0) or not np.all(np.isfinite(rv)):
        raise InvalidParamError("RV series must be strictly positive and finite")
    qs = tuple(float(q) for q in qs)
    if any(q <= 0.0 for q in qs):
        raise InvalidParamError("moment orders must be positive")
    if deltas is None:
        deltas = tuple(range(1, min(31, (len(rv) - 1) // 2) + 1))
    deltas = tuple(int(d) for d in deltas)
    if any(d < 1 for d in deltas):
        raise InvalidParamError("deltas must be positive integers")
    worst = max(deltas)
    if worst > len(rv) / 2:
        raise InsufficientDataError(
            f"delta={worst} exceeds half the series length ({len(rv)} days)")

    log_rv = np.log(rv)
    table = np.empty((len(qs), len(deltas)))
    for j, d in enumerate(deltas):
        n = (len(rv) - 1) // d
        inc = np.abs(log_rv[d::d][:n] - log_rv[0::d][:n])
        for i, q in enumerate(qs):
            table[i, j] = float(np.mean(inc ** q))
    return MomentTable(contract=str(contract), qs=qs, deltas=deltas,
                       m=table, n_days=len(rv))


def _common_qs_deltas(tables):
    qs = tables[0].qs
    deltas = tables[0].deltas
    for t in tables[1:]:
        if t.qs != qs or t.deltas != deltas:
            raise InvalidParamError(
                "all moment tables must share the same q and delta grids")
    return qs, deltas


def _fixed_effects_fit(x_groups, y_groups):
    """OLS with a common slope and one intercept per group.

    Returns slope, slope standard error, within-group R^2, intercepts.
    """
    n_points = sum(len(x) for x in x_groups)
    n_groups = len(x_groups)
    if n_points < 3:
        raise DegenerateRegressionError(
            f"need at least 3 regression points, got {n_points}")
    sxx = 0.0
    sxy = 0.0
    for x, y in zip(x_groups, y_groups):
        xc = x - x.mean()
        yc = y - y.mean()
        sxx += float(xc @ xc)
        sxy += float(xc @ yc)
    if sxx <= 0.0:
        raise DegenerateRegressionError("no variation in log delta")
    slope = sxy / sxx
    intercepts = tuple(float(y.mean() - slope * x.mean())
                       for x, y in zip(x_groups, y_groups))
    ss_res = 0.0
    ss_tot = 0.0
    for x, y in zip(x_groups, y_groups):
        xc = x - x.mean()
        yc = y - y.mean()
        resid = yc - slope * xc
        ss_res += float(resid @ resid)
        ss_tot += float(yc @ yc)
    dof = n_points - n_groups - 1
    if dof <= 0:
        # Exactly-determined fit: no residual degrees of freedom.
        slope_se = float("nan")
    else:
        slope_se = math.sqrt(max(ss_res, 0.0) / dof / sxx)
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return slope, slope_se, r_squared, intercepts


def estimate_h(tables, pool: bool = True) -> HurstFit:
    """Fit H from one or more moment tables.

    pool=True runs a fixed-effects regression per q across contracts
    (common slope, per-contract intercepts). pool=False first averages
    log m per delta across contracts, then fits a single line per q.
    """
    if isinstance(tables, MomentTable):
        tables = (tables,)
    tables = tuple(tables)
    if not tables:
        raise InvalidParamError("need at least one moment table")
    qs, deltas = _common_qs_deltas(tables)
    log_d = np.log(np.asarray(deltas, dtype=float))

    lines = []
    dropped = 0
    for i, q in enumerate(qs):
        x_groups, y_groups = [], []
        if pool:
            for t in tables:
                keep = t.m[i] > 0.0
                dropped += int(np.sum(~keep))
                if np.any(keep):
                    x_groups.append(log_d[keep])
                    y_groups.append(np.log(t.m[i][keep]))
        else:
            stacked = np.array([t.m[i] for t in tables])
            keep = np.all(stacked > 0.0, axis=0)
            dropped += int(np.sum(~keep))
            if np.any(keep):
                x_groups.append(log_d[keep])
                y_groups.append(np.mean(np.log(stacked[:, keep]), axis=0))
        if not x_groups:
            raise DegenerateRegressionError(
                f"all moments vanish at q={q}; nothing to regress")
        slope, slope_se, r2, intercepts = _fixed_effects_fit(x_groups, y_groups)
        lines.append(RegressionLine(
            q=q, slope=slope, slope_se=slope_se, r_squared=r2,
            h=slope / q, h_se=slope_se / q, intercepts=intercepts,
            n_points=sum(len(x) for x in x_groups)))

    weights = np.array([1.0 / line.h_se ** 2 if line.h_se > 0.0 else np.nan
                        for line in lines])
    hs = np.array([line.h for line in lines])
    if np.all(np.isfinite(weights)):
        h = float(np.sum(weights * hs) / np.sum(weights))
        h_se = float(1.0 / math.sqrt(np.sum(weights)))
    else:
        # Degenerate SEs (exactly-determined fits): plain average.
        h = float(np.mean(hs))
        h_se = float("nan")
    return HurstFit(lines=tuple(lines), h=h, h_se=h_se, pooled=pool,
                    in_range=0.0 < h < 1.0, dropped_points=dropped)


def fbm_series(h: float, n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """Fractional Brownian motion sampled at integer times 1..n, exact in law.

    Uses circulant embedding of the fractional Gaussian noise covariance,
    so Var(B_k) = scale^2 * k^(2H) exactly (up to floating point), not just
    asymptotically. Handy as a synthetic log-volatility benchmark with a
    known roughness index.
    """
    if not 0.0 < h < 1.0:
        raise InvalidParamError("h must lie in (0, 1)")
    if n < 1:
        raise InvalidParamError("n must be positive")
    k = np.arange(n + 1, dtype=float)
    acov = 0.5 * ((k + 1.0) ** (2 * h) - 2.0 * k ** (2 * h)
                  + np.abs(k - 1.0) ** (2 * h))
    circ = np.concatenate([acov, acov[-2:0:-1]])
    eig = np.maximum(np.fft.fft(circ).real, 0.0)
    m = len(circ)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    spectral = np.fft.fft(z * np.sqrt(eig / (2.0 * m)))
    increments = math.sqrt(2.0) * spectral[:n].real
    return float(scale) * np.cumsum(increments)


def regression_points(tables):
    """Rows (q, delta, log_delta, log_m, contract) for scatter output.

    Zero-moment cells are skipped, matching their exclusion from the fit.
    """
    if isinstance(tables, MomentTable):
        tables = (tables,)
    tables = tuple(tables)
    qs, deltas = _common_qs_deltas(tables)
    rows = []
    for t in tables:
        for i, q in enumerate(qs):
            for j, d in enumerate(deltas):
                if t.m[i, j] > 0.0:
                    rows.append((q, d, math.log(d), math.log(t.m[i, j]),
                                 t.contract))
    return rows
