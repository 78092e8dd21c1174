"""Futures curve mapping, Black-76 helpers and Monte Carlo option pricing.

Futures prices come from the normalized spot through

    F_t(T) = F0(T) * (1 - (1 - s_t) * exp(-a (T - t))),

which makes F_t(T) a martingale in t with F_0(T) = F0(T). Options on
futures are priced undiscounted: settlement conventions put the
discounting outside these formulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .errors import GridMismatchError, InvalidParamError, OutOfBandError
from .sim.grids import TimeGrid
from .sim.params import ModelSpec, PathBatch
from .sim.engine import simulate

VOL_LO = 1e-4
VOL_HI = 5.0
_TINY_TOTAL_VAR = 1e-16


@dataclass(frozen=True)
class FuturesCurve:
    """Initial futures curve F0(T), log-linear between pillars."""

    pillars: tuple          # (maturity, price) pairs, strictly increasing T

    def __post_init__(self):
        ps = tuple((float(t), float(f)) for t, f in self.pillars)
        object.__setattr__(self, "pillars", ps)
        if len(ps) == 0:
            raise InvalidParamError("curve needs at least one pillar")
        ts = np.array([t for t, _ in ps])
        fs = np.array([f for _, f in ps])
        if np.any(np.diff(ts) <= 0.0):
            raise InvalidParamError("pillar maturities must strictly increase")
        if np.any(fs <= 0.0):
            raise InvalidParamError("futures prices must be positive")

    @classmethod
    def flat(cls, f0: float) -> "FuturesCurve":
        return cls(pillars=((1.0, float(f0)),))

    def __call__(self, maturity):
        ts = np.array([t for t, _ in self.pillars])
        logf = np.log(np.array([f for _, f in self.pillars]))
        out = np.exp(np.interp(np.asarray(maturity, dtype=float), ts, logf))
        return out if out.ndim else float(out)


def futures_price(s_t, t: float, maturity: float, a: float,
                  curve: FuturesCurve):
    """Map the normalized spot at time t into the futures price F_t(T)."""
    if maturity < t:
        raise InvalidParamError("futures maturity must not precede t")
    if a < 0.0:
        raise InvalidParamError("mean reversion speed a must be nonnegative")
    damp = np.exp(-a * (maturity - t))
    out = curve(maturity) * (1.0 - (1.0 - np.asarray(s_t, dtype=float)) * damp)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class VanillaSpec:
    """One European option on a futures contract."""

    t_opt: float
    t_fut: float
    strike: float
    is_call: bool = True

    def __post_init__(self):
        if self.t_opt <= 0.0 or self.t_fut < self.t_opt:
            raise InvalidParamError("need 0 < t_opt <= t_fut")
        if self.strike <= 0.0:
            raise InvalidParamError("strike must be positive")


def black_price(forward: float, strike: float, expiry: float, vol: float,
                is_call: bool = True) -> float:
    """Undiscounted Black-76 price of a European option on a forward."""
    if forward <= 0.0 or strike <= 0.0:
        raise InvalidParamError("forward and strike must be positive")
    if expiry <= 0.0:
        raise InvalidParamError("expiry must be positive")
    if vol < 0.0:
        raise InvalidParamError("volatility must be nonnegative")
    total = vol * np.sqrt(expiry)
    if total ** 2 < _TINY_TOTAL_VAR:
        intrinsic = forward - strike if is_call else strike - forward
        return max(intrinsic, 0.0)
    d1 = (np.log(forward / strike) + 0.5 * total ** 2) / total
    d2 = d1 - total
    if is_call:
        return forward * norm.cdf(d1) - strike * norm.cdf(d2)
    return strike * norm.cdf(-d2) - forward * norm.cdf(-d1)


def implied_vol(price: float, forward: float, strike: float, expiry: float,
                is_call: bool = True) -> float:
    """Invert Black-76 by bracketed root finding on [1e-4, 5].

    Raises OutOfBandError when the price sits outside the static
    no-arbitrage band or beyond the prices attainable inside the vol
    bracket.
    """
    intrinsic = max(forward - strike, 0.0) if is_call else max(strike - forward, 0.0)
    upper = forward if is_call else strike
    if not intrinsic < price < upper:
        raise OutOfBandError(
            f"price {price} outside the no-arbitrage band ({intrinsic}, {upper})")
    lo = black_price(forward, strike, expiry, VOL_LO, is_call)
    hi = black_price(forward, strike, expiry, VOL_HI, is_call)
    if price < lo or price > hi:
        raise OutOfBandError(
            f"price {price} not attainable for vol in [{VOL_LO}, {VOL_HI}]")

    def f(sigma):
        return black_price(forward, strike, expiry, sigma, is_call) - price

    vol = brentq(f, VOL_LO, VOL_HI, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    return float(vol)


def _terminal_futures(batch: PathBatch, t_opt: float, t_fut: float, a: float,
                      curve: FuturesCurve) -> np.ndarray:
    idx = batch.grid.index_of(t_opt)
    return futures_price(batch.s[:, idx], t_opt, t_fut, a, curve)


def mc_vanilla(batch: PathBatch, spec: VanillaSpec, a: float,
               curve: FuturesCurve, control_variate: bool = False):
    """Monte Carlo price and standard error of one vanilla from a batch.

    ``spec.t_opt`` must be a node of the batch grid (GridMismatchError
    otherwise). With ``control_variate`` the terminal futures price is
    used as a control, exploiting E[F] = F0 exactly.
    """
    f_t = _terminal_futures(batch, spec.t_opt, spec.t_fut, a, curve)
    if spec.is_call:
        payoff = np.maximum(f_t - spec.strike, 0.0)
    else:
        payoff = np.maximum(spec.strike - f_t, 0.0)
    if control_variate:
        f0 = curve(spec.t_fut)
        cov = np.cov(payoff, f_t, ddof=1)
        beta = cov[0, 1] / cov[1, 1] if cov[1, 1] > 0.0 else 0.0
        adjusted = payoff - beta * (f_t - f0)
        price = float(np.mean(adjusted))
        stderr = float(np.std(adjusted, ddof=1) / np.sqrt(len(adjusted)))
        return price, stderr
    price = float(np.mean(payoff))
    stderr = float(np.std(payoff, ddof=1) / np.sqrt(len(payoff)))
    return price, stderr


@dataclass
class SmilePoint:
    strike: float
    price: float
    stderr: float
    model_vol: float
    inversion_ok: bool = True


def invert_or_clamp(price: float, forward: float, strike: float, expiry: float,
                    is_call: bool):
    """Implied vol, or the nearest attainable bracket edge with ok=False."""
    try:
        return implied_vol(price, forward, strike, expiry, is_call), True
    except OutOfBandError:
        lo = black_price(forward, strike, expiry, VOL_LO, is_call)
        return (VOL_LO, False) if price <= lo else (VOL_HI, False)


def smile_from_batch(batch: PathBatch, specs, a: float, curve: FuturesCurve,
                     control_variate: bool = False):
    """Price a list of vanillas off one shared batch and invert each."""
    points = []
    for spec in specs:
        price, stderr = mc_vanilla(batch, spec, a, curve,
                                   control_variate=control_variate)
        vol, ok = invert_or_clamp(price, curve(spec.t_fut), spec.strike,
                                  spec.t_opt, spec.is_call)
        points.append(SmilePoint(strike=spec.strike, price=price,
                                 stderr=stderr, model_vol=vol,
                                 inversion_ok=ok))
    return points


def model_smile(model: ModelSpec, specs, n_paths: int, seed: int,
                steps_per_year: int = 300, backend: str = "hqe",
                control_variate: bool = False):
    """Simulate once and price a smile (shared paths across strikes).

    All specs must share one option expiry; the grid contains that expiry
    as a node. Points whose Monte Carlo price falls outside the
    no-arbitrage band are flagged, not dropped.
    """
    if model.futures is None:
        raise InvalidParamError("model needs a futures curve to price options")
    expiries = {spec.t_opt for spec in specs}
    if len(expiries) != 1:
        raise InvalidParamError("model_smile expects a single option expiry")
    t_opt = expiries.pop()
    grid = TimeGrid.regular(t_opt, steps_per_year)
    batch = simulate(model, grid, n_paths, seed, backend=backend)["single"]
    a = model.spot.mean_reversion
    return smile_from_batch(batch, specs, a, model.futures,
                            control_variate=control_variate)


def atm_term_structure(model: ModelSpec, t_fut: float, t_opts, a_values,
                       n_paths: int, seed: int, steps_per_year: int = 300,
                       backend: str = "hqe"):
    """ATM implied vols by option expiry for each mean reversion speed.

    The same variance parameters and seed are reused for every value of
    ``a`` (common random numbers), so differences across ``a`` reflect the
    damping of the futures map and the spot drift, not sampling noise.
    Returns a dict a -> list of (t_opt, atm_vol, price, stderr).
    """
    if model.futures is None:
        raise InvalidParamError("model needs a futures curve to price options")
    t_opts = sorted(float(t) for t in t_opts)
    if t_opts[-1] > t_fut:
        raise InvalidParamError("option expiries must not exceed t_fut")
    grid = TimeGrid.regular(t_opts[-1], steps_per_year, include=t_opts)
    f0 = model.futures(t_fut)
    out = {}
    for a in a_values:
        spec_a = ModelSpec(variance=model.variance,
                           spot=type(model.spot)(mean_reversion=float(a),
                                                 corr=model.spot.corr),
                           futures=model.futures)
        batch = simulate(spec_a, grid, n_paths, seed, backend=backend)["single"]
        rows = []
        for t_opt in t_opts:
            vspec = VanillaSpec(t_opt=t_opt, t_fut=t_fut, strike=f0,
                                is_call=True)
            price, stderr = mc_vanilla(batch, vspec, float(a), model.futures)
            vol, ok = invert_or_clamp(price, f0, f0, t_opt, True)
            if not ok:
                raise OutOfBandError(
                    f"ATM price at t_opt={t_opt} not invertible")
            rows.append((t_opt, vol, price, stderr))
        out[float(a)] = rows
    return out
