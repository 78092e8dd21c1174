"""Smile pricing on a fixed noise panel for nested calibration.

The outer calibration evaluates many parameter sets; the inner loop
refits the forward variance curve level by level. Both run on common
random numbers: every mesh keeps the seed substream layout of
:func:`roughfut.sim.engine.simulate`, so (a) the objective is a
deterministic function of the parameters, and (b) a full smile computed
here is bit-identical to pricing off a fresh ``simulate`` call with the
same seed.

Per-family shortcuts keep the inner refits cheap:

- rough Bergomi and Bergomi variance factor as curve(t) * M with M
  independent of the curve, so M is cached per parameter set and only
  the spot paths are re-advanced when a curve level moves;
- Heston is Markov, so spot and variance states are checkpointed at
  each fitted maturity and advanced segment by segment;
- rough Heston has kernel memory and is re-simulated from scratch on
  its cached noise (correct but the slowest family to calibrate).

Option prices are Monte Carlo means of the out-of-the-money payoff,
mapped to calls through put-call parity at the sample mean futures
price, then inverted against the contract's futures quote.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParamError
from ..pricing import FuturesCurve, futures_price, invert_or_clamp
from ..sim.grids import DualMeshPlan, TimeGrid
from ..sim.params import CorrTermStructure, RHestonParams, SpotParams
from ..sim.rheston import rheston_variance
from ..sim.spot import spot_paths
from ..sim.variance import _bergomi_ou
from ..sim.volterra import draw_noise, volterra_paths
from .loss import ModelVol

FAMILIES = ("rbergomi", "rheston", "bergomi", "heston")
_MULTIPLICATIVE = ("rbergomi", "bergomi")
_REQUIRED = {
    "rbergomi": ("h", "eta"),
    "rheston": ("h", "eta", "kappa"),
    "bergomi": ("eta", "kappa"),
    "heston": ("eta", "kappa", "v0"),
}


class _MeshState:
    """Noise and checkpoint caches for one simulation mesh."""

    def __init__(self, name: str, grid: TimeGrid, var_ss, spot_ss,
                 contract_ids):
        self.name = name
        self.grid = grid
        self.var_ss = var_ss
        self.spot_ss = spot_ss
        self.contract_ids = tuple(contract_ids)
        self.z3 = None          # spot orthogonal normals, theta-independent
        self.factor = None      # multiplicative variance factor
        self.z1 = None          # Heston variance normals
        self.dw2 = None
        self.dw1 = None
        self.base_idx = 0
        self.base_s = None
        self.base_v = None      # Heston signed variance state

    def reset_base(self, n_paths: int, v0):
        self.base_idx = 0
        self.base_s = np.ones(n_paths)
        self.base_v = None if v0 is None else np.full(n_paths, float(v0))


class SmileEngine:
    """Prices model smiles for one surface under common random numbers."""

    def __init__(self, family: str, surface, *, a: float = 0.5,
                 plan=None, n_paths: int = 20000, seed: int = 0,
                 backend: str = "hqe"):
        if family not in FAMILIES:
            raise InvalidParamError(f"unknown model family {family!r}")
        if n_paths <= 0:
            raise InvalidParamError("n_paths must be positive")
        self.family = family
        self.surface = surface
        self.a = float(a)
        if self.a < 0.0:
            raise InvalidParamError("mean reversion speed a must be nonnegative")
        self.n_paths = int(n_paths)
        self.seed = int(seed)
        self.backend = backend
        self.maturities = surface.maturities
        if plan is None:
            plan = DualMeshPlan.from_maturities(self.maturities)
        self.plan = plan

        # Mirror simulate()'s seed substream layout exactly.
        master = np.random.SeedSequence(self.seed)
        self.meshes = {}
        if isinstance(plan, TimeGrid):
            mesh_ss = {"single": master}
            mesh_of = {i: "single" for i in range(len(surface.contracts))}
        elif isinstance(plan, DualMeshPlan):
            fine_ss, coarse_ss = master.spawn(2)
            mesh_ss = {"fine": fine_ss, "coarse": coarse_ss}
            mesh_of = {i: plan.mesh_for(c.t_opt)
                       for i, c in enumerate(surface.contracts)}
        else:
            raise InvalidParamError("plan must be a TimeGrid or a DualMeshPlan")
        self._mesh_of = mesh_of
        for name, ss in mesh_ss.items():
            ids = [i for i, m in mesh_of.items() if m == name]
            if not ids:
                continue
            grid = plan if isinstance(plan, TimeGrid) else getattr(plan, name)
            var_ss, spot_ss = ss.spawn(2)
            self.meshes[name] = _MeshState(name, grid, var_ss, spot_ss, ids)

        self._opt_idx = {}
        for i, contract in enumerate(surface.contracts):
            ms = self.meshes[mesh_of[i]]
            self._opt_idx[i] = ms.grid.index_of(contract.t_opt)
        self._flat_curves = tuple(FuturesCurve.flat(c.f0)
                                  for c in surface.contracts)
        self._atm_idx = tuple(
            int(np.argmin([abs(q.strike - c.f0) for q in qs]))
            for c, qs in zip(surface.contracts, surface.quotes))
        self.theta = None
        self.n_inner_evals = 0

    # -- parameter handling -------------------------------------------------

    def atm_target(self, i: int):
        """(strike, market vol) of the quote closest to the futures price."""
        q = self.surface.quotes[i][self._atm_idx[i]]
        return q.strike, q.mkt_vol

    def set_theta(self, theta: dict) -> None:
        """Install a candidate parameter set and rebuild per-mesh caches."""
        theta = dict(theta)
        missing = [k for k in _REQUIRED[self.family] if k not in theta]
        if missing:
            raise InvalidParamError(
                f"{self.family} theta is missing {', '.join(missing)}")
        rho = theta.get("rho")
        if rho is None:
            raise InvalidParamError("theta must provide rho")
        rho_values = tuple(rho) if isinstance(rho, (tuple, list, np.ndarray)) \
            else (float(rho),)
        if len(rho_values) not in (1, len(self.maturities)):
            raise InvalidParamError(
                "rho must be a scalar or one value per maturity")
        if self.family == "rbergomi" and any(r >= 0.0 for r in rho_values):
            raise InvalidParamError(
                "rough Bergomi requires spot correlation < 0")
        if len(rho_values) == 1:
            corr = rho_values[0]
        else:
            corr = CorrTermStructure(boundaries=self.maturities,
                                     values=rho_values)
        self._spot = SpotParams(mean_reversion=self.a, corr=corr)
        self.theta = theta

        for ms in self.meshes.values():
            grid = ms.grid
            n_steps = grid.n_steps
            if ms.z3 is None:
                gen = np.random.Generator(np.random.Philox(ms.spot_ss))
                ms.z3 = gen.standard_normal((self.n_paths, n_steps))
            if self.family == "rbergomi":
                w_tilde, dw2 = volterra_paths(theta["h"], grid, self.n_paths,
                                              ms.var_ss)
                t = grid.times
                drift = 0.5 * theta["eta"] ** 2 * t ** (2.0 * theta["h"])
                ms.factor = np.exp(theta["eta"] * w_tilde - drift)
                ms.dw2 = dw2
            elif self.family == "bergomi":
                z1, z2 = draw_noise(ms.var_ss, self.n_paths, n_steps)
                x, dw2 = _bergomi_ou(theta["kappa"], grid, z1, z2)
                t = grid.times
                var_x = -np.expm1(-2.0 * theta["kappa"] * t) / (2.0 * theta["kappa"])
                ms.factor = np.exp(theta["eta"] * x - 0.5 * theta["eta"] ** 2 * var_x)
                ms.dw2 = dw2
            elif self.family == "heston":
                z1, _ = draw_noise(ms.var_ss, self.n_paths, n_steps)
                ms.dw2 = z1 * np.sqrt(grid.dt)
            else:                       # rheston: re-simulated per evaluation
                ms.dw2 = None
            if ms.dw2 is not None:
                ms.dw1 = self._fold_corr(ms)
            ms.reset_base(self.n_paths, theta.get("v0"))

    def _fold_corr(self, ms: _MeshState) -> np.ndarray:
        """dW1 increments from dW2 and the orthogonal normals."""
        grid = ms.grid
        rho = np.atleast_1d(np.asarray(
            self._spot.corr_at(grid.times[:-1]), dtype=float))
        if rho.size == 1:
            rho = np.full(grid.n_steps, rho[0])
        orth = np.sqrt(1.0 - rho ** 2)
        sqdt = np.sqrt(grid.dt)
        return rho[None, :] * ms.dw2 + (orth * sqdt)[None, :] * ms.z3

    # -- path advancing -----------------------------------------------------

    def _segment(self, ms: _MeshState, curve, k0: int, k1: int,
                 s0: np.ndarray, v0, snaps=()):
        """Advance spot (and Heston variance) from node k0 to k1.

        Arithmetic deliberately mirrors the reference path simulators
        step for step so results match simulate() bitwise. Returns the
        terminal states and any requested node snapshots of s.
        """
        grid = ms.grid
        dt = grid.dt
        a = self.a
        snaps = set(snaps)
        out = {}
        cur = s0
        if k0 in snaps:
            out[k0] = cur
        if self.family in _MULTIPLICATIVE:
            xi = curve(grid.times)
            factor = ms.factor
            dw1 = ms.dw1
            for k in range(k0, k1):
                vol = np.sqrt(np.maximum(xi[k] * factor[:, k], 0.0))
                nxt = cur + a * (1.0 - cur) * dt[k] + vol * cur * dw1[:, k]
                cur = np.where(cur <= 0.0, 0.0, np.maximum(nxt, 0.0))
                if k + 1 in snaps:
                    out[k + 1] = cur
            return cur, None, out
        if self.family == "heston":
            kappa = self.theta["kappa"]
            eta = self.theta["eta"]
            vbar = curve(grid.times)
            dw2 = ms.dw2
            dw1 = ms.dw1
            vcur = v0
            for k in range(k0, k1):
                pos = np.maximum(vcur, 0.0)
                vol = np.sqrt(pos)
                nxt = cur + a * (1.0 - cur) * dt[k] + vol * cur * dw1[:, k]
                cur = np.where(cur <= 0.0, 0.0, np.maximum(nxt, 0.0))
                vcur = vcur + kappa * (vbar[k] - pos) * dt[k] + eta * vol * dw2[:, k]
                if k + 1 in snaps:
                    out[k + 1] = cur
            return cur, vcur, out
        raise InvalidParamError(
            f"{self.family} does not support segment advancing")

    def _rheston_spot(self, ms: _MeshState, curve) -> np.ndarray:
        params = RHestonParams(h=self.theta["h"], eta=self.theta["eta"],
                               kappa=self.theta["kappa"], xi0=curve)
        v, dw2, _ = rheston_variance(params, ms.grid, self.n_paths,
                                     ms.var_ss, backend=self.backend)
        return spot_paths(self._spot, v, dw2, ms.grid, ms.spot_ss)

    # -- pricing ------------------------------------------------------------

    def _quote_vol(self, i: int, quote, s_t: np.ndarray):
        """Model implied vol of one quote given spot values at its expiry.

        Prices the call side for every quote (pathwise parity makes the
        put mean plus forward-minus-strike identical to the call mean)
        with the terminal futures price as a control variate, exploiting
        E[F] = f0. The control typically shrinks the vol noise severalfold
        near the money, which is what makes small-budget refits stable.
        """
        contract = self.surface.contracts[i]
        f = futures_price(s_t, contract.t_opt, contract.t_fut, self.a,
                          self._flat_curves[i])
        k = quote.strike
        payoff = np.maximum(f - k, 0.0)
        cov = np.cov(payoff, f, ddof=1)
        beta = cov[0, 1] / cov[1, 1] if cov[1, 1] > 0.0 else 0.0
        price = float(np.mean(payoff - beta * (f - contract.f0)))
        vol, ok = invert_or_clamp(price, contract.f0, k, contract.t_opt,
                                  is_call=True)
        return ModelVol(vol=vol, ok=ok)

    def atm_vol(self, i: int, curve):
        """Model ATM vol (and inversion flag) for contract i under curve.

        Advances from the last committed checkpoint, so it must be called
        with maturities fitted in ascending order.
        """
        if self.theta is None:
            raise InvalidParamError("set_theta must be called first")
        self.n_inner_evals += 1
        ms = self.meshes[self._mesh_of[i]]
        idx = self._opt_idx[i]
        if self.family == "rheston":
            s = self._rheston_spot(ms, curve)
            s_t = s[:, idx]
        else:
            s_t, _, _ = self._segment(ms, curve, ms.base_idx, idx,
                                      ms.base_s, ms.base_v)
        quote = self.surface.quotes[i][self._atm_idx[i]]
        mv = self._quote_vol(i, quote, s_t)
        return mv.vol, mv.ok

    def commit(self, i: int, curve) -> None:
        """Advance checkpoints through maturity i once its level is fixed."""
        if self.family == "rheston":
            return
        target = self.surface.contracts[i].t_opt
        for ms in self.meshes.values():
            if not any(j > i for j in ms.contract_ids):
                continue
            idx = ms.grid.index_of(target)
            if idx <= ms.base_idx:
                continue
            s, v, _ = self._segment(ms, curve, ms.base_idx, idx,
                                    ms.base_s, ms.base_v)
            ms.base_idx, ms.base_s, ms.base_v = idx, s, v

    def full_smiles(self, curve):
        """Model vols for every quote, aligned with surface.quotes.

        Always re-advances from t=0, ignoring checkpoints, so the result
        is independent of fitting history.
        """
        if self.theta is None:
            raise InvalidParamError("set_theta must be called first")
        smiles: list = [None] * len(self.surface.contracts)
        for ms in self.meshes.values():
            snaps = {self._opt_idx[i] for i in ms.contract_ids}
            if self.family == "rheston":
                s = self._rheston_spot(ms, curve)
                taken = {k: s[:, k] for k in snaps}
            else:
                v0 = None if self.theta.get("v0") is None \
                    else np.full(self.n_paths, float(self.theta["v0"]))
                _, _, taken = self._segment(ms, curve, 0, max(snaps),
                                            np.ones(self.n_paths), v0,
                                            snaps=snaps)
            for i in ms.contract_ids:
                s_t = taken[self._opt_idx[i]]
                smiles[i] = tuple(self._quote_vol(i, q, s_t)
                                  for q in self.surface.quotes[i])
        return smiles
