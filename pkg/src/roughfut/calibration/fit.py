"""Nested calibration: outer search over model parameters, inner refit
of the forward variance curve.

For a candidate parameter set the inner loop places one curve knot at
each option maturity and bisects each level so the model ATM vol matches
the market ATM vol, walking maturities in ascending order. The outer
loop minimizes the weighted smile loss over the remaining parameters
with a small differential-evolution search followed by Nelder-Mead
polish. All simulation noise is frozen per engine, so the objective is
deterministic and results are reproducible from (surface, config).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from ..errors import InvalidParamError
from ..fv_curve import ForwardVarianceCurve
from ..sim.grids import DualMeshPlan, TimeGrid
from .engine import FAMILIES, SmileEngine
from .loss import DEFAULT_CUTOFF, LossBreakdown, loss

DEFAULT_BOUNDS = {
    "rbergomi": {"h": (0.01, 0.95), "eta": (0.05, 5.0), "rho": (-0.999, -0.01)},
    "rheston": {"h": (0.01, 0.95), "eta": (0.05, 5.0), "kappa": (0.01, 20.0),
                "rho": (-0.999, 0.999)},
    "bergomi": {"eta": (0.05, 50.0), "kappa": (0.01, 100.0),
                "rho": (-0.999, 0.999)},
    "heston": {"eta": (0.05, 50.0), "kappa": (0.01, 100.0),
               "v0": (1e-4, 4.0), "rho": (-0.999, 0.999)},
}

PARAM_ORDER = {
    "rbergomi": ("h", "eta", "rho"),
    "rheston": ("h", "eta", "kappa", "rho"),
    "bergomi": ("eta", "kappa", "rho"),
    "heston": ("eta", "kappa", "v0", "rho"),
}


@dataclass(frozen=True)
class CalibrationConfig:
    """Knobs for the nested calibration; defaults match routine use."""

    a: float = 0.5
    n_paths: int = 20000
    seed: int = 0
    backend: str = "hqe"
    corr_mode: str = "scalar"            # "scalar" or "per-maturity"
    cutoff: float = DEFAULT_CUTOFF
    level_bracket: tuple = (1e-4, 4.0)
    level_tol: float = 1e-4              # on |model ATM vol - market ATM vol|
    max_bisect_iter: int = 60
    global_budget: int = 200
    local_budget: int = 100
    mesh: object = (2000, 300)           # (fine, coarse) or single int
    max_seconds: float | None = None
    bounds: dict | None = None           # per-parameter overrides

    def __post_init__(self):
        if self.corr_mode not in ("scalar", "per-maturity"):
            raise InvalidParamError(
                "corr_mode must be 'scalar' or 'per-maturity'")
        if self.global_budget < 1 or self.local_budget < 0:
            raise InvalidParamError("budgets must be positive")
        lo, hi = self.level_bracket
        if not 0.0 < lo < hi:
            raise InvalidParamError("level bracket must satisfy 0 < lo < hi")
        if self.n_paths <= 0:
            raise InvalidParamError("n_paths must be positive")


@dataclass(frozen=True)
class CalibrationResult:
    family: str
    theta: dict
    curve: ForwardVarianceCurve
    breakdown: LossBreakdown
    n_evaluations: int
    wall_time: float
    flags: tuple
    seed: int
    fit_details: dict = field(default_factory=dict)

    @property
    def rho_values(self) -> tuple:
        rho = self.theta["rho"]
        return tuple(rho) if isinstance(rho, tuple) else (rho,)


def build_plan(surface, config: CalibrationConfig):
    """Simulation mesh plan from the surface maturities."""
    mesh = config.mesh
    if isinstance(mesh, TimeGrid) or isinstance(mesh, DualMeshPlan):
        return mesh
    if isinstance(mesh, int):
        mats = surface.maturities
        return TimeGrid.regular(max(mats), mesh, include=mats)
    n_fine, n_coarse = mesh
    return DualMeshPlan.from_maturities(surface.maturities,
                                        n_fine=int(n_fine),
                                        n_coarse=int(n_coarse))


def make_engine(family: str, surface, config: CalibrationConfig) -> SmileEngine:
    return SmileEngine(family, surface, a=config.a,
                       plan=build_plan(surface, config),
                       n_paths=config.n_paths, seed=config.seed,
                       backend=config.backend)


def _initial_curve(surface, engine) -> ForwardVarianceCurve:
    """Warm start: level_i = (market ATM vol at maturity i)^2."""
    knots = surface.maturities
    levels = tuple(engine.atm_target(i)[1] ** 2 for i in range(len(knots)))
    return ForwardVarianceCurve(knots=knots, levels=levels, left_value=None)


def _fit_xi0(engine: SmileEngine, surface, config: CalibrationConfig):
    """Sequential per-maturity root search for the curve levels.

    Each level is solved on config.level_bracket (Illinois regula falsi,
    which keeps a sign bracket at every step) until the model ATM vol is
    within config.level_tol of the market ATM vol. If the target is not
    bracketed the level is pinned at the violated boundary and flagged
    rather than raised, so the outer search can keep moving.
    """
    curve = _initial_curve(surface, engine)
    details = {"iterations": [], "achieved_error": [], "bracket_flags": []}
    lo0, hi0 = config.level_bracket
    for i in range(len(surface.contracts)):
        target = engine.atm_target(i)[1]

        def err(level):
            vol, _ = engine.atm_vol(i, curve.with_level(i, level))
            return vol - target

        lo, hi = lo0, hi0
        flag = None
        e_lo = err(lo)
        iters = 1
        if e_lo >= 0.0:
            level, achieved = lo, e_lo
            flag = "lower" if e_lo > config.level_tol else None
        else:
            e_hi = err(hi)
            iters += 1
            if e_hi <= 0.0:
                level, achieved = hi, e_hi
                flag = "upper" if -e_hi > config.level_tol else None
            else:
                level, achieved = lo, e_lo
                side = 0
                while iters < config.max_bisect_iter:
                    mid = hi - e_hi * (hi - lo) / (e_hi - e_lo)
                    e_mid = err(mid)
                    iters += 1
                    level, achieved = mid, e_mid
                    if abs(e_mid) < config.level_tol:
                        break
                    if e_mid < 0.0:
                        lo, e_lo = mid, e_mid
                        if side == -1:
                            e_hi *= 0.5
                        side = -1
                    else:
                        hi, e_hi = mid, e_mid
                        if side == 1:
                            e_lo *= 0.5
                        side = 1
        curve = curve.with_level(i, level)
        engine.commit(i, curve)
        details["iterations"].append(iters)
        details["achieved_error"].append(achieved)
        details["bracket_flags"].append(flag)
    return curve, details


def fit_xi0(family: str, theta: dict, surface, config: CalibrationConfig,
            engine: SmileEngine | None = None):
    """Refit the forward variance curve for fixed model parameters.

    Returns (curve, details) where details records per-maturity
    iteration counts, achieved ATM errors, and bracket flags ("lower" /
    "upper" when the target escaped the level bracket).
    """
    if engine is None:
        engine = make_engine(family, surface, config)
    engine.set_theta(theta)
    return _fit_xi0(engine, surface, config)


def evaluate_theta(engine: SmileEngine, surface, config: CalibrationConfig,
                   theta: dict):
    """Inner refit plus full-smile loss for one parameter set."""
    engine.set_theta(theta)
    curve, details = _fit_xi0(engine, surface, config)
    breakdown = loss(surface, engine.full_smiles(curve), cutoff=config.cutoff)
    return breakdown, curve, details


def _free_params(family: str, config: CalibrationConfig, n_maturities: int):
    bounds_map = dict(DEFAULT_BOUNDS[family])
    if config.bounds:
        for key, pair in config.bounds.items():
            if key not in bounds_map:
                raise InvalidParamError(
                    f"{key!r} is not a parameter of {family}")
            bounds_map[key] = (float(pair[0]), float(pair[1]))
    names = []
    for name in PARAM_ORDER[family]:
        if name == "rho" and config.corr_mode == "per-maturity":
            names.extend(f"rho_{k}" for k in range(n_maturities))
        else:
            names.append(name)
    lo = np.array([bounds_map[n.split("_")[0]][0] for n in names])
    hi = np.array([bounds_map[n.split("_")[0]][1] for n in names])
    return tuple(names), lo, hi


def _theta_from_vector(family: str, names, x) -> dict:
    theta = {}
    rhos = []
    for name, value in zip(names, x):
        if name.startswith("rho_"):
            rhos.append(float(value))
        else:
            theta[name] = float(value)
    if rhos:
        theta["rho"] = tuple(rhos)
    return theta


class _BudgetExhausted(Exception):
    pass


class _Objective:
    """Counts evaluations, tracks the incumbent, enforces budget/timeout."""

    def __init__(self, engine, surface, config, names, family):
        self.engine = engine
        self.surface = surface
        self.config = config
        self.names = names
        self.family = family
        self.n_evals = 0
        self.best_val = np.inf
        self.best_x = None
        self.best_curve = None
        self.best_breakdown = None
        self.best_details = None
        self.timed_out = False
        self.t0 = time.perf_counter()
        self.limit = np.inf
        self.cache = {}

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        if key in self.cache:
            return self.cache[key]
        if self.n_evals >= self.limit:
            raise _BudgetExhausted
        if (self.config.max_seconds is not None
                and self.elapsed() > self.config.max_seconds
                and self.best_x is not None):
            self.timed_out = True
            raise _BudgetExhausted
        theta = _theta_from_vector(self.family, self.names, x)
        breakdown, curve, details = evaluate_theta(
            self.engine, self.surface, self.config, theta)
        self.n_evals += 1
        val = breakdown.total
        self.cache[key] = val
        if val < self.best_val:
            self.best_val = val
            self.best_x = x.copy()
            self.best_curve = curve
            self.best_breakdown = breakdown
            self.best_details = details
        return val


def _differential_evolution(objective, lo, hi, budget, rng,
                            f_weight=0.7, crossover=0.9):
    """Minimal rand/1/bin differential evolution under an eval budget."""
    dim = len(lo)
    pop_size = int(max(4, min(5 * dim, budget)))
    pop = lo + (hi - lo) * rng.random((pop_size, dim))
    vals = np.full(pop_size, np.inf)
    try:
        for i in range(pop_size):
            vals[i] = objective(pop[i])
        while True:
            for i in range(pop_size):
                idx = rng.permutation(pop_size)[:4]
                idx = [j for j in idx if j != i][:3]
                r1, r2, r3 = idx
                mutant = np.clip(pop[r1] + f_weight * (pop[r2] - pop[r3]),
                                 lo, hi)
                mask = rng.random(dim) < crossover
                mask[rng.integers(dim)] = True
                trial = np.where(mask, mutant, pop[i])
                val = objective(trial)
                if val < vals[i]:
                    pop[i] = trial
                    vals[i] = val
    except _BudgetExhausted:
        pass


def calibrate(family: str, surface, config: CalibrationConfig) -> CalibrationResult:
    """Full nested calibration of one model family to a quote surface.

    Runs a budgeted global search then local polish, both on frozen
    noise. Returns the incumbent parameter set with its refit curve and
    loss breakdown; flags record timeouts and bracket escapes.
    """
    if family not in FAMILIES:
        raise InvalidParamError(f"unknown model family {family!r}")
    t_start = time.perf_counter()
    engine = make_engine(family, surface, config)
    names, lo, hi = _free_params(family, config, len(surface.contracts))
    objective = _Objective(engine, surface, config, names, family)

    objective.limit = config.global_budget
    rng = np.random.default_rng([config.seed, 0xD1F7])
    _differential_evolution(objective, lo, hi, config.global_budget, rng)

    if config.local_budget > 0 and not objective.timed_out:
        objective.limit = config.global_budget + config.local_budget
        try:
            minimize(objective, objective.best_x, method="Nelder-Mead",
                     bounds=list(zip(lo, hi)),
                     options={"maxfev": max(config.local_budget, 2),
                              "xatol": 1e-4, "fatol": 1e-7})
        except _BudgetExhausted:
            pass

    flags = []
    if objective.timed_out:
        flags.append("timeout")
    if any(f is not None for f in objective.best_details["bracket_flags"]):
        flags.append("xi0_bracket")
    theta = _theta_from_vector(family, names, objective.best_x)
    return CalibrationResult(
        family=family,
        theta=theta,
        curve=objective.best_curve,
        breakdown=objective.best_breakdown,
        n_evaluations=objective.n_evals,
        wall_time=time.perf_counter() - t_start,
        flags=tuple(flags),
        seed=config.seed,
        fit_details=objective.best_details,
    )


def calibrate_rho_curve(family: str, surface,
                        config: CalibrationConfig) -> CalibrationResult:
    """Calibration with one spot correlation per maturity bucket."""
    return calibrate(family, surface, replace(config, corr_mode="per-maturity"))
