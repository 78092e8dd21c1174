"""Built-in verification checks, shared by `roughfut selftest` and the tests.

Each check function exercises one advertised property of the library at a
configurable size and returns a CheckResult with a one-line summary. The
function defaults are the full advertised sizes; ``run()`` applies the
reduced preset used by the CLI selftest, where Monte Carlo tolerances widen
by sqrt(full/actual) and results are flagged as widened.
"""

import contextlib
import inspect
import io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .calibration import (CalibrationConfig, calibrate, calibrate_rho_curve,
                          evaluate_theta, fit_xi0, loss, make_engine)
from .fv_curve import ForwardVarianceCurve
from .hurst import estimate_h, fbm_series, moments
from .market_data import (FuturesContract, OptionQuote, QuoteSurface,
                          save_quote_surface)
from .pricing import (FuturesCurve, VanillaSpec, atm_term_structure,
                      black_price, futures_price, implied_vol, mc_vanilla)
from .sim import (BergomiParams, HestonParams, ModelSpec, RBergomiParams,
                  RHestonParams, SpotParams, TimeGrid, simulate)
from .sim.engine import variance_paths
from .sim.rheston import forward_variance_from_heston, rheston_variance
from .sim.volterra import volterra_paths

REFERENCE_THETA = {
    "rbergomi": {"h": 0.0778, "eta": 2.1617, "rho": -0.3087},
    "rheston": {"h": 0.2774, "eta": 2.0567, "kappa": 5.6187, "rho": -0.2017},
    "bergomi": {"eta": 16.4983, "kappa": 46.6008, "rho": -0.2108},
    "heston": {"eta": 9.9747, "kappa": 42.8659, "v0": 0.0405, "rho": -0.2004},
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float
    widened: bool = False
    data: dict = field(default_factory=dict)


def _variance_params(family, theta, curve):
    if family == "rbergomi":
        return RBergomiParams(h=theta["h"], eta=theta["eta"], xi0=curve)
    if family == "rheston":
        return RHestonParams(h=theta["h"], eta=theta["eta"],
                             kappa=theta["kappa"], xi0=curve)
    if family == "bergomi":
        return BergomiParams(eta=theta["eta"], kappa=theta["kappa"], xi0=curve)
    return HestonParams(eta=theta["eta"], kappa=theta["kappa"],
                        v0=theta["v0"], vbar=curve)


def _surface(mats, strikes_rel, vols, f0=1.0, bid_ask=0.004, volume=10.0):
    contracts, quotes = [], []
    for i, t in enumerate(mats):
        contracts.append(FuturesContract(f"C{i}", t, t + 0.05, f0))
        row = []
        for j, r in enumerate(strikes_rel):
            row.append(OptionQuote(strike=f0 * r, mkt_vol=vols[i][j],
                                   bid_ask=bid_ask, volume=volume,
                                   is_call=r >= 1.0))
        quotes.append(tuple(row))
    return QuoteSurface(tuple(contracts), tuple(quotes), valuation_date="syn")


def _synthesize(family, theta, curve, mats, strikes_rel, config):
    """Quote surface whose market vols are the model's own smile."""
    template = _surface(mats, strikes_rel,
                        [[0.25] * len(strikes_rel) for _ in mats])
    engine = make_engine(family, template, config)
    engine.set_theta(theta)
    smiles = engine.full_smiles(curve)
    vols = [[mv.vol for mv in row] for row in smiles]
    return _surface(mats, strikes_rel, vols)


# ---------------------------------------------------------------------------
# 1. martingale property of the normalized spot


def check_martingale(n_paths=100_000, seed=0):
    started = time.perf_counter()
    grid = TimeGrid.regular(1.0, 300, include=(0.25, 0.5))
    f0, t_fut, a = 100.0, 1.1, 0.5
    futures = FuturesCurve.flat(f0)
    xi0 = ForwardVarianceCurve.flat(0.04)
    worst, worst_at, slowest = 0.0, "", 0.0
    for family, theta in REFERENCE_THETA.items():
        t_model = time.perf_counter()
        spec = ModelSpec(variance=_variance_params(family, theta, xi0),
                         spot=SpotParams(mean_reversion=a, corr=theta["rho"]))
        batch = simulate(spec, grid, n_paths, seed)["single"]
        for t in (0.25, 0.5, 1.0):
            col = batch.s[:, grid.index_of(t)]
            se = float(np.std(col, ddof=1)) / math.sqrt(n_paths)
            z = abs(float(np.mean(col)) - 1.0) / se
            fut = futures_price(col, t, t_fut, a, futures)
            se_f = float(np.std(fut, ddof=1)) / math.sqrt(n_paths)
            z_f = abs(float(np.mean(fut)) - f0) / se_f
            for label, stat in ((f"{family} s@{t}", z),
                                (f"{family} F@{t}", z_f)):
                if stat > worst:
                    worst, worst_at = stat, label
        slowest = max(slowest, time.perf_counter() - t_model)
    return CheckResult(
        name="martingale", passed=worst < 3.0,
        detail=f"max |mean - target| = {worst:.2f} SE at {worst_at} "
               f"(limit 3); slowest model {slowest:.0f}s",
        elapsed=time.perf_counter() - started,
        widened=n_paths < 100_000,
        data={"max_z": worst, "max_model_seconds": slowest})


# ---------------------------------------------------------------------------
# 2. Volterra driver moments


def _cross_cov_quadrature(h, s, t):
    """Cov(W~_s, W~_t) by quadrature with the endpoint singularity removed."""
    if s > t:
        s, t = t, s
    if s == t:
        return s ** (2.0 * h)
    a = h - 0.5

    def integrand(x):
        u = s - x ** (1.0 / (a + 1.0))
        return (t - u) ** a / (a + 1.0)

    val, _ = quad(integrand, 0.0, s ** (a + 1.0), limit=200)
    return 2.0 * h * val


def check_volterra(n_paths=100_000, seed=0):
    started = time.perf_counter()
    widen = math.sqrt(100_000 / n_paths) if n_paths < 100_000 else 1.0
    var_tol, cov_tol = 0.01 * widen, 0.02 * widen
    grid = TimeGrid.regular(1.0, 300)
    worst_var = worst_cov = 0.0
    for h in (0.1, 0.3, 0.5):
        w, _dw2 = volterra_paths(h, grid, n_paths, seed)
        for t in (0.25, 1.0):
            k = grid.index_of(t)
            rel = abs(float(np.var(w[:, k], ddof=1)) / t ** (2 * h) - 1.0)
            worst_var = max(worst_var, rel)
        # Nodes 0.75 and 1.0: at low H the process decorrelates quickly,
        # and for wider gaps the product estimator's own sampling noise
        # at this path count would exceed half the tolerance.
        ks, kt = grid.index_of(0.75), grid.index_of(1.0)
        sample = float(np.mean(w[:, ks] * w[:, kt]))
        oracle = _cross_cov_quadrature(h, 0.75, 1.0)
        worst_cov = max(worst_cov, abs(sample / oracle - 1.0))
    return CheckResult(
        name="volterra",
        passed=worst_var < var_tol and worst_cov < cov_tol,
        detail=f"var err {100 * worst_var:.2f}% (limit {100 * var_tol:.2f}%), "
               f"cross-cov err {100 * worst_cov:.2f}% "
               f"(limit {100 * cov_tol:.2f}%)",
        elapsed=time.perf_counter() - started,
        widened=n_paths < 100_000,
        data={"var_err": worst_var, "cov_err": worst_cov})


# ---------------------------------------------------------------------------
# 3. forward variance identity E[v_t] = xi0(t)


def check_forward_variance(n_paths=100_000, seed=0):
    started = time.perf_counter()
    grid = TimeGrid.regular(1.0, 300)
    nodes = (0.25, 0.5, 1.0)

    curve = ForwardVarianceCurve(knots=(0.3, 1.0), levels=(0.05, 0.035))
    params = RBergomiParams(h=0.1, eta=2.0, xi0=curve)
    v, _, _ = variance_paths(params, grid, n_paths,
                             np.random.SeedSequence(seed))
    worst_z = 0.0
    for t in nodes:
        col = v[:, grid.index_of(t)]
        se = float(np.std(col, ddof=1)) / math.sqrt(n_paths)
        worst_z = max(worst_z, abs(float(np.mean(col)) - curve(t)) / se)

    times = grid.times
    xi_vals = forward_variance_from_heston(v0=0.05, vbar=0.09, kappa=5.0,
                                           h=0.3, times=times)
    solver_curve = ForwardVarianceCurve(knots=tuple(times[1:]),
                                        levels=tuple(xi_vals[1:]),
                                        left_value=float(xi_vals[0]))
    rh = RHestonParams(h=0.3, eta=2.0, kappa=5.0, xi0=solver_curve)
    vr, _, _ = rheston_variance(rh, grid, n_paths, seed, backend="hqe")
    widen = math.sqrt(100_000 / n_paths) if n_paths < 100_000 else 1.0
    rtol = 0.02 * widen
    worst_rel = 0.0
    for t in nodes:
        k = grid.index_of(t)
        worst_rel = max(worst_rel,
                        abs(float(np.mean(vr[:, k])) / xi_vals[k] - 1.0))
    return CheckResult(
        name="forward-variance",
        passed=worst_z < 3.0 and worst_rel < rtol,
        detail=f"rBergomi max {worst_z:.2f} SE (limit 3); rHeston vs Volterra "
               f"solution {100 * worst_rel:.2f}% (limit {100 * rtol:.2f}%)",
        elapsed=time.perf_counter() - started,
        widened=n_paths < 100_000,
        data={"rbergomi_z": worst_z, "rheston_rel": worst_rel})


# ---------------------------------------------------------------------------
# 4. H = 1/2 reductions to the classical models


def check_classical_limits(n_paths=200_000, seed=0):
    started = time.perf_counter()
    widen = math.sqrt(200_000 / n_paths) if n_paths < 200_000 else 1.0
    tol = 0.005 * widen
    grid = TimeGrid.regular(0.5, 300, include=(0.25,))
    futures = FuturesCurve.flat(1.0)
    a, rho = 0.5, -0.3
    flat = ForwardVarianceCurve.flat(0.04)

    def atm_vols(variance):
        model = ModelSpec(variance=variance,
                          spot=SpotParams(mean_reversion=a, corr=rho),
                          futures=futures)
        batch = simulate(model, grid, n_paths, seed)["single"]
        out = {}
        for t in (0.25, 0.5):
            spec = VanillaSpec(t_opt=t, t_fut=t, strike=1.0, is_call=True)
            price, _ = mc_vanilla(batch, spec, a, futures)
            out[t] = implied_vol(price, 1.0, 1.0, t)
        return out

    rb = atm_vols(RBergomiParams(h=0.5, eta=1.5, xi0=flat))
    be = atm_vols(BergomiParams(eta=1.5, kappa=1e-12, xi0=flat))
    rh = atm_vols(RHestonParams(h=0.5, eta=1.0, kappa=2.0, xi0=flat))
    he = atm_vols(HestonParams(eta=1.0, kappa=2.0, v0=0.04, vbar=flat))
    gap_b = max(abs(rb[t] - be[t]) for t in rb)
    gap_h = max(abs(rh[t] - he[t]) for t in rh)
    worst = max(gap_b, gap_h)
    return CheckResult(
        name="classical-limits", passed=worst < tol,
        detail=f"rBergomi vs Bergomi {100 * gap_b:.3f} vp, rHeston vs Heston "
               f"{100 * gap_h:.3f} vp (limit {100 * tol:.2f} vp)",
        elapsed=time.perf_counter() - started,
        widened=n_paths < 200_000,
        data={"bergomi_gap": gap_b, "heston_gap": gap_h})


# ---------------------------------------------------------------------------
# 5. Black-76 inversion roundtrip


def check_black_inversion():
    started = time.perf_counter()
    ratios = np.linspace(0.85, 1.18, 10)
    expiries = np.linspace(0.25, 2.0, 10)
    sigmas = (0.15, 0.25, 0.35, 0.5, 0.8)
    worst = 0.0
    for f in ratios:
        for t in expiries:
            for sigma in sigmas:
                price = black_price(f, 1.0, t, sigma)
                worst = max(worst, abs(implied_vol(price, f, 1.0, t) - sigma))
    worst_zero = 0.0
    for f in ratios:
        intrinsic = max(f - 1.0, 0.0)
        for sigma in (0.0, 1e-9):
            worst_zero = max(worst_zero,
                             abs(black_price(f, 1.0, 1.0, sigma) - intrinsic))
    passed = worst < 1e-8 and worst_zero < 1e-12
    return CheckResult(
        name="black-inversion", passed=passed,
        detail=f"roundtrip max {worst:.1e} (limit 1e-8), sigma->0 intrinsic "
               f"gap {worst_zero:.1e} (limit 1e-12)",
        elapsed=time.perf_counter() - started,
        data={"roundtrip": worst, "intrinsic": worst_zero})


# ---------------------------------------------------------------------------
# 6. calibration loss hand fixtures


def check_loss_fixtures():
    started = time.perf_counter()
    surface = _surface((0.25,), (1.0,), [[0.25]], bid_ask=0.005, volume=1.0)
    mkt = surface.quotes[0][0].mkt_vol
    inside = loss(surface, [[mkt + 0.01]]).total
    beyond = loss(surface, [[mkt + 0.05]]).total
    gap = max(abs(inside - 0.01), abs(beyond - 0.10))
    passed = gap < 1e-15
    return CheckResult(
        name="loss-fixtures", passed=passed,
        detail=f"worked examples reproduced to {gap:.1e} "
               "(0.01 inside cutoff, 0.10 with penalty doubling)",
        elapsed=time.perf_counter() - started,
        data={"gap": gap})


# ---------------------------------------------------------------------------
# 7. nested forward-variance fit on a synthetic surface


def check_xi0_fit(n_paths=100_000, mesh=(1200, 240), seed_gen=5, seed_fit=0):
    started = time.perf_counter()
    widen = math.sqrt(100_000 / n_paths) if n_paths < 100_000 else 1.0
    tol = 0.003 * widen
    mats = (0.25, 0.5, 1.0)
    theta = {"h": 0.25, "eta": 1.5, "rho": -0.4}
    gen_cfg = CalibrationConfig(n_paths=n_paths, seed=seed_gen, mesh=mesh)
    surface = _synthesize("rbergomi", theta, ForwardVarianceCurve.flat(0.09),
                          mats, (1.0,), gen_cfg)
    fit_cfg = CalibrationConfig(n_paths=n_paths, seed=seed_fit, mesh=mesh)
    engine = make_engine("rbergomi", surface, fit_cfg)
    fitted, details = fit_xi0("rbergomi", theta, surface, fit_cfg,
                              engine=engine)
    smiles = engine.full_smiles(fitted)
    worst = max(abs(smiles[i][0].vol - surface.quotes[i][0].mkt_vol)
                for i in range(len(mats)))
    passed = worst < tol and all(f is None for f in details["bracket_flags"])
    return CheckResult(
        name="xi0-fit", passed=passed,
        detail=f"max ATM gap {100 * worst:.3f} vp (limit {100 * tol:.2f} vp), "
               f"levels {tuple(round(v, 4) for v in fitted.levels)} "
               "from flat 0.09",
        elapsed=time.perf_counter() - started,
        widened=n_paths < 100_000,
        data={"atm_gap": worst, "levels": fitted.levels})


# ---------------------------------------------------------------------------
# 8. self-calibration round trip


def check_self_calibration(n_paths=20_000, global_budget=200, local_budget=100,
                           mesh=(1200, 300), loss_factor=1.2, rho_tol=0.1,
                           seed_gen=5, seed_fit=0, include_rho_curve=True,
                           gen_n_paths=None):
    started = time.perf_counter()
    # Two maturities spread apart, with wings wide enough to pin the skew
    # per maturity: a linearized noise analysis shows narrower designs
    # leave (h, eta, rho_i) underdetermined at this path count. The
    # generator runs at several times the fit size so the recovery error
    # is dominated by the fit-side budget under test.
    mats = (0.25, 0.75)
    strikes = (0.85, 0.90, 0.95, 1.0, 1.05, 1.10, 1.15)
    flat = ForwardVarianceCurve.flat(0.04)
    if gen_n_paths is None:
        gen_n_paths = 5 * n_paths
    gen_cfg = CalibrationConfig(n_paths=gen_n_paths, seed=seed_gen, mesh=mesh)
    fit_cfg = CalibrationConfig(n_paths=n_paths, seed=seed_fit, mesh=mesh,
                                global_budget=global_budget,
                                local_budget=local_budget)

    theta_scalar = {"h": 0.25, "eta": 1.8, "rho": -0.25}
    surface = _synthesize("rbergomi", theta_scalar, flat, mats, strikes,
                          gen_cfg)
    engine = make_engine("rbergomi", surface, fit_cfg)
    ref, _, _ = evaluate_theta(engine, surface, fit_cfg, theta_scalar)
    result = calibrate("rbergomi", surface, fit_cfg)
    ratio = result.breakdown.total / ref.total
    ok_scalar = result.breakdown.total <= loss_factor * ref.total

    detail = (f"scalar loss {result.breakdown.total:.4f} = "
              f"{ratio:.2f}x generator loss (limit {loss_factor}x)")
    data = {"scalar_ratio": ratio, "theta": result.theta,
            "scalar_evals": result.n_evaluations}
    ok_curve = True
    if include_rho_curve:
        theta_curve = {"h": 0.25, "eta": 1.8, "rho": (-0.1, -0.3)}
        surface2 = _synthesize("rbergomi", theta_curve, flat, mats, strikes,
                               gen_cfg)
        engine2 = make_engine("rbergomi", surface2, fit_cfg)
        ref2, _, _ = evaluate_theta(engine2, surface2, fit_cfg, theta_curve)
        result2 = calibrate_rho_curve("rbergomi", surface2, fit_cfg)
        ratio2 = result2.breakdown.total / ref2.total
        rho_err = max(abs(a - b) for a, b in zip(result2.theta["rho"],
                                                 theta_curve["rho"]))
        ok_curve = result2.breakdown.total <= loss_factor * ref2.total
        if rho_tol is not None:
            ok_curve = ok_curve and rho_err <= rho_tol
            rho_note = f"limit {rho_tol}"
        else:
            # Per-bucket correlation is not identifiable from a handful of
            # optimizer steps at smoke-test path counts, so reduced runs
            # report the error without gating on it.
            rho_note = "not gated at this budget"
        detail += (f"; rho-curve loss {ratio2:.2f}x, max rho err "
                   f"{rho_err:.3f} ({rho_note})")
        data.update({"curve_ratio": ratio2, "rho_err": rho_err,
                     "rho_hat": result2.theta["rho"]})
    return CheckResult(
        name="self-calibration", passed=ok_scalar and ok_curve,
        detail=detail, elapsed=time.perf_counter() - started,
        widened=n_paths < 20_000 or global_budget < 200, data=data)


# ---------------------------------------------------------------------------
# 9. Samuelson maturity effect


def check_samuelson(n_paths=40_000, seed=0):
    started = time.perf_counter()
    t_near_fut, t_far_fut = 0.4, 0.1   # expiry near/far from the futures date
    t_fut = 0.44
    model = ModelSpec(
        variance=RBergomiParams(h=0.3, eta=0.8,
                                xi0=ForwardVarianceCurve.flat(0.04)),
        spot=SpotParams(mean_reversion=0.0, corr=-0.1),
        futures=FuturesCurve.flat(1.0))
    a_values = (0.0, 0.5, 1.0, 2.0)
    table = atm_term_structure(model, t_fut, (t_far_fut, t_near_fut),
                               a_values, n_paths, seed, steps_per_year=300)

    def vol_and_se(a, t_opt):
        for t, vol, price, stderr in table[a]:
            if t == t_opt:
                d1 = 0.5 * vol * math.sqrt(t)
                vega = math.sqrt(t) * norm.pdf(d1)
                return vol, stderr / vega
        raise KeyError(t_opt)

    spreads = []
    for a in a_values:
        near, se_near = vol_and_se(a, t_near_fut)
        far, se_far = vol_and_se(a, t_far_fut)
        spreads.append((near - far, math.hypot(se_near, se_far)))
    increasing = all(b[0] > a[0] for a, b in zip(spreads, spreads[1:]))
    flat_gap, flat_se = abs(spreads[0][0]), spreads[0][1]
    flat_ok = flat_gap <= 3.0 * flat_se
    return CheckResult(
        name="samuelson", passed=increasing and flat_ok,
        detail="spreads "
               + ", ".join(f"a={a}: {100 * s:.2f} vp"
                           for a, (s, _) in zip(a_values, spreads))
               + f"; a=0 profile gap {100 * flat_gap:.2f} vp "
                 f"(limit {300 * flat_se:.2f} vp)",
        elapsed=time.perf_counter() - started,
        widened=n_paths < 40_000,
        data={"spreads": [s for s, _ in spreads]})


# ---------------------------------------------------------------------------
# 10. Hurst recovery on exact fractional Brownian log-volatility


def check_hurst(n_days=5000, seed=3, scale=0.25):
    started = time.perf_counter()
    parts, all_ok = [], True
    data = {}
    for h in (0.1, 0.3, 0.5):
        rv = np.exp(fbm_series(h, n_days, seed, scale))
        fit = estimate_h(moments(rv))
        err = abs(fit.h - h)
        min_r2 = min(line.r_squared for line in fit.lines)
        consistent = all(abs(line.h - fit.h) <= 2.0 * line.h_se
                         for line in fit.lines)
        ok = err <= 0.03 and min_r2 > 0.95 and consistent
        all_ok = all_ok and ok
        parts.append(f"H={h}: err {err:.3f}, min R2 {min_r2:.3f}"
                     + ("" if ok else " FAIL"))
        data[h] = {"h_hat": fit.h, "err": err, "min_r2": min_r2,
                   "consistent": consistent}
    return CheckResult(
        name="hurst", passed=all_ok,
        detail="; ".join(parts) + " (limits: err 0.03, R2 0.95, 2 SE)",
        elapsed=time.perf_counter() - started,
        data=data)


# ---------------------------------------------------------------------------
# 11. byte-level determinism of the CLI


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _manifest_core(path):
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    raw.pop("wall_time_seconds", None)
    return raw


def check_determinism(n_paths=2000):
    from .cli import main
    started = time.perf_counter()
    mismatches = []
    with tempfile.TemporaryDirectory() as td:
        def run_twice(label, argv_fn, outputs):
            dirs = [os.path.join(td, f"{label}{i}") for i in (0, 1)]
            for i, d in enumerate(dirs):
                sink = io.StringIO()
                with contextlib.redirect_stdout(sink), \
                        contextlib.redirect_stderr(sink):
                    rc = main(argv_fn(d, threads=1 + 3 * i))
                if rc != 0:
                    mismatches.append(f"{label}: exit {rc}")
                    return
            for name in outputs:
                if _read(os.path.join(dirs[0], name)) != \
                        _read(os.path.join(dirs[1], name)):
                    mismatches.append(f"{label}: {name} differs")
            a = _manifest_core(os.path.join(dirs[0], "manifest.json"))
            b = _manifest_core(os.path.join(dirs[1], "manifest.json"))
            if a != b:
                mismatches.append(f"{label}: manifest differs")

        run_twice(
            "sim",
            lambda d, threads: [
                "simulate", "--model", "rbergomi", "--h", "0.3", "--eta",
                "1.5", "--rho", "-0.3", "--xi0", "flat:0.04", "--n-paths",
                str(n_paths), "--seed", "7", "--mesh", "100", "--horizon",
                "0.5", "--threads", str(threads), "--out-dir", d],
            ["summary.csv"])

        quotes = os.path.join(td, "quotes.csv")
        vols = [[0.22, 0.2, 0.21]]
        save_quote_surface(_surface((0.25,), (0.95, 1.0, 1.05), vols,
                                    f0=100.0), quotes)
        run_twice(
            "calibrate",
            lambda d, threads: [
                "calibrate", "--quotes", quotes, "--family", "bergomi",
                "--n-paths", "500", "--seed", "3", "--mesh", "240:120",
                "--global-budget", "4", "--local-budget", "2",
                "--threads", str(threads), "--out-dir", d],
            ["result.json", "smile_0.csv"])

        rv_csv = os.path.join(td, "rv.csv")
        series = np.exp(fbm_series(0.3, 400, 9, 0.25))
        with open(rv_csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("contract,day_index,rv\n")
            for i, value in enumerate(series):
                fh.write(f"CL,{i},{float(value)!r}\n")
        run_twice(
            "hurst",
            lambda d, threads: [
                "hurst", "--rv", rv_csv, "--dmax", "20",
                "--threads", str(threads), "--out-dir", d],
            ["hurst.json", "scatter.csv"])

    passed = not mismatches
    return CheckResult(
        name="determinism", passed=passed,
        detail="simulate/calibrate/hurst byte-identical across reruns and "
               "thread counts" if passed else "; ".join(mismatches),
        elapsed=time.perf_counter() - started,
        data={"mismatches": mismatches})


# ---------------------------------------------------------------------------
# dispatch


ALL_CHECKS = {
    "martingale": check_martingale,
    "volterra": check_volterra,
    "forward-variance": check_forward_variance,
    "classical-limits": check_classical_limits,
    "black-inversion": check_black_inversion,
    "loss-fixtures": check_loss_fixtures,
    "xi0-fit": check_xi0_fit,
    "self-calibration": check_self_calibration,
    "samuelson": check_samuelson,
    "hurst": check_hurst,
    "determinism": check_determinism,
}

REDUCED_PRESET = {
    "martingale": {"n_paths": 20_000},
    "volterra": {"n_paths": 20_000},
    "forward-variance": {"n_paths": 20_000},
    "classical-limits": {"n_paths": 20_000},
    "xi0-fit": {"n_paths": 10_000, "mesh": (800, 240)},
    "self-calibration": {"n_paths": 3000, "global_budget": 40,
                         "local_budget": 20, "mesh": (480, 160),
                         "loss_factor": 2.0, "rho_tol": None},
    "samuelson": {"n_paths": 10_000},
}


def run(names=None, n_paths=None):
    """Run the named checks (all by default) at the reduced preset."""
    results = []
    for name in names or list(ALL_CHECKS):
        fn = ALL_CHECKS[name]
        kwargs = dict(REDUCED_PRESET.get(name, {}))
        if n_paths is not None and \
                "n_paths" in inspect.signature(fn).parameters:
            kwargs["n_paths"] = n_paths
        results.append(fn(**kwargs))
    return results
