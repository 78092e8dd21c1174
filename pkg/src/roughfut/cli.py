"""Command line front end: simulate, price, samuelson, calibrate, hurst, selftest.

Every command writes plot-ready CSV/JSON plus a run manifest into
``--out-dir``. Exit codes: 0 on success, 2 on configuration errors, 3 on
runtime errors (bad input data, numerical failure); selftest exits 1 when
any check fails. ``--threads`` (default from ROUGHFUT_THREADS) is accepted
for symmetry with batch schedulers and never changes numerical output.
"""

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .calibration import CalibrationConfig, calibrate, make_engine
from .errors import InvalidParamError, RoughFutError
from .fv_curve import ForwardVarianceCurve
from .hurst import DEFAULT_QS, estimate_h, moments, regression_points
from .manifest import RunManifest
from .market_data import (daily_rv_proxies, load_calendar, load_intraday,
                          load_quote_surface)
from .pricing import (FuturesCurve, VanillaSpec, atm_term_structure,
                      model_smile)
from .sim import (BergomiParams, DualMeshPlan, HestonParams, ModelSpec,
                  RBergomiParams, RHestonParams, SpotParams, TimeGrid,
                  simulate)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

FAMILY_FLAGS = {
    "rbergomi": ("h", "eta"),
    "rheston": ("h", "eta", "kappa"),
    "bergomi": ("eta", "kappa"),
    "heston": ("eta", "kappa", "v0"),
}


class CliConfigError(Exception):
    """Invocation problem detected before any real work starts."""


# ---------------------------------------------------------------------------
# small parsing/formatting helpers


def _fmt(value):
    """Deterministic cell formatting: shortest round-trip repr for floats."""
    if isinstance(value, float):
        return repr(value)
    return value


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _float_list(text):
    text = text.strip()
    if not text:
        return []
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _grid_spec(text):
    """Parse ``lo:hi:n`` into n evenly spaced floats, or a comma list."""
    if ":" in str(text):
        parts = str(text).split(":")
        if len(parts) != 3:
            raise CliConfigError(f"expected lo:hi:n, got {text!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1 or hi < lo:
            raise CliConfigError(f"bad grid spec {text!r}")
        return [float(x) for x in np.linspace(lo, hi, n)]
    return _float_list(str(text))


def _parse_mesh(value):
    """``500`` -> single-grid density, ``2000:300`` -> (fine, coarse)."""
    if isinstance(value, int):
        return value
    if isinstance(value, (list, tuple)):
        fine, coarse = value
        return (int(fine), int(coarse))
    text = str(value)
    if ":" in text:
        fine, coarse = text.split(":")
        return (int(fine), int(coarse))
    return int(text)


def _parse_xi0(text):
    """``flat:X`` or a path to a curve JSON file. Returns (curve, path)."""
    text = str(text)
    if text.startswith("flat:"):
        return ForwardVarianceCurve.flat(float(text[5:])), None
    if not os.path.exists(text):
        raise CliConfigError(
            f"--xi0 must be flat:<level> or an existing JSON file, got {text!r}")
    with open(text, "r", encoding="utf-8") as fh:
        return ForwardVarianceCurve.from_json(fh.read()), text


def _require_input(path, flag):
    if path is None:
        raise CliConfigError(f"{flag} is required")
    if not os.path.exists(path):
        raise CliConfigError(f"{flag}: no such file: {path}")
    return path


def _build_variance(args):
    family = args.model
    needed = FAMILY_FLAGS[family]
    missing = [f"--{name}" for name in needed if getattr(args, name) is None]
    if missing:
        raise CliConfigError(
            f"model {family} requires {', '.join(missing)}")
    curve, curve_path = _parse_xi0(args.xi0)
    if family == "rbergomi":
        params = RBergomiParams(h=args.h, eta=args.eta, xi0=curve)
    elif family == "rheston":
        params = RHestonParams(h=args.h, eta=args.eta, kappa=args.kappa,
                               xi0=curve)
    elif family == "bergomi":
        params = BergomiParams(eta=args.eta, kappa=args.kappa, xi0=curve)
    else:
        params = HestonParams(eta=args.eta, kappa=args.kappa, v0=args.v0,
                              vbar=curve)
    return params, curve_path


def _build_model(args, futures=None):
    if args.rho is None:
        raise CliConfigError("--rho is required")
    variance, curve_path = _build_variance(args)
    spot = SpotParams(mean_reversion=args.a, corr=args.rho)
    return ModelSpec(variance=variance, spot=spot, futures=futures), curve_path


def _manifest_config(args):
    """Args as a plain dict, minus plumbing that cannot affect outputs."""
    skip = {"func", "out_dir", "threads", "config"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = value
    return out


def _finish(args, out_dir, inputs, started, extra_files):
    manifest = RunManifest.capture(
        command=[args.func.__name__.removeprefix("cmd_")],
        config=_manifest_config(args),
        seed=getattr(args, "seed", None),
        input_paths=[p for p in inputs if p],
        wall_time_seconds=time.time() - started)
    manifest.write(os.path.join(out_dir, "manifest.json"))
    for name in [*extra_files, "manifest.json"]:
        print(os.path.join(out_dir, name))


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args):
    started = time.time()
    model, curve_path = _build_model(args)
    mesh = _parse_mesh(args.mesh) if args.mesh is not None else None
    maturities = _float_list(args.maturities) if args.maturities else []
    if maturities and (mesh is None or isinstance(mesh, tuple)):
        fine, coarse = (2000, 300) if mesh is None else mesh
        plan = DualMeshPlan.from_maturities(maturities, fine, coarse)
    elif maturities:
        horizon = max(args.horizon, max(maturities))
        plan = TimeGrid.regular(horizon, mesh, include=maturities)
    else:
        if isinstance(mesh, tuple):
            raise CliConfigError(
                "a fine:coarse mesh needs --maturities to split on")
        plan = TimeGrid.regular(args.horizon, 300 if mesh is None else mesh)

    batches = simulate(model, plan, args.n_paths, args.seed,
                       backend=args.backend)
    out_dir = _ensure_out_dir(args)
    rows = []
    for name in sorted(batches):
        batch = batches[name]
        n = batch.n_paths
        for k, t in enumerate(batch.grid.times):
            col = batch.s[:, k]
            rows.append((name, float(t), float(np.mean(col)),
                         float(np.std(col, ddof=1) / np.sqrt(n)) if n > 1
                         else 0.0,
                         float(np.mean(batch.v[:, k]))))
    _write_csv(os.path.join(out_dir, "summary.csv"),
               ("mesh", "t", "mean_s", "se_s", "mean_v"), rows)
    files = ["summary.csv"]

    if args.dump_paths:
        keep = min(args.dump_limit, args.n_paths)
        dump = []
        for name in sorted(batches):
            batch = batches[name]
            for pid in range(keep):
                for k, t in enumerate(batch.grid.times):
                    dump.append((name, pid, float(t),
                                 float(batch.s[pid, k]),
                                 float(batch.v[pid, k])))
        _write_csv(os.path.join(out_dir, "paths.csv"),
                   ("mesh", "path_id", "t", "s", "v"), dump)
        files.append("paths.csv")

    _finish(args, out_dir, [curve_path, args.config], started, files)
    return EXIT_OK


def cmd_price(args):
    started = time.time()
    if args.tfut < args.topt:
        raise CliConfigError("--tfut must be >= --topt")
    futures = FuturesCurve.flat(args.f0)
    model, curve_path = _build_model(args, futures=futures)
    rel_strikes = _grid_spec(args.strike_grid)
    if not rel_strikes:
        raise CliConfigError("--strike-grid produced no strikes")
    specs = [VanillaSpec(t_opt=args.topt, t_fut=args.tfut,
                         strike=r * args.f0, is_call=True)
             for r in rel_strikes]
    mesh = _parse_mesh(args.mesh)
    if isinstance(mesh, tuple):
        raise CliConfigError("price uses a single mesh, not fine:coarse")
    points = model_smile(model, specs, args.n_paths, args.seed,
                         steps_per_year=mesh, backend=args.backend)
    out_dir = _ensure_out_dir(args)
    _write_csv(os.path.join(out_dir, "smile.csv"),
               ("strike", "price", "stderr", "implied_vol", "converged"),
               [(p.strike, p.price, p.stderr, p.model_vol,
                 int(p.inversion_ok)) for p in points])
    _finish(args, out_dir, [curve_path, args.config], started, ["smile.csv"])
    return EXIT_OK


def cmd_samuelson(args):
    started = time.time()
    a_values = _float_list(args.a)
    if not a_values:
        raise CliConfigError("--a needs at least one value")
    t_opts = _grid_spec(args.topt)
    if not t_opts:
        raise CliConfigError("--topt produced no expiries")
    if max(t_opts) > args.tfut:
        raise CliConfigError("every --topt must be <= --tfut")
    if args.rho is None:
        raise CliConfigError("--rho is required")
    variance, curve_path = _build_variance(args)
    futures = FuturesCurve.flat(args.f0)
    model = ModelSpec(variance=variance,
                      spot=SpotParams(mean_reversion=0.0, corr=args.rho),
                      futures=futures)
    mesh = _parse_mesh(args.mesh)
    if isinstance(mesh, tuple):
        raise CliConfigError("samuelson uses a single mesh, not fine:coarse")
    table = atm_term_structure(model, args.tfut, t_opts, a_values,
                               args.n_paths, args.seed, steps_per_year=mesh,
                               backend=args.backend)
    out_dir = _ensure_out_dir(args)
    rows = []
    for a in a_values:
        for t_opt, vol, _price, _stderr in table[float(a)]:
            rows.append((float(a), float(t_opt), float(vol)))
    _write_csv(os.path.join(out_dir, "samuelson.csv"),
               ("a", "t_opt", "atm_vol"), rows)
    _finish(args, out_dir, [curve_path, args.config], started,
            ["samuelson.csv"])
    return EXIT_OK


def cmd_calibrate(args):
    started = time.time()
    quotes_path = _require_input(args.quotes, "--quotes")
    surface = load_quote_surface(quotes_path, valuation_date=args.as_of)
    config = CalibrationConfig(
        a=args.a, n_paths=args.n_paths, seed=args.seed, backend=args.backend,
        corr_mode=args.corr_mode, cutoff=args.cutoff,
        global_budget=args.global_budget, local_budget=args.local_budget,
        mesh=_parse_mesh(args.mesh), max_seconds=args.max_seconds,
        bounds=args.bounds)
    result = calibrate(args.family, surface, config)

    engine = make_engine(args.family, surface, config)
    engine.set_theta(result.theta)
    smiles = engine.full_smiles(result.curve)

    out_dir = _ensure_out_dir(args)
    payload = {
        "family": result.family,
        "theta": {k: (list(v) if isinstance(v, tuple) else v)
                  for k, v in result.theta.items()},
        "curve": {"knots": list(result.curve.knots),
                  "levels": list(result.curve.levels),
                  "left_value": result.curve.left_value},
        "loss": {"total": result.breakdown.total,
                 "per_maturity": list(result.breakdown.per_maturity),
                 "weighted_terms": list(result.breakdown.weighted_terms),
                 "penalty_terms": list(result.breakdown.penalty_terms),
                 "n_quotes": result.breakdown.n_quotes,
                 "n_failed": result.breakdown.n_failed},
        "n_evaluations": result.n_evaluations,
        "flags": list(result.flags),
        "seed": result.seed,
        "fit_details": result.fit_details,
    }
    _write_json(os.path.join(out_dir, "result.json"), payload)
    files = ["result.json"]
    for i, (contract, quotes) in enumerate(zip(surface.contracts,
                                               surface.quotes)):
        rows = [(q.strike, q.mkt_vol, mv.vol, q.volume, q.bid_ask)
                for q, mv in zip(quotes, smiles[i])]
        name = f"smile_{i}.csv"
        _write_csv(os.path.join(out_dir, name),
                   ("strike", "mkt_vol", "model_vol", "volume", "bid_ask"),
                   rows)
        files.append(name)
    print(f"loss={result.breakdown.total!r} evaluations={result.n_evaluations}",
          file=sys.stderr)
    _finish(args, out_dir, [quotes_path, args.config], started, files)
    return EXIT_OK


def _load_rv_csv(path):
    """Daily volatility proxies: header contract,day_index,rv."""
    from .errors import ParseError
    groups = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != \
                ["contract", "day_index", "rv"]:
            raise ParseError("expected header contract,day_index,rv", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError("expected 3 fields", line=lineno)
            try:
                day = int(row[1])
                rv = float(row[2])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            groups.setdefault(row[0].strip(), []).append((day, rv))
    out = {}
    for contract, pairs in groups.items():
        pairs.sort(key=lambda p: p[0])
        out[contract] = np.asarray([rv for _day, rv in pairs])
    return out


def cmd_hurst(args):
    started = time.time()
    qs = tuple(_float_list(args.q)) or DEFAULT_QS
    inputs = []
    if args.rv is not None:
        rv_path = _require_input(args.rv, "--rv")
        inputs.append(rv_path)
        groups = _load_rv_csv(rv_path)
    else:
        intraday_path = _require_input(args.intraday, "--intraday")
        calendar_path = _require_input(args.calendar, "--calendar")
        inputs.extend([intraday_path, calendar_path])
        series = load_intraday(intraday_path)
        calendar = load_calendar(calendar_path)
        proxies = daily_rv_proxies(series, calendar,
                                   min_returns_per_day=args.min_returns)
        groups = {"series": np.asarray([rv for _day, rv in proxies])}

    tables = []
    for contract in sorted(groups):
        rv = groups[contract]
        dmax = min(args.dmax, (len(rv) - 1) // 2)
        if dmax < 1:
            raise CliConfigError(
                f"contract {contract}: series too short for any lag")
        tables.append(moments(rv, qs=qs, deltas=range(1, dmax + 1),
                              contract=contract))
    fit = estimate_h(tables, pool=args.pooled)

    out_dir = _ensure_out_dir(args)
    payload = {
        "h": fit.h,
        "h_se": fit.h_se,
        "pooled": fit.pooled,
        "in_range": fit.in_range,
        "dropped_points": fit.dropped_points,
        "lines": [{"q": ln.q, "slope": ln.slope, "slope_se": ln.slope_se,
                   "r_squared": ln.r_squared, "h": ln.h, "h_se": ln.h_se,
                   "n_points": ln.n_points} for ln in fit.lines],
    }
    _write_json(os.path.join(out_dir, "hurst.json"), payload)
    _write_csv(os.path.join(out_dir, "scatter.csv"),
               ("q", "delta", "log_delta", "log_m", "contract"),
               regression_points(tables))
    print(f"h={fit.h!r} se={fit.h_se!r}", file=sys.stderr)
    _finish(args, out_dir, [*inputs, args.config], started,
            ["hurst.json", "scatter.csv"])
    return EXIT_OK


def cmd_selftest(args):
    from . import selfcheck
    names = [args.only] if args.only else list(selfcheck.ALL_CHECKS)
    unknown = [n for n in names if n not in selfcheck.ALL_CHECKS]
    if unknown:
        raise CliConfigError(
            f"unknown check {unknown[0]!r}; choose from "
            f"{', '.join(selfcheck.ALL_CHECKS)}")
    results = selfcheck.run(names, n_paths=args.n_paths)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        note = " [widened tolerances]" if res.widened else ""
        print(f"[{status}] {res.name} ({res.elapsed:.1f}s): {res.detail}{note}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else 1


# ---------------------------------------------------------------------------
# parser


def _ensure_out_dir(args):
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _add_common(sub, model=True, n_paths_default=100_000):
    sub.add_argument("--out-dir", default=".",
                     help="directory for outputs and the manifest")
    sub.add_argument("--config", default=None,
                     help="JSON file whose entries override flags")
    sub.add_argument("--threads", type=int,
                     default=int(os.environ.get("ROUGHFUT_THREADS", "1")),
                     help="accepted for scheduler symmetry; never changes output")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--n-paths", type=int, default=n_paths_default)
    sub.add_argument("--backend", choices=("hqe", "euler"), default="hqe",
                     help="rough Heston variance scheme")
    if model:
        sub.add_argument("--model", required=True, choices=sorted(FAMILY_FLAGS))
        sub.add_argument("--h", type=float, default=None)
        sub.add_argument("--eta", type=float, default=None)
        sub.add_argument("--kappa", type=float, default=None)
        sub.add_argument("--v0", type=float, default=None)
        sub.add_argument("--rho", type=float, default=None)
        sub.add_argument("--xi0", default="flat:0.04",
                         help="forward variance curve: flat:<level> or JSON path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="roughfut",
        description="Rough volatility models for commodity futures options")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="simulate paths, write node summary")
    _add_common(p)
    p.add_argument("--a", type=float, default=0.5,
                   help="spot mean reversion speed")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--mesh", default=None,
                   help="steps per year: N (single) or FINE:COARSE (dual)")
    p.add_argument("--maturities", default=None,
                   help="comma list; triggers the dual-mesh plan")
    p.add_argument("--dump-paths", action="store_true",
                   help="also write per-path trajectories")
    p.add_argument("--dump-limit", type=int, default=50)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("price", help="price a strike grid off one batch")
    _add_common(p)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--topt", type=float, required=True)
    p.add_argument("--tfut", type=float, required=True)
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--strike-grid", default="0.8:1.2:9",
                   help="relative strikes lo:hi:n or comma list")
    p.add_argument("--mesh", default="500")
    p.set_defaults(func=cmd_price)

    p = subs.add_parser("samuelson",
                        help="ATM vol term structure across mean reversions")
    _add_common(p, n_paths_default=40_000)
    p.add_argument("--a", required=True,
                   help="comma list of mean reversion speeds")
    p.add_argument("--tfut", type=float, required=True)
    p.add_argument("--topt", required=True,
                   help="option expiries lo:hi:n or comma list")
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--mesh", default="300")
    p.set_defaults(func=cmd_samuelson)

    p = subs.add_parser("calibrate", help="fit a model to a quote surface")
    _add_common(p, model=False, n_paths_default=20_000)
    p.add_argument("--quotes", required=True, help="quote surface CSV")
    p.add_argument("--family", required=True, choices=sorted(FAMILY_FLAGS))
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--as-of", default="", help="valuation date label")
    p.add_argument("--mesh", default="2000:300")
    p.add_argument("--global-budget", type=int, default=200)
    p.add_argument("--local-budget", type=int, default=100)
    p.add_argument("--corr-mode", choices=("scalar", "per-maturity"),
                   default="scalar")
    p.add_argument("--cutoff", type=float, default=0.03)
    p.add_argument("--max-seconds", type=float, default=None)
    p.set_defaults(func=cmd_calibrate, bounds=None)

    p = subs.add_parser("hurst", help="estimate the Hurst exponent")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--config", default=None)
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("ROUGHFUT_THREADS", "1")))
    p.add_argument("--rv", default=None,
                   help="daily proxy CSV: contract,day_index,rv")
    p.add_argument("--intraday", default=None,
                   help="intraday CSV: epoch_seconds,log_price")
    p.add_argument("--calendar", default=None,
                   help="trading day file: day_start_epoch,day_end_epoch")
    p.add_argument("--q", default="0.5,1,1.5,2,3")
    p.add_argument("--dmax", type=int, default=31)
    p.add_argument("--min-returns", type=int, default=50)
    p.add_argument("--pooled", action=argparse.BooleanOptionalAction,
                   default=True)
    p.set_defaults(func=cmd_hurst)

    p = subs.add_parser("selftest", help="run the built-in acceptance checks")
    p.add_argument("--only", default=None, help="run a single named check")
    p.add_argument("--n-paths", type=int, default=None,
                   help="override path counts (tolerances widen to match)")
    p.set_defaults(func=cmd_selftest)

    return parser


def _apply_config_file(args):
    path = getattr(args, "config", None)
    if not path:
        return
    if not os.path.exists(path):
        raise CliConfigError(f"--config: no such file: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CliConfigError(f"--config: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise CliConfigError("--config must contain a JSON object")
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise CliConfigError(f"--config: unknown key {key!r}")
        setattr(args, dest, value)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        return code
    try:
        _apply_config_file(args)
        if args.func is cmd_hurst:
            if args.rv is not None and (args.intraday is not None
                                        or args.calendar is not None):
                raise CliConfigError(
                    "--rv and --intraday/--calendar are mutually exclusive")
            if args.rv is None and (args.intraday is None
                                    or args.calendar is None):
                raise CliConfigError(
                    "hurst needs --rv, or both --intraday and --calendar")
        return args.func(args)
    except (CliConfigError, InvalidParamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoughFutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
