"""Regenerate the bundled synthetic fixtures under data/.

Both fixtures are fully deterministic, so running this script always
reproduces the committed files byte for byte:

* synthetic_rbergomi_quotes.csv + synthetic_rbergomi_meta.json
  An option quote surface whose market vols are a rough Bergomi model's
  own smile, plus the generator settings, a reference fit config, and
  the loss threshold (reference loss at the true parameters times 1.2)
  that a calibration run against the fixture is expected to beat.

* fbm_h010_rv.csv
  A synthetic daily realized variance series, exp of a scaled fractional
  Brownian motion with Hurst exponent 0.1, in the CSV schema accepted by
  `roughfut hurst --rv`.
"""

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from roughfut import ForwardVarianceCurve, fbm_series  # noqa: E402
from roughfut.calibration import (CalibrationConfig, evaluate_theta,  # noqa: E402
                                  make_engine)
from roughfut.market_data import (FuturesContract, OptionQuote,  # noqa: E402
                                  QuoteSurface, save_quote_surface)

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")

GENERATOR = {
    "family": "rbergomi",
    "theta": {"h": 0.25, "eta": 1.5, "rho": -0.35},
    "xi0_flat": 0.05,
    "n_paths": 20_000,
    "mesh": [1200, 300],
    "seed": 42,
}
REFERENCE_FIT = {
    "n_paths": 4000,
    "mesh": [600, 200],
    "global_budget": 30,
    "local_budget": 15,
    "seed": 0,
}
F0 = 60.0
MATURITIES = (0.25, 0.5)
STRIKES_REL = (0.90, 0.95, 1.00, 1.05, 1.10)
THRESHOLD_FACTOR = 1.2


def template_surface(vols):
    contracts, quotes = [], []
    for i, t in enumerate(MATURITIES):
        contracts.append(FuturesContract(ticker=f"CL{i + 1}", t_opt=t,
                                         t_fut=t + 0.05, f0=F0))
        row = [OptionQuote(strike=F0 * r, mkt_vol=vols[i][j], bid_ask=0.004,
                           volume=25.0, is_call=r >= 1.0)
               for j, r in enumerate(STRIKES_REL)]
        quotes.append(tuple(row))
    return QuoteSurface(tuple(contracts), tuple(quotes),
                        valuation_date="fixture")


def make_quote_fixture():
    curve = ForwardVarianceCurve.flat(GENERATOR["xi0_flat"])
    gen_cfg = CalibrationConfig(n_paths=GENERATOR["n_paths"],
                                seed=GENERATOR["seed"],
                                mesh=tuple(GENERATOR["mesh"]))
    template = template_surface([[0.25] * len(STRIKES_REL)
                                 for _ in MATURITIES])
    engine = make_engine(GENERATOR["family"], template, gen_cfg)
    engine.set_theta(GENERATOR["theta"])
    smiles = engine.full_smiles(curve)
    surface = template_surface([[mv.vol for mv in row] for row in smiles])
    quotes_path = os.path.join(DATA_DIR, "synthetic_rbergomi_quotes.csv")
    save_quote_surface(surface, quotes_path)

    fit_cfg = CalibrationConfig(n_paths=REFERENCE_FIT["n_paths"],
                                seed=REFERENCE_FIT["seed"],
                                mesh=tuple(REFERENCE_FIT["mesh"]),
                                global_budget=REFERENCE_FIT["global_budget"],
                                local_budget=REFERENCE_FIT["local_budget"])
    fit_engine = make_engine(GENERATOR["family"], surface, fit_cfg)
    breakdown, _, _ = evaluate_theta(fit_engine, surface, fit_cfg,
                                     GENERATOR["theta"])
    meta = {
        "quotes_file": "synthetic_rbergomi_quotes.csv",
        "generator": GENERATOR,
        "reference_fit": REFERENCE_FIT,
        "reference_loss": breakdown.total,
        "threshold_factor": THRESHOLD_FACTOR,
        "loss_threshold": THRESHOLD_FACTOR * breakdown.total,
        "note": "A calibrate run with the reference_fit settings should "
                "finish with total loss at or below loss_threshold.",
    }
    meta_path = os.path.join(DATA_DIR, "synthetic_rbergomi_meta.json")
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {quotes_path}")
    print(f"wrote {meta_path} (reference loss {breakdown.total:.6f}, "
          f"threshold {meta['loss_threshold']:.6f})")


def make_hurst_fixture(h=0.1, n_days=2500, seed=2, scale=0.25):
    rv = np.exp(fbm_series(h, n_days, seed, scale))
    path = os.path.join(DATA_DIR, "fbm_h010_rv.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("contract,day_index,rv\n")
        for i, value in enumerate(rv):
            fh.write(f"SYN,{i},{float(value)!r}\n")
    print(f"wrote {path} ({n_days} days, H={h}, seed={seed})")


def main():
    os.makedirs(DATA_DIR, exist_ok=True)
    make_quote_fixture()
    make_hurst_fixture()


if __name__ == "__main__":
    main()
