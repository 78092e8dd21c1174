"""Roughness estimation demo on synthetic log realized variance.

Generates exact fractional Brownian motion at several Hurst exponents,
treats exp(fBm) as a daily realized variance series, and runs the
multi-power moment regression on each. Prints the recovered exponent,
its pooled standard error, and the worst per-power regression R^2.

Run:  python3 scripts/hurst_demo.py --n-days 5000
"""

import argparse
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from roughfut import fbm_series  # noqa: E402
from roughfut.hurst import estimate_h, moments  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-days", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--scale", type=float, default=0.25)
    ap.add_argument("--h", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    args = ap.parse_args()

    print(f"{args.n_days} days per series, seed {args.seed}\n")
    print("  true H   est H    se      min R^2")
    print("  ------   ------   -----   -------")
    for h in args.h:
        rv = np.exp(fbm_series(h, args.n_days, args.seed, args.scale))
        fit = estimate_h(moments(rv))
        worst_r2 = min(line.r_squared for line in fit.lines)
        print(f"  {h:6.2f}   {fit.h:6.3f}   {fit.h_se:.3f}   {worst_r2:7.3f}")
    print("\nAt low H the per-power log-log regressions flatten into the"
          "\nsampling noise of the moment estimates, so R^2 drops even"
          "\nthough the recovered exponent itself stays accurate.")


if __name__ == "__main__":
    main()
