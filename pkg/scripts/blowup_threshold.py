"""Slope of u_hat at the origin near the critical time across power-law exponents k.

Writes one CSV of slopes per k and prints the fitted rate next to the
asymptotic prediction, including the eps^-1 prefactor for k > -1/2 against
both 2k + 1 and 2(2k + 1).
"""

import argparse
from pathlib import Path

from gradstorm import records
from gradstorm.asymptotics import classify_regime
from gradstorm.condmean import blowup_scan, default_epsilon_grid
from gradstorm.profiles import NoiseModel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ks", default="-2,-1.5,-1,-0.75,-0.6,-0.5,0,0.5,1")
    ap.add_argument("--alpha", type=float, default=-1.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--decades", default="4:28", help="m1:m2, eps = -10^(-m/4)")
    ap.add_argument("--out-dir", default="results/blowup")
    args = ap.parse_args()

    m1, m2 = (int(v) for v in args.decades.split(":"))
    grid = default_epsilon_grid(m1, m2)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'k':>6} {'regime':>15} {'exponent':>9} {'predicted':>9} {'prefactor':>10} {'note'}")
    for k in (float(v) for v in args.ks.split(",")):
        scan = blowup_scan(k, args.alpha, NoiseModel(args.sigma), grid)
        rep = classify_regime(k, args.alpha, args.sigma)
        config = {"k": k, "alpha": args.alpha, "sigma": args.sigma, "decades": args.decades}
        records.write_text(out / f"slopes_k{k:+.2f}.csv",
                           records.csv_text(("epsilon", "slope_at_origin"),
                                            zip(scan.epsilon_grid, scan.slope_at_origin), config))
        note = ""
        if rep.regime == "linear-rate":
            note = (f"eps^-1 prefactor {scan.linear_rate_prefactor:.4f} "
                    f"(2k+1 = {2 * k + 1:g}, 2(2k+1) = {2 * (2 * k + 1):g})")
        elif rep.regime == "log-corrected":
            note = (f"log model c = {scan.log_model_prefactor:.4f}, "
                    f"residual {scan.log_model_residual:.1e}")
        elif rep.regime == "suppressed":
            note = f"terminal slope {scan.slope_at_origin[-1]:.6f}"
        pred = "" if rep.exponent is None else f"{rep.exponent:.4f}"
        print(f"{k:6.2f} {rep.regime:>15} {scan.fitted_exponent:9.4f} {pred:>9} "
              f"{scan.fitted_prefactor:10.4f} {note}")


if __name__ == "__main__":
    main()
