"""Vanishing-noise limit: |u_hat(sigma) - v| along sigma = 2^0 .. 2^-10 and fluid residuals.

For Gaussian data the gap is compared with the exact closed-form difference.
"""

import argparse

import numpy as np

from gradstorm import gaslimit
from gradstorm.closedform import gaussian_gap
from gradstorm.profiles import NoiseModel, parse_density, parse_velocity


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--density", default="gaussian:1")
    ap.add_argument("--velocity", default="linear:-1")
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--x", type=float, default=1.0)
    args = ap.parse_args()

    f, v = parse_density(args.density), parse_velocity(args.velocity)
    conv = gaslimit.sigma_convergence(f, v, args.t, args.x)
    exact = args.density.startswith("gaussian") and args.velocity.startswith("linear")
    print(f"v = {conv.limit:.15g}; fitted order {conv.fitted_order:.3f}; "
          f"monotone {conv.monotone}")
    for s, u, e in conv.rows():
        extra = ""
        if exact:
            r = float(args.density.split(":")[1])
            alpha = float(args.velocity.split(":")[1])
            extra = f"  exact gap {abs(gaussian_gap(alpha, r, s, args.t, args.x)):.6e}"
        print(f"sigma {s:10.6f}  u_hat {u:.15f}  |gap| {e:.6e}{extra}")

    noise = NoiseModel(1.0)
    print("\n     t      x   continuity  momentum  Fokker-Planck   Lambda")
    for t in np.linspace(0.3, 1.5, 5):
        for x in np.linspace(-1.2, 1.2, 5):
            c = gaslimit.continuity_residual(t, x, f, v, noise)
            m = gaslimit.momentum_residual(t, x, f, v, noise)
            p = gaslimit.fokker_planck_residual(t, x, 0.25, f, v, noise)
            print(f"{t:6.2f} {x:6.2f} {c.normalized:11.2e} {m.normalized:9.2e} "
                  f"{p.normalized:14.2e} {m.extra['Lambda']:9.4f}")


if __name__ == "__main__":
    main()
