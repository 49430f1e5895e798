"""Regenerate tests/data/special_reference.json with mpmath at 50 digits."""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50

GAMMA_ARGS = [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.3, 4.75, 7.0, 10.5, 15.2, 19.9,
              25.0, 40.5, 80.25, -0.25, -0.5, -1.3, -2.75, -3.5, -4.9, 1e-3, 0.999, 5e-6]
DIGAMMA_ARGS = [0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 6.0, 9.99, 10.0, 12.5, 50.0, 200.0,
                -0.5, -1.5, -2.25, -3.9, 1e-3, 0.3]
LAGUERRE_ARGS = [(0.0, 0.5), (1.0, 0.5), (0.3, 0.2), (0.5, 1.3), (-0.75, 1.25),
                 (0.5, -0.25), (2.5, -1.5), (1.7, 0.0)]


def main():
    out = {
        "gamma": [[x, mp.nstr(mp.gamma(x), 30)] for x in GAMMA_ARGS],
        "digamma": [[x, mp.nstr(mp.digamma(x), 30)] for x in DIGAMMA_ARGS],
        "laguerre_at_zero": [
            [n, b, mp.nstr(mp.laguerre(n, b, 0), 30)] for n, b in LAGUERRE_ARGS
        ],
    }
    path = Path(__file__).resolve().parents[1] / "tests" / "data" / "special_reference.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
