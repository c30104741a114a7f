"""Leibniz-rule defect against step size.

The identity is exact, so the defect is pure rounding; it grows roughly like
machine epsilon / eps as eps shrinks. Prints the worst defect per eps decade.
"""

import argparse

import numpy as np

from scalecalc import leibniz_defect
from scalecalc.scale_ops import random_polynomial


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'eps':>8} {'max defect':>12}")
    for k in range(0, 9):
        eps = 0.5 * 10.0**-k
        worst = 0.0
        for _ in range(args.trials):
            f, g = random_polynomial(rng), random_polynomial(rng)
            worst = max(worst, abs(leibniz_defect(f, g, rng.uniform(-1, 1), eps)))
        print(f"{eps:8.1e} {worst:12.3e}")


if __name__ == "__main__":
    main()
