"""Hölder exponent of the Weierstrass generator as a function of the ratio a.

For sum a^n cos(b^n pi x) the exponent is -log(a)/log(b). Prints the estimate
next to the exact value for a few (a, b) pairs.
"""

import argparse
import math

import numpy as np

from scalecalc import estimate_exponent, holder_constant, weierstrass_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--b", type=float, default=3.0)
    ap.add_argument("--scales", type=int, default=10)
    ap.add_argument("--probes", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    schedule = 0.1 * 0.5 ** np.arange(args.scales)
    print(f"{'a':>5} {'exact':>7} {'alpha_hat':>9} {'r2':>6} {'c_hat':>8} {'c(alpha)':>9}")
    # a*b > 1 keeps the sum nowhere differentiable with exponent below 1
    for a in np.linspace(1.2 / args.b, 0.85, 6):
        w = weierstrass_curve(a, args.b)
        exact = -math.log(a) / math.log(args.b)
        est = estimate_exponent(w, schedule, args.probes, args.seed, interval=(0, 1))
        c = holder_constant(w, exact, schedule[2:], args.probes, args.seed, interval=(0, 1))
        print(f"{a:5.2f} {exact:7.3f} {est.alpha_hat:9.3f} {est.regression_r2:6.3f} {est.c_hat:8.3f} {c:9.3f}")


if __name__ == "__main__":
    main()
