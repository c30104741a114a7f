"""Walk through the |x| isoperimetric example and print every intermediate number.

    python scripts/kink_example.py [--grid-points 201]
"""

import argparse

import numpy as np

from scalecalc import Curve, IsoProblem, bracket_field, el_residual, functional_value, parse, verify_iso_extremal
from scalecalc.variational import EpsilonSchedule


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid-points", type=int, default=201)
    args = ap.parse_args()

    f, g = parse("(v - sd(abs(x)))^2"), parse("x + y^2")
    y = Curve.closed_form(parse("abs(x)"))
    grid = np.linspace(-1, 1, args.grid_points)
    schedule = EpsilonSchedule()

    print(f"{'eps':>12} {'sup|r_f|':>10} {'sup|r_g|':>10} {'G(y)':>20}")
    for eps in schedule.values:
        rf = el_residual(f, y, grid, eps).sup_norm()
        rg = el_residual(g, y, grid, eps).sup_norm()
        G = functional_value(g, y, -1, 1, eps)
        print(f"{eps:12.6g} {rf:10.3g} {rg:10.6f} {G.real:20.16f}")

    bg = bracket_field(g, y, grid, schedule)
    err = max(abs(b.value - 2 * abs(x)) for b, x in zip(bg, grid))
    print(f"\nbracketed constraint residual vs 2|x|: max err {err:.2e}")

    p = IsoProblem(f=f, g=g, a=-1, b=1, a0=1, b0=1, K=2 / 3, schedule=schedule, grid=grid)
    report = verify_iso_extremal(p, y)
    print(f"lambda = {report.lam}")
    print(f"hypotheses: {report.hypothesis1_ok}, {report.hypothesis2_ok}")
    print(f"constraint gap = {report.constraint_gap:.3e}")
    print(f"verdict: {report.verdict}")


if __name__ == "__main__":
    main()
