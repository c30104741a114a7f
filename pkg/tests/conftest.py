from pathlib import Path

import numpy as np
import pytest

from scalecalc import Curve, IsoProblem, parse

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

KINK_F = "(v - sd(abs(x)))^2"
KINK_G = "x + y^2"


@pytest.fixture
def abs_curve():
    return Curve.closed_form(parse("abs(x)"))


@pytest.fixture
def kink_problem():
    return IsoProblem(f=parse(KINK_F), g=parse(KINK_G), a=-1.0, b=1.0, a0=1.0, b0=1.0, K=2 / 3)


@pytest.fixture
def problems_dir():
    return PROBLEMS


def abs_closed_form(x, eps):
    """Piecewise closed form of the scale derivative of |x|, written out by hand."""
    if x >= eps:
        return 1.0 + 0j
    if x <= -eps:
        return -1.0 + 0j
    if x >= 0:
        return complex(x / eps, -(eps - x) / eps)
    return complex(x / eps, -(eps + x) / eps)


def random_admissible_pair(rng):
    """Two endpoint-vanishing variations on [-1, 1]: one smooth, one with a kink."""
    c = [float(t) for t in rng.uniform(-1, 1, 3)]
    eta1 = Curve.closed_form(parse(f"(1 - x^2)*({c[0]!r} + {c[1]!r}*x + {c[2]!r}*x^2)"))
    k = float(rng.uniform(0.5, 2.0)) * (1 if rng.random() < 0.5 else -1)
    eta2 = Curve.closed_form(parse(f"{k!r}*(1 - abs(x))"))
    return eta1, eta2


def cosh_samples(lo=-1.5, hi=1.5, n=30001):
    grid = np.linspace(lo, hi, n)
    return Curve.sampled(grid, np.cosh(grid))


# acceptance lines collected by test_acceptance.py, shown after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
