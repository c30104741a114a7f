import numpy as np
import pytest

from conftest import cosh_samples, random_admissible_pair
from scalecalc import (
    Curve,
    DegenerateConstraintError,
    EpsilonSchedule,
    IsoProblem,
    PreconditionError,
    check_constraint,
    check_hypotheses,
    estimate_multiplier,
    parse,
    two_parameter_variation_probe,
    variation_determinant,
    verify_iso_extremal,
)
from scalecalc.isoperimetric import (
    EXTREMAL_CONFIRMED,
    HYPOTHESES_FAILED,
    STATIONARITY_VIOLATED,
    bracketed_partials,
    combined_lagrangian,
)
from scalecalc.variational import bracket_field, functional_value, variation_derivative


def cf(text):
    return Curve.closed_form(parse(text))


def line_problem(scale=1.0):
    """f = v^2 + 2y^2, g = scale*(x + y^2), y = x: a constrained extremal with lam = 2/scale."""
    g = "x + y^2" if scale == 1.0 else f"{scale!r}*(x + y^2)"
    return IsoProblem(f=parse("v^2 + 2*y^2"), g=parse(g), a=-1, b=1, a0=-1, b0=1, K=scale * 2 / 3)


def scan_multiplier(p, y, lo=-10.0, hi=10.0, step=1e-4):
    """argmin over a lam lattice of sum |r_f - lam r_g|^2 on the bracketed residuals."""
    r_f = np.array([b.value for b in bracket_field(p.f, y, p.grid, p.schedule, p.zero_tol, p.conv_tol)])
    r_g = np.array([b.value for b in bracket_field(p.g, y, p.grid, p.schedule, p.zero_tol, p.conv_tol)])
    lams = lo + step * np.arange(int(round((hi - lo) / step)) + 1)
    best, best_cost = None, np.inf
    for chunk in np.array_split(lams, 50):
        cost = np.sum(np.abs(r_f[None, :] - chunk[:, None] * r_g[None, :]) ** 2, axis=1)
        k = int(np.argmin(cost))
        if cost[k] < best_cost:
            best, best_cost = chunk[k], cost[k]
    return float(best)


def test_constraint_examples(kink_problem, abs_curve):
    assert check_constraint(kink_problem, abs_curve) < 1e-6
    assert check_constraint(kink_problem.replace(K=1), abs_curve) == pytest.approx(1 / 3, abs=1e-6)
    assert check_constraint(kink_problem.replace(g=parse("0"), K=0), abs_curve) == 0


def test_constraint_boundary_mismatch(kink_problem):
    with pytest.raises(PreconditionError):
        check_constraint(kink_problem, cf("x"))


def test_problem_validation():
    with pytest.raises(ValueError):
        IsoProblem(f="v", g="y", a=1, b=-1, a0=0, b0=0, K=0)
    with pytest.raises(ValueError):
        IsoProblem(f="v", g="y", a=-1, b=1, a0=0, b0=0, K=0, grid=[0.0, 2.0])


def test_hypotheses_examples(kink_problem, abs_curve):
    h1, h2, diag = check_hypotheses(kink_problem, abs_curve)
    assert h1 and h2 and not diag["inconclusive"]
    assert diag["sup_f"].is_zero and diag["sup_g"].value == pytest.approx(2, abs=1e-4)

    same = kink_problem.replace(g=kink_problem.f)
    h1, _, _ = check_hypotheses(same, abs_curve)
    assert not h1

    p = IsoProblem(f=parse("v^2"), g=parse("x + y^2"), a=-1, b=1, a0=-1, b0=1, K=2 / 3)
    h1, h2, _ = check_hypotheses(p, cf("x"))
    assert h1 and h2


def test_multiplier_examples(kink_problem, abs_curve):
    assert abs(estimate_multiplier(kink_problem, abs_curve)) < 1e-6
    y = cf("x^2 + 0.3*sin(3*x)")
    for c in (3.0, -0.5):
        p = IsoProblem(f=parse(f"{c!r}*(x + y^2 + v^2)"), g=parse("x + y^2 + v^2"), a=-1, b=1, a0=0, b0=0, K=0)
        assert estimate_multiplier(p, y) == pytest.approx(c, abs=1e-8)


def test_multiplier_sampled_cosh_matches_scan():
    y = cosh_samples()
    p = IsoProblem(f=parse("v^2 + y^2"), g=parse("y^2"), a=-1, b=1, a0=np.cosh(1), b0=np.cosh(1), K=0,
                   grid=np.linspace(-1, 1, 41))
    lam = estimate_multiplier(p, y)
    assert abs(lam - scan_multiplier(p, y)) <= 1e-4


def test_multiplier_degenerate(abs_curve, kink_problem):
    with pytest.raises(DegenerateConstraintError):
        estimate_multiplier(kink_problem.replace(g=parse("0")), abs_curve)


def test_verify_examples(kink_problem, abs_curve):
    report = verify_iso_extremal(kink_problem, abs_curve)
    assert report.verdict == EXTREMAL_CONFIRMED
    assert abs(report.lam) < 1e-6 and report.residual_sup_norm_L < 1e-6

    # y = x^2 meets the boundary values but G(y) = 2/5
    report = verify_iso_extremal(kink_problem, cf("x^2"))
    assert report.verdict != EXTREMAL_CONFIRMED
    assert report.constraint_gap == pytest.approx(2 / 3 - 2 / 5, abs=1e-6)

    report = verify_iso_extremal(kink_problem.replace(g=parse("0"), K=0), abs_curve)
    assert report.verdict == HYPOTHESES_FAILED and not report.hypothesis1_ok


def test_verify_flags_infeasible_constraint(kink_problem, abs_curve):
    report = verify_iso_extremal(kink_problem.replace(K=1), abs_curve)
    assert report.verdict == STATIONARITY_VIOLATED
    assert report.diagnostics["constraint_violated"]


def test_verify_nonzero_multiplier():
    report = verify_iso_extremal(line_problem(), cf("x"))
    assert report.verdict == EXTREMAL_CONFIRMED
    assert report.lam == pytest.approx(2, abs=1e-9)


@pytest.mark.parametrize("c", [2.0, -3.0, 0.25])
def test_multiplier_scales_with_constraint(c):
    base = verify_iso_extremal(line_problem(), cf("x"))
    scaled = verify_iso_extremal(line_problem(c), cf("x"))
    assert scaled.lam == pytest.approx(base.lam / c, rel=1e-9)
    assert abs(scaled.residual_sup_norm_L - base.residual_sup_norm_L) <= 1e-9


def test_unconstrained_extremal_gets_zero_multiplier():
    y = cf("0.5 + 0.25*x")
    p = IsoProblem(f=parse("v^2"), g=parse("y"), a=-1, b=1, a0=0.25, b0=0.75, K=1.0)
    report = verify_iso_extremal(p, y)
    assert report.verdict == EXTREMAL_CONFIRMED and abs(report.lam) <= 1e-6


def test_combined_lagrangian():
    p = line_problem()
    L = combined_lagrangian(p, 2.0)
    y = cf("x")
    assert all(b.is_zero for b in bracket_field(L, y, p.grid))


def test_probe_base_point(kink_problem, abs_curve):
    eta1, eta2 = random_admissible_pair(np.random.default_rng(1))
    I0, G0 = two_parameter_variation_probe(kink_problem, abs_curve, eta1, eta2, 0.0, 0.0)
    eps = kink_problem.schedule.smallest
    assert I0 == functional_value(kink_problem.f, abs_curve, -1, 1, eps, kink_problem.quad)
    assert G0 == functional_value(kink_problem.g, abs_curve, -1, 1, eps, kink_problem.quad)


def test_probe_constraint_moves_at_first_order(kink_problem, abs_curve):
    eta = cf("1 - x^2")
    e = 1e-4
    _, g_plus = two_parameter_variation_probe(kink_problem, abs_curve, eta, eta, 0.0, e)
    _, g_minus = two_parameter_variation_probe(kink_problem, abs_curve, eta, eta, 0.0, -e)
    slope = (g_plus - g_minus) / (2 * e)
    # d/de int (x + (|x| + e(1 - x^2))^2) = int 2|x|(1 - x^2) = 1
    assert slope == pytest.approx(1.0, abs=1e-4)


def test_probe_matches_variation_derivative():
    p = IsoProblem(f=parse("sin(x)*v + y^3"), g=parse("y"), a=-1, b=1, a0=np.cos(1), b0=np.cos(1), K=0)
    y, eta = cf("cos(x)"), cf("(1 - x^2)*(x + 0.2)")
    zero = cf("0")
    for e in (1e-2, 1e-3):
        i_plus, _ = two_parameter_variation_probe(p, y, eta, zero, e, 0.0)
        i_minus, _ = two_parameter_variation_probe(p, y, eta, zero, -e, 0.0)
        F, _ = variation_derivative(p.f, y, eta, -1, 1, p.schedule.smallest, p.quad)
        assert abs((i_plus - i_minus) / (2 * e) - F) <= 10 * e * e


@pytest.mark.parametrize("seed", range(3))
def test_determinant_vanishes(kink_problem, abs_curve, seed):
    eta1, eta2 = random_admissible_pair(np.random.default_rng(seed))
    assert abs(variation_determinant(kink_problem, abs_curve, eta1, eta2)) < 1e-5


def test_determinant_vanishes_with_nonzero_multiplier():
    p, y = line_problem(), cf("x")
    eta1, eta2 = random_admissible_pair(np.random.default_rng(7))
    m = bracketed_partials(p, y, eta1, eta2)
    assert abs(m[0, 1].value) > 1e-3  # G actually moves
    assert abs(variation_determinant(p, y, eta1, eta2)) < 1e-5


def test_determinant_nonzero_off_extremal():
    p = line_problem()
    y = cf("x^3")
    eta1, eta2 = cf("x*(1 - x^2)"), cf("x^3*(1 - x^2)")
    assert abs(variation_determinant(p, y, eta1, eta2)) > 1e-3


def test_custom_schedule_and_grid(kink_problem, abs_curve):
    p = kink_problem.replace(schedule=EpsilonSchedule(0.05, 0.5, 6), grid=np.linspace(-1, 1, 11))
    assert verify_iso_extremal(p, abs_curve).verdict == EXTREMAL_CONFIRMED
