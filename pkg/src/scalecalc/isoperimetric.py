"""Stationarity test for isoperimetric problems with scale derivatives.

Given a candidate curve ``y`` for

    extremize  I(y) = int_a^b f(x, y, sd y) dx
    subject to G(y) = int_a^b g(x, y, sd y) dx = K,  y(a) = a0,  y(b) = b0,

:func:`verify_iso_extremal` checks that ``y`` is not an extremal of ``G`` and
that both residual sup-norms have finite limits, estimates a real multiplier
``lam`` and confirms that the bracketed residual of ``L = f - lam g``
vanishes on the grid.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateConstraintError, ParameterError, PreconditionError
from .expr import Binary, Const, Expr, as_expr, simplify
from .scale_ops import Curve
from .variational import (
    DEFAULT_CONV_TOL,
    DEFAULT_ZERO_TOL,
    EpsilonSchedule,
    LimitEstimate,
    QuadratureConfig,
    bracket_field,
    bracket_samples,
    first_variation,
    functional_value,
    residual_samples,
)

EXTREMAL_CONFIRMED = "extremal_confirmed"
STATIONARITY_VIOLATED = "stationarity_violated"
HYPOTHESES_FAILED = "hypotheses_failed"
INCONCLUSIVE = "inconclusive"
VERDICTS = (EXTREMAL_CONFIRMED, STATIONARITY_VIOLATED, HYPOTHESES_FAILED, INCONCLUSIVE)

DEFAULT_GRID_POINTS = 201


@dataclass(frozen=True, eq=False)
class IsoProblem:
    f: Expr
    g: Expr
    a: float
    b: float
    a0: float
    b0: float
    K: complex
    schedule: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)
    grid: np.ndarray = None
    zero_tol: float = DEFAULT_ZERO_TOL
    conv_tol: float = DEFAULT_CONV_TOL
    boundary_tol: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "f", as_expr(self.f))
        object.__setattr__(self, "g", as_expr(self.g))
        if not self.a < self.b:
            raise ParameterError(f"need a < b, got [{self.a}, {self.b}]")
        if not np.isfinite(complex(self.K)):
            raise ParameterError("K must be finite")
        object.__setattr__(self, "K", complex(self.K))
        grid = self.grid
        if grid is None:
            grid = np.linspace(self.a, self.b, DEFAULT_GRID_POINTS)
        grid = np.asarray(grid, dtype=float)
        # the sup-norm hypothesis is taken over the closed interval, so endpoints are allowed
        if grid.ndim != 1 or grid.size == 0:
            raise ParameterError("grid must be a non-empty 1-D array")
        if grid.min() < self.a or grid.max() > self.b:
            raise ParameterError(f"grid must lie in [{self.a}, {self.b}]")
        object.__setattr__(self, "grid", grid)

    def replace(self, **changes) -> "IsoProblem":
        return dataclasses.replace(self, **changes)


class HypothesisCheck(NamedTuple):
    h1: bool
    h2: bool
    diagnostics: dict


@dataclass(frozen=True)
class IsoReport:
    lam: Optional[float]
    residual_sup_norm_L: Optional[float]
    hypothesis1_ok: bool
    hypothesis2_ok: bool
    constraint_gap: float
    verdict: str
    diagnostics: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True, eq=False)
class _Analysis:
    samples_f: np.ndarray
    samples_g: np.ndarray
    brackets_f: list
    brackets_g: list
    sup_f: LimitEstimate
    sup_g: LimitEstimate


def _analyse(p: IsoProblem, y: Curve) -> _Analysis:
    samples_f = residual_samples(p.f, y, p.grid, p.schedule)
    samples_g = residual_samples(p.g, y, p.grid, p.schedule)

    def brackets(samples):
        return bracket_samples(samples, p.schedule, p.zero_tol, p.conv_tol)

    sup_f, sup_g = (
        brackets(np.max(np.abs(s), axis=1))[0] for s in (samples_f, samples_g)
    )
    return _Analysis(samples_f, samples_g, brackets(samples_f), brackets(samples_g), sup_f, sup_g)


def _check_boundary(p: IsoProblem, y: Curve):
    ya, yb = y(p.a), y(p.b)
    if abs(ya - p.a0) > p.boundary_tol or abs(yb - p.b0) > p.boundary_tol:
        raise PreconditionError(
            f"boundary values y(a)={ya:.17g}, y(b)={yb:.17g} do not match a0={p.a0}, b0={p.b0}"
        )


def constraint_value(p: IsoProblem, y: Curve) -> complex:
    """``G(y)`` at the smallest step of the schedule."""
    return functional_value(p.g, y, p.a, p.b, p.schedule.smallest, p.quad)


def check_constraint(p: IsoProblem, y: Curve) -> float:
    """``|G(y) - K|``. Raises :class:`PreconditionError` on a boundary mismatch."""
    _check_boundary(p, y)
    return abs(constraint_value(p, y) - p.K)


def _g_status(analysis):
    brackets = analysis.brackets_g
    if any(b.converged and not b.is_zero for b in brackets):
        return "not_extremal"
    if not all(b.converged for b in brackets):
        return "inconclusive"
    return "extremal"


def _hypotheses(analysis) -> HypothesisCheck:
    status = _g_status(analysis)
    h1 = status == "not_extremal"
    sups = (analysis.sup_f, analysis.sup_g)
    h2 = all(s.converged for s in sups)
    # an infinite limit settles hypothesis 2 negatively; an oscillating one does not
    h2_undecided = not h2 and not any(s.diverging for s in sups)
    diagnostics = {
        "g_status": status,
        "sup_f": analysis.sup_f,
        "sup_g": analysis.sup_g,
        "inconclusive": status == "inconclusive" or h2_undecided,
    }
    return HypothesisCheck(h1, h2, diagnostics)


def check_hypotheses(p: IsoProblem, y: Curve) -> HypothesisCheck:
    """``h1``: ``y`` is not an extremal of ``G``; ``h2``: both residual sup-norms converge.

    ``diagnostics["inconclusive"]`` is set when either answer rests on an
    unconverged bracket that is not clearly diverging.
    """
    return _hypotheses(_analyse(p, y))


def _multiplier(analysis, zero_tol) -> float:
    r_f = np.array([b.value for b in analysis.brackets_f])
    r_g = np.array([b.value for b in analysis.brackets_g])
    denom = float(np.sum(np.abs(r_g) ** 2))
    if denom <= zero_tol**2:
        raise DegenerateConstraintError(
            "bracketed constraint residual vanishes on the grid; no multiplier exists"
        )
    return float(np.sum(r_f * np.conj(r_g)).real / denom)


def estimate_multiplier(p: IsoProblem, y: Curve) -> float:
    """Real least-squares ``lam`` minimizing ``sum |r_f - lam r_g|^2`` over the bracketed residuals."""
    return _multiplier(_analyse(p, y), p.zero_tol)


def combined_lagrangian(p: IsoProblem, lam: float) -> Expr:
    """``f - lam g``, simplified."""
    return simplify(Binary("sub", p.f, Binary("mul", Const(lam), p.g)))


def verify_iso_extremal(p: IsoProblem, y: Curve, tol=1e-6) -> IsoReport:
    """Run the full stationarity check and return an :class:`IsoReport`.

    ``extremal_confirmed`` requires both hypotheses, a constraint gap and an
    ``L``-residual sup-norm at most ``tol``.
    """
    gap = check_constraint(p, y)
    analysis = _analyse(p, y)
    h1, h2, hyp = _hypotheses(analysis)
    diagnostics = {
        "constraint_value": constraint_value(p, y),
        "g_status": hyp["g_status"],
        "sup_f": analysis.sup_f,
        "sup_g": analysis.sup_g,
    }

    def report(verdict, lam=None, sup=None):
        return IsoReport(lam, sup, h1, h2, float(gap), verdict, diagnostics)

    if hyp["inconclusive"]:
        return report(INCONCLUSIVE)
    if not (h1 and h2):
        return report(HYPOTHESES_FAILED)

    lam = _multiplier(analysis, p.zero_tol)
    L = combined_lagrangian(p, lam)
    brackets_L = bracket_field(L, y, p.grid, p.schedule, p.zero_tol, p.conv_tol)
    sup = max(abs(b.value) for b in brackets_L)
    diagnostics["L"] = L
    diagnostics["unconverged_points"] = int(sum(not b.converged for b in brackets_L))
    if diagnostics["unconverged_points"]:
        return report(INCONCLUSIVE, lam, sup)
    if sup <= tol and gap <= tol:
        return report(EXTREMAL_CONFIRMED, lam, sup)
    diagnostics["constraint_violated"] = gap > tol
    return report(STATIONARITY_VIOLATED, lam, sup)


# ---------------------------------------------------------------------------
# the two-parameter family used to derive the multiplier rule


def perturbed_curve(y: Curve, eta1: Curve, eta2: Curve, e1, e2) -> Curve:
    return Curve.linear_combination((1.0, y), (e1, eta1), (e2, eta2))


def two_parameter_variation_probe(p: IsoProblem, y: Curve, eta1: Curve, eta2: Curve, e1, e2, eps=None):
    """``(I(y + e1 eta1 + e2 eta2), G(y + e1 eta1 + e2 eta2))`` at step ``eps``.

    ``eps`` defaults to the smallest schedule step.
    """
    eps = p.schedule.smallest if eps is None else eps
    y_hat = perturbed_curve(y, eta1, eta2, e1, e2)
    return (
        functional_value(p.f, y_hat, p.a, p.b, eps, p.quad),
        functional_value(p.g, y_hat, p.a, p.b, eps, p.quad),
    )


def bracketed_partials(p: IsoProblem, y: Curve, eta1: Curve, eta2: Curve) -> np.ndarray:
    """2x2 array of brackets ``[[dI/de1, dG/de1], [dI/de2, dG/de2]]`` at ``e1 = e2 = 0``."""
    out = np.empty((2, 2), dtype=object)
    for i, eta in enumerate((eta1, eta2)):
        for j, lagrangian in enumerate((p.f, p.g)):
            samples = [first_variation(lagrangian, y, eta, p.a, p.b, e, p.quad) for e in p.schedule.values]
            out[i, j] = bracket_samples(samples, p.schedule, p.zero_tol, p.conv_tol)[0]
    return out


def variation_determinant(p: IsoProblem, y: Curve, eta1: Curve, eta2: Curve) -> complex:
    """``[dI/de1][dG/de2] - [dG/de1][dI/de2]``; zero at a constrained extremal."""
    m = bracketed_partials(p, y, eta1, eta2)
    return complex(m[0, 0].value * m[1, 1].value - m[0, 1].value * m[1, 0].value)


__all__ = [
    "EXTREMAL_CONFIRMED",
    "HYPOTHESES_FAILED",
    "INCONCLUSIVE",
    "STATIONARITY_VIOLATED",
    "VERDICTS",
    "HypothesisCheck",
    "IsoProblem",
    "IsoReport",
    "bracketed_partials",
    "check_constraint",
    "check_hypotheses",
    "combined_lagrangian",
    "constraint_value",
    "estimate_multiplier",
    "perturbed_curve",
    "two_parameter_variation_probe",
    "variation_determinant",
    "verify_iso_extremal",
]
