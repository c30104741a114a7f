"""Functionals, Euler-Lagrange residuals and the bracket (eps -> 0) filter.

The bracket of an eps-family is estimated from samples on a geometric
schedule: the last three samples are extrapolated to eps = 0 with the
quadratic through them, and the result is snapped to exactly zero when it is
within ``zero_tol`` of zero.  Agreement with the extrapolant of the previous
window decides convergence; a non-convergent family is reported as such and
never snapped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _stencil
from .errors import EvalError, ParameterError
from .expr import Env, Expr, as_expr, diff, evaluate
from .scale_ops import Curve, check_eps, scale_derivative_field

DEFAULT_ZERO_TOL = 1e-6
DEFAULT_CONV_TOL = 1e-6


@dataclass(frozen=True)
class EpsilonSchedule:
    eps0: float = 0.1
    ratio: float = 0.5
    count: int = 8

    def __post_init__(self):
        check_eps(self.eps0)
        if not 0 < self.ratio < 1:
            raise ParameterError(f"ratio must lie in (0, 1), got {self.ratio}")
        if int(self.count) != self.count or self.count < 3:
            raise ParameterError(f"count must be an integer >= 3, got {self.count}")

    @property
    def values(self) -> np.ndarray:
        return self.eps0 * self.ratio ** np.arange(self.count)

    @property
    def smallest(self) -> float:
        return float(self.values[-1])

    @property
    def largest(self) -> float:
        return float(self.eps0)


@dataclass(frozen=True)
class LimitEstimate:
    """Bracket of an eps-family.

    ``diverging`` marks unconverged families whose magnitude grows at least
    like ``eps**-0.5`` over the last three samples, i.e. whose limit is infinite
    rather than undetermined.
    """

    value: complex
    converged: bool
    tail_residual: float
    is_zero: bool
    diverging: bool = False


@dataclass(frozen=True, eq=False)
class ResidualField:
    grid: np.ndarray
    values: np.ndarray
    eps: float

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True)
class QuadratureConfig:
    rule: str = "composite_simpson"
    n_panels: int = 256

    def __post_init__(self):
        if self.rule != "composite_simpson":
            raise ParameterError(f"unsupported quadrature rule {self.rule!r}")
        if int(self.n_panels) != self.n_panels or self.n_panels < 2 or self.n_panels % 2:
            raise ParameterError(f"n_panels must be an even integer >= 2, got {self.n_panels}")


# ---------------------------------------------------------------------------
# quadrature


def _simpson_pieces(a, b, n_panels, breakpoints):
    """Split [a, b] at the interior breakpoints, sharing the panels by length."""
    cuts = [a] + sorted({float(t) for t in breakpoints if a < t < b}) + [b]
    pieces = []
    for lo, hi in zip(cuts, cuts[1:]):
        n = max(2, 2 * round(n_panels * (hi - lo) / (b - a) / 2))
        pieces.append((lo, hi, n))
    return pieces


def kink_breakpoints(eps):
    """Where integrands built from scale derivatives of a curve kinked at 0 are kinked."""
    return (-2 * eps, -eps, 0.0, eps, 2 * eps)


def simpson_nodes(a, b, quad: QuadratureConfig, breakpoints=(0.0,)):
    """Nodes and weights of composite Simpson on [a, b], with a node at every interior breakpoint."""
    nodes, weights = [], []
    for lo, hi, n in _simpson_pieces(float(a), float(b), quad.n_panels, breakpoints):
        h = (hi - lo) / n
        x = lo + h * np.arange(n + 1)
        x[-1] = hi
        w = np.full(n + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        nodes.append(x)
        weights.append(w * h / 3.0)
    return np.concatenate(nodes), np.concatenate(weights)


def integrate(integrand: Callable[[np.ndarray], np.ndarray], a, b, quad: QuadratureConfig,
              breakpoints=(0.0,)) -> complex:
    """Composite Simpson of a vectorized (possibly complex) integrand."""
    if not a < b:
        raise ParameterError(f"need a < b, got [{a}, {b}]")
    x, w = simpson_nodes(a, b, quad, breakpoints)
    vals = np.asarray(integrand(x), dtype=complex)
    # fixed left-to-right order keeps the sum reproducible
    total = 0j
    for term in w * vals:
        total += term
    return complex(total)


# ---------------------------------------------------------------------------
# evaluation along a curve


def _along(e: Expr, y: Curve, x, eps):
    x = np.asarray(x, dtype=float)
    return evaluate(e, Env(x=x, y=y(x), v=scale_derivative_field(y, x, eps), eps=eps))


def functional_value(f, y: Curve, a, b, eps, quad: QuadratureConfig = QuadratureConfig()) -> complex:
    """``integral_a^b f(x, y(x), sd y(x)) dx``."""
    f = as_expr(f)
    eps = check_eps(eps)
    y.check_covers(a - eps, b + eps)
    return integrate(lambda x: _along(f, y, x, eps), a, b, quad, kink_breakpoints(eps))


def _field_box(field: Callable[[np.ndarray], np.ndarray], x, eps):
    """Scale derivative of a complex field known pointwise, at the points ``x``."""
    vals = [np.asarray(field(x + s), dtype=complex) for s in (-eps, 0.0, eps)]
    return _stencil.combine_complex(*vals, eps)


def _partials(f):
    return diff(f, "y"), diff(f, "v")


def el_residual(f, y: Curve, grid, eps) -> ResidualField:
    """``df/dy - sd(df/dv)`` along ``y`` at each grid point.

    The outer scale derivative evaluates ``df/dv`` directly at ``x -+ eps``,
    which needs ``y`` on ``[min(grid) - 2 eps, max(grid) + 2 eps]``.
    """
    f = as_expr(f)
    eps = check_eps(eps)
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ParameterError("empty grid")
    y.check_covers(float(grid.min()) - 2 * eps, float(grid.max()) + 2 * eps)
    f_y, f_v = _partials(f)
    r = np.broadcast_to(_along(f_y, y, grid, eps), grid.shape).astype(complex)
    r = r - _field_box(lambda t: _along(f_v, y, t, eps), grid, eps)
    return ResidualField(grid, r, eps)


# ---------------------------------------------------------------------------
# the bracket filter


def _extrapolate_to_zero(eps, samples):
    """Value at eps = 0 of the polynomial through the (eps_i, samples_i) rows."""
    total = 0
    for i in range(len(eps)):
        weight = 1.0
        for j in range(len(eps)):
            if j != i:
                weight *= -eps[j] / (eps[i] - eps[j])
        total = total + weight * samples[i]
    return total


def _bracket_rows(eps, samples, zero_tol, conv_tol):
    """Bracket estimates for every column of ``samples`` (shape ``(len(eps), n)``)."""
    samples = np.asarray(samples, dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise EvalError("sampler returned a non-finite value")
    last = _extrapolate_to_zero(eps[-3:], samples[-3:])
    if len(eps) >= 4:
        prev = _extrapolate_to_zero(eps[-4:-1], samples[-4:-1])
    else:
        prev = _extrapolate_to_zero(eps[-2:], samples[-2:])
    tail = np.abs(last - prev)
    mags = np.abs(samples[-3:])
    growth = np.sqrt(eps[-2] / eps[-1])
    growing = (mags[1] >= growth * mags[0]) & (mags[2] >= growth * mags[1]) & (mags[0] > 0)
    out = []
    for value, t, grows in zip(np.atleast_1d(last), np.atleast_1d(tail), np.atleast_1d(growing)):
        converged = bool(np.isfinite(t) and t <= conv_tol)
        is_zero = bool(converged and abs(value) <= zero_tol)
        diverging = bool(not converged and grows)
        out.append(LimitEstimate(0j if is_zero else complex(value), converged, float(t), is_zero, diverging))
    return out


def bracket_limit(sampler: Callable[[float], complex], schedule: EpsilonSchedule = EpsilonSchedule(),
                  zero_tol=DEFAULT_ZERO_TOL, conv_tol=DEFAULT_CONV_TOL) -> LimitEstimate:
    """Estimate ``[sampler(eps)]`` from samples on ``schedule``."""
    eps = schedule.values
    samples = np.array([[complex(sampler(float(e)))] for e in eps])
    return _bracket_rows(eps, samples, zero_tol, conv_tol)[0]


def bracket_samples(samples: Sequence, schedule: EpsilonSchedule, zero_tol=DEFAULT_ZERO_TOL,
                    conv_tol=DEFAULT_CONV_TOL) -> list:
    """Column-wise brackets of precomputed samples, one row per schedule entry."""
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] != schedule.count:
        raise ParameterError("need one sample row per schedule entry")
    return _bracket_rows(schedule.values, samples, zero_tol, conv_tol)


def residual_samples(f, y: Curve, grid, schedule: EpsilonSchedule) -> np.ndarray:
    """Residual values with shape ``(schedule.count, len(grid))``."""
    return np.array([el_residual(f, y, grid, e).values for e in schedule.values])


def bracket_field(f, y: Curve, grid, schedule: EpsilonSchedule = EpsilonSchedule(),
                  zero_tol=DEFAULT_ZERO_TOL, conv_tol=DEFAULT_CONV_TOL) -> list:
    """Bracket of the Euler-Lagrange residual at every grid point."""
    return bracket_samples(residual_samples(f, y, grid, schedule), schedule, zero_tol, conv_tol)


# ---------------------------------------------------------------------------
# first variation and extremality


def first_variation(f, y: Curve, h: Curve, a, b, eps, quad: QuadratureConfig = QuadratureConfig()) -> complex:
    """``d/ds integral f(x, y + s h, sd y + s sd h) dx`` at ``s = 0``."""
    f = as_expr(f)
    eps = check_eps(eps)
    y.check_covers(a - eps, b + eps)
    h.check_covers(a - eps, b + eps)
    f_y, f_v = _partials(f)

    def integrand(x):
        hx, dh = h(x), scale_derivative_field(h, x, eps)
        return _along(f_y, y, x, eps) * hx + _along(f_v, y, x, eps) * dh

    return integrate(integrand, a, b, quad, kink_breakpoints(eps))


def variation_derivative(f, y: Curve, h: Curve, a, b, eps, quad: QuadratureConfig = QuadratureConfig()):
    """Return ``(F, R)``: the linear part of ``Phi(y + h) - Phi(y)`` and its remainder integral.

    ``F = int r h + int sd(f_eps h) + i R`` with ``r`` the Euler-Lagrange
    residual, ``f_eps = df/dv`` along ``y`` and
    ``R = -(eps/2) int [B f B h - C f B h - B f C h - C f C h]``, where ``B`` is
    the scale derivative and ``C`` its conjugate.  The decomposition matches
    :func:`first_variation` exactly when ``f_eps`` is real.
    """
    f = as_expr(f)
    eps = check_eps(eps)
    y.check_covers(a - 2 * eps, b + 2 * eps)
    h.check_covers(a - eps, b + eps)
    _, f_v = _partials(f)

    def f_eps(t):
        return np.asarray(_along(f_v, y, t, eps), dtype=complex)

    def residual_term(x):
        return el_residual(f, y, x, eps).values * h(x)

    def boundary_term(x):
        return _field_box(lambda t: f_eps(t) * h(t), x, eps)

    def remainder_term(x):
        bf = _field_box(f_eps, x, eps)
        bh = scale_derivative_field(h, x, eps)
        cf, ch = np.conj(bf), np.conj(bh)
        return bf * bh - cf * bh - bf * ch - cf * ch

    cuts = kink_breakpoints(eps)
    remainder = -(eps / 2) * integrate(remainder_term, a, b, quad, cuts)
    first = integrate(residual_term, a, b, quad, cuts) + integrate(boundary_term, a, b, quad, cuts)
    return complex(first + 1j * remainder), complex(remainder)


@dataclass(frozen=True, eq=False)
class ExtremalCheck:
    """Outcome of :func:`is_extremal`: ``status`` is extremal, not_extremal or inconclusive."""

    status: str
    brackets: list
    residual: ResidualField

    @property
    def verdict(self):
        return {"extremal": True, "not_extremal": False}.get(self.status)

    def __bool__(self):
        return self.status == "extremal"


def is_extremal(f, y: Curve, grid, schedule: EpsilonSchedule = EpsilonSchedule(),
                zero_tol=DEFAULT_ZERO_TOL, conv_tol=DEFAULT_CONV_TOL) -> ExtremalCheck:
    """Extremal iff the bracketed residual vanishes at every grid point.

    One converged non-zero bracket is enough for ``not_extremal``; otherwise any
    unconverged point makes the verdict ``inconclusive``.
    """
    brackets = bracket_field(f, y, grid, schedule, zero_tol, conv_tol)
    residual = el_residual(f, y, grid, schedule.smallest)
    if any(b.converged and not b.is_zero for b in brackets):
        status = "not_extremal"
    elif not all(b.converged for b in brackets):
        status = "inconclusive"
    else:
        status = "extremal"
    return ExtremalCheck(status, brackets, residual)
