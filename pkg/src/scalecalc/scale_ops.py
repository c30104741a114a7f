"""Quantum (scale) derivative operators on real and complex curves.

All operators accept a scalar ``x`` or an array of points and validate the
stencil against the curve's domain on every call, so one curve can be used
with many step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _stencil
from .errors import DomainError, EvalError, ParameterError
from .expr import Binary, Const, Env, Expr, Pow, Var, as_expr, contains_scale_deriv, evaluate, to_string, variables

# relative slack when comparing a stencil endpoint to a domain boundary
_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class Curve:
    """A real-valued function of ``x`` on the closed interval ``domain``.

    Build one with :meth:`closed_form`, :meth:`sampled` or
    :meth:`linear_combination` rather than calling the constructor.
    """

    kind: str
    domain: tuple
    expr: Expr = None
    grid: np.ndarray = None
    values: np.ndarray = None
    terms: tuple = ()

    @classmethod
    def closed_form(cls, expr, domain=(-math.inf, math.inf)) -> "Curve":
        e = as_expr(expr)
        extra = variables(e) - {"x"}
        if extra:
            raise ParameterError(f"curve expressions may only use x, found {sorted(extra)}")
        if contains_scale_deriv(e):
            raise ParameterError("curve expressions may not contain sd()")
        lo, hi = (float(d) for d in domain)
        if not lo < hi:
            raise ParameterError(f"empty domain [{lo}, {hi}]")
        return cls("closed_form", (lo, hi), expr=e)

    @classmethod
    def sampled(cls, grid, values) -> "Curve":
        """Piecewise-linear interpolant through ``(grid[i], values[i])``."""
        grid = np.array(grid, dtype=float)
        values = np.array(values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ParameterError("grid and values must be 1-D arrays of equal length")
        if grid.size < 2:
            raise ParameterError("a sampled curve needs at least two points")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ParameterError("sampled curve contains non-finite entries")
        if np.any(np.diff(grid) <= 0):
            raise ParameterError("sample grid must be strictly increasing")
        grid.flags.writeable = False
        values.flags.writeable = False
        return cls("sampled", (float(grid[0]), float(grid[-1])), grid=grid, values=values)

    @classmethod
    def linear_combination(cls, *terms) -> "Curve":
        """``sum(c * curve for c, curve in terms)`` on the intersection of the domains."""
        if not terms:
            raise ParameterError("empty linear combination")
        terms = tuple((float(c), crv) for c, crv in terms)
        lo = max(crv.domain[0] for _, crv in terms)
        hi = min(crv.domain[1] for _, crv in terms)
        if not lo < hi:
            raise ParameterError("curve domains do not overlap")
        return cls("combination", (lo, hi), terms=terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "closed_form":
            out = evaluate(self.expr, Env(x=x))
            out = np.broadcast_to(np.asarray(out), x.shape)
            if np.any(out.imag != 0):
                raise EvalError(f"curve {to_string(self.expr)} is not real-valued here")
            out = out.real.copy()
        elif self.kind == "sampled":
            out = np.interp(x, self.grid, self.values)
        else:
            out = np.zeros(x.shape)
            for c, crv in self.terms:
                out = out + c * crv(x)
        return out if out.ndim else float(out)

    def check_covers(self, lo, hi):
        """Raise :class:`DomainError` unless ``[lo, hi]`` lies inside the domain."""
        d_lo, d_hi = self.domain
        slack_lo = _DOMAIN_SLACK * max(1.0, abs(d_lo)) if math.isfinite(d_lo) else 0.0
        slack_hi = _DOMAIN_SLACK * max(1.0, abs(d_hi)) if math.isfinite(d_hi) else 0.0
        if lo < d_lo - slack_lo or hi > d_hi + slack_hi:
            raise DomainError(f"[{lo:.17g}, {hi:.17g}] is not inside the curve domain [{d_lo}, {d_hi}]")

    def __repr__(self):
        if self.kind == "closed_form":
            return f"Curve.closed_form({to_string(self.expr)!r}, domain={self.domain})"
        if self.kind == "sampled":
            return f"Curve.sampled(<{self.grid.size} points on {self.domain}>)"
        return f"Curve.linear_combination(<{len(self.terms)} terms>)"


@dataclass(frozen=True)
class ComplexCurve:
    re_part: Curve
    im_part: Curve

    def __post_init__(self):
        if self.re_part.domain != self.im_part.domain:
            raise ParameterError("real and imaginary parts must share a domain")

    @property
    def domain(self):
        return self.re_part.domain

    def __call__(self, x):
        return np.asarray(self.re_part(x)) + 1j * np.asarray(self.im_part(x))


def check_eps(eps):
    if not (isinstance(eps, (int, float, np.floating, np.integer)) and math.isfinite(eps) and eps > 0):
        raise ParameterError(f"eps must be a positive finite real, got {eps!r}")
    return float(eps)


def _stencil_values(f, x, eps, reach=1.0):
    eps = check_eps(eps)
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return x, x, x, x, eps
    f.check_covers(float(np.min(x)) - reach * eps, float(np.max(x)) + reach * eps)
    return x, f(x - eps), f(x), f(x + eps), eps


def _scalar(out):
    out = np.asarray(out)
    if out.ndim == 0:
        return out.item()
    return out


def delta_plus(f: Curve, x, eps):
    """Right quantum derivative ``(f(x+eps) - f(x)) / eps``."""
    eps = check_eps(eps)
    x = np.asarray(x, dtype=float)
    f.check_covers(float(np.min(x)), float(np.max(x)) + eps)
    d_plus, _ = _stencil.deltas(0.0, np.asarray(f(x)), np.asarray(f(x + eps)), eps)
    return _scalar(d_plus)


def delta_minus(f: Curve, x, eps):
    """Left quantum derivative ``-(f(x-eps) - f(x)) / eps``."""
    eps = check_eps(eps)
    x = np.asarray(x, dtype=float)
    f.check_covers(float(np.min(x)) - eps, float(np.max(x)))
    _, d_minus = _stencil.deltas(np.asarray(f(x - eps)), np.asarray(f(x)), 0.0, eps)
    return _scalar(d_minus)


def scale_derivative(f: Curve, x, eps):
    """Scale derivative ``(D+ + D-)/2 - i (D+ - D-)/2`` of a real curve."""
    x, fm, f0, fp, eps = _stencil_values(f, x, eps)
    return _scalar(_stencil.combine(np.asarray(fm), np.asarray(f0), np.asarray(fp), eps) + 0j)


def scale_derivative_complex(f: ComplexCurve, x, eps):
    """Scale derivative of ``Re f`` plus ``i`` times that of ``Im f``."""
    re = np.asarray(scale_derivative(f.re_part, x, eps))
    im = np.asarray(scale_derivative(f.im_part, x, eps))
    return _scalar(re + 1j * im)


def conj_scale_derivative(f: Curve, x, eps):
    return _scalar(np.conj(np.asarray(scale_derivative(f, x, eps))))


def leibniz_defect(f: Curve, g: Curve, x, eps):
    """Scale derivative of ``f*g`` minus the quantum Leibniz expansion.

    The expansion is exact for real curves, so the result is rounding noise.
    """
    eps = check_eps(eps)
    x = np.asarray(x, dtype=float)
    lo, hi = float(np.min(x)) - 2 * eps, float(np.max(x)) + 2 * eps
    f.check_covers(lo, hi)
    g.check_covers(lo, hi)
    fm, f0, fp = (np.asarray(f(x + s)) for s in (-eps, 0.0, eps))
    gm, g0, gp = (np.asarray(g(x + s)) for s in (-eps, 0.0, eps))
    lhs = _stencil.combine(fm * gm, f0 * g0, fp * gp, eps)
    bf = _stencil.combine(fm, f0, fp, eps)
    bg = _stencil.combine(gm, g0, gp, eps)
    cf, cg = np.conj(bf), np.conj(bg)
    rhs = bf * g0 + f0 * bg + 0.5j * eps * (bf * bg - cf * bg - bf * cg - cf * cg)
    return _scalar(lhs - rhs)


def scale_derivative_field(f: Curve, grid, eps) -> np.ndarray:
    """Scale derivative at every point of ``grid`` (always returns an array)."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    return np.atleast_1d(np.asarray(scale_derivative(f, grid, eps), dtype=complex))


def random_polynomial(rng: np.random.Generator, max_degree=4) -> Curve:
    """Closed-form polynomial with degree <= max_degree and coefficients in [-1, 1]."""
    degree = int(rng.integers(0, max_degree + 1))
    coeffs = rng.uniform(-1.0, 1.0, degree + 1)
    e = Const(coeffs[0])
    for k, c in enumerate(coeffs[1:], start=1):
        e = Binary("add", e, Binary("mul", Const(c), Pow(Var("x"), k)))
    return Curve.closed_form(e)


def max_leibniz_defect(seed=0, trials=500, max_degree=4) -> float:
    """Largest ``|leibniz_defect|`` over random polynomial pairs, x in [-1, 1], eps in (0, 0.5]."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f = random_polynomial(rng, max_degree)
        g = random_polynomial(rng, max_degree)
        x = rng.uniform(-1.0, 1.0)
        eps = 0.5 * (1.0 - rng.random())
        worst = max(worst, abs(leibniz_defect(f, g, x, eps)))
    return worst
