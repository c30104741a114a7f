"""Hölder-class estimation and admissibility of variation curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .expr import Binary, Const, Unary, Var
from .scale_ops import Curve

# base points per unit eps in the dense lattice, and a cap on its size
_LATTICE_DENSITY = 8
_LATTICE_MAX = 1_000_000
# exponent estimators are biased low on finite grids
ESTIMATION_SLACK = 0.05


@dataclass(frozen=True)
class HolderEstimate:
    alpha_hat: float
    c_hat: float
    regression_r2: float
    scales_used: int
    degenerate: bool = False


def weierstrass_curve(a=0.5, b=3.0, terms=21, domain=(-math.inf, math.inf)) -> Curve:
    """``sum_{n<terms} a^n cos(b^n pi x)``; its Hölder exponent is ``-log(a)/log(b)``."""
    x = Var("x")
    e = None
    for n in range(terms):
        term = Binary("mul", Const(a**n), Unary("cos", Binary("mul", Const(b**n * math.pi), x)))
        e = term if e is None else Binary("add", e, term)
    return Curve.closed_form(e, domain)


def _interval(f, interval):
    lo, hi = f.domain if interval is None else (float(interval[0]), float(interval[1]))
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ParameterError("an explicit finite interval is required for this curve")
    if not lo < hi:
        raise ParameterError(f"empty interval [{lo}, {hi}]")
    f.check_covers(lo, hi)
    return lo, hi


def _check_eps_set(eps_set, lo, hi):
    eps = np.asarray(list(eps_set), dtype=float)
    if eps.size == 0:
        raise ParameterError("eps set is empty")
    if np.any(~np.isfinite(eps)) or np.any(eps <= 0) or np.any(eps >= hi - lo):
        raise ParameterError("every eps must lie in (0, interval length)")
    return eps


def _random_increments(f, eps, lo, hi, probe_count, rng):
    # one row per probe keeps the first n probes identical for any probe_count >= n
    draws = rng.random((probe_count, 2))
    x = lo + draws[:, 0] * (hi - lo - eps)
    x_far = x + eps
    x_near = x + draws[:, 1] * eps
    fx = f(x)
    return max(np.max(np.abs(f(x_far) - fx)), np.max(np.abs(f(x_near) - fx)))


def _lattice_increments(f, eps, lo, hi, probe_count):
    n = int(min(max(probe_count, _LATTICE_DENSITY * (hi - lo) / eps), _LATTICE_MAX))
    x = lo + np.arange(n + 1) * ((hi - lo - eps) / n)
    return np.max(np.abs(f(x + eps) - f(x)))


def holder_constant(f: Curve, alpha, eps_set, probe_count=1000, seed=0, interval=None) -> float:
    """Largest observed ``|f(x) - f(x')| / eps^alpha`` over sampled pairs ``|x - x'| <= eps``.

    This is a lower bound on the true Hölder constant.  Probes for the k-th eps
    come from ``numpy.random.default_rng([seed, k])``, so raising
    ``probe_count`` only adds pairs.
    """
    if not 0 < alpha <= 1:
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha}")
    if probe_count < 2:
        raise ParameterError("probe_count must be at least 2")
    lo, hi = _interval(f, interval)
    best = 0.0
    for k, eps in enumerate(_check_eps_set(eps_set, lo, hi)):
        rng = np.random.default_rng([seed, k])
        best = max(best, _random_increments(f, eps, lo, hi, probe_count, rng) / eps**alpha)
    return float(best)


def modulus_of_continuity(f: Curve, eps, probe_count=1000, seed=0, interval=None) -> float:
    """Max increment of ``f`` over pairs at distance <= eps (dense lattice plus random pairs)."""
    lo, hi = _interval(f, interval)
    (eps,) = _check_eps_set([eps], lo, hi)
    rng = np.random.default_rng(seed)
    return float(
        max(
            _lattice_increments(f, eps, lo, hi, probe_count),
            _random_increments(f, eps, lo, hi, probe_count, rng),
        )
    )


def estimate_exponent(f: Curve, eps_schedule, probe_count=1000, seed=0, interval=None) -> HolderEstimate:
    """Fit ``log omega(eps) = log c + alpha log eps`` by least squares."""
    eps = np.asarray(list(eps_schedule), dtype=float)
    if eps.size < 3:
        raise ParameterError("at least three scales are needed")
    if np.any(np.diff(eps) >= 0):
        raise ParameterError("eps schedule must be strictly decreasing")
    lo, hi = _interval(f, interval)
    _check_eps_set(eps, lo, hi)
    omega = np.array(
        [modulus_of_continuity(f, e, probe_count, seed + k, (lo, hi)) for k, e in enumerate(eps)]
    )
    keep = omega > 0
    if keep.sum() < 3:
        return HolderEstimate(1.0, float(np.finfo(float).tiny), 0.0, int(eps.size), degenerate=True)
    log_e, log_w = np.log(eps[keep]), np.log(omega[keep])
    slope, intercept = np.polyfit(log_e, log_w, 1)
    fitted = slope * log_e + intercept
    ss_res = float(np.sum((log_w - fitted) ** 2))
    ss_tot = float(np.sum((log_w - log_w.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    alpha = float(min(max(slope, np.finfo(float).tiny), 1.0))
    return HolderEstimate(
        alpha_hat=alpha,
        c_hat=float(math.exp(intercept)),
        regression_r2=float(min(max(r2, 0.0), 1.0)),
        scales_used=int(keep.sum()),
    )


def min_variation_exponent(alpha) -> float:
    """Smallest exponent a variation may have so that ``y + h`` keeps exponent ``alpha``."""
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha) if alpha >= 0.5 else 1.0 - float(alpha)


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    endpoints_ok: bool
    exponent_ok: bool
    beta_min: float
    estimate: HolderEstimate
    reasons: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def is_admissible_variation(h: Curve, alpha, a, b, tol=1e-12, eps_schedule=None,
                            probe_count=1000, seed=0) -> Admissibility:
    """Check ``h(a) = 0 = h(b)`` and that ``h`` is regular enough to be a variation."""
    beta_min = min_variation_exponent(alpha)
    ha, hb = h(a), h(b)
    reasons = []
    endpoints_ok = abs(ha) <= tol and abs(hb) <= tol
    if not endpoints_ok:
        reasons.append(f"endpoint values h(a)={ha:.3g}, h(b)={hb:.3g} exceed tol={tol:g}")
    if eps_schedule is None:
        eps_schedule = (b - a) / 20 * 0.5 ** np.arange(8)
    est = estimate_exponent(h, eps_schedule, probe_count, seed, (a, b))
    exponent_ok = est.alpha_hat >= beta_min - ESTIMATION_SLACK
    if not exponent_ok:
        reasons.append(f"estimated exponent {est.alpha_hat:.3f} below required {beta_min:.3f}")
    return Admissibility(endpoints_ok and exponent_ok, endpoints_ok, exponent_ok, beta_min, est, reasons)
