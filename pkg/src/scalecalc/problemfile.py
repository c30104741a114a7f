"""INI-style problem files.

Example::

    [interval]
    a = -1
    b = 1

    [boundary]
    a0 = 1
    b0 = 1

    [objective]
    f = (v - sd(abs(x)))^2

    [constraint]
    g = x + y^2
    K_re = 2/3
    K_im = 0

    [curve]
    y = abs(x)
    # or: samples = curve.csv   (two columns x,value; path relative to this file)

    [numerics]
    eps0 = 0.1

Scalar entries accept constant expressions such as ``2/3`` or ``pi/4``.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, ParseError
from .expr import Env, Expr, evaluate, parse, variables
from .isoperimetric import IsoProblem
from .scale_ops import Curve
from .variational import EpsilonSchedule, QuadratureConfig


@dataclass(frozen=True)
class Numerics:
    eps0: float = 0.1
    ratio: float = 0.5
    count: int = 8
    n_panels: int = 256
    grid_points: int = 201
    zero_tol: float = 1e-6
    conv_tol: float = 1e-6
    iso_tol: float = 1e-6
    boundary_tol: float = 1e-9
    probe_count: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("count", "n_panels", "grid_points", "probe_count", "seed"):
            value = getattr(self, name)
            if isinstance(value, float) and not value.is_integer():
                raise ParameterError(f"{name} must be an integer, got {value}")
            object.__setattr__(self, name, int(value))
        for name in ("eps0", "zero_tol", "conv_tol", "iso_tol", "boundary_tol"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)
        if self.grid_points < 1:
            raise ParameterError("grid_points must be at least 1 (the grid is empty)")
        if self.probe_count < 2:
            raise ParameterError("probe_count must be at least 2")
        # construction validates ratio, count and n_panels
        self.schedule
        self.quad

    @property
    def schedule(self) -> EpsilonSchedule:
        return EpsilonSchedule(self.eps0, float(self.ratio), self.count)

    @property
    def quad(self) -> QuadratureConfig:
        return QuadratureConfig(n_panels=self.n_panels)

    def with_overrides(self, overrides) -> "Numerics":
        """Apply ``key=value`` strings (or a mapping) on top of these values."""
        if not isinstance(overrides, dict):
            pairs = {}
            for item in overrides:
                key, sep, value = item.partition("=")
                if not sep:
                    raise ParameterError(f"expected key=value, got {item!r}")
                pairs[key.strip()] = value.strip()
            overrides = pairs
        known = {f.name for f in dataclasses.fields(self)}
        changes = {}
        for key, value in overrides.items():
            if key not in known:
                raise ParameterError(f"unknown numerics key {key!r}")
            changes[key] = constant(value) if isinstance(value, str) else value
        return dataclasses.replace(self, **changes)

    def items(self):
        return [(f.name, getattr(self, f.name)) for f in dataclasses.fields(self)]


@dataclass(frozen=True, eq=False)
class ProblemFile:
    path: Path = None
    a: float = None
    b: float = None
    a0: float = None
    b0: float = None
    f: Expr = None
    g: Expr = None
    K: complex = None
    curve: Curve = None
    numerics: Numerics = field(default_factory=Numerics)

    def require(self, *sections):
        fields = {
            "interval": ("a", "b"),
            "boundary": ("a0", "b0"),
            "objective": ("f",),
            "constraint": ("g", "K"),
            "curve": ("curve",),
        }
        for section in sections:
            if any(getattr(self, name) is None for name in fields[section]):
                raise ParameterError(f"problem file is missing the [{section}] section")

    @property
    def grid(self) -> np.ndarray:
        self.require("interval")
        return np.linspace(self.a, self.b, self.numerics.grid_points)

    def lagrangian(self, which: str) -> Expr:
        if which == "objective":
            self.require("objective")
            return self.f
        self.require("constraint")
        return self.g

    def iso_problem(self) -> IsoProblem:
        self.require("interval", "boundary", "objective", "constraint")
        n = self.numerics
        return IsoProblem(
            f=self.f, g=self.g, a=self.a, b=self.b, a0=self.a0, b0=self.b0, K=self.K,
            schedule=n.schedule, quad=n.quad, grid=self.grid,
            zero_tol=n.zero_tol, conv_tol=n.conv_tol, boundary_tol=n.boundary_tol,
        )


def constant(text: str) -> float:
    """Value of a constant expression such as ``2/3`` or ``-1e-3``."""
    e = parse(text)
    if variables(e):
        raise ParseError(f"expected a constant, got {text!r}")
    value = evaluate(e, Env())
    if value.imag != 0:
        raise ParseError(f"expected a real constant, got {text!r}")
    return value.real


def read_samples(path) -> Curve:
    """Two-column CSV ``x,value``; a non-numeric first row is treated as a header."""
    xs, ys = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise ParameterError(f"{path}:{lineno}: expected two columns, got {len(row)}")
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                if not xs and lineno == 1:
                    continue
                raise ParameterError(f"{path}:{lineno}: non-numeric entry") from None
            xs.append(x)
            ys.append(y)
    if np.any(np.diff(xs) <= 0):
        raise ParameterError(f"{path}: x column must be strictly increasing")
    return Curve.sampled(xs, ys)


def _get(cfg, section, key):
    if not cfg.has_section(section) or not cfg.has_option(section, key):
        raise ParameterError(f"[{section}] needs an entry {key!r}")
    return cfg.get(section, key)


def load(path, overrides=()) -> ProblemFile:
    """Read a problem file; ``overrides`` are ``key=value`` numerics strings."""
    path = Path(path)
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    with open(path) as fh:
        cfg.read_file(fh)

    values = {"path": path}
    if cfg.has_section("interval"):
        values["a"] = constant(_get(cfg, "interval", "a"))
        values["b"] = constant(_get(cfg, "interval", "b"))
        if not values["a"] < values["b"]:
            raise ParameterError("[interval] needs a < b")
    if cfg.has_section("boundary"):
        values["a0"] = constant(_get(cfg, "boundary", "a0"))
        values["b0"] = constant(_get(cfg, "boundary", "b0"))
    if cfg.has_section("objective"):
        values["f"] = parse(_get(cfg, "objective", "f"))
    if cfg.has_section("constraint"):
        values["g"] = parse(_get(cfg, "constraint", "g"))
        k_re = constant(cfg.get("constraint", "k_re", fallback="0"))
        k_im = constant(cfg.get("constraint", "k_im", fallback="0"))
        values["K"] = complex(k_re, k_im)
    if cfg.has_section("curve"):
        if cfg.has_option("curve", "y") == cfg.has_option("curve", "samples"):
            raise ParameterError("[curve] needs exactly one of 'y' or 'samples'")
        if cfg.has_option("curve", "y"):
            values["curve"] = Curve.closed_form(parse(cfg.get("curve", "y")))
        else:
            values["curve"] = read_samples(path.parent / cfg.get("curve", "samples"))

    numerics = Numerics()
    if cfg.has_section("numerics"):
        numerics = numerics.with_overrides(dict(cfg.items("numerics")))
    values["numerics"] = numerics.with_overrides(overrides)
    return ProblemFile(**values)
