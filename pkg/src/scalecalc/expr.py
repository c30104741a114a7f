"""Expression language for Lagrangians ``f(x, y, v)`` and closed-form curves ``y(x)``.

Grammar (see docs/grammar.md for the EBNF)::

    expr    := term (("+" | "-") term)*
    term    := power (("*" | "/") power)*
    power   := unary ("^" INTEGER)?
    unary   := "-" unary | primary
    primary := NUMBER | "pi" | VAR | FUNC "(" expr ")" | "(" expr ")"

Unary minus binds tighter than ``^``, so ``-x^2`` is ``(-x)^2``.

``v`` stands for the scale derivative of the curve and is complex; ``x`` and ``y``
are real.  ``sd(u)`` is the scale derivative of an ``x``-only expression ``u``,
evaluated at the step ``eps`` carried by the environment.  It lets a Lagrangian
refer to a fixed non-smooth coefficient such as ``sd(abs(x))``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _stencil
from .errors import EvalError, ParameterError, ParseError, UnsupportedError

VARIABLES = ("x", "y", "v")
FUNCTIONS = ("abs", "sin", "cos", "exp", "log")
BINARY_OPS = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


class Expr:
    """Base class of AST nodes. Nodes are immutable and compare structurally."""

    __slots__ = ()

    def __add__(self, other):
        return Binary("add", self, as_expr(other))

    def __radd__(self, other):
        return Binary("add", as_expr(other), self)

    def __sub__(self, other):
        return Binary("sub", self, as_expr(other))

    def __rsub__(self, other):
        return Binary("sub", as_expr(other), self)

    def __mul__(self, other):
        return Binary("mul", self, as_expr(other))

    def __rmul__(self, other):
        return Binary("mul", as_expr(other), self)

    def __truediv__(self, other):
        return Binary("div", self, as_expr(other))

    def __rtruediv__(self, other):
        return Binary("div", as_expr(other), self)

    def __neg__(self):
        return Unary("neg", self)

    def __pow__(self, n):
        return Pow(self, n)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ParameterError(f"non-finite constant {self.value!r}")
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ParameterError(f"unknown variable {self.name!r}")


@dataclass(frozen=True, eq=True)
class Unary(Expr):
    op: str  # "neg" or one of FUNCTIONS
    arg: Expr

    def __post_init__(self):
        if self.op != "neg" and self.op not in FUNCTIONS:
            raise ParameterError(f"unknown unary operator {self.op!r}")


@dataclass(frozen=True, eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ParameterError(f"unknown binary operator {self.op!r}")


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, (int, np.integer)):
            raise ParameterError("exponent must be an integer")
        if self.exponent < 0:
            raise ParameterError("exponent must be non-negative; use division instead")
        object.__setattr__(self, "exponent", int(self.exponent))


@dataclass(frozen=True, eq=True)
class ScaleDeriv(Expr):
    """Scale derivative of an x-only expression at the environment's eps."""

    arg: Expr


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    if isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def variables(e: Expr) -> frozenset:
    """Free variables of ``e``. ``sd(u)`` contributes the variables of ``u``."""
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, (Unary, ScaleDeriv)):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


def contains_scale_deriv(e: Expr) -> bool:
    if isinstance(e, ScaleDeriv):
        return True
    if isinstance(e, Unary):
        return contains_scale_deriv(e.arg)
    if isinstance(e, Pow):
        return contains_scale_deriv(e.base)
    if isinstance(e, Binary):
        return contains_scale_deriv(e.left) or contains_scale_deriv(e.right)
    return False


def validate(e: Expr) -> Expr:
    """Check the structural rules that the node constructors cannot see.

    ``abs`` must not reach ``v`` (it is not complex-analytic) and ``sd`` must
    only contain ``x``.  Returns ``e`` unchanged so calls can be chained.
    """
    if isinstance(e, Unary):
        if e.op == "abs" and "v" in variables(e.arg):
            raise ParseError("abs() of an expression containing v is not allowed")
        validate(e.arg)
    elif isinstance(e, ScaleDeriv):
        if variables(e.arg) - {"x"}:
            raise ParseError("sd() accepts expressions in x only")
        if contains_scale_deriv(e.arg):
            raise ParseError("nested sd() is not supported")
        validate(e.arg)
    elif isinstance(e, Pow):
        validate(e.base)
    elif isinstance(e, Binary):
        validate(e.left)
        validate(e.right)
    return e


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ParseError(f"unexpected character {text[start]!r}", start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text.rstrip()) if text.strip() else len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.tok
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, text, pos = self.tok
        if kind != "end":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = "add" if self.advance()[1] == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = "mul" if self.advance()[1] == "*" else "div"
            node = Binary(op, node, self.power())
        return node

    def power(self):
        node = self.unary()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            kind, text, pos = self.tok
            if kind != "num" or not text.isdigit():
                found = "end of input" if kind == "end" else repr(text)
                raise ParseError(f"exponent must be a non-negative integer literal, found {found}", pos)
            self.advance()
            node = Pow(node, int(text))
        return node

    def unary(self):
        kind, text, pos = self.tok
        if kind == "op" and text == "-":
            self.advance()
            if self.tok[0] == "num":
                return Const(-float(self.advance()[1]))
            return Unary("neg", self.unary())
        return self.primary()

    def primary(self):
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            return Const(float(text))
        if kind == "name":
            self.advance()
            if text in VARIABLES:
                return Var(text)
            if text == "pi":
                return Const(math.pi)
            if text in FUNCTIONS or text == "sd":
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return ScaleDeriv(arg) if text == "sd" else Unary(text, arg)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", pos)


def parse(text: str) -> Expr:
    """Parse expression text into a validated AST."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0)
    return validate(_Parser(text).parse())


def to_string(e: Expr) -> str:
    """Fully parenthesized text that :func:`parse` maps back to an equal AST."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"-({to_string(e.arg)})"
        return f"{e.op}({to_string(e.arg)})"
    if isinstance(e, ScaleDeriv):
        return f"sd({to_string(e.arg)})"
    if isinstance(e, Pow):
        return f"({to_string(e.base)})^{e.exponent}"
    return f"({to_string(e.left)} {BINARY_OPS[e.op]} {to_string(e.right)})"


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Env:
    """Point ``(x, y(x), sd y(x))`` at which a Lagrangian is evaluated.

    Fields may be numpy arrays of a common shape.  ``eps`` is only needed by
    expressions containing ``sd(...)``.
    """

    x: Union[float, np.ndarray] = 0.0
    y: Union[float, np.ndarray] = 0.0
    v: Union[complex, np.ndarray] = 0j
    eps: float = None


def _eval(e, env):
    if isinstance(e, Const):
        return np.complex128(e.value)
    if isinstance(e, Var):
        return np.asarray(getattr(env, e.name), dtype=complex)
    if isinstance(e, ScaleDeriv):
        eps = env.eps
        if eps is None or not eps > 0:
            raise EvalError("sd() requires a positive eps in the environment")
        x = np.asarray(env.x, dtype=float)
        vals = [_eval(e.arg, Env(x=x + shift)) for shift in (-eps, 0.0, eps)]
        return _stencil.combine_complex(*vals, eps)
    if isinstance(e, Unary):
        a = _eval(e.arg, env)
        if e.op == "neg":
            return -a
        if e.op == "abs":
            return np.abs(a).astype(complex)
        if e.op == "log":
            if np.any(a == 0):
                raise EvalError("log of zero")
            return np.log(a)
        return getattr(np, e.op)(a)
    if isinstance(e, Pow):
        base = _eval(e.base, env)
        out = np.ones_like(base)
        for _ in range(e.exponent):
            out = out * base
        return out
    left = _eval(e.left, env)
    right = _eval(e.right, env)
    if e.op == "add":
        return left + right
    if e.op == "sub":
        return left - right
    if e.op == "mul":
        return left * right
    if np.any(right == 0):
        raise EvalError("division by zero")
    return left / right


def evaluate(e: Expr, env: Env):
    """Evaluate ``e`` with complex arithmetic.

    Returns a Python ``complex`` for scalar environments and a complex ndarray
    when any field of ``env`` is an array.
    """
    with np.errstate(all="ignore"):
        out = _eval(e, env)
    shape = np.broadcast_shapes(*(np.shape(getattr(env, k)) for k in VARIABLES))
    out = np.broadcast_to(out, shape)
    if not np.all(np.isfinite(out)):
        raise EvalError(f"non-finite value while evaluating {to_string(e)}")
    if out.ndim == 0:
        return complex(out)
    return np.array(out)


# ---------------------------------------------------------------------------
# differentiation and simplification

ZERO = Const(0.0)
ONE = Const(1.0)


def diff(e: Expr, wrt: str) -> Expr:
    """Symbolic partial derivative, simplified.

    ``v`` is treated as a single complex variable, so the result is the
    complex-analytic derivative.  Terms under ``abs`` or ``sd`` must not depend
    on ``wrt``.
    """
    if wrt not in VARIABLES:
        raise ParameterError(f"cannot differentiate with respect to {wrt!r}")
    return simplify(_diff(e, wrt))


def _diff(e, w):
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == w else ZERO
    if w not in variables(e):
        return ZERO
    if isinstance(e, ScaleDeriv):
        raise UnsupportedError(f"cannot differentiate sd(...) with respect to {w}")
    if isinstance(e, Unary):
        u = e.arg
        du = _diff(u, w)
        if e.op == "neg":
            return Unary("neg", du)
        if e.op == "abs":
            raise UnsupportedError(f"cannot differentiate abs(...) with respect to {w}")
        if e.op == "sin":
            return Binary("mul", Unary("cos", u), du)
        if e.op == "cos":
            return Unary("neg", Binary("mul", Unary("sin", u), du))
        if e.op == "exp":
            return Binary("mul", Unary("exp", u), du)
        return Binary("div", du, u)  # log
    if isinstance(e, Pow):
        n = e.exponent
        if n == 0:
            return ZERO
        return Binary("mul", Binary("mul", Const(n), Pow(e.base, n - 1)), _diff(e.base, w))
    dl = _diff(e.left, w)
    dr = _diff(e.right, w)
    if e.op in ("add", "sub"):
        return Binary(e.op, dl, dr)
    if e.op == "mul":
        return Binary("add", Binary("mul", dl, e.right), Binary("mul", e.left, dr))
    return Binary(
        "div",
        Binary("sub", Binary("mul", dl, e.right), Binary("mul", e.left, dr)),
        Pow(e.right, 2),
    )


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def _fold(e):
    """Evaluate a constant subtree, or return None if that would raise or go complex."""
    try:
        out = evaluate(e, Env())
    except EvalError:
        return None
    if out.imag != 0:
        return None
    return Const(out.real)


def _mul_factors(e):
    if isinstance(e, Binary) and e.op == "mul":
        return _mul_factors(e.left) + _mul_factors(e.right)
    return [e]


def simplify(e: Expr) -> Expr:
    """Constant folding plus the 0/1 identities. Evaluation-equivalent to ``e``."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, ScaleDeriv):
        return ScaleDeriv(simplify(e.arg))
    if isinstance(e, Unary):
        a = simplify(e.arg)
        if e.op == "neg":
            if isinstance(a, Unary) and a.op == "neg":
                return a.arg
            if isinstance(a, Const):
                return Const(-a.value)
            return Unary("neg", a)
        node = Unary(e.op, a)
        if isinstance(a, Const):
            return _fold(node) or node
        return node
    if isinstance(e, Pow):
        base = simplify(e.base)
        if e.exponent == 0:
            return ONE
        if e.exponent == 1:
            return base
        node = Pow(base, e.exponent)
        if isinstance(base, Const):
            return _fold(node) or node
        return node

    left, right = simplify(e.left), simplify(e.right)
    if isinstance(left, Const) and isinstance(right, Const):
        folded = _fold(Binary(e.op, left, right))
        if folded is not None:
            return folded
    if e.op == "add":
        if _is_const(left, 0.0):
            return right
        if _is_const(right, 0.0):
            return left
        return Binary("add", left, right)
    if e.op == "sub":
        if _is_const(right, 0.0):
            return left
        if left == right:
            return ZERO
        if _is_const(left, 0.0):
            return simplify(Unary("neg", right))
        return Binary("sub", left, right)
    if e.op == "mul":
        factors = _mul_factors(left) + _mul_factors(right)
        coeff = 1.0
        rest = []
        for fac in factors:
            if isinstance(fac, Const):
                coeff *= fac.value
            else:
                rest.append(fac)
        if not math.isfinite(coeff):
            return Binary("mul", left, right)
        if coeff == 0.0:
            return ZERO
        if not rest:
            return Const(coeff)
        node = rest[0]
        for fac in rest[1:]:
            node = Binary("mul", node, fac)
        if coeff == 1.0:
            return node
        if coeff == -1.0:
            return Unary("neg", node)
        return Binary("mul", Const(coeff), node)
    # div
    if _is_const(right, 1.0):
        return left
    if _is_const(left, 0.0):
        return ZERO
    return Binary("div", left, right)
