"""Scale (quantum) calculus for Hölder curves and non-differentiable variational problems."""

from .errors import (
    DegenerateConstraintError,
    DomainError,
    EvalError,
    ParameterError,
    ParseError,
    PreconditionError,
    ScaleCalcError,
    UnsupportedError,
)
from .expr import Env, Expr, diff, evaluate, parse, simplify, to_string
from .holder import (
    HolderEstimate,
    estimate_exponent,
    holder_constant,
    is_admissible_variation,
    min_variation_exponent,
    weierstrass_curve,
)
from .isoperimetric import (
    IsoProblem,
    IsoReport,
    check_constraint,
    check_hypotheses,
    estimate_multiplier,
    two_parameter_variation_probe,
    variation_determinant,
    verify_iso_extremal,
)
from .scale_ops import (
    ComplexCurve,
    Curve,
    conj_scale_derivative,
    delta_minus,
    delta_plus,
    leibniz_defect,
    scale_derivative,
    scale_derivative_complex,
    scale_derivative_field,
)
from .variational import (
    EpsilonSchedule,
    LimitEstimate,
    QuadratureConfig,
    ResidualField,
    bracket_field,
    bracket_limit,
    el_residual,
    functional_value,
    is_extremal,
    variation_derivative,
)

__version__ = "0.1.0"
