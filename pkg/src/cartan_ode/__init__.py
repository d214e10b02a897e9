"""Exact differential invariants of systems of third-order ODEs.

Systems y_i''' = f_i(x, y, y', y'') are handled in jet coordinates
(x, y_i, p_i = y_i', q_i = y_i''). The package computes the invariants
W2, I2, W3, I4 whose joint vanishing decides point-equivalence to
y''' = 0, the coefficients of the associated Cartan connection, and a
finite-difference oracle for cross-checking.
"""
from .connection import ConnectionCoefficients, compute_connection, verify_residuals
from .errors import (
    DimensionTooSmall,
    DivisionByZeroExpr,
    DslSyntaxError,
    EvalSingular,
    IndexOutOfRange,
    NotSymmetric,
    StencilOutOfDomain,
    UnknownFunction,
)
from .expr import P, Q, X, Y, Expr, Var, cos, diff, eval_at, exp, ln, render, sin, substitute, var
from .invariants import (
    InvariantSet,
    Tensor2,
    Tensor3,
    compute_all,
    compute_Hm1,
    compute_Hx,
    compute_I2,
    compute_I4,
    compute_W2,
    compute_W3,
    is_trivializable,
    traceless2,
    traceless3,
)
from .jet import (
    JetPoint,
    OdeSystem,
    circles_system,
    diagonal_system,
    random_jet_point,
    random_polynomial_system,
    total_derivative,
    trivial_system,
)
from .oracle import FdConfig, NumericRhs, fd_invariants, fd_partial, fd_total_derivative
from .parser import parse_expr, parse_system, render_system
from .rational import RationalForm, is_zero, normalize

__version__ = "0.1.0"

__all__ = [
    "circles_system",
    "compute_all",
    "compute_connection",
    "compute_Hm1",
    "compute_Hx",
    "compute_I2",
    "compute_I4",
    "compute_W2",
    "compute_W3",
    "ConnectionCoefficients",
    "cos",
    "diagonal_system",
    "diff",
    "DimensionTooSmall",
    "DivisionByZeroExpr",
    "DslSyntaxError",
    "eval_at",
    "EvalSingular",
    "exp",
    "Expr",
    "fd_invariants",
    "fd_partial",
    "fd_total_derivative",
    "FdConfig",
    "IndexOutOfRange",
    "InvariantSet",
    "is_trivializable",
    "is_zero",
    "JetPoint",
    "ln",
    "normalize",
    "NotSymmetric",
    "NumericRhs",
    "OdeSystem",
    "P",
    "parse_expr",
    "parse_system",
    "Q",
    "random_jet_point",
    "random_polynomial_system",
    "RationalForm",
    "render",
    "render_system",
    "sin",
    "StencilOutOfDomain",
    "substitute",
    "Tensor2",
    "Tensor3",
    "total_derivative",
    "traceless2",
    "traceless3",
    "trivial_system",
    "UnknownFunction",
    "Var",
    "var",
    "verify_residuals",
    "X",
    "Y",
]
