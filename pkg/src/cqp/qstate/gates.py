"""Gate catalog and resolution of unitary expressions to concrete matrices."""

from __future__ import annotations

import numpy as np

from cqp.errors import CqpSemanticsError, CqpTypeError
from cqp.lang.ast import (
    BitLit,
    MatrixGate,
    NamedGate,
    PowGate,
    UnitaryExpr,
)

_SQ2 = 1.0 / np.sqrt(2.0)

GATES: dict[str, np.ndarray] = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "CNot": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}

UNITARITY_TOL = 1e-9


def is_unitary(m: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))) <= tol)


def matrix_gate(name: str, matrix) -> MatrixGate:
    """Wrap an explicit matrix as a named gate, verifying unitarity."""
    m = np.asarray(matrix, dtype=complex)
    if m.shape not in ((2, 2), (4, 4)):
        raise CqpTypeError(f"explicit gate {name!r} must be 2x2 or 4x4, got {m.shape}")
    if not is_unitary(m):
        raise CqpTypeError(f"explicit gate {name!r} is not unitary within {UNITARITY_TOL}")
    return MatrixGate(name, tuple(tuple(complex(x) for x in row) for row in m))


def rotation_gate(p: float, name: str | None = None) -> MatrixGate:
    """Real rotation sending |0> to sqrt(1-p)|0> + sqrt(p)|1>."""
    c, s = np.sqrt(1.0 - p), np.sqrt(p)
    return matrix_gate(name or f"Rot{p}", [[c, -s], [s, c]])


def resolve_unitary(u: UnitaryExpr, env_eval) -> np.ndarray:
    """Resolve a unitary expression to its matrix.

    `env_eval(expr) -> int` evaluates bit expressions (the exponents of
    conditional gates) in the current component's valuation; U^0 is the
    identity.
    """
    if isinstance(u, NamedGate):
        return GATES[u.name]
    if isinstance(u, MatrixGate):
        m = np.array(u.matrix, dtype=complex)
        if not is_unitary(m):
            raise CqpSemanticsError(f"explicit gate {u.name!r} is not unitary")
        return m
    if isinstance(u, PowGate):
        base = resolve_unitary(u.base, env_eval)
        exponent = env_eval(u.exponent)
        if exponent not in (0, 1):
            raise CqpSemanticsError(f"gate exponent must evaluate to a bit, got {exponent}")
        return base if exponent == 1 else np.eye(base.shape[0], dtype=complex)
    raise TypeError(f"unknown unitary {u!r}")


def const_eval(expr) -> int:
    """Evaluate a closed bit expression (used for exponents without variables)."""
    from cqp.lang.ast import And, Measure, Not, Var

    if isinstance(expr, BitLit):
        return expr.value
    if isinstance(expr, Not):
        return 1 - const_eval(expr.operand)
    if isinstance(expr, And):
        return const_eval(expr.left) & const_eval(expr.right)
    if isinstance(expr, (Var, Measure)):
        raise CqpSemanticsError(f"expression {expr} is not closed")
    raise TypeError(f"unknown expression {expr!r}")
