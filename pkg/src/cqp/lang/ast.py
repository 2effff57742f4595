"""Abstract syntax for CQP processes, expressions and types.

All nodes are immutable. Source positions are carried for diagnostics but
excluded from structural equality. Runtime values introduced by the
semantics (qubit handles, restricted channel handles, mixture placeholders)
live in reserved namespaces — their names start with ``#`` — so they can
never collide with or be captured by user-written identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from cqp.errors import CqpTypeError

Pos = Optional[tuple[int, int]]


# ---------------------------------------------------------------------------
# Types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class QbitType(Type):
    def __str__(self) -> str:
        return "Qbit"


@dataclass(frozen=True)
class BitType(Type):
    def __str__(self) -> str:
        return "bit"


@dataclass(frozen=True)
class ChannelType(Type):
    payload: tuple[Type, ...]

    def __post_init__(self):
        if not self.payload:
            raise CqpTypeError("channel payload list must be non-empty")

    def __str__(self) -> str:
        return "^[" + ",".join(str(t) for t in self.payload) + "]"


QBIT = QbitType()
BIT = BitType()


# ---------------------------------------------------------------------------
# Expressions


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BitLit(Expr):
    value: int
    pos: Pos = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class QubitRef(Expr):
    """A concrete qubit of the global state; only created by the semantics."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ChanRef(Expr):
    """A concrete channel handle; only created by the semantics."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Measure(Expr):
    qubits: tuple[Expr, ...]
    pos: Pos = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return "measure " + ",".join(str(q) for q in self.qubits)


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr
    pos: Pos = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"!{_atom_str(self.operand)}"


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr
    pos: Pos = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"{_atom_str(self.left)}&{_atom_str(self.right)}"


def _atom_str(e: Expr) -> str:
    if isinstance(e, (Var, BitLit, QubitRef, Not)):
        return str(e)
    return f"({e})"


# ---------------------------------------------------------------------------
# Unitaries


class UnitaryExpr:
    __slots__ = ()


@dataclass(frozen=True)
class NamedGate(UnitaryExpr):
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class PowGate(UnitaryExpr):
    base: UnitaryExpr
    exponent: Expr
    pos: Pos = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        exp = self.exponent
        if isinstance(exp, (Var, BitLit)):
            return f"{self.base}^{exp}"
        if isinstance(exp, Not) and isinstance(exp.operand, (Var, BitLit)):
            return f"{self.base}^{exp}"
        return f"{self.base}^({exp})"


@dataclass(frozen=True)
class MatrixGate(UnitaryExpr):
    """A gate given by an explicit unitary matrix (catalog extension).

    The matrix is stored as nested tuples so the node stays hashable; it is
    2x2 or 4x4, checked for unitarity when resolved.
    """

    name: str
    matrix: tuple[tuple[complex, ...], ...]

    def __str__(self) -> str:
        return self.name


# ---------------------------------------------------------------------------
# Process terms


class ProcessTerm:
    __slots__ = ()


@dataclass(frozen=True)
class Nil(ProcessTerm):
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Output(ProcessTerm):
    channel: str
    items: tuple[Expr, ...]
    cont: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Input(ProcessTerm):
    channel: str
    binders: tuple[tuple[str, Type], ...]
    cont: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Apply(ProcessTerm):
    """Unitary action {q,r *= U}."""

    qubits: tuple[Expr, ...]
    gate: UnitaryExpr
    cont: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BareMeasure(ProcessTerm):
    """Action {measure q,...}: measured, result discarded.

    The semantics runs it through the one measurement path by expanding it
    into an output on a fresh restricted channel with a discarding receiver.
    """

    qubits: tuple[Expr, ...]
    cont: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class QbitAlloc(ProcessTerm):
    names: tuple[str, ...]
    cont: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NewChannel(ProcessTerm):
    names: tuple[str, ...]
    cont: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Parallel(ProcessTerm):
    left: ProcessTerm
    right: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Invoke(ProcessTerm):
    name: str
    args: tuple[Expr, ...]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[tuple[str, Type], ...]
    body: ProcessTerm
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    definitions: tuple[Definition, ...]
    gates: tuple[MatrixGate, ...] = ()

    def definition(self, name: str) -> Definition:
        for d in self.definitions:
            if d.name == name:
                return d
        raise KeyError(name)

    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.definitions)


# ---------------------------------------------------------------------------
# Substitution

Value = Expr  # BitLit | QubitRef | ChanRef | Var
Subst = Mapping[str, Value]


def subst_expr(e: Expr, sub: Subst) -> Expr:
    if isinstance(e, Var):
        return sub.get(e.name, e)
    if isinstance(e, (BitLit, QubitRef, ChanRef)):
        return e
    if isinstance(e, Measure):
        return Measure(tuple(subst_expr(q, sub) for q in e.qubits), e.pos)
    if isinstance(e, Not):
        return Not(subst_expr(e.operand, sub), e.pos)
    if isinstance(e, And):
        return And(subst_expr(e.left, sub), subst_expr(e.right, sub), e.pos)
    raise TypeError(f"unknown expression {e!r}")


def subst_unitary(u: UnitaryExpr, sub: Subst) -> UnitaryExpr:
    if isinstance(u, PowGate):
        return PowGate(subst_unitary(u.base, sub), subst_expr(u.exponent, sub), u.pos)
    return u


def _subst_channel(name: str, sub: Subst) -> str:
    v = sub.get(name)
    if v is None:
        return name
    if isinstance(v, (ChanRef, Var)):
        return v.name
    raise CqpTypeError(f"cannot substitute {v} for channel {name}")


def substitute(t: ProcessTerm, sub: Subst) -> ProcessTerm:
    """Capture-avoiding simultaneous substitution.

    Binders shield their names (occurrences under a binder of the same name
    are untouched). Substituted values are atomic, so shielding is all the
    capture-avoidance that is ever needed: runtime handles live in the
    reserved ``#`` namespace and cannot be captured by user binders.
    """
    if not sub:
        return t
    if isinstance(t, Nil):
        return t
    if isinstance(t, Output):
        return Output(
            _subst_channel(t.channel, sub),
            tuple(subst_expr(e, sub) for e in t.items),
            substitute(t.cont, sub),
            t.pos,
        )
    if isinstance(t, Input):
        inner = {k: v for k, v in sub.items() if k not in {b for b, _ in t.binders}}
        return Input(
            _subst_channel(t.channel, sub),
            t.binders,
            substitute(t.cont, inner),
            t.pos,
        )
    if isinstance(t, Apply):
        return Apply(
            tuple(subst_expr(q, sub) for q in t.qubits),
            subst_unitary(t.gate, sub),
            substitute(t.cont, sub),
            t.pos,
        )
    if isinstance(t, BareMeasure):
        return BareMeasure(
            tuple(subst_expr(q, sub) for q in t.qubits),
            substitute(t.cont, sub),
            t.pos,
        )
    if isinstance(t, QbitAlloc):
        inner = {k: v for k, v in sub.items() if k not in t.names}
        return QbitAlloc(t.names, substitute(t.cont, inner), t.pos)
    if isinstance(t, NewChannel):
        inner = {k: v for k, v in sub.items() if k not in t.names}
        return NewChannel(t.names, substitute(t.cont, inner), t.pos)
    if isinstance(t, Parallel):
        return Parallel(substitute(t.left, sub), substitute(t.right, sub), t.pos)
    if isinstance(t, Invoke):
        return Invoke(t.name, tuple(subst_expr(a, sub) for a in t.args), t.pos)
    raise TypeError(f"unknown term {t!r}")


def compose_subst(outer: Subst, inner: Subst) -> dict[str, Value]:
    """outer ∘ inner: apply inner first, then outer."""
    out = {k: subst_expr(v, outer) for k, v in inner.items()}
    for k, v in outer.items():
        out.setdefault(k, v)
    return out


# ---------------------------------------------------------------------------
# Free names


@dataclass(frozen=True)
class NameSets:
    variables: frozenset[str]
    channels: frozenset[str]
    qubits: frozenset[str]

    def union(self, other: "NameSets") -> "NameSets":
        return NameSets(
            self.variables | other.variables,
            self.channels | other.channels,
            self.qubits | other.qubits,
        )

    def without_vars(self, names) -> "NameSets":
        return NameSets(self.variables - frozenset(names), self.channels, self.qubits)

    def without_channels(self, names) -> "NameSets":
        return NameSets(self.variables, self.channels - frozenset(names), self.qubits)


EMPTY_NAMES = NameSets(frozenset(), frozenset(), frozenset())


def _expr_names(e: Expr) -> NameSets:
    if isinstance(e, Var):
        return NameSets(frozenset([e.name]), frozenset(), frozenset())
    if isinstance(e, QubitRef):
        return NameSets(frozenset(), frozenset(), frozenset([e.name]))
    if isinstance(e, ChanRef):
        return NameSets(frozenset(), frozenset([e.name]), frozenset())
    if isinstance(e, BitLit):
        return EMPTY_NAMES
    if isinstance(e, Measure):
        out = EMPTY_NAMES
        for q in e.qubits:
            out = out.union(_expr_names(q))
        return out
    if isinstance(e, Not):
        return _expr_names(e.operand)
    if isinstance(e, And):
        return _expr_names(e.left).union(_expr_names(e.right))
    raise TypeError(f"unknown expression {e!r}")


def _unitary_names(u: UnitaryExpr) -> NameSets:
    if isinstance(u, PowGate):
        return _unitary_names(u.base).union(_expr_names(u.exponent))
    return EMPTY_NAMES


def free_names(t: ProcessTerm) -> NameSets:
    """Free (variables, channels, qubit handles) of a term."""
    if isinstance(t, Nil):
        return EMPTY_NAMES
    if isinstance(t, Output):
        out = NameSets(frozenset(), frozenset([t.channel]), frozenset())
        for e in t.items:
            out = out.union(_expr_names(e))
        return out.union(free_names(t.cont))
    if isinstance(t, Input):
        inner = free_names(t.cont).without_vars(b for b, _ in t.binders)
        return inner.union(NameSets(frozenset(), frozenset([t.channel]), frozenset()))
    if isinstance(t, Apply):
        out = _unitary_names(t.gate)
        for q in t.qubits:
            out = out.union(_expr_names(q))
        return out.union(free_names(t.cont))
    if isinstance(t, BareMeasure):
        out = EMPTY_NAMES
        for q in t.qubits:
            out = out.union(_expr_names(q))
        return out.union(free_names(t.cont))
    if isinstance(t, QbitAlloc):
        return free_names(t.cont).without_vars(t.names)
    if isinstance(t, NewChannel):
        return free_names(t.cont).without_channels(t.names)
    if isinstance(t, Parallel):
        return free_names(t.left).union(free_names(t.right))
    if isinstance(t, Invoke):
        out = EMPTY_NAMES
        for a in t.args:
            out = out.union(_expr_names(a))
        return out
    raise TypeError(f"unknown term {t!r}")


def iter_invocations(t: ProcessTerm) -> Iterator[Invoke]:
    if isinstance(t, Invoke):
        yield t
    elif isinstance(t, (Output, Input, Apply, BareMeasure, QbitAlloc, NewChannel)):
        yield from iter_invocations(t.cont)
    elif isinstance(t, Parallel):
        yield from iter_invocations(t.left)
        yield from iter_invocations(t.right)


# ---------------------------------------------------------------------------
# Pretty printing


def pretty_term(t: ProcessTerm, parallel_ctx: bool = False) -> str:
    if isinstance(t, Nil):
        return "0"
    if isinstance(t, Output):
        items = ",".join(str(e) for e in t.items)
        return f"{t.channel}![{items}].{pretty_term(t.cont)}"
    if isinstance(t, Input):
        binders = ",".join(f"{b}:{ty}" for b, ty in t.binders)
        return f"{t.channel}?[{binders}].{pretty_term(t.cont)}"
    if isinstance(t, Apply):
        qs = ",".join(str(q) for q in t.qubits)
        return f"{{{qs} *= {t.gate}}}.{pretty_term(t.cont)}"
    if isinstance(t, BareMeasure):
        qs = ",".join(str(q) for q in t.qubits)
        return f"{{measure {qs}}}.{pretty_term(t.cont)}"
    if isinstance(t, QbitAlloc):
        return f"(qbit {','.join(t.names)}) {pretty_term(t.cont)}"
    if isinstance(t, NewChannel):
        return f"(new {','.join(t.names)})({pretty_term(t.cont)})"
    if isinstance(t, Parallel):
        body = f"{pretty_term(t.left, True)} || {pretty_term(t.right, True)}"
        return f"({body})" if parallel_ctx else body
    if isinstance(t, Invoke):
        return f"{t.name}({','.join(str(a) for a in t.args)})"
    raise TypeError(f"unknown term {t!r}")


def pretty_program(p: Program) -> str:
    lines = []
    for d in p.definitions:
        params = ", ".join(f"{n}:{ty}" for n, ty in d.params)
        lines.append(f"process {d.name}({params}) =")
        lines.append(f"  {pretty_term(d.body)}")
        lines.append("")
    return "\n".join(lines)
