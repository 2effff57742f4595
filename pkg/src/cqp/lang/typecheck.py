"""Type checking with linear qubit ownership.

A qubit variable is owned from its binding (allocation, input binder, or
Qbit-typed parameter) until it is sent in an output or passed to an
invocation; afterwards any use is a linearity error. Parallel branches must
use disjoint qubit variables. Measurement does not consume the qubit.

Channels bound by ``(new c)`` carry no annotation in the concrete syntax;
their payload types are resolved by unification against their uses
(invocation arguments, input binder annotations, output payload types).
"""

from __future__ import annotations

from dataclasses import dataclass

from cqp.errors import CqpTypeError
from cqp.lang.ast import (
    BIT,
    QBIT,
    And,
    Apply,
    BareMeasure,
    BitLit,
    ChanRef,
    ChannelType,
    Definition,
    Expr,
    Input,
    Invoke,
    MatrixGate,
    Measure,
    NamedGate,
    NewChannel,
    Nil,
    Not,
    Output,
    Parallel,
    Pos,
    PowGate,
    ProcessTerm,
    Program,
    QbitAlloc,
    QbitType,
    QubitRef,
    Type,
    UnitaryExpr,
    Var,
    free_names,
)

GATE_ARITY = {"H": 1, "X": 1, "Y": 1, "Z": 1, "CNot": 2}


@dataclass
class TypeIssue:
    message: str
    pos: Pos = None

    def __str__(self) -> str:
        if self.pos:
            return f"{self.pos[0]}:{self.pos[1]}: {self.message}"
        return self.message


class _Cell:
    """A channel type that may still be unresolved (from ``(new c)``)."""

    __slots__ = ("type",)

    def __init__(self, type_: Type | None):
        self.type = type_


def unitary_arity(u: UnitaryExpr) -> int:
    if isinstance(u, NamedGate):
        return GATE_ARITY[u.name]
    if isinstance(u, PowGate):
        return unitary_arity(u.base)
    if isinstance(u, MatrixGate):
        return 1 if len(u.matrix) == 2 else 2
    raise TypeError(f"unknown unitary {u!r}")


class _DefChecker:
    def __init__(self, program: Program, issues: list[TypeIssue]):
        self.program = program
        self.issues = issues
        self.env: dict[str, _Cell] = {}
        self.live: set[str] = set()
        self.dead: set[str] = set()

    def error(self, message: str, pos: Pos = None) -> None:
        self.issues.append(TypeIssue(message, pos))

    # -- expression typing; returns a flat list of slot types (Measure of k
    # qubits occupies k bit slots) or None after reporting an error.

    def flat_type(self, e: Expr) -> list[Type] | None:
        if isinstance(e, Var):
            cell = self.env.get(e.name)
            if cell is None:
                self.error(f"unbound name {e.name!r}", e.pos)
                return None
            if isinstance(cell.type, QbitType):
                if not self.check_qubit_use(e):
                    return None
            return [cell.type] if cell.type is not None else None
        if isinstance(e, BitLit):
            return [BIT]
        if isinstance(e, QubitRef):
            return [QBIT]
        if isinstance(e, ChanRef):
            self.error("channel handles cannot appear in expressions")
            return None
        if isinstance(e, Measure):
            ok = True
            for q in e.qubits:
                ok = self.check_qubit_use(q) and ok
            return [BIT] * len(e.qubits) if ok else None
        if isinstance(e, (Not, And)):
            operands = [e.operand] if isinstance(e, Not) else [e.left, e.right]
            ok = True
            for op in operands:
                ts = self.flat_type(op)
                if ts is None:
                    ok = False
                elif ts != [BIT]:
                    self.error("bit operators apply to single bit expressions", e.pos)
                    ok = False
            return [BIT] if ok else None
        raise TypeError(f"unknown expression {e!r}")

    def check_qubit_use(self, q: Expr) -> bool:
        """A non-consuming use of a qubit (measurement or gate operand)."""
        if isinstance(q, QubitRef):
            return True
        if not isinstance(q, Var):
            self.error(f"expected a qubit, found expression {q}", getattr(q, "pos", None))
            return False
        cell = self.env.get(q.name)
        if cell is None:
            self.error(f"unbound name {q.name!r}", q.pos)
            return False
        if not isinstance(cell.type, QbitType):
            self.error(f"{q.name!r} is not a qubit", q.pos)
            return False
        if q.name in self.dead:
            self.error(f"qubit {q.name!r} used after being sent", q.pos)
            return False
        if q.name not in self.live:
            self.error(f"qubit {q.name!r} is not owned here", q.pos)
            return False
        return True

    def consume_qubit(self, q: Expr, pos: Pos, seen: set[str]) -> None:
        """A consuming use (sent in a message or passed to an invocation)."""
        if isinstance(q, QubitRef):
            if q.name in seen:
                self.error(f"qubit {q.name} duplicated in message", pos)
            seen.add(q.name)
            return
        assert isinstance(q, Var)
        if q.name in seen:
            self.error(f"qubit {q.name!r} duplicated in message", pos)
            return
        if self.check_qubit_use(q):
            seen.add(q.name)
            self.live.discard(q.name)
            self.dead.add(q.name)

    # -- channel typing

    def channel_cell(self, name: str, pos: Pos) -> _Cell | None:
        cell = self.env.get(name)
        if cell is None:
            self.error(f"unbound name {name!r}", pos)
            return None
        if cell.type is not None and not isinstance(cell.type, ChannelType):
            self.error(f"{name!r} is not a channel", pos)
            return None
        return cell

    def unify_channel(self, cell: _Cell, payload: tuple[Type, ...], name: str, pos: Pos) -> None:
        want = ChannelType(payload)
        if cell.type is None:
            cell.type = want
        elif cell.type != want:
            self.error(
                f"channel {name!r} used at type {want} but has type {cell.type}", pos
            )

    # -- terms

    def check(self, t: ProcessTerm) -> None:
        if isinstance(t, Nil):
            return
        if isinstance(t, Output):
            cell = self.channel_cell(t.channel, t.pos)
            slots: list[Type] = []
            seen: set[str] = set()
            ok = True
            for item in t.items:
                if isinstance(item, (Var, QubitRef)) and self._is_qubit(item):
                    self.consume_qubit(item, t.pos, seen)
                    slots.append(QBIT)
                    continue
                ts = self.flat_type(item)
                if ts is None:
                    ok = False
                else:
                    slots.extend(ts)
            if cell is not None and ok:
                self.unify_channel(cell, tuple(slots), t.channel, t.pos)
            self.check(t.cont)
            return
        if isinstance(t, Input):
            cell = self.channel_cell(t.channel, t.pos)
            if cell is not None:
                self.unify_channel(cell, tuple(ty for _, ty in t.binders), t.channel, t.pos)
            shadowed = [b for b, _ in t.binders if b in self.env]
            for b in shadowed:
                self.error(f"binder {b!r} shadows a name already in scope", t.pos)
            added = []
            for b, ty in t.binders:
                if b not in self.env:
                    self.env[b] = _Cell(ty)
                    added.append(b)
                    if isinstance(ty, QbitType):
                        self.live.add(b)
            self.check(t.cont)
            return
        if isinstance(t, Apply):
            arity = unitary_arity(t.gate)
            if arity != len(t.qubits):
                self.error(
                    f"gate {t.gate} acts on {arity} qubit(s) but {len(t.qubits)} given", t.pos
                )
            names = [q.name for q in t.qubits if isinstance(q, (Var, QubitRef))]
            if len(set(names)) != len(names):
                self.error("gate applied to duplicated qubits", t.pos)
            for q in t.qubits:
                self.check_qubit_use(q)
            self._check_exponents(t.gate, t.pos)
            self.check(t.cont)
            return
        if isinstance(t, BareMeasure):
            for q in t.qubits:
                self.check_qubit_use(q)
            self.check(t.cont)
            return
        if isinstance(t, QbitAlloc):
            for name in t.names:
                if name in self.env:
                    self.error(f"binder {name!r} shadows a name already in scope", t.pos)
                else:
                    self.env[name] = _Cell(QBIT)
                    self.live.add(name)
            self.check(t.cont)
            return
        if isinstance(t, NewChannel):
            for name in t.names:
                if name in self.env:
                    self.error(f"binder {name!r} shadows a name already in scope", t.pos)
                else:
                    self.env[name] = _Cell(None)
            self.check(t.cont)
            return
        if isinstance(t, Parallel):
            lv = self._qubit_vars(t.left)
            rv = self._qubit_vars(t.right)
            overlap = lv & rv
            if overlap:
                self.error(
                    f"parallel branches share qubit(s) {', '.join(sorted(overlap))}", t.pos
                )
            saved_live = set(self.live)
            self.live = saved_live & lv
            self.check(t.left)
            self.live = saved_live & rv
            self.check(t.right)
            self.live = (saved_live - lv - rv) | (self.live & rv)
            return
        if isinstance(t, Invoke):
            try:
                d = self.program.definition(t.name)
            except KeyError:
                self.error(f"unbound process name {t.name!r}", t.pos)
                return
            if len(d.params) != len(t.args):
                self.error(
                    f"{t.name} expects {len(d.params)} argument(s), got {len(t.args)}", t.pos
                )
                return
            seen: set[str] = set()
            for (pname, pty), arg in zip(d.params, t.args):
                if isinstance(pty, QbitType):
                    if isinstance(arg, (Var, QubitRef)):
                        self.consume_qubit(arg, t.pos, seen)
                    else:
                        self.error(f"argument for qubit parameter {pname!r} must be a qubit", t.pos)
                elif isinstance(pty, ChannelType):
                    if isinstance(arg, Var):
                        cell = self.channel_cell(arg.name, t.pos)
                        if cell is not None:
                            if cell.type is None:
                                cell.type = pty
                            elif cell.type != pty:
                                self.error(
                                    f"channel {arg.name!r} has type {cell.type}, "
                                    f"parameter {pname!r} needs {pty}",
                                    t.pos,
                                )
                    elif not isinstance(arg, ChanRef):
                        self.error(f"argument for channel parameter {pname!r} must be a channel", t.pos)
                else:
                    ts = self.flat_type(arg)
                    if ts is not None and ts != [BIT]:
                        self.error(f"argument for bit parameter {pname!r} must be a bit", t.pos)
            return
        raise TypeError(f"unknown term {t!r}")

    def _is_qubit(self, item: Expr) -> bool:
        if isinstance(item, QubitRef):
            return True
        if isinstance(item, Var):
            cell = self.env.get(item.name)
            return cell is not None and isinstance(cell.type, QbitType)
        return False

    def _check_exponents(self, u: UnitaryExpr, pos: Pos) -> None:
        if isinstance(u, PowGate):
            ts = self.flat_type(u.exponent)
            if ts is not None and ts != [BIT]:
                self.error("gate exponent must be a bit expression", pos)
            self._check_exponents(u.base, pos)

    def _qubit_vars(self, t: ProcessTerm) -> set[str]:
        names = free_names(t)
        out = set()
        for v in names.variables:
            cell = self.env.get(v)
            if cell is not None and isinstance(cell.type, QbitType):
                out.add(v)
        out |= names.qubits
        return out


def typecheck(program: Program) -> list[TypeIssue]:
    """Returns all type and linearity issues; empty list means well-typed."""
    issues: list[TypeIssue] = []
    for d in program.definitions:
        checker = _DefChecker(program, issues)
        pnames = [p for p, _ in d.params]
        if len(set(pnames)) != len(pnames):
            issues.append(TypeIssue(f"duplicate parameter in {d.name}", d.pos))
            continue
        for pname, pty in d.params:
            checker.env[pname] = _Cell(pty)
            if isinstance(pty, QbitType):
                checker.live.add(pname)
        checker.check(d.body)
    return issues


def load_program(text: str, gates=None) -> Program:
    """Parse + typecheck, raising on the first problem."""
    from cqp.lang.parser import parse_program

    program = parse_program(text, gates)
    issues = typecheck(program)
    if issues:
        raise CqpTypeError("; ".join(str(i) for i in issues))
    return program
