"""Concrete syntax for CQP programs.

Grammar (``#`` starts a line comment)::

    program  := defn*
    defn     := "process" NAME "(" [param ("," param)*] ")" "=" term
    param    := NAME ":" type
    type     := "Qbit" | "bit" | "^" "[" type ("," type)* "]"
    term     := seq ("||" seq)*
    seq      := "0"
              | NAME "(" [expr ("," expr)*] ")"            invocation
              | NAME "![" expr ("," expr)* "]" "." seq     output
              | NAME "?[" binder ("," binder)* "]" "." seq input
              | "{" NAME ("," NAME)* "*=" unitary "}" "." seq
              | "{" "measure" NAME ("," NAME)* "}" "." seq
              | "(" "qbit" NAME ("," NAME)* ")" ["."] seq
              | "(" "new" NAME ("," NAME)* ")" ["."] seq
              | "(" term ")"
    binder   := NAME ":" type
    expr     := unary ("&" unary)*
    unary    := "!" unary | "0" | "1" | NAME
              | "measure" NAME ("," NAME)*  | "(" expr ")"
    unitary  := NAME ["^" uexp]
    uexp     := "0" | "1" | NAME | "!" uexp | "(" expr ")"

``measure`` consumes names greedily across commas, which is what makes
``p![x, measure s, measure t]`` parse as intended (``measure`` is a
keyword, so the name list stops before it).
"""

from __future__ import annotations

from dataclasses import dataclass

from cqp.errors import CqpSyntaxError
from cqp.lang.ast import (
    BIT,
    QBIT,
    And,
    Apply,
    BareMeasure,
    BitLit,
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
    PowGate,
    ProcessTerm,
    Program,
    QbitAlloc,
    Type,
    UnitaryExpr,
    Var,
    free_names,
    iter_invocations,
)

KEYWORDS = {"process", "new", "qbit", "measure", "Qbit", "bit"}
GATE_NAMES = {"H", "X", "Y", "Z", "CNot"}

_PUNCT = ["*=", "||", "![", "?[", "(", ")", "[", "]", "{", "}", ",", ":", ".", "=", "^", "&", "!", "?"]


@dataclass
class Token:
    kind: str  # "name", "int", "punct", "eof"
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("int", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(Token("name", src[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if src.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise CqpSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, tokens: list[Token], gates: dict[str, MatrixGate]):
        self.toks = tokens
        self.i = 0
        self.gates = gates

    # -- token helpers

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at_punct(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == text

    def at_name(self, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == "name" and (text is None or t.text == text)

    def expect_punct(self, text: str) -> Token:
        t = self.next()
        if t.kind != "punct" or t.text != text:
            raise CqpSyntaxError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return t

    def expect_name(self) -> Token:
        t = self.next()
        if t.kind != "name":
            raise CqpSyntaxError(f"expected a name, found {t.text!r}", t.line, t.col)
        if t.text in KEYWORDS:
            raise CqpSyntaxError(f"keyword {t.text!r} cannot be used as a name", t.line, t.col)
        return t

    # -- grammar

    def program(self) -> Program:
        defs: list[Definition] = []
        while not self.peek().kind == "eof":
            defs.append(self.definition())
        return Program(tuple(defs), tuple(self.gates.values()))

    def definition(self) -> Definition:
        t = self.next()
        if not (t.kind == "name" and t.text == "process"):
            raise CqpSyntaxError(f"expected 'process', found {t.text!r}", t.line, t.col)
        name = self.expect_name()
        self.expect_punct("(")
        params: list[tuple[str, Type]] = []
        if not self.at_punct(")"):
            while True:
                p = self.expect_name()
                self.expect_punct(":")
                params.append((p.text, self.type_expr()))
                if self.at_punct(","):
                    self.next()
                    continue
                break
        self.expect_punct(")")
        self.expect_punct("=")
        body = self.term()
        return Definition(name.text, tuple(params), body, (name.line, name.col))

    def type_expr(self) -> Type:
        t = self.next()
        if t.kind == "name" and t.text == "Qbit":
            return QBIT
        if t.kind == "name" and t.text == "bit":
            return BIT
        if t.kind == "punct" and t.text == "^":
            self.expect_punct("[")
            payload = [self.type_expr()]
            while self.at_punct(","):
                self.next()
                payload.append(self.type_expr())
            self.expect_punct("]")
            return ChannelType(tuple(payload))
        raise CqpSyntaxError(f"expected a type, found {t.text!r}", t.line, t.col)

    def term(self) -> ProcessTerm:
        left = self.seq()
        while self.at_punct("||"):
            t = self.next()
            right = self.seq()
            left = Parallel(left, right, (t.line, t.col))
        return left

    def _continuation(self) -> ProcessTerm:
        self.expect_punct(".")
        return self.seq()

    def seq(self) -> ProcessTerm:
        t = self.peek()
        if t.kind == "int" and t.text == "0":
            self.next()
            return Nil((t.line, t.col))
        if t.kind == "punct" and t.text == "(":
            nxt = self.peek(1)
            if nxt.kind == "name" and nxt.text in ("qbit", "new"):
                self.next()
                kw = self.next()
                names = [self.expect_name().text]
                while self.at_punct(","):
                    self.next()
                    names.append(self.expect_name().text)
                self.expect_punct(")")
                if self.at_punct("."):
                    self.next()
                cont = self.seq()
                node = QbitAlloc if kw.text == "qbit" else NewChannel
                return node(tuple(names), cont, (t.line, t.col))
            self.next()
            inner = self.term()
            self.expect_punct(")")
            return inner
        if t.kind == "punct" and t.text == "{":
            return self.action()
        if t.kind == "name":
            name = self.expect_name()
            if self.at_punct("!["):
                self.next()
                items = [self.expr()]
                while self.at_punct(","):
                    self.next()
                    items.append(self.expr())
                self.expect_punct("]")
                return Output(name.text, tuple(items), self._continuation(), (name.line, name.col))
            if self.at_punct("?["):
                self.next()
                binders = [self.binder()]
                while self.at_punct(","):
                    self.next()
                    binders.append(self.binder())
                self.expect_punct("]")
                return Input(name.text, tuple(binders), self._continuation(), (name.line, name.col))
            if self.at_punct("("):
                self.next()
                args: list[Expr] = []
                if not self.at_punct(")"):
                    args.append(self.expr())
                    while self.at_punct(","):
                        self.next()
                        args.append(self.expr())
                self.expect_punct(")")
                return Invoke(name.text, tuple(args), (name.line, name.col))
            raise CqpSyntaxError(f"expected '![', '?[' or '(' after {name.text!r}", name.line, name.col)
        raise CqpSyntaxError(f"expected a process term, found {t.text!r}", t.line, t.col)

    def action(self) -> ProcessTerm:
        opening = self.expect_punct("{")
        if self.at_name("measure"):
            self.next()
            qubits = [Var(self.expect_name().text)]
            while self.at_punct(","):
                self.next()
                qubits.append(Var(self.expect_name().text))
            self.expect_punct("}")
            return BareMeasure(tuple(qubits), self._continuation(), (opening.line, opening.col))
        qubits = [Var(self.expect_name().text)]
        while self.at_punct(","):
            self.next()
            qubits.append(Var(self.expect_name().text))
        self.expect_punct("*=")
        gate = self.unitary()
        self.expect_punct("}")
        return Apply(tuple(qubits), gate, self._continuation(), (opening.line, opening.col))

    def binder(self) -> tuple[str, Type]:
        name = self.expect_name()
        self.expect_punct(":")
        return (name.text, self.type_expr())

    def unitary(self) -> UnitaryExpr:
        t = self.expect_name()
        if t.text in self.gates:
            base: UnitaryExpr = self.gates[t.text]
        elif t.text in GATE_NAMES:
            base = NamedGate(t.text, (t.line, t.col))
        else:
            raise CqpSyntaxError(f"unknown gate {t.text!r}", t.line, t.col)
        if self.at_punct("^"):
            self.next()
            return PowGate(base, self.unary_expr(), (t.line, t.col))
        return base

    def expr(self) -> Expr:
        left = self.unary_expr()
        while self.at_punct("&"):
            t = self.next()
            left = And(left, self.unary_expr(), (t.line, t.col))
        return left

    def unary_expr(self) -> Expr:
        t = self.peek()
        if t.kind == "punct" and t.text == "!":
            self.next()
            return Not(self.unary_expr(), (t.line, t.col))
        if t.kind == "punct" and t.text == "(":
            self.next()
            inner = self.expr()
            self.expect_punct(")")
            return inner
        if t.kind == "int":
            self.next()
            if t.text not in ("0", "1"):
                raise CqpSyntaxError(f"bit literal must be 0 or 1, found {t.text!r}", t.line, t.col)
            return BitLit(int(t.text), (t.line, t.col))
        if t.kind == "name" and t.text == "measure":
            self.next()
            qubits = [Var(self.expect_name().text)]
            while self.at_punct(",") and self.peek(1).kind == "name" and self.peek(1).text not in KEYWORDS:
                self.next()
                qubits.append(Var(self.expect_name().text))
            return Measure(tuple(qubits), (t.line, t.col))
        name = self.expect_name()
        return Var(name.text, (name.line, name.col))


# ---------------------------------------------------------------------------
# Post-parse checks: scoping, duplicates, recursion


def _check_scopes(d: Definition, known_processes: set[str]) -> None:
    def walk(t: ProcessTerm, bound: set[str]) -> None:
        if isinstance(t, Invoke):
            if t.name not in known_processes:
                raise CqpSyntaxError(f"unbound process name {t.name!r}", *(t.pos or (0, 0)))
            for a in t.args:
                check_expr(a, bound)
            return
        if isinstance(t, Nil):
            return
        if isinstance(t, Output):
            if t.channel not in bound:
                raise CqpSyntaxError(f"unbound name {t.channel!r}", *(t.pos or (0, 0)))
            for e in t.items:
                check_expr(e, bound)
            walk(t.cont, bound)
            return
        if isinstance(t, Input):
            if t.channel not in bound:
                raise CqpSyntaxError(f"unbound name {t.channel!r}", *(t.pos or (0, 0)))
            names = [b for b, _ in t.binders]
            if len(set(names)) != len(names):
                raise CqpSyntaxError("duplicate binder in input", *(t.pos or (0, 0)))
            walk(t.cont, bound | set(names))
            return
        if isinstance(t, Apply):
            for q in t.qubits:
                check_expr(q, bound)
            check_unitary(t.gate, bound)
            walk(t.cont, bound)
            return
        if isinstance(t, BareMeasure):
            for q in t.qubits:
                check_expr(q, bound)
            walk(t.cont, bound)
            return
        if isinstance(t, (QbitAlloc, NewChannel)):
            if len(set(t.names)) != len(t.names):
                raise CqpSyntaxError("duplicate name in binder", *(t.pos or (0, 0)))
            walk(t.cont, bound | set(t.names))
            return
        if isinstance(t, Parallel):
            walk(t.left, bound)
            walk(t.right, bound)
            return
        raise TypeError(f"unknown term {t!r}")

    def check_expr(e: Expr, bound: set[str]) -> None:
        for v in free_names_of_expr(e):
            if v not in bound:
                raise CqpSyntaxError(f"unbound name {v!r}", *(getattr(e, "pos", None) or (0, 0)))

    def check_unitary(u: UnitaryExpr, bound: set[str]) -> None:
        if isinstance(u, PowGate):
            check_unitary(u.base, bound)
            check_expr(u.exponent, bound)

    def free_names_of_expr(e: Expr):
        if isinstance(e, Var):
            yield e.name
        elif isinstance(e, Measure):
            for q in e.qubits:
                yield from free_names_of_expr(q)
        elif isinstance(e, Not):
            yield from free_names_of_expr(e.operand)
        elif isinstance(e, And):
            yield from free_names_of_expr(e.left)
            yield from free_names_of_expr(e.right)

    walk(d.body, {p for p, _ in d.params})


def _check_acyclic(p: Program) -> None:
    graph = {d.name: [inv.name for inv in iter_invocations(d.body)] for d in p.definitions}
    state: dict[str, int] = {}

    def visit(name: str, chain: list[str]) -> None:
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            cycle = " -> ".join(chain + [name])
            raise CqpSyntaxError(f"recursive process definitions are not supported: {cycle}")
        state[name] = 1
        for callee in graph.get(name, ()):
            visit(callee, chain + [name])
        state[name] = 2

    for name in graph:
        visit(name, [])


def parse_program(text: str, gates: dict[str, MatrixGate] | None = None) -> Program:
    """Parse, scope-check and recursion-check a program.

    `gates` registers extra named explicit-matrix gates usable in actions.
    """
    parser = _Parser(_tokenize(text), dict(gates or {}))
    prog = parser.program()
    seen: set[str] = set()
    for d in prog.definitions:
        if d.name in seen:
            raise CqpSyntaxError(f"duplicate definition of {d.name!r}", *(d.pos or (0, 0)))
        seen.add(d.name)
    for d in prog.definitions:
        _check_scopes(d, seen)
    _check_acyclic(prog)
    return prog


def parse_term(text: str, gates: dict[str, MatrixGate] | None = None) -> ProcessTerm:
    """Parse a bare process term (no scope checking); mainly for tests."""
    parser = _Parser(_tokenize(text), dict(gates or {}))
    term = parser.term()
    tok = parser.peek()
    if tok.kind != "eof":
        raise CqpSyntaxError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return term
