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
    PowGate,
    ProcessTerm,
    Program,
    QbitAlloc,
    QbitType,
    QubitRef,
    Type,
    UnitaryExpr,
    Var,
    compose_subst,
    free_names,
    pretty_program,
    pretty_term,
    substitute,
)
from cqp.lang.parser import parse_program, parse_term
from cqp.lang.typecheck import TypeIssue, load_program, typecheck, unitary_arity

__all__ = [
    "BIT",
    "QBIT",
    "And",
    "Apply",
    "BareMeasure",
    "BitLit",
    "ChanRef",
    "ChannelType",
    "Definition",
    "Expr",
    "Input",
    "Invoke",
    "MatrixGate",
    "Measure",
    "NamedGate",
    "NewChannel",
    "Nil",
    "Not",
    "Output",
    "Parallel",
    "PowGate",
    "ProcessTerm",
    "Program",
    "QbitAlloc",
    "QbitType",
    "QubitRef",
    "Type",
    "TypeIssue",
    "UnitaryExpr",
    "Var",
    "compose_subst",
    "free_names",
    "load_program",
    "parse_program",
    "parse_term",
    "pretty_program",
    "pretty_term",
    "substitute",
    "typecheck",
    "unitary_arity",
]
