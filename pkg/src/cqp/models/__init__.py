"""Built-in model catalog: the error-correction systems, their specification
processes, the measurement pair used by the congruence regression, and the
teleportation protocol. Each entry's declared relationships are verified by
the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from cqp.lang import MatrixGate, Program, load_program
from cqp.lang.ast import QubitRef
from cqp.qstate import QuantumState, rotation_gate
from cqp.semantics import Config, initial_config

_SQ2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    source: str
    entry: str
    interface: tuple[str, ...]
    equivalent_to: tuple[str, ...] = ()
    inequivalent_to: tuple[str, ...] = ()
    gates: tuple[MatrixGate, ...] = ()
    note: str = ""

    def program(self) -> Program:
        return load_program(self.source, {g.name: g for g in self.gates})


def _read(name: str) -> str:
    return resources.files("cqp.models").joinpath(name).read_text()


def catalog() -> list[CatalogEntry]:
    qecc_src = _read("qecc.cqp")
    qecc2_src = _read("qecc2.cqp")
    teleport_src = _read("teleport.cqp")
    pair_src = _read("measure_pair.cqp")
    entries = [
        CatalogEntry(
            name="QECC",
            source=qecc_src,
            entry="QECC",
            interface=("a", "d"),
            equivalent_to=("Identity", "Teleport"),
        ),
        CatalogEntry(
            name="Identity",
            source=qecc_src,
            entry="Identity",
            interface=("a", "d"),
        ),
        CatalogEntry(
            name="QECC2",
            source=qecc2_src,
            entry="QECC2",
            interface=("a", "d"),
            equivalent_to=("BitFlip",),
            inequivalent_to=("Identity",),
        ),
        CatalogEntry(
            name="BitFlip",
            source=qecc2_src,
            entry="BitFlip",
            interface=("a", "d"),
        ),
        CatalogEntry(
            name="Teleport",
            source=teleport_src,
            entry="Teleport",
            interface=("a", "d"),
            equivalent_to=("Identity", "QECC"),
            note="textbook construction",
        ),
        CatalogEntry(
            name="P",
            source=pair_src,
            entry="P",
            interface=("a",),
            equivalent_to=("Q",),
        ),
        CatalogEntry(
            name="Q",
            source=pair_src,
            entry="Q",
            interface=("a",),
        ),
        parameterized_qecc2(0.25, name="QECC2P"),
    ]
    return entries


def get_entry(name: str) -> CatalogEntry:
    for e in catalog():
        if e.name == name:
            return e
    raise KeyError(name)


def parameterized_qecc2(p: float, name: str = "QECC2P") -> CatalogEntry:
    """QECC2 with each coin replaced by a rotation giving outcome 1 with
    probability p (fair coins are the p = 1/2 case)."""
    gate = rotation_gate(p, "Rot")
    src = _read("qecc2.cqp").replace("*= H}", "*= Rot}")
    return CatalogEntry(
        name=name,
        source=src,
        entry="QECC2",
        interface=("a", "d"),
        inequivalent_to=("Identity",) if p > 0 else (),
        gates=(gate,),
        note=f"flip probability {p}",
    )


def measurement_pair_configs(side: str) -> tuple[Program, Config, frozenset[str]]:
    """Initial configuration for P||R (side="P") or Q||R (side="Q").

    The ambient state is a maximally entangled pair (p0, p1); the process
    owns p1 (which R emits) while p0 stays with the environment, to be
    handed over on the input. This is the scenario where collapsing a
    measurement into an immediate probability distribution becomes
    observable.
    """
    program = load_program(
        _read("measure_pair.cqp")
        + "\nprocess PR(a:^[Qbit], b:^[Qbit], q:Qbit) = P(a) || R(b,q)"
        + "\nprocess QR(a:^[Qbit], b:^[Qbit], q:Qbit) = Q(a) || R(b,q)"
    )
    bell = QuantumState(("#q00", "#q01"), np.array([_SQ2, 0, 0, _SQ2], dtype=complex))
    entry = "PR" if side == "P" else "QR"
    cfg, interface = initial_config(
        program,
        entry,
        qubit_args={"q": "#q01"},
        state=bell,
        owned=frozenset({"#q01"}),
    )
    return program, cfg, interface
