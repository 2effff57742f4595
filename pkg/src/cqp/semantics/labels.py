"""Transition labels.

Qubit entries in labels are register handles that are canonical per
configuration; when two transition systems are compared the handles need
not coincide, so `match_key` erases them positionally.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tau:
    def __str__(self) -> str:
        return "tau"

    def match_key(self):
        return ("tau",)


@dataclass(frozen=True)
class OutputLabel:
    channel: str
    values: frozenset[tuple[int, ...]]  # distinct classical value vectors
    qubits: tuple[str, ...]  # sent qubit handles

    def __post_init__(self):
        if not self.values:
            raise ValueError("output label needs at least one value vector")

    def __str__(self) -> str:
        vals = "{" + ",".join("(" + ",".join(map(str, v)) + ")" for v in sorted(self.values)) + "}"
        qs = ",".join(self.qubits)
        parts = [p for p in (vals if any(self.values) or len(self.values) > 1 else "", qs) if p]
        return f"{self.channel}!{';'.join(parts) if parts else '()'}"

    def match_key(self):
        return ("out", self.channel, tuple(sorted(self.values)), len(self.qubits))


@dataclass(frozen=True)
class InputLabel:
    channel: str
    values: tuple[object, ...]  # ints (bits) and strs (qubit handles)

    def __str__(self) -> str:
        return f"{self.channel}?({','.join(str(v) for v in self.values)})"

    def match_key(self):
        vals = tuple("#qbit" if isinstance(v, str) else ("bit", v) for v in self.values)
        return ("in", self.channel, vals)


@dataclass(frozen=True)
class ProbStep:
    prob: float

    def __str__(self) -> str:
        return f"p={self.prob:g}"

    def match_key(self):
        return ("prob", int(round(self.prob * 1e9)))


Label = Tau | OutputLabel | InputLabel | ProbStep

TAU = Tau()
