"""Environment input policy: which values the environment supplies on inputs.

The behavioural definitions quantify over every ambient quantum state; a
finite policy is the numeric proxy used here. The default is the
tomographically complete single-qubit set {|0>, |1>, |+>, |+i>}, whose
density matrices span the space of single-qubit densities. Verdicts carry
a caveat recording this finiteness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cqp.errors import CqpSemanticsError

_SQ2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class PolicyState:
    name: str
    amplitudes: tuple[complex, complex]

    def __post_init__(self):
        vec = np.array(self.amplitudes, dtype=complex)
        if abs(np.linalg.norm(vec) - 1.0) > 1e-9:
            raise CqpSemanticsError(f"policy state {self.name} is not normalized")

    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)


ZERO = PolicyState("|0>", (1.0 + 0j, 0j))
ONE = PolicyState("|1>", (0j, 1.0 + 0j))
PLUS = PolicyState("|+>", (_SQ2 + 0j, _SQ2 + 0j))
PLUS_I = PolicyState("|+i>", (_SQ2 + 0j, _SQ2 * 1j))


@dataclass(frozen=True)
class InputPolicy:
    qubit_states: tuple[PolicyState, ...]
    bit_values: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        if not self.qubit_states:
            raise CqpSemanticsError("input policy needs at least one qubit state")
        names = [s.name for s in self.qubit_states]
        if len(set(names)) != len(names):
            raise CqpSemanticsError("policy state names must be unique")

    @staticmethod
    def tomo() -> "InputPolicy":
        return InputPolicy((ZERO, ONE, PLUS, PLUS_I))

    @staticmethod
    def basis() -> "InputPolicy":
        return InputPolicy((ZERO, ONE))

    @staticmethod
    def explicit(amplitudes, name: str | None = None) -> "InputPolicy":
        a = np.asarray(amplitudes, dtype=complex)
        label = name or f"|{a[0]:.4g},{a[1]:.4g}>"
        return InputPolicy((PolicyState(label, (complex(a[0]), complex(a[1]))),))

    @staticmethod
    def tomo_plus_random(seed: int) -> "InputPolicy":
        rng = np.random.default_rng(seed)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = v / np.linalg.norm(v)
        extra = PolicyState(f"|rand:{seed}>", (complex(v[0]), complex(v[1])))
        return InputPolicy((ZERO, ONE, PLUS, PLUS_I, extra))

    def singletons(self):
        """One single-state policy per qubit state (per-sigma checking)."""
        return [InputPolicy((s,), self.bit_values) for s in self.qubit_states]
