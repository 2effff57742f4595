"""Named-qubit registers: gate application, measurement, partial trace.

A register holds an ordered tuple of globally unique qubit names and a unit
complex amplitude vector of length 2^n; the first-listed qubit is the most
significant bit of the basis index, so ``|q r>`` with q=1, r=0 is index 2.
All operations are pure: arrays are never mutated after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cqp.errors import CqpSemanticsError
from cqp.lang.ast import UnitaryExpr
from cqp.qstate import kernels
from cqp.qstate.gates import resolve_unitary

NORM_TOL = 1e-9
BRANCH_EPS = 1e-12
MAX_QUBITS = 16


def _as_vector(amps) -> np.ndarray:
    v = np.ascontiguousarray(amps, dtype=np.complex128)
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class QuantumState:
    qubits: tuple[str, ...]
    amps: np.ndarray = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "amps", _as_vector(self.amps))
        n = len(self.qubits)
        if n > MAX_QUBITS:
            raise CqpSemanticsError(f"register limit is {MAX_QUBITS} qubits, got {n}")
        if len(set(self.qubits)) != n:
            raise CqpSemanticsError("qubit names must be unique")
        if self.amps.shape != (2**n,):
            raise CqpSemanticsError(
                f"amplitude vector has length {self.amps.shape}, expected {2**n}"
            )
        if abs(np.linalg.norm(self.amps) - 1.0) > NORM_TOL:
            raise CqpSemanticsError("state vector is not normalized")

    @staticmethod
    def empty() -> "QuantumState":
        return QuantumState((), np.array([1.0], dtype=complex))

    @staticmethod
    def from_bits(qubits: tuple[str, ...], bits: str) -> "QuantumState":
        amps = np.zeros(2 ** len(qubits), dtype=complex)
        amps[int(bits, 2) if bits else 0] = 1.0
        return QuantumState(qubits, amps)

    @property
    def n(self) -> int:
        return len(self.qubits)

    def axis(self, name: str) -> int:
        try:
            return self.qubits.index(name)
        except ValueError:
            raise CqpSemanticsError(f"unknown qubit {name!r}") from None

    def axes(self, names) -> tuple[int, ...]:
        return tuple(self.axis(n) for n in names)


@dataclass(frozen=True)
class DensityMatrix:
    qubits: tuple[str, ...]
    entries: np.ndarray = field(compare=False)

    HERMITIAN_TOL = 1e-9
    TRACE_TOL = 1e-9
    PSD_TOL = 1e-9

    def __post_init__(self):
        m = np.ascontiguousarray(self.entries, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        dim = 2 ** len(self.qubits)
        if m.shape != (dim, dim):
            raise CqpSemanticsError(f"density matrix shape {m.shape}, expected {(dim, dim)}")
        if np.max(np.abs(m - m.conj().T)) > self.HERMITIAN_TOL:
            raise CqpSemanticsError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > self.TRACE_TOL or abs(np.trace(m).imag) > self.TRACE_TOL:
            raise CqpSemanticsError("density matrix trace is not 1")
        if np.min(np.linalg.eigvalsh(m)) < -self.PSD_TOL:
            raise CqpSemanticsError("density matrix is not positive semidefinite")

    def close_to(self, other: "DensityMatrix", tol: float) -> bool:
        if self.entries.shape != other.entries.shape:
            return False
        return bool(np.max(np.abs(self.entries - other.entries)) <= tol)


@dataclass(frozen=True)
class MeasurementBranch:
    outcome: tuple[int, ...]
    weight: float
    post_state: QuantumState


def extend_with_fresh(state: QuantumState, names) -> QuantumState:
    """Tensor-extend with one |0> qubit per name, appended in order."""
    names = tuple(names)
    for name in names:
        if name in state.qubits:
            raise CqpSemanticsError(f"qubit {name!r} already in register")
    if len(set(names)) != len(names):
        raise CqpSemanticsError("duplicate qubit names in allocation")
    k = len(names)
    amps = np.zeros(len(state.amps) * 2**k, dtype=complex)
    amps[:: 2**k] = state.amps  # new qubits are least-significant bits, all 0
    return QuantumState(state.qubits + names, amps)


def extend_with_state(state: QuantumState, name: str, single: np.ndarray) -> QuantumState:
    """Tensor-extend with one qubit in the given single-qubit state."""
    if name in state.qubits:
        raise CqpSemanticsError(f"qubit {name!r} already in register")
    amps = np.kron(state.amps, np.asarray(single, dtype=complex))
    return QuantumState(state.qubits + (name,), amps)


def apply_gate(
    state: QuantumState,
    u: UnitaryExpr | np.ndarray,
    targets,
    env_eval=None,
) -> QuantumState:
    """Apply a unitary to the named target qubits.

    `u` may be a unitary expression (conditional powers evaluated through
    `env_eval`) or a concrete matrix.
    """
    targets = tuple(targets)
    if len(set(targets)) != len(targets):
        raise CqpSemanticsError("gate target qubits must be distinct")
    axes = state.axes(targets)
    if isinstance(u, np.ndarray):
        matrix = u
    else:
        matrix = resolve_unitary(u, env_eval or _no_env)
    if matrix.shape != (2 ** len(targets),) * 2:
        raise CqpSemanticsError(
            f"gate of dimension {matrix.shape[0]} applied to {len(targets)} qubit(s)"
        )
    amps = kernels.apply_unitary(state.amps, state.n, axes, matrix)
    return QuantumState(state.qubits, amps)


def _no_env(expr):
    from cqp.qstate.gates import const_eval

    return const_eval(expr)


def measure(state: QuantumState, targets) -> list[MeasurementBranch]:
    """Standard-basis measurement of the named qubits.

    One branch per outcome with weight above the branch cutoff, ordered by
    outcome; post-states are renormalized projections.
    """
    targets = tuple(targets)
    axes = state.axes(targets)
    k = len(targets)
    probs = kernels.measure_probs(state.amps, state.n, axes)
    branches = []
    for outcome in range(2**k):
        w = float(probs[outcome])
        if w < BRANCH_EPS:
            continue
        amps = kernels.project_outcome(state.amps, state.n, axes, outcome, float(np.sqrt(w)))
        bits = tuple((outcome >> (k - 1 - pos)) & 1 for pos in range(k))
        branches.append(MeasurementBranch(bits, w, QuantumState(state.qubits, amps)))
    return branches


def reduced_density(state: QuantumState, keep) -> DensityMatrix:
    """Partial trace onto the named qubits, in the given order."""
    keep = tuple(keep)
    axes = state.axes(keep)
    rho = kernels.reduced_density(state.amps, state.n, axes)
    return DensityMatrix(keep, rho)


def mixture_density(components, keep, weight_tol: float = 1e-9) -> DensityMatrix:
    """Convex combination of per-component reduced densities.

    `components` is a list of (weight, QuantumState); weights must sum to 1.
    """
    components = list(components)
    total = sum(w for w, _ in components)
    if abs(total - 1.0) > weight_tol:
        raise CqpSemanticsError(f"mixture weights sum to {total}, expected 1")
    keep = tuple(keep)
    rho = None
    for w, s in components:
        part = w * kernels.reduced_density(s.amps, s.n, s.axes(keep))
        rho = part if rho is None else rho + part
    return DensityMatrix(keep, rho)


def reindex(state: QuantumState, order) -> QuantumState:
    """Reorder the register to the given qubit-name order."""
    order = tuple(order)
    if set(order) != set(state.qubits) or len(order) != state.n:
        raise CqpSemanticsError("reindex order must be a permutation of the register")
    if order == state.qubits:
        return state
    perm = state.axes(order)
    t = state.amps.reshape([2] * state.n).transpose(perm)
    return QuantumState(order, np.ascontiguousarray(t).reshape(-1))


def states_equal(s: QuantumState, t: QuantumState, tol: float = 1e-9) -> bool:
    """Equality up to a global phase, after aligning qubit order."""
    if set(s.qubits) != set(t.qubits):
        raise CqpSemanticsError("states are over different qubit sets")
    order = tuple(sorted(s.qubits))
    a = reindex(s, order).amps
    b = reindex(t, order).amps
    idx = int(np.argmax(np.abs(a)))
    if abs(b[idx]) <= tol < abs(a[idx]):
        return False
    phase = a[idx] / b[idx]
    mag = abs(phase)
    if mag == 0:
        return False
    phase /= mag
    return bool(np.max(np.abs(a - phase * b)) <= tol)


def phase_canonical(state: QuantumState, tol: float = 1e-9) -> QuantumState:
    """Rotate so the first amplitude of magnitude > tol is real positive."""
    return QuantumState(state.qubits, kernels.phase_fix(state.amps, tol))
