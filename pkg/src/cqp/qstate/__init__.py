from cqp.qstate.gates import GATES, matrix_gate, rotation_gate, resolve_unitary
from cqp.qstate.kernels import BACKEND
from cqp.qstate.state import (
    DensityMatrix,
    MeasurementBranch,
    QuantumState,
    apply_gate,
    extend_with_fresh,
    extend_with_state,
    measure,
    mixture_density,
    phase_canonical,
    reduced_density,
    reindex,
    states_equal,
)

__all__ = [
    "BACKEND",
    "DensityMatrix",
    "GATES",
    "MeasurementBranch",
    "QuantumState",
    "apply_gate",
    "extend_with_fresh",
    "extend_with_state",
    "matrix_gate",
    "measure",
    "mixture_density",
    "phase_canonical",
    "reduced_density",
    "reindex",
    "resolve_unitary",
    "rotation_gate",
    "states_equal",
]
