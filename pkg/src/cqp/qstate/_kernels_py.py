"""Pure numpy implementations of the state-vector kernels.

These are the reference implementations; `_kernels_cy` mirrors them in
Cython (bit-twiddling loops instead of reshapes). Both operate on flat
complex128 vectors of length 2^n where axis i of the implied [2]*n tensor
is the i-th register qubit, first qubit = most significant bit.
"""

import numpy as np

BACKEND_NAME = "py"


def apply_unitary(amps: np.ndarray, n: int, axes: tuple[int, ...], u: np.ndarray) -> np.ndarray:
    k = len(axes)
    t = amps.reshape([2] * n)
    t = np.moveaxis(t, axes, range(k))
    shape = t.shape
    t = u @ t.reshape(2**k, -1)
    t = np.moveaxis(t.reshape(shape), range(k), axes)
    return np.ascontiguousarray(t).reshape(-1)


def measure_probs(amps: np.ndarray, n: int, axes: tuple[int, ...]) -> np.ndarray:
    k = len(axes)
    t = amps.reshape([2] * n)
    t = np.moveaxis(t, axes, range(k))
    p = np.abs(t.reshape(2**k, -1)) ** 2
    return p.sum(axis=1)


def project_outcome(amps: np.ndarray, n: int, axes: tuple[int, ...], outcome: int, norm: float) -> np.ndarray:
    k = len(axes)
    t = amps.reshape([2] * n)
    t = np.moveaxis(t, axes, range(k)).copy()
    flat = t.reshape(2**k, -1)
    keep_row = flat[outcome] / norm
    flat[:] = 0
    flat[outcome] = keep_row
    t = np.moveaxis(flat.reshape([2] * k + [2] * (n - k)), range(k), axes)
    return np.ascontiguousarray(t).reshape(-1)


def reduced_density(amps: np.ndarray, n: int, keep: tuple[int, ...]) -> np.ndarray:
    k = len(keep)
    if k == 0:
        return np.array([[np.vdot(amps, amps)]], dtype=np.complex128)
    t = amps.reshape([2] * n)
    t = np.moveaxis(t, keep, range(k)).reshape(2**k, -1)
    return t @ t.conj().T


def phase_fix(amps: np.ndarray, tol: float) -> np.ndarray:
    for a in amps:
        m = abs(a)
        if m > tol:
            return amps * (np.conj(a) / m)
    return amps.copy()
