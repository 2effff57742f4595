"""Independent brute-force oracles for the quantum-state engine.

Everything here is deliberately written against full 2^n x 2^n matrices and
explicit index loops so that it shares no code path with the package kernels.
"""

import numpy as np


def lift_gate(u: np.ndarray, targets: list[int], n: int) -> np.ndarray:
    """Lift a 2^k x 2^k gate on `targets` (axis indices) to the full register.

    Builds the full matrix entry by entry: basis index i maps bit i_axis of
    each axis; rows/cols agree outside the targets.
    """
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    k = len(targets)
    for col in range(dim):
        col_bits = [(col >> (n - 1 - a)) & 1 for a in range(n)]
        sub_col = 0
        for t in targets:
            sub_col = (sub_col << 1) | col_bits[t]
        for sub_row in range(2**k):
            amp = u[sub_row, sub_col]
            if amp == 0:
                continue
            row_bits = list(col_bits)
            for pos, t in enumerate(targets):
                row_bits[t] = (sub_row >> (k - 1 - pos)) & 1
            row = 0
            for b in row_bits:
                row = (row << 1) | b
            full[row, col] += amp
    return full


def born_weights(amps: np.ndarray, targets: list[int], n: int) -> dict[tuple[int, ...], float]:
    """Measurement outcome weights via explicit projectors P_o = |o><o| on targets."""
    dim = 2**n
    out: dict[tuple[int, ...], float] = {}
    k = len(targets)
    for outcome in range(2**k):
        bits = tuple((outcome >> (k - 1 - pos)) & 1 for pos in range(k))
        proj = np.zeros((dim, dim), dtype=complex)
        for i in range(dim):
            if all(((i >> (n - 1 - t)) & 1) == bits[pos] for pos, t in enumerate(targets)):
                proj[i, i] = 1.0
        w = float(np.real(np.conj(amps) @ proj @ amps))
        out[bits] = w
    return out


def project_outcome(amps: np.ndarray, targets: list[int], bits: tuple[int, ...], n: int) -> np.ndarray:
    """Renormalized projection of `amps` onto the given outcome of `targets`."""
    res = amps.copy()
    for i in range(2**n):
        if any(((i >> (n - 1 - t)) & 1) != bits[pos] for pos, t in enumerate(targets)):
            res[i] = 0.0
    norm = np.linalg.norm(res)
    return res / norm


def partial_trace(amps: np.ndarray, keep: list[int], n: int) -> np.ndarray:
    """Reduced density matrix over `keep` (axis indices, in the given order),
    computed by direct summation over the traced-out indices."""
    k = len(keep)
    rest = [a for a in range(n) if a not in keep]
    rho = np.zeros((2**k, 2**k), dtype=complex)
    for a in range(2**k):
        for b in range(2**k):
            total = 0.0 + 0.0j
            for r in range(2 ** len(rest)):
                ia = _assemble(a, b=None, keep=keep, rest=rest, rest_val=r, n=n, sub=a)
                ib = _assemble(b, b=None, keep=keep, rest=rest, rest_val=r, n=n, sub=b)
                total += amps[ia] * np.conj(amps[ib])
            rho[a, b] = total
    return rho


def _assemble(sub_val: int, b, keep: list[int], rest: list[int], rest_val: int, n: int, sub: int) -> int:
    bits = [0] * n
    for pos, t in enumerate(keep):
        bits[t] = (sub >> (len(keep) - 1 - pos)) & 1
    for pos, t in enumerate(rest):
        bits[t] = (rest_val >> (len(rest) - 1 - pos)) & 1
    idx = 0
    for bit in bits:
        idx = (idx << 1) | bit
    return idx


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)
