# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the state-vector kernels.

Same contracts as `_kernels_py`; explicit bit-twiddling loops instead of
numpy reshapes. Registers are small (n <= 16) so everything is dense.
"""

import numpy as np

BACKEND_NAME = "cy"


cdef inline Py_ssize_t _scatter(Py_ssize_t base, Py_ssize_t sub, long* shifts, int k) noexcept:
    # Insert the k sub-index bits into `base` at the target bit positions.
    cdef int pos
    cdef Py_ssize_t idx = base
    for pos in range(k):
        if (sub >> (k - 1 - pos)) & 1:
            idx |= (<Py_ssize_t>1) << shifts[pos]
    return idx


cdef void _fill_shifts(int n, tuple axes, long* shifts):
    cdef int pos
    for pos in range(len(axes)):
        shifts[pos] = n - 1 - <long>axes[pos]


cdef Py_ssize_t _base_iter_setup(int n, tuple axes, long* shifts, Py_ssize_t* mask):
    # Returns number of base indices (indices with zeros at all target bits);
    # mask has ones everywhere except the target bits.
    cdef int k = len(axes)
    cdef Py_ssize_t m = ((<Py_ssize_t>1) << n) - 1
    cdef int pos
    _fill_shifts(n, axes, shifts)
    for pos in range(k):
        m ^= (<Py_ssize_t>1) << shifts[pos]
    mask[0] = m
    return (<Py_ssize_t>1) << (n - k)


cdef inline Py_ssize_t _expand(Py_ssize_t compact, Py_ssize_t mask, int n) noexcept:
    # Spread the bits of `compact` over the set bits of `mask` (low to high).
    cdef Py_ssize_t idx = 0
    cdef int bit
    for bit in range(n):
        if (mask >> bit) & 1:
            if compact & 1:
                idx |= (<Py_ssize_t>1) << bit
            compact >>= 1
    return idx


def apply_unitary(amps, int n, tuple axes, u):
    cdef int k = len(axes)
    cdef Py_ssize_t dim_sub = (<Py_ssize_t>1) << k
    cdef long shifts[16]
    cdef Py_ssize_t mask = 0
    cdef Py_ssize_t nbase = _base_iter_setup(n, axes, shifts, &mask)
    cdef const double complex[::1] src = np.ascontiguousarray(amps, dtype=np.complex128)
    out_arr = np.empty(1 << n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex[:, ::1] um = np.ascontiguousarray(u, dtype=np.complex128)
    cdef Py_ssize_t b, base, r, c, idx_r
    cdef double complex acc
    for b in range(nbase):
        base = _expand(b, mask, n)
        for r in range(dim_sub):
            acc = 0
            for c in range(dim_sub):
                acc += um[r, c] * src[_scatter(base, c, shifts, k)]
            out[_scatter(base, r, shifts, k)] = acc
    return out_arr


def measure_probs(amps, int n, tuple axes):
    cdef int k = len(axes)
    cdef Py_ssize_t dim_sub = (<Py_ssize_t>1) << k
    cdef long shifts[16]
    cdef Py_ssize_t mask = 0
    cdef Py_ssize_t nbase = _base_iter_setup(n, axes, shifts, &mask)
    cdef const double complex[::1] src = np.ascontiguousarray(amps, dtype=np.complex128)
    probs_arr = np.zeros(dim_sub, dtype=np.float64)
    cdef double[::1] probs = probs_arr
    cdef Py_ssize_t b, base, o
    cdef double complex a
    for b in range(nbase):
        base = _expand(b, mask, n)
        for o in range(dim_sub):
            a = src[_scatter(base, o, shifts, k)]
            probs[o] += a.real * a.real + a.imag * a.imag
    return probs_arr


def project_outcome(amps, int n, tuple axes, Py_ssize_t outcome, double norm):
    cdef int k = len(axes)
    cdef long shifts[16]
    cdef Py_ssize_t mask = 0
    cdef Py_ssize_t nbase = _base_iter_setup(n, axes, shifts, &mask)
    cdef const double complex[::1] src = np.ascontiguousarray(amps, dtype=np.complex128)
    out_arr = np.zeros(1 << n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t b, base, idx
    for b in range(nbase):
        base = _expand(b, mask, n)
        idx = _scatter(base, outcome, shifts, k)
        out[idx] = src[idx] / norm
    return out_arr


def reduced_density(amps, int n, tuple keep):
    cdef int k = len(keep)
    cdef Py_ssize_t dim_sub = (<Py_ssize_t>1) << k
    src_c = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef const double complex[::1] src = src_c
    rho_arr = np.zeros((dim_sub, dim_sub), dtype=np.complex128)
    cdef double complex[:, ::1] rho = rho_arr
    if k == 0:
        rho_arr[0, 0] = np.vdot(src_c, src_c)
        return rho_arr
    cdef long shifts[16]
    cdef Py_ssize_t mask = 0
    cdef Py_ssize_t nbase = _base_iter_setup(n, keep, shifts, &mask)
    cdef Py_ssize_t b, base, r, c
    cdef double complex ar
    for b in range(nbase):
        base = _expand(b, mask, n)
        for r in range(dim_sub):
            ar = src[_scatter(base, r, shifts, k)]
            if ar == 0:
                continue
            for c in range(dim_sub):
                rho[r, c] += ar * src[_scatter(base, c, shifts, k)].conjugate()
    return rho_arr


def phase_fix(amps, double tol):
    src_c = np.ascontiguousarray(amps, dtype=np.complex128)
    cdef const double complex[::1] src = src_c
    cdef Py_ssize_t i, dim = src.shape[0]
    cdef double m
    cdef double complex rot
    for i in range(dim):
        m = abs(src[i])
        if m > tol:
            rot = src[i].conjugate() / m
            return src_c * rot
    return src_c.copy()
