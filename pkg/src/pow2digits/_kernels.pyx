# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled float64 transfer kernels. Same accumulation order as _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()


def _modinv5(uint64_t modulus):
    return pow(5, -1, modulus) if modulus > 1 else 0


def forward_dense(const double[::1] v, h):
    cdef uint64_t half = v.shape[0]
    cdef uint64_t mask = half - 1
    cdef uint64_t inv5 = _modinv5(half)
    cdef double hw[10]
    cdef int k
    cdef uint64_t s
    cdef double x, acc_e, acc_o
    for k in range(10):
        hw[k] = h[k]
    out = np.empty(2 * half, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for s in range(half):
            # u[q] = v[q / 5 mod half]
            x = v[(inv5 * s) & mask]
            acc_e = hw[0] * x
            acc_o = hw[1] * x
            for k in range(1, 5):
                x = v[(inv5 * (s - k)) & mask]
                acc_e = acc_e + hw[2 * k] * x
                acc_o = acc_o + hw[2 * k + 1] * x
            o[2 * s] = acc_e
            o[2 * s + 1] = acc_o
    return out


def backward_dense(const double[::1] w, h):
    cdef uint64_t half = w.shape[0] // 2
    cdef uint64_t mask = half - 1
    cdef double hw[10]
    cdef int k
    cdef uint64_t i, q, idx
    cdef double acc
    for k in range(10):
        hw[k] = h[k]
    out = np.empty(half, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(half):
            q = (5 * i) & mask
            acc = hw[0] * w[2 * q]
            acc = acc + hw[1] * w[2 * q + 1]
            for k in range(1, 5):
                idx = (q + k) & mask
                acc = acc + hw[2 * k] * w[2 * idx]
                acc = acc + hw[2 * k + 1] * w[2 * idx + 1]
            o[i] = acc
    return out
