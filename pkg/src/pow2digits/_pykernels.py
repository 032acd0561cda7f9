"""Reference numpy implementations of the transfer kernels.

Work for any dtype numpy can multiply, including ``object`` arrays of
``Fraction`` used in exact mode. The compiled kernels in ``_kernels.pyx``
accumulate in the same order and agree bit for bit on float64 input.

Both kernels use the factorization (10 t + j) mod 2^m = 2 ((5 t + k) mod 2^(m-1)) + p
with j = 2 k + p, which turns the operator into a permutation by t -> 5 t
followed by a 5-tap cyclic convolution on the even and odd sub-lattices.
"""
import numpy as np


def forward_dense(v, h):
    """Row vector times M_m: ``v`` has length 2^(m-1), result 2^m."""
    half = v.shape[0]
    u = np.empty_like(v)
    u[(5 * np.arange(half, dtype=np.uint64)) & np.uint64(half - 1)] = v
    out = np.empty(2 * half, dtype=v.dtype)
    even = out[0::2]
    odd = out[1::2]
    even[...] = h[0] * u
    odd[...] = h[1] * u
    for k in range(1, 5):
        shifted = np.roll(u, k)
        even += h[2 * k] * shifted
        odd += h[2 * k + 1] * shifted
    return out


def backward_dense(w, h):
    """M_m times column vector: ``w`` has length 2^m, result 2^(m-1)."""
    half = w.shape[0] // 2
    we = w[0::2]
    wo = w[1::2]
    g = h[0] * we
    g += h[1] * wo
    for k in range(1, 5):
        g += h[2 * k] * np.roll(we, -k)
        g += h[2 * k + 1] * np.roll(wo, -k)
    return g[(5 * np.arange(half, dtype=np.uint64)) & np.uint64(half - 1)]
