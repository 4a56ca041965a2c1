# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot convolution / state-sweep kernels.

API twin of ``_pykernels``; selected at import time by the package's
kernels dispatcher when the extension built successfully.
"""

from libc.stdlib cimport free, malloc

import numpy as np

BACKEND = "c"


def convolve(double[::1] a, double[::1] b):
    """Full linear convolution of two 1-D float64 arrays."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t m, j, lo, hi
    out_arr = np.zeros(na + nb - 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc
    with nogil:
        for m in range(na + nb - 1):
            lo = m - na + 1
            if lo < 0:
                lo = 0
            hi = m
            if hi > nb - 1:
                hi = nb - 1
            acc = 0.0
            for j in range(lo, hi + 1):
                acc += a[m - j] * b[j]
            out[m] = acc
    return out_arr


def sweep_accumulate(double[:, :, ::1] out, double[::1] base, Py_ssize_t off0,
                     double[:, ::1] bx, double[:, ::1] by_rev, double weight):
    """Accumulate ``weight * (base (*) Bin_x (*) negBin_y)`` over a state grid.

    Layout contract matches ``_pykernels.sweep_accumulate``: the (x, y)
    contribution starts at out index ``off0 - y``.
    """
    cdef Py_ssize_t nx = out.shape[0], ny = out.shape[1]
    cdef Py_ssize_t L = base.shape[0]
    cdef Py_ssize_t x, y, m, j, lo, hi, lcx, j0
    cdef double acc, s
    cdef double *cx
    with nogil:
        cx = <double *> malloc((L + nx) * sizeof(double))
        if cx == NULL:
            with gil:
                raise MemoryError()
        for x in range(nx):
            # cx = base (*) Bin(x, q), length L + x
            lcx = L + x
            for m in range(lcx):
                lo = m - L + 1
                if lo < 0:
                    lo = 0
                hi = m
                if hi > x:
                    hi = x
                acc = 0.0
                for j in range(lo, hi + 1):
                    acc += base[m - j] * bx[x, j]
                cx[m] = acc
            for y in range(ny):
                j0 = off0 - y
                for m in range(lcx + y):
                    lo = m - lcx + 1
                    if lo < 0:
                        lo = 0
                    hi = m
                    if hi > y:
                        hi = y
                    s = 0.0
                    for j in range(lo, hi + 1):
                        s += cx[m - j] * by_rev[y, j]
                    out[x, y, j0 + m] += weight * s
        free(cx)
