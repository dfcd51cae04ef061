# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled filter-bank kernels: periodized analysis/synthesis steps.

Same contract as _dwt_np; selected at import by waveleton._kernels.
"""

import numpy as np

NAME = "cython"


def analysis_periodic(const double[:, ::1] x, const double[::1] h, const double[::1] g):
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t n = x.shape[1]
    cdef Py_ssize_t taps = h.shape[0]
    cdef Py_ssize_t half = n // 2
    a_np = np.empty((m, half))
    d_np = np.empty((m, half))
    cdef double[:, ::1] a = a_np
    cdef double[:, ::1] d = d_np
    cdef Py_ssize_t i, j, k, idx
    cdef double sa, sd, xv
    with nogil:
        for i in range(m):
            for j in range(half):
                sa = 0.0
                sd = 0.0
                for k in range(taps):
                    idx = (2 * j + k) % n
                    xv = x[i, idx]
                    sa += h[k] * xv
                    sd += g[k] * xv
                a[i, j] = sa
                d[i, j] = sd
    return a_np, d_np


def synthesis_periodic(const double[:, ::1] a, const double[:, ::1] d,
                       const double[::1] h, const double[::1] g):
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t half = a.shape[1]
    cdef Py_ssize_t n = 2 * half
    cdef Py_ssize_t taps = h.shape[0]
    out_np = np.zeros((m, n))
    cdef double[:, ::1] out = out_np
    cdef Py_ssize_t i, j, k, idx
    cdef double av, dv
    with nogil:
        for i in range(m):
            for j in range(half):
                av = a[i, j]
                dv = d[i, j]
                for k in range(taps):
                    idx = (2 * j + k) % n
                    out[i, idx] += h[k] * av + g[k] * dv
    return out_np
