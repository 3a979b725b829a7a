# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernel.

Same contract as cdkit._kernels._reference.propagate_sin: batched RK4 for
u'' + q(s) u = 0 on [0, 1], with q sampled at the nodes and piecewise-linear
in between (so midpoint values are node averages).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def propagate_sin(q, u0=0.0, du0=1.0):
    q_arr = np.ascontiguousarray(q, dtype=np.float64)
    if q_arr.ndim != 2 or q_arr.shape[1] < 2:
        raise ValueError("q must have shape (G, M+1) with M >= 1")
    cdef double[:, ::1] qv = q_arr
    cdef Py_ssize_t g = qv.shape[0]
    cdef Py_ssize_t m = qv.shape[1] - 1
    u0_arr = np.array(np.broadcast_to(np.asarray(u0, dtype=np.float64), (g,)), dtype=np.float64)
    du0_arr = np.array(np.broadcast_to(np.asarray(du0, dtype=np.float64), (g,)), dtype=np.float64)
    cdef double[::1] u0v = u0_arr
    cdef double[::1] du0v = du0_arr
    u_arr = np.empty_like(q_arr)
    du_arr = np.empty_like(q_arr)
    cdef double[:, ::1] uv = u_arr
    cdef double[:, ::1] dv = du_arr
    cdef double h = 1.0 / m
    cdef double uk, wk, qk, qk1, qm
    cdef double u1, w1, u2, w2, u3, w3, u4, w4
    cdef Py_ssize_t i, k
    for i in range(g):
        uk = u0v[i]
        wk = du0v[i]
        uv[i, 0] = uk
        dv[i, 0] = wk
        for k in range(m):
            qk = qv[i, k]
            qk1 = qv[i, k + 1]
            qm = 0.5 * (qk + qk1)
            u1 = wk
            w1 = -qk * uk
            u2 = wk + 0.5 * h * w1
            w2 = -qm * (uk + 0.5 * h * u1)
            u3 = wk + 0.5 * h * w2
            w3 = -qm * (uk + 0.5 * h * u2)
            u4 = wk + h * w3
            w4 = -qk1 * (uk + h * u3)
            uk = uk + (h / 6.0) * (u1 + 2.0 * u2 + 2.0 * u3 + u4)
            wk = wk + (h / 6.0) * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
            uv[i, k + 1] = uk
            dv[i, k + 1] = wk
    return u_arr, du_arr
