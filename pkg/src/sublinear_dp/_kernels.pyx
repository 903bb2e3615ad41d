# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled clustering hot loops; same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def swap_costs(double[:, ::1] costs, double[::1] weights, double[::1] d1,
               double[::1] d2, long long[::1] owner, Py_ssize_t k):
    cdef Py_ssize_t m = costs.shape[0]
    cdef Py_ssize_t u = costs.shape[1]
    cdef Py_ssize_t i, j, x
    cdef double a, near, second, base, w
    out_arr = np.empty((k, m), dtype=np.float64)
    extra_arr = np.empty(k, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] extra = extra_arr
    with nogil:
        for i in range(m):
            base = 0.0
            for j in range(k):
                extra[j] = 0.0
            for x in range(u):
                a = costs[i, x]
                w = weights[x]
                near = a if a < d1[x] else d1[x]
                second = a if a < d2[x] else d2[x]
                base += w * near
                extra[owner[x]] += w * (second - near)
            for j in range(k):
                out[j, i] = base + extra[j]
    return out_arr


def subset_costs(double[:, ::1] costs, long long[:, ::1] combos,
                 double[::1] weights):
    cdef Py_ssize_t q = combos.shape[0]
    cdef Py_ssize_t k = combos.shape[1]
    cdef Py_ssize_t u = costs.shape[1]
    cdef Py_ssize_t r, j, x
    cdef double best, a, total
    out_arr = np.empty(q, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for r in range(q):
            total = 0.0
            for x in range(u):
                best = costs[combos[r, 0], x]
                for j in range(1, k):
                    a = costs[combos[r, j], x]
                    if a < best:
                        best = a
                total += weights[x] * best
            out[r] = total
    return out_arr
