# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluation kernels.

Semantics identical to _kernels_py; selected by plqkit.backend when the
extension is built.  The PLQ grid oracles evaluate millions of points, so
the per-point piece-membership loop is the hot path worth compiling.
"""

import numpy as np

BACKEND_NAME = "compiled"


def contains_batch(double[:, ::1] rows, double[::1] rhs,
                   unsigned char[::1] is_eq, double tol, double[:, ::1] pts):
    cdef Py_ssize_t S = pts.shape[0]
    cdef Py_ssize_t n = pts.shape[1]
    cdef Py_ssize_t m = rows.shape[0]
    out_np = np.ones(S, dtype=np.uint8)
    cdef unsigned char[::1] out = out_np
    cdef Py_ssize_t k, i, j
    cdef double r
    for k in range(S):
        for i in range(m):
            r = -rhs[i]
            for j in range(n):
                r += rows[i, j] * pts[k, j]
            if is_eq[i]:
                if r > tol or r < -tol:
                    out[k] = 0
                    break
            elif r > tol:
                out[k] = 0
                break
    return out_np.astype(bool)


def plq_eval_batch(double[:, ::1] rows, double[::1] rhs,
                   unsigned char[::1] is_eq, long[::1] row_start,
                   double[:, :, ::1] Q, double[:, ::1] c, double[::1] alpha,
                   double tol, double[:, ::1] pts):
    cdef Py_ssize_t S = pts.shape[0]
    cdef Py_ssize_t n = pts.shape[1]
    cdef Py_ssize_t I = row_start.shape[0] - 1
    values_np = np.full(S, np.nan)
    inside_np = np.zeros(S, dtype=np.uint8)
    cdef double[::1] values = values_np
    cdef unsigned char[::1] inside = inside_np
    cdef Py_ssize_t k, p, i, j, a, b
    cdef double r, acc, qx
    cdef bint ok
    for k in range(S):
        for p in range(I):
            ok = True
            for i in range(row_start[p], row_start[p + 1]):
                r = -rhs[i]
                for j in range(n):
                    r += rows[i, j] * pts[k, j]
                if is_eq[i]:
                    if r > tol or r < -tol:
                        ok = False
                        break
                elif r > tol:
                    ok = False
                    break
            if not ok:
                continue
            acc = alpha[p]
            for a in range(n):
                qx = 0.0
                for b in range(n):
                    qx += Q[p, a, b] * pts[k, b]
                acc += (0.5 * qx + c[p, a]) * pts[k, a]
            values[k] = acc
            inside[k] = 1
            break
    return values_np, inside_np.astype(bool)
