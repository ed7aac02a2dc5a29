# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled decoding and likelihood kernels (same contracts as _kernels_py)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


_CHUNK = 1 << 22


def nearest_codeword(Y, C):
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t T = Y.shape[0], M = C.shape[0]
    if C.shape[1] != Y.shape[1]:
        raise ValueError("dimension mismatch")
    cdef const double[::1] cn = np.einsum("ij,ij->i", C, C)
    cdef const double[::1] yn = np.einsum("ij,ij->i", Y, Y)
    idx_arr = np.empty(T, dtype=np.int64)
    dist_arr = np.empty(T, dtype=np.float64)
    cdef long long[::1] idx = idx_arr
    cdef double[::1] dist = dist_arr
    cdef const double[:, ::1] g
    cdef Py_ssize_t s, t, m, best_m, rows
    cdef Py_ssize_t step = max(1, _CHUNK // max(1, M))
    cdef double v, best
    # inner products go through BLAS; the scan over codewords is fused in C
    for s in range(0, T, step):
        g = np.ascontiguousarray(Y[s : s + step] @ C.T)
        rows = g.shape[0]
        with nogil:
            for t in range(rows):
                best = INFINITY
                best_m = 0
                for m in range(M):
                    v = cn[m] - 2.0 * g[t, m]
                    if v < best:
                        best = v
                        best_m = m
                idx[s + t] = best_m
                v = best + yn[s + t]
                dist[s + t] = v if v > 0.0 else 0.0
    return idx_arr, dist_arr


def binned_log_likelihood(Y, C, Py_ssize_t group, double inv_two_var):
    cdef const double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[:, ::1] c = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t T = y.shape[0], M = c.shape[0], d = y.shape[1]
    if c.shape[1] != d:
        raise ValueError("dimension mismatch")
    if group < 1 or M % group:
        raise ValueError("codebook size must be a multiple of the group size")
    cdef Py_ssize_t G = M // group
    out_arr = np.empty((T, G), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    buf_arr = np.empty(group, dtype=np.float64)
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t t, g, b, k, m
    cdef double s, diff, mx, acc
    with nogil:
        for t in range(T):
            for g in range(G):
                mx = -INFINITY
                for b in range(group):
                    m = g * group + b
                    s = 0.0
                    for k in range(d):
                        diff = y[t, k] - c[m, k]
                        s = s + diff * diff
                    buf[b] = -s * inv_two_var
                    if buf[b] > mx:
                        mx = buf[b]
                acc = 0.0
                for b in range(group):
                    acc = acc + exp(buf[b] - mx)
                out[t, g] = mx + log(acc)
    return out_arr


def identity_log_likelihood(L_in, L_out, coloring):
    cdef const double[:, ::1] a = np.ascontiguousarray(L_in, dtype=np.float64)
    cdef const double[:, ::1] b = np.ascontiguousarray(L_out, dtype=np.float64)
    cdef const long long[::1] col = np.ascontiguousarray(coloring, dtype=np.int64)
    cdef Py_ssize_t T = a.shape[0], M = a.shape[1], t, j
    if col.shape[0] != M or b.shape[0] != T:
        raise ValueError("dimension mismatch")
    out_arr = np.empty(T, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double mx, v, acc
    with nogil:
        for t in range(T):
            mx = -INFINITY
            for j in range(M):
                v = a[t, j] + b[t, col[j]]
                if v > mx:
                    mx = v
            acc = 0.0
            if mx > -INFINITY:
                for j in range(M):
                    acc = acc + exp(a[t, j] + b[t, col[j]] - mx)
                out[t] = mx + log(acc)
            else:
                out[t] = -INFINITY
    return out_arr
