# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()

cdef enum:
    OTHER = 0
    EQUILATERAL = 1
    ISOSCELES_SMALL_BASE = 2


def seq_complete_link(D):
    cdef double[:, ::1] CD = np.array(D, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = CD.shape[0]
    cdef Py_ssize_t m = n - 1 if n > 0 else 0
    out_start = np.empty(m, dtype=np.intp)
    out_mid = np.empty(m, dtype=np.intp)
    out_stop = np.empty(m, dtype=np.intp)
    out_level = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t[::1] s_start = out_start, s_mid = out_mid, s_stop = out_stop
    cdef double[::1] s_level = out_level
    # doubly linked list of active clusters keyed by first leaf
    cdef Py_ssize_t[::1] nxt = np.arange(1, n + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] stop = np.arange(1, n + 1, dtype=np.intp)
    cdef Py_ssize_t t, a, b, c, best_a
    cdef double best, d, x
    with nogil:
        for t in range(m):
            best = INFINITY
            best_a = -1
            a = 0
            while nxt[a] < n:
                d = CD[a, nxt[a]]
                if d < best:
                    best = d
                    best_a = a
                a = nxt[a]
            a = best_a
            b = nxt[a]
            s_start[t] = a
            s_mid[t] = b
            s_stop[t] = stop[b]
            s_level[t] = best
            stop[a] = stop[b]
            nxt[a] = nxt[b]
            c = 0
            while c < n:
                if c != a:
                    x = CD[a, c] if CD[a, c] > CD[b, c] else CD[b, c]
                    CD[a, c] = x
                    CD[c, a] = x
                c = nxt[c]
    return out_start, out_mid, out_stop, out_level


cdef inline void _sort3(double p, double q, double r, double* lo, double* mid, double* hi) noexcept nogil:
    cdef double t
    if p > q:
        t = p; p = q; q = t
    if q > r:
        t = q; q = r; r = t
    if p > q:
        t = p; p = q; q = t
    lo[0] = p
    mid[0] = q
    hi[0] = r


def triangle_tags(D, double tol, Py_ssize_t lo, Py_ssize_t hi):
    cdef const double[:, ::1] M = np.ascontiguousarray(D, dtype=np.float64)
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t i, j, k, pos = 0, total = 0
    for i in range(lo, hi):
        total += (n - i - 1) * (n - i - 2) // 2
    tags = np.zeros(total, dtype=np.int8)
    cdef cnp.int8_t[::1] out = tags
    cdef double s, md, bg
    with nogil:
        for i in range(lo, hi):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    _sort3(M[i, j], M[i, k], M[j, k], &s, &md, &bg)
                    if bg - s <= tol * bg:
                        out[pos] = EQUILATERAL
                    elif bg - md <= tol * bg and s < md:
                        out[pos] = ISOSCELES_SMALL_BASE
                    else:
                        out[pos] = OTHER
                    pos += 1
    return tags


def triangle_violations(D, double tol, Py_ssize_t lo, Py_ssize_t hi):
    cdef const double[:, ::1] M = np.ascontiguousarray(D, dtype=np.float64)
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t i, j, k, nu = 0, nm = 0
    cdef double s, md, bg
    # first pass counts, second fills preallocated arrays
    with nogil:
        for i in range(lo, hi):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    _sort3(M[i, j], M[i, k], M[j, k], &s, &md, &bg)
                    if bg > md + tol:
                        nu += 1
                        if bg > s + md + tol:
                            nm += 1
    u = np.empty((nu, 3), dtype=np.intp)
    m = np.empty((nm, 3), dtype=np.intp)
    cdef Py_ssize_t[:, ::1] U = u
    cdef Py_ssize_t[:, ::1] V = m
    nu = 0
    nm = 0
    with nogil:
        for i in range(lo, hi):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    _sort3(M[i, j], M[i, k], M[j, k], &s, &md, &bg)
                    if bg > md + tol:
                        U[nu, 0] = i
                        U[nu, 1] = j
                        U[nu, 2] = k
                        nu += 1
                        if bg > s + md + tol:
                            V[nm, 0] = i
                            V[nm, 1] = j
                            V[nm, 2] = k
                            nm += 1
    return u, m


def style_batch(D, w, perms):
    cdef const double[:, ::1] M = np.ascontiguousarray(D, dtype=np.float64)
    cdef const double[::1] wc = np.ascontiguousarray(w, dtype=np.float64)
    cdef const Py_ssize_t[:, ::1] P = np.ascontiguousarray(perms, dtype=np.intp)
    cdef Py_ssize_t T = P.shape[0], n = P.shape[1], L = n - 1
    result = np.empty((T, 3), dtype=np.float64)
    cdef double[:, ::1] out = result
    cdef Py_ssize_t t, s
    cdef double mv, total, mean, var, mn, mx, slope, rhythm, xbar = (n + 1) / 2.0
    cdef double sxx = n * (n * n - 1) / 12.0
    with nogil:
        for t in range(T):
            total = 0.0
            rhythm = 0.0
            mn = INFINITY
            mx = -INFINITY
            for s in range(L):
                mv = M[P[t, s], P[t, s + 1]]
                total += mv
                rhythm += mv / wc[P[t, s + 1]]
                if mv < mn:
                    mn = mv
                if mv > mx:
                    mx = mv
            if L >= 2 and mx != mn:
                mean = total / L
                var = 0.0
                for s in range(L):
                    mv = M[P[t, s], P[t, s + 1]] - mean
                    var += mv * mv
                out[t, 0] = sqrt(var / (L - 1))
            else:
                out[t, 0] = 0.0
            slope = 0.0
            for s in range(n):
                slope += wc[P[t, s]] * ((s + 1) - xbar)
            out[t, 1] = -slope / sxx
            out[t, 2] = rhythm / L
    return result
