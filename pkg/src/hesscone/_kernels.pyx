# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernel lane: cyclic Jacobi eigensolver and Gauss-Seidel sweeps."""

import numpy as np

cimport cython
from libc.math cimport fabs, sqrt


def jacobi_rotate_batch(double[:, :, ::1] A, double[:, :, ::1] V,
                        double tol_rel, int max_sweeps):
    """Diagonalize each symmetric A[b] in place, accumulating rotations in V[b]."""
    cdef Py_ssize_t B = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    cdef Py_ssize_t b, p, q, i, sweep
    cdef double norm, off, apq, app, aqq, tau, t, c, s, aip, aiq, vip, viq
    if n == 1:
        return
    for b in range(B):
        norm = 0.0
        for p in range(n):
            for q in range(n):
                norm += A[b, p, q] * A[b, p, q]
        norm = sqrt(norm)
        if norm < 1e-300:
            norm = 1e-300
        for sweep in range(max_sweeps):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += 2.0 * A[b, p, q] * A[b, p, q]
            if sqrt(off) <= tol_rel * norm:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[b, p, q]
                    if fabs(apq) <= 1e-300:
                        continue
                    app = A[b, p, p]
                    aqq = A[b, q, q]
                    tau = (aqq - app) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    for i in range(n):
                        aip = A[b, i, p]
                        aiq = A[b, i, q]
                        A[b, i, p] = c * aip - s * aiq
                        A[b, i, q] = s * aip + c * aiq
                    for i in range(n):
                        aip = A[b, p, i]
                        aiq = A[b, q, i]
                        A[b, p, i] = c * aip - s * aiq
                        A[b, q, i] = s * aip + c * aiq
                    A[b, p, q] = 0.0
                    A[b, q, p] = 0.0
                    for i in range(n):
                        vip = V[b, i, p]
                        viq = V[b, i, q]
                        V[b, i, p] = c * vip - s * viq
                        V[b, i, q] = s * vip + c * viq


cdef inline double _bellman_update(double[::1] u, Py_ssize_t p, Py_ssize_t g,
                                   long[:, :, ::1] offs, double[:, :, ::1] wts,
                                   double[:, ::1] wsum) noexcept nogil:
    cdef Py_ssize_t O = offs.shape[1]
    cdef Py_ssize_t K = offs.shape[2]
    cdef Py_ssize_t o, k
    cdef long v
    cdef double s, cand, best
    best = 1e308
    for o in range(O):
        if wsum[g, o] <= 0.0:
            continue
        s = 0.0
        for k in range(K):
            v = offs[g, o, k]
            if wts[g, o, k] != 0.0:
                s += wts[g, o, k] * (u[p + v] + u[p - v])
        cand = s / (2.0 * wsum[g, o])
        if cand < best:
            best = cand
    return best


def bellman_residual(double[::1] u, long[::1] pts, long[::1] gid,
                     long[:, :, ::1] offs, double[:, :, ::1] wts,
                     double[:, ::1] wsum, double inv_h2):
    cdef Py_ssize_t N = pts.shape[0]
    cdef Py_ssize_t O = offs.shape[1]
    cdef Py_ssize_t K = offs.shape[2]
    cdef Py_ssize_t i, o, k, g
    cdef long p, v
    cdef double s, lap, best, worst
    worst = 0.0
    with nogil:
        for i in range(N):
            p = pts[i]
            g = gid[i]
            best = 1e308
            for o in range(O):
                if wsum[g, o] <= 0.0:
                    continue
                s = 0.0
                for k in range(K):
                    v = offs[g, o, k]
                    if wts[g, o, k] != 0.0:
                        s += wts[g, o, k] * (u[p + v] + u[p - v] - 2.0 * u[p])
                if s < best:
                    best = s
            lap = fabs(best * inv_h2)
            if lap > worst:
                worst = lap
    return worst


def bellman_gs_iterate(double[::1] u, long[::1] pts, long[::1] gid,
                       long[:, :, ::1] offs, double[:, :, ::1] wts,
                       double[:, ::1] wsum, double inv_h2, double tol,
                       long max_iters, long check_every):
    """Alternating forward/backward Gauss-Seidel; returns (iters, res, ok)."""
    cdef Py_ssize_t N = pts.shape[0]
    cdef Py_ssize_t i
    cdef long it = 0
    cdef long j
    cdef double res
    res = bellman_residual(u, pts, gid, offs, wts, wsum, inv_h2)
    if res <= tol:
        return 0, res, True
    while it < max_iters:
        for j in range(check_every):
            it += 1
            with nogil:
                if it % 2 == 1:
                    for i in range(N):
                        u[pts[i]] = _bellman_update(u, pts[i], gid[i], offs, wts, wsum)
                else:
                    for i in range(N - 1, -1, -1):
                        u[pts[i]] = _bellman_update(u, pts[i], gid[i], offs, wts, wsum)
            if it >= max_iters:
                break
        res = bellman_residual(u, pts, gid, offs, wts, wsum, inv_h2)
        if res <= tol:
            return it, res, True
    return it, res, False


cdef inline double _ma_update(double[::1] u, Py_ssize_t p, Py_ssize_t g,
                              long[:, ::1] off1, long[:, ::1] off2,
                              double[:, ::1] dd, double c) noexcept nogil:
    cdef Py_ssize_t P = off1.shape[1]
    cdef Py_ssize_t j
    cdef double s1, s2, disc, cand, best
    best = 1e308
    for j in range(P):
        if dd[g, j] <= 0.0:
            continue
        s1 = u[p + off1[g, j]] + u[p - off1[g, j]]
        s2 = u[p + off2[g, j]] + u[p - off2[g, j]]
        disc = (s1 - s2) * (s1 - s2) + 4.0 * c * dd[g, j]
        cand = ((s1 + s2) - sqrt(disc)) / 4.0
        if cand < best:
            best = cand
    return best


def ma2d_residual(double[::1] u, long[::1] pts, long[::1] gid,
                  long[:, ::1] off1, long[:, ::1] off2,
                  double[:, ::1] d1, double[:, ::1] d2, double c):
    cdef Py_ssize_t N = pts.shape[0]
    cdef Py_ssize_t P = off1.shape[1]
    cdef Py_ssize_t i, j, g
    cdef long p
    cdef double s1, s2, prod, best, worst
    worst = 0.0
    with nogil:
        for i in range(N):
            p = pts[i]
            g = gid[i]
            best = 1e308
            for j in range(P):
                if d1[g, j] <= 0.0:
                    continue
                s1 = (u[p + off1[g, j]] + u[p - off1[g, j]] - 2.0 * u[p]) / d1[g, j]
                s2 = (u[p + off2[g, j]] + u[p - off2[g, j]] - 2.0 * u[p]) / d2[g, j]
                prod = s1 * s2
                if prod < best:
                    best = prod
            prod = fabs(best - c)
            if prod > worst:
                worst = prod
    return worst


def ma2d_gs_iterate(double[::1] u, long[::1] pts, long[::1] gid,
                    long[:, ::1] off1, long[:, ::1] off2,
                    double[:, ::1] d1, double[:, ::1] d2, double c,
                    double tol, long max_iters, long check_every):
    cdef Py_ssize_t N = pts.shape[0]
    cdef Py_ssize_t i
    cdef long it = 0
    cdef long j
    cdef double res
    dd = np.asarray(d1) * np.asarray(d2)
    cdef double[:, ::1] ddv = dd
    res = ma2d_residual(u, pts, gid, off1, off2, d1, d2, c)
    if res <= tol:
        return 0, res, True
    while it < max_iters:
        for j in range(check_every):
            it += 1
            with nogil:
                if it % 2 == 1:
                    for i in range(N):
                        u[pts[i]] = _ma_update(u, pts[i], gid[i], off1, off2, ddv, c)
                else:
                    for i in range(N - 1, -1, -1):
                        u[pts[i]] = _ma_update(u, pts[i], gid[i], off1, off2, ddv, c)
            if it >= max_iters:
                break
        res = ma2d_residual(u, pts, gid, off1, off2, d1, d2, c)
        if res <= tol:
            return it, res, True
    return it, res, False
