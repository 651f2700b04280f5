"""Pure-numpy kernel lane.

Mirrors the compiled extension's API.  Relaxation here is Jacobi-style
(simultaneous updates) since pointwise Gauss-Seidel is not expressible as
vectorized numpy; both lanes converge to the same discrete fixed point.
"""

from __future__ import annotations

import numpy as np

NAME = "pure"
SWEEP_MODE = "jacobi"


def jacobi_eigh(mats, tol_rel=1e-13, max_sweeps=64):
    """Batched cyclic Jacobi eigendecomposition of symmetric matrices.

    mats: (..., n, n) array.  Returns (vals, vecs) with vals sorted ascending
    and vecs[..., :, i] the unit eigenvector for vals[..., i], sign-fixed so
    the largest-magnitude component is positive.
    """
    A = np.array(mats, dtype=float)
    single = A.ndim == 2
    if single:
        A = A[None]
    B, n, _ = A.shape
    V = np.tile(np.eye(n), (B, 1, 1))
    if n == 1:
        vals = A[:, 0, 0].copy()[:, None]
        if single:
            return vals[0], V[0]
        return vals, V

    norm = np.sqrt((A * A).sum(axis=(1, 2)))
    norm = np.maximum(norm, 1e-300)
    iu = np.triu_indices(n, k=1)

    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * (A[:, iu[0], iu[1]] ** 2).sum(axis=1))
        if np.all(off <= tol_rel * norm):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[:, p, q]
                live = np.nonzero(np.abs(apq) > 1e-300)[0]
                if live.size == 0:
                    continue
                apq = apq[live]
                app = A[live, p, p]
                aqq = A[live, q, q]
                tau = (aqq - app) / (2.0 * apq)
                t = np.sign(tau)
                t[t == 0.0] = 1.0
                big = np.abs(tau) > 1e150  # tau^2 would overflow; t ~ 1/(2 tau)
                safe = np.where(big, 1.0, tau)
                t = t / (np.abs(safe) + np.sqrt(1.0 + safe * safe))
                if big.any():
                    t[big] = 0.5 / tau[big]
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                colp = A[live, :, p].copy()
                colq = A[live, :, q].copy()
                A[live, :, p] = c[:, None] * colp - s[:, None] * colq
                A[live, :, q] = s[:, None] * colp + c[:, None] * colq
                rowp = A[live, p, :].copy()
                rowq = A[live, q, :].copy()
                A[live, p, :] = c[:, None] * rowp - s[:, None] * rowq
                A[live, q, :] = s[:, None] * rowp + c[:, None] * rowq
                A[live, p, q] = 0.0
                A[live, q, p] = 0.0
                vp = V[live, :, p].copy()
                vq = V[live, :, q].copy()
                V[live, :, p] = c[:, None] * vp - s[:, None] * vq
                V[live, :, q] = s[:, None] * vp + c[:, None] * vq

    vals = np.diagonal(A, axis1=1, axis2=2).copy()
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    # deterministic sign: largest-|entry| component of each eigenvector > 0
    lead = np.argmax(np.abs(V), axis=1)
    led = np.take_along_axis(V, lead[:, None, :], axis=1)[:, 0, :]
    sign = np.where(led < 0.0, -1.0, 1.0)
    V = V * sign[:, None, :]
    if single:
        return vals[0], V[0]
    return vals, V


def _bellman_values(u, pts, offs, wts, wsum):
    """Candidate update values, one per operator: weighted neighbor averages."""
    up = u[pts[:, None, None] + offs[None, :, :]]
    um = u[pts[:, None, None] - offs[None, :, :]]
    return ((up + um) * wts[None, :, :]).sum(axis=2) / (2.0 * wsum[None, :])


def bellman_residual(u, groups, inv_h2):
    """max over interior points of |min over operators of the discrete pairing|."""
    worst = 0.0
    for pts, offs, wts, wsum in groups:
        if pts.size == 0:
            continue
        up = u[pts[:, None, None] + offs[None, :, :]]
        um = u[pts[:, None, None] - offs[None, :, :]]
        lap = ((up + um - 2.0 * u[pts][:, None, None]) * wts[None, :, :]).sum(axis=2)
        r = np.abs(lap.min(axis=1) * inv_h2).max()
        worst = max(worst, float(r))
    return worst


def bellman_iterate(u, groups, inv_h2, tol, max_iters, check_every=16):
    """Jacobi value iteration for min_A of the discretized pairings = 0.

    Mutates u in place; returns (iterations, residual, converged).
    """
    res = bellman_residual(u, groups, inv_h2)
    if res <= tol:
        return 0, res, True
    it = 0
    while it < max_iters:
        for _ in range(check_every):
            it += 1
            new_vals = [
                _bellman_values(u, pts, offs, wts, wsum).min(axis=1)
                for pts, offs, wts, wsum in groups
                if pts.size
            ]
            for (pts, _, _, _), nv in zip([g for g in groups if g[0].size], new_vals):
                u[pts] = nv
            if it >= max_iters:
                break
        res = bellman_residual(u, groups, inv_h2)
        if res <= tol:
            return it, res, True
    return it, res, False


def _ma_values(u, pts, off1, off2, dd, c):
    """Smallest root of the paired-direction product equation, per pair."""
    s1 = u[pts[:, None] + off1[None, :]] + u[pts[:, None] - off1[None, :]]
    s2 = u[pts[:, None] + off2[None, :]] + u[pts[:, None] - off2[None, :]]
    disc = (s1 - s2) ** 2 + 4.0 * c * dd[None, :]
    return ((s1 + s2) - np.sqrt(disc)) / 4.0


def ma2d_residual(u, groups, c):
    worst = 0.0
    for pts, off1, off2, d1, d2 in groups:
        if pts.size == 0:
            continue
        s1 = u[pts[:, None] + off1[None, :]] + u[pts[:, None] - off1[None, :]]
        s2 = u[pts[:, None] + off2[None, :]] + u[pts[:, None] - off2[None, :]]
        uc = u[pts][:, None]
        dv1 = (s1 - 2.0 * uc) / d1[None, :]
        dv2 = (s2 - 2.0 * uc) / d2[None, :]
        prod = (dv1 * dv2).min(axis=1)
        r = np.abs(prod - c).max()
        worst = max(worst, float(r))
    return worst


def ma2d_iterate(u, groups, c, tol, max_iters, check_every=16):
    """Jacobi iteration for min over orthogonal pairs of second-difference
    products = c, with the convexity branch of the root."""
    res = ma2d_residual(u, groups, c)
    if res <= tol:
        return 0, res, True
    it = 0
    while it < max_iters:
        for _ in range(check_every):
            it += 1
            updates = []
            for pts, off1, off2, d1, d2 in groups:
                if pts.size == 0:
                    continue
                vals = _ma_values(u, pts, off1, off2, d1 * d2, c).min(axis=1)
                updates.append((pts, vals))
            for pts, vals in updates:
                u[pts] = vals
            if it >= max_iters:
                break
        res = ma2d_residual(u, groups, c)
        if res <= tol:
            return it, res, True
    return it, res, False
