"""Kernel backend selection: compiled extension when importable, numpy otherwise.

Set HESSCONE_PURE=1 to force the numpy lane.  `get_backend("ext")` raises if
the extension is missing, which the benchmark uses to compare lanes honestly.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py as _pure

try:  # built by setup.py; absent in source-only checkouts
    from . import _kernels as _ext
except ImportError:  # pragma: no cover - depends on the install
    _ext = None

if os.environ.get("HESSCONE_PURE", "") == "1":
    _ext = None


def _sort_sign(vals, vecs):
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    lead = np.argmax(np.abs(vecs), axis=1)
    led = np.take_along_axis(vecs, lead[:, None, :], axis=1)[:, 0, :]
    sign = np.where(led < 0.0, -1.0, 1.0)
    return vals, vecs * sign[:, None, :]


class _ExtBackend:
    name = "ext"
    sweep_modes = ("gauss-seidel", "jacobi")

    def eigh(self, mats, tol_rel=1e-13, max_sweeps=64):
        A = np.array(mats, dtype=float, order="C")
        single = A.ndim == 2
        if single:
            A = A[None]
        B, n, _ = A.shape
        V = np.tile(np.eye(n), (B, 1, 1))
        _ext.jacobi_rotate_batch(A, V, tol_rel, max_sweeps)
        vals = np.diagonal(A, axis1=1, axis2=2).copy()
        vals, V = _sort_sign(vals, V)
        if single:
            return vals[0], V[0]
        return vals, V

    @staticmethod
    def _flatten(groups):
        live = [g for g in groups if g[0].size]
        O = max(g[1].shape[0] for g in live)
        K = max(g[1].shape[1] for g in live)
        G = len(live)
        offs = np.zeros((G, O, K), dtype=np.int64)
        wts = np.zeros((G, O, K), dtype=float)
        wsum = np.zeros((G, O), dtype=float)
        pts_parts, gid_parts = [], []
        for g, (pts, of, wt, ws) in enumerate(live):
            offs[g, : of.shape[0], : of.shape[1]] = of
            wts[g, : wt.shape[0], : wt.shape[1]] = wt
            wsum[g, : ws.shape[0]] = ws
            pts_parts.append(pts)
            gid_parts.append(np.full(pts.shape, g, dtype=np.int64))
        pts = np.concatenate(pts_parts)
        gid = np.concatenate(gid_parts)
        order = np.argsort(pts, kind="stable")
        return pts[order], gid[order], offs, wts, wsum

    def bellman_residual(self, u, groups, inv_h2):
        pts, gid, offs, wts, wsum = self._flatten(groups)
        return _ext.bellman_residual(u, pts, gid, offs, wts, wsum, inv_h2)

    def bellman_solve(self, u, groups, inv_h2, tol, max_iters, mode="gauss-seidel",
                      check_every=16):
        if mode == "jacobi":
            return _pure.bellman_iterate(u, groups, inv_h2, tol, max_iters, check_every)
        pts, gid, offs, wts, wsum = self._flatten(groups)
        return _ext.bellman_gs_iterate(u, pts, gid, offs, wts, wsum, inv_h2,
                                       tol, max_iters, check_every)

    @staticmethod
    def _flatten_ma(groups):
        live = [g for g in groups if g[0].size]
        P = max(g[1].shape[0] for g in live)
        G = len(live)
        off1 = np.zeros((G, P), dtype=np.int64)
        off2 = np.zeros((G, P), dtype=np.int64)
        d1 = np.zeros((G, P), dtype=float)
        d2 = np.zeros((G, P), dtype=float)
        pts_parts, gid_parts = [], []
        for g, (pts, o1, o2, dd1, dd2) in enumerate(live):
            off1[g, : o1.shape[0]] = o1
            off2[g, : o2.shape[0]] = o2
            d1[g, : dd1.shape[0]] = dd1
            d2[g, : dd2.shape[0]] = dd2
            pts_parts.append(pts)
            gid_parts.append(np.full(pts.shape, g, dtype=np.int64))
        pts = np.concatenate(pts_parts)
        gid = np.concatenate(gid_parts)
        order = np.argsort(pts, kind="stable")
        return pts[order], gid[order], off1, off2, d1, d2

    def ma2d_residual(self, u, groups, c):
        pts, gid, off1, off2, d1, d2 = self._flatten_ma(groups)
        return _ext.ma2d_residual(u, pts, gid, off1, off2, d1, d2, c)

    def ma2d_solve(self, u, groups, c, tol, max_iters, mode="gauss-seidel",
                   check_every=16):
        if mode == "jacobi":
            return _pure.ma2d_iterate(u, groups, c, tol, max_iters, check_every)
        pts, gid, off1, off2, d1, d2 = self._flatten_ma(groups)
        return _ext.ma2d_gs_iterate(u, pts, gid, off1, off2, d1, d2, c,
                                    tol, max_iters, check_every)


class _PureBackend:
    name = "pure"
    sweep_modes = ("jacobi",)

    def eigh(self, mats, tol_rel=1e-13, max_sweeps=64):
        return _pure.jacobi_eigh(mats, tol_rel, max_sweeps)

    def bellman_residual(self, u, groups, inv_h2):
        return _pure.bellman_residual(u, groups, inv_h2)

    def bellman_solve(self, u, groups, inv_h2, tol, max_iters, mode="jacobi",
                      check_every=16):
        return _pure.bellman_iterate(u, groups, inv_h2, tol, max_iters, check_every)

    def ma2d_residual(self, u, groups, c):
        return _pure.ma2d_residual(u, groups, c)

    def ma2d_solve(self, u, groups, c, tol, max_iters, mode="jacobi",
                   check_every=16):
        return _pure.ma2d_iterate(u, groups, c, tol, max_iters, check_every)


_EXT = _ExtBackend() if _ext is not None else None
_PURE = _PureBackend()


def get_backend(name: str = "auto"):
    if name == "auto":
        return _EXT if _EXT is not None else _PURE
    if name == "ext":
        if _EXT is None:
            raise RuntimeError("compiled kernel extension is not available")
        return _EXT
    if name == "pure":
        return _PURE
    raise ValueError(f"unknown backend {name!r}")


ACTIVE = get_backend()


def eigh(mats, tol_rel=1e-13, max_sweeps=64):
    """Batched symmetric eigendecomposition on the active backend."""
    return ACTIVE.eigh(mats, tol_rel, max_sweeps)
