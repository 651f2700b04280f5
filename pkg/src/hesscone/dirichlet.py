"""Monotone wide-stencil solver for the degenerate Dirichlet problem.

The continuous problem asks for the cone-plurisubharmonic function with
prescribed boundary values whose Hessian stays on the cone boundary.  The
discrete characterization committed to here: min over the sampled polar base
A of the discretized pairing <Hess u, A> equals zero at every interior point,
with each pairing realized as a nonnegative combination of second differences
along lattice directions (eigenvector-snapped, so the scheme is monotone).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import gcd
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .config import DEFAULT
from .cones import ConeSpec, ellipticity_check
from .fields import GridField
from .linalg import InputError, SymMatrix, as_matrix, eig_sym_batch


@dataclass(frozen=True)
class StencilSet:
    """Primitive lattice directions with sup-norm width up to s, one per
    unoriented direction, axes included."""

    n: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise InputError("stencil width must be >= 1")

    @property
    def directions(self) -> np.ndarray:
        return stencil_directions(self.n, self.width)


def stencil_directions(n: int, s: int) -> np.ndarray:
    out = []
    for raw in np.ndindex(*(2 * s + 1,) * n):
        v = np.array(raw) - s
        if not v.any():
            continue
        g = 0
        for c in v:
            g = gcd(g, abs(int(c)))
        if g != 1:
            continue
        nz = v[v != 0]
        if nz[0] < 0:  # one representative per unoriented direction
            continue
        out.append(v)
    return np.array(sorted(out, key=lambda w: (np.abs(w).max(), w.tolist())),
                    dtype=np.int64)


def discretize_operator(A, stencil: StencilSet, h: float,
                        tau: float = DEFAULT.membership) -> dict:
    """Nonnegative second-difference scheme for the pairing with A >= 0.

    Spectral route: each eigenpair is snapped to the stencil direction of
    smallest angle; the weight lambda / |v|^2 makes the scheme consistent
    with the second derivative along the snapped unit direction.  Reports
    the worst snapping angle (the consistency gap is O(h^2 + angle^2)).
    """
    mat = as_matrix(A)
    vals, vecs = eig_sym_batch(mat[None])
    vals, vecs = vals[0], vecs[0]
    scale = max(1.0, float(np.abs(vals).max()))
    if vals[0] < -tau * scale:
        raise InputError("operator has a negative eigenvalue; scheme would "
                         "lose monotonicity")
    dirs = stencil.directions
    unit = dirs / np.linalg.norm(dirs, axis=1)[:, None]
    weights: dict = {}
    worst_angle = 0.0
    for lam, w in zip(vals, vecs.T):
        if lam <= tau * scale:
            continue
        cosines = np.abs(unit @ w)
        k = int(np.argmax(cosines))
        worst_angle = max(worst_angle, float(np.arccos(min(1.0, cosines[k]))))
        v = tuple(int(c) for c in dirs[k])
        nrm2 = float((dirs[k] ** 2).sum())
        weights[v] = weights.get(v, 0.0) + float(lam) / nrm2
    offsets = np.array(sorted(weights), dtype=np.int64).reshape(len(weights), stencil.n)
    wts = np.array([weights[tuple(v)] for v in offsets])
    return {
        "offsets": offsets,
        "weights": wts,
        "weight_sum": float(wts.sum()),
        "max_angle": worst_angle,
        "h": h,
    }


def trace_normalized_samples(cone: ConeSpec, tau: float = DEFAULT.membership):
    """Polar base samples as PSD trace-one matrices (solver operators)."""
    base = cone.polar_samples()
    vals, _ = eig_sym_batch(base)
    scale = np.maximum(np.abs(vals).max(axis=1), 1.0)
    if np.any(vals[:, 0] < -tau * scale):
        raise InputError("polar sample fails positivity; cone unsuitable for "
                         "the monotone scheme")
    traces = np.trace(base, axis1=1, axis2=2)
    return [SymMatrix(b / t) for b, t in zip(base, traces)]


@dataclass
class SolveReport:
    iterations: int
    residual: float
    wall_time: float
    converged: bool
    backend: str
    mode: str

    def to_json(self) -> dict:
        return {
            "schema_version": 1,
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "wall_time_s": float(self.wall_time),
            "converged": bool(self.converged),
            "backend": self.backend,
            "mode": self.mode,
        }


class DirichletProblem:
    """Grid, domain mask, boundary data and the sampled operator family.

    The mask marks interior unknowns; boundary values live on the non-interior
    points reachable by the stencil (for a plain box: the outermost ring).
    Stencil width shrinks near the boundary so every neighbor stays inside.
    """

    def __init__(self, box, h: float, cone: ConeSpec,
                 boundary: Callable, stencil_width: Optional[int] = None,
                 samples: Optional[Sequence] = None,
                 interior: Optional[Callable] = None,
                 require_elliptic: bool = True):
        self.box = tuple((float(l), float(u)) for l, u in box)
        self.h = float(h)
        self.n = len(self.box)
        self.cone = cone
        if cone.n != self.n:
            raise InputError("cone dimension disagrees with the grid")
        if require_elliptic and cone.kind != "garding":
            rep = ellipticity_check(cone)
            if not rep["elliptic"]:
                raise InputError("cone is not elliptic; uniqueness unsupported")
        self.width = stencil_width if stencil_width else (2 if self.n == 2 else 1)

        axes = [np.arange(round((u - l) / h) + 1) * h + l for l, u in self.box]
        self.shape = tuple(len(a) for a in axes)
        if any(m < 5 for m in self.shape):
            raise InputError("grid too coarse")
        self.axes = axes
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        self.points = pts

        inside = np.ones(self.shape, dtype=bool)
        for i, m in enumerate(self.shape):
            sl = [slice(None)] * self.n
            for edge in (0, m - 1):
                sl[i] = edge
                inside[tuple(sl)] = False
        if interior is not None:
            inside &= interior(pts).reshape(self.shape)
        self.interior = inside

        self.depth = self._depth_map()
        self.boundary = self._boundary_ring()
        if not self.boundary.any():
            raise InputError("empty boundary")
        bvals = np.asarray(boundary(pts[self.boundary.ravel()]), dtype=float)
        if not np.all(np.isfinite(bvals)):
            raise InputError("non-finite boundary data")
        self.boundary_values = bvals

        if samples is not None:
            self.samples = [SymMatrix(as_matrix(s)) for s in samples]
        else:
            self.samples = trace_normalized_samples(cone)
        self._groups = None
        self._strides = np.array(
            [int(np.prod(self.shape[i + 1:], dtype=int)) for i in range(self.n)],
            dtype=np.int64)

    # -- masks ---------------------------------------------------------

    def _depth_map(self) -> np.ndarray:
        """Sup-norm distance (in cells, capped at the stencil width) from each
        interior point to the nearest non-interior point."""
        s = self.width
        depth = np.where(self.interior, s + 1, 0).astype(np.int64)
        for _ in range(s):
            eroded = depth.copy()
            for off in np.ndindex(*(3,) * self.n):
                shift = tuple(o - 1 for o in off)
                if all(o == 0 for o in shift):
                    continue
                sl_src = tuple(slice(max(0, -o), m - max(0, o))
                               for o, m in zip(shift, self.shape))
                sl_dst = tuple(slice(max(0, o), m - max(0, -o))
                               for o, m in zip(shift, self.shape))
                eroded[sl_dst] = np.minimum(eroded[sl_dst], depth[sl_src] + 1)
            depth = np.where(self.interior, eroded, 0)
        return np.minimum(depth, s)

    def _boundary_ring(self) -> np.ndarray:
        near = np.zeros(self.shape, dtype=bool)
        for off in np.ndindex(*(3,) * self.n):
            shift = tuple(o - 1 for o in off)
            sl_src = tuple(slice(max(0, -o), m - max(0, o))
                           for o, m in zip(shift, self.shape))
            sl_dst = tuple(slice(max(0, o), m - max(0, -o))
                           for o, m in zip(shift, self.shape))
            sub = np.zeros(self.shape, dtype=bool)
            sub[sl_dst] = self.interior[sl_src]
            near |= sub
        return near & ~self.interior

    # -- scheme tables ---------------------------------------------------

    def groups(self):
        """Per stencil-width class: (flat interior points, offsets, weights,
        weight sums), with duplicate operator schemes merged."""
        if self._groups is not None:
            return self._groups
        out = []
        flat_depth = self.depth.ravel()
        for w in range(1, self.width + 1):
            pts = np.nonzero(self.interior.ravel() & (flat_depth == w))[0]
            stencil = StencilSet(self.n, w)
            schemes = []
            seen = set()
            for A in self.samples:
                sch = discretize_operator(A, stencil, self.h)
                key = (sch["offsets"].tobytes(),
                       np.round(sch["weights"], 12).tobytes())
                if key in seen:
                    continue
                seen.add(key)
                schemes.append(sch)
            K = max(s["offsets"].shape[0] for s in schemes)
            offs = np.zeros((len(schemes), K), dtype=np.int64)
            wts = np.zeros((len(schemes), K))
            wsum = np.zeros(len(schemes))
            for i, sch in enumerate(schemes):
                flat = sch["offsets"] @ self._strides
                offs[i, : flat.size] = flat
                wts[i, : flat.size] = sch["weights"]
                wsum[i] = sch["weight_sum"]
            out.append((pts.astype(np.int64), offs, wts, wsum))
        self._groups = out
        return out

    def full_values(self, interior_values=None, fill=0.0) -> np.ndarray:
        u = np.full(int(np.prod(self.shape)), fill)
        u[self.boundary.ravel()] = self.boundary_values
        if interior_values is not None:
            u[self.interior.ravel()] = interior_values
        return u

    def as_field(self, u_flat: np.ndarray) -> GridField:
        return GridField(self.box, self.h, u_flat.reshape(self.shape))


def residual(u, problem: DirichletProblem) -> float:
    """max over interior points of |min over operators of the pairing|."""
    u_flat = u.values.ravel().astype(float) if isinstance(u, GridField) \
        else np.asarray(u, dtype=float).ravel()
    backend = kernels.get_backend()
    return float(backend.bellman_residual(u_flat.copy(), problem.groups(),
                                          1.0 / problem.h**2))


def _single_operator_groups(problem: DirichletProblem, A) -> list:
    groups = []
    flat_depth = problem.depth.ravel()
    for w in range(1, problem.width + 1):
        pts = np.nonzero(problem.interior.ravel() & (flat_depth == w))[0]
        sch = discretize_operator(A, StencilSet(problem.n, w), problem.h)
        flat = sch["offsets"] @ problem._strides
        groups.append((pts.astype(np.int64), flat[None, :],
                       sch["weights"][None, :], np.array([sch["weight_sum"]])))
    return groups


def reference_harmonic(problem: DirichletProblem, A, tol: float = 1e-9,
                       max_iters: int = 200000, mode: str = "auto",
                       backend: str = "auto"):
    """Linear solve for a single positive-definite operator: the classical
    initializer and upper bound for the nonlinear iteration."""
    mat = as_matrix(A)
    vals, _ = eig_sym_batch(mat[None])
    if vals[0, 0] <= 0:
        raise InputError("reference operator must be positive definite")
    be = kernels.get_backend(backend)
    used_mode = mode if mode != "auto" else be.sweep_modes[0]
    groups = _single_operator_groups(problem, mat)
    u = problem.full_values(fill=float(problem.boundary_values.min()))
    t0 = time.perf_counter()
    iters, res, ok = be.bellman_solve(u, groups, 1.0 / problem.h**2, tol,
                                      max_iters, mode=used_mode)
    rep = SolveReport(iters, res, time.perf_counter() - t0, ok, be.name, used_mode)
    return problem.as_field(u), rep


def mean_operator(problem: DirichletProblem) -> np.ndarray:
    """Average of the operator samples: the canonical mollifying operator of
    the sampled cone (positive definite whenever the cone is elliptic)."""
    stack = np.stack([s.mat for s in problem.samples])
    return stack.mean(axis=0)


def perron_solve(problem: DirichletProblem, tol: float = 1e-8,
                 max_iters: int = 400000, mode: str = "auto",
                 backend: str = "auto", init: str = "harmonic"):
    """Iterate pointwise minimum of the per-operator averages to the discrete
    solution of min_A <Hess u, A> = 0 with fixed boundary values.

    init "harmonic": start from the mean-operator linear solution (an upper
    solution, so the sweep decreases monotonically); "constant": start from
    the boundary minimum (a lower start; agreement of both certifies the
    discrete fixed point).  Returns (GridField, SolveReport).
    """
    be = kernels.get_backend(backend)
    used_mode = mode if mode != "auto" else be.sweep_modes[0]
    t0 = time.perf_counter()
    if init == "harmonic":
        ref, _ = reference_harmonic(problem, mean_operator(problem),
                                    tol=min(1e-8, tol), mode=mode, backend=backend)
        u = ref.values.ravel().copy()
        u[problem.boundary.ravel()] = problem.boundary_values
    elif init == "constant":
        u = problem.full_values(fill=float(problem.boundary_values.min()))
    else:
        raise InputError(f"unknown initializer {init!r}")
    iters, res, ok = be.bellman_solve(u, problem.groups(), 1.0 / problem.h**2,
                                      tol, max_iters, mode=used_mode)
    rep = SolveReport(iters, res, time.perf_counter() - t0, ok, be.name, used_mode)
    return problem.as_field(u), rep


def cone_monotonicity_check(problem_small: DirichletProblem,
                            problem_big: DirichletProblem,
                            tol: float = 1e-8, solver_tol: float = 1e-9) -> dict:
    """Solutions are ordered when the cones are: the smaller cone must carry
    every operator sample of the larger one (discrete-level inclusion)."""
    small = [s.mat for s in problem_small.samples]
    for b in problem_big.samples:
        if not any(np.abs(b.mat - s).max() < 1e-12 for s in small):
            raise InputError("operator samples are not nested; cones "
                             "incomparable at the discrete level")
    u0, r0 = perron_solve(problem_small, tol=solver_tol)
    u1, r1 = perron_solve(problem_big, tol=solver_tol)
    gap = float((u0.values - u1.values).max())
    return {
        "ordered": gap <= tol,
        "max_violation": max(gap, 0.0),
        "reports": (r0, r1),
        "solutions": (u0, u1),
    }


# -- two-dimensional Monge-Ampere ----------------------------------------


def _orthogonal_pairs(width: int) -> list:
    dirs = stencil_directions(2, width)
    canon = {tuple(v) for v in dirs}
    pairs = []
    seen = set()
    for v in dirs:
        w = np.array([-v[1], v[0]], dtype=np.int64)
        nz = w[w != 0]
        if nz[0] < 0:
            w = -w
        if tuple(w) not in canon:
            continue
        key = frozenset((tuple(v), tuple(w)))
        if key in seen:
            continue
        seen.add(key)
        pairs.append((v, w))
    return pairs


def ma_solve_2d(problem: DirichletProblem, c: float, tol: float = 1e-9,
                max_iters: int = 400000, mode: str = "auto",
                backend: str = "auto"):
    """Pointwise Gauss-Seidel for the two-dimensional determinant equation:
    min over orthogonal direction pairs of the product of second differences
    equals c, on the convex branch."""
    if problem.n != 2:
        raise InputError("determinant solver is two-dimensional")
    if c < 0:
        raise InputError("need c >= 0")
    be = kernels.get_backend(backend)
    used_mode = mode if mode != "auto" else be.sweep_modes[0]
    groups = []
    flat_depth = problem.depth.ravel()
    for w in range(1, problem.width + 1):
        pts = np.nonzero(problem.interior.ravel() & (flat_depth == w))[0]
        pairs = _orthogonal_pairs(w)
        off1 = np.array([p[0] @ problem._strides for p in pairs], dtype=np.int64)
        off2 = np.array([p[1] @ problem._strides for p in pairs], dtype=np.int64)
        d1 = np.array([(problem.h ** 2) * float((p[0] ** 2).sum()) for p in pairs])
        d2 = np.array([(problem.h ** 2) * float((p[1] ** 2).sum()) for p in pairs])
        groups.append((pts.astype(np.int64), off1, off2, d1, d2))
    u = problem.full_values(fill=float(problem.boundary_values.min()))
    t0 = time.perf_counter()
    iters, res, ok = be.ma2d_solve(u, groups, c, tol, max_iters, mode=used_mode)
    rep = SolveReport(iters, res, time.perf_counter() - t0, ok, be.name, used_mode)
    return problem.as_field(u), rep


def ma2d_residual(u, problem: DirichletProblem, c: float) -> float:
    u_flat = u.values.ravel().astype(float) if isinstance(u, GridField) \
        else np.asarray(u, dtype=float).ravel()
    groups = []
    flat_depth = problem.depth.ravel()
    for w in range(1, problem.width + 1):
        pts = np.nonzero(problem.interior.ravel() & (flat_depth == w))[0]
        pairs = _orthogonal_pairs(w)
        off1 = np.array([p[0] @ problem._strides for p in pairs], dtype=np.int64)
        off2 = np.array([p[1] @ problem._strides for p in pairs], dtype=np.int64)
        d1 = np.array([(problem.h ** 2) * float((p[0] ** 2).sum()) for p in pairs])
        d2 = np.array([(problem.h ** 2) * float((p[1] ** 2).sum()) for p in pairs])
        groups.append((pts.astype(np.int64), off1, off2, d1, d2))
    be = kernels.get_backend()
    return float(be.ma2d_residual(u_flat.copy(), groups, c))
