"""Sampled scalar functions on uniform grids: finite-difference Hessians,
pointwise cone classification, subaffinity, smoothed maxima and hulls."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .config import DEFAULT, rng
from .cones import ConeSpec, margin_batch, psplus_membership
from .linalg import InputError, SymMatrix

NOT_PSH = 0
PARTIALLY_PLURIHARMONIC = 1
PSH = 2
STRICT_PSH = 3

CLASS_NAMES = {
    NOT_PSH: "NotPSH",
    PARTIALLY_PLURIHARMONIC: "PartiallyPluriharmonic",
    PSH: "PSH",
    STRICT_PSH: "StrictPSH",
}


@dataclass(frozen=True)
class GridField:
    """A scalar function sampled on a uniform rectangular grid.

    box: per-axis (lo, hi); h: common spacing; values: row-major array.
    When `source` is set the stored values must reproduce it to 1e-12.
    """

    box: tuple
    h: float
    values: np.ndarray
    source: Optional[Callable] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != len(self.box):
            raise InputError("value array rank disagrees with the box")
        if any(m < 5 for m in vals.shape):
            raise InputError("need at least 5 points per axis")
        if not np.all(np.isfinite(vals)):
            raise InputError("non-finite values")
        for (lo, hi), m in zip(self.box, vals.shape):
            if abs((hi - lo) - (m - 1) * self.h) > 1e-9 * max(1.0, abs(hi - lo)):
                raise InputError("box length is not a whole number of cells")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "box", tuple((float(l), float(h_)) for l, h_ in self.box))
        if self.source is not None:
            err = np.abs(vals - self.source(*self.meshes())).max()
            if err > 1e-12 * max(1.0, np.abs(vals).max()):
                raise InputError("stored values disagree with the source expression")

    @property
    def n(self) -> int:
        return len(self.box)

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        return [lo + self.h * np.arange(m) for (lo, _), m in zip(self.box, self.shape)]

    def meshes(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    @classmethod
    def from_function(cls, f: Callable, box, h: float) -> "GridField":
        box = tuple((float(l), float(u)) for l, u in box)
        axes = [np.arange(round((u - l) / h) + 1) * h + l for l, u in box]
        mesh = np.meshgrid(*axes, indexing="ij")
        return cls(box, h, np.asarray(f(*mesh), dtype=float), source=f)

    def interior_indices(self, depth: int = 2) -> np.ndarray:
        """Row-major multi-indices at least `depth` cells from every face."""
        ranges = [np.arange(depth, m - depth) for m in self.shape]
        grids = np.meshgrid(*ranges, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def interior_points(self, depth: int = 2) -> np.ndarray:
        idx = self.interior_indices(depth)
        lows = np.array([lo for lo, _ in self.box])
        return lows + self.h * idx

    # -- serialization --------------------------------------------------

    def write_csv(self, path: str, sidecar: bool = True) -> None:
        lows = ",".join(format(lo, ".17g") for lo, _ in self.box)
        highs = ",".join(format(hi, ".17g") for _, hi in self.box)
        with open(path, "w") as fh:
            fh.write(f"{self.n},{format(self.h, '.17g')},{lows},{highs}\n")
            for v in self.values.ravel():
                fh.write(format(v, ".17g") + "\n")
        if sidecar:
            meta = {
                "schema_version": 1,
                "n": self.n,
                "h": self.h,
                "box": [list(b) for b in self.box],
                "shape": list(self.shape),
            }
            with open(path + ".json", "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True)
                fh.write("\n")

    @classmethod
    def read_csv(cls, path: str) -> "GridField":
        with open(path) as fh:
            head = fh.readline().strip().split(",")
            n = int(head[0])
            h = float(head[1])
            lows = [float(x) for x in head[2:2 + n]]
            highs = [float(x) for x in head[2 + n:2 + 2 * n]]
            flat = np.array([float(line) for line in fh if line.strip()])
        shape = tuple(round((u - l) / h) + 1 for l, u in zip(lows, highs))
        return cls(tuple(zip(lows, highs)), h, flat.reshape(shape))


# -- finite differences ------------------------------------------------


def batch_hessians(field: GridField, depth: int = 2):
    """Centered-difference Hessians at every depth-deep interior point.

    Returns (idx (P, n) multi-indices, H (P, n, n)).  Diagonal terms use the
    3-point second difference, off-diagonal the 4-point cross formula; both
    are exact on quadratics.
    """
    v = field.values
    n = field.n
    h2 = field.h * field.h
    idx = field.interior_indices(depth)
    core = tuple(slice(depth, m - depth) for m in v.shape)

    def shifted(*offsets):
        sl = tuple(slice(depth + o, m - depth + o) for o, m in zip(offsets, v.shape))
        return v[sl]

    P = idx.shape[0]
    H = np.empty((P, n, n))
    zero = [0] * n
    center = shifted(*zero)
    for i in range(n):
        e = zero.copy()
        e[i] = 1
        d2 = (shifted(*e) - 2.0 * center + shifted(*[-o for o in e])) / h2
        H[:, i, i] = d2.ravel()
    for i in range(n):
        for j in range(i + 1, n):
            pp = zero.copy(); pp[i] = 1; pp[j] = 1
            pm = zero.copy(); pm[i] = 1; pm[j] = -1
            mp = zero.copy(); mp[i] = -1; mp[j] = 1
            mm = zero.copy(); mm[i] = -1; mm[j] = -1
            cross = (shifted(*pp) - shifted(*pm) - shifted(*mp) + shifted(*mm)) / (4.0 * h2)
            H[:, i, j] = H[:, j, i] = cross.ravel()
    return idx, H


def hessian_fd(field: GridField, index) -> SymMatrix:
    """Finite-difference Hessian at one grid multi-index (2-deep interior)."""
    index = tuple(int(i) for i in index)
    for i, m in zip(index, field.shape):
        if not (2 <= i <= m - 3):
            raise InputError(f"point {index} is not 2 cells inside the grid")
    v = field.values
    n = field.n
    h2 = field.h * field.h
    H = np.empty((n, n))

    def at(*offsets):
        return v[tuple(i + o for i, o in zip(index, offsets))]

    zero = [0] * n
    for i in range(n):
        e = zero.copy(); e[i] = 1
        H[i, i] = (at(*e) - 2.0 * at(*zero) + at(*[-o for o in e])) / h2
    for i in range(n):
        for j in range(i + 1, n):
            pp = zero.copy(); pp[i] = 1; pp[j] = 1
            pm = zero.copy(); pm[i] = 1; pm[j] = -1
            mp = zero.copy(); mp[i] = -1; mp[j] = 1
            mm = zero.copy(); mm[i] = -1; mm[j] = -1
            H[i, j] = H[j, i] = (at(*pp) - at(*pm) - at(*mp) + at(*mm)) / (4.0 * h2)
    return SymMatrix(H)


def fd_hessian_callable(f: Callable, x: np.ndarray, step: float = 1e-3) -> np.ndarray:
    """Centered-difference Hessian of a callable f(point-array) at x."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n); ei[i] = step
        H[i, i] = (f(x + ei) - 2.0 * f(x) + f(x - ei)) / step**2
        for j in range(i + 1, n):
            ej = np.zeros(n); ej[j] = step
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * step**2)
    return H


# -- classification ----------------------------------------------------


@dataclass(frozen=True)
class PointClassification:
    """Per interior grid point: class code, membership margin, strict margin."""

    indices: np.ndarray
    classes: np.ndarray
    margins: np.ndarray
    strict_margins: Optional[np.ndarray]
    epsilon: float

    @property
    def summary(self) -> str:
        """Weakest pointwise class over the interior."""
        return CLASS_NAMES[int(self.classes.min())] if self.classes.size else "PSH"

    @property
    def all_psh(self) -> bool:
        return bool(np.all(self.classes >= PARTIALLY_PLURIHARMONIC))


def _curvature_floor(field: GridField) -> float:
    scale = max(1.0, float(np.abs(field.values).max()))
    return 1e-11 * scale / (field.h * field.h)


def psh_classify(field: GridField, cone: ConeSpec, epsilon: float = 0.0,
                 tau: float = DEFAULT.membership) -> PointClassification:
    """Classify the finite-difference Hessian of every interior point.

    epsilon > 0 additionally tests the uniform-strictness shift: the Hessian
    minus 2*epsilon*I must stay in the cone for a StrictPSH(epsilon) label.
    """
    idx, H = batch_hessians(field)
    floor = _curvature_floor(field)
    margins = margin_batch(cone, H, floor=floor)
    classes = np.full(margins.shape, PSH, dtype=int)
    classes[margins < -tau] = NOT_PSH
    classes[np.abs(margins) <= tau] = PARTIALLY_PLURIHARMONIC
    strict_margins = None
    if epsilon > 0.0:
        shifted = H - 2.0 * epsilon * np.eye(field.n)[None]
        strict_margins = margin_batch(cone, shifted, floor=floor)
        classes[(classes == PSH) & (strict_margins >= -tau)] = STRICT_PSH
    else:
        classes[classes == PSH] = np.where(
            margins[classes == PSH] > tau, STRICT_PSH, PSH)
    return PointClassification(idx, classes, margins, strict_margins, epsilon)


def subaffine_check(field: GridField, tau: float = DEFAULT.membership):
    """Pointwise: largest Hessian eigenvalue >= -tau; plus the field verdict."""
    from .linalg import eig_sym_batch
    idx, H = batch_hessians(field)
    vals, _ = eig_sym_batch(H)
    scale = np.maximum(np.abs(vals).max(axis=1), _curvature_floor(field))
    per_point = vals[:, -1] / scale >= -tau
    return per_point, bool(per_point.all())


# -- smoothed maxima ----------------------------------------------------

_QUAD_N = 96
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_QUAD_N)
_NORM_X, _NORM_W = np.polynomial.legendre.leggauss(512)


def _bump(x):
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


_BUMP_MASS = float((_NORM_W * _bump(_NORM_X)).sum())


class SmoothMax2:
    """Mollified two-argument maximum.

    Convolution of max with a product of one-dimensional bumps of half-width
    eps/sqrt(2) (total support inside the eps-ball), reduced to one smooth
    profile of the difference: max_eps(a, b) = b + F(a - b).
    """

    def __init__(self, eps: float):
        if eps <= 0.0:
            raise InputError("smoothing width must be positive")
        self.eps = float(eps)
        self.b = float(eps) / np.sqrt(2.0)
        # bump density on [-b, b] and outer quadrature nodes against it;
        # renormalized so the weights sum to one exactly and linear functions
        # convolve to themselves at float precision
        self._nodes = self.b * _GL_X
        w = _GL_W * _bump(_GL_X)
        self._outer_w = w / w.sum()

    def _kappa(self, v):
        """E[(v - S)^+] for S distributed by the bump of half-width b."""
        v = np.asarray(v, dtype=float)
        b = self.b
        out = np.where(v >= b, v, 0.0)
        mid = (v > -b) & (v < b)
        if np.any(mid):
            vm = v[mid]
            # integrate (v - s) psi(s) over [-b, v] with mapped nodes
            half = 0.5 * (vm + b)
            s = half[:, None] * _GL_X[None, :] + (vm[:, None] - half[:, None])
            dens = _bump(s / b) / (_BUMP_MASS * b)
            out[mid] = (half[:, None] * _GL_W[None, :] * (vm[:, None] - s) * dens).sum(axis=1)
        return out

    def _cdf(self, v):
        """P(S <= v)."""
        v = np.asarray(v, dtype=float)
        b = self.b
        out = np.where(v >= b, 1.0, 0.0)
        mid = (v > -b) & (v < b)
        if np.any(mid):
            vm = v[mid]
            half = 0.5 * (vm + b)
            s = half[:, None] * _GL_X[None, :] + (vm[:, None] - half[:, None])
            dens = _bump(s / b) / (_BUMP_MASS * b)
            out[mid] = (half[:, None] * _GL_W[None, :] * dens).sum(axis=1)
        return out

    def _density(self, v):
        return _bump(np.asarray(v, dtype=float) / self.b) / (_BUMP_MASS * self.b)

    def profile(self, d):
        """F(d) = E[(d - S1 + S2)^+]; equals max(d, 0) once |d| >= sqrt(2) eps."""
        d = np.asarray(d, dtype=float)
        flat = d.ravel()
        out = np.zeros_like(flat)
        for s, w in zip(self._nodes, self._outer_w):
            out += w * self._kappa(flat + s)
        return out.reshape(d.shape)

    def profile_d1(self, d):
        d = np.asarray(d, dtype=float)
        flat = d.ravel()
        out = np.zeros_like(flat)
        for s, w in zip(self._nodes, self._outer_w):
            out += w * self._cdf(flat + s)
        return out.reshape(d.shape)

    def profile_d2(self, d):
        d = np.asarray(d, dtype=float)
        flat = d.ravel()
        out = np.zeros_like(flat)
        for s, w in zip(self._nodes, self._outer_w):
            out += w * self._density(flat + s)
        return out.reshape(d.shape)

    def value(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return b + self.profile(a - b)

    def partials(self, a, b):
        """(dM/da, dM/db, d2M/dd2) for the chain rule; dM/da + dM/db = 1."""
        g = self.profile_d1(np.asarray(a, dtype=float) - b)
        return g, 1.0 - g, self.profile_d2(np.asarray(a, dtype=float) - b)


def smooth_max(values: Sequence, eps: float):
    """Smoothed maximum of m streams: exact pairwise convolution for m = 2,
    left-fold of pairwise calls with split widths for m > 2 (all three
    defining properties survive the fold)."""
    vals = [np.asarray(v, dtype=float) for v in values]
    if len(vals) < 2:
        raise InputError("need at least two arguments")
    if eps <= 0.0:
        raise InputError("smoothing width must be positive")
    levels = len(vals) - 1
    sm = SmoothMax2(eps / levels)
    acc = vals[0]
    for v in vals[1:]:
        acc = sm.value(acc, v)
    return acc


def smooth_max_field(fields: Sequence[GridField], eps: float) -> GridField:
    f0 = fields[0]
    for f in fields[1:]:
        if f.box != f0.box or f.shape != f0.shape:
            raise InputError("fields live on different grids")
    merged = smooth_max([f.values for f in fields], eps)
    return GridField(f0.box, f0.h, merged)


def convex_compose_check(field: GridField, psi: Callable, cone: ConeSpec,
                         tau: float = DEFAULT.membership) -> bool:
    """psi convex nondecreasing: composition must stay classified in the cone."""
    composed = GridField(field.box, field.h, psi(field.values))
    return psh_classify(composed, cone, tau=tau).all_psh


# -- hulls --------------------------------------------------------------


def hull_estimate(K: np.ndarray, cone: ConeSpec, box, h: float,
                  budget: int = 2000, seed: int = 17,
                  tau: float = 1e-9) -> GridField:
    """Outer bound on the cone-convex hull of the point set K.

    Test family: quadratics a + b.x + x^T Q x / 2 with Q a membership-passing
    form (plus the affine ones).  A grid point is excluded when some test
    function exceeds its maximum over K.  Monotone in the budget: more test
    functions can only exclude more.  Returns a 0/1 mask field (1 = kept).
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    n = K.shape[1]
    if n != cone.n:
        raise InputError("dimension mismatch")
    gen = rng(seed)
    probe = GridField.from_function(lambda *cs: np.zeros_like(cs[0]), box, h)
    pts = np.stack([m.ravel() for m in probe.meshes()], axis=1)
    keep = np.ones(pts.shape[0], dtype=bool)
    drawn = 0
    while drawn < budget:
        b = gen.normal(size=n)
        if drawn % 2 == 0:
            Q = np.zeros((n, n))  # affine test functions
        else:
            g = gen.normal(size=(n, n))
            Q = 0.5 * (g + g.T)
            shift = 0.0
            for _ in range(40):
                if psplus_membership(Q + shift * np.eye(n), cone).inside:
                    Q = Q + shift * np.eye(n)
                    break
                shift = 1.0 if shift == 0.0 else 2.0 * shift
        drawn += 1
        qk = K @ b + 0.5 * np.einsum("pi,ij,pj->p", K, Q, K)
        qg = pts @ b + 0.5 * np.einsum("pi,ij,pj->p", pts, Q, pts)
        keep &= qg <= qk.max() + tau * max(1.0, np.abs(qk).max())
    return GridField(probe.box, h, keep.reshape(probe.shape).astype(float))
