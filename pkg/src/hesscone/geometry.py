"""Boundary convexity, global defining functions, exhaustions, and freeness
of submanifolds through the squared distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT, rng
from .cones import ConeSpec, GRASSMANN, complex_structure, margin_batch, \
    psplus_membership
from .exprs import Expr
from .fields import SmoothMax2, fd_hessian_callable
from .linalg import InputError, SymMatrix, eig_sym_batch


class DegenerateBoundaryError(ValueError):
    """The gradient of the defining function vanishes on the boundary."""


class ConstructionRefused(RuntimeError):
    """A construction's precondition failed; carries the witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class DomainSpec:
    """A domain {rho < 0} described by a closed-form defining function.

    The expression carries exact gradient and Hessian evaluators; `box`
    bounds the region of interest for grids and boundary sampling.
    """

    n: int
    rho: str
    box: tuple
    collar: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "_expr", Expr(self.n, self.rho))
        object.__setattr__(self, "box",
                           tuple((float(l), float(u)) for l, u in self.box))

    def value(self, pts):
        return self._expr.value(pts)

    def gradient(self, pts):
        return self._expr.gradient(pts)

    def hessian(self, pts):
        return self._expr.hessian(pts)

    def grid_points(self, m: int) -> np.ndarray:
        axes = [np.linspace(l, u, m) for l, u in self.box]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def interior_seed(self, m: int = 41) -> np.ndarray:
        pts = self.grid_points(m)
        vals = self.value(pts)
        k = int(np.argmin(vals))
        if vals[k] >= 0:
            raise InputError("no interior point found in the box")
        return pts[k]

    def boundary_sample(self, count: int, seed: int = 2024,
                        tol: float = 1e-12) -> np.ndarray:
        """Points with |rho| below tolerance, found by bisecting random rays
        from an interior seed; both ray directions are probed so every
        boundary component is reachable."""
        gen = rng(seed)
        seed_pt = self.interior_seed()
        diam = max(u - l for l, u in self.box)
        out = []
        attempts = 0
        while len(out) < count and attempts < 60 * count:
            attempts += 1
            d = gen.normal(size=self.n)
            d /= np.linalg.norm(d)
            if attempts % 2 == 0:
                d = -d
            x = self._ray_hit(seed_pt, d, diam, tol)
            if x is not None:
                out.append(x)
        if len(out) < count:
            raise InputError("boundary sampling failed; check the box")
        pts = np.array(out)
        grads = self.gradient(pts)
        if np.any(np.linalg.norm(grads, axis=1) < DEFAULT.grad_floor):
            raise DegenerateBoundaryError("gradient vanishes at a sampled "
                                          "boundary point")
        return pts

    def _ray_hit(self, p, d, diam, tol):
        t0, v0 = 0.0, float(self.value(p[None])[0])
        step = diam / 64.0
        t = step
        while t <= 1.5 * diam:
            v = float(self.value((p + t * d)[None])[0])
            if not np.isfinite(v):
                return None
            if v0 < 0 <= v:
                lo, hi = t0, t
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    vm = float(self.value((p + mid * d)[None])[0])
                    if vm < 0:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo < 1e-16 * max(1.0, diam):
                        break
                x = p + 0.5 * (lo + hi) * d
                if abs(float(self.value(x[None])[0])) <= max(tol, 1e-9):
                    return x
                return None
            t0, v0 = t, v
            t += step
        return None

    def to_json(self) -> dict:
        return {"n": self.n, "rho": self.rho,
                "box": [list(b) for b in self.box], "collar": self.collar}

    @classmethod
    def from_json(cls, doc: dict) -> "DomainSpec":
        return cls(n=int(doc["n"]), rho=doc["rho"],
                   box=tuple(tuple(b) for b in doc["box"]),
                   collar=float(doc.get("collar", 0.05)))


def unit_ball(n: int, radius: float = 1.0) -> DomainSpec:
    sq = "+".join(f"x{i}^2" for i in range(n))
    pad = 0.25 * radius
    return DomainSpec(n, f"0.5*({sq}-{radius * radius})",
                      tuple((-radius - pad, radius + pad) for _ in range(n)))


def annulus_2d(r_in: float = 1.0, r_out: float = 2.0) -> DomainSpec:
    return DomainSpec(
        2, f"(x0^2+x1^2-{r_out * r_out})*(x0^2+x1^2-{r_in * r_in})",
        ((-r_out - 0.3, r_out + 0.3), (-r_out - 0.3, r_out + 0.3)))


# ---------------------------------------------------------------------------
# tangential directions of the polar at a boundary point
# ---------------------------------------------------------------------------

def _tangent_basis(normal: np.ndarray) -> np.ndarray:
    """(n-1, n) orthonormal rows spanning the hyperplane normal^perp."""
    n = normal.size
    _, _, vt = np.linalg.svd(normal[None, :])
    return vt[1:]


def _exact_tangential_minimum(cone: ConeSpec, hess: np.ndarray,
                              normal: np.ndarray):
    """Infimum of <Hess, A> over trace-normalized tangential members of the
    named families, with the minimizing direction; None when there is no
    closed form (lagrangian) or no tangential member at all (full-trace)."""
    fam = cone.family if cone.kind == GRASSMANN else None
    n = hess.shape[0]
    if fam in ("real-lines", "real-planes"):
        p = 1 if fam == "real-lines" else cone.p
        T = _tangent_basis(normal)
        if p > T.shape[0]:
            return 0.0, None, True  # no tangential p-plane fits: vacuous
        comp = T @ hess @ T.T
        vals, vecs = eig_sym_batch(comp[None])
        vecs_full = (vecs[0].T[:p] @ T)
        A = vecs_full.T @ vecs_full / p
        return float(vals[0, :p].sum()) / p, SymMatrix(A), False
    if fam == "complex-lines":
        J = complex_structure(n)
        span = np.stack([normal, J @ normal])
        _, _, vt = np.linalg.svd(span)
        H = vt[2:]
        if H.shape[0] == 0:
            return 0.0, None, True
        K = hess + J.T @ hess @ J
        comp = H @ K @ H.T
        vals, vecs = eig_sym_batch(comp[None])
        v = vecs[0][:, 0] @ H
        basis = np.stack([v, J @ v])
        A = basis.T @ basis / 2.0
        return float(vals[0, 0]) / 2.0, SymMatrix(A), False
    if fam == "full-trace":
        return 0.0, None, True  # the full plane is never tangential
    return None


def boundary_convexity_check(domain: DomainSpec, cone: ConeSpec, x,
                             tau: float = DEFAULT.membership,
                             delta_t: float = 1e-7) -> dict:
    """Sign of <Hess rho, A> over tangential polar directions at x.

    Tangential members are the trace-normalized polar samples with
    <n o n, A> below delta_t, plus the family's exact tangential minimizer
    when it has a closed form.  Pairings are normalized by |grad rho| so the
    verdict does not depend on the scaling of the defining function.
    """
    x = np.asarray(x, dtype=float)
    grad = domain.gradient(x[None])[0]
    gn = float(np.linalg.norm(grad))
    if gn < DEFAULT.grad_floor:
        raise DegenerateBoundaryError("grad rho vanishes at the point")
    normal = grad / gn
    hess = domain.hessian(x[None])[0]

    if cone.kind == "garding":
        # no explicit polar: use the large-C interior criterion instead
        C = strict_constant_C(domain, cone, x, tau=tau)
        strict = C is not None
        margin = psplus_membership(
            hess + (0.0 if C is None else 2.0 * C) * np.outer(grad, grad),
            cone, tau).margin
        return {"strict": strict, "weak": strict, "witness": None,
                "min_pairing": float(margin), "vacuous": False,
                "route": "large-C"}

    pairings = []
    witnesses = []
    vacuous = True
    exact = _exact_tangential_minimum(cone, hess, normal)
    if exact is not None:
        val, wit, vac = exact
        if not vac:
            pairings.append(val / gn)
            witnesses.append(wit)
            vacuous = False
    if cone.kind == GRASSMANN or cone.kind == "generated":
        base = cone.polar_samples()
        tr = np.trace(base, axis1=1, axis2=2)
        base = base / tr[:, None, None]
        nn = np.einsum("i,bij,j->b", normal, base, normal)
        sel = nn < delta_t
        if sel.any():
            vals = np.einsum("ij,bij->b", hess, base[sel]) / gn
            k = int(np.argmin(vals))
            pairings.append(float(vals[k]))
            witnesses.append(SymMatrix(base[sel][k]))
            vacuous = False

    if vacuous:
        return {"strict": True, "weak": True, "witness": None,
                "min_pairing": np.inf, "vacuous": True}
    k = int(np.argmin(pairings))
    worst = float(pairings[k])
    return {
        "strict": bool(worst > tau),
        "weak": bool(worst >= -tau),
        "witness": witnesses[k],
        "min_pairing": worst,
        "vacuous": False,
    }


def strict_constant_C(domain: DomainSpec, cone: ConeSpec, x,
                      C_max: float = 1e6,
                      tau: float = DEFAULT.membership) -> Optional[float]:
    """Smallest C making Hess rho + C grad rho o grad rho interior, by
    doubling then bisection; None signals a non-strict boundary point."""
    x = np.asarray(x, dtype=float)
    grad = domain.gradient(x[None])[0]
    if np.linalg.norm(grad) < DEFAULT.grad_floor:
        raise DegenerateBoundaryError("grad rho vanishes at the point")
    hess = domain.hessian(x[None])[0]
    gg = np.outer(grad, grad)

    def interior(C):
        return psplus_membership(hess + C * gg, cone, tau).interior

    if interior(0.0):
        return 0.0
    hi = 1.0
    while hi <= C_max and not interior(hi):
        hi *= 2.0
    if hi > C_max:
        return None
    lo = hi / 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if interior(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# global defining function (strictly plurisubharmonic on the closure)
# ---------------------------------------------------------------------------

class PatchedDefiningFunction:
    """rho-hat = smooth max of (rho + C rho^2 / 2) and (a |x|^2 - t).

    Exact gradient/Hessian via the smooth-max chain rule; agrees with the
    quadratically corrected rho near the boundary and with the strictly
    convex bowl deep inside."""

    def __init__(self, domain: DomainSpec, C: float, a: float, t: float,
                 eps: float):
        self.domain = domain
        self.C = float(C)
        self.a = float(a)
        self.t = float(t)
        self.eps = float(eps)
        self._sm = SmoothMax2(eps)

    def _parts(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        rho = self.domain.value(pts)
        f = rho + 0.5 * self.C * rho * rho
        g = self.a * (pts * pts).sum(axis=1) - self.t
        return pts, rho, f, g

    def value(self, pts):
        _, _, f, g = self._parts(pts)
        return self._sm.value(f, g)

    def tilde_value(self, pts):
        _, _, f, _ = self._parts(pts)
        return f

    def gradient(self, pts):
        pts, rho, f, g = self._parts(pts)
        d1, d2, _ = self._sm.partials(f, g)
        gf = (1.0 + self.C * rho)[:, None] * self.domain.gradient(pts)
        gg = 2.0 * self.a * pts
        return d1[:, None] * gf + d2[:, None] * gg

    def hessian(self, pts):
        pts, rho, f, g = self._parts(pts)
        d1, d2, curv = self._sm.partials(f, g)
        grho = self.domain.gradient(pts)
        hrho = self.domain.hessian(pts)
        hf = (1.0 + self.C * rho)[:, None, None] * hrho + \
            self.C * np.einsum("pi,pj->pij", grho, grho)
        hg = 2.0 * self.a * np.eye(pts.shape[1])[None]
        gf = (1.0 + self.C * rho)[:, None] * grho
        ggrad = 2.0 * self.a * pts
        diff = gf - ggrad
        return (d1[:, None, None] * hf + d2[:, None, None] * hg
                + curv[:, None, None] * np.einsum("pi,pj->pij", diff, diff))


def global_defining_function(domain: DomainSpec, cone: ConeSpec,
                             budget: int = 64, seed: int = 2024,
                             grid_n: int = 61,
                             tau: float = DEFAULT.membership) -> dict:
    """Construct a strictly plurisubharmonic defining function.

    Recipe: find (eps, delta) so near-tangential polar pairings of Hess rho
    stay above eps on the sampled boundary, take C above M/delta with a 2x
    safety factor, bend rho to rho + C rho^2/2, and patch the inside with a
    shallow bowl through a smoothed maximum.  Refused (with witness) when a
    sampled boundary point is not strictly convex.
    """
    xs = domain.boundary_sample(budget, seed)
    for x in xs:
        rep = boundary_convexity_check(domain, cone, x, tau)
        if not rep["strict"]:
            raise ConstructionRefused(
                f"boundary point {x.tolist()} is not strictly convex",
                witness=(x, rep["witness"]))

    grads = domain.gradient(xs)
    hess = domain.hessian(xs)
    if cone.kind == GRASSMANN and cone.family == "full-trace":
        base = np.eye(domain.n)[None] / domain.n
    else:
        base = cone.polar_samples()
        base = base / np.trace(base, axis1=1, axis2=2)[:, None, None]
    filt = np.einsum("pi,bij,pj->pb", grads, base, grads)
    pair = np.einsum("pij,bij->pb", hess, base)

    M = max(0.0, -float(pair.min()))
    delta = None
    eps = None
    for cand in np.geomspace(max(filt.max(), 1e-8), 1e-10, 120):
        sel = filt < cand
        if not sel.any():
            continue
        worst = float(pair[sel].min())
        if worst > 0:
            delta, eps = float(cand), 0.5 * worst
            break
    if delta is None:
        raise ConstructionRefused("no tangential-margin threshold found")
    C = 0.0 if M == 0.0 else 2.0 * M / delta

    # collar level: the corrected function must be strict on {-2t < f < 2t}
    probe = domain.grid_points(grid_n)
    rho_probe = domain.value(probe)
    f_probe = rho_probe + 0.5 * C * rho_probe**2
    hrho = domain.hessian(probe)
    grho = domain.gradient(probe)
    hf = (1.0 + C * rho_probe)[:, None, None] * hrho + \
        C * np.einsum("pi,pj->pij", grho, grho)
    margins = margin_batch(cone, hf)
    inner_min = float(f_probe[rho_probe < 0].min())
    t = abs(inner_min) / 2.0
    for _ in range(40):
        band = np.abs(f_probe) < 2.0 * t
        if band.any() and margins[band].min() > tau:
            break
        t *= 0.5
    else:
        raise ConstructionRefused("no strict collar found")

    R2 = float((probe[rho_probe <= 0] ** 2).sum(axis=1).max())
    a = t / (4.0 * max(R2, 1e-12))
    eps_s = t / 4.0
    fn = PatchedDefiningFunction(domain, C, a, t, eps_s)

    keep = f_probe < t  # a neighborhood of the closure
    ver_margins = margin_batch(cone, fn.hessian(probe[keep]))
    report = {
        "epsilon": eps, "delta": delta, "M": M, "C": C, "a": a, "t": t,
        "eps_max": eps_s, "strict_margin": float(ver_margins.min()),
        "verified_points": int(keep.sum()),
        "boundary_samples": int(budget),
    }
    if report["strict_margin"] <= 0:
        raise ConstructionRefused("patched function failed verification",
                                  witness=report)
    return {"function": fn, "constants": report}


def exhaustion_check(domain: DomainSpec, cone: ConeSpec, grid_n: int = 41,
                     seed: int = 2024, tau: float = DEFAULT.membership) -> dict:
    """Is -log(-rho-hat) strictly plurisubharmonic on the interior?

    Uses the constructed defining function when available, the raw rho
    otherwise (flagged): the Hessian of -log of the negated function is
    Hess(f)/d + grad f o grad f / d^2 with d = -f > 0.
    """
    try:
        built = global_defining_function(domain, cone, seed=seed)
        fn = built["function"]
        patched = True
        value = fn.value
        gradient = fn.gradient
        hessian = fn.hessian
    except ConstructionRefused:
        patched = False
        value = lambda p: domain.value(np.atleast_2d(p))
        gradient = lambda p: domain.gradient(np.atleast_2d(p))
        hessian = lambda p: domain.hessian(np.atleast_2d(p))

    pts = domain.grid_points(grid_n)
    vals = value(pts)
    h_grid = (domain.box[0][1] - domain.box[0][0]) / (grid_n - 1)
    inside = vals < -max(domain.collar * 0.2, 2.0 * h_grid * 1e-3)
    d = -vals[inside]
    excluded = int(((vals < 0) & ~inside).sum())
    g = gradient(pts[inside])
    H = hessian(pts[inside])
    hess_log = H / d[:, None, None] + \
        np.einsum("pi,pj->pij", g, g) / (d * d)[:, None, None]
    margins = margin_batch(cone, hess_log)
    return {
        "passes": bool(margins.min() > tau),
        "min_margin": float(margins.min()),
        "points": int(inside.sum()),
        "excluded_near_boundary": excluded,
        "patched_defining_function": patched,
    }


# ---------------------------------------------------------------------------
# submanifolds: squared distance and tubes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubmanifoldSpec:
    """A closed submanifold with an evaluable distance and normal spaces.

    kinds: "point" (params: coordinates), "axis-line" (the first axis),
    "axis-segment" (params: (lo, hi) on the first axis), "circle" (radius,
    in the plane), "parametric" (callable curve with parameter range).
    """

    n: int
    kind: str
    params: tuple = ()
    curve: Optional[Callable] = None

    def dist_sq_half(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "point":
            z = np.asarray(self.params, dtype=float)
            return 0.5 * float(((x - z) ** 2).sum())
        if self.kind == "axis-line":
            return 0.5 * float((x[1:] ** 2).sum())
        if self.kind == "axis-segment":
            lo, hi = self.params
            ex = max(lo - x[0], 0.0, x[0] - hi)
            return 0.5 * (ex * ex + float((x[1:] ** 2).sum()))
        if self.kind == "circle":
            r = self.params[0]
            return 0.5 * (float(np.linalg.norm(x)) - r) ** 2
        if self.kind == "parametric":
            return 0.5 * self._project(x)[1] ** 2
        raise InputError(f"unknown submanifold kind {self.kind!r}")

    def _project(self, x):
        lo, hi = self.params if self.params else (0.0, 1.0)
        ts = np.linspace(lo, hi, 257)
        pts = np.stack([self.curve(t) for t in ts])
        d2 = ((pts - x) ** 2).sum(axis=1)
        k = int(np.argmin(d2))
        a, b = max(lo, ts[max(k - 1, 0)]), min(hi, ts[min(k + 1, len(ts) - 1)])
        phi = (np.sqrt(5.0) - 1.0) / 2.0
        for _ in range(80):
            m1 = b - phi * (b - a)
            m2 = a + phi * (b - a)
            f1 = ((np.asarray(self.curve(m1)) - x) ** 2).sum()
            f2 = ((np.asarray(self.curve(m2)) - x) ** 2).sum()
            if f1 < f2:
                b = m2
            else:
                a = m1
        t = 0.5 * (a + b)
        p = np.asarray(self.curve(t))
        return t, float(np.linalg.norm(p - x))

    def sample_points(self, count: int, seed: int = 2024) -> np.ndarray:
        gen = rng(seed)
        if self.kind == "point":
            return np.tile(np.asarray(self.params, dtype=float), (1, 1))
        if self.kind == "axis-line":
            xs = gen.uniform(-1.0, 1.0, size=count)
            out = np.zeros((count, self.n))
            out[:, 0] = xs
            return out
        if self.kind == "axis-segment":
            lo, hi = self.params
            xs = gen.uniform(lo, hi, size=count)
            out = np.zeros((count, self.n))
            out[:, 0] = xs
            return out
        if self.kind == "circle":
            r = self.params[0]
            th = gen.uniform(0.0, 2 * np.pi, size=count)
            return r * np.stack([np.cos(th), np.sin(th)], axis=1)
        ts = gen.uniform(*(self.params or (0.0, 1.0)), size=count)
        return np.stack([np.asarray(self.curve(t)) for t in ts])

    def normal_projection(self, x: np.ndarray) -> np.ndarray:
        """Projection onto the normal space at an on-manifold point."""
        x = np.asarray(x, dtype=float)
        n = self.n
        if self.kind == "point":
            return np.eye(n)
        if self.kind in ("axis-line", "axis-segment"):
            P = np.eye(n)
            P[0, 0] = 0.0
            return P
        if self.kind == "circle":
            t = np.array([-x[1], x[0]])
            t /= np.linalg.norm(t)
            return np.eye(2) - np.outer(t, t)
        t0, _ = self._project(x)
        h = 1e-6
        tan = (np.asarray(self.curve(t0 + h)) - np.asarray(self.curve(t0 - h)))
        tan /= np.linalg.norm(tan)
        return np.eye(n) - np.outer(tan, tan)

    def smooth_exclusion(self, x: np.ndarray, margin: float) -> bool:
        """True when x is too close to a locus where dist^2 is not C^2."""
        if self.kind == "axis-segment":
            lo, hi = self.params
            return bool(min(abs(x[0] - lo), abs(x[0] - hi)) < margin)
        if self.kind == "circle":
            return bool(np.linalg.norm(x) < margin)
        return False


def dist_sq_hessian_check(M: SubmanifoldSpec, cone: ConeSpec, x0,
                          h: float = 1e-3,
                          tau: float = DEFAULT.membership) -> dict:
    """At an on-manifold point the Hessian of half the squared distance is
    the normal projection; freeness of the tangent space is its membership."""
    x0 = np.asarray(x0, dtype=float)
    H = fd_hessian_callable(M.dist_sq_half, x0, step=h)
    PN = M.normal_projection(x0)
    tol = 100.0 * h * h
    verdict = psplus_membership(PN, cone, tau)
    return {
        "hessian": SymMatrix(H),
        "normal_projection": SymMatrix(PN),
        "matches_PN": bool(np.abs(H - PN).max() <= tol),
        "max_entry_error": float(np.abs(H - PN).max()),
        "free": verdict.interior,
        "certificate": verdict,
    }


def tube_report(M: SubmanifoldSpec, cone: ConeSpec, radius: float, box,
                grid_n: int = 21, psi: Optional[Callable] = None,
                seed: int = 2024, fd_step: float = 1e-3,
                tau: float = DEFAULT.membership) -> dict:
    """Strict plurisubharmonicity of half dist^2 on the tube below the given
    radius, and the admissible bump size for pinning a zero set on M.

    Refused when a sampled manifold point has a non-free tangent space.
    Points near the non-smooth loci of the distance (segment ends, circle
    center) are excluded and counted.
    """
    for x in M.sample_points(16, seed):
        chk = dist_sq_hessian_check(M, cone, x)
        if not chk["free"]:
            raise ConstructionRefused(
                f"manifold point {x.tolist()} is not free", witness=x)

    axes = [np.linspace(l, u, grid_n) for l, u in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    level = 0.5 * radius * radius
    keep, excluded = [], 0
    for x in pts:
        if M.dist_sq_half(x) >= level:
            continue
        if M.smooth_exclusion(x, max(0.15 * radius, 10 * fd_step)):
            excluded += 1
            continue
        keep.append(x)
    if not keep:
        raise InputError("tube contains no grid points")
    keep = np.array(keep)
    H = np.stack([fd_hessian_callable(M.dist_sq_half, x, step=fd_step)
                  for x in keep])
    margins = margin_batch(cone, H)
    tube_margin = float(margins.min())

    if psi is None:
        z0 = M.sample_points(1, seed)[0]
        psi = lambda x: float(((np.asarray(x) - z0) ** 2).sum())
    Hp = np.stack([fd_hessian_callable(psi, x, step=fd_step) for x in keep])
    eps = 1.0
    ok_eps = None
    for _ in range(24):
        if margin_batch(cone, H + eps * Hp).min() > tau:
            ok_eps = eps
            break
        eps *= 0.5
    return {
        "tube_strict": tube_margin > tau,
        "tube_margin": tube_margin,
        "points": int(keep.shape[0]),
        "excluded": excluded,
        "epsilon": ok_eps,
        "zero_set_ok": ok_eps is not None,
    }
