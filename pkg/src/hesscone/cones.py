"""Convex cones of quadratic forms and their polars.

A cone is described through a finite generating/sample list of its polar;
membership verdicts are minima of normalized dual pairings.  For the named
Grassmannian families the infimum over the whole family has a closed form
(via eigenvalues), which is appended to the sample sweep so Boundary and
Outside verdicts do not depend on a lucky sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT, rng
from .linalg import InputError, Plane, SymMatrix, as_matrix, eig_sym_batch, \
    pack_upper, plane_projection, unpack_upper

GENERATED = "generated"
GRASSMANN = "grassmann"
GARDING = "garding"

FAMILIES = (
    "real-lines",        # G(1, R^n)
    "real-planes",       # G(p, R^n), needs p
    "full-trace",        # {I}: the single n-plane
    "complex-lines",     # complex lines in C^m, n = 2m
    "lagrangian-planes", # Lagrangian m-planes in C^m, n = 2m
    "fixed-axis",        # the x1-axis only
)

INTERIOR = "Interior"
BOUNDARY = "Boundary"
OUTSIDE = "Outside"


class ConfigurationError(ValueError):
    """Cone description cannot be used (empty generators, bad family...)."""


def complex_structure(n: int) -> np.ndarray:
    """Block rotation J on R^n = R^{2m}: J e_{2i} = e_{2i+1}, J e_{2i+1} = -e_{2i}."""
    if n % 2:
        raise ConfigurationError(f"complex structure needs even dimension, got {n}")
    J = np.zeros((n, n))
    for i in range(0, n, 2):
        J[i + 1, i] = 1.0
        J[i, i + 1] = -1.0
    return J


def random_frame(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    """(d, n) orthonormal rows, deterministic given the generator state."""
    m = gen.normal(size=(n, d))
    q, r = np.linalg.qr(m)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return q.T.copy()


@dataclass(frozen=True)
class MembershipVerdict:
    klass: str
    margin: float
    witness: Optional[SymMatrix] = None

    @property
    def interior(self) -> bool:
        return self.klass == INTERIOR

    @property
    def inside(self) -> bool:
        return self.klass in (INTERIOR, BOUNDARY)


def _classify(margin: float, tau: float) -> str:
    if margin > tau:
        return INTERIOR
    if margin < -tau:
        return OUTSIDE
    return BOUNDARY


@dataclass(frozen=True)
class ConeSpec:
    """A closed convex cone described through its polar.

    kind "generated": `generators` span the directions of the polar.
    kind "grassmann": the polar is generated by projections onto planes of
    the named family, sampled at the given density.
    kind "garding": the cone attached to a hyperbolic polynomial; membership
    delegates to the polynomial's root test.
    """

    n: int
    kind: str = GRASSMANN
    family: Optional[str] = "real-lines"
    p: Optional[int] = None
    density: int = 64
    seed: int = 2024
    generators: tuple = ()
    polynomial: object = None

    def __post_init__(self):
        if self.kind == GENERATED:
            if not self.generators:
                raise ConfigurationError("generated cone needs at least one generator")
            gens = tuple(SymMatrix(as_matrix(g)) for g in self.generators)
            for g in gens:
                if g.n != self.n:
                    raise ConfigurationError("generator dimension mismatch")
                if g.norm() == 0.0:
                    raise ConfigurationError("zero generator")
            object.__setattr__(self, "generators", gens)
        elif self.kind == GRASSMANN:
            if self.family not in FAMILIES:
                raise ConfigurationError(f"unknown family {self.family!r}")
            if self.family == "real-planes":
                if not self.p or not (1 <= self.p <= self.n):
                    raise ConfigurationError("real-planes needs 1 <= p <= n")
            if self.family in ("complex-lines", "lagrangian-planes") and self.n % 2:
                raise ConfigurationError("complex families need even ambient dimension")
        elif self.kind == GARDING:
            if self.polynomial is None:
                raise ConfigurationError("garding cone needs a polynomial")
        else:
            raise ConfigurationError(f"unknown cone kind {self.kind!r}")

    # -- polar samples -------------------------------------------------

    def sample_planes(self) -> list:
        """Planes generating the sampled polar (grassmann kind only)."""
        if self.kind != GRASSMANN:
            raise ConfigurationError("sample_planes is for grassmann cones")
        gen = rng(self.seed)
        n, fam = self.n, self.family
        planes = []
        if fam == "real-lines":
            planes = [Plane.axis(n, i) for i in range(n)]
            while len(planes) < max(self.density, n):
                planes.append(Plane.span(gen.normal(size=n)))
        elif fam == "real-planes":
            from itertools import combinations
            for combo in combinations(range(n), self.p):
                planes.append(Plane.axis(n, *combo))
            while len(planes) < max(self.density, len(planes)):
                planes.append(Plane(n, random_frame(gen, n, self.p)))
        elif fam == "full-trace":
            planes = [Plane.axis(n, *range(n))]
        elif fam == "fixed-axis":
            planes = [Plane.axis(n, 0)]
        elif fam == "complex-lines":
            J = complex_structure(n)
            for i in range(0, n, 2):
                planes.append(Plane.axis(n, i, i + 1))
            while len(planes) < max(self.density, n // 2):
                v = gen.normal(size=n)
                v /= np.linalg.norm(v)
                planes.append(Plane(n, np.vstack([v, J @ v])))
        elif fam == "lagrangian-planes":
            m = n // 2
            planes = [Plane.axis(n, *range(0, n, 2))]
            while len(planes) < max(self.density, 1):
                z = gen.normal(size=(m, m)) + 1j * gen.normal(size=(m, m))
                q, r = np.linalg.qr(z)
                q = q * np.where(np.diag(r).real < 0, -1.0, 1.0)
                basis = np.zeros((m, n))
                basis[:, 0::2] = q.real.T
                basis[:, 1::2] = q.imag.T
                planes.append(Plane(n, basis))
        return planes

    def polar_samples(self) -> np.ndarray:
        """(B, n, n) stack spanning directions of the polar (unnormalized)."""
        if self.kind == GENERATED:
            return np.stack([g.mat for g in self.generators])
        if self.kind == GRASSMANN:
            return np.stack([plane_projection(pl).mat for pl in self.sample_planes()])
        raise ConfigurationError("garding cones have no explicit polar sample")

    def to_json(self) -> dict:
        doc = {"n": self.n, "kind": self.kind, "seed": self.seed}
        if self.kind == GRASSMANN:
            doc["family"] = self.family
            doc["density"] = self.density
            if self.family == "real-planes":
                doc["p"] = self.p
        elif self.kind == GENERATED:
            doc["generators"] = [list(g.entries) for g in self.generators]
        else:
            doc["polynomial"] = self.polynomial.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "ConeSpec":
        kind = doc.get("kind", GRASSMANN)
        n = int(doc["n"])
        if kind == GENERATED:
            gens = tuple(SymMatrix(unpack_upper(e, n)) for e in doc["generators"])
            return cls(n=n, kind=kind, generators=gens, seed=int(doc.get("seed", 2024)))
        if kind == GARDING:
            from .garding import MAPolynomial
            return cls(n=n, kind=kind,
                       polynomial=MAPolynomial.from_json(doc["polynomial"], n),
                       seed=int(doc.get("seed", 2024)))
        return cls(n=n, kind=kind, family=doc.get("family", "real-lines"),
                   p=doc.get("p"), density=int(doc.get("density", 64)),
                   seed=int(doc.get("seed", 2024)))


# canonical cones used throughout the tests and the CLI fixtures
def lines_cone(n, density=64, seed=2024):
    return ConeSpec(n=n, family="real-lines", density=density, seed=seed)


def planes_cone(n, p, density=64, seed=2024):
    if p == 1:
        return lines_cone(n, density, seed)
    if p == n:
        return trace_cone(n)
    return ConeSpec(n=n, family="real-planes", p=p, density=density, seed=seed)


def trace_cone(n):
    return ConeSpec(n=n, family="full-trace")


def complex_lines_cone(n, density=64, seed=2024):
    return ConeSpec(n=n, family="complex-lines", density=density, seed=seed)


# -- membership ------------------------------------------------------


def _exact_family_margin(cone: ConeSpec, hats: np.ndarray):
    """Closed-form infimum of the normalized pairing over the whole family.

    hats: (B, n, n) Frobenius-normalized forms.  Returns (margins, minimizer
    builder) or None when the family has no closed form (lagrangian).
    """
    fam = cone.family
    if fam == "real-lines":
        vals, vecs = eig_sym_batch(hats)
        return vals[:, 0], lambda i: Plane.span(vecs[i][:, 0])
    if fam == "real-planes":
        p = cone.p
        vals, vecs = eig_sym_batch(hats)
        margins = vals[:, :p].sum(axis=1) / np.sqrt(p)
        return margins, lambda i: Plane(cone.n, vecs[i][:, :p].T.copy())
    if fam == "full-trace":
        tr = np.trace(hats, axis1=1, axis2=2)
        return tr / np.sqrt(cone.n), lambda i: Plane.axis(cone.n, *range(cone.n))
    if fam == "fixed-axis":
        return hats[:, 0, 0], lambda i: Plane.axis(cone.n, 0)
    if fam == "complex-lines":
        J = complex_structure(cone.n)
        herm = hats + np.einsum("ji,bjk,kl->bil", J, hats, J)
        vals, vecs = eig_sym_batch(herm)
        def build(i):
            v = vecs[i][:, 0]
            return Plane(cone.n, np.vstack([v, J @ v]))
        return vals[:, 0] / np.sqrt(2.0), build
    return None


def margin_batch(cone: ConeSpec, mats: np.ndarray, floor: float = 1e-14) -> np.ndarray:
    """Normalized membership margins for a (B, n, n) stack of forms.

    `floor` is the norm below which a form counts as zero-curvature: margins
    then shrink towards 0 (Boundary) instead of amplifying roundoff noise.
    """
    mats = np.asarray(mats, dtype=float)
    norms = np.sqrt((mats * mats).sum(axis=(1, 2)))
    safe = np.maximum(norms, max(floor, 1e-300))
    hats = mats / safe[:, None, None]

    if cone.kind == GARDING:
        from .garding import max_real_root_batch
        margins = -max_real_root_batch(cone.polynomial, hats)
    else:
        exact = _exact_family_margin(cone, hats) if cone.kind == GRASSMANN else None
        if exact is not None:
            margins = exact[0]
        else:
            base = cone.polar_samples()
            bnorm = np.sqrt((base * base).sum(axis=(1, 2)))
            bhat = base / np.maximum(bnorm, 1e-300)[:, None, None]
            margins = np.tensordot(hats, bhat, axes=([1, 2], [1, 2])).min(axis=1)
    return margins


def psplus_membership(A, cone: ConeSpec, tau: float = DEFAULT.membership) -> MembershipVerdict:
    """Classify A against the cone: normalized dual-pairing margin with witness."""
    mat = as_matrix(A)
    if mat.shape[0] != cone.n:
        raise InputError(f"dimension mismatch: {mat.shape[0]} vs cone n={cone.n}")
    nrm = float(np.linalg.norm(mat))
    if nrm < 1e-14:
        return MembershipVerdict(BOUNDARY, 0.0, None)
    hat = mat / nrm

    if cone.kind == GARDING:
        from .garding import max_real_root
        root = max_real_root(cone.polynomial, hat)
        return MembershipVerdict(_classify(-root, tau), -root, None)

    witness = None
    margin = np.inf
    if cone.kind == GRASSMANN:
        exact = _exact_family_margin(cone, hat[None])
        if exact is not None:
            margins, build = exact
            margin = float(margins[0])
            witness = plane_projection(build(0))
    if witness is None:
        base = cone.polar_samples()
        bnorm = np.sqrt((base * base).sum(axis=(1, 2)))
        bhat = base / np.maximum(bnorm, 1e-300)[:, None, None]
        pair = np.tensordot(bhat, hat, axes=([1, 2], [0, 1]))
        k = int(np.argmin(pair))
        margin = float(pair[k])
        witness = SymMatrix(base[k])
    return MembershipVerdict(_classify(margin, tau), margin, witness)


def dual_membership(B, cone: ConeSpec, tau: float = DEFAULT.membership) -> MembershipVerdict:
    """Classify B against the Dirichlet dual: B is dual-inside iff -B is not
    interior to the cone; margins flip sign accordingly."""
    v = psplus_membership(-as_matrix(B), cone, tau)
    flipped = {INTERIOR: OUTSIDE, BOUNDARY: BOUNDARY, OUTSIDE: INTERIOR}[v.klass]
    return MembershipVerdict(flipped, -v.margin, v.witness)


# -- structure reports -----------------------------------------------


def ellipticity_check(cone: ConeSpec, tau: float = DEFAULT.membership) -> dict:
    """Positivity (all polar samples PSD) + completeness (their trace-normalized
    sum is positive definite) + the dimension they span."""
    if cone.kind == GARDING:
        raise ConfigurationError("use the polynomial ellipticity test for garding cones")
    base = cone.polar_samples()
    vals, _ = eig_sym_batch(base)
    scale = np.sqrt((base * base).sum(axis=(1, 2)))
    positivity = bool(np.all(vals[:, 0] >= -tau * np.maximum(scale, 1.0)))

    traces = np.trace(base, axis1=1, axis2=2)
    denom = np.where(np.abs(traces) > 1e-12 * np.maximum(scale, 1.0), traces, scale)
    total = (base / denom[:, None, None]).sum(axis=0)
    tvals, _ = eig_sym_batch(total[None])
    completeness = bool(tvals[0, 0] > tau * max(float(np.linalg.norm(total)), 1.0))

    packed = np.stack([pack_upper(b) for b in base])
    # off-diagonal entries count twice in the Frobenius pairing
    w = [1.0 if i == j else np.sqrt(2.0)
         for i in range(cone.n) for j in range(i, cone.n)]
    packed = packed * np.asarray(w)
    span_dim = int(np.linalg.matrix_rank(packed, tol=1e-9 * max(1.0, float(scale.max()))))
    return {
        "positivity": positivity,
        "completeness": completeness,
        "span_dim": span_dim,
        "elliptic": positivity and completeness,
        "min_generator_eigenvalue": float(vals[:, 0].min()),
        "sum_min_eigenvalue": float(tvals[0, 0]),
        "samples": int(base.shape[0]),
    }


def polar_check(cone: ConeSpec, trials: int = 50, seed: int = 7,
                tau: float = DEFAULT.membership) -> dict:
    """Bipolar sanity sweep: generators pair nonnegatively with interior
    points, and each generator is supported by some interior certificate."""
    base = cone.polar_samples()
    gen = rng(seed)
    n = cone.n
    interior = []
    attempts = 0
    while len(interior) < trials and attempts < trials * 40:
        attempts += 1
        g = gen.normal(size=(n, n))
        g = 0.5 * (g + g.T)
        shift = 0.0
        for _ in range(60):
            cand = g + shift * np.eye(n)
            if psplus_membership(cand, cone, tau).interior:
                interior.append(cand)
                break
            shift = 1.0 if shift == 0.0 else shift * 2.0
    interior = np.stack(interior) if interior else np.zeros((0, n, n))
    pair = np.tensordot(interior, base, axes=([1, 2], [1, 2]))
    scale = np.sqrt((interior * interior).sum(axis=(1, 2)))[:, None] * \
        np.sqrt((base * base).sum(axis=(1, 2)))[None, :]
    normalized = pair / np.maximum(scale, 1e-300)
    min_pairing = float(normalized.min()) if pair.size else 0.0
    supported = bool(np.all((normalized > tau).any(axis=0))) if pair.size else False
    return {
        "interior_samples": int(interior.shape[0]),
        "min_pairing": min_pairing,
        "bipolar_ok": min_pairing >= -tau,
        "all_generators_supported": supported,
    }


# -- freeness --------------------------------------------------------


def normal_projection(W: Plane) -> SymMatrix:
    """Projection onto the orthogonal complement of W."""
    return SymMatrix(np.eye(W.n) - W.basis.T @ W.basis)


def free_subspace_check(W: Plane, cone: ConeSpec,
                        tau: float = DEFAULT.membership) -> dict:
    """W is free iff the projection onto its complement is interior to the cone."""
    PN = normal_projection(W)
    degenerate = W.p == W.n
    verdict = psplus_membership(PN, cone, tau) if not degenerate else \
        MembershipVerdict(BOUNDARY, 0.0, None)
    return {
        "free": (not degenerate) and verdict.interior,
        "certificate": verdict,
        "degenerate": degenerate,
    }


def _axis_subspaces(n, d, cap=200):
    from itertools import combinations
    out = []
    for combo in combinations(range(n), d):
        out.append(Plane.axis(n, *combo))
        if len(out) >= cap:
            break
    return out


def free_dim_verify(cone: ConeSpec, claimed_D: int, trials: int = 200,
                    seed: int = 11, tau: float = DEFAULT.membership) -> dict:
    """Probabilistic certificate that the free dimension equals claimed_D.

    lower_ok: some claimed_D-dimensional subspace is free (axis-aligned
    candidates first, then random rotations).  upper_ok: `trials` random
    (claimed_D+1)-dimensional subspaces all fail.
    """
    n = cone.n
    if not (0 <= claimed_D <= n - 1):
        raise InputError(f"claimed dimension {claimed_D} outside [0, {n-1}]")
    gen = rng(seed)

    lower_ok = False
    witness = None
    if claimed_D == 0:
        lower_ok = psplus_membership(np.eye(n), cone, tau).interior
        witness = "trivial-subspace"
    else:
        candidates = _axis_subspaces(n, claimed_D)
        for _ in range(trials):
            candidates.append(Plane(n, random_frame(gen, n, claimed_D)))
        for W in candidates:
            if free_subspace_check(W, cone, tau)["free"]:
                lower_ok = True
                witness = W.basis.tolist()
                break

    refuted = 0
    upper_ok = True
    for _ in range(trials):
        W = Plane(n, random_frame(gen, n, claimed_D + 1)) if claimed_D + 1 < n \
            else Plane.axis(n, *range(n))
        if free_subspace_check(W, cone, tau)["free"]:
            upper_ok = False
            break
        refuted += 1
    return {
        "claimed": claimed_D,
        "lower_ok": lower_ok,
        "upper_ok": upper_ok,
        "witness_basis": witness,
        "refutations": refuted,
        "trials": trials,
        "certificate": "probabilistic",
    }


# -- convex elliptic sets ---------------------------------------------


@dataclass(frozen=True)
class ConvexEllipticSet:
    """Unbounded convex set of forms closed under adding PSD directions.

    det-floor(c): PSD forms with det >= c.  slag-branch(k): PSD forms whose
    arctan-eigenvalue sum reaches k*pi (ambient n = 2k+1 or 2k+2).
    """

    n: int
    kind: str  # "det-floor" | "slag-branch"
    level: float = 0.0  # c for det-floor, k for slag-branch
    basepoint: Optional[SymMatrix] = None

    def __post_init__(self):
        if self.kind == "det-floor":
            if self.level < 0:
                raise ConfigurationError("det floor needs c >= 0")
        elif self.kind == "slag-branch":
            k = int(self.level)
            if self.n not in (2 * k + 1, 2 * k + 2):
                raise ConfigurationError("slag branch needs n = 2k+1 or 2k+2")
        else:
            raise ConfigurationError(f"unknown convex elliptic set kind {self.kind!r}")
        if self.basepoint is None:
            object.__setattr__(self, "basepoint", self._default_basepoint())
        v = convex_elliptic_membership(self.basepoint, self, DEFAULT.membership)
        if v.klass == OUTSIDE:
            raise ConfigurationError("basepoint fails its own membership test")

    def _default_basepoint(self) -> SymMatrix:
        if self.kind == "det-floor":
            a = max(self.level, 1.0) ** (1.0 / self.n)
            return SymMatrix(a * np.eye(self.n))
        k = int(self.level)
        theta = 0.5 * (k * np.pi / self.n + 0.5 * np.pi)
        return SymMatrix(np.tan(theta) * np.eye(self.n))


def convex_elliptic_membership(A, F: ConvexEllipticSet,
                               tau: float = DEFAULT.membership) -> MembershipVerdict:
    """Classify a form against the set with a Boundary band of width tau."""
    mat = as_matrix(A)
    if mat.shape[0] != F.n:
        raise InputError("dimension mismatch")
    vals, _ = eig_sym_batch(mat[None])
    lam = vals[0]
    scale = max(1.0, float(np.abs(lam).max()))
    psd_margin = float(lam[0]) / scale

    if F.kind == "det-floor":
        level_margin = float(np.prod(lam) - F.level) / max(1.0, abs(F.level))
    else:
        level_margin = float(np.arctan(lam).sum() - int(F.level) * np.pi)

    klasses = [_classify(psd_margin, tau), _classify(level_margin, tau)]
    margin = min(psd_margin, level_margin)
    if OUTSIDE in klasses:
        return MembershipVerdict(OUTSIDE, margin, None)
    if BOUNDARY in klasses:
        return MembershipVerdict(BOUNDARY, margin, None)
    return MembershipVerdict(INTERIOR, margin, None)


def ray_cone_membership(v, F: ConvexEllipticSet, T: float = 16.0,
                        steps: int = 64, tau: float = DEFAULT.membership) -> bool:
    """Finite-ray approximation: does basepoint + t*v stay in F up to t = T?"""
    vm = as_matrix(v)
    if float(np.linalg.norm(vm)) == 0.0:
        return True
    base = F.basepoint.mat
    for t in np.linspace(0.0, T, steps + 1):
        if convex_elliptic_membership(base + t * vm, F, tau).klass == OUTSIDE:
            return False
    return True
