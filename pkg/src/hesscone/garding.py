"""Hyperbolic Monge-Ampere polynomials on symmetric forms.

Evaluation is spectral where the kind allows it; the univariate restriction
p_A(t) = M(tI + A) is recovered by Chebyshev interpolation and its roots by
the companion matrix, which is what drives cone membership for these cones.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .config import DEFAULT, rng
from .cones import BOUNDARY, MembershipVerdict, _classify, complex_structure
from .linalg import InputError, SymMatrix, as_matrix, eig_sym_batch

KINDS = ("det-real", "det-complex", "sigma", "slag-im", "derived", "custom")


class ConditioningError(ArithmeticError):
    """Interpolated restriction has a degenerate leading coefficient."""


class NotHyperbolicError(ValueError):
    """Operation requires a hyperbolic polynomial."""


def _slag_degree(n: int) -> int:
    return n if n % 2 else n - 1


@dataclass(frozen=True)
class MAPolynomial:
    """A polynomial on symmetric n x n forms, hyperbolic in the identity
    direction for the built-in kinds (slag-im per branch, unnormalized)."""

    n: int
    kind: str
    k: int = 0
    base: Optional["MAPolynomial"] = None
    func: Optional[Callable] = None
    custom_degree: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown polynomial kind {self.kind!r}")
        if self.kind == "sigma" and not (1 <= self.k <= self.n):
            raise InputError("sigma needs 1 <= k <= n")
        if self.kind == "det-complex" and self.n % 2:
            raise InputError("complex determinant needs even ambient dimension")
        if self.kind == "derived":
            if self.base is None or not (0 <= self.k <= self.base.degree):
                raise InputError("derived slot count outside [0, m]")
        if self.kind == "custom" and self.func is None:
            raise InputError("custom polynomial needs a callable")

    @property
    def degree(self) -> int:
        if self.kind == "det-real":
            return self.n
        if self.kind == "det-complex":
            return self.n // 2
        if self.kind == "sigma":
            return self.k
        if self.kind == "slag-im":
            return _slag_degree(self.n)
        if self.kind == "derived":
            return self.k
        return self.custom_degree

    @property
    def identity_value(self) -> float:
        """Raw value at the identity; dividing by it gives the M(I) = 1 scaling."""
        return eval_ma(self, np.eye(self.n))

    @property
    def normalized(self) -> bool:
        """Whether the raw evaluation already has M(I) = 1.  Sigma and the
        special-Lagrangian imaginary part evaluate raw and are flagged; every
        conclusion drawn here (roots, memberships, ellipticity) is invariant
        under the scaling."""
        return abs(self.identity_value - 1.0) < 1e-12

    def to_json(self) -> dict:
        doc = {"kind": self.kind, "m": self.degree}
        if self.kind in ("sigma", "derived"):
            doc["k"] = self.k
        if self.kind == "derived":
            doc["base"] = self.base.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict, n: int) -> "MAPolynomial":
        kind = doc["kind"]
        if kind == "derived":
            return cls(n=n, kind=kind, k=int(doc["k"]),
                       base=cls.from_json(doc["base"], n))
        return cls(n=n, kind=kind, k=int(doc.get("k", 0)))


def det_real(n):
    return MAPolynomial(n=n, kind="det-real")


def sigma(n, k):
    return MAPolynomial(n=n, kind="sigma", k=k)


def slag_im(n):
    return MAPolynomial(n=n, kind="slag-im")


def sigma_cone(n, k, seed=2024):
    from .cones import ConeSpec
    return ConeSpec(n=n, kind="garding", family=None, polynomial=sigma(n, k), seed=seed)


def _esym(lams: np.ndarray, k: int) -> np.ndarray:
    """k-th elementary symmetric function of each row of lams."""
    B, n = lams.shape
    c = np.zeros((B, n + 1))
    c[:, 0] = 1.0
    for j in range(n):
        c[:, 1:j + 2] = c[:, 1:j + 2] + lams[:, j, None] * c[:, 0:j + 1]
    return c[:, k]


def eval_ma_batch(M: MAPolynomial, mats: np.ndarray) -> np.ndarray:
    """Evaluate M on a (B, n, n) stack."""
    mats = np.asarray(mats, dtype=float)
    if mats.ndim == 2:
        mats = mats[None]
    if mats.shape[1] != M.n:
        raise InputError("dimension mismatch")
    if M.kind == "custom":
        return np.array([float(M.func(m)) for m in mats])
    if M.kind == "derived":
        return _derived_values(M.base, mats, M.k)
    if M.kind == "det-complex":
        J = complex_structure(M.n)
        herm = 0.5 * (mats + np.einsum("ji,bjk,kl->bil", J, mats, J))
        vals, _ = eig_sym_batch(herm)
        return np.prod(vals[:, ::2], axis=1)
    vals, _ = eig_sym_batch(mats)
    if M.kind == "det-real":
        return np.prod(vals, axis=1)
    if M.kind == "sigma":
        return _esym(vals, M.k)
    # slag-im
    return np.prod(1.0 + 1j * vals, axis=1).imag


def eval_ma(M: MAPolynomial, A) -> float:
    return float(eval_ma_batch(M, as_matrix(A)[None])[0])


def _derived_values(base: MAPolynomial, mats: np.ndarray, k: int) -> np.ndarray:
    """k-th Taylor coefficient of t -> base(I + tA), over binomial(m, k)."""
    m = base.degree
    coeffs = _restriction_coeffs(base, np.eye(base.n)[None].repeat(mats.shape[0], axis=0),
                                 direction=mats, radius=1.0)
    return coeffs[:, k] / comb(m, k)


def _restriction_coeffs(M: MAPolynomial, anchors: np.ndarray,
                        direction: np.ndarray, radius: float) -> np.ndarray:
    """Monomial coefficients of t -> M(anchor + t * direction), per batch row.

    Sampled at m+1 Chebyshev extrema of [-radius, radius]; returns (B, m+1)
    with entry k the coefficient of t^k.
    """
    m = M.degree
    if m == 0:
        return eval_ma_batch(M, anchors)[:, None]
    nodes = np.cos(np.pi * np.arange(m + 1) / m)
    samples = np.empty((m + 1, anchors.shape[0]))
    for j, x in enumerate(nodes):
        samples[j] = eval_ma_batch(M, anchors + (radius * x) * direction)
    cfit = cheb.chebfit(nodes, samples, m)
    poly = np.apply_along_axis(cheb.cheb2poly, 0, cfit)
    scale = radius ** np.arange(m + 1)
    return (poly / scale[:, None]).T


def roots_of_pA(M: MAPolynomial, A) -> np.ndarray:
    """Roots of t -> M(tI + A) via interpolated coefficients + companion matrix."""
    mat = as_matrix(A)
    vals, _ = eig_sym_batch(mat[None])
    radius = 1.0 + float(np.abs(vals).max())
    coeffs = _restriction_coeffs(M, mat[None], np.eye(M.n)[None], radius)[0]
    lead = coeffs[-1]
    if abs(lead) < 1e-10 * max(1.0, np.abs(coeffs).max()):
        raise ConditioningError("degenerate leading coefficient in p_A")
    r = np.roots(coeffs[::-1])
    return np.sort_complex(r)


def _max_real_roots_from_coeffs(coeffs: np.ndarray) -> float:
    lead = coeffs[-1]
    if abs(lead) < 1e-10 * max(1.0, np.abs(coeffs).max()):
        raise ConditioningError("degenerate leading coefficient in p_A")
    r = np.roots(coeffs[::-1])
    real = r[np.abs(r.imag) <= 1e-8 * (1.0 + np.abs(r))]
    if real.size == 0:
        raise NotHyperbolicError("restriction has no real roots")
    return float(real.real.max())


def max_real_root(M: MAPolynomial, A) -> float:
    mat = as_matrix(A)
    if M.kind == "det-real":
        vals, _ = eig_sym_batch(mat[None])
        return float(-vals[0, 0])
    vals, _ = eig_sym_batch(mat[None])
    radius = 1.0 + float(np.abs(vals).max())
    coeffs = _restriction_coeffs(M, mat[None], np.eye(M.n)[None], radius)[0]
    return _max_real_roots_from_coeffs(coeffs)


def max_real_root_batch(M: MAPolynomial, mats: np.ndarray) -> np.ndarray:
    """Max real root of p_A for each A in the stack (membership margins)."""
    mats = np.asarray(mats, dtype=float)
    if M.kind == "det-real":
        vals, _ = eig_sym_batch(mats)
        return -vals[:, 0]
    B = mats.shape[0]
    vals, _ = eig_sym_batch(mats)
    radius = 1.0 + float(np.abs(vals).max()) if B else 1.0
    eye = np.broadcast_to(np.eye(M.n), mats.shape)
    coeffs = _restriction_coeffs(M, mats, eye, radius)
    out = np.empty(B)
    for i in range(B):
        out[i] = _max_real_roots_from_coeffs(coeffs[i])
    return out


def hyperbolicity_test(M: MAPolynomial, trials: int = 32,
                       tau: float = 1e-7, seed: int = 5) -> dict:
    """Sample random forms and check that every root of p_A is (nearly) real."""
    gen = rng(seed)
    worst = 0.0
    hyperbolic = True
    for _ in range(max(1, trials)):
        g = gen.normal(size=(M.n, M.n))
        A = 0.5 * (g + g.T)
        try:
            r = roots_of_pA(M, A)
        except ConditioningError:
            hyperbolic = False
            worst = np.inf
            break
        rel = float(np.max(np.abs(r.imag) / (1.0 + np.abs(r)))) if r.size else 0.0
        worst = max(worst, rel)
        if rel > tau:
            hyperbolic = False
    return {"hyperbolic": hyperbolic, "worst_imag": worst, "trials": trials}


def garding_membership(A, M: MAPolynomial,
                       tau: float = DEFAULT.membership) -> MembershipVerdict:
    """Classify A against the polynomial's positivity cone from the maximal
    real root of p_A; the margin is the negated root of the normalized form."""
    mat = as_matrix(A)
    nrm = float(np.linalg.norm(mat))
    if nrm < 1e-14:
        return MembershipVerdict(BOUNDARY, 0.0, None)
    root = max_real_root(M, mat / nrm)
    return MembershipVerdict(_classify(-root, tau), -root, None)


def linearization(M: MAPolynomial, A) -> SymMatrix:
    """The form representing the derivative of M at A against the trace pairing."""
    mat = as_matrix(A)
    n = M.n
    h = DEFAULT.fd_step * (1.0 + float(np.linalg.norm(mat)))
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = 1.0
            E[j, i] = 1.0
            d = (eval_ma(M, mat + h * E) - eval_ma(M, mat - h * E)) / (2.0 * h)
            out[i, j] = out[j, i] = d if i == j else 0.5 * d
    return SymMatrix(out)


def cone_ellipticity_E2(M: MAPolynomial, directions: int = 48, s_max: float = 8.0,
                        s_steps: int = 48, seed: int = 6,
                        tau: float = 1e-8) -> dict:
    """Two-part ellipticity test on unit directions e: the restriction
    s -> M(I + s P_e) must be non-constant and positive for s > 0."""
    gen = rng(seed)
    n = M.n
    dirs = [np.eye(n)[i] for i in range(n)]
    while len(dirs) < max(directions, n):
        v = gen.normal(size=n)
        dirs.append(v / np.linalg.norm(v))
    svals = np.linspace(0.0, s_max, s_steps + 1)
    eye = np.eye(n)
    for e in dirs:
        Pe = np.outer(e, e)
        stack = eye[None] + svals[:, None, None] * Pe[None]
        vals = eval_ma_batch(M, stack)
        if np.max(np.abs(vals - vals[0])) <= tau * max(1.0, abs(vals[0])):
            return {"elliptic": False, "failing_direction": e.tolist(),
                    "failed": "non-constancy"}
        if np.any(vals[1:] <= 0.0):
            return {"elliptic": False, "failing_direction": e.tolist(),
                    "failed": "positivity"}
    return {"elliptic": True, "failing_direction": None, "failed": None}


def random_interior(M: MAPolynomial, gen: np.random.Generator,
                    margin: float = 0.1) -> np.ndarray:
    """A random form strictly inside the polynomial's cone (root-shifted)."""
    g = gen.normal(size=(M.n, M.n))
    A = 0.5 * (g + g.T)
    r = max_real_root(M, A)
    return A + (r + margin * (1.0 + abs(r))) * np.eye(M.n)


def theorem_E3_check(M: MAPolynomial, trials: int = 64, seed: int = 9) -> dict:
    """At interior points the linearization must be positive definite."""
    gen = rng(seed)
    worst = np.inf
    for _ in range(trials):
        A = random_interior(M, gen)
        tilde = linearization(M, A)
        vals, _ = eig_sym_batch(tilde.mat[None])
        worst = min(worst, float(vals[0, 0]))
    return {"elliptic_at_interior": worst > 0.0, "min_eigenvalue": worst,
            "trials": trials}


def derived_poly(M: MAPolynomial, k: int) -> MAPolynomial:
    """Polarized form with the argument in k slots and the identity elsewhere."""
    if not (0 <= k <= M.degree):
        raise InputError(f"slot count {k} outside [0, {M.degree}]")
    return MAPolynomial(n=M.n, kind="derived", k=k, base=M)
