"""Symmetric-matrix algebra on quadratic forms: eigensystems, plane
projections and trace pairings.  Everything downstream consumes these."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .config import DEFAULT


class InputError(ValueError):
    """Raised on malformed numeric input (non-finite, shape mismatch, ...)."""


def _as_square(a, name="matrix"):
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return m


def pack_upper(mat: np.ndarray) -> np.ndarray:
    """Row-major upper triangle, the storage and on-disk order."""
    n = mat.shape[0]
    iu = np.triu_indices(n)
    return mat[iu]


def unpack_upper(entries, n: int) -> np.ndarray:
    tri = np.asarray(entries, dtype=float)
    if tri.size != n * (n + 1) // 2:
        raise InputError(f"expected {n*(n+1)//2} packed entries, got {tri.size}")
    mat = np.zeros((n, n))
    iu = np.triu_indices(n)
    mat[iu] = tri
    mat.T[iu] = tri
    return mat


@dataclass(frozen=True)
class SymMatrix:
    """A real symmetric n x n quadratic form.

    Only the upper triangle is authoritative; construction symmetrizes, so
    the invariant holds for any finite input.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = _as_square(self.mat, "SymMatrix")
        m = 0.5 * (m + m.T)
        m.flags.writeable = False
        object.__setattr__(self, "mat", m)
        if self.n < 1:
            raise InputError("SymMatrix needs n >= 1")

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return pack_upper(self.mat)

    @classmethod
    def from_upper(cls, entries, n: int) -> "SymMatrix":
        return cls(unpack_upper(entries, n))

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls(np.eye(n))

    @classmethod
    def diag(cls, *vals) -> "SymMatrix":
        return cls(np.diag(np.asarray(vals, dtype=float)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def __add__(self, other):
        return SymMatrix(self.mat + as_matrix(other))

    def __sub__(self, other):
        return SymMatrix(self.mat - as_matrix(other))

    def __mul__(self, s):
        return SymMatrix(self.mat * float(s))

    __rmul__ = __mul__

    def __neg__(self):
        return SymMatrix(-self.mat)


def as_matrix(a) -> np.ndarray:
    """Accept SymMatrix or array-like; return the dense symmetric ndarray."""
    if isinstance(a, SymMatrix):
        return a.mat
    return _as_square(a)


@dataclass(frozen=True)
class Plane:
    """An unoriented p-plane through the origin, stored as an orthonormal basis."""

    n: int
    basis: np.ndarray  # (p, n), rows orthonormal

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim == 1:
            b = b[None, :]
        if b.shape[1] != self.n or not (1 <= b.shape[0] <= self.n):
            raise InputError(f"bad plane basis shape {b.shape} for n={self.n}")
        gram = b @ b.T
        if np.abs(gram - np.eye(b.shape[0])).max() > DEFAULT.orthonormal:
            raise InputError("plane basis is not orthonormal to 1e-12")
        b = b.copy()
        b.flags.writeable = False
        object.__setattr__(self, "basis", b)

    @property
    def p(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def span(cls, *vectors) -> "Plane":
        """Orthonormalize the given vectors (must be independent) into a Plane."""
        v = np.array([np.asarray(x, dtype=float) for x in vectors])
        q = _orthonormalize(v)
        return cls(v.shape[1], q)

    @classmethod
    def axis(cls, n: int, *indices) -> "Plane":
        b = np.zeros((len(indices), n))
        for row, i in enumerate(indices):
            b[row, i] = 1.0
        return cls(n, b)


def _orthonormalize(rows: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt; raises if the rows are numerically dependent."""
    q = rows.astype(float).copy()
    for i in range(q.shape[0]):
        for j in range(i):
            q[i] -= (q[i] @ q[j]) * q[j]
        nrm = np.linalg.norm(q[i])
        if nrm < 1e-12:
            raise InputError("vectors are numerically dependent")
        q[i] /= nrm
    return q


@dataclass(frozen=True)
class EigenSystem:
    """Spectral data: eigenvalues ascending, eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def eig_sym(A) -> EigenSystem:
    """Cyclic-Jacobi spectral decomposition; deterministic for identical input."""
    m = as_matrix(A)
    vals, vecs = kernels.eigh(m, tol_rel=DEFAULT.eig_offdiag)
    vals = np.asarray(vals)
    vals.flags.writeable = False
    vecs = np.asarray(vecs)
    vecs.flags.writeable = False
    return EigenSystem(vals, vecs)


def eig_sym_batch(mats: np.ndarray):
    """(B, n, n) -> (values (B, n) ascending, vectors (B, n, n))."""
    return kernels.eigh(np.asarray(mats, dtype=float), tol_rel=DEFAULT.eig_offdiag)


def plane_projection(xi: Plane) -> SymMatrix:
    """Orthogonal projection onto the plane: sum of v v^T over the basis."""
    return SymMatrix(xi.basis.T @ xi.basis)


def frob_inner(A, B) -> float:
    """Trace pairing <A, B> = tr(AB)."""
    a = as_matrix(A)
    b = as_matrix(B)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch {a.shape} vs {b.shape}")
    return float(np.tensordot(a, b))


def trace_on_plane(A, xi: Plane) -> float:
    """Trace of A restricted to the plane: sum of v^T A v over the basis."""
    a = as_matrix(A)
    if a.shape[0] != xi.n:
        raise InputError(f"dimension mismatch {a.shape[0]} vs plane n={xi.n}")
    return float(np.einsum("pi,ij,pj->", xi.basis, a, xi.basis))


def outer(v, w=None) -> SymMatrix:
    """Symmetrized outer product v o w = (v w^T + w v^T)/2."""
    v = np.asarray(v, dtype=float)
    w = v if w is None else np.asarray(w, dtype=float)
    return SymMatrix(0.5 * (np.outer(v, w) + np.outer(w, v)))
