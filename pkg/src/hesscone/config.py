"""Shared numeric configuration: tolerance defaults and seeded random generators."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Central record of every default tolerance used for zero-comparisons."""

    membership: float = 1e-9      # relative margin band for cone classification
    eig_offdiag: float = 1e-13    # Jacobi stop: off-diagonal norm relative to ||A||
    eig_residual: float = 1e-10   # ||A v - lam v|| <= this * (1 + ||A||)
    orthonormal: float = 1e-12    # plane basis orthonormality
    idempotent: float = 1e-12     # P^2 = P check for projections
    boundary_rho: float = 1e-9    # |rho| at sampled boundary points
    grad_floor: float = 1e-8      # minimal |grad rho| on the boundary
    fd_step: float = 1e-5         # finite-difference step scale for linearizations
    spectral: float = 1e-10       # homogeneity / conjugation-invariance checks


DEFAULT = Tolerances()


def rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox keyed by one 64-bit seed).

    Every random draw in the package flows through here so certificates and
    reports replay bit-identically across platforms.
    """
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def thread_cap() -> int:
    """Parallelism cap from HCL_THREADS; kernels run single-threaded at 1."""
    raw = os.environ.get("HCL_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
