"""Seeded random matrices for property checks."""

from __future__ import annotations

import numpy as np

from .matfun import DensityMatrix


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + a.conj().T)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    # QR of a Ginibre matrix with the diagonal phases of R absorbed (Haar).
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(rng: np.random.Generator, d: int, min_weight: float = 1e-3) -> DensityMatrix:
    """Full-rank state with a random eigenbasis; every weight is at least ``min_weight``."""
    w = rng.dirichlet(np.ones(d))
    w = (1.0 - d * min_weight) * w + min_weight
    w /= w.sum()
    return DensityMatrix.from_spectrum(w, random_unitary(rng, d))
