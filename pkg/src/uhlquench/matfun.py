"""Dense Hermitian linear algebra: spectra, square roots, propagators, Gibbs states.

Every matrix function here goes through an eigendecomposition rather than a
series, so results are exact up to the accuracy of ``numpy.linalg.eigh``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import NonHermitianError, RankDeficientError

HERMITIAN_TOL = 1e-12
RANK_TOL = 1e-12


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(a + a^dagger)/2`` as a complex array.

    Raises NonHermitianError when ``||a - a^dagger||_F / ||a||_F`` exceeds ``tol``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = frob(a)
    asym = frob(a - dagger(a))
    if scale > 0.0 and asym > tol * scale:
        raise NonHermitianError(asym / scale, tol)
    return 0.5 * (a + dagger(a))


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)

    def apply(self, fn) -> np.ndarray:
        """Matrix function ``V fn(Lambda) V^dagger``."""
        v = self.eigenvectors
        return (v * fn(self.eigenvalues)) @ dagger(v)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # first component with non-negligible modulus made real positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-10))
        c = col[idx]
        if abs(c) > 0:
            out[:, k] = col * (abs(c) / c)
    return out


def hermitian_eig(a) -> SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors with a fixed phase gauge."""
    h = as_hermitian(a)
    w, v = np.linalg.eigh(h)
    return SpectralDecomposition(w, _fix_phases(v))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Full-rank, unit-trace, positive-definite state with its spectrum attached.

    Build one from a matrix (``DensityMatrix.from_matrix``), where eigenvalues
    below ``RANK_TOL`` times the largest are rejected because ``eigh`` cannot
    resolve them, or from a known spectrum (``from_spectrum``), where any
    strictly positive normal float is accepted.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        vec = np.asarray(self.eigenvectors, dtype=complex)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", vec)
        m = (vec * lam) @ dagger(vec)
        object.__setattr__(self, "matrix", 0.5 * (m + dagger(m)))

    @classmethod
    def from_spectrum(cls, eigenvalues, eigenvectors) -> "DensityMatrix":
        lam = np.asarray(eigenvalues, dtype=float)
        vec = np.asarray(eigenvectors, dtype=complex)
        if vec.shape != (lam.size, lam.size):
            raise ValueError("eigenvector matrix does not match eigenvalue count")
        if not np.all(np.isfinite(lam)) or np.any(lam < np.finfo(float).tiny):
            raise RankDeficientError(
                f"spectrum not strictly positive: min eigenvalue {lam.min():.3e}"
            )
        if abs(lam.sum() - 1.0) > 1e-12:
            raise ValueError(f"trace {lam.sum():.15f} differs from 1")
        if frob(dagger(vec) @ vec - np.eye(lam.size)) > 1e-10:
            raise ValueError("eigenvectors are not orthonormal")
        order = np.argsort(lam, kind="stable")
        return cls(lam[order], vec[:, order])

    @classmethod
    def from_matrix(cls, rho, rank_tol: float = RANK_TOL) -> "DensityMatrix":
        spec = hermitian_eig(rho)
        lam = spec.eigenvalues
        if abs(lam.sum() - 1.0) > 1e-12:
            raise ValueError(f"trace {lam.sum():.15f} differs from 1")
        if lam[0] <= rank_tol * lam[-1]:
            raise RankDeficientError(
                f"eigenvalue {lam[0]:.3e} below rank floor {rank_tol:.0e} x {lam[-1]:.3e}"
            )
        return cls(lam, spec.eigenvectors)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def spectrum(self) -> SpectralDecomposition:
        return SpectralDecomposition(self.eigenvalues, self.eigenvectors)

    @cached_property
    def sqrt(self) -> np.ndarray:
        v = self.eigenvectors
        s = (v * np.sqrt(self.eigenvalues)) @ dagger(v)
        return 0.5 * (s + dagger(s))

    def conjugated(self, u: np.ndarray) -> "DensityMatrix":
        """``u rho u^dagger`` for unitary ``u``; the spectrum is carried over exactly."""
        return DensityMatrix(self.eigenvalues, u @ self.eigenvectors)


def psd_sqrt(rho: DensityMatrix) -> np.ndarray:
    """Positive-definite square root of a full-rank density matrix."""
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix.from_matrix(rho)
    return rho.sqrt


def unitary_evolution(h, t: float) -> np.ndarray:
    """exp(-i H t) via the spectral decomposition of H."""
    spec = h if isinstance(h, SpectralDecomposition) else hermitian_eig(h)
    return spec.apply(lambda e: np.exp(-1j * e * t))


def unitary_evolution_many(spec: SpectralDecomposition, ts) -> np.ndarray:
    """Stack of exp(-i H t) for every t in ``ts``; shape (len(ts), d, d)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    v = spec.eigenvectors
    phases = np.exp(-1j * ts[:, None] * spec.eigenvalues[None, :])
    return (v[None, :, :] * phases[:, None, :]) @ dagger(v)[None, :, :]


def thermal_state(h, beta: float) -> DensityMatrix:
    """Gibbs state exp(-beta H)/Z.

    The Boltzmann weights are computed relative to the ground energy so large
    ``beta`` does not overflow; a weight that underflows is a rank violation.
    """
    if not np.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and non-negative, got {beta}")
    spec = h if isinstance(h, SpectralDecomposition) else hermitian_eig(h)
    e = spec.eigenvalues
    weights = np.exp(-beta * (e - e[0]))
    weights = weights / weights.sum()
    if weights.min() < np.finfo(float).tiny:
        raise RankDeficientError(
            f"thermal weight underflows at beta={beta}: the state is not full rank"
        )
    return DensityMatrix.from_spectrum(weights, spec.eigenvectors)


def is_unitary(u: np.ndarray, tol: float = 1e-9) -> bool:
    return frob(dagger(u) @ u - np.eye(u.shape[-1])) <= tol
