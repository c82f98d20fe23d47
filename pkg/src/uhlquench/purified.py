"""System (x) ancilla statevector picture of a purification.

Amplitudes are the row-major (system-major) flattening of the amplitude
matrix W: index ``i * dim_a + j`` holds W[i, j]. Under this convention
|W> = sum_n sqrt(l_n) |n>_s (x) U^T |n*>_a, where |n*> is the complex
conjugate of the eigenvector |n>; for real eigenvectors this is the usual
sum_n sqrt(l_n) |n> (x) U^T |n>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedProtocolError
from .matfun import DensityMatrix, dagger, is_unitary, unitary_evolution
from .spin_half import SpinHalfParams, chi, initial_state, quench_hamiltonian


@dataclass(frozen=True, eq=False)
class PurifiedState:
    amplitudes: np.ndarray
    dim_s: int
    dim_a: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.dim_s * self.dim_a:
            raise ValueError(f"{amp.size} amplitudes for a {self.dim_s}x{self.dim_a} space")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_matrix(cls, w) -> "PurifiedState":
        w = np.asarray(w, dtype=complex)
        return cls(w.reshape(-1), w.shape[0], w.shape[1])

    def as_matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dim_s, self.dim_a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class ProtocolOps:
    U_s: np.ndarray
    U_a: np.ndarray


def build_purified_state(rho0: DensityMatrix, u) -> PurifiedState:
    """sum_n sqrt(l_n) |n>_s (x) U^T |n*>_a for the phase factor ``u``."""
    u = np.asarray(u, dtype=complex)
    d = rho0.dim
    if u.shape != (d, d):
        raise ValueError(f"phase factor shape {u.shape} does not match dimension {d}")
    if not is_unitary(u, 1e-10):
        raise ValueError("phase factor is not unitary")
    v = rho0.eigenvectors
    amp = np.zeros(d * d, dtype=complex)
    for n in range(d):
        amp += math.sqrt(rho0.eigenvalues[n]) * np.kron(v[:, n], u.T @ np.conj(v[:, n]))
    return PurifiedState(amp, d, d)


def partial_trace_ancilla(psi: PurifiedState) -> np.ndarray:
    """Tr_a |W><W|. Rank deficiency is allowed here (returns a plain matrix)."""
    m = psi.as_matrix()
    rho = m @ dagger(m)
    return 0.5 * (rho + dagger(rho))


def hs_overlap(psi1: PurifiedState, psi2: PurifiedState) -> complex:
    """<W1|W2> = Tr(W1^dagger W2)."""
    if (psi1.dim_s, psi1.dim_a) != (psi2.dim_s, psi2.dim_a):
        raise ValueError("purified states live in different spaces")
    return complex(np.vdot(psi1.amplitudes, psi2.amplitudes))


def apply_local(psi: PurifiedState, u_s, u_a) -> PurifiedState:
    """(u_s (x) u_a^T)|W>, i.e. W -> u_s W u_a."""
    return PurifiedState.from_matrix(np.asarray(u_s) @ psi.as_matrix() @ np.asarray(u_a))


def _require_equator(params: SpinHalfParams) -> None:
    if abs(math.cos(params.theta)) > 1e-12:
        raise UnsupportedProtocolError(
            f"product-form protocol needs the field in the xy-plane, got theta={params.theta}"
        )


def protocol_ops(params: SpinHalfParams, t: float) -> ProtocolOps:
    """U_s = exp(-iHt) on the system, U_a = exp(i(1+chi)Ht) on the ancilla."""
    _require_equator(params)
    h = quench_hamiltonian(params)
    return ProtocolOps(unitary_evolution(h, t), unitary_evolution(h, -(1.0 + chi(params)) * t))


def initial_purified_state(params: SpinHalfParams) -> PurifiedState:
    rho0 = DensityMatrix.from_spectrum(np.real(np.diag(initial_state(params))), np.eye(2))
    return build_purified_state(rho0, np.eye(2))


def evolve_protocol(params: SpinHalfParams, t: float) -> PurifiedState:
    """|W(t)> = sum_n sqrt(l_n) U_s|n>_s (x) U_a^T|n>_a for the equatorial quench."""
    ops = protocol_ops(params, t)
    return apply_local(initial_purified_state(params), ops.U_s, ops.U_a)
