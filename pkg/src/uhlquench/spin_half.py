"""Closed-form results for a spin-1/2 paramagnet whose field direction is quenched.

Before the quench H0 = (w0/2) sigma_z at temperature T; afterwards the field
points along (sin th cos ph, sin th sin ph, cos th). These formulas serve as
the analytic oracle for the generic numerical pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import expit

from .quench import QuenchScenario

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class SpinHalfParams:
    omega0: float = 1.0
    T: float = 1.0
    theta: float = math.pi / 2
    phi: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if not self.T > 0:
            raise ValueError("temperature must be positive (use math.inf for beta = 0)")

    @property
    def beta(self) -> float:
        return 0.0 if math.isinf(self.T) else 1.0 / self.T

    @property
    def x(self) -> float:
        """beta * omega0."""
        return self.beta * self.omega0


def _sech(y: float) -> float:
    a = abs(y)
    e = math.exp(-a)
    return 2.0 * e / (1.0 + e * e)


def chi(params: SpinHalfParams) -> float:
    """2 e^{x/2} / (e^x + 1) - 1 with x = beta omega0, written as sech(x/2) - 1."""
    return _sech(0.5 * params.x) - 1.0


def fermi(params: SpinHalfParams, energy: float) -> float:
    """1 / (e^{beta E} + 1)."""
    return float(expit(-params.beta * energy))


def initial_hamiltonian(params: SpinHalfParams) -> np.ndarray:
    return 0.5 * params.omega0 * SIGMA_Z


def field_direction(params: SpinHalfParams) -> np.ndarray:
    th, ph = params.theta, params.phi
    return np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])


def quench_hamiltonian(params: SpinHalfParams) -> np.ndarray:
    th, ph = params.theta, params.phi
    off = math.sin(th) * np.exp(-1j * ph)
    return 0.5 * params.omega0 * np.array(
        [[math.cos(th), off], [np.conj(off), -math.cos(th)]], dtype=complex
    )


def h_tilde(params: SpinHalfParams) -> np.ndarray:
    """Off-diagonal block of H in the sigma_z basis."""
    h = quench_hamiltonian(params)
    return h - np.diag(np.diag(h))


def propagator(params: SpinHalfParams, t: float) -> np.ndarray:
    """cos(w0 t/2) - i sin(w0 t/2) B.sigma."""
    n = field_direction(params)
    bs = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    a = 0.5 * params.omega0 * t
    return math.cos(a) * np.eye(2) - 1j * math.sin(a) * bs


def initial_state(params: SpinHalfParams) -> np.ndarray:
    return np.diag([fermi(params, params.omega0), fermi(params, -params.omega0)]).astype(complex)


def holonomy_analytic(params: SpinHalfParams, t: float) -> np.ndarray:
    """g(t) = exp(-iHt) exp(i(H + chi H~)t)."""
    h = quench_hamiltonian(params)
    return propagator(params, t) @ expm(1j * (h + chi(params) * h_tilde(params)) * t)


def b_factor(params: SpinHalfParams) -> float:
    """sqrt(cos^2 th + (chi+1)^2 sin^2 th); dimensionless, unrelated to |B|."""
    c1 = chi(params) + 1.0
    return math.sqrt(math.cos(params.theta) ** 2 + c1 * c1 * math.sin(params.theta) ** 2)


def a_factor(params: SpinHalfParams, t: float) -> complex:
    a = 0.5 * params.omega0 * t
    return complex(math.cos(a), math.cos(params.theta) * math.sin(a))


def loschmidt_analytic(params: SpinHalfParams, t: float) -> complex:
    """Loschmidt amplitude for general field direction (independent of phi)."""
    x = params.x
    th = params.theta
    half = 0.5 * params.omega0 * t
    b = b_factor(params)
    a = a_factor(params, t)
    lo = float(expit(x))  # 1/(1 + e^{-x})
    hi = float(expit(-x))  # 1/(1 + e^{x})
    sech_half = _sech(0.5 * x)  # 2/(e^{x/2} + e^{-x/2})
    first = math.sin(th) ** 2 * math.sin(half) * math.sin(half * b) * sech_half**2 / b
    second = math.cos(half * b) * (a * lo + a.conjugate() * hi)
    third = 1j * math.cos(th) * math.sin(half * b) / b * (a.conjugate() * hi - a * lo)
    return complex(first + second + third)


def loschmidt_equator(params: SpinHalfParams, t: float) -> float:
    """theta = pi/2 branch: real-valued."""
    c1 = chi(params) + 1.0
    half = 0.5 * params.omega0 * t
    return math.cos(c1 * half) * math.cos(half) + _sech(0.5 * params.x) * math.sin(c1 * half) * math.sin(half)


def period(params: SpinHalfParams) -> float:
    return 2.0 * math.pi / params.omega0


def scenario(params: SpinHalfParams) -> QuenchScenario:
    return QuenchScenario(
        initial_hamiltonian(params), quench_hamiltonian(params), params.beta, period_hint=period(params)
    )
