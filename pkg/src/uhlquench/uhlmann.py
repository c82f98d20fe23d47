"""Uhlmann connection, parallel-transport residual and holonomy integration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence, Union

import numpy as np

from .errors import NonAntiHermitianError, PhaseUndefinedError
from .matfun import (
    DensityMatrix,
    as_hermitian,
    commutator,
    dagger,
    frob,
    hermitian_eig,
    unitary_evolution_many,
)

EPS_ZERO = 1e-6
ANTI_HERMITIAN_TOL = 1e-10

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0


def wrap_angle(x: float) -> float:
    """Map an angle to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y <= -math.pi else y


def angle_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


@dataclass(frozen=True, eq=False)
class ConnectionSample:
    t: float
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class Holonomy:
    t: float
    g: np.ndarray


def _check_anti_hermitian(a: np.ndarray) -> None:
    res = np.linalg.norm(a + dagger(a), axis=(-2, -1))
    scale = np.maximum(np.linalg.norm(a, axis=(-2, -1)), 1.0)
    bad = res > ANTI_HERMITIAN_TOL * scale
    if np.any(bad):
        worst = float(np.max(res / scale))
        raise NonAntiHermitianError(f"connection sample has ||A + A^dagger|| = {worst:.3e}")


def _pair_weights(lam: np.ndarray) -> np.ndarray:
    return lam[:, None] + lam[None, :]


def uhlmann_connection_generic(
    rho: DensityMatrix, d_sqrt_rho, t: float = 0.0
) -> ConnectionSample:
    """A_U = -sum_nm |n><n|[d sqrt(rho), sqrt(rho)]|m><m| / (lambda_n + lambda_m).

    ``d_sqrt_rho`` is the time derivative of sqrt(rho) along the path; the
    eigenbasis is that of ``rho`` itself.
    """
    v = rho.eigenvectors
    c = dagger(v) @ commutator(np.asarray(d_sqrt_rho, dtype=complex), rho.sqrt) @ v
    a = -v @ (c / _pair_weights(rho.eigenvalues)) @ dagger(v)
    return ConnectionSample(float(t), 0.5 * (a - dagger(a)))


class QuenchConnection:
    """Closed-form connection along rho(t) = exp(-iHt) rho0 exp(iHt).

    With K the Hermitian matrix whose rho0-eigenbasis entries are
    2 sqrt(l_n l_m)/(l_n + l_m) H_nm, the connection is
    i A_U(t) = exp(-iHt) (K - H) exp(iHt). Callable on scalar t; use
    ``sample_many`` for a batch.
    """

    def __init__(self, rho0: DensityMatrix, h):
        self.rho0 = rho0
        self.h = as_hermitian(h)
        self.h_spec = hermitian_eig(self.h)
        lam = rho0.eigenvalues
        v = rho0.eigenvectors
        weights = 2.0 * np.sqrt(np.outer(lam, lam)) / _pair_weights(lam)
        k = v @ (weights * (dagger(v) @ self.h @ v)) @ dagger(v)
        self.k = 0.5 * (k + dagger(k))
        self.generator = self.k - self.h  # i A_U(0)

    def sample_many(self, ts) -> np.ndarray:
        u = unitary_evolution_many(self.h_spec, ts)
        ia = u @ self.generator @ dagger(u)
        return -1j * ia

    def __call__(self, t: float) -> ConnectionSample:
        return ConnectionSample(float(t), self.sample_many([t])[0])


def quench_connection(rho0: DensityMatrix, h, t: float) -> ConnectionSample:
    return QuenchConnection(rho0, h)(t)


ConnectionSampler = Callable[[float], Union[ConnectionSample, np.ndarray]]


def _sample(connection, ts: np.ndarray) -> np.ndarray:
    many = getattr(connection, "sample_many", None)
    if many is not None:
        out = np.asarray(many(ts), dtype=complex)
    else:
        out = np.array(
            [np.asarray(getattr(s, "matrix", s), dtype=complex) for s in map(connection, ts)]
        )
    _check_anti_hermitian(out)
    return out


def _expm_anti_hermitian(omega: np.ndarray) -> np.ndarray:
    # exp(Omega) with Omega anti-Hermitian: Omega = -i M, M Hermitian
    m = 1j * omega
    m = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * w)[..., None, :]) @ dagger(v)


def step_propagators(connection, t0: np.ndarray, h: np.ndarray, method: str) -> np.ndarray:
    """One-step propagators for dg/dt = -A(t) g over [t0, t0 + h], batched."""
    t0 = np.atleast_1d(np.asarray(t0, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), t0.shape)
    if method == "midpoint":
        a = _sample(connection, t0 + 0.5 * h)
        omega = -a * h[:, None, None]
    elif method == "magnus4":
        a1 = _sample(connection, t0 + (0.5 - _GAUSS_OFFSET) * h)
        a2 = _sample(connection, t0 + (0.5 + _GAUSS_OFFSET) * h)
        hh = h[:, None, None]
        omega = -0.5 * hh * (a1 + a2) + (math.sqrt(3.0) / 12.0) * hh**2 * (a2 @ a1 - a1 @ a2)
    else:
        raise ValueError(f"unknown integration method {method!r}")
    return _expm_anti_hermitian(omega)


@dataclass(frozen=True, eq=False)
class TransportGrid:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1 or t.size < 1 or t[0] != 0.0:
            raise ValueError("transport grid must be a 1-d array starting at 0")
        if t.size > 1:
            d = np.diff(t)
            if np.any(d <= 0):
                raise ValueError("transport grid must be strictly increasing")
            if np.max(np.abs(d - d[0])) > 1e-12 * max(1.0, t[-1]):
                raise ValueError("transport grid must be uniformly spaced")

    @classmethod
    def uniform(cls, t_max: float, dt: float) -> "TransportGrid":
        if dt <= 0 or t_max < 0:
            raise ValueError("need dt > 0 and t_max >= 0")
        n = int(math.floor(t_max / dt * (1 + 1e-12)))
        return cls(dt * np.arange(n + 1))

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0


class HolonomyPath(Sequence[Holonomy]):
    """Holonomy g(t) on a uniform grid, with off-grid evaluation by a partial step."""

    def __init__(self, connection, times: np.ndarray, matrices: np.ndarray, method: str):
        self.connection = connection
        self.times = times
        self.matrices = matrices
        self.method = method

    def __len__(self) -> int:
        return self.times.size

    def __getitem__(self, k):
        if isinstance(k, slice):
            return [self[i] for i in range(*k.indices(len(self)))]
        return Holonomy(float(self.times[k]), self.matrices[k])

    def __iter__(self) -> Iterator[Holonomy]:
        for k in range(len(self)):
            yield self[k]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    def at(self, t: float) -> Holonomy:
        if t < 0 or t > self.times[-1] * (1 + 1e-12) + 1e-15:
            raise ValueError(f"t={t} outside integrated range [0, {self.times[-1]}]")
        if len(self) == 1:
            return self[0]
        k = min(int(math.floor(t / self.dt)), len(self) - 1)
        rem = t - self.times[k]
        if abs(rem) <= 1e-14 * max(1.0, t):
            return Holonomy(float(t), self.matrices[k])
        if rem < 0:
            k -= 1
            rem = t - self.times[k]
        p = step_propagators(self.connection, self.times[k], rem, self.method)[0]
        return Holonomy(float(t), p @ self.matrices[k])


def integrate_steps(connection, t0: float, g0: np.ndarray, dt: float, n: int, method: str) -> np.ndarray:
    """Ordered product of ``n`` steps from (t0, g0); returns the n+1 holonomies."""
    starts = t0 + dt * np.arange(n)
    props = step_propagators(connection, starts, dt, method) if n else np.empty((0,) + g0.shape)
    out = np.empty((n + 1,) + g0.shape, dtype=complex)
    out[0] = g0
    g = g0
    for k in range(n):
        g = props[k] @ g
        out[k + 1] = g
    return out


def holonomy_integrate(
    connection: ConnectionSampler, grid: TransportGrid, method: str = "magnus4"
) -> HolonomyPath:
    """Time-ordered exponential g(t) = T exp(-int_0^t A_U) on ``grid``.

    ``method="magnus4"`` (default) uses the two-point Gauss-Legendre Magnus
    step, fourth order. ``method="midpoint"`` uses exp(-A(t_mid) dt), second
    order.
    """
    times = grid.times
    d = _sample(connection, times[:1]).shape[-1]
    mats = integrate_steps(connection, 0.0, np.eye(d, dtype=complex), grid.dt, times.size - 1, method)
    return HolonomyPath(connection, times, mats, method)


def uhlmann_phase(rho0: DensityMatrix, g) -> float:
    """arg Tr[rho0 g] in (-pi, pi]; raises PhaseUndefinedError if |Tr| <= EPS_ZERO."""
    gm = np.asarray(getattr(g, "g", g))
    z = complex(np.trace(rho0.matrix @ gm))
    if abs(z) <= EPS_ZERO:
        raise PhaseUndefinedError(f"|Tr[rho0 g]| = {abs(z):.3e} <= {EPS_ZERO:.0e}")
    return wrap_angle(math.atan2(z.imag, z.real))


def transport_residual(
    w: Callable[[float], np.ndarray], t: float, dt: float = 1e-4, side: str = "left"
) -> float:
    """Frobenius norm of the parallel-transport defect, with a central difference.

    ``side="left"`` measures W^dagger W' - W'^dagger W, the form the Uhlmann
    connection enforces; ``side="right"`` measures W' W^dagger - W W'^dagger.
    """
    wt = np.asarray(w(t))
    wd = (np.asarray(w(t + dt)) - np.asarray(w(t - dt))) / (2.0 * dt)
    if side == "left":
        m = dagger(wt) @ wd
    elif side == "right":
        m = wd @ dagger(wt)
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return frob(m - dagger(m))
