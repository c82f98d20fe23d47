"""Uhlmann-quench driver.

After a sudden quench to ``H`` the density matrix follows Heisenberg evolution
while the purification is W(t) = exp(-iHt) sqrt(rho0) exp(iHt) g(t), with g the
Uhlmann holonomy. This keeps W parallel-transported at every instant.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    CyclicityError,
    InconsistentHolonomyError,
    NumericalInvariantError,
)
from .matfun import (
    DensityMatrix,
    anticommutator,
    as_hermitian,
    commutator,
    dagger,
    frob,
    hermitian_eig,
    is_unitary,
    thermal_state,
    unitary_evolution,
)
from .uhlmann import (
    EPS_ZERO,
    Holonomy,
    HolonomyPath,
    QuenchConnection,
    integrate_steps,
    step_propagators,
    transport_residual,
    wrap_angle,
)

log = logging.getLogger(__name__)

DIVERGENT = math.inf
DYNAMIC_PHASE_TOL = 1e-9
STEPS_PER_PERIOD = 2000


class TrivialQuenchWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class QuenchScenario:
    """Pre-quench Hamiltonian ``H0``, post-quench ``H`` and inverse temperature."""

    H0: np.ndarray
    H: np.ndarray
    beta: float
    period_hint: float | None = None
    rho0: DensityMatrix = field(init=False, repr=False)

    def __post_init__(self):
        h0 = as_hermitian(self.H0)
        h = as_hermitian(self.H)
        if h0.shape != h.shape:
            raise ValueError(f"H0 {h0.shape} and H {h.shape} differ in dimension")
        object.__setattr__(self, "H0", h0)
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "rho0", thermal_state(h0, self.beta))
        scale = max(frob(h) * frob(self.rho0.matrix), 1e-300)
        if frob(commutator(h, self.rho0.matrix)) <= 1e-12 * scale:
            warnings.warn(
                "[H, rho0] = 0: the quench transports nothing", TrivialQuenchWarning, stacklevel=3
            )

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    @cached_property
    def h_spec(self):
        return hermitian_eig(self.H)

    @property
    def bandwidth(self) -> float:
        e = self.h_spec.eigenvalues
        return float(e[-1] - e[0])

    def propagator(self, t: float) -> np.ndarray:
        return unitary_evolution(self.h_spec, t)

    def default_step(self) -> float:
        """Holonomy step: 1/2000 of the fastest free oscillation period 2pi/bandwidth."""
        bw = self.bandwidth
        return 2.0 * math.pi / bw / STEPS_PER_PERIOD if bw > 0 else 1e-3

    def cyclic_residual(self, tau: float) -> float:
        return frob(evolve_density(self, tau).matrix - self.rho0.matrix)

    def period(self, tol: float = 1e-9, max_multiple: int = 64) -> float:
        """Smallest tau with ||rho(tau) - rho0|| < tol.

        Uses ``period_hint`` when given; otherwise tries multiples of
        2 pi / (smallest level spacing of H).
        """
        if self.period_hint is not None:
            tau = float(self.period_hint)
            res = self.cyclic_residual(tau)
            if res >= tol:
                raise CyclicityError(f"rho(tau) - rho0 = {res:.3e} at hinted tau={tau}")
            return tau
        e = self.h_spec.eigenvalues
        gaps = np.diff(e)
        gaps = gaps[gaps > 1e-12 * max(1.0, abs(e).max())]
        if gaps.size == 0:
            raise CyclicityError("H is proportional to the identity: no finite period")
        base = 2.0 * math.pi / gaps.min()
        for k in range(1, max_multiple + 1):
            if self.cyclic_residual(k * base) < tol:
                return k * base
        raise CyclicityError(f"no period among the first {max_multiple} multiples of {base:.6g}")


@dataclass(frozen=True, eq=False)
class PurificationState:
    t: float
    W: np.ndarray
    U: np.ndarray
    calU: np.ndarray


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    G: complex
    theta_tot: float
    theta_D: float
    theta_G: float
    r: float
    phase_defined: bool

    @property
    def abs_G(self) -> float:
        return abs(self.G)

    @property
    def divergent(self) -> bool:
        return math.isinf(self.r)


def evolve_density(s: QuenchScenario, t: float) -> DensityMatrix:
    return s.rho0.conjugated(s.propagator(t))


def _sqrt_rho(s: QuenchScenario, t: float) -> np.ndarray:
    u = s.propagator(t)
    return u @ s.rho0.sqrt @ dagger(u)


def _g_matrix(g) -> np.ndarray:
    return np.asarray(getattr(g, "g", g), dtype=complex)


def evolve_purification(s: QuenchScenario, t: float, g) -> PurificationState:
    if isinstance(g, Holonomy) and abs(g.t - t) > 1e-12 * max(1.0, abs(t)):
        raise InconsistentHolonomyError(f"holonomy is for t={g.t}, requested t={t}")
    gm = _g_matrix(g)
    if not is_unitary(gm, 1e-6):
        raise InconsistentHolonomyError("holonomy is not unitary")
    rho_t = evolve_density(s, t)
    w = rho_t.sqrt @ gm
    mismatch = frob(w @ dagger(w) - rho_t.matrix)
    if mismatch > 1e-6:
        raise InconsistentHolonomyError(f"W W^dagger differs from rho(t) by {mismatch:.3e}")
    return PurificationState(float(t), w, gm, s.propagator(-t) @ gm)


def ancilla_correction(s: QuenchScenario, t: float, g) -> np.ndarray:
    """calU(t) = exp(iHt) g(t)."""
    return s.propagator(-t) @ _g_matrix(g)


def loschmidt_amplitude(s: QuenchScenario, t: float, g) -> complex:
    """Tr[sqrt(rho0) sqrt(rho(t)) g(t)] = <W(0)|W(t)>."""
    return complex(np.trace(s.rho0.sqrt @ _sqrt_rho(s, t) @ _g_matrix(g)))


def dynamic_phase(s: QuenchScenario, t: float, sqrt_rho_t: np.ndarray | None = None) -> float:
    """arg Tr[sqrt(rho0) sqrt(rho(t))]."""
    sq = _sqrt_rho(s, t) if sqrt_rho_t is None else sqrt_rho_t
    z = complex(np.trace(s.rho0.sqrt @ sq))
    return math.atan2(z.imag, z.real)


def phase_decomposition(
    s: QuenchScenario, t: float, G: complex, sqrt_rho_t: np.ndarray | None = None
) -> tuple[float, float, float]:
    """(theta_tot, theta_D, theta_G); the first and last are NaN when |G| <= EPS_ZERO."""
    theta_d = dynamic_phase(s, t, sqrt_rho_t)
    if abs(theta_d) > DYNAMIC_PHASE_TOL:
        raise NumericalInvariantError(f"dynamic phase {theta_d:.3e} at t={t} should vanish")
    if abs(G) <= EPS_ZERO:
        return math.nan, theta_d, math.nan
    theta_tot = wrap_angle(math.atan2(G.imag, G.real))
    return theta_tot, theta_d, wrap_angle(theta_tot - theta_d)


def rate_function(G: complex) -> float:
    """-ln|G|^2 per site; ``DIVERGENT`` when |G| < EPS_ZERO."""
    a = abs(G)
    if a < EPS_ZERO:
        return DIVERGENT
    return -2.0 * math.log(a)


class UhlmannQuench:
    """Point and trajectory evaluation for one scenario.

    The holonomy is integrated on a uniform step (``step``, default
    2pi/bandwidth/2000) and extended lazily; off-grid times continue from the
    preceding checkpoint with one partial step.
    """

    def __init__(self, scenario: QuenchScenario, step: float | None = None, method: str = "magnus4"):
        self.scenario = scenario
        self.step = float(step) if step is not None else scenario.default_step()
        if self.step <= 0:
            raise ValueError("holonomy step must be positive")
        self.method = method
        self.connection = QuenchConnection(scenario.rho0, scenario.H)
        d = scenario.dim
        self._mats = np.eye(d, dtype=complex)[None]

    def _extend_to(self, t: float) -> None:
        have = self._mats.shape[0] - 1
        need = int(math.ceil(t / self.step * (1 - 1e-12)))
        if need <= have:
            return
        n = max(need - have, 1024)
        new = integrate_steps(self.connection, have * self.step, self._mats[-1], self.step, n, self.method)
        self._mats = np.concatenate([self._mats, new[1:]])

    def path(self, t_max: float) -> HolonomyPath:
        self._extend_to(t_max)
        n = int(math.ceil(t_max / self.step * (1 - 1e-12)))
        return HolonomyPath(self.connection, self.step * np.arange(n + 1), self._mats[: n + 1], self.method)

    def holonomy(self, t: float) -> Holonomy:
        if t < 0:
            raise ValueError("time must be non-negative")
        self._extend_to(t)
        k = int(math.floor(t / self.step))
        rem = t - k * self.step
        if rem <= 1e-14 * max(1.0, t):
            return Holonomy(float(t), self._mats[k])
        p = step_propagators(self.connection, k * self.step, rem, self.method)[0]
        return Holonomy(float(t), p @ self._mats[k])

    def amplitude(self, t: float) -> complex:
        return loschmidt_amplitude(self.scenario, t, self.holonomy(t))

    def purification(self, t: float) -> PurificationState:
        return evolve_purification(self.scenario, t, self.holonomy(t))

    def sample(self, t: float) -> TrajectorySample:
        s = self.scenario
        sq = _sqrt_rho(s, t)
        g = complex(np.trace(s.rho0.sqrt @ sq @ self.holonomy(t).g))
        tot, dyn, geo = phase_decomposition(s, t, g, sq)
        return TrajectorySample(float(t), g, tot, dyn, geo, rate_function(g), abs(g) > EPS_ZERO)

    __call__ = sample

    def trajectory(self, t_max: float, dt: float) -> list[TrajectorySample]:
        n = int(math.floor(t_max / dt * (1 + 1e-12)))
        self._extend_to(n * dt)
        return [self.sample(k * dt) for k in range(n + 1)]


@dataclass(frozen=True)
class IncompatibilityReport:
    anticommutator_norm: float
    naive_residual: float
    uhlmann_residual: float
    times: tuple[float, ...]


def naive_purification(s: QuenchScenario):
    """Hamiltonian dynamics W(t) = exp(-iHt) sqrt(rho0) as a sampler."""
    sq = s.rho0.sqrt
    return lambda t: s.propagator(t) @ sq


def incompatibility_diagnostic(
    s: QuenchScenario, times=None, fd_step: float | None = None, quench: UhlmannQuench | None = None
) -> IncompatibilityReport:
    """Transport defects of the naive and of the Uhlmann-quench purification.

    Residuals are the maxima over ``times`` of ``transport_residual`` (left
    form). The naive one equals 2||sqrt(rho0) H sqrt(rho0)||_F, which is at
    least (l_min/l_max) ||{H, rho0}||_F.
    """
    bw = s.bandwidth
    scale = bw if bw > 0 else 1.0
    if times is None:
        times = np.linspace(0.5, 10.0, 7) / scale
    h = fd_step if fd_step is not None else 1e-4 / scale
    q = quench or UhlmannQuench(s)
    naive = naive_purification(s)
    uhl = lambda t: q.purification(t).W
    nres = max(transport_residual(naive, t, h) for t in times)
    ures = max(transport_residual(uhl, t, h) for t in times)
    acn = frob(anticommutator(s.H, s.rho0.matrix))
    return IncompatibilityReport(acn, nres, ures, tuple(float(t) for t in times))


def transport_identity_check(rho0: DensityMatrix, h, t: float) -> float:
    """Relative residual of 2 sqrt(rho0) H sqrt(rho0) = {rho0, H + e^{iHt} iA_U e^{-iHt}}."""
    conn = QuenchConnection(rho0, h)
    a = conn(t).matrix
    u = unitary_evolution(conn.h_spec, t)
    lhs = 2.0 * rho0.sqrt @ conn.h @ rho0.sqrt
    rhs = anticommutator(rho0.matrix, conn.h + dagger(u) @ (1j * a) @ u)
    scale = frob(lhs)
    diff = frob(lhs - rhs)
    return diff / scale if scale > 0 else diff
