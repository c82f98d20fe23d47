"""Trajectory post-processing: critical times, phase jumps, cyclic Uhlmann phases."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import CyclicityError
from .matfun import frob
from .quench import TrajectorySample, UhlmannQuench, evolve_density
from .uhlmann import EPS_ZERO, angle_distance, wrap_angle

log = logging.getLogger(__name__)

COARSE_THRESHOLD = 1e-2
REFINE_WIDTH = 1e-8
REAL_BRANCH_TOL = 1e-10
JUMP_OFFSET_STEPS = 5
JUMP_ANOMALY_TOL = 0.2
CYCLIC_TOL = 1e-9
CLASSIFY_TOL = 1e-3
UNCLASSIFIABLE_TOL = 0.1

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

Evaluator = Callable[[float], TrajectorySample]


@dataclass(frozen=True)
class GdqptEvent:
    index: int
    t_star: float
    abs_G: float
    refinement_width: float
    jump: float = math.nan
    anomalous: bool = False


@dataclass(frozen=True)
class CyclicSample:
    n: int
    t: float
    theta_U: float
    crossings_before: int
    G: complex = 1.0 + 0.0j


class Topology(str, enum.Enum):
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"
    UNCLASSIFIABLE = "unclassifiable"


def scan_trajectory(evaluator: Evaluator, t_max: float, dt: float) -> list[TrajectorySample]:
    """Evaluate on t = k dt, k = 0 .. floor(t_max/dt)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    n = int(math.floor(t_max / dt * (1 + 1e-12)))
    return [evaluator(k * dt) for k in range(n + 1)]


def golden_section(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Bracket [c, d] of width <= tol around the minimum of unimodal f on [a, b]."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return a, b


def bisect_sign_change(f, a: float, b: float, tol: float, max_iter: int = 200) -> tuple[float, float]:
    fa = f(a)
    if fa == 0.0:
        return a, a
    for _ in range(max_iter):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m, m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return a, b


def _is_real_branch(samples: Sequence[TrajectorySample]) -> bool:
    return max(abs(s.G.imag) for s in samples) < REAL_BRANCH_TOL


def find_critical_times(
    samples: Sequence[TrajectorySample], evaluator: Evaluator, width: float = REFINE_WIDTH
) -> list[GdqptEvent]:
    """Zeros of the Loschmidt amplitude, refined to ``width`` in t.

    Real-valued trajectories use sign-change bisection on Re G; otherwise local
    minima of |G| below ``COARSE_THRESHOLD`` are refined by golden-section
    search on |G|^2. An event is kept only if the refined |G| < EPS_ZERO.
    """
    if len(samples) < 2:
        return []
    t = np.array([s.t for s in samples])
    brackets: list[tuple[float, float]] = []
    if _is_real_branch(samples):
        re = np.array([s.G.real for s in samples])
        for k in range(len(samples) - 1):
            if re[k] == 0.0 or (re[k] > 0) != (re[k + 1] > 0) and re[k + 1] != 0.0:
                brackets.append((t[k], t[k + 1]))
        refine = lambda a, b: bisect_sign_change(lambda x: evaluator(x).G.real, a, b, width)
    else:
        mag = np.array([s.abs_G for s in samples])
        for k in range(len(samples)):
            lo, hi = max(k - 1, 0), min(k + 1, len(samples) - 1)
            if mag[k] < COARSE_THRESHOLD and mag[k] <= mag[lo] and mag[k] <= mag[hi] and (lo < k or hi > k):
                brackets.append((t[lo], t[hi]))
        refine = lambda a, b: golden_section(lambda x: abs(evaluator(x).G) ** 2, a, b, width)

    events: list[GdqptEvent] = []
    for a, b in brackets:
        lo, hi = refine(a, b)
        ts = 0.5 * (lo + hi)
        mag_star = evaluator(ts).abs_G
        if mag_star >= EPS_ZERO:
            log.info("candidate near t=%.6g dropped: refined |G| = %.3e", ts, mag_star)
            continue
        if events and ts - events[-1].t_star < 2.0 * (t[1] - t[0]):
            continue
        events.append(GdqptEvent(len(events), ts, mag_star, hi - lo))
    return events


def _defined_phase_near(samples, t_target: float, direction: int):
    ts = np.array([s.t for s in samples])
    if direction < 0:
        idx = range(int(np.searchsorted(ts, t_target, side="right")) - 1, -1, -1)
    else:
        idx = range(int(np.searchsorted(ts, t_target, side="left")), len(samples))
    for k in idx:
        if samples[k].phase_defined:
            return samples[k].theta_G
    return None


def detect_phase_jumps(
    samples: Sequence[TrajectorySample], events: Sequence[GdqptEvent]
) -> list[GdqptEvent]:
    """Attach the signed geometric-phase change across each event (mod 2pi)."""
    if not events:
        return []
    dt = samples[1].t - samples[0].t
    delta = JUMP_OFFSET_STEPS * dt
    out = []
    for ev in events:
        before = _defined_phase_near(samples, ev.t_star - delta, -1)
        after = _defined_phase_near(samples, ev.t_star + delta, +1)
        if before is None or after is None:
            out.append(replace(ev, anomalous=True))
            continue
        jump = wrap_angle(after - before)
        anomalous = abs(abs(jump) - math.pi) > JUMP_ANOMALY_TOL
        if anomalous:
            log.warning("phase jump %.4f at t*=%.6g is not +-pi", jump, ev.t_star)
        out.append(replace(ev, jump=jump, anomalous=anomalous))
    return out


def cyclic_sample(quench: UhlmannQuench, n: int, events: Sequence[GdqptEvent] = (), tau: float | None = None) -> CyclicSample:
    tau = quench.scenario.period() if tau is None else tau
    t = n * tau
    if n == 0:
        return CyclicSample(0, 0.0, 0.0, 0, 1.0 + 0.0j)
    res = frob(evolve_density(quench.scenario, t).matrix - quench.scenario.rho0.matrix)
    if res >= CYCLIC_TOL:
        raise CyclicityError(f"||rho({n} tau) - rho0|| = {res:.3e}")
    s = quench.sample(t)
    theta_u = s.theta_G if s.phase_defined else math.nan
    crossings = sum(1 for e in events if e.t_star < t)
    return CyclicSample(n, t, theta_u, crossings, s.G)


def cyclic_samples(
    quench: UhlmannQuench, n_max: int, events: Sequence[GdqptEvent] = ()
) -> list[CyclicSample]:
    """Uhlmann phase arg G(n tau) for n = 1 .. n_max."""
    tau = quench.scenario.period()
    return [cyclic_sample(quench, n, events, tau) for n in range(1, n_max + 1)]


def classify_topology(cyclic: CyclicSample) -> Topology:
    """Nontrivial holonomy iff theta_U is pi; trivial iff 0."""
    th = cyclic.theta_U
    if math.isnan(th):
        return Topology.UNCLASSIFIABLE
    d_pi = angle_distance(th, math.pi)
    d_0 = angle_distance(th, 0.0)
    if d_pi <= CLASSIFY_TOL:
        return Topology.NONTRIVIAL
    if d_0 <= CLASSIFY_TOL:
        return Topology.TRIVIAL
    if min(d_pi, d_0) > UNCLASSIFIABLE_TOL:
        return Topology.UNCLASSIFIABLE
    log.warning("theta_U=%.4f classified by proximity only", th)
    return Topology.NONTRIVIAL if d_pi < d_0 else Topology.TRIVIAL
