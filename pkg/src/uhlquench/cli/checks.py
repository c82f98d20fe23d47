"""Self-validation suite behind ``uhlquench validate``.

Every check returns a ``CheckResult`` carrying the measured residual and the
tolerance it is held to. ``fast`` uses reduced sample counts; ``full`` runs
the complete oracle grids.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .. import gdqpt, purified, spin_half
from ..matfun import frob
from ..quench import TrivialQuenchWarning, UhlmannQuench, dynamic_phase, evolve_density, incompatibility_diagnostic, transport_identity_check
from ..randomized import random_density_matrix, random_hermitian
from ..spin_half import SpinHalfParams
from ..uhlmann import angle_distance
from . import runner

LEVELS = ("fast", "full")
SEED = 20241015

GRID_THETAS = (math.pi / 6, math.pi / 4, math.pi / 3, 5 * math.pi / 12, math.pi / 2)
GRID_TEMPERATURES = (0.01, 0.1, 1.0, 10.0, 100.0)


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in ("residual", "tolerance"):
            v = d[k]
            d[k] = "inf" if math.isinf(v) else (None if math.isnan(v) else v)
        return d


def _result(name, residual, tol, detail="", passed=None) -> CheckResult:
    ok = bool(residual < tol) if passed is None else bool(passed)
    return CheckResult(name, float(residual), float(tol), ok, detail)


def check_transport_identity(level: str) -> CheckResult:
    draws = 20 if level == "fast" else 100
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(draws):
        d = int(rng.integers(2, 5))
        rho0 = random_density_matrix(rng, d)
        h = random_hermitian(rng, d)
        t = float(rng.uniform(0.0, 10.0))
        worst = max(worst, transport_identity_check(rho0, h, t))
    return _result("transport_identity", worst, 1e-10, f"{draws} draws, dims 2-4")


def _oracle_params(level: str):
    thetas = (math.pi / 6, math.pi / 3, math.pi / 2)
    temps = (0.1, 1.0, 10.0)
    if level == "fast":
        return [SpinHalfParams(T=1.0, theta=math.pi / 3), SpinHalfParams(T=0.1, theta=math.pi / 2)]
    return [SpinHalfParams(T=T, theta=th) for th in thetas for T in temps]


def check_dynamic_phase(level: str) -> CheckResult:
    ts = np.linspace(0.0, 20.0, 41 if level == "fast" else 201)
    worst = 0.0
    for p in _oracle_params(level) + [SpinHalfParams(T=0.01)]:
        s = spin_half.scenario(p)
        worst = max(worst, max(abs(dynamic_phase(s, float(t))) for t in ts))
    return _result("dynamic_phase_vanishes", worst, 1e-9)


def check_holonomy_oracle(level: str) -> CheckResult:
    n_t = 21 if level == "fast" else 101
    worst = 0.0
    for p in _oracle_params(level):
        q = UhlmannQuench(spin_half.scenario(p), step=spin_half.period(p) / 2000)
        for t in np.linspace(0.0, 20.0 / p.omega0, n_t):
            worst = max(worst, frob(q.holonomy(float(t)).g - spin_half.holonomy_analytic(p, float(t))))
    return _result("holonomy_vs_analytic", worst, 1e-8, "dt = tau/2000, t in [0, 20]")


def check_loschmidt_grid(level: str) -> CheckResult:
    if level == "fast":
        thetas, temps, n_t = (math.pi / 4, math.pi / 2), (0.1, 1.0), 20
    else:
        thetas, temps, n_t = GRID_THETAS, GRID_TEMPERATURES, 50
    worst = 0.0
    worst_im = 0.0
    for th in thetas:
        for T in temps:
            p = SpinHalfParams(T=T, theta=th)
            q = UhlmannQuench(spin_half.scenario(p))
            for t in np.linspace(0.0, 20.0, n_t):
                g = q.amplitude(float(t))
                worst = max(worst, abs(g - spin_half.loschmidt_analytic(p, float(t))))
                if th == math.pi / 2:
                    worst = max(worst, abs(g - spin_half.loschmidt_equator(p, float(t))))
                    worst_im = max(worst_im, abs(g.imag))
    grid = f"{len(thetas)}x{len(temps)}x{n_t}"
    return _result(
        "loschmidt_vs_analytic",
        worst,
        1e-8,
        f"grid {grid}; max |Im G| on equator = {worst_im:.3e}",
        passed=worst < 1e-8 and worst_im < 1e-10,
    )


def check_high_temperature(level: str) -> CheckResult:
    worst = 0.0
    for th in (math.pi / 6, math.pi / 2):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TrivialQuenchWarning)
            s = spin_half.scenario(SpinHalfParams(T=math.inf, theta=th))
        q = UhlmannQuench(s)
        for t in np.linspace(0.0, 20.0, 41 if level == "fast" else 201):
            worst = max(worst, abs(q.amplitude(float(t)) - 1.0))
    return _result("beta_zero_limit", worst, 1e-12, "|G - 1| at infinite temperature")


def check_low_temperature(level: str) -> CheckResult:
    p = SpinHalfParams(T=0.01)
    q = UhlmannQuench(spin_half.scenario(p))
    samples = gdqpt.scan_trajectory(q, 20.0, 0.01)
    dev = max(abs(s.G - math.cos(0.5 * s.t)) for s in samples)
    events = gdqpt.find_critical_times(samples, q)
    expected = [(2 * n + 1) * math.pi for n in range(3)]
    if len(events) != len(expected):
        return _result("low_temperature_limit", math.inf, 1e-3, f"{len(events)} events, expected 3", False)
    t_err = max(abs(e.t_star - x) for e, x in zip(events, expected))
    return _result(
        "low_temperature_limit",
        t_err,
        1e-3,
        f"max |G - cos(t/2)| = {dev:.3e} (tol 2e-2)",
        passed=t_err < 1e-3 and dev < 2e-2,
    )


def check_incompatibility(level: str) -> CheckResult:
    rep = incompatibility_diagnostic(spin_half.scenario(SpinHalfParams(T=1.0)), fd_step=1e-4)
    ok = rep.naive_residual > 0.1 and rep.uhlmann_residual < 1e-6
    return _result(
        "naive_vs_uhlmann_transport",
        rep.uhlmann_residual,
        1e-6,
        f"naive residual = {rep.naive_residual:.4f} (must exceed 0.1)",
        passed=ok,
    )


def check_cyclicity(level: str) -> CheckResult:
    worst = 0.0
    for T in (0.01, 1.0):
        p = SpinHalfParams(T=T)
        s = spin_half.scenario(p)
        tau = spin_half.period(p)
        for n in range(1, 6):
            worst = max(worst, frob(evolve_density(s, n * tau).matrix - s.rho0.matrix))
    q = UhlmannQuench(spin_half.scenario(SpinHalfParams(T=0.01)))
    thetas = [c.theta_U for c in gdqpt.cyclic_samples(q, 5)]
    want = [math.pi, 0.0, math.pi, 0.0, math.pi]
    alt = max(angle_distance(a, b) for a, b in zip(thetas, want))
    return _result(
        "cyclicity_and_uhlmann_phase",
        worst,
        1e-10,
        f"T=0.01 theta_U deviation from pi,0,pi,0,pi = {alt:.3e} (tol 1e-3)",
        passed=worst < 1e-10 and alt < 1e-3,
    )


def check_purified_equivalence(level: str) -> CheckResult:
    worst = 0.0
    n_t = 101 if level == "fast" else 1001
    for T in (0.1, 1.0, 10.0):
        p = SpinHalfParams(T=T)
        s = spin_half.scenario(p)
        q = UhlmannQuench(s)
        psi0 = purified.initial_purified_state(p)
        for t in np.linspace(0.0, 20.0, n_t):
            t = float(t)
            psi = purified.evolve_protocol(p, t)
            worst = max(worst, abs(purified.hs_overlap(psi0, psi) - q.amplitude(t)))
            worst = max(worst, frob(purified.partial_trace_ancilla(psi) - evolve_density(s, t).matrix))
    return _result("purified_equivalence", worst, 1e-9, "overlap vs trace amplitude, partial trace vs rho(t)")


def figure1_violations(results) -> list[str]:
    """Structural defects of the figure1 tables; empty when the figure is reproduced."""
    problems = []
    for res in results:
        T = res.config.scenario.temperature
        rows = res.trajectory
        divergent_t = [r["t"] for r in rows if math.isinf(r["r"])]
        near = 2.0 * res.config.grid.dt
        if T == 1.0 and not res.events:
            problems.append("T=1: no events")
        for ev in res.events:
            if not any(abs(t - ev["t_star"]) < 1e-12 for t in divergent_t):
                problems.append(f"T={T}: event at {ev['t_star']:.6f} has no divergent row")
            if ev["anomalous"] or abs(abs(ev["jump"]) - math.pi) > 0.05:
                problems.append(f"T={T}: jump {ev['jump']} at {ev['t_star']:.6f}")
            if not ev["abs_G"] < 1e-6:
                problems.append(f"T={T}: |G(t*)| = {ev['abs_G']:.3e}")
        for t in divergent_t:
            if not any(abs(t - ev["t_star"]) <= near for ev in res.events):
                problems.append(f"T={T}: divergent row at {t} without event")
        cyc_rows = [r for r in rows if r["is_cyclic"]]
        if len(cyc_rows) != len(res.cyclic) or not res.cyclic:
            problems.append(f"T={T}: {len(cyc_rows)} cyclic rows for {len(res.cyclic)} cyclic samples")
        for r in rows:
            if (r["theta_U"] is not None) != bool(r["is_cyclic"]):
                problems.append(f"T={T}: theta_U/is_cyclic mismatch at t={r['t']}")
        for c in res.cyclic:
            if c["class"] == "unclassifiable":
                problems.append(f"T={T}: theta_U at n={c['n']} unclassifiable")
        # theta_U only changes across a critical time.
        for a, b in zip(res.cyclic, res.cyclic[1:]):
            if a["crossings_before"] == b["crossings_before"] and a["class"] != b["class"]:
                problems.append(f"T={T}: theta_U changes between n={a['n']} and n={b['n']} without an event")
    return problems


def check_figure1(level: str) -> CheckResult:
    results = [runner.compute_run(c) for c in runner.figure1_configs(".")]
    problems = figure1_violations(results)
    n_events = sum(len(r.events) for r in results)
    detail = "; ".join(problems[:5]) if problems else f"{n_events} events, all structural checks hold"
    return _result("figure1_structure", float(len(problems)), 0.5, detail)


REGISTRY = {
    "transport_identity": check_transport_identity,
    "dynamic_phase_vanishes": check_dynamic_phase,
    "holonomy_vs_analytic": check_holonomy_oracle,
    "loschmidt_vs_analytic": check_loschmidt_grid,
    "beta_zero_limit": check_high_temperature,
    "low_temperature_limit": check_low_temperature,
    "naive_vs_uhlmann_transport": check_incompatibility,
    "cyclicity_and_uhlmann_phase": check_cyclicity,
    "purified_equivalence": check_purified_equivalence,
    "figure1_structure": check_figure1,
}


def run_checks(level: str = "fast") -> dict:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    out = []
    for name, fn in REGISTRY.items():
        t0 = time.perf_counter()
        try:
            res = fn(level)
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(name, math.nan, math.nan, False, f"{type(exc).__name__}: {exc}")
        res.seconds = round(time.perf_counter() - t0, 3)
        out.append(res.as_dict())
    return {"level": level, "passed": all(c["passed"] for c in out), "checks": out}
