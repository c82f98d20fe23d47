"""Compute the output tables for a run configuration."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .. import gdqpt
from ..quench import UhlmannQuench
from ..spin_half import chi
from . import tables
from .config import (
    AnalysisConfig,
    GridConfig,
    OutputConfig,
    RunConfig,
    SpinScenarioConfig,
)

log = logging.getLogger(__name__)

THREADS_ENV = "UHLQUENCH_THREADS"
FIGURE1_TEMPERATURES = (1.0, 0.01)
FIGURE1_T_MAX = 60.0
FIGURE1_DT = 0.01


@dataclass
class RunResult:
    config: RunConfig
    trajectory: list[dict]
    events: list[dict]
    cyclic: list[dict]
    tau: float | None


def _row(sample, is_cyclic=False, theta_u=None) -> dict:
    return {
        "t": sample.t,
        "re_G": sample.G.real,
        "im_G": sample.G.imag,
        "abs_G": sample.abs_G,
        "theta_G": tables.angle(sample.theta_G) if sample.phase_defined else None,
        "r": sample.r,
        "is_cyclic": bool(is_cyclic),
        "theta_U": tables.angle(theta_u),
    }


def compute_run(config: RunConfig) -> RunResult:
    """Pure computation; raises RankDeficientError / CyclicityError unchanged."""
    scenario = config.scenario.build()
    quench = UhlmannQuench(scenario, config.integrator.step, config.integrator.method)
    grid, analysis = config.grid, config.analysis
    samples = gdqpt.scan_trajectory(quench, grid.t_max, grid.dt)

    events = []
    if analysis.detect_gdqpt:
        events = gdqpt.detect_phase_jumps(samples, gdqpt.find_critical_times(samples, quench))

    cyclic, tau = [], None
    if analysis.cyclic_n_max > 0:
        tau = scenario.period()
        n_fit = int(math.floor(grid.t_max / tau * (1 + 1e-12)))
        n_max = min(analysis.cyclic_n_max, n_fit)
        if n_max < analysis.cyclic_n_max:
            log.info("cyclic_n_max clipped to %d (t_max=%g, tau=%g)", n_max, grid.t_max, tau)
        cyclic = gdqpt.cyclic_samples(quench, n_max, events)

    rows = {round(s.t / grid.dt): _row(s) for s in samples}
    extra = []
    for c in cyclic:
        k = c.t / grid.dt
        if abs(k - round(k)) < 1e-9 and round(k) in rows:
            rows[round(k)].update(is_cyclic=True, theta_U=tables.angle(c.theta_U))
        else:
            extra.append(_row(quench.sample(c.t), True, c.theta_U))
    for e in events:
        extra.append(_row(quench.sample(e.t_star)))
    trajectory = sorted(list(rows.values()) + extra, key=lambda r: r["t"])

    event_rows = [
        {"n": e.index, "t_star": e.t_star, "jump": tables.angle(e.jump), "abs_G": e.abs_G, "anomalous": e.anomalous}
        for e in events
    ]
    cyclic_rows = [
        {
            "n": c.n,
            "t": c.t,
            "theta_U": tables.angle(c.theta_U),
            "crossings_before": c.crossings_before,
            "class": gdqpt.classify_topology(c).value,
        }
        for c in cyclic
    ]
    return RunResult(config, trajectory, event_rows, cyclic_rows, tau)


def write_run(result: RunResult, output: OutputConfig | None = None) -> list[Path]:
    out = output or result.config.output
    if out.format == "json":
        text = tables.json_text(
            {"trajectory": result.trajectory, "events": result.events, "cyclic": result.cyclic}
        )
        path = out.path / "run.json"
        tables.atomic_write(path, text)
        return [path]
    files = [
        (out.path / "trajectory.csv", tables.TRAJECTORY_COLUMNS, result.trajectory),
        (out.path / "events.csv", tables.EVENT_COLUMNS, result.events),
        (out.path / "cyclic.csv", tables.CYCLIC_COLUMNS, result.cyclic),
    ]
    texts = [(p, tables.csv_text(cols, rows)) for p, cols, rows in files]
    for p, text in texts:
        tables.atomic_write(p, text)
    return [p for p, _ in texts]


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            log.warning("ignoring %s=%r", THREADS_ENV, raw)
    return min(4, os.cpu_count() or 1)


def run_many(configs: list[RunConfig]) -> list[RunResult]:
    """Independent scenarios in parallel; results keep the input order."""
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(compute_run, configs))


def figure1_configs(out_dir: Path, t_max: float = FIGURE1_T_MAX, dt: float = FIGURE1_DT, fmt: str = "csv"):
    configs = []
    for temp in FIGURE1_TEMPERATURES:
        n_max = int(math.floor(t_max / (2 * math.pi) * (1 + 1e-12)))
        configs.append(
            RunConfig(
                SpinScenarioConfig(temperature=temp),
                GridConfig(t_max, dt),
                OutputConfig(Path(out_dir) / f"T{temp:g}", fmt),
                AnalysisConfig(True, n_max),
            )
        )
    return configs


def sweep_configs(base: RunConfig, temperatures, thetas=None) -> list[RunConfig]:
    if not isinstance(base.scenario, SpinScenarioConfig):
        raise TypeError("temperature sweeps need a spin-1/2 scenario")
    thetas = [base.scenario.theta] if not thetas else list(thetas)
    out = []
    k = 0
    for theta in thetas:
        for temp in temperatures:
            sc = replace(base.scenario, temperature=float(temp), theta=float(theta))
            outp = replace(base.output, path=base.output.path / f"scenario_{k:03d}")
            out.append(replace(base, scenario=sc, output=outp))
            k += 1
    return out


SWEEP_COLUMNS = ("index", "temperature", "theta", "chi", "n_events", "first_t_star", "min_abs_G")


def sweep_summary(results: list[RunResult]) -> list[dict]:
    rows = []
    for k, res in enumerate(results):
        sc = res.config.scenario
        rows.append(
            {
                "index": k,
                "temperature": sc.temperature,
                "theta": sc.theta,
                "chi": chi(sc.params()),
                "n_events": len(res.events),
                "first_t_star": res.events[0]["t_star"] if res.events else None,
                "min_abs_G": min(r["abs_G"] for r in res.trajectory),
            }
        )
    return rows
