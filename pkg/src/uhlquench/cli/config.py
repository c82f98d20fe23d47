"""Run configuration: TOML (or JSON) files parsed into frozen dataclasses.

Example::

    [scenario]              # spin-1/2 preset
    omega0 = 1.0
    temperature = 1.0       # units of omega0; inf means beta = 0
    theta = 1.5707963267948966
    phi = 0.0

    [grid]
    t_max = 20.0
    dt = 0.01

    [output]
    path = "out/run"
    format = "csv"          # or "json"

    [analysis]
    detect_gdqpt = true
    cyclic_n_max = 3

A generic scenario replaces the spin keys by ``beta`` and the matrices ``H0``
and ``H``. Each is a list of rows; an entry may be a real, an ``[re, im]``
pair or a string such as ``"0.5-1j"``. An optional ``period`` pins the cycle
time.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import ConfigError
from ..quench import QuenchScenario
from ..spin_half import SpinHalfParams, scenario as spin_scenario

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class SpinScenarioConfig:
    omega0: float = 1.0
    temperature: float = 1.0
    theta: float = math.pi / 2
    phi: float = 0.0

    def params(self) -> SpinHalfParams:
        return SpinHalfParams(self.omega0, self.temperature, self.theta, self.phi)

    def build(self) -> QuenchScenario:
        return spin_scenario(self.params())


@dataclass(frozen=True, eq=False)
class MatrixScenarioConfig:
    H0: np.ndarray
    H: np.ndarray
    beta: float
    period: float | None = None

    def build(self) -> QuenchScenario:
        return QuenchScenario(self.H0, self.H, self.beta, period_hint=self.period)


ScenarioConfig = Union[SpinScenarioConfig, MatrixScenarioConfig]


@dataclass(frozen=True)
class GridConfig:
    t_max: float
    dt: float


@dataclass(frozen=True)
class OutputConfig:
    path: Path
    format: str = "csv"


@dataclass(frozen=True)
class AnalysisConfig:
    detect_gdqpt: bool = True
    cyclic_n_max: int = 0


@dataclass(frozen=True)
class IntegratorConfig:
    step: float | None = None
    method: str = "magnus4"


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    grid: GridConfig
    output: OutputConfig
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)


def _number(table: dict, key: str, default=None, *, positive=False, allow_inf=False) -> float:
    if key not in table:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {v!r}")
    v = float(v)
    if math.isnan(v) or (math.isinf(v) and not allow_inf):
        raise ConfigError(f"{key!r} must be finite, got {v}")
    if positive and not v > 0:
        raise ConfigError(f"{key!r} must be positive, got {v}")
    return v


def _entry(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in x
    ):
        return complex(x[0], x[1])
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ConfigError(f"matrix entry must be a number, a [re, im] pair or a 're+imj' string, got {x!r}")


def parse_matrix(rows, name: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{name} must be a list of rows")
    d = len(rows)
    if any(len(r) != d for r in rows):
        raise ConfigError(f"{name} must be square")
    m = np.array([[_entry(x) for x in r] for r in rows], dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ConfigError(f"{name} has non-finite entries")
    return m


def parse_scenario(table: dict) -> ScenarioConfig:
    if not isinstance(table, dict):
        raise ConfigError("[scenario] must be a table")
    if "H" in table or "H0" in table:
        if "H" not in table or "H0" not in table:
            raise ConfigError("generic scenario needs both H0 and H")
        beta = _number(table, "beta")
        if beta < 0:
            raise ConfigError("beta must be non-negative")
        period = _number(table, "period", positive=True) if "period" in table else None
        h0, h = parse_matrix(table["H0"], "H0"), parse_matrix(table["H"], "H")
        if h0.shape != h.shape:
            raise ConfigError(f"H0 is {h0.shape[0]}x{h0.shape[0]} but H is {h.shape[0]}x{h.shape[0]}")
        return MatrixScenarioConfig(h0, h, beta, period)
    return SpinScenarioConfig(
        omega0=_number(table, "omega0", 1.0, positive=True),
        temperature=_number(table, "temperature", positive=True, allow_inf=True),
        theta=_number(table, "theta", math.pi / 2),
        phi=_number(table, "phi", 0.0),
    )


def parse_grid(table: dict) -> GridConfig:
    t_max = _number(table, "t_max", positive=True)
    dt = _number(table, "dt", positive=True)
    if dt >= t_max:
        raise ConfigError(f"dt={dt} must be smaller than t_max={t_max}")
    return GridConfig(t_max, dt)


def parse_output(table: dict, default_path: Path | None = None) -> OutputConfig:
    path = table.get("path", str(default_path) if default_path else None)
    if not isinstance(path, str) or not path:
        raise ConfigError("[output] needs a non-empty 'path'")
    fmt = table.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output format must be 'csv' or 'json', got {fmt!r}")
    return OutputConfig(Path(path), fmt)


def parse_run_config(data: dict, default_output: Path | None = None) -> RunConfig:
    try:
        scenario = parse_scenario(data["scenario"])
        grid = parse_grid(data["grid"])
    except KeyError as exc:
        raise ConfigError(f"missing section [{exc.args[0]}]") from None
    output = parse_output(data.get("output", {}), default_output)
    an = data.get("analysis", {})
    detect = an.get("detect_gdqpt", True)
    if not isinstance(detect, bool):
        raise ConfigError("detect_gdqpt must be a boolean")
    n_max = an.get("cyclic_n_max", 0)
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 0:
        raise ConfigError("cyclic_n_max must be a non-negative integer")
    integ = data.get("integrator", {})
    step = _number(integ, "step", positive=True) if "step" in integ else None
    method = integ.get("method", "magnus4")
    if method not in ("magnus4", "midpoint"):
        raise ConfigError(f"unknown integrator method {method!r}")
    return RunConfig(scenario, grid, output, AnalysisConfig(detect, n_max), IntegratorConfig(step, method))


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix == ".json":
            return json.loads(raw)
        return tomllib.loads(raw.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


def load_run_config(path) -> RunConfig:
    return parse_run_config(read_config_file(path))
