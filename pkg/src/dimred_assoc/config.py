"""YAML run configuration.

Every key is optional; an empty file yields the defaults below. Unknown keys
are rejected so typos do not silently fall back to defaults::

    seed: 1
    runs: 1000
    c_grid: [0.1, 0.2, ..., 5.0]
    k_max: 25
    m: 1
    methods: [Full, FusionOpt, AssocOpt]
    bounds: {alpha_low: 0.001, alpha_high: 0.5}
    scenario:
      N: 10
      n: 6
      positions: [[0, 0], [1, 10], ...]     # plot units, (px, py)
      position_scale: 3.5
      cov_seed: 24
      cov_scale: null                       # null -> 1/n
    motivating: {grid_step: 1.0}
    realization_demo: {seeds: [5, 0]}
    optimizer_trace: {seed: 5, N: 3, n: 4, j: null}
    lap: {costs: [[0.11, 0.01], [0.01, 0.11]]}
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .maximin import StepBounds
from .simulation import (DEFAULT_C_GRID, DEFAULT_POSITIONS, DEMO_SEEDS, TRACE_SEED, McConfig,
                         Method, ScenarioError, ScenarioSpec, generate_scenario)


class ConfigError(ValueError):
    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


@dataclass(frozen=True)
class TraceSpec:
    seed: int = TRACE_SEED
    n_tracks: int = 3
    n: int = 4
    j: int | None = None


@dataclass(frozen=True)
class RunConfig:
    mc: McConfig = field(default_factory=McConfig)
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    grid_step: float = 1.0
    demo_seeds: tuple[int, int] = DEMO_SEEDS
    trace: TraceSpec = field(default_factory=TraceSpec)
    lap_costs: tuple[tuple[float, ...], ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.mc.seed,
            "runs": self.mc.runs,
            "c_grid": list(self.mc.c_grid),
            "k_max": self.mc.k_max,
            "m": self.mc.m,
            "methods": [m.value for m in self.mc.methods],
            "bounds": {"alpha_low": self.mc.bounds.alpha_low,
                       "alpha_high": self.mc.bounds.alpha_high},
            "scenario": {
                "N": self.scenario.n_tracks,
                "n": self.scenario.n,
                "positions": [list(p) for p in self.scenario.positions],
                "position_scale": self.scenario.position_scale,
                "cov_seed": self.scenario.cov_seed,
                "cov_scale": self.scenario.cov_scale,
            },
            "motivating": {"grid_step": self.grid_step},
            "realization_demo": {"seeds": list(self.demo_seeds)},
            "optimizer_trace": {"seed": self.trace.seed, "N": self.trace.n_tracks,
                                "n": self.trace.n, "j": self.trace.j},
            "lap": {"costs": None if self.lap_costs is None
                    else [list(r) for r in self.lap_costs]},
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


_TOP_KEYS = {"seed", "runs", "c_grid", "k_max", "m", "methods", "bounds", "scenario",
             "motivating", "realization_demo", "optimizer_trace", "lap"}
_SECTION_KEYS = {
    "bounds": {"alpha_low", "alpha_high"},
    "scenario": {"N", "n", "positions", "position_scale", "cov_seed", "cov_scale"},
    "motivating": {"grid_step"},
    "realization_demo": {"seeds"},
    "optimizer_trace": {"seed", "N", "n", "j"},
    "lap": {"costs"},
}


def _check_keys(section: dict, allowed: set[str], prefix: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        names = ", ".join(f"{prefix}{k}" for k in unknown)
        raise ConfigError(f"unknown field(s): {names}")


def _number(value, name: str, kind=float):
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", name)
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected {kind.__name__}, got {value!r}", name) from None
    if kind is int and isinstance(value, float) and value != out:
        raise ConfigError(f"expected an integer, got {value!r}", name)
    return out


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError("expected a mapping", name)
    _check_keys(sec, _SECTION_KEYS[name], f"{name}.")
    return sec


def from_mapping(raw: dict | None) -> RunConfig:
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("top level of the config must be a mapping")
    _check_keys(raw, _TOP_KEYS, "")

    seed = _number(raw.get("seed", 1), "seed", int)
    runs = _number(raw.get("runs", 1000), "runs", int)
    if runs < 1:
        raise ConfigError("must be at least 1", "runs")
    c_grid = raw.get("c_grid", list(DEFAULT_C_GRID))
    if not isinstance(c_grid, list) or not c_grid:
        raise ConfigError("expected a nonempty list", "c_grid")
    c_grid = tuple(_number(c, "c_grid") for c in c_grid)
    if any(c <= 0 for c in c_grid):
        raise ConfigError("values must be positive", "c_grid")
    if any(b <= a for a, b in zip(c_grid, c_grid[1:])):
        raise ConfigError("values must be strictly ascending", "c_grid")
    k_max = _number(raw.get("k_max", 25), "k_max", int)
    if k_max < 0:
        raise ConfigError("must be nonnegative", "k_max")
    m = _number(raw.get("m", 1), "m", int)
    methods_raw = raw.get("methods", [meth.value for meth in Method])
    if not isinstance(methods_raw, list) or not methods_raw:
        raise ConfigError("expected a nonempty list", "methods")
    try:
        methods = tuple(dict.fromkeys(Method.parse(str(x)) for x in methods_raw))
    except ValueError as exc:
        raise ConfigError(str(exc), "methods") from None

    b = _section(raw, "bounds")
    try:
        bounds = StepBounds(_number(b.get("alpha_low", 1e-3), "bounds.alpha_low"),
                            _number(b.get("alpha_high", 0.5), "bounds.alpha_high"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "bounds") from None

    sc = _section(raw, "scenario")
    n = _number(sc.get("n", 6), "scenario.n", int)
    if n < 2:
        raise ConfigError("must be at least 2", "scenario.n")
    if not 1 <= m < n:
        raise ConfigError(f"must satisfy 1 <= m < n = {n}", "m")
    if m != 1 and Method.ASSOC_OPT in methods:
        raise ConfigError("AssocOpt supports m = 1 only", "m")
    if "positions" in sc:
        pos = sc["positions"]
        if not isinstance(pos, list) or not all(isinstance(p, list) and len(p) == 2 for p in pos):
            raise ConfigError("expected a list of [x, y] pairs", "scenario.positions")
        positions = tuple((_number(p[0], "scenario.positions"),
                           _number(p[1], "scenario.positions")) for p in pos)
        if "N" in sc and _number(sc["N"], "scenario.N", int) != len(positions):
            raise ConfigError("does not match the number of positions", "scenario.N")
    else:
        n_targets = _number(sc.get("N", len(DEFAULT_POSITIONS)), "scenario.N", int)
        if not 2 <= n_targets <= len(DEFAULT_POSITIONS):
            raise ConfigError(f"without explicit positions N must lie in "
                              f"[2, {len(DEFAULT_POSITIONS)}]", "scenario.N")
        positions = DEFAULT_POSITIONS[:n_targets]
    if len(positions) < 2:
        raise ConfigError("need at least two targets", "scenario.positions")
    cov_scale = sc.get("cov_scale")
    if cov_scale is not None:
        cov_scale = _number(cov_scale, "scenario.cov_scale")
        if cov_scale <= 0:
            raise ConfigError("must be positive", "scenario.cov_scale")
    position_scale = _number(sc.get("position_scale", 3.5), "scenario.position_scale")
    if position_scale <= 0:
        raise ConfigError("must be positive", "scenario.position_scale")
    scenario = ScenarioSpec(positions=positions, n=n, m=m,
                            cov_seed=_number(sc.get("cov_seed", 24), "scenario.cov_seed", int),
                            cov_scale=cov_scale, position_scale=position_scale)
    try:
        generate_scenario(scenario)
    except (ScenarioError, ValueError) as exc:
        raise ConfigError(str(exc), "scenario") from None

    mot = _section(raw, "motivating")
    grid_step = _number(mot.get("grid_step", 1.0), "motivating.grid_step")
    if not 0 < grid_step <= 180:
        raise ConfigError("must lie in (0, 180]", "motivating.grid_step")

    demo = _section(raw, "realization_demo")
    seeds = demo.get("seeds", list(DEMO_SEEDS))
    if not isinstance(seeds, list) or len(seeds) != 2:
        raise ConfigError("expected two seeds", "realization_demo.seeds")
    demo_seeds = tuple(_number(s, "realization_demo.seeds", int) for s in seeds)

    tr = _section(raw, "optimizer_trace")
    trace = TraceSpec(
        seed=_number(tr.get("seed", TRACE_SEED), "optimizer_trace.seed", int),
        n_tracks=_number(tr.get("N", 3), "optimizer_trace.N", int),
        n=_number(tr.get("n", 4), "optimizer_trace.n", int),
        j=None if tr.get("j") is None else _number(tr["j"], "optimizer_trace.j", int),
    )
    if trace.n_tracks < 2:
        raise ConfigError("must be at least 2", "optimizer_trace.N")
    if trace.n < 2:
        raise ConfigError("must be at least 2", "optimizer_trace.n")
    if trace.j is not None and not 1 <= trace.j <= trace.n_tracks:
        raise ConfigError("1-based track index out of range", "optimizer_trace.j")

    lap = _section(raw, "lap")
    lap_costs = None
    if lap.get("costs") is not None:
        costs = lap["costs"]
        if (not isinstance(costs, list) or not costs
                or not all(isinstance(r, list) and len(r) == len(costs) for r in costs)):
            raise ConfigError("expected a square list of rows", "lap.costs")
        lap_costs = tuple(tuple(_number(x, "lap.costs") for x in r) for r in costs)
        if any(x < 0 for r in lap_costs for x in r):
            raise ConfigError("costs must be nonnegative", "lap.costs")

    mc = McConfig(runs=runs, c_grid=c_grid, seed=seed, bounds=bounds, k_max=k_max,
                  methods=methods, m=m)
    return RunConfig(mc, scenario, grid_step, demo_seeds, trace, lap_costs)


def parse_config(path: str | Path | None) -> RunConfig:
    """Load and validate a YAML config; ``None`` gives all defaults."""
    if path is None:
        return from_mapping({})
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML parse error{where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from None
    return from_mapping(raw)
