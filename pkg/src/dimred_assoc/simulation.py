"""Scenarios, noise realizations and the Monte Carlo evaluation harness.

State ordering for the tracking scenarios is ``(px, py, vx, vy, ax, ay)``;
the two position coordinates come first.

Random numbers come from numpy's counter-based ``Philox`` bit generator. Run
``r`` of a sweep with seed ``s`` draws from ``SeedSequence([s, r])``, so any
run can be regenerated in isolation and the reduction over runs is ordered.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .assignment import (Assignment, AssignmentMatrix, build_full_matrix,
                         build_reduced_matrix, count_incorrect, solve_lap)
from .estimates import ReductionMap, TrackSet, kalman_fuse, reduce_trackset
from .gevo import fusion_optimal_reduction
from .maximin import (ScenarioError, StepBounds, association_optimal_maps,
                      fixed_rule, adaptive_rule, initial_iterate, maximin_iterate,
                      rival_objectives)

DEFAULT_POSITIONS = (
    (0.0, 0.0), (1.0, 10.0), (5.0, 5.0), (6.0, 12.0), (9.0, 8.0),
    (11.0, 4.0), (3.0, -1.0), (8.0, -1.0), (-2.0, 8.0), (-3.0, 3.0),
)
DEFAULT_C_GRID = tuple(round(0.1 * k, 1) for k in range(1, 51))


class Method(str, enum.Enum):
    FULL = "Full"
    FUSION_OPT = "FusionOpt"
    ASSOC_OPT = "AssocOpt"

    @classmethod
    def parse(cls, name: str) -> "Method":
        key = name.replace("-", "").replace("_", "").lower()
        for method in cls:
            if method.value.lower() == key:
                return method
        raise ValueError(f"unknown method {name!r}; expected one of "
                         f"{[m.value for m in cls]}")


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *stream])))


@dataclass(frozen=True)
class Scenario:
    targets: np.ndarray
    cov1: np.ndarray
    cov2: np.ndarray
    m: int = 1

    def __post_init__(self):
        targets = np.atleast_2d(np.array(self.targets, dtype=float))
        cov1 = np.array(self.cov1, dtype=float)
        cov2 = np.array(self.cov2, dtype=float)
        n_tracks, n = targets.shape
        for name, cov in (("cov1", cov1), ("cov2", cov2)):
            if cov.shape != (n_tracks, n, n):
                raise ValueError(f"{name} must have shape {(n_tracks, n, n)}, got {cov.shape}")
            if np.max(np.abs(cov - np.swapaxes(cov, 1, 2))) > 1e-10:
                raise ValueError(f"{name} has asymmetric entries")
            if np.min(np.linalg.eigvalsh(cov)) <= 0:
                raise ValueError(f"{name} has a covariance that is not positive definite")
        if not 1 <= self.m <= n:
            raise ValueError(f"m={self.m} out of range for n={n}")
        for a in range(n_tracks):
            for b in range(a + 1, n_tracks):
                if np.array_equal(targets[a], targets[b]):
                    raise ScenarioError(f"targets {a} and {b} coincide")
        for arr in (targets, cov1, cov2):
            arr.setflags(write=False)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "cov1", cov1)
        object.__setattr__(self, "cov2", cov2)

    @property
    def n_tracks(self) -> int:
        return self.targets.shape[0]

    @property
    def n(self) -> int:
        return self.targets.shape[1]


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for the default tracking scenario.

    Target positions are given in plot units and multiplied by
    ``position_scale``. Each covariance is ``scale * (G G^T + 0.1 I)`` with
    ``G`` standard normal, drawn once from ``cov_seed``; ``scale`` defaults to
    ``1/n`` so the diagonal is of order one. With the defaults the full-state
    association is error free up to ``c = 5`` while single-row reductions are
    not.
    """

    positions: tuple[tuple[float, float], ...] = DEFAULT_POSITIONS
    n: int = 6
    m: int = 1
    cov_seed: int = 24
    cov_scale: float | None = None
    position_scale: float = 3.5

    @property
    def n_tracks(self) -> int:
        return len(self.positions)


def random_spd(rng: np.random.Generator, n: int, scale: float, floor: float = 0.1) -> np.ndarray:
    g = rng.standard_normal((n, n))
    r = scale * (g @ g.T + floor * np.eye(n))
    return 0.5 * (r + r.T)


def generate_scenario(spec: ScenarioSpec = ScenarioSpec()) -> Scenario:
    pos = np.array(spec.positions, dtype=float) * spec.position_scale
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ValueError("positions must be a list of (x, y) pairs")
    if spec.n < 2:
        raise ValueError("state dimension must include two position coordinates")
    if len({tuple(p) for p in pos.tolist()}) != len(pos):
        raise ScenarioError("duplicate target positions")
    n_tracks = len(pos)
    targets = np.zeros((n_tracks, spec.n))
    targets[:, :2] = pos
    scale = 1.0 / spec.n if spec.cov_scale is None else spec.cov_scale
    rng = make_rng(spec.cov_seed)
    cov1 = np.stack([random_spd(rng, spec.n, scale) for _ in range(n_tracks)])
    cov2 = np.stack([random_spd(rng, spec.n, scale) for _ in range(n_tracks)])
    return Scenario(targets, cov1, cov2, spec.m)


def spatial_scaling(n: int, c: float) -> np.ndarray:
    if not c > 0:
        raise ValueError(f"scaling factor must be positive, got {c}")
    d = np.ones(n)
    d[:2] = math.sqrt(c)
    return d


def scale_spatial(s: Scenario, c: float) -> Scenario:
    """Scale both position variances (and their correlations) by ``c``."""
    d = spatial_scaling(s.n, c)
    dd = np.outer(d, d)
    return replace(s, cov1=s.cov1 * dd, cov2=s.cov2 * dd)


def realize(s: Scenario, noise1: np.ndarray, noise2: np.ndarray) -> tuple[TrackSet, TrackSet]:
    """Track sets ``y = x + L w`` from standard-normal draws ``w``."""
    l1 = np.linalg.cholesky(s.cov1)
    l2 = np.linalg.cholesky(s.cov2)
    y1 = s.targets + np.einsum("kij,kj->ki", l1, noise1)
    y2 = s.targets + np.einsum("kij,kj->ki", l2, noise2)
    return (TrackSet.from_arrays(y1, s.cov1, agent_id=1),
            TrackSet.from_arrays(y2, s.cov2, agent_id=2))


def sample_realization(s: Scenario, rng: np.random.Generator) -> tuple[TrackSet, TrackSet]:
    w = rng.standard_normal((2, s.n_tracks, s.n))
    return realize(s, w[0], w[1])


# -- single evaluation ------------------------------------------------------------

@dataclass(frozen=True)
class RunParams:
    m: int = 1
    bounds: StepBounds = StepBounds()
    k_max: int = 25
    fusion_maps: tuple[ReductionMap, ...] | None = None


def fusion_optimal_maps(s1: TrackSet, s2: TrackSet, m: int = 1) -> list[ReductionMap]:
    return [fusion_optimal_reduction(a.cov, b.cov, m) for a, b in zip(s1, s2)]


def reduction_maps(s1: TrackSet, s2: TrackSet, method: Method,
                   params: RunParams = RunParams()) -> list[ReductionMap] | None:
    if method is Method.FULL:
        return None
    if method is Method.FUSION_OPT:
        if params.fusion_maps is not None:
            return list(params.fusion_maps)
        return fusion_optimal_maps(s1, s2, params.m)
    if params.m != 1:
        raise ValueError("association-optimal reduction supports m = 1 only")
    return association_optimal_maps(s2, params.bounds, params.k_max)


def associate(s1: TrackSet, s2: TrackSet, method: Method,
              params: RunParams = RunParams()) -> tuple[AssignmentMatrix, Assignment]:
    maps = reduction_maps(s1, s2, method, params)
    if maps is None:
        a = build_full_matrix(s1, s2)
    else:
        a = build_reduced_matrix(s1, reduce_trackset(s2, maps))
    return a, solve_lap(a)


def run_single(s1: TrackSet, s2: TrackSet, method: Method,
               params: RunParams = RunParams()) -> int:
    """Number of agent-2 tracks associated with the wrong local track."""
    return count_incorrect(associate(s1, s2, method, params)[1])


# -- Monte Carlo --------------------------------------------------------------------

@dataclass(frozen=True)
class McConfig:
    runs: int = 1000
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    seed: int = 1
    bounds: StepBounds = StepBounds()
    k_max: int = 25
    methods: tuple[Method, ...] = (Method.FULL, Method.FUSION_OPT, Method.ASSOC_OPT)
    m: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        grid = tuple(float(c) for c in self.c_grid)
        if not grid:
            raise ValueError("c_grid must not be empty")
        if any(c <= 0 for c in grid):
            raise ValueError("c_grid values must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("c_grid must be strictly ascending")
        if not self.methods:
            raise ValueError("at least one method is required")
        if self.k_max < 0:
            raise ValueError("k_max must be nonnegative")
        object.__setattr__(self, "c_grid", grid)
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))


@dataclass(frozen=True)
class McRow:
    method: Method
    c: float
    p_ic_mean: float
    p_ic_std: float
    runs: int


@dataclass(frozen=True)
class McResult:
    rows: tuple[McRow, ...]

    def get(self, method: Method, c: float) -> McRow:
        for row in self.rows:
            if row.method is method and math.isclose(row.c, c, rel_tol=0, abs_tol=1e-12):
                return row
        raise KeyError((method, c))

    def curve(self, method: Method) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = [r for r in self.rows if r.method is method]
        return (np.array([r.c for r in rows]), np.array([r.p_ic_mean for r in rows]),
                np.array([r.p_ic_std for r in rows]))


def mc_counts(cfg: McConfig, s: Scenario) -> dict[tuple[Method, float], np.ndarray]:
    """Incorrect-assignment counts per run, keyed by ``(method, c)``.

    A run reuses the same standard-normal draws for every ``c`` and every
    method, so methods are compared on identical realizations.
    """
    params = RunParams(m=cfg.m, bounds=cfg.bounds, k_max=cfg.k_max)
    scaled = [scale_spatial(s, c) for c in cfg.c_grid]
    fusion_maps = [tuple(fusion_optimal_reduction(r1, r2, cfg.m)
                         for r1, r2 in zip(sc.cov1, sc.cov2)) for sc in scaled]
    counts = {(meth, c): np.zeros(cfg.runs, dtype=int)
              for c in cfg.c_grid for meth in cfg.methods}
    for run in range(cfg.runs):
        w = make_rng(cfg.seed, run).standard_normal((2, s.n_tracks, s.n))
        for c, sc, fmaps in zip(cfg.c_grid, scaled, fusion_maps):
            s1, s2 = realize(sc, w[0], w[1])
            for meth in cfg.methods:
                p = replace(params, fusion_maps=fmaps) if meth is Method.FUSION_OPT else params
                counts[(meth, c)][run] = run_single(s1, s2, meth, p)
    return counts


def mc_sweep(cfg: McConfig, s: Scenario) -> McResult:
    counts = mc_counts(cfg, s)
    rows = []
    for meth in cfg.methods:
        for c in cfg.c_grid:
            frac = counts[(meth, c)] / s.n_tracks
            rows.append(McRow(meth, c, float(frac.mean()), float(frac.std()), cfg.runs))
    return McResult(tuple(rows))


# -- two-target motivating example ------------------------------------------------

MOTIVATING_R1 = np.diag([0.75, 2.0])
MOTIVATING_R2 = np.diag([2.0, 0.75])
MOTIVATING_Y1 = np.array([[-0.5, -1.0], [3.5, 1.0]])
MOTIVATING_Y2 = np.array([[0.0, 1.0], [4.0, -1.0]])


def motivating_tracks() -> tuple[TrackSet, TrackSet]:
    """Two targets seen by both agents; agent 1 is uncertain along y, agent 2 along x.

    Along the vertical direction the projected local estimate of each target
    coincides with the projected remote estimate of the other one.
    """
    s1 = TrackSet.from_arrays(MOTIVATING_Y1, [MOTIVATING_R1] * 2, agent_id=1)
    s2 = TrackSet.from_arrays(MOTIVATING_Y2, [MOTIVATING_R2] * 2, agent_id=2)
    return s1, s2


def angle_map(alpha_deg: float) -> ReductionMap:
    a = math.radians(alpha_deg)
    return ReductionMap(np.array([[math.cos(a), math.sin(a)]]))


@dataclass(frozen=True)
class MotivatingRow:
    alpha_deg: float
    j0: float
    je: float
    trace_p: float


def motivating_example(grid: Iterable[float] = tuple(range(0, 181))) -> list[MotivatingRow]:
    s1, s2 = motivating_tracks()
    rows = []
    for alpha in grid:
        rmap = angle_map(alpha)
        reduced = reduce_trackset(s2, [rmap, rmap])
        a = build_reduced_matrix(s1, reduced).costs
        trace_p = float(np.trace(kalman_fuse(s1[0], reduced[0]).cov))
        rows.append(MotivatingRow(float(alpha), float(a[0, 0] + a[1, 1]),
                                  float(a[0, 1] + a[1, 0]), trace_p))
    return rows


# -- realization randomness demo --------------------------------------------------

DEMO_R1 = np.diag([1.0, 4.0])
DEMO_R2 = np.diag([4.0, 1.0])
DEMO_TARGETS = np.array([[0.0, 0.0], [4.0, 1.0]])
# the two drawn realizations: (agent-1 means, agent-2 means)
DEMO_FIXTURE = (
    (np.array([[-0.5, -0.5], [5.0, 1.25]]), np.array([[-1.0, 0.0], [4.25, 1.75]])),
    (np.array([[-0.25, 1.0], [4.75, 0.0]]), np.array([[-0.5, 0.25], [4.75, 0.75]])),
)
DEMO_SEEDS = (5, 0)


def demo_scenario() -> Scenario:
    return Scenario(DEMO_TARGETS, np.stack([DEMO_R1] * 2), np.stack([DEMO_R2] * 2))


@dataclass(frozen=True)
class DemoOutcome:
    matrix: AssignmentMatrix
    assignment: Assignment
    s1: TrackSet
    s2: TrackSet


def _demo_outcome(s1: TrackSet, s2: TrackSet) -> DemoOutcome:
    # both targets share covariances, hence share the fusion-optimal map
    rmap = fusion_optimal_reduction(DEMO_R1, DEMO_R2, 1)
    a = build_reduced_matrix(s1, reduce_trackset(s2, [rmap, rmap]))
    return DemoOutcome(a, solve_lap(a), s1, s2)


def realization_demo(seeds: tuple[int, int] = DEMO_SEEDS) -> tuple[DemoOutcome, DemoOutcome]:
    """The same two-target scenario under two independent noise draws."""
    s = demo_scenario()
    return tuple(_demo_outcome(*sample_realization(s, make_rng(seed))) for seed in seeds)


def realization_fixture() -> tuple[DemoOutcome, DemoOutcome]:
    """The two hand-placed realizations with rounded costs 0.05/1.01/0.31 and 0.11/0.01."""
    out = []
    for y1, y2 in DEMO_FIXTURE:
        s1 = TrackSet.from_arrays(y1, [DEMO_R1] * 2, agent_id=1)
        s2 = TrackSet.from_arrays(y2, [DEMO_R2] * 2, agent_id=2)
        out.append(_demo_outcome(s1, s2))
    return tuple(out)


# -- optimizer trace comparison ---------------------------------------------------

TRACE_SEED = 5


def trace_tracks(seed: int, n_tracks: int = 3, n: int = 4, spread: float = 3.0) -> TrackSet:
    """Random agent-2 track set for step-size comparisons."""
    rng = make_rng(seed, 0xF4)
    means = spread * rng.standard_normal((n_tracks, n))
    covs = [random_spd(rng, n, 1.0 / n) for _ in range(n_tracks)]
    return TrackSet.from_arrays(means, covs, agent_id=2)


@dataclass(frozen=True)
class TraceRow:
    variant: str
    k: int
    f_min: float
    alpha: float


def optimizer_trace(seed: int = TRACE_SEED, bounds: StepBounds = StepBounds(), k_max: int = 25,
                    n_tracks: int = 3, n: int = 4, j: int | None = None) -> list[TraceRow]:
    """f_min per iteration for adaptive, small fixed and large fixed steps.

    All variants start from the same initial iterate. Row ``k = 0`` holds the
    starting value with ``alpha = 0``.
    """
    s2 = trace_tracks(seed, n_tracks, n)
    j = n_tracks - 1 if j is None else j
    objs = rival_objectives(s2, j)
    z0 = initial_iterate(objs)
    rows = []
    for variant, rule in (("adaptive", adaptive_rule(bounds)),
                          ("fixed_low", fixed_rule(bounds.alpha_low)),
                          ("fixed_high", fixed_rule(bounds.alpha_high))):
        states = maximin_iterate(objs, z0, k_max, rule)
        rows.append(TraceRow(variant, 0, states[0].f_min, 0.0))
        for st in states[1:]:
            rows.append(TraceRow(variant, st.k, st.f_min, st.alpha_history[-1]))
    return rows
