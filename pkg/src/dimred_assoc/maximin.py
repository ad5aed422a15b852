"""Association-quality reduction maps: maximin ascent over quadratic-form ratios.

For a received track ``j`` every rival track ``i`` contributes a ratio

    f_i(z) = (z^T Y_i z) / (z^T S_i z),   Y_i = d_i d_i^T,  d_i = y2(i) - y2(j),
                                          S_i = R2(i) + R2(j),

and the map ``psi_j = z^T`` is chosen to push up the smallest of them. Only
agent-2 data enters, so the map can be computed before transmission.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .assignment import projected_md
from .estimates import NumericalError, ReductionMap, TrackSet, spd_solve


class ScenarioError(ValueError):
    """Input tracks violate the separation assumptions the optimizer needs."""


@dataclass(frozen=True)
class RatioObjective:
    """One ratio ``f_i``; ``y_hat`` is the agent-2 mean difference for rival ``index_i``."""

    y_hat: np.ndarray
    s_hat: np.ndarray
    index_i: int = 0

    @property
    def y_outer(self) -> np.ndarray:
        return np.outer(self.y_hat, self.y_hat)


@dataclass(frozen=True)
class StepBounds:
    alpha_low: float = 1e-3
    alpha_high: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha_low < self.alpha_high:
            raise ValueError(
                f"need 0 < alpha_low < alpha_high, got {self.alpha_low}, {self.alpha_high}")


@dataclass(frozen=True)
class OptimizerState:
    z: np.ndarray
    k: int
    f_values: tuple[float, ...]
    i_min: int
    alpha_history: tuple[float, ...] = ()
    f_min_history: tuple[float, ...] = ()

    @property
    def f_min(self) -> float:
        return min(self.f_values)


@dataclass(frozen=True)
class MomentPrediction:
    mean: float
    variance: float
    noncentrality: float
    dof: int


def ratio_eval(obj: RatioObjective, z: np.ndarray) -> float:
    z = np.asarray(z, dtype=float)
    if not np.any(z):
        raise ValueError("ratio undefined at z = 0")
    return float((obj.y_hat @ z) ** 2 / (z @ obj.s_hat @ z))


def ratio_argmax(obj: RatioObjective) -> tuple[np.ndarray, float]:
    """Maximizer of a single rank-one ratio.

    The pencil ``(y y^T, S)`` has one positive eigenvalue ``y^T S^-1 y`` with
    eigenvector ``S^-1 y``; the vector is returned with unit norm and that sign.
    """
    w = spd_solve(obj.s_hat, obj.y_hat)
    lam = float(obj.y_hat @ w)
    norm = np.linalg.norm(w)
    if norm == 0.0:
        return w, 0.0
    return w / norm, lam


def ratio_slope(obj: RatioObjective, z: np.ndarray, u: np.ndarray) -> float:
    """Directional derivative of ``f`` at ``z`` along ``u``."""
    sz = obj.s_hat @ z
    zsz = z @ sz
    f = (obj.y_hat @ z) ** 2 / zsz
    return float(2.0 * ((u @ obj.y_hat) * (obj.y_hat @ z) - f * (u @ sz)) / zsz)


def ratio_linearize(obj: RatioObjective, z: np.ndarray, u: np.ndarray, alpha: float) -> float:
    """First-order model ``f(z) + 2 alpha u^T (Y - f(z) S) z / (z^T S z)``."""
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    return ratio_eval(obj, z) + alpha * ratio_slope(obj, z, u)


def worst_index(objs: Sequence[RatioObjective], z: np.ndarray) -> int:
    """Position in ``objs`` of the smallest ratio at ``z`` (first one on ties)."""
    if not objs:
        raise ValueError("no objectives")
    return int(np.argmin([ratio_eval(o, z) for o in objs]))


# -- vectorized core -----------------------------------------------------------

def _initial_from_stack(stack: "_Stack") -> np.ndarray:
    if np.any(stack.lam <= 0.0):
        raise ScenarioError("coincident agent-2 means: a rival ratio is identically zero")
    z0 = (stack.u / stack.lam[:, None]).sum(axis=0)
    norm = np.linalg.norm(z0)
    if norm < 1e-12:
        # weights cancelled; start from the hardest rival instead
        z0 = stack.u[int(np.argmin(stack.lam))]
        norm = np.linalg.norm(z0)
    return z0 / norm


class _Stack:
    """All objectives of one track as arrays, so each iteration is a few einsums."""

    def __init__(self, objs: Sequence[RatioObjective]):
        self.y = np.stack([o.y_hat for o in objs])
        self.s = np.stack([o.s_hat for o in objs])
        dirs, lams = zip(*(ratio_argmax(o) for o in objs))
        self.u = np.stack(dirs)
        self.lam = np.array(lams)

    def values(self, z):
        sz = self.s @ z
        zsz = sz @ z
        yz = self.y @ z
        return yz * yz / zsz, yz, sz, zsz

    def slopes(self, z, u):
        f, yz, sz, zsz = self.values(z)
        return f, 2.0 * ((self.y @ u) * yz - f * (sz @ u)) / zsz


def _crossings(f: np.ndarray, g: np.ndarray, i_min: int) -> np.ndarray:
    """Steps at which each rival's linear model meets the worst one's."""
    den = g - g[i_min]
    mask = np.abs(den) > 1e-14 * max(1.0, float(np.max(np.abs(g))))
    mask[i_min] = False
    return (f[i_min] - f[mask]) / den[mask]


def _candidate_step(f: np.ndarray, g: np.ndarray, i_min: int, bounds: StepBounds) -> float:
    return select_step_from_candidates(_crossings(f, g, i_min), g[i_min], bounds)


def select_step_from_candidates(candidates: Sequence[float], ascent_slope: float,
                                bounds: StepBounds) -> float:
    """Pick a step from the crossing candidates.

    Only candidates whose sign raises the worst ratio's linear model qualify;
    of those the one closest to zero wins.
    """
    cands = np.asarray(candidates, dtype=float)
    admissible = cands[cands * ascent_slope > 0.0]
    if admissible.size == 0:
        return (1.0 if ascent_slope >= 0 else -1.0) * bounds.alpha_high
    alpha = admissible[np.argmin(np.abs(admissible))]
    mag = min(max(abs(alpha), bounds.alpha_low), bounds.alpha_high)
    return float(np.copysign(mag, alpha))


def select_step(objs: Sequence[RatioObjective], z: np.ndarray, i_min: int,
                bounds: StepBounds) -> float:
    """Adaptive step along the worst objective's maximizer.

    Each rival's linear model is intersected with the worst one's; the
    smallest crossing on the ascent side is taken, clipped in magnitude to
    ``[alpha_low, alpha_high]``. Without an admissible crossing the step is
    ``alpha_high`` in the ascent direction.
    """
    stack = _Stack(objs)
    z = np.asarray(z, dtype=float)
    f, g = stack.slopes(z, stack.u[i_min])
    return _candidate_step(f, g, i_min, bounds)


StepRule = Callable[[int, np.ndarray, np.ndarray, int], float]


def adaptive_rule(bounds: StepBounds) -> StepRule:
    def rule(k, f, g, i_min):
        return _candidate_step(f, g, i_min, bounds)
    return rule


def fixed_rule(alpha: float) -> StepRule:
    mag = abs(alpha)

    def rule(k, f, g, i_min):
        return mag if g[i_min] >= 0.0 else -mag
    return rule


def initial_iterate(objs: Sequence[RatioObjective]) -> np.ndarray:
    """Normalized sum of the per-rival maximizers weighted by ``1 / lambda_i``."""
    return _initial_from_stack(_Stack(objs))


def maximin_iterate(objs: Sequence[RatioObjective], z0: np.ndarray, k_max: int,
                    rule: StepRule) -> list[OptimizerState]:
    """Run ``k_max`` maximin steps from ``z0``; returns states ``k = 0..k_max``."""
    stack = _Stack(objs)
    z = np.asarray(z0, dtype=float)
    z = z / np.linalg.norm(z)
    f = stack.values(z)[0]
    states = [OptimizerState(z, 0, tuple(f.tolist()), int(np.argmin(f)))]
    alphas: list[float] = []
    fmins: list[float] = []
    for k in range(1, k_max + 1):
        i_min = int(np.argmin(f))
        u = stack.u[i_min]
        f, g = stack.slopes(z, u)
        alpha = rule(k, f, g, i_min)
        z = z + alpha * u
        nz = np.linalg.norm(z)
        if not nz > 0.0:
            raise NumericalError("iterate collapsed to zero")
        z = z / nz
        f = stack.values(z)[0]
        alphas.append(float(alpha))
        fmins.append(float(f.min()))
        states.append(OptimizerState(z, k, tuple(f.tolist()), int(np.argmin(f)),
                                     tuple(alphas), tuple(fmins)))
    return states


def rival_objectives(s2: TrackSet, j: int) -> list[RatioObjective]:
    if len(s2) < 2:
        raise ScenarioError("need at least two tracks")
    if not 0 <= j < len(s2):
        raise IndexError(f"track index {j} out of range")
    means, covs = s2.means, s2.covs
    objs = []
    for i in range(len(s2)):
        if i == j:
            continue
        d = means[i] - means[j]
        if not np.any(d):
            raise ScenarioError(f"agent-2 tracks {i} and {j} have identical means")
        objs.append(RatioObjective(d, covs[i] + covs[j], i))
    return objs


def association_optimal_reduction(s2: TrackSet, j: int, bounds: StepBounds = StepBounds(),
                                  k_max: int = 25) -> tuple[ReductionMap, list[OptimizerState]]:
    objs = rival_objectives(s2, j)
    states = maximin_iterate(objs, initial_iterate(objs), k_max, adaptive_rule(bounds))
    return ReductionMap(states[-1].z[None, :]), states


def fixed_step_reduction(s2: TrackSet, j: int, alpha: float,
                         k_max: int = 25) -> tuple[ReductionMap, list[OptimizerState]]:
    objs = rival_objectives(s2, j)
    states = maximin_iterate(objs, initial_iterate(objs), k_max, fixed_rule(alpha))
    return ReductionMap(states[-1].z[None, :]), states


def association_optimal_maps(s2: TrackSet, bounds: StepBounds = StepBounds(),
                             k_max: int = 25) -> list[ReductionMap]:
    """Adaptive-step maps for every track of ``s2`` at once.

    Same iteration as :func:`association_optimal_reduction`, batched over the
    received tracks and without keeping traces.
    """
    n_tracks = len(s2)
    if n_tracks < 2:
        raise ScenarioError("need at least two tracks")
    means, covs = s2.means, s2.covs
    rivals = np.array([[i for i in range(n_tracks) if i != j] for j in range(n_tracks)])
    rows = np.arange(n_tracks)
    d = means[rivals] - means[:, None]
    s = covs[rivals] + covs[:, None]
    if np.any(np.all(d == 0.0, axis=-1)):
        raise ScenarioError("coincident agent-2 means: a rival ratio is identically zero")
    w = np.linalg.solve(s, d[..., None])[..., 0]
    lam = np.einsum("jka,jka->jk", d, w)
    if np.any(lam <= 0.0):
        raise ScenarioError("coincident agent-2 means: a rival ratio is identically zero")
    u = w / np.linalg.norm(w, axis=-1, keepdims=True)
    z = (u / lam[..., None]).sum(axis=1)
    norm = np.linalg.norm(z, axis=-1)
    cancelled = norm < 1e-12
    if np.any(cancelled):
        z[cancelled] = u[cancelled, np.argmin(lam[cancelled], axis=1)]
        norm = np.linalg.norm(z, axis=-1)
    z = z / norm[:, None]

    for _ in range(k_max):
        sz = np.einsum("jkab,jb->jka", s, z)
        zsz = np.einsum("jka,ja->jk", sz, z)
        yz = np.einsum("jka,ja->jk", d, z)
        f = yz * yz / zsz
        i_min = np.argmin(f, axis=1)
        step_dir = u[rows, i_min]
        yu = np.einsum("jka,ja->jk", d, step_dir)
        szu = np.einsum("jka,ja->jk", sz, step_dir)
        g = 2.0 * (yu * yz - f * szu) / zsz
        g_min = g[rows, i_min]
        f_min = f[rows, i_min]
        den = g - g_min[:, None]
        tol = 1e-14 * np.maximum(1.0, np.abs(g).max(axis=1))
        valid = np.abs(den) > tol[:, None]
        valid[rows, i_min] = False
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(valid, (f_min[:, None] - f) / den, 0.0)
        admissible = valid & (cand * g_min[:, None] > 0.0)
        best = np.where(admissible, np.abs(cand), np.inf).min(axis=1)
        ascent = np.where(g_min >= 0.0, 1.0, -1.0)
        mag = np.where(np.isfinite(best),
                       np.clip(best, bounds.alpha_low, bounds.alpha_high), bounds.alpha_high)
        z = z + (ascent * mag)[:, None] * step_dir
        z = z / np.linalg.norm(z, axis=-1, keepdims=True)
    return [ReductionMap(row[None, :]) for row in z]


def predict_moments(x_diff: np.ndarray, s: np.ndarray, rmap: ReductionMap) -> MomentPrediction:
    """Mean and variance of a reduced squared MD whose residual is N(x_diff, s).

    The statistic is noncentral chi-squared with ``m`` degrees of freedom and
    noncentrality ``x^T psi^T (psi s psi^T)^-1 psi x``.
    """
    x_diff = np.asarray(x_diff, dtype=float)
    s = np.asarray(s, dtype=float)
    if x_diff.shape != (rmap.n,) or s.shape != (rmap.n, rmap.n):
        raise ValueError("dimensions of x_diff, s and map disagree")
    nu = projected_md(x_diff, s, rmap.psi)
    m = rmap.m
    return MomentPrediction(m + nu, 2.0 * m + 4.0 * nu, nu, m)
