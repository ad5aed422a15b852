"""Assignment matrices of squared Mahalanobis distances and an exact LAP solver.

Cost matrices are indexed ``[i, j]`` with ``i`` an agent-1 track and ``j`` an
agent-2 track (full or reduced). The solver answers, for every agent-2 track
``j``, which agent-1 track it is paired with.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .estimates import (Estimate, NumericalError, ReducedEstimate, ReductionMap,
                        TrackSet, spd_solve)


class MatrixKind(enum.Enum):
    FULL = "Full"
    REDUCED = "Reduced"
    APPROXIMATED = "Approximated"


@dataclass(frozen=True)
class AssignmentMatrix:
    costs: np.ndarray
    kind: MatrixKind = MatrixKind.FULL

    def __post_init__(self):
        costs = np.atleast_2d(np.array(self.costs, dtype=float))
        if costs.ndim != 2 or costs.shape[0] != costs.shape[1]:
            raise ValueError(f"assignment matrix must be square, got {costs.shape}")
        if np.any(costs < 0):
            raise ValueError("assignment costs must be nonnegative")
        costs.setflags(write=False)
        object.__setattr__(self, "costs", costs)

    @property
    def size(self) -> int:
        return self.costs.shape[0]


@dataclass(frozen=True)
class Assignment:
    """``perm[j]`` is the agent-1 track assigned to agent-2 track ``j`` (0-based)."""

    perm: tuple[int, ...]
    cost: float

    @property
    def size(self) -> int:
        return len(self.perm)

    def as_matrix(self) -> np.ndarray:
        """Permutation matrix ``Pi`` with ``trace(Pi @ A) == cost``."""
        n = len(self.perm)
        pi = np.zeros((n, n))
        pi[np.arange(n), self.perm] = 1.0
        return pi


# -- Mahalanobis distances ---------------------------------------------------

def md_full(a: Estimate, b: Estimate) -> float:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.mean - b.mean
    return float(diff @ spd_solve(a.cov + b.cov, diff))


def projected_md(diff: np.ndarray, s: np.ndarray, psi: np.ndarray) -> float:
    """``diff^T psi^T (psi s psi^T)^-1 psi diff``, evaluated as a squared norm."""
    psi = np.atleast_2d(psi)
    proj = psi @ diff
    inner = psi @ s @ psi.T
    inner = 0.5 * (inner + inner.T)
    try:
        chol = np.linalg.cholesky(inner)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("projected covariance is not positive definite") from exc
    w = scipy.linalg.solve_triangular(chol, proj, lower=True)
    return float(w @ w)


def md_reduced(a: Estimate, b_reduced: ReducedEstimate) -> float:
    psi = b_reduced.map.psi
    if psi.shape[1] != a.dim:
        raise ValueError(f"map has {psi.shape[1]} columns, estimate has dimension {a.dim}")
    proj = psi @ a.mean - b_reduced.mean
    inner = psi @ a.cov @ psi.T + b_reduced.cov
    chol = np.linalg.cholesky(0.5 * (inner + inner.T))
    w = scipy.linalg.solve_triangular(chol, proj, lower=True)
    return float(w @ w)


def _batched_md(diff: np.ndarray, s: np.ndarray, psi: np.ndarray | None) -> np.ndarray:
    """Squared MDs for stacked residuals ``diff[..., n]`` and covariances ``s[..., n, n]``.

    ``psi[..., m, n]`` (broadcast against the leading axes) projects first.
    """
    if psi is not None:
        diff = np.einsum("...mn,...n->...m", psi, diff)
        s = psi @ s @ np.swapaxes(psi, -1, -2)
    chol = np.linalg.cholesky(0.5 * (s + np.swapaxes(s, -1, -2)))
    w = np.linalg.solve(chol, diff[..., None])[..., 0]
    return np.einsum("...m,...m->...", w, w)


def build_full_matrix(s1: TrackSet, s2: TrackSet) -> AssignmentMatrix:
    if len(s1) != len(s2) or s1.dim != s2.dim:
        raise ValueError("track sets must have equal size and dimension")
    diff = s1.means[:, None, :] - s2.means[None, :, :]
    s = s1.covs[:, None] + s2.covs[None, :]
    return AssignmentMatrix(_batched_md(diff, s, None), MatrixKind.FULL)


def build_reduced_matrix(s1: TrackSet, reduced: Sequence[ReducedEstimate]) -> AssignmentMatrix:
    """Entry ``(i, j)`` compares local track ``i`` against received track ``j``
    in the subspace of ``j``'s own map."""
    if len(s1) != len(reduced):
        raise ValueError("track sets must have equal size")
    n_tracks = len(s1)
    costs = np.empty((n_tracks, n_tracks))
    for j, rj in enumerate(reduced):
        psi = rj.map.psi
        if psi.shape[1] != s1.dim:
            raise ValueError("reduction map does not match local dimension")
        proj = s1.means @ psi.T - rj.mean[None, :]
        inner = psi @ s1.covs @ psi.T + rj.cov
        chol = np.linalg.cholesky(0.5 * (inner + np.swapaxes(inner, -1, -2)))
        w = np.linalg.solve(chol, proj[..., None])[..., 0]
        costs[:, j] = np.einsum("im,im->i", w, w)
    return AssignmentMatrix(costs, MatrixKind.REDUCED)


def build_approx_matrix(s2: TrackSet, maps: Sequence[ReductionMap]) -> AssignmentMatrix:
    """Agent 2's own prediction of the reduced matrix, using its tracks in place
    of the unknown agent-1 tracks. The diagonal is zero by construction."""
    if len(maps) != len(s2):
        raise ValueError("need one reduction map per track")
    means, covs = s2.means, s2.covs
    n_tracks = len(s2)
    costs = np.zeros((n_tracks, n_tracks))
    for j, rm in enumerate(maps):
        others = [i for i in range(n_tracks) if i != j]
        if not others:
            continue
        diff = means[others] - means[j]
        s = covs[others] + covs[j]
        costs[others, j] = _batched_md(diff, s, rm.psi[None])
    return AssignmentMatrix(costs, MatrixKind.APPROXIMATED)


def nearest_neighbor_consistent(a: AssignmentMatrix) -> bool:
    """True if every column's diagonal entry is strictly its smallest entry,
    which guarantees the identity assignment is the unique optimum."""
    c = a.costs
    off = c + np.diag(np.full(a.size, np.inf))
    return bool(np.all(np.diag(c) < off.min(axis=0)))


# -- linear assignment --------------------------------------------------------

def _shortest_augmenting_path(c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-by-row shortest augmenting path with dual potentials, O(n^3).

    Returns ``(row_to_col, u, v)`` with ``c[i, j] - u[i] - v[j] >= 0`` and
    equality on the returned matching.
    """
    n = c.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # col_owner[j] for 1-based column j; index 0 is the virtual source column
    col_owner = np.zeros(n + 1, dtype=int)
    way = np.zeros(n + 1, dtype=int)
    cost = np.zeros((n + 1, n + 1))
    cost[1:, 1:] = c
    for row in range(1, n + 1):
        col_owner[0] = row
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = col_owner[j0]
            free = ~used
            free[0] = False
            cur = cost[i0] - u[i0] - v
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            cand = np.where(free, minv, np.inf)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            u[col_owner[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if col_owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            col_owner[j0] = col_owner[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=int)
    for j in range(1, n + 1):
        row_to_col[col_owner[j] - 1] = j - 1
    return row_to_col, u[1:], v[1:]


def _lexicographic_matching(tight: np.ndarray, match: np.ndarray) -> np.ndarray:
    """Lexicographically smallest perfect matching inside the tight-edge graph.

    ``match`` must already be a perfect matching using tight edges only.
    """
    n = tight.shape[0]
    match = match.copy()
    owner = np.empty(n, dtype=int)
    owner[match] = np.arange(n)
    fixed_cols = np.zeros(n, dtype=bool)

    def reroute(row, target, seen):
        # find new tight column for ``row``; ``target`` is the single free column
        for col in np.flatnonzero(tight[row]):
            if fixed_cols[col] or seen[col]:
                continue
            seen[col] = True
            if col == target or reroute(owner[col], target, seen):
                match[row] = col
                owner[col] = row
                return True
        return False

    for i in range(n):
        current = match[i]
        for col in np.flatnonzero(tight[i, :current]):
            if fixed_cols[col]:
                continue
            saved_match, saved_owner = match.copy(), owner.copy()
            displaced = owner[col]
            match[i], owner[col] = col, i
            seen = np.zeros(n, dtype=bool)
            seen[col] = True
            fixed_cols[col] = True  # row i now owns it for the search
            ok = reroute(displaced, current, seen)
            fixed_cols[col] = False
            if ok:
                break
            match, owner = saved_match, saved_owner
        fixed_cols[match[i]] = True
    return match


def solve_lap(a: AssignmentMatrix | np.ndarray) -> Assignment:
    """Minimize ``trace(Pi A)`` over permutation matrices.

    Ties between optimal permutations are broken towards the lexicographically
    smallest ``perm`` array.
    """
    costs = a.costs if isinstance(a, AssignmentMatrix) else np.atleast_2d(np.asarray(a, float))
    if costs.ndim != 2 or costs.shape[0] != costs.shape[1]:
        raise ValueError("cost matrix must be square")
    if not np.all(np.isfinite(costs)):
        raise ValueError("cost matrix has non-finite entries")
    n = costs.shape[0]
    if n == 0:
        return Assignment((), 0.0)
    # row r of the transposed problem is agent-2 track r
    ct = costs.T
    match, u, v = _shortest_augmenting_path(ct)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(ct))))
    tight = (ct - u[:, None] - v[None, :]) <= tol
    tight[np.arange(n), match] = True
    perm = _lexicographic_matching(tight, match)
    total = math.fsum(ct[np.arange(n), perm])
    return Assignment(tuple(int(p) for p in perm), total)


def count_incorrect(a: Assignment) -> int:
    return sum(1 for j, i in enumerate(a.perm) if i != j)
