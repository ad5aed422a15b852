"""Track estimates, dimension-reduction maps and the Kalman fuser.

Labels are stored 0-based. Anything that leaves the process (CSV, printed
permutations) is converted to 1-based by the I/O layer.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

SYMMETRY_TOL = 1e-10
RANK_TOL = 1e-12
MAX_CONDITION = 1e12


class NumericalError(ArithmeticError):
    """A matrix that must be inverted is singular or too badly conditioned."""


def _as_matrix(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    return a


def check_spd(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
        raise ValueError(f"{name} is not symmetric")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    if np.linalg.eigvalsh(a)[0] <= 0.0:
        raise ValueError(f"{name} is not positive definite")


def spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` for symmetric positive definite ``a`` via Cholesky.

    Raises NumericalError when ``a`` is not numerically SPD or its condition
    number exceeds 1e12.
    """
    a = _as_matrix(a)
    if a.shape == (1, 1):
        if not a[0, 0] > 0.0:
            raise NumericalError("1x1 matrix is not positive")
        return np.asarray(b, dtype=float) / a[0, 0]
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"Cholesky factorization failed: {exc}") from exc
    diag = np.abs(np.diag(factor[0]))
    # cond(a) = cond(L)^2 >= (max diag / min diag)^2
    if (diag.max() / diag.min()) ** 2 > MAX_CONDITION:
        raise NumericalError("matrix condition number exceeds 1e12")
    return scipy.linalg.cho_solve(factor, b)


def spd_inv(a: np.ndarray) -> np.ndarray:
    a = _as_matrix(a)
    inv = spd_solve(a, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)


@dataclass(frozen=True)
class Estimate:
    """Mean and covariance of one track held by one agent."""

    mean: np.ndarray
    cov: np.ndarray
    label: int = 0

    def __post_init__(self):
        mean = np.atleast_1d(np.array(self.mean, dtype=float))
        cov = _as_matrix(self.cov)
        if mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance shape {cov.shape} does not match mean length {mean.size}")
        check_spd(cov, "covariance")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class TrackSet:
    """The N estimates one agent holds, labelled 0..N-1 in order."""

    estimates: tuple[Estimate, ...]
    agent_id: int = 1

    def __post_init__(self):
        estimates = tuple(self.estimates)
        if not estimates:
            raise ValueError("a track set needs at least one estimate")
        dims = {e.dim for e in estimates}
        if len(dims) != 1:
            raise ValueError(f"estimates have mixed dimensions {sorted(dims)}")
        labels = [e.label for e in estimates]
        if labels != list(range(len(estimates))):
            raise ValueError("labels must be 0..N-1 in order")
        if self.agent_id not in (1, 2):
            raise ValueError("agent_id must be 1 or 2")
        object.__setattr__(self, "estimates", estimates)

    @classmethod
    def from_arrays(cls, means, covs, agent_id: int = 1) -> "TrackSet":
        return cls(tuple(Estimate(m, c, i) for i, (m, c) in enumerate(zip(means, covs))),
                   agent_id)

    def __len__(self) -> int:
        return len(self.estimates)

    def __getitem__(self, i: int) -> Estimate:
        return self.estimates[i]

    def __iter__(self):
        return iter(self.estimates)

    @property
    def dim(self) -> int:
        return self.estimates[0].dim

    @property
    def means(self) -> np.ndarray:
        return np.stack([e.mean for e in self.estimates])

    @property
    def covs(self) -> np.ndarray:
        return np.stack([e.cov for e in self.estimates])


@dataclass(frozen=True)
class ReductionMap:
    """Full row rank ``m x n`` matrix compressing an n-dimensional estimate."""

    psi: np.ndarray

    def __post_init__(self):
        psi = np.atleast_2d(np.array(self.psi, dtype=float))
        if psi.ndim != 2:
            raise ValueError("psi must be a matrix")
        m, n = psi.shape
        if m > n:
            raise ValueError(f"psi has more rows ({m}) than columns ({n})")
        sv = np.linalg.svd(psi, compute_uv=False)
        if sv[-1] <= RANK_TOL * sv[0]:
            raise ValueError("psi is rank deficient")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def m(self) -> int:
        return self.psi.shape[0]

    @property
    def n(self) -> int:
        return self.psi.shape[1]


@dataclass(frozen=True)
class ReducedEstimate:
    mean: np.ndarray
    cov: np.ndarray
    map: ReductionMap
    label: int = 0


@dataclass(frozen=True)
class FusedEstimate:
    mean: np.ndarray
    cov: np.ndarray


def reduce_estimate(e: Estimate, rmap: ReductionMap) -> ReducedEstimate:
    """Compress ``e`` to ``(psi y, psi R psi^T)``."""
    if rmap.n != e.dim:
        raise ValueError(f"map has {rmap.n} columns but estimate has dimension {e.dim}")
    psi = rmap.psi
    cov = psi @ e.cov @ psi.T
    cov = 0.5 * (cov + cov.T)
    return ReducedEstimate(psi @ e.mean, cov, rmap, e.label)


def reduce_trackset(tracks: TrackSet, maps: Sequence[ReductionMap]) -> list[ReducedEstimate]:
    if len(maps) != len(tracks):
        raise ValueError("need one reduction map per track")
    return [reduce_estimate(e, rm) for e, rm in zip(tracks, maps)]


def kalman_fuse(local: Estimate, reduced: ReducedEstimate) -> FusedEstimate:
    """Fuse a full local estimate with an uncorrelated reduced estimate.

    Information form: ``P = (R1^-1 + psi^T R_psi^-1 psi)^-1`` and
    ``x = P (R1^-1 y1 + psi^T R_psi^-1 y_psi)``.
    """
    psi = reduced.map.psi
    if psi.shape[1] != local.dim:
        raise ValueError("reduction map does not match local dimension")
    r1_inv = spd_inv(local.cov)
    rpsi_inv = spd_inv(reduced.cov)
    info = r1_inv + psi.T @ rpsi_inv @ psi
    info_vec = r1_inv @ local.mean + psi.T @ (rpsi_inv @ np.atleast_1d(reduced.mean))
    cov = spd_inv(info)
    cov = 0.5 * (cov + cov.T)
    return FusedEstimate(cov @ info_vec, cov)


def fusion_loss(f: FusedEstimate) -> float:
    return float(np.trace(f.cov))
