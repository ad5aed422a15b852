"""Fusion-optimal reduction maps from a generalized eigenvalue problem."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .estimates import MAX_CONDITION, NumericalError, ReductionMap, check_spd


@dataclass(frozen=True)
class GevoSolution:
    """Eigenpairs of ``Q z = lambda S z``; columns of ``eigenvectors`` satisfy
    ``Z^T S Z = I`` and eigenvalues ascend."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def gen_eig_spd(q: np.ndarray, s: np.ndarray) -> GevoSolution:
    """Solve the symmetric-definite pencil by reducing with ``S = L L^T``.

    ``L^-1 Q L^-T`` is an ordinary symmetric matrix; its eigenvectors ``y``
    map back through ``z = L^-T y``.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    s = np.atleast_2d(np.asarray(s, dtype=float))
    if q.shape != s.shape:
        raise ValueError(f"shape mismatch {q.shape} vs {s.shape}")
    try:
        check_spd(s, "S")
    except ValueError as exc:
        raise NumericalError(str(exc)) from exc
    if np.linalg.cond(s) > MAX_CONDITION:
        raise NumericalError("S is too badly conditioned")
    chol = np.linalg.cholesky(s)
    tmp = scipy.linalg.solve_triangular(chol, q, lower=True)
    c = scipy.linalg.solve_triangular(chol, tmp.T, lower=True)
    c = 0.5 * (c + c.T)
    w, y = np.linalg.eigh(c)
    z = scipy.linalg.solve_triangular(chol.T, y, lower=False)
    return GevoSolution(w, z)


def canonical_sign(psi: np.ndarray) -> np.ndarray:
    """Flip rows so that the first entry that is not ~0 is positive."""
    psi = np.array(psi, dtype=float)
    for row in psi:
        scale = np.max(np.abs(row))
        nz = np.flatnonzero(np.abs(row) > 1e-12 * scale)
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return psi


def fusion_optimal_reduction(r1: np.ndarray, r2: np.ndarray, m: int) -> ReductionMap:
    """Reduction map minimizing the Kalman-fused MSE for one track.

    Takes the dominant m generalized eigenvectors of ``(R1^2, R1 + R2)``,
    orthonormalizes their span and rotates it so ``psi R2 psi^T`` is diagonal.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    n = r1.shape[0]
    if not 1 <= m < n:
        raise ValueError(f"m must satisfy 1 <= m < n={n}, got {m}")
    sol = gen_eig_spd(r1 @ r1, r1 + r2)
    top = sol.eigenvectors[:, ::-1][:, :m]
    basis, _ = np.linalg.qr(top)
    reduced = basis.T @ r2 @ basis
    _, rot = np.linalg.eigh(0.5 * (reduced + reduced.T))
    psi = rot.T @ basis.T
    return ReductionMap(canonical_sign(psi))


def fusion_ratio(psi_row: np.ndarray, r1: np.ndarray, r2: np.ndarray) -> float:
    """Trace reduction delivered by a single row: ``psi R1^2 psi^T / psi (R1+R2) psi^T``."""
    psi_row = np.ravel(psi_row)
    return float(psi_row @ r1 @ r1 @ psi_row / (psi_row @ (r1 + r2) @ psi_row))
