"""Numerical rank, nullspace and pseudo-inverse with one shared threshold rule.

A singular value ``s`` counts as zero when ``s <= rtol * s_max``. The default
relative tolerance is ``max(M.shape) * eps``, the usual numerical-rank rule.
"""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps


def default_rtol(shape) -> float:
    return max(shape) * EPS if len(shape) else EPS


def _cutoff(s: np.ndarray, shape, rtol: float | None) -> float:
    if rtol is None:
        rtol = default_rtol(shape)
    smax = s[0] if s.size else 0.0
    return rtol * smax


def numerical_rank(M: np.ndarray, rtol: float | None = None, atol: float = 0.0) -> int:
    """Count singular values above ``max(rtol * s_max, atol)``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > max(_cutoff(s, M.shape, rtol), atol)))


def tolerant_rank(M: np.ndarray, tol: float) -> int:
    """Rank for tolerance-driven decisions: zero means ``<= tol * max(1, s_max)``.

    Perturbations well below ``tol`` do not change the answer, and a matrix
    whose entries are all rounding noise has rank 0.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    cut = max(default_rtol(M.shape) * s[0], tol * max(1.0, s[0]))
    return int(np.sum(s > cut))


def nullspace(M: np.ndarray, rtol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the numerical nullspace, one vector per column."""
    M = np.asarray(M, dtype=float)
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(ncols)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(ncols)
    r = int(np.sum(s > _cutoff(s, M.shape, rtol)))
    return vh[r:].T.copy()


def pinv_solve(M: np.ndarray, b: np.ndarray, rtol: float | None = None) -> np.ndarray:
    """Minimal-norm least-squares solution of ``M x = b``."""
    M = np.asarray(M, dtype=float)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(M.shape[1])
    keep = s > _cutoff(s, M.shape, rtol)
    coeff = (u[:, keep].T @ b) / s[keep]
    return vh[keep].T @ coeff
