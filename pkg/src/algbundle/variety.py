"""The associator variety as the zero set of the associator map.

``F(alpha)`` is the raveled associator tensor, a map ``R^(n^3) -> R^(n^4)``
whose Jacobian is :func:`algbundle.cohomology.tangent_operator`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DEFAULT_TOL, StructureConstants, as_algebra, associator_tensor
from .cohomology import tangent_operator
from .errors import InputError, PreconditionError
from .linalg import pinv_solve

DIVERGENCE_STEP = 1e6


@dataclass(frozen=True)
class ProjectionReport:
    point: StructureConstants
    iterations: int
    final_residual: float
    step_norms: list[float] = field(default_factory=list)
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "n": self.point.n,
            "alpha": self.point.alpha.tolist(),
            "iterations": self.iterations,
            "final_residual": self.final_residual,
            "step_norms": list(self.step_norms),
            "converged": self.converged,
        }


def project_to_variety(
    start: StructureConstants,
    tol: float = DEFAULT_TOL,
    max_iter: int = 50,
    normalize: bool = True,
    rtol: float | None = None,
) -> ProjectionReport:
    """Gauss-Newton ``alpha <- alpha - pinv(J) F(alpha)`` until ``max|F| <= tol``.

    With ``normalize`` every iterate is rescaled to the Frobenius norm of
    ``start``, which keeps the iteration off the excluded zero solution.
    Divergence is reported through ``converged=False``.
    """
    start = as_algebra(start)
    if tol <= 0:
        raise InputError("tol must be positive")
    alpha = start.alpha.copy()
    scale = float(np.linalg.norm(alpha))
    if normalize and scale == 0.0:
        raise InputError("cannot normalize the zero tensor; pass normalize=False")

    steps: list[float] = []
    if scale == 0.0:
        return ProjectionReport(start, 0, 0.0, steps, True)
    residual = float(np.abs(associator_tensor(alpha)).max())
    it = 0
    while residual > tol and it < max_iter:
        J = tangent_operator(StructureConstants(alpha))
        # J alpha = 2 F(alpha): remove the scaling direction, otherwise every step
        # is ~alpha/2 and the iteration just shrinks toward zero
        radial = alpha.ravel() / np.linalg.norm(alpha)
        J = J - np.outer(J @ radial, radial)
        delta = pinv_solve(J, associator_tensor(alpha).ravel(), rtol).reshape(alpha.shape)
        step = float(np.linalg.norm(delta))
        steps.append(step)
        it += 1
        if not np.isfinite(step) or step > DIVERGENCE_STEP:
            break
        alpha = alpha - delta
        if normalize:
            alpha *= scale / np.linalg.norm(alpha)
        residual = float(np.abs(associator_tensor(alpha)).max())

    ok = bool(np.all(np.isfinite(alpha))) and residual <= tol
    point = StructureConstants(alpha) if np.all(np.isfinite(alpha)) else start
    return ProjectionReport(point, it, residual, steps, ok)


def embed(A: StructureConstants) -> StructureConstants:
    """Zero-pad to dimension ``n + 1``: ``A`` becomes ``A + 0`` with the new
    basis vector annihilating everything."""
    A = as_algebra(A)
    n = A.n
    out = np.zeros((n + 1,) * 3)
    out[:n, :n, :n] = A.alpha
    return StructureConstants(out)


def restrict(A: StructureConstants, tol: float = DEFAULT_TOL) -> StructureConstants:
    """Inverse of :func:`embed` on its image: drop the last basis vector.

    Raises PreconditionError if some entry touching the last index exceeds ``tol``.
    """
    A = as_algebra(A)
    n = A.n
    if n < 2:
        raise PreconditionError("cannot restrict a 1-dimensional algebra")
    mask = np.ones(A.alpha.shape, dtype=bool)
    mask[: n - 1, : n - 1, : n - 1] = False
    outside = np.where(mask, np.abs(A.alpha), 0.0)
    worst = np.unravel_index(np.argmax(outside), outside.shape)
    if outside[worst] > tol:
        i, j, k = (int(x) + 1 for x in worst)
        raise PreconditionError(
            f"entry alpha_{i}{j}^{k} = {float(A.alpha[worst])!r} touches index {n} "
            f"and exceeds tol {tol:.3e}"
        )
    return StructureConstants(A.alpha[: n - 1, : n - 1, : n - 1].copy())
