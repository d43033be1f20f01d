"""Tangent spaces of the associator variety, 2-cocycles and Hochschild coboundaries.

A bilinear map ``f`` is stored like a product: ``f(x_i, x_j) = sum_k f[i, j, k] x_k``.
The same tensor serves as a tangent vector ``v`` at a point ``alpha`` and as the
2-cochain ``f_v``; ``tangent_operator(A) @ v.ravel()`` is exactly minus the
cocycle expression of ``f_v`` on basis triples, so both conditions cut out the
same space.

Coboundary convention: ``(dG)(a, b) = a G(b) + G(a) b - G(ab)``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .algebra import DEFAULT_TOL, StructureConstants, as_algebra, associator_residual
from .errors import InputError, PreconditionError
from .linalg import nullspace, pinv_solve, tolerant_rank


def _bilinear(A: StructureConstants, f, name: str = "f") -> np.ndarray:
    f = np.asarray(f.alpha if isinstance(f, StructureConstants) else f, dtype=float)
    if f.shape != (A.n,) * 3:
        raise InputError(f"{name} must have shape {(A.n,) * 3}, got {f.shape}")
    return f


def _endomorphism(A: StructureConstants, G) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if G.shape != (A.n, A.n):
        raise InputError(f"endomorphism must be {A.n}x{A.n}, got {G.shape}")
    return G


def tangent_operator(A: StructureConstants) -> np.ndarray:
    """Jacobian of the associator map at ``alpha``, shape ``(n^4, n^3)``.

    Row ``(i, j, k, m)`` and column ``(a, b, c)`` are raveled in C order, so
    ``M @ v.ravel()`` gives the linearized associator of direction ``v``.
    """
    A = as_algebra(A)
    n, al = A.n, A.alpha
    I = np.eye(n)
    M = (
        np.einsum("ija,bk,cm->ijkmabc", al, I, I)    # alpha_ij^l v_lk^m
        + np.einsum("ai,bj,ckm->ijkmabc", I, I, al)  # alpha_lk^m v_ij^l
        - np.einsum("aj,bk,icm->ijkmabc", I, I, al)  # alpha_il^m v_jk^l
        - np.einsum("ai,jkb,cm->ijkmabc", I, al, I)  # alpha_jk^l v_il^m
    )
    return M.reshape(n**4, n**3)


def _check_associative(A: StructureConstants, tol: float) -> None:
    res = associator_residual(A).max_abs
    if res > tol:
        raise PreconditionError(f"algebra is not associative: residual {res:.3e} > tol {tol:.3e}")


def z2_dimension(A: StructureConstants, tol: float = DEFAULT_TOL) -> int:
    """Dimension of the space of 2-cocycles (= tangent space of the variety).

    Rank uses :func:`algbundle.linalg.tolerant_rank`, so the answer is stable
    under perturbations far below ``tol``.
    """
    A = as_algebra(A)
    _check_associative(A, tol)
    return A.n**3 - tolerant_rank(tangent_operator(A), tol)


def cocycle_tensor(A: StructureConstants, f) -> np.ndarray:
    """``D[i,j,k,m]``: coefficient of ``x_m`` in
    ``x_i f(x_j,x_k) - f(x_i x_j, x_k) + f(x_i, x_j x_k) - f(x_i,x_j) x_k``."""
    A = as_algebra(A)
    f = _bilinear(A, f)
    al = A.alpha
    return (
        np.einsum("jkl,ilm->ijkm", f, al)
        - np.einsum("ijl,lkm->ijkm", al, f)
        + np.einsum("jkl,ilm->ijkm", al, f)
        - np.einsum("ijl,lkm->ijkm", f, al)
    )


def cocycle_defect(A: StructureConstants, f) -> float:
    """Max-abs violation of the cocycle identity over basis triples."""
    return float(np.abs(cocycle_tensor(A, f)).max())


def coboundary_matrix(A: StructureConstants) -> np.ndarray:
    """Matrix ``C`` of shape ``(n^3, n^2)`` with ``C @ G.ravel() == coboundary(A, G).ravel()``."""
    A = as_algebra(A)
    n, al = A.n, A.alpha
    I = np.eye(n)
    # G[p, q] is the x_p coefficient of G(x_q)
    C = (
        np.einsum("apc,qb->abcpq", al, I)     # a G(b)
        + np.einsum("pbc,qa->abcpq", al, I)   # G(a) b
        - np.einsum("abq,pc->abcpq", al, I)   # G(ab)
    )
    return C.reshape(n**3, n**2)


def coboundary(A: StructureConstants, G) -> np.ndarray:
    A = as_algebra(A)
    G = _endomorphism(A, G)
    al = A.alpha
    return (
        np.einsum("apc,pb->abc", al, G)
        + np.einsum("pa,pbc->abc", G, al)
        - np.einsum("abq,cq->abc", al, G)
    )


class CoboundarySolution(NamedTuple):
    G: np.ndarray
    residual: float


def coboundary_solve(A: StructureConstants, f, rtol: float | None = None) -> CoboundarySolution:
    """Minimal-norm ``G`` minimizing ``||coboundary(A, G) - f||_F``.

    ``G`` is determined only modulo derivations; the minimal-norm representative
    is returned. A zero residual means ``f`` is a coboundary.
    """
    A = as_algebra(A)
    f = _bilinear(A, f)
    C = coboundary_matrix(A)
    g = pinv_solve(C, f.ravel(), rtol)
    G = g.reshape(A.n, A.n)
    residual = float(np.linalg.norm(C @ g - f.ravel()))
    return CoboundarySolution(G, residual)


def derivations(A: StructureConstants, rtol: float | None = None) -> np.ndarray:
    """Basis of derivations (kernel of the coboundary map), shape ``(k, n, n)``."""
    A = as_algebra(A)
    N = nullspace(coboundary_matrix(A), rtol)
    return N.T.reshape(-1, A.n, A.n)
