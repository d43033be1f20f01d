"""Finite-dimensional real algebras given by structure constants.

An algebra of dimension ``n`` with basis ``x_1..x_n`` is stored as a dense
tensor ``alpha`` with ``x_i x_j = sum_k alpha[i, j, k] x_k``. Indices are
0-based in code; everything user-facing (docs, error messages) is 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InputError
from .linalg import default_rtol

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StructureConstants:
    """Immutable ``n x n x n`` structure-constant tensor."""

    alpha: np.ndarray

    def __post_init__(self):
        try:
            a = np.array(self.alpha, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"structure constants are not numeric: {exc}") from None
        if a.ndim != 3 or a.shape[0] < 1 or not (a.shape[0] == a.shape[1] == a.shape[2]):
            raise InputError(f"structure constants must have shape (n, n, n), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("structure constants contain non-finite entries")
        a.flags.writeable = False
        object.__setattr__(self, "alpha", a)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    def __repr__(self):
        return f"StructureConstants(n={self.n})"

    def scaled(self, lam: float) -> "StructureConstants":
        return StructureConstants(lam * self.alpha)

    def same_as(self, other: "StructureConstants") -> bool:
        """Bit-exact equality of the tensors."""
        return self.alpha.shape == other.alpha.shape and bool(np.array_equal(self.alpha, other.alpha))


def as_algebra(A) -> StructureConstants:
    if isinstance(A, StructureConstants):
        return A
    return StructureConstants(A)


def _vector(u, n: int, name: str) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (n,):
        raise InputError(f"{name} must be a vector of length {n}, got shape {u.shape}")
    return u


def basis_vector(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


def multiply(A: StructureConstants, u, v) -> np.ndarray:
    """Product ``u * v`` with coordinates ``w_k = sum_ij u_i v_j alpha_ij^k``."""
    A = as_algebra(A)
    u = _vector(u, A.n, "u")
    v = _vector(v, A.n, "v")
    return np.einsum("i,j,ijk->k", u, v, A.alpha)


def left_multiplications(A: StructureConstants) -> np.ndarray:
    """Stack ``L[a]`` of left-multiplication matrices, ``L[a][k, j] = alpha_aj^k``."""
    return np.transpose(as_algebra(A).alpha, (0, 2, 1))


class Residual(NamedTuple):
    tensor: np.ndarray
    frobenius_norm: float
    max_abs: float


def associator_tensor(alpha: np.ndarray) -> np.ndarray:
    """``R[i,j,k,m]``: the ``x_m`` coefficient of ``(x_i x_j) x_k - x_i (x_j x_k)``."""
    left = np.einsum("ijl,lkm->ijkm", alpha, alpha)
    right = np.einsum("ilm,jkl->ijkm", alpha, alpha)
    return left - right


def associator_residual(A: StructureConstants) -> Residual:
    A = as_algebra(A)
    R = associator_tensor(A.alpha)
    return Residual(R, float(np.linalg.norm(R)), float(np.abs(R).max()))


def is_associative(A: StructureConstants, tol: float = DEFAULT_TOL) -> bool:
    return associator_residual(A).max_abs <= tol


def unit_system(A: StructureConstants) -> tuple[np.ndarray, np.ndarray]:
    """Linear system ``M e = b`` stating that ``e`` is a two-sided unit.

    Rows ``(j, k)`` of the first block encode ``e x_j = x_j``, the second block
    ``x_j e = x_j``.
    """
    A = as_algebra(A)
    n = A.n
    left = np.transpose(A.alpha, (1, 2, 0)).reshape(n * n, n)   # sum_i e_i alpha_ij^k
    right = np.transpose(A.alpha, (0, 2, 1)).reshape(n * n, n)  # sum_i e_i alpha_ji^k
    ident = np.eye(n).reshape(n * n)
    return np.vstack([left, right]), np.concatenate([ident, ident])


def find_unit(A: StructureConstants, tol: float = DEFAULT_TOL) -> np.ndarray | None:
    """Two-sided unit of ``A``, or ``None`` when no vector satisfies the unit
    equations to within ``tol`` (max-abs equation residual)."""
    M, b = unit_system(A)
    e, *_ = np.linalg.lstsq(M, b, rcond=default_rtol(M.shape))
    if np.abs(M @ e - b).max() > tol:
        return None
    return e


def change_basis(A: StructureConstants, g) -> StructureConstants:
    """Transport the product along ``g``: the tensor of ``g mu(g^-1 ., g^-1 .)``."""
    A = as_algebra(A)
    g = np.asarray(g, dtype=float)
    if g.shape != (A.n, A.n):
        raise InputError(f"basis change must be {A.n}x{A.n}, got {g.shape}")
    gi = np.linalg.inv(g)
    return StructureConstants(np.einsum("ia,jb,ijc,kc->abk", gi, gi, A.alpha, g))


# -- generators ---------------------------------------------------------------


def _positive(n) -> int:
    if int(n) != n or n < 1:
        raise InputError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def gen_truncated(n: int) -> StructureConstants:
    """Cyclic rule ``x_i x_j = x_k`` with ``k = i + j mod n`` (residue 0 read as n).

    This is the group algebra of ``Z/n`` with ``x_n`` as unit.
    """
    n = _positive(n)
    alpha = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            alpha[i, j, (i + j + 1) % n] = 1.0
    return StructureConstants(alpha)


def gen_polynomial(n: int) -> StructureConstants:
    """``R[x]/(x^n)`` in the basis ``1, x, ..., x^(n-1)`` (no wraparound)."""
    n = _positive(n)
    alpha = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n - i):
            alpha[i, j, i + j] = 1.0
    return StructureConstants(alpha)


def gen_gh(n: int, g: Sequence[float], h: Sequence[float]) -> StructureConstants:
    """Rank-one product ``alpha_ij^k = g(k) h(i) h(j)``."""
    n = _positive(n)
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    if g.shape != (n,) or h.shape != (n,):
        raise InputError(f"g and h must both have length {n}, got {g.shape} and {h.shape}")
    return StructureConstants(np.einsum("i,j,k->ijk", h, h, g))


def gh_default(n: int) -> StructureConstants:
    """``g(k) = k``, ``h(j) = (-1)^j`` (1-based)."""
    n = _positive(n)
    k = np.arange(1, n + 1)
    return gen_gh(n, k.astype(float), (-1.0) ** k)


def gen_quadratic(c: float) -> StructureConstants:
    """``R[x]/(x^2 - c)`` in the basis ``{1, x}``.

    ``c > 0`` is split (``R + R``), ``c = 0`` the dual numbers, ``c < 0`` the
    complex numbers viewed over the reals.
    """
    alpha = np.zeros((2, 2, 2))
    alpha[0, 0, 0] = 1.0
    alpha[0, 1, 1] = alpha[1, 0, 1] = 1.0
    alpha[1, 1, 0] = float(c)
    return StructureConstants(alpha)


def gen_diagonal(n: int) -> StructureConstants:
    """``R^n`` with componentwise product (orthogonal idempotents)."""
    n = _positive(n)
    alpha = np.zeros((n, n, n))
    for i in range(n):
        alpha[i, i, i] = 1.0
    return StructureConstants(alpha)


def gen_zero(n: int) -> StructureConstants:
    n = _positive(n)
    return StructureConstants(np.zeros((n, n, n)))
