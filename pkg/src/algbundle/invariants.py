"""Isomorphism invariants and a numerical isomorphism search.

``iso_signature`` collects basis-independent data of an associative algebra; two
algebras with different signatures are not isomorphic. Equal signatures prove
nothing (the invariants are incomplete). ``try_isomorphism`` returns an explicit
certificate when it finds one; failing to find one is inconclusive.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    StructureConstants,
    as_algebra,
    associator_residual,
    change_basis,
    find_unit,
    left_multiplications,
)
from .cohomology import coboundary_matrix, z2_dimension
from .errors import InputError, PreconditionError
from .linalg import pinv_solve, tolerant_rank


@dataclass(frozen=True)
class IsoSignature:
    dim: int
    commutative: bool
    unital: bool
    trace_form_signature: tuple[int, int, int]
    z2_dim: int
    center_dim: int

    def key(self) -> tuple:
        return (
            self.dim,
            self.commutative,
            self.unital,
            self.trace_form_signature,
            self.z2_dim,
            self.center_dim,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trace_form_signature"] = list(self.trace_form_signature)
        return d


def trace_form(A: StructureConstants) -> np.ndarray:
    """Symmetric matrix ``T[a, b] = trace(L_a L_b)``."""
    L = left_multiplications(A)
    return np.einsum("akj,bjk->ab", L, L)


def trace_form_signature(A: StructureConstants, tol: float = DEFAULT_TOL) -> tuple[int, int, int]:
    ev = np.linalg.eigvalsh(trace_form(A))
    pos = int(np.sum(ev > tol))
    neg = int(np.sum(ev < -tol))
    return pos, neg, len(ev) - pos - neg


def center_dimension(A: StructureConstants, tol: float = DEFAULT_TOL) -> int:
    """Dimension of ``{c : x c = c x for all x}``."""
    A = as_algebra(A)
    n = A.n
    # rows (a, k): sum_j c_j (alpha_aj^k - alpha_ja^k)
    comm = A.alpha - np.transpose(A.alpha, (1, 0, 2))
    M = np.transpose(comm, (0, 2, 1)).reshape(n * n, n)
    return n - tolerant_rank(M, tol)


def iso_signature(A: StructureConstants, tol: float = DEFAULT_TOL) -> IsoSignature:
    A = as_algebra(A)
    res = associator_residual(A).max_abs
    if res > tol:
        raise PreconditionError(f"algebra is not associative: residual {res:.3e} > tol {tol:.3e}")
    al = A.alpha
    return IsoSignature(
        dim=A.n,
        commutative=bool(np.abs(al - np.transpose(al, (1, 0, 2))).max() <= tol),
        unital=find_unit(A, tol) is not None,
        trace_form_signature=trace_form_signature(A, tol),
        z2_dim=z2_dimension(A, tol),
        center_dim=center_dimension(A, tol),
    )


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix from QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def isomorphism_objective(A: StructureConstants, B: StructureConstants, g) -> float:
    """``|| g mu_A(g^-1 ., g^-1 .) - mu_B ||_F``."""
    return float(np.linalg.norm(change_basis(A, g).alpha - B.alpha))


def _gauss_newton(A, B, g, tol, max_iter):
    target = B.alpha.ravel()
    obj = isomorphism_objective(A, B, g)
    for _ in range(max_iter):
        # overshoot tol so the reverse check on g^-1 has room
        if obj <= 1e-3 * tol:
            break
        Bg = change_basis(A, g)
        # T((I + K) g) = Bg - d_Bg K + O(K^2)
        K = pinv_solve(coboundary_matrix(Bg), Bg.alpha.ravel() - target).reshape(A.n, A.n)
        step = 1.0
        while step > 1e-6:
            cand = (np.eye(A.n) + step * K) @ g
            if np.linalg.cond(cand) < 1e12:
                new = isomorphism_objective(A, B, cand)
                if new < obj:
                    g, obj = cand, new
                    break
            step *= 0.5
        else:
            break
    return g, obj


def try_isomorphism(
    A: StructureConstants,
    B: StructureConstants,
    attempts: int = 10,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    max_iter: int = 100,
) -> np.ndarray | None:
    """Search for invertible ``g`` with ``g mu_A(g^-1 ., g^-1 .) = mu_B``.

    Gauss-Newton in the right-invariant chart ``g <- (I + K) g``, whose
    linearization is the Hochschild coboundary of the current transported
    product. The identity is tried first, then ``attempts`` random orthogonal
    starts. Returns ``g`` when both ``g`` (A to B) and ``g^-1`` (B to A) reach
    objective ``tol``, otherwise ``None``; ``None`` does not prove the algebras
    are non-isomorphic.
    """
    A = as_algebra(A)
    B = as_algebra(B)
    if A.n != B.n:
        raise InputError(f"dimension mismatch: {A.n} vs {B.n}")
    for X, name in ((A, "A"), (B, "B")):
        res = associator_residual(X).max_abs
        if res > tol:
            raise PreconditionError(f"{name} is not associative: residual {res:.3e} > tol {tol:.3e}")
    rng = np.random.default_rng(seed)
    starts = [np.eye(A.n)] + [random_orthogonal(A.n, rng) for _ in range(int(attempts))]
    for g0 in starts:
        g, obj = _gauss_newton(A, B, g0, tol, max_iter)
        # the reverse check rejects escapes to infinity toward a degenerate
        # algebra in B's orbit closure (e.g. g = lambda I sends mu to mu / lambda)
        if obj <= tol and isomorphism_objective(B, A, np.linalg.inv(g)) <= tol:
            return g
    return None
