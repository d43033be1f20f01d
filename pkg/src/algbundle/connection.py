"""Differential connections and parallel transport for families over an interval.

In the global frame a connection is a matrix field ``Gamma(t)`` acting by
``nabla sigma = sigma' + Gamma sigma``. Expanding the Leibniz rule
``nabla(s1 s2) = s1 nabla(s2) + nabla(s1) s2`` with ``mu_t`` the fiber product:

    mu'(s1, s2) + Gamma mu(s1, s2) - mu(s1, Gamma s2) - mu(Gamma s1, s2) = 0,

i.e. ``mu' = dGamma`` with ``(dG)(a, b) = a G(b) + G(a) b - G(ab)``. So a
differential connection exists at ``t`` exactly when the derivative of the
structure constants is a Hochschild coboundary there, and the least-squares
residual of that equation is the obstruction.

Parallel sections solve ``sigma' = -Gamma sigma``; the transport map ``Phi``
solves ``Phi' = -Gamma Phi``, ``Phi(t0) = I``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .algebra import DEFAULT_TOL, StructureConstants, as_algebra
from .cohomology import CoboundarySolution, coboundary_solve
from .errors import InputError
from .family import AlgebraFamily, BaseGrid, _inside, _map_nodes

INVERTIBLE_COND = 1e12


def _interval_family(F: AlgebraFamily) -> None:
    if F.base.kind != "interval":
        raise InputError(f"connections are defined over interval bases, got {F.base.kind}")


def _step(F: AlgebraFamily, h: float | None) -> float:
    h = F.base.spacing if h is None else float(h)
    if not h > 0:
        raise InputError("finite-difference step h must be positive")
    return h


def mu_prime(F: AlgebraFamily, t: float, h: float | None = None) -> np.ndarray:
    """Central difference ``(gamma(t+h) - gamma(t-h)) / 2h`` of the interpolated fibers.

    ``h`` defaults to the grid spacing; the error is O(h^2) for smooth families.
    """
    _interval_family(F)
    h = _step(F, h)
    t = float(t)
    if not (_inside(t - h, F.base.t0, F.base.t1) and _inside(t + h, F.base.t0, F.base.t1)):
        raise InputError(f"t = {t} needs a margin of h = {h} inside [{F.base.t0}, {F.base.t1}]")
    lo = F.fiber_at(max(t - h, F.base.t0)).alpha
    hi = F.fiber_at(min(t + h, F.base.t1)).alpha
    return (hi - lo) / (2 * h)


def _derivative(F: AlgebraFamily, t: float, h: float) -> np.ndarray:
    """``mu_prime`` with second-order one-sided stencils near the ends."""
    t0, t1 = F.base.t0, F.base.t1
    if _inside(t - h, t0, t1) and _inside(t + h, t0, t1):
        return mu_prime(F, t, h)
    f = lambda x: F.fiber_at(min(max(x, t0), t1)).alpha
    if t - h < t0:
        return (-3 * f(t) + 4 * f(t + h) - f(t + 2 * h)) / (2 * h)
    return (3 * f(t) - 4 * f(t - h) + f(t - 2 * h)) / (2 * h)


def solve_differential_connection(F: AlgebraFamily, t: float, h: float | None = None) -> CoboundarySolution:
    """Least-squares ``Gamma`` with ``dGamma = mu'(t)`` and the obstruction residual."""
    h = _step(F, h)
    dmu = mu_prime(F, t, h)
    return coboundary_solve(F.fiber_at(t), dmu)


@dataclass(frozen=True, eq=False)
class PathConnection:
    """Sampled ``Gamma`` at the nodes of an interval base."""

    base: BaseGrid
    samples: np.ndarray
    residuals: np.ndarray | None = None

    def __post_init__(self):
        if self.base.kind != "interval":
            raise InputError("path connections live on interval bases")
        S = np.array(self.samples, dtype=float)
        if S.ndim != 3 or S.shape[1] != S.shape[2] or S.shape[0] != self.base.num_nodes:
            raise InputError(f"samples must have shape ({self.base.num_nodes}, n, n), got {S.shape}")
        if not np.all(np.isfinite(S)):
            raise InputError("connection samples contain non-finite entries")
        S.flags.writeable = False
        object.__setattr__(self, "samples", S)
        if self.residuals is not None:
            r = np.array(self.residuals, dtype=float)
            if r.shape != (S.shape[0],) or np.any(r < 0):
                raise InputError("residuals must be one non-negative number per node")
            r.flags.writeable = False
            object.__setattr__(self, "residuals", r)

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    def __call__(self, t: float) -> np.ndarray:
        return self._spline(t).reshape(self.n, self.n)

    @property
    def _spline(self):
        sp = self.__dict__.get("_sp")
        if sp is None:
            ts, ys = self.base.axis, self.samples.reshape(len(self.base.axis), -1)
            if len(ts) >= 4:
                sp = CubicSpline(ts, ys, axis=0)
            else:
                sp = lambda t: np.array([np.interp(t, ts, ys[:, k]) for k in range(ys.shape[1])])
            self.__dict__["_sp"] = sp
        return sp

    def obstruction_between(self, a: float, b: float) -> float:
        """Largest node residual on the nodes bracketing ``[a, b]``."""
        if self.residuals is None:
            return 0.0
        lo, hi = min(a, b), max(a, b)
        ts = self.base.axis
        i = max(int(np.searchsorted(ts, lo, side="right")) - 1, 0)
        j = min(int(np.searchsorted(ts, hi, side="left")), len(ts) - 1)
        return float(self.residuals[i : j + 1].max())

    def to_dict(self) -> dict:
        return {
            "base": self.base.to_dict(),
            "gamma_samples": self.samples.tolist(),
            "residuals": None if self.residuals is None else self.residuals.tolist(),
        }


def connection_along(F: AlgebraFamily, h: float | None = None, workers: int | None = None) -> PathConnection:
    """Solve for ``Gamma`` at every node; end nodes use one-sided differences."""
    _interval_family(F)
    h = _step(F, h)

    def solve(s):
        t = F.base.axis[s]
        return coboundary_solve(F.fiber(s), _derivative(F, t, h))

    sols = _map_nodes(solve, range(F.num_nodes), workers)
    return PathConnection(F.base, np.stack([s.G for s in sols]), np.array([s.residual for s in sols]))


@dataclass(frozen=True, eq=False)
class TransportMap:
    source_t: float
    target_t: float
    phi: np.ndarray
    steps: int
    obstruction: float = 0.0
    non_multiplicative_region: bool = False

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.phi))

    def to_dict(self) -> dict:
        c = self.cond
        return {
            "t0": self.source_t,
            "t1": self.target_t,
            "phi": np.asarray(self.phi).tolist(),
            "steps": self.steps,
            "cond": c if np.isfinite(c) else None,
            "obstruction": self.obstruction,
            "non_multiplicative_region": self.non_multiplicative_region,
        }


def rk4_transport(gamma: Callable[[float], np.ndarray], n: int, t0: float, t1: float, steps: int) -> np.ndarray:
    """Classical RK4 for ``Phi' = -Gamma(t) Phi`` with ``Phi(t0) = I``."""
    h = (t1 - t0) / steps
    P = np.eye(n)
    t = t0
    for k in range(steps):
        t = t0 + k * h
        k1 = -gamma(t) @ P
        G_mid = gamma(t + h / 2)
        k2 = -G_mid @ (P + h / 2 * k1)
        k3 = -G_mid @ (P + h / 2 * k2)
        k4 = -gamma(t + h) @ (P + h * k3)
        P = P + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return P


def parallel_transport(
    F: AlgebraFamily,
    connection: PathConnection | Callable[[float], np.ndarray],
    t0: float,
    t1: float,
    steps: int = 1000,
    tol: float = DEFAULT_TOL,
) -> TransportMap:
    """Transport from the fiber at ``t0`` to the fiber at ``t1``.

    ``connection`` is a sampled :class:`PathConnection` (cubic-spline
    interpolated) or any callable ``t -> Gamma(t)``. When the sampled
    obstruction between ``t0`` and ``t1`` exceeds ``tol`` the map is still
    computed but flagged as crossing a non-multiplicative region.
    """
    _interval_family(F)
    t0 = F.base.normalize_point(t0)
    t1 = F.base.normalize_point(t1)
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise InputError("steps must be a positive integer")
    steps = int(steps)
    if isinstance(connection, PathConnection):
        if connection.n != F.n:
            raise InputError(f"connection is {connection.n}x{connection.n}, family has n = {F.n}")
        obstruction = connection.obstruction_between(t0, t1)
    else:
        obstruction = 0.0
    phi = rk4_transport(connection, F.n, t0, t1, steps)
    return TransportMap(t0, t1, phi, steps, obstruction, obstruction > tol)


def multiplicativity_defect(phi, A_src: StructureConstants, A_tgt: StructureConstants) -> float:
    """``max_ij || Phi(x_i x_j) - Phi(x_i) Phi(x_j) ||_inf``; zero iff ``Phi`` is multiplicative."""
    P = np.asarray(phi.phi if isinstance(phi, TransportMap) else phi, dtype=float)
    A_src, A_tgt = as_algebra(A_src), as_algebra(A_tgt)
    n = A_src.n
    if A_tgt.n != n or P.shape != (n, n):
        raise InputError(f"dimension mismatch: map {P.shape}, algebras {A_src.n} and {A_tgt.n}")
    lhs = np.einsum("ijc,kc->ijk", A_src.alpha, P)
    rhs = np.einsum("ai,bj,abk->ijk", P, P, A_tgt.alpha)
    return float(np.abs(lhs - rhs).max())


@dataclass(frozen=True)
class CoherenceReport:
    identity_defect: float | None
    composition_defect: float | None
    lipschitz: float
    tol: float

    @property
    def coherent(self) -> bool:
        checks = [d for d in (self.identity_defect, self.composition_defect) if d is not None]
        return all(d <= self.tol for d in checks)

    def to_dict(self) -> dict:
        return {
            "identity_defect": self.identity_defect,
            "composition_defect": self.composition_defect,
            "lipschitz": self.lipschitz,
            "tol": self.tol,
            "coherent": self.coherent,
        }


def connection_from_transports(
    samples: Sequence[TransportMap],
    h: float | None = None,
    tol: float = 1e-6,
) -> tuple[PathConnection, CoherenceReport]:
    """Recover ``Gamma = -Phi' Phi^-1`` from transports out of a common source.

    Maps whose source is the common start ``t0`` (the smallest source time) form
    the path; they must sit on an equispaced grid. Any other maps ``s -> t`` are
    checked against the composition ``Phi(t0->t) Phi(t0->s)^-1``. Derivatives use
    second-order differences, so ``Gamma`` is accurate to O(spacing^2).
    Coherence failures are reported, not raised.
    """
    if not samples:
        raise InputError("no transport samples")
    for m in samples:
        if np.linalg.cond(m.phi) > INVERTIBLE_COND:
            raise InputError(f"transport {m.source_t} -> {m.target_t} is not invertible")
    t0 = min(m.source_t for m in samples)
    path = sorted((m for m in samples if m.source_t == t0), key=lambda m: m.target_t)
    ts = np.array([m.target_t for m in path])
    if len(ts) < 3 or np.any(np.diff(ts) <= 0):
        raise InputError("need at least 3 distinct target times from the common source")
    dt = np.diff(ts)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise InputError("transport samples must be equispaced")
    if h is not None and dt[0] > h * (1 + 1e-12):
        raise InputError(f"sample spacing {dt[0]} exceeds h = {h}")

    Phis = np.stack([m.phi for m in path])
    dPhi = np.gradient(Phis, ts, axis=0, edge_order=2)
    gamma = -np.einsum("tij,tjk->tik", dPhi, np.linalg.inv(Phis))
    base = BaseGrid.interval(ts[0], ts[-1], len(ts))

    ident = None
    if ts[0] == t0:
        ident = float(np.abs(Phis[0] - np.eye(Phis.shape[1])).max())
    index = {float(t): k for k, t in enumerate(ts)}
    comp = []
    for m in samples:
        if m.source_t == t0:
            continue
        a, b = index.get(float(m.source_t)), index.get(float(m.target_t))
        if a is None or b is None:
            continue
        expected = Phis[b] @ np.linalg.inv(Phis[a])
        comp.append(float(np.abs(m.phi - expected).max()))
    lip = float(np.max(np.abs(np.diff(Phis, axis=0)).max(axis=(1, 2)) / dt))
    report = CoherenceReport(ident, max(comp) if comp else None, lip, tol)
    return PathConnection(base, gamma), report
