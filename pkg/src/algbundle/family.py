"""Families of algebras over a sampled base, stored in one global frame.

A family is a tensor-valued grid function: ``gamma[s]`` holds the structure
constants of the fiber over node ``s``. Between nodes fibers are interpolated
entrywise, which in general leaves the associator variety; only node fibers are
checked by :func:`validate_family`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .algebra import (
    DEFAULT_TOL,
    StructureConstants,
    as_algebra,
    associator_residual,
    change_basis,
    find_unit,
    gen_quadratic,
)
from .errors import InputError, PreconditionError
from .invariants import IsoSignature, iso_signature, try_isomorphism

KINDS = ("interval", "circle", "grid2d")
INTERPOLATIONS = ("linear", "cubic")


def _map_nodes(fn: Callable, items: Sequence, workers: int | None):
    """Apply ``fn`` per node; results come back in node order either way."""
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


@dataclass(frozen=True)
class BaseGrid:
    """Sampled base space.

    ``interval``: ``nodes`` equispaced points on ``[t0, t1]`` (endpoints included).
    ``circle``: ``nodes`` points ``2 pi k / nodes``, periodic.
    ``grid2d``: product of the interval ``(t0, t1, nodes)`` with ``y = (s0, s1, ny)``;
    nodes are ordered lexicographically, first axis slowest.
    """

    kind: str
    t0: float = 0.0
    t1: float = 1.0
    nodes: int = 2
    y: tuple[float, float, int] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown base kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "circle":
            if isinstance(self.nodes, bool) or not isinstance(self.nodes, (int, np.integer)) or self.nodes < 3:
                raise InputError("circle base needs at least 3 nodes")
            object.__setattr__(self, "t0", 0.0)
            object.__setattr__(self, "t1", 2 * math.pi)
        else:
            _check_interval(self.t0, self.t1, self.nodes)
        if self.kind == "grid2d":
            if self.y is None or len(self.y) != 3:
                raise InputError("grid2d base needs a second axis (s0, s1, nodes)")
            _check_interval(*self.y)
            object.__setattr__(self, "y", (float(self.y[0]), float(self.y[1]), int(self.y[2])))
        elif self.y is not None:
            raise InputError(f"{self.kind} base takes no second axis")
        object.__setattr__(self, "nodes", int(self.nodes))
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "t1", float(self.t1))

    @classmethod
    def interval(cls, t0: float, t1: float, nodes: int) -> "BaseGrid":
        return cls("interval", t0, t1, nodes)

    @classmethod
    def circle(cls, nodes: int) -> "BaseGrid":
        return cls("circle", nodes=nodes)

    @classmethod
    def grid2d(cls, x: tuple[float, float, int], y: tuple[float, float, int]) -> "BaseGrid":
        return cls("grid2d", x[0], x[1], x[2], tuple(y))

    @property
    def num_nodes(self) -> int:
        if self.kind == "grid2d":
            return self.nodes * self.y[2]
        return self.nodes

    @cached_property
    def axis(self) -> np.ndarray:
        if self.kind == "circle":
            return 2 * np.pi * np.arange(self.nodes) / self.nodes
        return np.linspace(self.t0, self.t1, self.nodes)

    @cached_property
    def axis_y(self) -> np.ndarray | None:
        if self.y is None:
            return None
        return np.linspace(*self.y)

    @property
    def spacing(self) -> float:
        if self.kind == "circle":
            return 2 * np.pi / self.nodes
        return (self.t1 - self.t0) / (self.nodes - 1)

    def points(self) -> np.ndarray:
        """Node coordinates: shape ``(N,)`` for 1-D bases, ``(N, 2)`` for grid2d."""
        if self.kind == "grid2d":
            X, Y = np.meshgrid(self.axis, self.axis_y, indexing="ij")
            return np.column_stack([X.ravel(), Y.ravel()])
        return self.axis.copy()

    def normalize_point(self, x):
        """Validate a base point; circle points are reduced mod 2 pi."""
        if self.kind == "grid2d":
            x = np.asarray(x, dtype=float)
            if x.shape != (2,):
                raise InputError(f"grid2d base points are pairs, got {x!r}")
            if not (_inside(x[0], self.t0, self.t1) and _inside(x[1], self.y[0], self.y[1])):
                raise InputError(f"point {tuple(x)} outside the base domain")
            return x
        try:
            x = float(x)
        except (TypeError, ValueError):
            raise InputError(f"base point must be a number, got {x!r}") from None
        if not math.isfinite(x):
            raise InputError("base point must be finite")
        if self.kind == "circle":
            return x % (2 * math.pi)
        if not _inside(x, self.t0, self.t1):
            raise InputError(f"point {x!r} outside [{self.t0}, {self.t1}]")
        return x

    def node_index(self, x) -> int | None:
        """Index of the node exactly equal to ``x``, if any."""
        if self.kind == "grid2d":
            i = np.flatnonzero(self.axis == x[0])
            j = np.flatnonzero(self.axis_y == x[1])
            if i.size and j.size:
                return int(i[0]) * self.y[2] + int(j[0])
            return None
        hit = np.flatnonzero(self.axis == x)
        return int(hit[0]) if hit.size else None

    def to_dict(self) -> dict:
        if self.kind == "circle":
            return {"kind": "circle", "nodes": self.nodes}
        d = {"kind": self.kind, "t0": self.t0, "t1": self.t1, "nodes": self.nodes}
        if self.kind == "grid2d":
            d = {
                "kind": "grid2d",
                "x": {"t0": self.t0, "t1": self.t1, "nodes": self.nodes},
                "y": {"t0": self.y[0], "t1": self.y[1], "nodes": self.y[2]},
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BaseGrid":
        if not isinstance(d, dict) or "kind" not in d:
            raise InputError("base must be an object with a 'kind' field")
        try:
            kind = d["kind"]
            if kind == "circle":
                return cls.circle(d["nodes"])
            if kind == "grid2d":
                x, y = d["x"], d["y"]
                return cls.grid2d((x["t0"], x["t1"], x["nodes"]), (y["t0"], y["t1"], y["nodes"]))
            return cls(kind, d["t0"], d["t1"], d["nodes"])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed base description: {exc!r}") from None


def _check_interval(t0, t1, nodes):
    try:
        t0, t1 = float(t0), float(t1)
    except (TypeError, ValueError):
        raise InputError("interval bounds must be numbers") from None
    if isinstance(nodes, bool) or not isinstance(nodes, (int, np.integer)):
        raise InputError(f"node count must be an integer, got {nodes!r}")
    if not (math.isfinite(t0) and math.isfinite(t1)) or not t0 < t1:
        raise InputError(f"interval needs finite t0 < t1, got {t0}, {t1}")
    if nodes < 2:
        raise InputError("interval base needs at least 2 nodes")


def _inside(x, a, b, slack=1e-12) -> bool:
    return a - slack * max(1.0, abs(a)) <= x <= b + slack * max(1.0, abs(b))


@dataclass(frozen=True, eq=False)
class AlgebraFamily:
    """Per-node structure constants over a :class:`BaseGrid`."""

    base: BaseGrid
    gamma: np.ndarray
    interpolation: str = "linear"

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.ndim != 4 or not (g.shape[1] == g.shape[2] == g.shape[3]) or g.shape[1] < 1:
            raise InputError(f"gamma must have shape (nodes, n, n, n), got {g.shape}")
        if g.shape[0] != self.base.num_nodes:
            raise InputError(f"gamma has {g.shape[0]} tensors for {self.base.num_nodes} nodes")
        if not np.all(np.isfinite(g)):
            raise InputError("gamma contains non-finite entries")
        if self.interpolation not in INTERPOLATIONS:
            raise InputError(f"interpolation must be one of {INTERPOLATIONS}")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    @property
    def n(self) -> int:
        return self.gamma.shape[1]

    @property
    def num_nodes(self) -> int:
        return self.gamma.shape[0]

    def __repr__(self):
        return f"AlgebraFamily(n={self.n}, base={self.base.kind}, nodes={self.num_nodes})"

    def fiber(self, s: int) -> StructureConstants:
        return StructureConstants(self.gamma[s])

    def fibers(self) -> list[StructureConstants]:
        return [self.fiber(s) for s in range(self.num_nodes)]

    @cached_property
    def _interpolant(self):
        base, flat = self.base, self.gamma.reshape(self.num_nodes, -1)
        cubic = self.interpolation == "cubic"
        if base.kind == "grid2d":
            nx, ny = base.nodes, base.y[2]
            method = "cubic" if cubic and min(nx, ny) >= 4 else "linear"
            rgi = RegularGridInterpolator(
                (base.axis, base.axis_y), flat.reshape(nx, ny, -1), method=method
            )
            return lambda x: rgi(np.asarray(x)[None, :])[0]
        if base.kind == "circle":
            ts = np.append(base.axis, 2 * np.pi)
            ys = np.vstack([flat, flat[:1]])
            if cubic:
                return CubicSpline(ts, ys, axis=0, bc_type="periodic")
            return lambda x: _linear(ts, ys, x)
        if cubic and base.nodes >= 3:
            return CubicSpline(base.axis, flat, axis=0)
        return lambda x: _linear(base.axis, flat, x)

    def fiber_at(self, x) -> StructureConstants:
        """Fiber over a base point; stored tensors are returned exactly at nodes."""
        x = self.base.normalize_point(x)
        s = self.base.node_index(x)
        if s is not None:
            return self.fiber(s)
        vals = np.asarray(self._interpolant(x), dtype=float)
        return StructureConstants(vals.reshape((self.n,) * 3))


def _linear(ts: np.ndarray, ys: np.ndarray, x: float) -> np.ndarray:
    k = int(np.clip(np.searchsorted(ts, x, side="right") - 1, 0, len(ts) - 2))
    w = (x - ts[k]) / (ts[k + 1] - ts[k])
    return (1.0 - w) * ys[k] + w * ys[k + 1]


# -- constructors ---------------------------------------------------------------


def constant_family(A: StructureConstants, base: BaseGrid, interpolation: str = "linear") -> AlgebraFamily:
    A = as_algebra(A)
    return AlgebraFamily(base, np.broadcast_to(A.alpha, (base.num_nodes,) + A.alpha.shape), interpolation)


def family_from_function(fn: Callable, base: BaseGrid, interpolation: str = "linear") -> AlgebraFamily:
    """Sample ``fn(point) -> StructureConstants`` at every node."""
    return AlgebraFamily(base, np.stack([as_algebra(fn(p)).alpha for p in base.points()]), interpolation)


def deformation_family(base: BaseGrid, interpolation: str = "linear") -> AlgebraFamily:
    """``x_2^2 = t x_1`` with ``x_1`` the unit: the fiber over ``t`` is ``R[x]/(x^2 - t)``."""
    return family_from_function(gen_quadratic, base, interpolation)


def blend_family(A, B, base: BaseGrid, interpolation: str = "linear") -> AlgebraFamily:
    """``(1 - t) A + t B`` over an interval base."""
    A, B = as_algebra(A), as_algebra(B)
    return family_from_function(lambda t: (1 - t) * A.alpha + t * B.alpha, base, interpolation)


def conjugation_family(A, frame: Callable, base: BaseGrid, interpolation: str = "linear") -> AlgebraFamily:
    """Fibers ``G(t) mu_A(G(t)^-1 ., G(t)^-1 .)`` for a matrix-valued ``frame``."""
    A = as_algebra(A)
    return family_from_function(lambda t: change_basis(A, frame(t)), base, interpolation)


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


# -- operations -------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyValidation:
    residuals: np.ndarray
    tol: float

    @property
    def valid(self) -> bool:
        return bool(np.all(self.residuals <= self.tol))

    @property
    def worst_node(self) -> int:
        return int(np.argmax(self.residuals))

    def to_dict(self) -> dict:
        return {"tol": self.tol, "valid": self.valid, "residuals": self.residuals.tolist()}


def validate_family(F: AlgebraFamily, tol: float = DEFAULT_TOL, workers: int | None = None) -> FamilyValidation:
    res = _map_nodes(lambda s: associator_residual(F.fiber(s)).max_abs, range(F.num_nodes), workers)
    return FamilyValidation(np.array(res, dtype=float), tol)


def _sections(F: AlgebraFamily, s, name: str) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (F.num_nodes, F.n):
        raise InputError(f"section {name} must have shape {(F.num_nodes, F.n)}, got {s.shape}")
    return s


def section_product(F: AlgebraFamily, s, t) -> np.ndarray:
    """Pointwise product ``(s t)(x) = s(x) t(x)`` in each node's fiber."""
    s = _sections(F, s, "s")
    t = _sections(F, t, "t")
    return np.einsum("si,sj,sijk->sk", s, t, F.gamma)


def unit_section(F: AlgebraFamily, tol: float = DEFAULT_TOL) -> np.ndarray:
    units = []
    for s in range(F.num_nodes):
        e = find_unit(F.fiber(s), tol)
        if e is None:
            raise PreconditionError(f"fiber at node {s} has no unit")
        units.append(e)
    return np.array(units)


@dataclass(frozen=True)
class ClassifyReport:
    signatures: list[IsoSignature]
    labels: np.ndarray
    clusters: list[list[int]]
    strict_candidate: bool
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "clusters": [list(c) for c in self.clusters],
            "labels": self.labels.tolist(),
            "strict_candidate": self.strict_candidate,
            "nodes": [
                {"node": s, "residual": float(r), "cluster": int(c), **sig.to_dict()}
                for s, (sig, c, r) in enumerate(zip(self.signatures, self.labels, self.residuals))
            ],
        }

    def rows(self) -> list[dict]:
        return [
            {
                "node": s,
                "residual": float(self.residuals[s]),
                "dim": sig.dim,
                "commutative": int(sig.commutative),
                "unital": int(sig.unital),
                "p": sig.trace_form_signature[0],
                "q": sig.trace_form_signature[1],
                "z": sig.trace_form_signature[2],
                "z2_dim": sig.z2_dim,
                "center_dim": sig.center_dim,
                "cluster": int(self.labels[s]),
            }
            for s, sig in enumerate(self.signatures)
        ]


def classify_map(
    F: AlgebraFamily,
    tol: float = DEFAULT_TOL,
    attempts: int = 4,
    seed: int = 0,
    workers: int | None = None,
) -> ClassifyReport:
    """Per-node isomorphism signatures, clustered by exact equality.

    A single cluster is a strictness candidate only if every pair of consecutive
    nodes also has an explicit isomorphism certificate.
    """
    check = validate_family(F, tol, workers)
    if not check.valid:
        w = check.worst_node
        raise PreconditionError(
            f"family is not associative at node {w}: residual {check.residuals[w]:.3e} > tol {tol:.3e}"
        )
    sigs = _map_nodes(lambda s: iso_signature(F.fiber(s), tol), range(F.num_nodes), workers)
    ids: dict[tuple, int] = {}
    labels = np.array([ids.setdefault(sig.key(), len(ids)) for sig in sigs], dtype=int)
    clusters = [np.flatnonzero(labels == c).tolist() for c in range(len(ids))]

    strict = False
    if len(clusters) == 1:

        def linked(s):
            return try_isomorphism(F.fiber(s), F.fiber(s + 1), attempts, tol, seed + s) is not None

        strict = all(_map_nodes(linked, range(F.num_nodes - 1), workers))
    return ClassifyReport(sigs, labels, clusters, strict, check.residuals)


def pullback(F: AlgebraFamily, base: BaseGrid, phi: Callable | Iterable) -> AlgebraFamily:
    """Family over ``base`` whose fiber at node ``s`` is ``F.fiber_at(phi(s))``.

    ``phi`` is either a callable on base points or a sequence with one point of
    ``F``'s base per node of ``base``.
    """
    pts = base.points()
    if callable(phi):
        targets = [phi(p) for p in pts]
    else:
        targets = list(phi)
    if len(targets) != base.num_nodes:
        raise InputError(f"map has {len(targets)} values for {base.num_nodes} nodes")
    return AlgebraFamily(base, np.stack([F.fiber_at(x).alpha for x in targets]), F.interpolation)
