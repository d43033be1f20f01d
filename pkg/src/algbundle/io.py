"""JSON documents for algebras, bilinear maps, families, sections and connections.

Floats are written with 17 significant digits so every double survives a
write/read cycle bit-exactly; output is fully deterministic (keys keep
insertion order, no whitespace variation).
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .algebra import StructureConstants
from .connection import PathConnection, TransportMap
from .errors import InputError
from .family import AlgebraFamily, BaseGrid


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def dumps(obj: Any) -> str:
    """Serialize plain data (dict/list/str/int/float/bool/None and numpy scalars/arrays)."""
    parts: list[str] = []
    _emit(obj, parts)
    return "".join(parts)


def _emit(obj, out: list[str]) -> None:
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _emit(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(", ")
            _emit(val, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None


def read_document(path: str) -> Any:
    """Read a JSON file; ``-`` reads standard input."""
    if path == "-":
        return loads(sys.stdin.read())
    try:
        return loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _require(doc, key: str, what: str):
    if not isinstance(doc, dict):
        raise InputError(f"{what} document must be a JSON object")
    if key not in doc:
        raise InputError(f"{what} document is missing '{key}'")
    return doc[key]


def _numeric(value, shape: tuple, what: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{what} must be a nested array of numbers") from None
    if arr.shape != shape:
        raise InputError(f"{what} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} contains non-finite entries")
    return arr


def _dimension(doc, what: str) -> int:
    n = _require(doc, "n", what)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InputError(f"{what}: 'n' must be a positive integer")
    return n


# -- algebra ------------------------------------------------------------------


def algebra_to_dict(A: StructureConstants) -> dict:
    return {"n": A.n, "alpha": A.alpha.tolist()}


def algebra_from_dict(doc) -> StructureConstants:
    n = _dimension(doc, "algebra")
    return StructureConstants(_numeric(_require(doc, "alpha", "algebra"), (n, n, n), "alpha"))


def bilinear_to_dict(f: np.ndarray) -> dict:
    f = np.asarray(f)
    return {"n": f.shape[0], "f": f.tolist()}


def bilinear_from_dict(doc, n: int) -> np.ndarray:
    f = _require(doc, "f", "bilinear map")
    if "n" in doc and doc["n"] != n:
        raise InputError(f"bilinear map has n = {doc['n']!r}, expected {n}")
    return _numeric(f, (n, n, n), "f")


def endomorphism_to_dict(G: np.ndarray) -> dict:
    G = np.asarray(G)
    return {"n": G.shape[0], "gamma": G.tolist()}


def endomorphism_from_dict(doc, n: int) -> np.ndarray:
    return _numeric(_require(doc, "gamma", "endomorphism"), (n, n), "gamma")


# -- family ---------------------------------------------------------------------


def family_to_dict(F: AlgebraFamily) -> dict:
    return {
        "n": F.n,
        "base": F.base.to_dict(),
        "interpolation": F.interpolation,
        "gamma": F.gamma.tolist(),
    }


def family_from_dict(doc) -> AlgebraFamily:
    n = _dimension(doc, "family")
    base = BaseGrid.from_dict(_require(doc, "base", "family"))
    interp = doc.get("interpolation", "linear")
    gamma = _numeric(_require(doc, "gamma", "family"), (base.num_nodes, n, n, n), "gamma")
    return AlgebraFamily(base, gamma, interp)


def section_to_dict(s: np.ndarray) -> dict:
    return {"values": np.asarray(s).tolist()}


def section_from_dict(doc, F: AlgebraFamily) -> np.ndarray:
    return _numeric(_require(doc, "values", "section"), (F.num_nodes, F.n), "section values")


def map_from_dict(doc) -> tuple[BaseGrid, list]:
    """Sampled base map: ``{"base": {...}, "points": [...]}`` with one point per new node."""
    base = BaseGrid.from_dict(_require(doc, "base", "map"))
    pts = _require(doc, "points", "map")
    if not isinstance(pts, list):
        raise InputError("map 'points' must be a list")
    return base, pts


# -- connection -------------------------------------------------------------------


def path_connection_to_dict(P: PathConnection) -> dict:
    return P.to_dict()


def path_connection_from_dict(doc) -> PathConnection:
    base = BaseGrid.from_dict(_require(doc, "base", "path connection"))
    raw = _require(doc, "gamma_samples", "path connection")
    try:
        S = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise InputError("gamma_samples must be numeric") from None
    if S.ndim != 3:
        raise InputError("gamma_samples must be a list of square matrices")
    res = doc.get("residuals")
    return PathConnection(base, S, None if res is None else np.asarray(res, dtype=float))


def transport_from_dict(doc) -> TransportMap:
    try:
        phi = np.array(_require(doc, "phi", "transport"), dtype=float)
    except (TypeError, ValueError):
        raise InputError("phi must be numeric") from None
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
        raise InputError("phi must be a square matrix")
    try:
        t0 = float(_require(doc, "t0", "transport"))
        t1 = float(_require(doc, "t1", "transport"))
        steps = int(doc.get("steps", 0))
    except (TypeError, ValueError):
        raise InputError("transport t0, t1 and steps must be numbers") from None
    return TransportMap(t0, t1, phi, steps)
