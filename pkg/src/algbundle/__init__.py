"""Finite-dimensional real algebras as structure-constant tensors, and families of them.

Submodules: ``algebra`` (tensors, products, generators), ``cohomology`` (tangent
operator, cocycles, coboundaries), ``invariants`` (signatures, isomorphism
search), ``variety`` (projection, embedding), ``family`` (sampled bundles),
``connection`` (differential connections, transport), ``io`` and ``cli``.
"""

from .algebra import StructureConstants, associator_residual, change_basis, find_unit, multiply
from .errors import AlgebraError, InputError, PreconditionError
from .family import AlgebraFamily, BaseGrid

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "AlgebraFamily",
    "BaseGrid",
    "InputError",
    "PreconditionError",
    "StructureConstants",
    "associator_residual",
    "change_basis",
    "find_unit",
    "multiply",
]
