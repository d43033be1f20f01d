"""Exception types shared by the whole package."""


class AlgebraError(Exception):
    """Base class for expected, user-facing failures."""


class InputError(AlgebraError, ValueError):
    """Malformed input: wrong shapes, non-finite entries, bad parameters."""


class PreconditionError(AlgebraError):
    """Well-formed input that violates an operation's precondition."""
