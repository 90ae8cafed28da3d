"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class NPlanesError(Exception):
    """Base class for all library errors."""


class UsageError(NPlanesError, ValueError):
    """Caller violated a documented precondition (wrong shapes, mixed m, ...)."""


class DimensionCapError(UsageError):
    """Half-dimension m is outside the supported range 2..6."""


class DegenerateSubspaceError(NPlanesError):
    """A spanning matrix is rank-deficient, or a vector is not a decomposable
    m-vector, so no plane can be produced from it."""


class SingularMatrixError(NPlanesError):
    """A matrix meant to represent a projective transformation is numerically
    singular."""


class EnumerationBudgetError(NPlanesError):
    """Word enumeration would exceed the configured budget.

    ``partial`` carries everything enumerated before the cap was hit.
    """

    def __init__(self, message: str, partial: list | None = None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class ConvergenceUndecidedError(NPlanesError):
    """A matrix sequence is not numerically Cauchy; no limit is reported.

    ``diffs`` carries the tail of consecutive max-entry differences.
    """

    def __init__(self, message: str, diffs=None):
        super().__init__(message)
        self.diffs = diffs


class NotALimitPlaneError(NPlanesError):
    """The compound limit has rank > 1, so the sequence does not converge to a
    single plane.  ``rank`` carries the observed numerical rank."""

    def __init__(self, message: str, rank: int, gap: float = float("nan")):
        super().__init__(message)
        self.rank = rank
        self.gap = gap


class CSingularError(NPlanesError):
    """The lower-left block C of a transformation is numerically singular,
    so the isometric-sphere quantities are undefined for it."""

    def __init__(self, message: str, word=None):
        super().__init__(message)
        self.word = word


class ChartEscapeError(NPlanesError):
    """A point (or its image) left the affine chart required for the
    volume-form computation."""


class InvalidSchottkyError(NPlanesError):
    """The eigenvalue separation needed for a diagonal Schottky generator
    does not hold."""


class CombinationInfeasibleError(NPlanesError):
    """No admissible scaling exists for the requested free-product
    combination."""


class VREstimateError(NPlanesError):
    """A singular C block was met while estimating the tube radius.
    ``word`` carries the offending group word."""

    def __init__(self, message: str, word=None):
        super().__init__(message)
        self.word = word


class ConfigError(NPlanesError):
    """A configuration file or preset string could not be parsed.

    ``line``/``column`` are set when a position is known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column
