"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: :class:`DataError` subclasses become
exit code 3, :class:`UsageError` exit code 2.
"""


class UasPlanError(Exception):
    """Base class for every error raised by this package."""


class DataError(UasPlanError):
    """Input data (scene, maps, paths) is malformed or inconsistent."""


class SceneParseError(DataError):
    """Malformed geometry in a scene document."""


class SceneSchemaError(DataError):
    """A required key is missing or has the wrong type."""


class BoundsError(DataError, IndexError):
    """A point or feature lies outside the bounding box."""


class CapacityError(DataError):
    """A synthetic scene request cannot be packed into its bounding box."""


class GeometryError(DataError):
    """Degenerate satellite geometry (singular normal matrix)."""


class PreconditionError(UasPlanError, ValueError):
    """A documented precondition of an operation does not hold."""


class InfeasibleTransitionError(UasPlanError):
    """A transition ends in an occupied cell."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class InfeasiblePathError(InfeasibleTransitionError):
    """A path traverses an occupied cell."""


class EmptyDomainError(DataError):
    """No free cells are available to sample from."""


class UsageError(UasPlanError):
    """Invalid command-line or configuration input."""
