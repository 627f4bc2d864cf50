"""Exception types shared across the package."""


class AdaptiveSyncError(Exception):
    """Base class for all errors raised by this package."""


class SelfLoopError(AdaptiveSyncError):
    """A link connects a node to itself."""


class DuplicateLinkError(AdaptiveSyncError):
    """The same unordered node pair appears more than once."""


class NodeIndexOutOfRangeError(AdaptiveSyncError):
    """A link references a node outside 1..N."""


class DisconnectedGraphError(AdaptiveSyncError):
    """Operation requires a connected graph."""


class MalformedPolynomialError(AdaptiveSyncError):
    """Polynomial term list is inconsistent with the declared dimension."""


class DimensionMismatchError(AdaptiveSyncError):
    """Matrix or state dimensions are inconsistent."""


class StructureFailedError(AdaptiveSyncError):
    """Certificate structure conditions (P symmetric positive definite,
    coupling equation) do not hold."""

    def __init__(self, report):
        super().__init__(f"certificate structure check failed: {report}")
        self.report = report


class InequalityFailedError(AdaptiveSyncError):
    """Sampled Jacobian matrix inequality is violated somewhere in the box."""

    def __init__(self, report):
        super().__init__(f"jacobian inequality check failed: {report}")
        self.report = report


class NonFiniteStateError(AdaptiveSyncError):
    """State contains NaN or infinity."""


class DivergedError(AdaptiveSyncError):
    """State magnitude exceeded the divergence bound."""


class SchemaError(AdaptiveSyncError):
    """Scenario file failed structural or semantic validation."""


class UnknownParameterError(AdaptiveSyncError):
    """Sweep parameter path does not address a numeric scalar."""
