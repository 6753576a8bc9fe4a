"""Exception types shared across the package."""


class ShapeMismatchError(ValueError):
    """Operands have incompatible dimensions or variable counts."""


class CommutationError(ValueError):
    """A matrix tuple fails the pairwise commutation test."""


class SerializationError(ValueError):
    """A JSON payload violates the wire schema."""


class ScreenFailure(Exception):
    """A necessity pre-screen rejected the input.

    Carries the witness point and the offending value so callers can
    report exactly where the hypothesis fails.
    """

    def __init__(self, message, point=None, value=None):
        super().__init__(message)
        self.point = point
        self.value = value


class CertificateNotFound(Exception):
    """No certificate was found up to the requested degree.

    This is a statement about the search, never about mathematical
    nonexistence: membership may still hold at a higher degree.
    """

    def __init__(self, message, degrees_tried=(), diagnostics=None, witness=None):
        super().__init__(message)
        self.degrees_tried = list(degrees_tried)
        self.diagnostics = diagnostics or {}
        self.witness = witness


class RealizationError(Exception):
    """The lurking-contraction construction failed a consistency check."""
