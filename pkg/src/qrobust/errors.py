"""Exception types shared across the package."""


class QRobustError(Exception):
    """Base class for all package errors."""


class ValidationError(QRobustError):
    """An input violates a documented precondition or invariant."""


class ResourceCapError(QRobustError):
    """A computation would exceed a configured resource cap.

    The message names the cap that was hit so callers can raise it
    deliberately instead of silently burning memory.
    """


class DegenerateShiftError(QRobustError):
    """The sampled witness shift constant vanished.

    Happens when every sampled free state sits on the zero set of the
    witness expectation, typically because the parameter s is at or above
    the actual robustness/weight value.
    """
