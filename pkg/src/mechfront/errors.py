"""Exception hierarchy shared by all modules."""


class MechFrontError(Exception):
    """Base class for errors raised by this package."""


class InvalidSettingError(MechFrontError, ValueError):
    """Raised for settings with n < 1 or m < 2, or malformed orders."""


class DomainTooLargeError(MechFrontError):
    """Raised when a profile space would exceed the configured size cap."""


class NotInDomainError(MechFrontError, KeyError):
    """Raised when a profile lies outside a (restricted) profile space."""


class SpaceMismatchError(MechFrontError, ValueError):
    """Raised when two objects are defined on different profile spaces."""


class LPValidationError(MechFrontError, ValueError):
    """Raised for malformed linear programs."""


class ConsistencyError(MechFrontError):
    """Raised when computed results contradict a structural guarantee.

    ``diagnostics`` carries whatever evidence was available when the
    contradiction was detected.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DegenerateFrontierError(MechFrontError):
    """Raised by ``find_lower`` when the deficit at zero manipulability is 0."""
