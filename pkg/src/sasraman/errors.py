"""Exception hierarchy.

Everything raised on purpose by the library derives from :class:`SasError`.
Most classes also derive from ``ValueError`` so callers that only care about
bad input can catch that.
"""


class SasError(Exception):
    """Base class for all library errors."""


class PhysicsWarning(UserWarning):
    """A soft physical constraint is violated (e.g. gamma not << omega)."""


class InvalidDirectionError(SasError, ValueError):
    pass


class DispersionError(SasError, ValueError):
    pass


class SamplingError(SasError, ValueError):
    pass


class HelicityPurityError(SasError, ValueError):
    pass


class NormalizationError(SasError, ValueError):
    pass


class UnderResolvedBathError(SasError, ValueError):
    pass


class DomainError(SasError, ValueError):
    pass


class RecurrenceError(SasError, ValueError):
    """Evaluation time lies past the trusted fraction of the bath recurrence."""


class ResourceError(SasError, MemoryError):
    pass


class WindowError(SasError, ValueError):
    pass


class FarFieldError(SasError, ValueError):
    pass


class GrowthError(SasError, ValueError):
    """Complex frequency with positive imaginary part (exponential growth)."""


class SingularConstantError(SasError, ValueError):
    pass


class StationarityError(SasError, ValueError):
    pass


class UnderflowError(SasError, ValueError):
    pass


class ResolutionError(SasError, ValueError):
    pass


class GeometryError(SasError, ValueError):
    pass


class DegenerateDistributionError(SasError, ValueError):
    pass


class ThermalOccupationError(SasError):
    """Thermal phonon number too large for the vacuum approximation."""


class ConfigError(SasError, ValueError):
    """Scenario file failed validation.

    ``problems`` holds one ``(path, message)`` pair per violation.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{path or '<root>'}: {msg}" for path, msg in self.problems]
        super().__init__("invalid scenario:\n  " + "\n  ".join(lines))
