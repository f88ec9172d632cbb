"""Exception hierarchy for the toolkit."""


class GlAntennaError(Exception):
    """Base class for all toolkit errors."""


class DomainError(GlAntennaError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GeometryError(GlAntennaError, ValueError):
    """A scene or antenna description is geometrically inconsistent."""


class ResolutionError(GeometryError):
    """The grid spacing is too coarse to resolve a scene feature."""


class ConfigError(GlAntennaError, ValueError):
    """A configuration document or object violates its contract."""


class InstabilityError(GlAntennaError, RuntimeError):
    """The time stepping produced non-finite field values."""

    def __init__(self, message, step=None, location=None):
        super().__init__(message)
        self.step = step
        self.location = location


class ExtractionError(GlAntennaError, RuntimeError):
    """Post-processing could not extract the requested quantity."""
